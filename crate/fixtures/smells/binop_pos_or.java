public class Cache {
    public String loadOrCreate(String key) {
        return key.trim();
    }
}
