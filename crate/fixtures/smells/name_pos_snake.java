public class Legacy {
    public String read_config(String path) {
        return path.trim();
    }
}
