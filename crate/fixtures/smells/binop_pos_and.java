public class Store {
    public void validateAndSave(String record) {
        System.out.println(record);
    }
}
