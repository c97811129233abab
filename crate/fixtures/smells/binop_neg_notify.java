public class Bell {
    public void notifyListeners(String event) {
        System.out.println(event);
    }
}
