public class Tiny {
    public String f(String input) {
        return input.trim();
    }
}
