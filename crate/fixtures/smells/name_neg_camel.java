public class Calculator {
    public String computeTotal(String input) {
        return input.trim();
    }
}
