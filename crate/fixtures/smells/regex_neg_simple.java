public class Digits {
    public boolean isNumber(String s) {
        return s.matches("[0-9]+");
    }
}
