public class EmailCheck {
    public boolean isEmail(String s) {
        return s.matches("^[a-z0-9._%+-]+@[a-z0-9.-]+\\.[a-z]{2,}$");
    }
}
