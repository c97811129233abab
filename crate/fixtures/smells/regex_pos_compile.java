public class DateParse {
    public java.util.regex.Pattern datePattern() {
        return java.util.regex.Pattern.compile("(\\d{4})-(\\d{2})-(\\d{2})T(\\d{2}):(\\d{2})");
    }
}
