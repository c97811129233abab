public class Filter {
    public boolean accepts(String s) {
        boolean present = s != null && !s.isEmpty();
        boolean shortText = s != null && s.length() < 10;
        return present && shortText;
    }
}
