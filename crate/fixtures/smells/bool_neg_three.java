public class Guard {
    public boolean isReady(Object a, Object b) {
        return a != null && b != null && !a.equals(b);
    }
}
