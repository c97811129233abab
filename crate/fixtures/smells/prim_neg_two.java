public class Point {
    public long combine(int x, int y) {
        return ((long) x << 32) | y;
    }
}
