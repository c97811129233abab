public class Mixer {
    public long addAndScale(long a, long b, long factor) {
        return (a + b) * factor;
    }
}
