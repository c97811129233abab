public class Counters {
    public int tally(String text) {
        int a = 0;
        int b = 0;
        a++;
        a++;
        b--;
        a += 2;
        b -= 1;
        a *= 3;
        b = a;
        a = b + 1;
        ++a;
        --b;
        a <<= 1;
        return a + b;
    }
}
