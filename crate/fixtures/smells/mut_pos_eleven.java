public class Accumulator {
    public int accumulate(String label) {
        int acc = 0;
        acc = acc + 0;
        acc = acc + 1;
        acc = acc + 2;
        acc = acc + 3;
        acc = acc + 4;
        acc = acc + 5;
        acc = acc + 6;
        acc = acc + 7;
        acc = acc + 8;
        acc = acc + 9;
        acc = acc + 10;
        return acc;
    }
}
