public class Builder {
    public int buildValue(String label) {
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
        return acc;
    }
}
