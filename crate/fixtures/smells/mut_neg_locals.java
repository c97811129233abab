public class Locals {
    public int compute(String text) {
        int a = 1;
        int b = a + 2;
        int c = b * 3;
        int d = c - a;
        return d;
    }
}
