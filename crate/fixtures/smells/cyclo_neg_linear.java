public class Sums {
    public int addThree(int a, String label) {
        int b = a + 1;
        int c = b * 2;
        System.out.println(label);
        return c - a;
    }
}
