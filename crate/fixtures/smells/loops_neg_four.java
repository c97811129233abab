public class Printer {
    public void printAll(java.util.List<String> a, java.util.List<String> b) {
        for (String x : a) {
            System.out.println(x);
        }
        for (String y : b) {
            System.out.println(y);
        }
        while (a.isEmpty()) {
            System.out.println("empty");
        }
        for (String z : a) {
            System.out.println(z.length());
        }
    }
}
