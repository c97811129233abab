public class Scanner {
    public void scanAll(java.util.List<String> a, java.util.List<String> b, java.util.List<String> c) {
        for (String x : a) {
            System.out.println(x);
        }
        for (String y : b) {
            System.out.println(y);
        }
        for (String z : c) {
            System.out.println(z);
        }
        while (a.isEmpty()) {
            System.out.println("empty");
        }
        do {
            System.out.println("once");
        } while (b.isEmpty());
    }
}
