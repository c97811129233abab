public class Runner {
    public void run(String input) {
        System.out.println(input);
    }
}
