public class Worker {
    public void ComputeTotal(String input) {
        System.out.println(input);
    }
}
