public class Greeter {
    public String greetUser(String greeting, String name) {
        return greeting + ", " + name;
    }
}
