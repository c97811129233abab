public class Profile {
    public String describe(int age, String name, String city) {
        return name + age + city;
    }
}
