public class Address {
    public String formatAddress(String street, String city, String state, String zip, String country) {
        return street + ", " + city + ", " + state + " " + zip + ", " + country;
    }
}
