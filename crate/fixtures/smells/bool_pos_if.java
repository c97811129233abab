public class Shipping {
    public String shippingTier(String country, Integer weight) {
        if ((country != null && country.isEmpty()) || (weight != null && weight > 10) || country == null) {
            return "manual";
        }
        return "auto";
    }
}
