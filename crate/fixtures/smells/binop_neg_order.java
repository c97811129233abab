public class Orders {
    public String getOrderTotal(String order) {
        return order.trim();
    }
}
