public class Inventory {
    private final java.util.Map<String, Integer> stock = new java.util.HashMap<>();

    public Inventory() {
        System.out.println("created");
    }

    public int quantityOf(String item) {
        return stock.getOrDefault(item, 0);
    }

    public void restock(String item, Integer amount) {
        stock.merge(item, amount, Integer::sum);
    }
}
