public class Booking {
    public String reserve(int day, int month, int year, boolean confirmed, String guest) {
        return guest + day + month + year + confirmed;
    }
}
