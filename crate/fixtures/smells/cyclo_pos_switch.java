public class Weekday {
    public String dayName(int day) {
        switch (day) {
            case 1: return "mon";
            case 2: return "tue";
            case 3: return "wed";
            case 4: return "thu";
            case 5: return "fri";
            case 6: return "sat";
            case 7: return "sun";
            case 8: return "holiday";
            case 9: return "leave";
            case 10: return "sick";
            case 11: return "remote";
            default: return "unknown";
        }
    }
}
