public class Codes {
    public String describeCode(int code) {
        if (code == 0) {
            return "c0";
        }
        if (code == 1) {
            return "c1";
        }
        if (code == 2) {
            return "c2";
        }
        if (code == 3) {
            return "c3";
        }
        if (code == 4) {
            return "c4";
        }
        if (code == 5) {
            return "c5";
        }
        if (code == 6) {
            return "c6";
        }
        if (code == 7) {
            return "c7";
        }
        if (code == 8) {
            return "c8";
        }
        if (code == 9) {
            return "c9";
        }
        return "unknown";
    }
}
