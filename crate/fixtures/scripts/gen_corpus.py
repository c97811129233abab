# Writes the smelly and clean experiment corpora and their manifest.
import json, os
smelly = [
 ("s01", """public boolean validateAndStore(String name, String email, String phone, String street, String city, String zip) {
    if (name != null && email != null && (phone != null || street != null) && !city.isEmpty()) {
        System.out.println(name + email + phone + street + city + zip);
        return true;
    }
    return false;
}""", "Validates a contact record and stores it when the required fields are present.", ["binary_operator_in_name", "too_long_parameter_list", "complicated_boolean_expression"]),
 ("s02", """public boolean checkMail(String s) {
    return s.matches("^[A-Za-z0-9+_.-]+@([A-Za-z0-9-]+\\\\.)+[A-Za-z]{2,6}$");
}""", "Checks whether a string is a well-formed email address.", ["complicated_regex_expression"]),
 ("s03", """public int sumCube(int[][][] cube) {
    int total = 0;
    for (int i = 0; i < cube.length; i++) {
        for (int j = 0; j < cube[i].length; j++) {
            for (int k = 0; k < cube[i][j].length; k++) {
                total += cube[i][j][k];
            }
        }
    }
    return total;
}""", "Sums every value in a three-dimensional integer array.", ["loops"]),
 ("s04", """public String Grade(int score) {
    if (score > 95) { return "A+"; }
    if (score > 90) { return "A"; }
    if (score > 85) { return "A-"; }
    if (score > 80) { return "B+"; }
    if (score > 75) { return "B"; }
    if (score > 70) { return "B-"; }
    if (score > 65) { return "C+"; }
    if (score > 60) { return "C"; }
    if (score > 55) { return "C-"; }
    if (score > 50) { return "D"; }
    return "F";
}""", "Maps a numeric exam score to a letter grade.", ["func_name", "cyclomatic_complexity"]),
 ("s05", """public double price(int qty, double unit, double tax, boolean member) {
    double p = qty * unit;
    p = p + p * tax;
    if (member) {
        p = p * 0.9;
    }
    return p;
}""", "Computes the final price of an order line including tax and member discount.", ["primitive_obsession"]),
 ("s06", """public int[] stats(int[] values) {
    int min = Integer.MAX_VALUE;
    int max = Integer.MIN_VALUE;
    int sum = 0;
    int count = 0;
    for (int v : values) {
        sum += v;
        count++;
        if (v < min) { min = v; }
        if (v > max) { max = v; }
    }
    int range = 0;
    range = max - min;
    range = Math.abs(range);
    int mean = 0;
    mean = count == 0 ? 0 : sum / count;
    sum = sum * 1;
    count = count + 0;
    min = Math.min(min, max);
    max = Math.max(min, max);
    return new int[] {min, max, mean, range, sum, count};
}""", "Returns the minimum, maximum, mean, range, sum and count of an array.", ["mutation_too_much"]),
 ("s07", """public String loadOrDefault(java.util.Map<String, String> m, String key, String fallback) {
    String v = m.get(key);
    return v == null ? fallback : v;
}""", "Looks up a key in a map and falls back to a default value.", ["binary_operator_in_name"]),
 ("s08", """public boolean inRange(int x, int y, int lo, int hi) {
    return x >= lo && x <= hi && y >= lo && y <= hi && x != y;
}""", "Checks that two coordinates lie inside a closed range and differ.", ["complicated_boolean_expression", "primitive_obsession"]),
 ("s09", """public java.util.List<String> tokens(String text) {
    java.util.List<String> out = new java.util.ArrayList<>();
    for (String line : text.split("\\n")) {
        for (String word : line.split(" ")) {
            for (char c : word.toCharArray()) {
                if (Character.isLetter(c)) {
                    out.add(String.valueOf(c));
                }
            }
        }
    }
    return out;
}""", "Splits text into lines and words and collects every letter character.", ["loops"]),
 ("s10", """public String normalize_phone(String raw) {
    String digits = raw.replaceAll("[^0-9+]|(?<=.)\\\\+|^\\\\+?0{2}", "");
    return digits;
}""", "Normalizes a phone number by removing formatting characters.", ["func_name", "complicated_regex_expression"]),
]
clean = [
 ("c01", """public String fullName(String first, String last) {
    return first + " " + last;
}""", "Joins a first and last name with a space."),
 ("c02", """public boolean isEven(int value) {
    return value % 2 == 0;
}""", "Checks whether an integer is even."),
 ("c03", """public int maxOf(int[] values) {
    int best = Integer.MIN_VALUE;
    for (int v : values) {
        best = Math.max(best, v);
    }
    return best;
}""", "Returns the largest value in an array."),
 ("c04", """public String reverse(String text) {
    return new StringBuilder(text).reverse().toString();
}""", "Reverses a string."),
 ("c05", """public double average(java.util.List<Double> values) {
    if (values.isEmpty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum / values.size();
}""", "Computes the arithmetic mean of a list of numbers."),
 ("c06", """public boolean isBlank(String text) {
    return text == null || text.trim().isEmpty();
}""", "Checks whether a string is null or only whitespace."),
 ("c07", """public int countWords(String text) {
    return text.trim().isEmpty() ? 0 : text.trim().split(" ").length;
}""", "Counts the space-separated words in a string."),
 ("c08", """public java.util.List<String> upperAll(java.util.List<String> items) {
    java.util.List<String> out = new java.util.ArrayList<>();
    for (String item : items) {
        out.add(item.toUpperCase());
    }
    return out;
}""", "Converts every string in a list to upper case."),
 ("c09", """public long factorial(int n) {
    long result = 1;
    for (int i = 2; i <= n; i++) {
        result *= i;
    }
    return result;
}""", "Computes the factorial of a non-negative integer."),
 ("c10", """public String initials(String name) {
    StringBuilder sb = new StringBuilder();
    for (String part : name.split(" ")) {
        if (!part.isEmpty()) {
            sb.append(part.charAt(0));
        }
    }
    return sb.toString();
}""", "Builds the initials of a multi-word name."),
]
d = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "corpus") + "/"
with open(d + "smelly.jsonl", "w") as f:
    for i, code, nl, smells in smelly:
        f.write(json.dumps({"id": i, "code": code, "nl": nl, "label": "smelly", "smells": smells}) + "\n")
with open(d + "clean.jsonl", "w") as f:
    for i, code, nl in clean:
        f.write(json.dumps({"id": i, "code": code, "nl": nl, "label": "clean"}) + "\n")

with open(d + "manifest.json", "w") as f:
    json.dump({"smelly": [{"id": i, "smells": sorted(s)} for i, _, _, s in smelly],
               "clean": [{"id": i, "smells": []} for i, _, _ in clean]}, f, indent=2)
    f.write("\n")
