# Writes the smell detector fixtures and their manifest.
import json, os
out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "smells")
files = {}

def cls(name, body):
    return f"public class {name} {{\n{body}\n}}\n"

def add(fname, kinds, src):
    files[fname] = (kinds, src)

# too_long_parameter_list
add("params_pos_six.java", ["too_long_parameter_list"], cls("Mailer", """    public void sendMessage(String to, String cc, String subject, String body, String footer, java.util.List<String> attachments) {
        System.out.println(to + cc + subject + body + footer + attachments);
    }"""))
add("params_pos_eight.java", ["too_long_parameter_list"], cls("Report", """    public String buildReport(String title, String author, java.util.Date created, java.util.Date updated,
            String version, String summary, java.util.List<String> sections, java.util.Map<String, String> meta) {
        return title + author + created + updated + version + summary + sections + meta;
    }"""))
add("params_neg_five.java", [], cls("Address", """    public String formatAddress(String street, String city, String state, String zip, String country) {
        return street + ", " + city + ", " + state + " " + zip + ", " + country;
    }"""))
add("params_neg_two.java", [], cls("Greeter", """    public String greetUser(String greeting, String name) {
        return greeting + ", " + name;
    }"""))

# too_long
def long_body(n):
    return "\n".join(f'        System.out.println("step {i}");' for i in range(n))
add("long_pos_fiftyfive.java", ["too_long"], cls("Installer", "    public void runInstaller() {\n" + long_body(55) + "\n    }"))
add("long_pos_sixty.java", ["too_long"], cls("Migrator", "    public void migrateSchema(String target) {\n" + long_body(59) + "\n        System.out.println(target);\n    }"))
add("long_neg_fifty.java", [], cls("Bootstrap", "    public void startServices() {\n" + long_body(48) + "\n    }"))
add("long_neg_comments.java", [], cls("Documented", "    public void describeSteps() {\n" + "\n".join(f"        // note {i}" for i in range(40)) + "\n" + long_body(20) + "\n\n\n" + "\n    }"))

# loops
add("loops_pos_nested.java", ["loops"], cls("Grid", """    public int countCells(int[][][] cube) {
        int total = 0;
        for (int[][] plane : cube) {
            for (int[] row : plane) {
                for (int cell : row) {
                    total += cell;
                }
            }
        }
        return total;
    }"""))
add("loops_pos_many.java", ["loops"], cls("Scanner", """    public void scanAll(java.util.List<String> a, java.util.List<String> b, java.util.List<String> c) {
        for (String x : a) {
            System.out.println(x);
        }
        for (String y : b) {
            System.out.println(y);
        }
        for (String z : c) {
            System.out.println(z);
        }
        while (a.isEmpty()) {
            System.out.println("empty");
        }
        do {
            System.out.println("once");
        } while (b.isEmpty());
    }"""))
add("loops_neg_two_deep.java", [], cls("Matrix", """    public int sumMatrix(int[][] m) {
        int total = 0;
        for (int[] row : m) {
            for (int v : row) {
                total += v;
            }
        }
        return total;
    }"""))
add("loops_neg_four.java", [], cls("Printer", """    public void printAll(java.util.List<String> a, java.util.List<String> b) {
        for (String x : a) {
            System.out.println(x);
        }
        for (String y : b) {
            System.out.println(y);
        }
        while (a.isEmpty()) {
            System.out.println("empty");
        }
        for (String z : a) {
            System.out.println(z.length());
        }
    }"""))

# cyclomatic_complexity
def ifs(n):
    return "\n".join(f'        if (code == {i}) {{\n            return "c{i}";\n        }}' for i in range(n))
add("cyclo_pos_eleven.java", ["cyclomatic_complexity"], cls("Codes", "    public String describeCode(int code) {\n" + ifs(10) + '\n        return "unknown";\n    }'))
add("cyclo_pos_switch.java", ["cyclomatic_complexity"], cls("Weekday", """    public String dayName(int day) {
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
    }"""))
add("cyclo_neg_ten.java", [], cls("Levels", "    public String levelName(int code) {\n" + ifs(9) + '\n        return "unknown";\n    }'))
add("cyclo_neg_linear.java", [], cls("Sums", """    public int addThree(int a, String label) {
        int b = a + 1;
        int c = b * 2;
        System.out.println(label);
        return c - a;
    }"""))

# complicated_boolean_expression
add("bool_pos_four.java", ["complicated_boolean_expression"], cls("Access", """    public boolean canEdit(Object user, Object doc) {
        return user != null && doc != null && (user.hashCode() > 0 || doc.hashCode() > 0) && !doc.equals(user);
    }"""))
add("bool_pos_if.java", ["complicated_boolean_expression"], cls("Shipping", """    public String shippingTier(String country, Integer weight) {
        if ((country != null && country.isEmpty()) || (weight != null && weight > 10) || country == null) {
            return "manual";
        }
        return "auto";
    }"""))
add("bool_neg_three.java", [], cls("Guard", """    public boolean isReady(Object a, Object b) {
        return a != null && b != null && !a.equals(b);
    }"""))
add("bool_neg_split.java", [], cls("Filter", """    public boolean accepts(String s) {
        boolean present = s != null && !s.isEmpty();
        boolean shortText = s != null && s.length() < 10;
        return present && shortText;
    }"""))

# complicated_regex_expression
add("regex_pos_email.java", ["complicated_regex_expression"], cls("EmailCheck", """    public boolean isEmail(String s) {
        return s.matches("^[a-z0-9._%+-]+@[a-z0-9.-]+\\\\.[a-z]{2,}$");
    }"""))
add("regex_pos_compile.java", ["complicated_regex_expression"], cls("DateParse", """    public java.util.regex.Pattern datePattern() {
        return java.util.regex.Pattern.compile("(\\\\d{4})-(\\\\d{2})-(\\\\d{2})T(\\\\d{2}):(\\\\d{2})");
    }"""))
add("regex_neg_simple.java", [], cls("Digits", """    public boolean isNumber(String s) {
        return s.matches("[0-9]+");
    }"""))
add("regex_neg_plain.java", [], cls("Splitter", """    public String[] splitWords(String s) {
        System.out.println("Done. (ok)");
        return s.split(",");
    }"""))

# binary_operator_in_name
add("binop_pos_and.java", ["binary_operator_in_name"], cls("Store", """    public void validateAndSave(String record) {
        System.out.println(record);
    }"""))
add("binop_pos_or.java", ["binary_operator_in_name"], cls("Cache", """    public String loadOrCreate(String key) {
        return key.trim();
    }"""))
add("binop_neg_order.java", [], cls("Orders", """    public String getOrderTotal(String order) {
        return order.trim();
    }"""))
add("binop_neg_notify.java", [], cls("Bell", """    public void notifyListeners(String event) {
        System.out.println(event);
    }"""))

# func_name
add("name_pos_upper.java", ["func_name"], cls("Worker", """    public void ComputeTotal(String input) {
        System.out.println(input);
    }"""))
add("name_pos_short.java", ["func_name"], cls("Tiny", """    public String f(String input) {
        return input.trim();
    }"""))
add("name_pos_snake.java", ["func_name"], cls("Legacy", """    public String read_config(String path) {
        return path.trim();
    }"""))
add("name_neg_camel.java", [], cls("Calculator", """    public String computeTotal(String input) {
        return input.trim();
    }"""))
add("name_neg_three.java", [], cls("Runner", """    public void run(String input) {
        System.out.println(input);
    }"""))

# mutation_too_much
def muts(n):
    return "\n".join(f"        acc = acc + {i};" for i in range(n))
add("mut_pos_eleven.java", ["mutation_too_much"], cls("Accumulator", "    public int accumulate(String label) {\n        int acc = 0;\n" + muts(11) + "\n        return acc;\n    }"))
add("mut_pos_counters.java", ["mutation_too_much"], cls("Counters", """    public int tally(String text) {
        int a = 0;
        int b = 0;
        a++;
        a++;
        b--;
        a += 2;
        b -= 1;
        a *= 3;
        b = a;
        a = b + 1;
        ++a;
        --b;
        a <<= 1;
        return a + b;
    }"""))
add("mut_neg_ten.java", [], cls("Builder", "    public int buildValue(String label) {\n        int acc = 0;\n" + muts(10) + "\n        return acc;\n    }"))
add("mut_neg_locals.java", [], cls("Locals", """    public int compute(String text) {
        int a = 1;
        int b = a + 2;
        int c = b * 3;
        int d = c - a;
        return d;
    }"""))

# primitive_obsession
add("prim_pos_three.java", ["primitive_obsession"], cls("Geometry", """    public double area(int width, int height, double scale) {
        return width * height * scale;
    }"""))
add("prim_pos_four_of_five.java", ["primitive_obsession"], cls("Booking", """    public String reserve(int day, int month, int year, boolean confirmed, String guest) {
        return guest + day + month + year + confirmed;
    }"""))
add("prim_neg_mixed.java", [], cls("Profile", """    public String describe(int age, String name, String city) {
        return name + age + city;
    }"""))
add("prim_neg_two.java", [], cls("Point", """    public long combine(int x, int y) {
        return ((long) x << 32) | y;
    }"""))

# mixed files: more than one smell
add("mixed_and_primitives.java", ["binary_operator_in_name", "primitive_obsession"], cls("Mixer", """    public long addAndScale(long a, long b, long factor) {
        return (a + b) * factor;
    }"""))
add("mixed_clean_class.java", [], cls("Inventory", """    private final java.util.Map<String, Integer> stock = new java.util.HashMap<>();

    public Inventory() {
        System.out.println("created");
    }

    public int quantityOf(String item) {
        return stock.getOrDefault(item, 0);
    }

    public void restock(String item, Integer amount) {
        stock.merge(item, amount, Integer::sum);
    }"""))

os.makedirs(out, exist_ok=True)
manifest = []
for fname, (kinds, src) in sorted(files.items()):
    with open(os.path.join(out, fname), "w") as f:
        f.write(src)
    manifest.append({"file": fname, "kinds": sorted(kinds)})
with open(os.path.join(out, "manifest.json"), "w") as f:
    json.dump(manifest, f, indent=2)
    f.write("\n")
print(len(files))
