public class Report {
    public String buildReport(String title, String author, java.util.Date created, java.util.Date updated,
            String version, String summary, java.util.List<String> sections, java.util.Map<String, String> meta) {
        return title + author + created + updated + version + summary + sections + meta;
    }
}
