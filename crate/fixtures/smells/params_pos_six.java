public class Mailer {
    public void sendMessage(String to, String cc, String subject, String body, String footer, java.util.List<String> attachments) {
        System.out.println(to + cc + subject + body + footer + attachments);
    }
}
