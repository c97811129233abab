public class Access {
    public boolean canEdit(Object user, Object doc) {
        return user != null && doc != null && (user.hashCode() > 0 || doc.hashCode() > 0) && !doc.equals(user);
    }
}
