public class Geometry {
    public double area(int width, int height, double scale) {
        return width * height * scale;
    }
}
