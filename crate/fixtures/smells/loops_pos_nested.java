public class Grid {
    public int countCells(int[][][] cube) {
        int total = 0;
        for (int[][] plane : cube) {
            for (int[] row : plane) {
                for (int cell : row) {
                    total += cell;
                }
            }
        }
        return total;
    }
}
