public class Bootstrap {
    public void startServices() {
        System.out.println("step 0");
        System.out.println("step 1");
        System.out.println("step 2");
        System.out.println("step 3");
        System.out.println("step 4");
        System.out.println("step 5");
        System.out.println("step 6");
        System.out.println("step 7");
        System.out.println("step 8");
        System.out.println("step 9");
        System.out.println("step 10");
        System.out.println("step 11");
        System.out.println("step 12");
        System.out.println("step 13");
        System.out.println("step 14");
        System.out.println("step 15");
        System.out.println("step 16");
        System.out.println("step 17");
        System.out.println("step 18");
        System.out.println("step 19");
        System.out.println("step 20");
        System.out.println("step 21");
        System.out.println("step 22");
        System.out.println("step 23");
        System.out.println("step 24");
        System.out.println("step 25");
        System.out.println("step 26");
        System.out.println("step 27");
        System.out.println("step 28");
        System.out.println("step 29");
        System.out.println("step 30");
        System.out.println("step 31");
        System.out.println("step 32");
        System.out.println("step 33");
        System.out.println("step 34");
        System.out.println("step 35");
        System.out.println("step 36");
        System.out.println("step 37");
        System.out.println("step 38");
        System.out.println("step 39");
        System.out.println("step 40");
        System.out.println("step 41");
        System.out.println("step 42");
        System.out.println("step 43");
        System.out.println("step 44");
        System.out.println("step 45");
        System.out.println("step 46");
        System.out.println("step 47");
    }
}
