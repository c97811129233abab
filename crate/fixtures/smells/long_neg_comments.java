public class Documented {
    public void describeSteps() {
        // note 0
        // note 1
        // note 2
        // note 3
        // note 4
        // note 5
        // note 6
        // note 7
        // note 8
        // note 9
        // note 10
        // note 11
        // note 12
        // note 13
        // note 14
        // note 15
        // note 16
        // note 17
        // note 18
        // note 19
        // note 20
        // note 21
        // note 22
        // note 23
        // note 24
        // note 25
        // note 26
        // note 27
        // note 28
        // note 29
        // note 30
        // note 31
        // note 32
        // note 33
        // note 34
        // note 35
        // note 36
        // note 37
        // note 38
        // note 39
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



    }
}
