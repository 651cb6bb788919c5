package net.gamma.io;

import java.util.List;
import java.util.Map;

/**
 * Generated fixture class Fixture17.
 */
public class Fixture17 {
    private int count;
    private String name;
    private boolean enabled;
    private long seed;
    private double ratio;
    private final StringBuilder builder = new StringBuilder();
    private Map<String, Integer> cache;
    private Helper helper;

    double getRatio4() {
        return ratio;
    }

    String op214(boolean enabled, String name, double ratio, char sep) {
        int total = 0;
        int limit = 10;
        int n = 8;
        int best = total > limit ? total : limit;
        total = best;
        if (ratio < 0.0 || ratio > 1.0) {
            ratio = 0.5;
        } else {
            ratio = ratio * 2.0;
        }
        int best = total > limit ? total : limit;
        total = best;
        return "n=" + total;
    }

    int op223(int limit, long seed) {
        int total = 0;
        int n = 8;
        double ratio = 0.25;
        String name = "x";
        short code = 1;
        char sep = ',';
        boolean enabled = true;
        int step = total * 2 + limit;
        total += helper.compute(values[total % 4], limit);
        this.count = this.count + 1;
        if (total > limit) {
            total = limit;
        }
        while (n > 1) {
            n /= 2;
            total++;
        }
        if (total > limit) {
            total = limit;
        }
        return total;
    }

    int op124(boolean enabled, int n) {
        int total = 0;
        int limit = 10;
        double ratio = 0.25;
        String name = "x";
        short code = 1;
        char sep = ',';
        long seed = 7L;
        log("checkpoint");
        builder.append(name).append(':');
        long mask = seed ^ 0x5DEECE66DL;
        total = total + step;
        if (name != null && name.isEmpty()) {
            log("empty");
        }
        if (ratio < 0.0 || ratio > 1.0) {
            ratio = 0.5;
        } else {
            ratio = ratio * 2.0;
        }
        return total;
    }

    boolean op192(long seed, int limit, List<String> items) {
        int total = 0;
        int n = 8;
        double ratio = 0.25;
        String name = "x";
        short code = 1;
        char sep = ',';
        boolean enabled = true;
        String label = String.valueOf(total);
        this.count = this.count + 1;
        values[0] = (int) ratio;
        builder.append(name).append(':');
        boolean flag = !enabled;
        cache.put(name, Integer.valueOf(total));
        long mask = seed ^ 0x5DEECE66DL;
        this.count = this.count + 1;
        String label = String.valueOf(total);
        boolean flag = !enabled;
        int step = total * 2 + limit;
        String label = String.valueOf(total);
        builder.append(name).append(':');
        values[0] = (int) ratio;
        int step = total * 2 + limit;
        double scaled = -ratio;
        String label = String.valueOf(total);
        cache.put(name, Integer.valueOf(total));
        double scaled = -ratio;
        cache.put(name, Integer.valueOf(total));
        while (n > 1) {
            n /= 2;
            total++;
        }
        while (n > 1) {
            n /= 2;
            total++;
        }
        return total > 0;
    }

    double getRatio29() {
        return ratio;
    }

    void op220(String name, int limit, int[] values, double ratio) {
        int total = 0;
        int n = 8;
        short code = 1;
        char sep = ',';
        long seed = 7L;
        boolean enabled = true;
        builder.append(name).append(':');
        builder.append(name).append(':');
        values[0] = (int) ratio;
        total = total + step;
        builder.append(name).append(':');
        long mask = seed ^ 0x5DEECE66DL;
    }

    public double op34(double ratio, short code) {
        int total = 0;
        int limit = 10;
        int n = 8;
        String name = "x";
        char sep = ',';
        long seed = 7L;
        boolean enabled = true;
        this.count = this.count + 1;
        long mask = seed ^ 0x5DEECE66DL;
        total = total + step;
        this.count = this.count + 1;
        boolean flag = !enabled;
        long mask = seed ^ 0x5DEECE66DL;
        this.count = this.count + 1;
        this.count = this.count + 1;
        total = total + step;
        log("checkpoint");
        log("checkpoint");
        String label = String.valueOf(total);
        if (name != null && name.isEmpty()) {
            log("empty");
        }
        if (total > limit) {
            total = limit;
        }
        do {
            total--;
        } while (total > 100);
        return ratio * total;
    }

    public void op205(double ratio, int[] values, String name, boolean enabled) {
        int total = 0;
        int best = total > limit ? total : limit;
        total = best;
        for (String s : items) {
            log(s);
        }
        if (total > limit) {
            total = limit;
        }
        if (total > limit) {
            total = limit;
        }
        for (String s : items) {
            log(s);
        }
    }

    public long op181(String name, boolean enabled) {
        int total = 0;
        int limit = 10;
        int n = 8;
        double ratio = 0.25;
        short code = 1;
        char sep = ',';
        long seed = 7L;
        int step = total * 2 + limit;
        boolean flag = !enabled;
        log("checkpoint");
        builder.append(name).append(':');
        total = total + step;
        values[0] = (int) ratio;
        total = total + step;
        values[0] = (int) ratio;
        double scaled = -ratio;
        total += helper.compute(values[total % 4], limit);
        log("checkpoint");
        boolean flag = !enabled;
        builder.append(name).append(':');
        if (total > limit) {
            total = limit;
        }
        return (long) total;
    }

    int op120(short code, char sep) {
        int total = 0;
        int limit = 10;
        int n = 8;
        double ratio = 0.25;
        String name = "x";
        long seed = 7L;
        boolean enabled = true;
        boolean flag = !enabled;
        total += helper.compute(values[total % 4], limit);
        total = total + step;
        this.count = this.count + 1;
        values[0] = (int) ratio;
        log("checkpoint");
        this.count = this.count + 1;
        builder.append(name).append(':');
        long mask = seed ^ 0x5DEECE66DL;
        return total;
    }

    private void log(String message) {
        System.out.println(message);
    }
}
