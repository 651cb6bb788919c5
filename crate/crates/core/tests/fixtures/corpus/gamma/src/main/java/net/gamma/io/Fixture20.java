package net.gamma.io;

import java.util.List;
import java.util.Map;

/**
 * Generated fixture class Fixture20.
 */
public class Fixture20 {
    private int count;
    private String name;
    private boolean enabled;
    private long seed;
    private double ratio;
    private final StringBuilder builder = new StringBuilder();
    private Map<String, Integer> cache;
    private Helper helper;

    int getCount25() {
        return count;
    }

    String getName21() {
        return name;
    }

    public void op28(long seed, List<String> items, boolean enabled, int n) {
        int total = 0;
        int limit = 10;
        int best = total > limit ? total : limit;
        total = best;
        while (n > 1) {
            n /= 2;
            total++;
        }
        for (String s : items) {
            log(s);
        }
        while (n > 1) {
            n /= 2;
            total++;
        }
        int best = total > limit ? total : limit;
        total = best;
        if (ratio < 0.0 || ratio > 1.0) {
            ratio = 0.5;
        } else {
            ratio = ratio * 2.0;
        }
        while (n > 1) {
            n /= 2;
            total++;
        }
    }

    public int op281(int limit, double ratio) {
        int total = 0;
        int n = 8;
        String name = "x";
        short code = 1;
        char sep = ',';
        long seed = 7L;
        boolean enabled = true;
        String label = String.valueOf(total);
        log("checkpoint");
        int step = total * 2 + limit;
        values[0] = (int) ratio;
        boolean flag = !enabled;
        this.count = this.count + 1;
        String label = String.valueOf(total);
        boolean flag = !enabled;
        builder.append(name).append(':');
        long mask = seed ^ 0x5DEECE66DL;
        log("checkpoint");
        long mask = seed ^ 0x5DEECE66DL;
        builder.append(name).append(':');
        try {
            total += parse(name);
        } catch (NumberFormatException e) {
            throw new IllegalStateException("bad", e);
        }
        return total;
    }

    public String op219(int[] values, char sep) {
        int total = 0;
        do {
            total--;
        } while (total > 100);
        if (total > limit) {
            total = limit;
        }
        if (name != null && name.isEmpty()) {
            log("empty");
        }
        switch (code) {
            case 1:
                total += 1;
                break;
            case 2:
                total += 2;
                break;
            default:
                total = 0;
        }
        for (int i = 0; i < n; i++) {
            total += values[i];
        }
        do {
            total--;
        } while (total > 100);
        if (total > limit) {
            total = limit;
        }
        return "n=" + total;
    }

    boolean same14(int a, int b) {
        return a == b;
    }

    void init37() {
        int local = 37;
    }

    int getCount20() {
        return count;
    }

    int next23(int v) {
        int w = v + 23;
        return w;
    }

    boolean op164(int limit, int n, double ratio) {
        int total = 0;
        String name = "x";
        for (String s : items) {
            log(s);
        }
        for (String s : items) {
            log(s);
        }
        do {
            total--;
        } while (total > 100);
        for (int i = 0; i < n; i++) {
            total += values[i];
        }
        return total > 0;
    }

    String op170(boolean enabled, int limit, char sep, int n) {
        int total = 0;
        double ratio = 0.25;
        String name = "x";
        short code = 1;
        long seed = 7L;
        values[0] = (int) ratio;
        builder.append(name).append(':');
        boolean flag = !enabled;
        builder.append(name).append(':');
        double scaled = -ratio;
        long mask = seed ^ 0x5DEECE66DL;
        log("checkpoint");
        total = total + step;
        return "n=" + total;
    }

    private void log(String message) {
        System.out.println(message);
    }
}
