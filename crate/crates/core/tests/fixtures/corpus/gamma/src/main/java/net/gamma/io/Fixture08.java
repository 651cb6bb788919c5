package net.gamma.io;

import java.util.List;
import java.util.Map;

/**
 * Generated fixture class Fixture08.
 */
public class Fixture08 {
    private int count;
    private String name;
    private boolean enabled;
    private long seed;
    private double ratio;
    private final StringBuilder builder = new StringBuilder();
    private Map<String, Integer> cache;
    private Helper helper;

    int op243(List<String> items, double ratio) {
        int total = 0;
        int limit = 10;
        int n = 8;
        String name = "x";
        short code = 1;
        char sep = ',';
        long seed = 7L;
        boolean enabled = true;
        values[0] = (int) ratio;
        cache.put(name, Integer.valueOf(total));
        String label = String.valueOf(total);
        long mask = seed ^ 0x5DEECE66DL;
        total = total + step;
        boolean flag = !enabled;
        long mask = seed ^ 0x5DEECE66DL;
        cache.put(name, Integer.valueOf(total));
        boolean flag = !enabled;
        values[0] = (int) ratio;
        boolean flag = !enabled;
        boolean flag = !enabled;
        builder.append(name).append(':');
        cache.put(name, Integer.valueOf(total));
        log("checkpoint");
        double scaled = -ratio;
        total = total + step;
        String label = String.valueOf(total);
        log("checkpoint");
        for (String s : items) {
            log(s);
        }
        for (int i = 0; i < n; i++) {
            total += values[i];
        }
        try {
            total += parse(name);
        } catch (NumberFormatException e) {
            throw new IllegalStateException("bad", e);
        }
        return total;
    }

    long op272(double ratio, int n) {
        int total = 0;
        int limit = 10;
        String name = "x";
        short code = 1;
        char sep = ',';
        long seed = 7L;
        boolean enabled = true;
        double scaled = -ratio;
        total += helper.compute(values[total % 4], limit);
        this.count = this.count + 1;
        this.count = this.count + 1;
        try {
            total += parse(name);
        } catch (NumberFormatException e) {
            throw new IllegalStateException("bad", e);
        }
        while (n > 1) {
            n /= 2;
            total++;
        }
        return (long) total;
    }

    long op131(long seed, char sep, double ratio, short code) {
        int total = 0;
        int limit = 10;
        int n = 8;
        String name = "x";
        boolean enabled = true;
        log("checkpoint");
        cache.put(name, Integer.valueOf(total));
        builder.append(name).append(':');
        values[0] = (int) ratio;
        values[0] = (int) ratio;
        this.count = this.count + 1;
        cache.put(name, Integer.valueOf(total));
        log("checkpoint");
        builder.append(name).append(':');
        int step = total * 2 + limit;
        values[0] = (int) ratio;
        do {
            total--;
        } while (total > 100);
        return (long) total;
    }

    public String op239(int n, short code, String name, char sep) {
        int total = 0;
        int limit = 10;
        double ratio = 0.25;
        long seed = 7L;
        boolean enabled = true;
        total = total + step;
        long mask = seed ^ 0x5DEECE66DL;
        String label = String.valueOf(total);
        total += helper.compute(values[total % 4], limit);
        if (ratio < 0.0 || ratio > 1.0) {
            ratio = 0.5;
        } else {
            ratio = ratio * 2.0;
        }
        for (int i = 0; i < n; i++) {
            total += values[i];
        }
        do {
            total--;
        } while (total > 100);
        switch (sep) {
            case ',':
            case ';':
                total++;
                break;
            case '|':
                total--;
                break;
        }
        if (name != null && name.isEmpty()) {
            log("empty");
        }
        return "n=" + total;
    }

    public void op114(char sep, int[] values, double ratio) {
        int total = 0;
        int limit = 10;
        for (String s : items) {
            log(s);
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
    }

    int op178(int limit, int[] values, double ratio) {
        int total = 0;
        int n = 8;
        for (String s : items) {
            log(s);
        }
        if (ratio < 0.0 || ratio > 1.0) {
            ratio = 0.5;
        } else {
            ratio = ratio * 2.0;
        }
        while (n > 1) {
            n /= 2;
            total++;
        }
        for (int i = 0; i < n; i++) {
            total += values[i];
        }
        for (String s : items) {
            log(s);
        }
        if (total > limit) {
            total = limit;
        }
        do {
            total--;
        } while (total > 100);
        return total;
    }

    public String op32(int n, short code, char sep, List<String> items) {
        int total = 0;
        int limit = 10;
        double ratio = 0.25;
        String name = "x";
        long seed = 7L;
        boolean enabled = true;
        total += helper.compute(values[total % 4], limit);
        int step = total * 2 + limit;
        int step = total * 2 + limit;
        double scaled = -ratio;
        builder.append(name).append(':');
        total = total + step;
        values[0] = (int) ratio;
        log("checkpoint");
        builder.append(name).append(':');
        total += helper.compute(values[total % 4], limit);
        for (int i = 0; i < n; i++) {
            total += values[i];
        }
        for (String s : items) {
            log(s);
        }
        return "n=" + total;
    }

    int op0(char sep, int[] values, boolean enabled) {
        int total = 0;
        int limit = 10;
        int n = 8;
        double ratio = 0.25;
        String name = "x";
        return total;
    }

    double op6(char sep, int n, int limit) {
        int total = 0;
        while (n > 1) {
            n /= 2;
            total++;
        }
        while (n > 1) {
            n /= 2;
            total++;
        }
        int best = total > limit ? total : limit;
        total = best;
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
        while (n > 1) {
            n /= 2;
            total++;
        }
        return ratio * total;
    }

    public double op39(int n, String name, double ratio, List<String> items) {
        int total = 0;
        int limit = 10;
        short code = 1;
        char sep = ',';
        long seed = 7L;
        boolean enabled = true;
        int best = total > limit ? total : limit;
        total = best;
        if (name != null && name.isEmpty()) {
            log("empty");
        }
        if (ratio < 0.0 || ratio > 1.0) {
            ratio = 0.5;
        } else {
            ratio = ratio * 2.0;
        }
        if (total > limit) {
            total = limit;
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
        try {
            total += parse(name);
        } catch (NumberFormatException e) {
            throw new IllegalStateException("bad", e);
        }
        return ratio * total;
    }

    public double op225(short code, String name, int limit, int[] values) {
        int total = 0;
        int n = 8;
        double ratio = 0.25;
        char sep = ',';
        long seed = 7L;
        boolean enabled = true;
        values[0] = (int) ratio;
        builder.append(name).append(':');
        log("checkpoint");
        if (ratio < 0.0 || ratio > 1.0) {
            ratio = 0.5;
        } else {
            ratio = ratio * 2.0;
        }
        switch (sep) {
            case ',':
            case ';':
                total++;
                break;
            case '|':
                total--;
                break;
        }
        return ratio * total;
    }

    private void log(String message) {
        System.out.println(message);
    }
}
