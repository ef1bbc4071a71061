package org.example.shapes;

import java.util.List;
import static java.lang.Math.PI;

/** A circle. */
public class Circle implements Shape {
    private final double r;

    public Circle(double r) { this.r = r; }

    // area in square units
    @Override
    public double area() {
        return PI * r * r;
    }

    static List<Shape> many(int n) throws Exception {
        Runnable x = new Runnable() {
            public void run() {}
        };
        return List.of();
    }
}
