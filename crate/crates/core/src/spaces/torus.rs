//! Geodesic balls on the flat torus `[0, w) x [0, h)`.
//!
//! Under the quotient Euclidean metric the ball of radius `r` is the disc of
//! radius `r` clipped to the centred fundamental rectangle
//! `[-w/2, w/2] x [-h/2, h/2]`, so its area is exact in closed form.

/// Area of `{0 <= x <= a, 0 <= y <= b, x^2 + y^2 <= r^2}`.
fn quarter_area(a: f64, b: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    // antiderivative of sqrt(r^2 - x^2)
    let prim = |x: f64| {
        let x = x.min(r);
        0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).clamp(-1.0, 1.0).asin())
    };
    let x_hi = a.min(r);
    // for x < x_flat the circle is above the rectangle's top edge
    let x_flat = (r * r - b * b).max(0.0).sqrt().min(x_hi);
    b * x_flat + prim(x_hi) - prim(x_flat)
}

/// Area of the geodesic ball of radius `r` on the `w x h` flat torus.
pub fn ball_area(w: f64, h: f64, r: f64) -> f64 {
    4.0 * quarter_area(0.5 * w, 0.5 * h, r)
}

/// Radii at which `ball_area` changes analytic form.
pub fn ball_area_kinks(w: f64, h: f64) -> [f64; 3] {
    let (a, b) = (0.5 * w, 0.5 * h);
    [a.min(b), a.max(b), a.hypot(b)]
}
