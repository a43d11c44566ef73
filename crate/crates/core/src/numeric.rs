//! Small numeric helpers shared across modules.

/// Neumaier-compensated sum, evaluated in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Rounds to 9 significant digits; used for every reported number so that
/// serialized reports are stable byte-for-byte.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Integral of the square of a linear ramp from `a` to `b` over `duration`.
#[inline]
pub fn ramp_square_integral(a: f64, b: f64, duration: f64) -> f64 {
    duration * (a * a + a * b + b * b) / 3.0
}
