//! Special functions needed by the bath models.

#[allow(unused_imports)]
use num_traits::Float;

/// Fermi function `1/(1+e^{x})`, stable for large `|x|`.
pub fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Inverse of a continuous nondecreasing function on `[a, b]` by bisection.
pub fn invert_monotone(f: impl Fn(f64) -> f64, y: f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) < y {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
