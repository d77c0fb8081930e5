//! Fixed-order quadrature rules on uniform grids.

use crate::C64;

/// Composite trapezoid rule for samples spaced `step` apart.
///
/// Summation runs left to right so repeated calls are bit-identical.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let interior: f64 = values[1..n - 1].iter().sum();
            step * (interior + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

pub fn trapezoid_complex(values: &[C64], step: f64) -> C64 {
    match values.len() {
        0 | 1 => C64::new(0.0, 0.0),
        n => {
            let interior: C64 = values[1..n - 1].iter().sum();
            (interior + (values[0] + values[n - 1]) * 0.5) * step
        }
    }
}

/// Moments `∫_0^1 s^p e^{iθs} ds` for `p = 0..=3`.
fn oscillatory_moments(theta: f64) -> [C64; 4] {
    let mut m = [C64::new(0.0, 0.0); 4];
    if theta.abs() < 1.0 {
        // power series; 30 terms reach machine precision for |θ| < 1
        let it = C64::new(0.0, theta);
        for (p, slot) in m.iter_mut().enumerate() {
            let mut term = C64::new(1.0, 0.0);
            let mut sum = C64::new(0.0, 0.0);
            for j in 0..30 {
                sum += term / (p + j + 1) as f64;
                term = term * it / (j + 1) as f64;
            }
            *slot = sum;
        }
    } else {
        let it = C64::new(0.0, theta);
        let e = C64::from_polar(1.0, theta);
        m[0] = (e - 1.0) / it;
        for p in 1..4 {
            m[p] = (e - m[p - 1] * p as f64) / it;
        }
    }
    m
}

/// Filon weights for a cubic Hermite interpolant on one unit interval.
///
/// For `f(s) = y0·h00 + d0·h10 + y1·h01 + d1·h11` (derivatives already scaled
/// by the interval length) the integral `∫_0^1 f(s) e^{iθs} ds` equals
/// `w[0]·y0 + w[1]·d0 + w[2]·y1 + w[3]·d1`.
pub fn hermite_filon_weights(theta: f64) -> [C64; 4] {
    let [m0, m1, m2, m3] = oscillatory_moments(theta);
    [
        m3 * 2.0 - m2 * 3.0 + m0,
        m3 - m2 * 2.0 + m1,
        m2 * 3.0 - m3 * 2.0,
        m3 - m2,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_linear_data() {
        let xs: Vec<f64> = (0..11).map(|i| 2.0 + 3.0 * i as f64 * 0.1).collect();
        assert!((trapezoid(&xs, 0.1) - 3.5).abs() < 1e-14);
        assert_eq!(trapezoid(&[1.0], 0.1), 0.0);
    }

    #[test]
    fn moments_agree_across_branches() {
        // both branches evaluated just either side of the switch point
        let a = oscillatory_moments(0.999_999_9);
        let b = oscillatory_moments(1.000_000_1);
        for p in 0..4 {
            assert!((a[p] - b[p]).norm() < 1e-6, "p = {p}");
        }
    }

    #[test]
    fn filon_weights_integrate_cubic_times_exponential() {
        // f(s) = s^3 on [0, 1]: y0 = 0, y1 = 1, f'(0) = 0, f'(1) = 3
        for &theta in &[0.0, 0.3, 2.5, -7.0, 40.0] {
            let w = hermite_filon_weights(theta);
            let got = w[2] + w[3] * 3.0;
            // reference by fine midpoint sum
            let n = 200_000;
            let mut reference = C64::new(0.0, 0.0);
            for i in 0..n {
                let s = (i as f64 + 0.5) / n as f64;
                reference += C64::from_polar(s.powi(3), theta * s);
            }
            reference /= n as f64;
            assert!((got - reference).norm() < 1e-8, "theta = {theta}");
        }
    }
}
