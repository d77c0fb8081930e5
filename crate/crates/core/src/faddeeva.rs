//! Complex error function via the Faddeeva function.
//!
//! `w(z) = e^{-z²} erfc(-iz)` is evaluated with a rational expansion in
//! `(L + iz)/(L - iz)` in the upper half plane and extended to the lower
//! half plane by reflection. The complementary error function is then
//! `erfc(z) = e^{-z²} w(iz)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::C64;

/// Number of expansion terms; 48 keeps the relative error near 1e-14 for
/// the argument sizes used here.
const TERMS: usize = 48;

struct Expansion {
    scale: f64,
    // coefficients of Z^0, Z^1, ... Z^{TERMS-1}
    coeffs: Vec<f64>,
}

fn expansion() -> &'static Expansion {
    static TABLE: OnceLock<Expansion> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = TERMS;
        let m = 2 * n;
        let m2 = 2 * m;
        let scale = (n as f64 / 2f64.sqrt()).sqrt();
        // samples of exp(-t²)(L² + t²) on t = L·tan(θ/2), already in
        // fft-shifted order: index j ↔ k = j (j < m), k = j - 2m (j > m)
        let samples: Vec<f64> = (0..m2)
            .map(|j| {
                if j == m {
                    return 0.0;
                }
                let k = if j < m {
                    j as f64
                } else {
                    j as f64 - m2 as f64
                };
                let t = scale * (k * PI / m as f64 / 2.0).tan();
                (-t * t).exp() * (scale * scale + t * t)
            })
            .collect();
        let coeffs = (1..=n)
            .map(|p| {
                let sum: f64 = samples
                    .iter()
                    .enumerate()
                    .map(|(j, &f)| f * (2.0 * PI * (j * p) as f64 / m2 as f64).cos())
                    .sum();
                sum / m2 as f64
            })
            .collect();
        Expansion { scale, coeffs }
    })
}

fn faddeeva_upper(z: C64) -> C64 {
    let e = expansion();
    let iz = C64::new(-z.im, z.re);
    let denom = e.scale - iz;
    let ratio = (e.scale + iz) / denom;
    let poly = e
        .coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * ratio + c);
    poly * 2.0 / (denom * denom) + 1.0 / (PI.sqrt() * denom)
}

/// Faddeeva function `w(z) = e^{-z²} erfc(-iz)`.
pub fn faddeeva(z: C64) -> C64 {
    if z.im >= 0.0 {
        faddeeva_upper(z)
    } else {
        (-z * z).exp() * 2.0 - faddeeva_upper(-z)
    }
}

/// Complementary error function of a complex argument.
pub fn erfc(z: C64) -> C64 {
    if z.re >= 0.0 {
        (-z * z).exp() * faddeeva_upper(C64::new(-z.im, z.re))
    } else {
        2.0 - erfc(-z)
    }
}

pub fn erf(z: C64) -> C64 {
    1.0 - erfc(z)
}

/// Scaled complementary error function `e^{x²} erfc(x)` for real `x`.
pub fn erfcx(x: f64) -> f64 {
    if x >= 0.0 {
        faddeeva_upper(C64::new(0.0, x)).re
    } else {
        2.0 * (x * x).exp() - faddeeva_upper(C64::new(0.0, -x)).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// erf(z) = (2/√π) ∫_0^1 z e^{-(sz)²} ds by composite Simpson.
    fn erf_by_quadrature(z: C64) -> C64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |s: f64| z * (-(z * s) * (z * s)).exp();
        let mut acc = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(i as f64 * h) * w;
        }
        acc * h / 3.0 * 2.0 / PI.sqrt()
    }

    #[test]
    fn erf_matches_line_integral() {
        let points = [
            C64::new(0.3, 0.0),
            C64::new(1.0, 1.0),
            C64::new(-2.0, 0.5),
            C64::new(0.5, -1.5),
            C64::new(3.0, 2.0),
            C64::new(-4.0, -1.0),
            C64::new(1e-3, 2e-3),
        ];
        for &z in &points {
            let got = erf(z);
            let want = erf_by_quadrature(z);
            assert!(
                (got - want).norm() <= 1e-11 * want.norm().max(1.0),
                "z = {z}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn real_axis_values() {
        assert!((erf(C64::new(1.0, 0.0)).re - 0.842_700_792_949_714_9).abs() < 1e-14);
        assert!((erfcx(0.0) - 1.0).abs() < 1e-14);
        // erfcx(x) ~ 1/(x√π) (1 - 1/(2x²))
        let x = 1e3;
        let asymptotic = 1.0 / (x * PI.sqrt()) * (1.0 - 0.5 / (x * x));
        assert!((erfcx(x) - asymptotic).abs() / asymptotic < 1e-10);
        // reflection branch
        let x: f64 = -0.7;
        let direct = (x * x).exp() * erfc(C64::new(x, 0.0)).re;
        assert!((erfcx(x) - direct).abs() < 1e-13);
    }

    #[test]
    fn faddeeva_reflection_is_continuous() {
        let above = faddeeva(C64::new(1.3, 1e-12));
        let below = faddeeva(C64::new(1.3, -1e-12));
        assert!((above - below).norm() < 1e-10);
        assert!((faddeeva(C64::new(0.0, 0.0)) - 1.0).norm() < 1e-14);
    }
}
