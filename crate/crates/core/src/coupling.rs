//! Waveguide-mediated collective coupling between the atoms.
//!
//! `V_jl(δk) = -(Γ/2)·e^{ik|r_j - r_l|}` with `k = k_a + δk`. The matrix is
//! complex symmetric but not Hermitian, so its eigenvectors are not
//! orthogonal in general; eigenpairs come from a complex Schur form.

use nalgebra::{DMatrix, DVector};

use crate::model::{Chain, GROUP_VELOCITY, RESONANT_WAVEVECTOR};
use crate::C64;

/// Condition number above which `M(δk)` is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub entries: DMatrix<C64>,
    /// Wavevector `k_a + δk` the matrix was built at.
    pub k: f64,
}

/// `M(δk) = -V(δk) + (γ/2 - iδk v_g)·I` with its 1-norm condition number.
#[derive(Debug, Clone)]
pub struct SystemMatrix {
    pub entries: DMatrix<C64>,
    pub condition: f64,
}

impl SystemMatrix {
    pub fn is_near_singular(&self) -> bool {
        !(self.condition <= SINGULAR_CONDITION)
    }
}

#[derive(Debug, Clone)]
pub struct EigenMode {
    /// Real part: minus the collective amplitude decay rate; imaginary part:
    /// collective energy shift.
    pub value: C64,
    /// Unit 2-norm eigenvector.
    pub vector: DVector<C64>,
}

pub fn build_v(chain: &Chain, delta_k: f64) -> CouplingMatrix {
    let n = chain.n_atoms();
    let k = RESONANT_WAVEVECTOR + delta_k;
    let half = -0.5 * chain.gamma();
    let entries = DMatrix::from_fn(n, n, |j, l| C64::from_polar(half, k * chain.distance(j, l)));
    CouplingMatrix { entries, k }
}

pub fn build_m(chain: &Chain, delta_k: f64) -> SystemMatrix {
    let entries = system_entries(chain, delta_k, chain.gamma_free());
    let condition = condition_number(&entries);
    SystemMatrix { entries, condition }
}

pub(crate) fn system_entries(chain: &Chain, delta_k: f64, gamma_free: f64) -> DMatrix<C64> {
    let mut m = -build_v(chain, delta_k).entries;
    let shift = C64::new(0.5 * gamma_free, -delta_k * GROUP_VELOCITY);
    for j in 0..m.nrows() {
        m[(j, j)] += shift;
    }
    m
}

fn norm_one(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖M‖₁·‖M⁻¹‖₁`, infinite for an exactly singular matrix.
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    match m.clone().lu().try_inverse() {
        Some(inv) => norm_one(m) * norm_one(&inv),
        None => f64::INFINITY,
    }
}

/// Eigenpairs of `V(δk)`, sorted by decay rate (most negative real part
/// first), ties broken by the imaginary part.
pub fn eigenmodes(chain: &Chain, delta_k: f64) -> Vec<EigenMode> {
    let v = build_v(chain, delta_k).entries;
    let n = v.nrows();
    let scale = v
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let (q, t) = v.schur().unpack();
    let mut modes: Vec<EigenMode> = (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            // back substitution on the triangular factor
            let mut y = DVector::<C64>::zeros(n);
            y[k] = C64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut acc = C64::new(0.0, 0.0);
                for jj in (i + 1)..=k {
                    acc += t[(i, jj)] * y[jj];
                }
                let mut pivot = t[(i, i)] - lambda;
                if pivot.norm() < f64::EPSILON * scale {
                    pivot = C64::new(f64::EPSILON * scale, 0.0);
                }
                y[i] = -acc / pivot;
            }
            let mut vector = &q * y;
            let norm = vector.norm();
            vector /= C64::new(norm, 0.0);
            EigenMode {
                value: lambda,
                vector,
            }
        })
        .collect();
    modes.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    modes
}

/// Half-width (in `δk·v_g`) of the narrowest collective resonance that the
/// resonant drive `e^{ik_a r_j}` actually excites, including `γ/2`. Modes
/// with no overlap with the drive leave no trace in the spectra.
pub fn narrowest_linewidth(chain: &Chain) -> Option<f64> {
    let n = chain.n_atoms();
    let drive = DVector::from_iterator(
        n,
        chain
            .positions()
            .iter()
            .map(|&r| C64::from_polar(1.0 / (n as f64).sqrt(), RESONANT_WAVEVECTOR * r)),
    );
    eigenmodes(chain, 0.0)
        .iter()
        // V is complex symmetric, so the left eigenvector is the transpose
        .filter(|m| m.vector.dot(&drive).norm() > 1e-8)
        .map(|m| -m.value.re + 0.5 * chain.gamma_free())
        .filter(|w| *w > 0.0)
        .min_by(f64::total_cmp)
}

/// Two-atom eigenvalues in the commonly quoted form:
/// `λ_± = -(Γ/2)(1 ± cos k_a a) ± i(Γ/2) sin k_a a`.
///
/// These are the complex conjugates of the imaginary parts that
/// [`two_atom_eigenvalues`] produces for the matrix `V` itself; only the
/// real parts and `|Im λ|` coincide for a general spacing.
pub fn two_atom_eigenvalues_quoted(gamma: f64, spacing: f64) -> (C64, C64) {
    let phase = RESONANT_WAVEVECTOR * spacing;
    let (s, c) = phase.sin_cos();
    let half = 0.5 * gamma;
    (
        C64::new(-half * (1.0 + c), half * s),
        C64::new(-half * (1.0 - c), -half * s),
    )
}

/// Eigenvalues of `V_2(δk = 0)` for the symmetric and antisymmetric states
/// `(|eg⟩ ± |ge⟩)/√2`: `λ_± = -(Γ/2)(1 ± e^{ik_a a})`.
pub fn two_atom_eigenvalues(gamma: f64, spacing: f64) -> (C64, C64) {
    let e = C64::from_polar(1.0, RESONANT_WAVEVECTOR * spacing);
    let half = -0.5 * gamma;
    ((1.0 + e) * half, (1.0 - e) * half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn chain(n: usize, spacing: f64, gamma_free: f64) -> Chain {
        Chain::uniform(n, spacing, 1.0, gamma_free, 0.0).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn single_atom_matrix() {
        let v = build_v(&chain(1, 0.5, 0.0), 0.0);
        assert_eq!(v.entries.shape(), (1, 1));
        assert!(close(v.entries[(0, 0)], C64::new(-0.5, 0.0), 1e-15));
    }

    #[test]
    fn phase_arithmetic() {
        let v = build_v(&chain(2, 0.5, 0.0), 0.0).entries;
        assert!(close(v[(0, 1)], C64::new(0.5, 0.0), 1e-15));
        let v = build_v(&chain(3, 0.25, 0.0), 0.0).entries;
        assert!(close(v[(0, 2)], C64::new(0.5, 0.0), 1e-15));
        assert!(close(v[(0, 1)], C64::new(0.0, -0.5), 1e-15));
        for j in 0..3 {
            assert!(close(v[(j, j)], C64::new(-0.5, 0.0), 1e-15));
            for l in 0..3 {
                assert_eq!(v[(j, l)], v[(l, j)]);
            }
        }
    }

    #[test]
    fn system_matrix_single_atom() {
        let dk = 0.3;
        let m = build_m(&chain(1, 0.5, 0.0), dk);
        assert!(close(m.entries[(0, 0)], C64::new(0.5, -dk), 1e-15));
    }

    #[test]
    fn dark_mode_makes_system_singular() {
        let m = build_m(&chain(2, 0.5, 0.0), 0.0);
        assert!(m.is_near_singular());
        // with γ = Γ the eigenvalues of M are γ/2 and Γ + γ/2
        let m = build_m(&chain(2, 0.5, 1.0), 0.0);
        assert!(!m.is_near_singular());
        let (_, t) = m.entries.clone().schur().unpack();
        let mut ev: Vec<f64> = (0..2).map(|i| t[(i, i)].re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 0.5).abs() < 1e-12 && (ev[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn two_atom_half_wavelength() {
        let modes = eigenmodes(&chain(2, 0.5, 0.0), 0.0);
        assert!(close(modes[0].value, C64::new(-1.0, 0.0), 1e-12));
        assert!(close(modes[1].value, C64::new(0.0, 0.0), 1e-12));
        // superradiant mode is antisymmetric
        let v = &modes[0].vector;
        assert!((v[0] + v[1]).norm() < 1e-12);
        assert!((v[0].norm() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn two_atom_quarter_wavelength() {
        let modes = eigenmodes(&chain(2, 0.25, 0.0), 0.0);
        let values: Vec<C64> = modes.iter().map(|m| m.value).collect();
        assert!(close(values[0], C64::new(-0.5, -0.5), 1e-12));
        assert!(close(values[1], C64::new(-0.5, 0.5), 1e-12));
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        for &(n, a) in &[(3, 0.125), (5, 0.25), (7, 0.31), (12, 0.4)] {
            let c = chain(n, a, 0.0);
            let v = build_v(&c, 0.0).entries;
            let modes = eigenmodes(&c, 0.0);
            let trace: C64 = modes.iter().map(|m| m.value).sum();
            assert!(close(trace, C64::new(-0.5 * n as f64, 0.0), 1e-10));
            for m in &modes {
                let residual = (&v * &m.vector - &m.vector * m.value).norm();
                assert!(residual < 1e-9, "n={n} a={a} residual={residual}");
                assert!(m.value.re <= 1e-12);
            }
        }
    }

    #[test]
    fn full_wavelength_shift_is_periodic() {
        let a = build_v(&chain(4, 0.17, 0.0), 0.0).entries;
        let b = build_v(&chain(4, 1.17, 0.0), 0.0).entries;
        for (x, y) in a.iter().zip(b.iter()) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn narrowest_coupled_mode() {
        // the dark mode at λ/2 is invisible to the drive
        let w = narrowest_linewidth(&chain(2, 0.5, 0.0)).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert!((narrowest_linewidth(&chain(1, 0.5, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        let w = narrowest_linewidth(&chain(5, 0.125, 0.0)).unwrap();
        assert!(w > 0.0 && w < 0.01, "{w}");
    }

    #[test]
    fn closed_forms_at_special_spacings() {
        for f in [two_atom_eigenvalues, two_atom_eigenvalues_quoted] {
            let (p, m) = f(1.0, 0.5);
            assert!(close(p, C64::new(0.0, 0.0), 1e-15));
            assert!(close(m, C64::new(-1.0, 0.0), 1e-15));
        }
        // quoted and matrix forms differ by the sign of the imaginary part
        let (p, m) = two_atom_eigenvalues(1.0, 0.125);
        let (pp, mp) = two_atom_eigenvalues_quoted(1.0, 0.125);
        assert!(close(p, pp.conj(), 1e-15) && close(m, mp.conj(), 1e-15));
    }
}
