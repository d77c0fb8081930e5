//! Stationary solution: per wavevector, solve `M(δk)·χ = b(δk)` and build
//! the outgoing spectra.
//!
//! In the `φ` normalization the drive is `b_j = -i√(πΓ/v_g)·φ·e^{ik r_j}`
//! and the re-emitted amplitudes carry `√(Γv_g/4π)`. For a single atom this
//! gives `φ^R = φ·(-iδk v_g)/(Γ/2 - iδk v_g)`, i.e. `|φ^R|² + |φ^L|² = |φ|²`
//! pointwise, which pins every constant.

use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::coupling::{condition_number, narrowest_linewidth, system_entries, SINGULAR_CONDITION};
use crate::error::{Error, Result};
use crate::model::{
    KGrid, PulseShape, Scenario, SpectralSolution, GROUP_VELOCITY, RESONANT_WAVEVECTOR,
};
use crate::pulse::emission_factor;
use crate::C64;

/// Relative residual `‖Mχ - b‖/‖b‖` every grid point must reach.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Pivot ratio below which the exact condition number is computed.
const PIVOT_RATIO_GUARD: f64 = 1e-10;

/// `b_j(δk)` for every atom.
pub fn drive_vector(scenario: &Scenario, delta_k: f64) -> DVector<C64> {
    let amp = scenario.spectrum().value(delta_k)
        * C64::new(0.0, -(PI * scenario.gamma() / GROUP_VELOCITY).sqrt());
    let k = RESONANT_WAVEVECTOR + delta_k;
    DVector::from_iterator(
        scenario.n_atoms(),
        scenario
            .positions()
            .iter()
            .map(|&r| amp * C64::from_polar(1.0, k * r)),
    )
}

fn solve_point(scenario: &Scenario, delta_k: f64) -> Result<Vec<C64>> {
    let chain = scenario.chain();
    let b = drive_vector(scenario, delta_k);
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); chain.n_atoms()]);
    }
    let mut gamma_free = chain.gamma_free();
    let mut m = system_entries(chain, delta_k, gamma_free);
    let lu = m.clone().lu();
    let diag = lu.u().diagonal();
    let largest = diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let smallest = diag.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let mut lu = lu;
    if !(smallest > PIVOT_RATIO_GUARD * largest) {
        let condition = condition_number(&m);
        if !(condition <= SINGULAR_CONDITION) {
            if !scenario.regularize() {
                return Err(Error::SingularSystem { delta_k, condition });
            }
            gamma_free += 1e-12 * chain.gamma();
            m = system_entries(chain, delta_k, gamma_free);
            lu = m.clone().lu();
        }
    }
    let chi = lu.solve(&b).ok_or(Error::SingularSystem {
        delta_k,
        condition: f64::INFINITY,
    })?;
    let residual = (&m * &chi - &b).norm() / b_norm;
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::ResidualTooLarge { delta_k, residual });
    }
    Ok(chi.iter().copied().collect())
}

/// Solves for `χ_j(δk)` on `grid`; the outgoing spectra are left empty.
pub fn solve_chi(scenario: &Scenario, grid: &KGrid) -> Result<SpectralSolution> {
    let rows: Vec<Vec<C64>> = grid
        .samples()
        .par_iter()
        .map(|&dk| solve_point(scenario, dk))
        .collect::<Result<_>>()?;
    let input = grid
        .samples()
        .iter()
        .map(|&dk| scenario.spectrum().value(dk))
        .collect();
    Ok(SpectralSolution {
        grid: grid.clone(),
        n_atoms: scenario.n_atoms(),
        delta: scenario.delta(),
        input,
        chi: rows.into_iter().flatten().collect(),
        beta_r: Vec::new(),
        beta_l: Vec::new(),
        residual_excitation: 0.0,
    })
}

/// Fills `beta_r`/`beta_l` from `chi`:
/// `φ^R = φ - i√(Γv_g/4π) Σ_j e^{-ik r_j} χ_j`,
/// `φ^L = -i√(Γv_g/4π) Σ_j e^{ik r_j} χ_j`.
pub fn outgoing_spectra(scenario: &Scenario, mut solution: SpectralSolution) -> SpectralSolution {
    let factor = C64::new(0.0, -emission_factor(scenario.gamma()));
    let n = solution.n_atoms;
    let positions = scenario.positions();
    let (beta_r, beta_l): (Vec<C64>, Vec<C64>) = solution
        .grid
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &dk)| {
            let k = RESONANT_WAVEVECTOR + dk;
            let chi = &solution.chi[i * n..(i + 1) * n];
            let mut right = C64::new(0.0, 0.0);
            let mut left = C64::new(0.0, 0.0);
            for (c, &r) in chi.iter().zip(positions) {
                right += C64::from_polar(1.0, -k * r) * c;
                left += C64::from_polar(1.0, k * r) * c;
            }
            (solution.input[i] + factor * right, factor * left)
        })
        .unzip();
    solution.beta_r = beta_r;
    solution.beta_l = beta_l;
    solution
}

/// Smallest power-of-two point count, at least the scenario's own, that
/// puts `per_width` grid steps across the narrowest excited resonance.
pub fn resolving_points(scenario: &Scenario, per_width: f64) -> usize {
    let current = scenario.grid().len();
    let Some(width) = narrowest_linewidth(scenario.chain()) else {
        return current;
    };
    let needed = (2.0 * scenario.grid().half_width() * per_width / (width / GROUP_VELOCITY)).ceil();
    let mut points = current.next_power_of_two();
    while (points as f64) < needed {
        points *= 2;
    }
    points.max(current)
}

/// Full stationary pipeline on the scenario's own grid.
pub fn solve(scenario: &Scenario) -> Result<SpectralSolution> {
    let chi = solve_chi(scenario, scenario.grid())?;
    Ok(outgoing_spectra(scenario, chi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    OneAtom,
    TwoAtom,
    TwoAtomDecay,
}

impl ClosedForm {
    fn name(self) -> &'static str {
        match self {
            ClosedForm::OneAtom => "one_atom",
            ClosedForm::TwoAtom => "two_atom",
            ClosedForm::TwoAtomDecay => "two_atom_decay",
        }
    }
}

/// Rational closed forms for the outgoing spectra `(φ^R, φ^L)`.
pub fn closed_form_spectra(
    variant: ClosedForm,
    scenario: &Scenario,
    delta_k: f64,
) -> Result<(C64, C64)> {
    let expected_atoms = match variant {
        ClosedForm::OneAtom => 1,
        ClosedForm::TwoAtom | ClosedForm::TwoAtomDecay => 2,
    };
    if scenario.n_atoms() != expected_atoms {
        return Err(Error::VariantMismatch {
            variant: variant.name(),
            reason: format!(
                "needs {expected_atoms} atom(s), scenario has {}",
                scenario.n_atoms()
            ),
        });
    }
    if scenario.pulse().shape != PulseShape::Gaussian {
        return Err(Error::VariantMismatch {
            variant: variant.name(),
            reason: "needs a gaussian input pulse".into(),
        });
    }
    if variant != ClosedForm::TwoAtomDecay && scenario.gamma_free() != 0.0 {
        return Err(Error::VariantMismatch {
            variant: variant.name(),
            reason: "free-space decay must be zero".into(),
        });
    }
    let gamma = scenario.gamma();
    let phi = scenario.spectrum().value(delta_k);
    let k = RESONANT_WAVEVECTOR + delta_k;
    let r1 = scenario.positions()[0];
    let mirror = C64::from_polar(1.0, 2.0 * k * r1);
    let x = C64::new(0.0, 2.0 * delta_k * GROUP_VELOCITY / gamma);
    let one = C64::new(1.0, 0.0);
    Ok(match variant {
        ClosedForm::OneAtom => (-x * phi / (one - x), -mirror * phi / (one - x)),
        ClosedForm::TwoAtom => {
            let e2 = C64::from_polar(1.0, 2.0 * k * scenario.chain().spacing());
            let denom = (one - x) * (one - x) - e2;
            let q = delta_k * GROUP_VELOCITY / gamma;
            let right = phi * (-4.0 * q * q) / denom;
            // overall sign chosen to match the one-atom limit
            let left = -phi * mirror * ((one + e2) * (one - x) - e2 * 2.0) / denom;
            (right, left)
        }
        ClosedForm::TwoAtomDecay => {
            let small = scenario.gamma_free();
            let e2 = C64::from_polar(1.0, 2.0 * k * scenario.chain().spacing());
            let d = delta_k * GROUP_VELOCITY;
            let base = C64::new(gamma + small, -2.0 * d);
            let denom = base * base - e2 * gamma * gamma;
            let numer_r = C64::new(small * small - 4.0 * d * d, -4.0 * d * small);
            let right = phi * numer_r / denom;
            // the overall -Γ restores a dimensionless ratio and the one-atom sign
            let left = -phi * mirror * gamma * ((one + e2) * base - e2 * (2.0 * gamma)) / denom;
            (right, left)
        }
    })
}
