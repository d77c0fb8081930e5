//! Retarded delay equations for the atomic amplitudes,
//!
//! `α̇_j = b_j(t) - Σ_l (Γ/2·e^{ik_a r_jl} + γ/2·δ_jl)·α_l(t - r_jl/v_g)`,
//!
//! the single-atom error-function solution, and the photon spectra
//! reconstructed from a trajectory at a finite time.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::faddeeva::faddeeva;
use crate::model::{PulseShape, Scenario, SpectralSolution, GROUP_VELOCITY, RESONANT_WAVEVECTOR};
use crate::pulse::{drive_term, emission_factor};
use crate::quadrature::hermite_filon_weights;
use crate::C64;

/// Amplitudes above this magnitude signal a numerical blow-up.
const INSTABILITY_BOUND: f64 = 1.0 + 1e-6;

/// Residual excitation above which finite-time spectra are flagged.
pub const RESIDUAL_WARNING: f64 = 1e-4;

/// Quadrature intervals per fastest time scale for finite-time spectra.
const SPECTRUM_SAMPLES_PER_SCALE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retardation {
    #[default]
    Full,
    /// Delayed arguments replaced by the current time; the propagation
    /// phases `e^{ik_a r_jl}` are kept.
    Markovian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdeSettings {
    pub step: f64,
    pub horizon: f64,
    pub interpolation: Interpolation,
    pub retardation: Retardation,
}

impl DdeSettings {
    /// Step `min(1/50Γ, 1/50Δ, a)` and a horizon of `30/Γ` (at least
    /// `10/Δ`) past the arrival of the pulse center at the last atom.
    pub fn for_scenario(scenario: &Scenario) -> Self {
        let gamma = scenario.gamma() + scenario.gamma_free();
        let delta = scenario.delta() * GROUP_VELOCITY;
        let collective = gamma * scenario.n_atoms() as f64;
        let mut step = (1.0 / (50.0 * collective.max(gamma))).min(1.0 / (50.0 * delta));
        if let Some(d) = scenario.chain().min_delay_distance() {
            step = step.min(d / GROUP_VELOCITY);
        }
        let settle = if scenario.gamma() > 0.0 {
            (30.0 / scenario.gamma()).max(10.0 / delta)
        } else {
            10.0 / delta
        };
        let horizon = scenario.arrival_time(scenario.n_atoms() - 1) + settle;
        DdeSettings {
            step,
            horizon,
            interpolation: Interpolation::default(),
            retardation: Retardation::default(),
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn with_retardation(mut self, retardation: Retardation) -> Self {
        self.retardation = retardation;
        self
    }
}

/// Amplitudes and their time derivatives on a uniform grid `t_n = n·h`.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    step: f64,
    n_atoms: usize,
    // row-major, one row per time point
    values: Vec<C64>,
    rates: Vec<C64>,
}

impl AmplitudeTrajectory {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Number of time points.
    pub fn len(&self) -> usize {
        self.values.len() / self.n_atoms
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn amplitude(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.n_atoms + j]
    }

    pub fn rate(&self, i: usize, j: usize) -> C64 {
        self.rates[i * self.n_atoms + j]
    }

    pub fn amplitudes_at(&self, i: usize) -> &[C64] {
        &self.values[i * self.n_atoms..(i + 1) * self.n_atoms]
    }

    /// `α_j(t_n)` for every time point.
    pub fn atom(&self, j: usize) -> Vec<C64> {
        (0..self.len()).map(|i| self.amplitude(i, j)).collect()
    }

    /// `|α_j(t_n)|²` for every time point.
    pub fn excitation(&self, j: usize) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.amplitude(i, j).norm_sqr())
            .collect()
    }

    /// `Σ_j |α_j(t_n)|²`.
    pub fn total_excitation(&self, i: usize) -> f64 {
        self.amplitudes_at(i).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Index of the grid point nearest to `t`.
    pub fn index_at(&self, t: f64) -> Result<usize> {
        let end = self.end_time();
        if !(t >= -0.5 * self.step && t <= end + 0.5 * self.step) {
            return Err(Error::TimeOutOfRange { time: t, end });
        }
        Ok(((t / self.step).round().max(0.0) as usize).min(self.len() - 1))
    }

    fn delayed(&self, j: usize, tau: f64, interpolation: Interpolation) -> C64 {
        if tau <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        let x = tau / self.step;
        let m = (x.floor() as usize).min(self.len() - 1);
        let s = x - m as f64;
        if m + 1 >= self.len() || s <= 0.0 {
            return self.amplitude(m, j);
        }
        let y0 = self.amplitude(m, j);
        let y1 = self.amplitude(m + 1, j);
        match interpolation {
            Interpolation::Linear => y0 * (1.0 - s) + y1 * s,
            Interpolation::Cubic => {
                let h = self.step;
                let s2 = s * s;
                let s3 = s2 * s;
                y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
                    + self.rate(m, j) * (h * (s3 - 2.0 * s2 + s))
                    + y1 * (3.0 * s2 - 2.0 * s3)
                    + self.rate(m + 1, j) * (h * (s3 - s2))
            }
        }
    }
}

struct Couplings {
    n: usize,
    // row-major coefficient of α_l in the equation for α_j
    coeff: Vec<C64>,
    delay: Vec<f64>,
}

impl Couplings {
    fn new(scenario: &Scenario, retardation: Retardation) -> Self {
        let chain = scenario.chain();
        let n = chain.n_atoms();
        let mut coeff = Vec::with_capacity(n * n);
        let mut delay = Vec::with_capacity(n * n);
        for j in 0..n {
            for l in 0..n {
                let r = chain.distance(j, l);
                let mut c = C64::from_polar(0.5 * chain.gamma(), RESONANT_WAVEVECTOR * r);
                if j == l {
                    c += 0.5 * chain.gamma_free();
                }
                coeff.push(c);
                delay.push(match retardation {
                    Retardation::Full => r / GROUP_VELOCITY,
                    Retardation::Markovian => 0.0,
                });
            }
        }
        Couplings { n, coeff, delay }
    }

    #[allow(clippy::needless_range_loop)]
    fn rhs(
        &self,
        t: f64,
        current: &[C64],
        drive: &[C64],
        history: &AmplitudeTrajectory,
        interpolation: Interpolation,
        out: &mut [C64],
    ) {
        for j in 0..self.n {
            let mut acc = drive[j];
            for l in 0..self.n {
                let d = self.delay[j * self.n + l];
                let a = if d == 0.0 {
                    current[l]
                } else {
                    history.delayed(l, t - d, interpolation)
                };
                acc -= self.coeff[j * self.n + l] * a;
            }
            out[j] = acc;
        }
    }
}

/// Fixed-step RK4 integration from `α_j(0) = 0` with zero history.
pub fn integrate_dde(scenario: &Scenario, settings: &DdeSettings) -> Result<AmplitudeTrajectory> {
    if !(settings.step > 0.0 && settings.step.is_finite()) {
        return Err(Error::InvalidParameter {
            key: "solver.step",
            reason: format!("must be positive, got {}", settings.step),
        });
    }
    if !(settings.horizon > 0.0 && settings.horizon.is_finite()) {
        return Err(Error::InvalidParameter {
            key: "solver.horizon",
            reason: format!("must be positive, got {}", settings.horizon),
        });
    }
    let n = scenario.n_atoms();
    if settings.retardation == Retardation::Full {
        if let Some(d) = scenario.chain().min_delay_distance() {
            let delay = d / GROUP_VELOCITY;
            if settings.step > delay * (1.0 + 1e-12) {
                return Err(Error::StepTooLarge {
                    step: settings.step,
                    delay,
                });
            }
        }
    }
    let steps = (settings.horizon / settings.step).ceil().max(1.0) as usize;
    let h = settings.horizon / steps as f64;

    // drive at every grid point and half step
    let drive: Vec<C64> = (0..=2 * steps)
        .flat_map(|i| {
            let t = 0.5 * h * i as f64;
            (0..n).map(move |j| drive_term(scenario, j, t))
        })
        .collect();

    let couplings = Couplings::new(scenario, settings.retardation);
    let interp = settings.interpolation;
    let mut traj = AmplitudeTrajectory {
        step: h,
        n_atoms: n,
        values: Vec::with_capacity((steps + 1) * n),
        rates: Vec::with_capacity((steps + 1) * n),
    };
    traj.values
        .extend(std::iter::repeat_n(C64::new(0.0, 0.0), n));

    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut stage = k1.clone();
    for i in 0..steps {
        let t = h * i as f64;
        let y: Vec<C64> = traj.amplitudes_at(i).to_vec();
        let b0 = &drive[2 * i * n..(2 * i + 1) * n];
        let bh = &drive[(2 * i + 1) * n..(2 * i + 2) * n];
        let b1 = &drive[(2 * i + 2) * n..(2 * i + 3) * n];
        couplings.rhs(t, &y, b0, &traj, interp, &mut k1);
        traj.rates.extend_from_slice(&k1);
        for j in 0..n {
            stage[j] = y[j] + k1[j] * (0.5 * h);
        }
        couplings.rhs(t + 0.5 * h, &stage, bh, &traj, interp, &mut k2);
        for j in 0..n {
            stage[j] = y[j] + k2[j] * (0.5 * h);
        }
        couplings.rhs(t + 0.5 * h, &stage, bh, &traj, interp, &mut k3);
        for j in 0..n {
            stage[j] = y[j] + k3[j] * h;
        }
        couplings.rhs(t + h, &stage, b1, &traj, interp, &mut k4);
        for j in 0..n {
            let next = y[j] + (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
            let magnitude = next.norm();
            if !(magnitude <= INSTABILITY_BOUND) {
                return Err(Error::Instability {
                    atom: j,
                    time: t + h,
                    magnitude,
                });
            }
            traj.values.push(next);
        }
    }
    // derivative at the final point, for interpolation and spectra
    let last = traj.amplitudes_at(steps).to_vec();
    let b_end = &drive[2 * steps * n..(2 * steps + 1) * n];
    couplings.rhs(h * steps as f64, &last, b_end, &traj, interp, &mut k1);
    traj.rates.extend_from_slice(&k1);
    Ok(traj)
}

/// `e^E·erfc(z)` written so that no intermediate exponent overflows.
/// Returns the part that is multiplied by `2e^E` separately as a flag.
fn scaled_erfc(e: C64, z: C64) -> (C64, bool) {
    if z.re >= 0.0 {
        ((e - z * z).exp() * faddeeva(C64::new(-z.im, z.re)), false)
    } else {
        (-(e - z * z).exp() * faddeeva(C64::new(z.im, -z.re)), true)
    }
}

/// Closed-form `α(t)` for one atom driven by the Gaussian pulse.
///
/// With `g = Γ + γ`, `A = -g/2 + iδ₀v_g`, `B = Δ²v_g²/4`, `t₀` the arrival
/// time and `C = (A - 2Bt₀)/(2√B)`:
///
/// `α(t) = -iS·e^{ik_a r₁}·e^{g(t₀-t)/2 + A²/4B}·[erfc(C) - erfc(C + √B·t)]`.
///
/// A nonzero `γ` only enters the decay constant; this is an extension
/// beyond the lossless derivation and should be treated as experimental.
pub fn single_atom_analytic(scenario: &Scenario, t: f64) -> Result<C64> {
    if scenario.n_atoms() != 1 {
        return Err(Error::AtomCount {
            expected: 1,
            actual: scenario.n_atoms(),
        });
    }
    if scenario.pulse().shape != PulseShape::Gaussian {
        return Err(Error::PulseShapeMismatch {
            expected: "gaussian",
        });
    }
    let v = GROUP_VELOCITY;
    let delta = scenario.delta();
    let gamma = scenario.gamma();
    if gamma == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let g = gamma + scenario.gamma_free();
    let t0 = scenario.arrival_time(0);
    let a = C64::new(-0.5 * g, scenario.center_detuning() * v);
    let b = 0.25 * delta * delta * v * v;
    let sb = b.sqrt();
    let c = (a - 2.0 * b * t0) / (2.0 * sb);
    let z1 = c;
    let z2 = c + sb * t;
    let e = C64::new(0.5 * g * (t0 - t), 0.0) + a * a / (4.0 * b);
    let (p1, two1) = scaled_erfc(e, z1);
    let (p2, two2) = scaled_erfc(e, z2);
    let mut diff = p1 - p2;
    // whole-plane terms 2e^E cancel when both arguments share a branch
    if two1 && !two2 {
        diff += 2.0 * e.exp();
    }
    let norm =
        (8.0 * std::f64::consts::PI).powf(0.25) / (2.0 * std::f64::consts::PI * delta).sqrt();
    let spatial = norm * delta * std::f64::consts::PI.sqrt();
    let temporal = std::f64::consts::PI.sqrt() / (2.0 * sb);
    let r1 = scenario.positions()[0];
    let prefactor = C64::new(0.0, -emission_factor(gamma) * spatial * temporal)
        * C64::from_polar(1.0, RESONANT_WAVEVECTOR * r1);
    Ok(prefactor * diff)
}

/// `φ^R(δk, t)` and `φ^L(δk, t)` from the trajectory up to `t`:
///
/// `φ^R = φ - i√(Γv_g/4π) Σ_j e^{-ik r_j} ∫₀ᵗ α_j(t') e^{iδk v_g t'} dt'`,
/// `φ^L = -i√(Γv_g/4π) Σ_j e^{ik r_j} ∫₀ᵗ α_j(t') e^{iδk v_g t'} dt'`.
///
/// The time integrals use Hermite–Filon quadrature on a subsampled grid,
/// exact for the oscillating factor. `t` snaps to the nearest stored point.
/// The returned `chi` holds the finite-time integrals per atom.
pub fn finite_time_spectra(
    scenario: &Scenario,
    trajectory: &AmplitudeTrajectory,
    t: f64,
) -> Result<SpectralSolution> {
    if trajectory.n_atoms() != scenario.n_atoms() {
        return Err(Error::AtomCount {
            expected: scenario.n_atoms(),
            actual: trajectory.n_atoms(),
        });
    }
    let end = trajectory.index_at(t)?;
    let n = scenario.n_atoms();
    let h = trajectory.step();
    let fastest = scenario
        .delta()
        .max((scenario.gamma() + scenario.gamma_free()) * n as f64)
        * GROUP_VELOCITY;
    let target = 1.0 / (SPECTRUM_SAMPLES_PER_SCALE * fastest);
    let stride = ((target / h).floor() as usize).max(1);
    let mut bounds: Vec<usize> = (0..end).step_by(stride).collect();
    bounds.push(end);

    let grid = scenario.grid();
    let positions = scenario.positions();
    let factor = C64::new(0.0, -emission_factor(scenario.gamma()));
    let rows: Vec<(C64, C64, Vec<C64>)> = grid
        .samples()
        .par_iter()
        .map(|&dk| {
            let omega = dk * GROUP_VELOCITY;
            let full_w = hermite_filon_weights(omega * h * stride as f64);
            let mut integrals = vec![C64::new(0.0, 0.0); n];
            for w in bounds.windows(2) {
                let (i0, i1) = (w[0], w[1]);
                let span = h * (i1 - i0) as f64;
                let weights = if i1 - i0 == stride {
                    full_w
                } else {
                    hermite_filon_weights(omega * span)
                };
                let phase = C64::from_polar(span, omega * h * i0 as f64);
                for (j, acc) in integrals.iter_mut().enumerate() {
                    let local = weights[0] * trajectory.amplitude(i0, j)
                        + weights[1] * trajectory.rate(i0, j) * span
                        + weights[2] * trajectory.amplitude(i1, j)
                        + weights[3] * trajectory.rate(i1, j) * span;
                    *acc += phase * local;
                }
            }
            let k = RESONANT_WAVEVECTOR + dk;
            let mut right = C64::new(0.0, 0.0);
            let mut left = C64::new(0.0, 0.0);
            for (c, &r) in integrals.iter().zip(positions) {
                right += C64::from_polar(1.0, -k * r) * c;
                left += C64::from_polar(1.0, k * r) * c;
            }
            let phi = scenario.spectrum().value(dk);
            (phi + factor * right, factor * left, integrals)
        })
        .collect();

    let residual_excitation = trajectory.total_excitation(end);
    if residual_excitation > RESIDUAL_WARNING {
        log::warn!(
            "atoms hold {residual_excitation:.3e} excitation at t = {:.6e}; spectra are not converged",
            trajectory.time(end)
        );
    }
    let mut beta_r = Vec::with_capacity(rows.len());
    let mut beta_l = Vec::with_capacity(rows.len());
    let mut chi = Vec::with_capacity(rows.len() * n);
    for (r, l, c) in rows {
        beta_r.push(r);
        beta_l.push(l);
        chi.extend(c);
    }
    Ok(SpectralSolution {
        grid: grid.clone(),
        n_atoms: n,
        delta: scenario.delta(),
        input: grid
            .samples()
            .iter()
            .map(|&dk| scenario.spectrum().value(dk))
            .collect(),
        chi,
        beta_r,
        beta_l,
        residual_excitation,
    })
}
