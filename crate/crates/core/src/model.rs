//! Domain types shared by both solvers.
//!
//! Conventions: `λ_a = 1` so `k_a = 2π`, `v_g = 1`, the pulse width `Δ` is an
//! inverse length and `Γ = η·Δ·v_g`. Photon amplitudes are stored in the
//! quantization-length-free form `φ = √(L/2π)·β`, so `∫|φ|² dδk` is a
//! probability and `L` never appears.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::pulse::{self, SpectralAmplitude};
use crate::quadrature;
use crate::C64;

pub const RESONANT_WAVEVECTOR: f64 = TAU;
pub const GROUP_VELOCITY: f64 = 1.0;

/// Grid extent (in units of `Δ`) below which the pulse spectrum is truncated.
pub const MIN_GRID_EXTENT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_atoms: usize,
    /// Atom spacing in resonant wavelengths.
    pub spacing: f64,
    /// Waveguide coupling `η = Γ/(Δ·v_g)`.
    pub gamma_wg: f64,
    /// Free-space decay `γ/Γ`.
    pub gamma_free: f64,
    /// Position of the first atom in resonant wavelengths.
    pub first_position: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_atoms: 1,
            spacing: 0.5,
            gamma_wg: 1.0,
            gamma_free: 0.0,
            first_position: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseShape {
    Gaussian,
    /// Time-reversed single-atom emission: a rising exponential that stops
    /// abruptly on arrival, with a Lorentzian spectrum.
    Inversion,
}

impl PulseShape {
    pub fn name(self) -> &'static str {
        match self {
            PulseShape::Gaussian => "gaussian",
            PulseShape::Inversion => "inversion",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// Spectral width `Δ` (inverse length).
    pub width: f64,
    /// `k_0 - k_a` in units of `Δ`.
    pub center_detuning: f64,
    /// Distance of the pulse center from the first atom at `t = 0`, in units
    /// of `1/Δ`.
    pub initial_offset: f64,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            shape: PulseShape::Gaussian,
            width: 0.01,
            center_detuning: 0.0,
            initial_offset: 10.0,
        }
    }
}

/// Requested k-grid resolution; the grid itself is built during validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    /// Half-width in units of `Δ`.
    pub extent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 4096,
            extent: 8.0,
        }
    }
}

/// Uniform, cell-centered grid of wavevector detunings `δk`.
///
/// Samples sit at `center + (i + ½ - n/2)·step`, so an even point count never
/// lands on the center itself (where dark-mode singularities live for
/// resonant pulses).
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    center: f64,
    step: f64,
    samples: Vec<f64>,
}

impl KGrid {
    pub fn new(center: f64, half_width: f64, points: usize) -> Result<Self> {
        if points < 16 || !points.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                key: "grid.points",
                reason: format!("{points} must be even and at least 16"),
            });
        }
        if !(half_width.is_finite() && half_width > 0.0) || !center.is_finite() {
            return Err(Error::InvalidParameter {
                key: "grid.extent",
                reason: format!("half-width {half_width} must be positive and finite"),
            });
        }
        let step = 2.0 * half_width / points as f64;
        let offset = points as f64 / 2.0 - 0.5;
        let samples = (0..points)
            .map(|i| center + (i as f64 - offset) * step)
            .collect();
        Ok(Self {
            center,
            step,
            samples,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.step * self.samples.len() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        quadrature::trapezoid(values, self.step)
    }
}

/// Atom positions and decay rates in absolute (dimensionless) units.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    positions: Vec<f64>,
    spacing: f64,
    gamma: f64,
    gamma_free: f64,
}

impl Chain {
    /// Equally spaced chain starting at `first_position`.
    pub fn uniform(
        n_atoms: usize,
        spacing: f64,
        gamma: f64,
        gamma_free: f64,
        first_position: f64,
    ) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidParameter {
                key: "system.n_atoms",
                reason: "at least one atom is required".into(),
            });
        }
        check_non_negative("system.spacing", spacing)?;
        check_non_negative("system.gamma_wg", gamma)?;
        check_non_negative("system.gamma_free", gamma_free)?;
        if !first_position.is_finite() {
            return Err(Error::InvalidParameter {
                key: "system.first_position",
                reason: "must be finite".into(),
            });
        }
        let positions = (0..n_atoms)
            .map(|j| first_position + j as f64 * spacing)
            .collect();
        Ok(Self {
            positions,
            spacing,
            gamma,
            gamma_free,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Waveguide decay rate `Γ`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Free-space decay rate `γ`.
    pub fn gamma_free(&self) -> f64 {
        self.gamma_free
    }

    pub fn distance(&self, j: usize, l: usize) -> f64 {
        (self.positions[j] - self.positions[l]).abs()
    }

    /// Smallest nonzero atom separation, if any.
    pub fn min_delay_distance(&self) -> Option<f64> {
        if self.n_atoms() > 1 && self.spacing > 0.0 {
            Some(self.spacing)
        } else {
            None
        }
    }
}

fn check_non_negative(key: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            key,
            reason: format!("{value} must be finite and non-negative"),
        })
    }
}

/// Raw inputs of a scenario, kept together so sweeps can edit and revalidate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioInputs {
    pub system: SystemConfig,
    pub pulse: PulseSpec,
    pub grid: GridSpec,
    /// Add `10⁻¹²·Γ` to the free-space rate when a grid point hits an exactly
    /// singular system.
    pub regularize: bool,
}

impl ScenarioInputs {
    pub fn validate(&self) -> Result<Scenario> {
        let mut scenario = validate(&self.system, &self.pulse, &self.grid)?;
        scenario.regularize = self.regularize;
        Ok(scenario)
    }
}

/// Validated scenario with derived absolute quantities.
#[derive(Debug, Clone)]
pub struct Scenario {
    system: SystemConfig,
    pulse: PulseSpec,
    grid: KGrid,
    chain: Chain,
    spectrum: SpectralAmplitude,
    regularize: bool,
}

/// Checks all invariants and precomputes the absolute rates, atom positions
/// and the k-grid.
pub fn validate(system: &SystemConfig, pulse: &PulseSpec, grid: &GridSpec) -> Result<Scenario> {
    if !(pulse.width.is_finite() && pulse.width > 0.0) {
        return Err(Error::DegeneratePulseWidth(pulse.width));
    }
    if !(system.gamma_wg.is_finite() && system.gamma_wg >= 0.0) {
        return Err(Error::InvalidParameter {
            key: "system.gamma_wg",
            reason: format!("{} must be finite and non-negative", system.gamma_wg),
        });
    }
    for (key, value) in [
        ("pulse.center_detuning", pulse.center_detuning),
        ("pulse.initial_offset", pulse.initial_offset),
    ] {
        if !value.is_finite() {
            return Err(Error::InvalidParameter {
                key,
                reason: "must be finite".into(),
            });
        }
    }
    if pulse.initial_offset < 0.0 {
        return Err(Error::InvalidParameter {
            key: "pulse.initial_offset",
            reason: "the pulse must start to the left of the chain".into(),
        });
    }
    if !(grid.extent.is_finite() && grid.extent >= MIN_GRID_EXTENT) {
        return Err(Error::SpectralTruncation {
            extent: grid.extent,
            minimum: MIN_GRID_EXTENT,
        });
    }
    let delta = pulse.width;
    let gamma = system.gamma_wg * delta * GROUP_VELOCITY;
    let chain = Chain::uniform(
        system.n_atoms,
        system.spacing,
        gamma,
        system.gamma_free * gamma,
        system.first_position,
    )?;
    let k_grid = KGrid::new(
        pulse.center_detuning * delta,
        grid.extent * delta,
        grid.points,
    )?;
    let spectrum = match pulse.shape {
        PulseShape::Gaussian => pulse::gaussian_spectrum(pulse)?,
        PulseShape::Inversion => pulse::inversion_spectrum(pulse, gamma, &k_grid)?,
    }
    .with_origin(system.first_position - pulse.initial_offset / delta);
    Ok(Scenario {
        system: system.clone(),
        pulse: pulse.clone(),
        grid: k_grid,
        chain,
        spectrum,
        regularize: false,
    })
}

impl Scenario {
    pub fn system(&self) -> &SystemConfig {
        &self.system
    }

    pub fn pulse(&self) -> &PulseSpec {
        &self.pulse
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn spectrum(&self) -> &SpectralAmplitude {
        &self.spectrum
    }

    pub fn n_atoms(&self) -> usize {
        self.chain.n_atoms()
    }

    pub fn eta(&self) -> f64 {
        self.system.gamma_wg
    }

    pub fn gamma(&self) -> f64 {
        self.chain.gamma()
    }

    pub fn gamma_free(&self) -> f64 {
        self.chain.gamma_free()
    }

    /// Pulse width `Δ`.
    pub fn delta(&self) -> f64 {
        self.pulse.width
    }

    /// `k_0 - k_a` in absolute units.
    pub fn center_detuning(&self) -> f64 {
        self.pulse.center_detuning * self.pulse.width
    }

    /// `d_0` in absolute units.
    pub fn initial_offset(&self) -> f64 {
        self.pulse.initial_offset / self.pulse.width
    }

    pub fn positions(&self) -> &[f64] {
        self.chain.positions()
    }

    /// Nearest-neighbour resonance phase `k_a·a`.
    pub fn resonance_phase(&self) -> f64 {
        RESONANT_WAVEVECTOR * self.chain.spacing()
    }

    /// Time at which the pulse center reaches atom `j`.
    pub fn arrival_time(&self, j: usize) -> f64 {
        (self.chain.positions()[j] - self.chain.positions()[0] + self.initial_offset())
            / GROUP_VELOCITY
    }

    pub fn regularize(&self) -> bool {
        self.regularize
    }

    pub fn with_regularization(mut self, on: bool) -> Self {
        self.regularize = on;
        self
    }

    /// Same scenario on a different k-grid (sharing the pulse width).
    pub fn with_grid(&self, grid: &GridSpec) -> Result<Self> {
        let mut out = validate(&self.system, &self.pulse, grid)?;
        out.regularize = self.regularize;
        Ok(out)
    }
}

/// Spectra on a k-grid: atomic response `χ_j(δk)` and outgoing amplitudes.
///
/// `chi` is row-major, `chi[i * n_atoms + j]` for grid point `i`. All photon
/// amplitudes are in the `φ` normalization.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub grid: KGrid,
    pub n_atoms: usize,
    /// Pulse width `Δ`, used to express features in units of `Δ`.
    pub delta: f64,
    pub input: Vec<C64>,
    pub chi: Vec<C64>,
    pub beta_r: Vec<C64>,
    pub beta_l: Vec<C64>,
    /// Excitation left in the atoms when the spectra were taken; zero for
    /// the stationary solution.
    pub residual_excitation: f64,
}

impl SpectralSolution {
    pub fn chi(&self, i: usize, j: usize) -> C64 {
        self.chi[i * self.n_atoms + j]
    }

    pub fn input_density(&self) -> Vec<f64> {
        self.input.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn reflected_density(&self) -> Vec<f64> {
        self.beta_l.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn transmitted_density(&self) -> Vec<f64> {
        self.beta_r.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Guided photon probability `∫(|φ^R|² + |φ^L|²) dδk`.
    pub fn guided_probability(&self) -> f64 {
        let total: Vec<f64> = self
            .beta_r
            .iter()
            .zip(&self.beta_l)
            .map(|(r, l)| r.norm_sqr() + l.norm_sqr())
            .collect();
        self.grid.integrate(&total)
    }

    /// Whether the atoms had decayed when the spectra were taken.
    pub fn is_converged(&self) -> bool {
        self.residual_excitation <= 1e-4
    }
}
