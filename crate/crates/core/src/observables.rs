//! Quantities derived from spectra and trajectories: reflectivity,
//! spectral features, real-space pulse shapes, concurrence and sweeps.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::faddeeva::erfcx;
use crate::freq_domain;
use crate::model::{ScenarioInputs, SpectralSolution, GROUP_VELOCITY, RESONANT_WAVEVECTOR};
use crate::time_domain::AmplitudeTrajectory;
use crate::C64;

/// Boundary density (relative to the peak) that triggers a truncation warning.
const TRUNCATION_WARNING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Peak,
    Dip,
    Fwhm,
    Bandgap,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Peak => "peak",
            FeatureKind::Dip => "dip",
            FeatureKind::Fwhm => "fwhm",
            FeatureKind::Bandgap => "bandgap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Input,
    Transmitted,
    Reflected,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Input => "input",
            Channel::Transmitted => "transmitted",
            Channel::Reflected => "reflected",
        }
    }
}

/// A feature of one spectral density. Locations and widths are in units
/// of `Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFeature {
    pub kind: FeatureKind,
    pub channel: Channel,
    pub location: f64,
    /// Interval edges for widths and bandgaps.
    pub bounds: Option<(f64, f64)>,
    pub width: f64,
    /// Density at `location` (peaks, dips) or the half maximum (FWHM).
    pub value: f64,
    /// Transmittance cutoff for bandgaps.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureThresholds {
    /// Peaks and dips below this fraction of the channel maximum are ripple.
    pub peak_floor: f64,
    /// Transmitted/input density ratio that defines the bandgap.
    pub bandgap: f64,
}

impl Default for FeatureThresholds {
    fn default() -> Self {
        Self {
            peak_floor: 1e-4,
            bandgap: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSummary {
    pub reflectivity: f64,
    pub transmittivity: f64,
    pub guided_fraction: f64,
    pub features: Vec<SpectralFeature>,
    pub warnings: Vec<String>,
}

/// `R = ∫|φ^L|²`, `T = ∫|φ^R|²` on the solver grid, plus the default
/// feature set.
pub fn reflect_transmit(spectra: &SpectralSolution) -> TransportSummary {
    let grid = &spectra.grid;
    let reflected = spectra.reflected_density();
    let transmitted = spectra.transmitted_density();
    let reflectivity = grid.integrate(&reflected);
    let transmittivity = grid.integrate(&transmitted);
    let mut warnings = Vec::new();
    for (channel, density) in [
        (Channel::Input, spectra.input_density()),
        (Channel::Reflected, reflected),
        (Channel::Transmitted, transmitted),
    ] {
        let peak = density.iter().copied().fold(0.0, f64::max);
        let edge = density[0].max(density[density.len() - 1]);
        if peak > 0.0 && edge > TRUNCATION_WARNING * peak {
            warnings.push(format!(
                "{} spectrum truncated: boundary density is {:.3e} of the peak",
                channel.name(),
                edge / peak
            ));
        }
    }
    if spectra.residual_excitation > crate::time_domain::RESIDUAL_WARNING {
        warnings.push(format!(
            "atoms still hold {:.3e} excitation",
            spectra.residual_excitation
        ));
    }
    TransportSummary {
        reflectivity,
        transmittivity,
        guided_fraction: reflectivity + transmittivity,
        features: spectral_features(spectra, &FeatureThresholds::default()),
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefactor {
    /// `√(π/2)`; exceeds one for strong coupling.
    Quoted,
    /// `√(2/π)`; tends to one for strong coupling.
    Corrected,
}

/// One-atom resonant reflectivity `R(η) = c·∫e^{-2y²}/(1 + 4y²/η²) dy` and
/// `T = 1 - R`.
///
/// The integral equals `(πη/2)·erfcx(η/√2)`.
pub fn one_atom_rt_eta(eta: f64, prefactor: Prefactor) -> (f64, f64) {
    let c = match prefactor {
        Prefactor::Quoted => (PI / 2.0).sqrt(),
        Prefactor::Corrected => (2.0 / PI).sqrt(),
    };
    let r = if eta > 0.0 {
        c * 0.5 * PI * eta * erfcx(eta / SQRT_2)
    } else {
        0.0
    };
    (r, 1.0 - r)
}

/// Transmission maxima `(δk_+, δk_-)` of a single atom in units of `Δ`.
pub fn transmission_peaks(eta: f64) -> (f64, f64) {
    let inner = (1.0 + 8.0 / (eta * eta)).sqrt() - 1.0;
    let x = eta / (2.0 * SQRT_2) * inner.max(0.0).sqrt();
    (x, -x)
}

/// Real-space fields at time `t` on an x-grid.
#[derive(Debug, Clone)]
pub struct PulseShape {
    pub x: Vec<f64>,
    pub incoming: Vec<C64>,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    pub warnings: Vec<String>,
}

impl PulseShape {
    /// `∫|β_x|² dx` for a field sampled on `x`.
    pub fn norm(&self, field: &[C64]) -> f64 {
        let step = if self.x.len() > 1 {
            self.x[1] - self.x[0]
        } else {
            0.0
        };
        let values: Vec<f64> = field.iter().map(|z| z.norm_sqr()).collect();
        crate::quadrature::trapezoid(&values, step)
    }
}

/// Fourier synthesis
/// `β^R_x(t) = e^{ik_a x}/√2π ∫ φ^R e^{iδk(x - v_g t)} dδk`,
/// `β^L_x(t) = e^{-ik_a x}/√2π ∫ φ^L e^{-iδk(x + v_g t)} dδk`;
/// `incoming` is the input spectrum propagated freely.
pub fn pulse_shape(spectra: &SpectralSolution, x: &[f64], t: f64) -> PulseShape {
    let grid = &spectra.grid;
    let ks = grid.samples();
    let weight = grid.step() / (2.0 * PI).sqrt();
    let synth = |amps: &[C64], sign: f64, xv: f64| -> C64 {
        let shift = sign * xv - GROUP_VELOCITY * t;
        let sum: C64 = amps
            .iter()
            .zip(ks)
            .map(|(a, &dk)| a * C64::from_polar(1.0, dk * shift))
            .sum();
        sum * weight * C64::from_polar(1.0, sign * RESONANT_WAVEVECTOR * xv)
    };
    let fields: Vec<(C64, C64, C64)> = x
        .par_iter()
        .map(|&xv| {
            (
                synth(&spectra.input, 1.0, xv),
                synth(&spectra.beta_r, 1.0, xv),
                synth(&spectra.beta_l, -1.0, xv),
            )
        })
        .collect();
    let mut warnings = Vec::new();
    if let (Some(&lo), Some(&hi)) = (x.first(), x.last()) {
        let span = hi - lo;
        let period = 2.0 * PI / grid.step();
        if span > period {
            warnings.push(format!(
                "x-grid span {span:.3e} exceeds the k-grid alias period {period:.3e}"
            ));
        }
        // the pulse occupies roughly ±8 widths around its center
        let extent = 16.0 / spectra.delta;
        if span < GROUP_VELOCITY * t.abs() + extent {
            warnings.push(format!(
                "x-grid span {span:.3e} is shorter than v_g*t + pulse extent {:.3e}; fields may be cut off",
                GROUP_VELOCITY * t.abs() + extent
            ));
        }
    }
    let mut incoming = Vec::with_capacity(x.len());
    let mut right = Vec::with_capacity(x.len());
    let mut left = Vec::with_capacity(x.len());
    for (i, r, l) in fields {
        incoming.push(i);
        right.push(r);
        left.push(l);
    }
    PulseShape {
        x: x.to_vec(),
        incoming,
        right,
        left,
        warnings,
    }
}

/// Local maxima above `floor` times the global maximum.
pub fn count_peaks(values: &[f64], floor: f64) -> usize {
    let max = values.iter().copied().fold(0.0, f64::max);
    (1..values.len().saturating_sub(1))
        .filter(|&i| {
            values[i] > floor * max && values[i] > values[i - 1] && values[i] >= values[i + 1]
        })
        .count()
}

// vertex of the parabola through three equally spaced samples
fn refine(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        return (x[i], y1);
    }
    let offset = 0.5 * (y0 - y2) / denom;
    let step = x[i + 1] - x[i];
    (x[i] + offset * step, y1 - 0.25 * (y0 - y2) * offset)
}

fn crossing(x: &[f64], y: &[f64], i: usize, level: f64) -> f64 {
    // linear interpolation between samples i and i + 1
    let (y0, y1) = (y[i], y[i + 1]);
    if y1 == y0 {
        return x[i];
    }
    x[i] + (level - y0) / (y1 - y0) * (x[i + 1] - x[i])
}

/// Full width at half maximum around the global maximum, by linear
/// interpolation of the half-maximum crossings. `None` if a crossing is
/// missing.
pub fn fwhm(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let (imax, &max) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(max > 0.0) {
        return None;
    }
    let half = 0.5 * max;
    let lo = (0..imax).rev().find(|&i| y[i] < half)?;
    let hi = (imax + 1..y.len()).find(|&i| y[i] < half)?;
    Some((crossing(x, y, lo, half), crossing(x, y, hi - 1, half)))
}

// `gate` decides where dips are meaningful: only where the input carries
// signal, so an exact zero of the channel still counts
fn extrema(
    x: &[f64],
    y: &[f64],
    gate: &[f64],
    channel: Channel,
    floor: f64,
    out: &mut Vec<SpectralFeature>,
) {
    let max = y.iter().copied().fold(0.0, f64::max);
    let gate_max = gate.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return;
    }
    for i in 1..y.len().saturating_sub(1) {
        let peak = y[i] > y[i - 1] && y[i] >= y[i + 1];
        let dip = y[i] < y[i - 1] && y[i] <= y[i + 1];
        if !(peak || dip) {
            continue;
        }
        let (location, value) = refine(x, y, i);
        let significant = if peak {
            value > floor * max
        } else {
            gate[i] > floor * gate_max
        };
        if !significant {
            continue;
        }
        out.push(SpectralFeature {
            kind: if peak {
                FeatureKind::Peak
            } else {
                FeatureKind::Dip
            },
            channel,
            location,
            bounds: None,
            width: 0.0,
            value: value.max(0.0),
            threshold: None,
        });
    }
}

/// Peaks, dips and FWHM of every channel plus the transmission bandgaps.
pub fn spectral_features(
    spectra: &SpectralSolution,
    thresholds: &FeatureThresholds,
) -> Vec<SpectralFeature> {
    let x: Vec<f64> = spectra
        .grid
        .samples()
        .iter()
        .map(|k| k / spectra.delta)
        .collect();
    let input = spectra.input_density();
    let mut out = Vec::new();
    let mut channels = vec![(Channel::Input, input.clone())];
    if !spectra.beta_r.is_empty() {
        channels.push((Channel::Transmitted, spectra.transmitted_density()));
        channels.push((Channel::Reflected, spectra.reflected_density()));
    }
    for (channel, density) in &channels {
        extrema(
            &x,
            density,
            &input,
            *channel,
            thresholds.peak_floor,
            &mut out,
        );
        if let Some((lo, hi)) = fwhm(&x, density) {
            let max = density.iter().copied().fold(0.0, f64::max);
            out.push(SpectralFeature {
                kind: FeatureKind::Fwhm,
                channel: *channel,
                location: 0.5 * (lo + hi),
                bounds: Some((lo, hi)),
                width: hi - lo,
                value: 0.5 * max,
                threshold: None,
            });
        }
    }
    if let Some((_, transmitted)) = channels.iter().find(|(c, _)| *c == Channel::Transmitted) {
        out.extend(bandgaps(&x, &input, transmitted, thresholds.bandgap));
    }
    out
}

/// Contiguous intervals where the transmitted/input density ratio is below
/// `threshold`, restricted to where the input carries signal.
pub fn bandgaps(
    x: &[f64],
    input: &[f64],
    transmitted: &[f64],
    threshold: f64,
) -> Vec<SpectralFeature> {
    let peak = input.iter().copied().fold(0.0, f64::max);
    let ratio: Vec<f64> = input
        .iter()
        .zip(transmitted)
        .map(|(&i, &t)| if i > 1e-6 * peak { t / i } else { f64::NAN })
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < ratio.len() {
        if !(ratio[i] < threshold) {
            i += 1;
            continue;
        }
        let start = i;
        while i < ratio.len() && ratio[i] < threshold {
            i += 1;
        }
        let end = i - 1;
        let lo = if start > 0 && ratio[start - 1].is_finite() {
            crossing(x, &ratio, start - 1, threshold)
        } else {
            x[start]
        };
        let hi = if end + 1 < ratio.len() && ratio[end + 1].is_finite() {
            crossing(x, &ratio, end, threshold)
        } else {
            x[end]
        };
        out.push(SpectralFeature {
            kind: FeatureKind::Bandgap,
            channel: Channel::Transmitted,
            location: 0.5 * (lo + hi),
            bounds: Some((lo, hi)),
            width: hi - lo,
            value: ratio[start..=end]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
            threshold: Some(threshold),
        });
    }
    out
}

/// Widest bandgap among `features`, if any.
pub fn widest_bandgap(features: &[SpectralFeature]) -> Option<&SpectralFeature> {
    features
        .iter()
        .filter(|f| f.kind == FeatureKind::Bandgap)
        .max_by(|a, b| a.width.total_cmp(&b.width))
}

/// Two-atom concurrence in the form `max{0, √p - √2·p}`, `p = |α₁||α₂|`.
///
/// Its maximum is `1/(4√2)` at `p = 1/8`. For the pure state
/// `α₁|eg⟩ + α₂|ge⟩ + c|gg⟩` the standard value is `2|α₁α₂|`, see
/// [`concurrence_pure_state`].
pub fn concurrence(a1: C64, a2: C64) -> f64 {
    let p = a1.norm() * a2.norm();
    (p.sqrt() - SQRT_2 * p).max(0.0)
}

/// Wootters concurrence `2|α₁α₂|` of the single-excitation pure state.
pub fn concurrence_pure_state(a1: C64, a2: C64) -> f64 {
    (2.0 * a1.norm() * a2.norm()).min(1.0)
}

#[derive(Debug, Clone)]
pub struct ConcurrenceTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ConcurrenceTrajectory {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn concurrence_trajectory(trajectory: &AmplitudeTrajectory) -> Result<ConcurrenceTrajectory> {
    if trajectory.n_atoms() != 2 {
        return Err(Error::AtomCount {
            expected: 2,
            actual: trajectory.n_atoms(),
        });
    }
    let values = (0..trajectory.len())
        .map(|i| concurrence(trajectory.amplitude(i, 0), trajectory.amplitude(i, 1)))
        .collect();
    Ok(ConcurrenceTrajectory {
        times: trajectory.times(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    /// Pulse center detuning, units of `Δ`.
    Detuning,
    /// Atom spacing, resonant wavelengths.
    Spacing,
    /// Waveguide coupling `η`.
    Coupling,
    NAtoms,
}

impl ScanAxis {
    pub fn name(self) -> &'static str {
        match self {
            ScanAxis::Detuning => "detuning",
            ScanAxis::Spacing => "spacing",
            ScanAxis::Coupling => "coupling",
            ScanAxis::NAtoms => "n_atoms",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "detuning" => Some(ScanAxis::Detuning),
            "spacing" => Some(ScanAxis::Spacing),
            "coupling" => Some(ScanAxis::Coupling),
            "n_atoms" => Some(ScanAxis::NAtoms),
            _ => None,
        }
    }

    fn apply(self, template: &ScenarioInputs, value: f64) -> Result<ScenarioInputs> {
        let mut inputs = template.clone();
        match self {
            ScanAxis::Detuning => inputs.pulse.center_detuning = value,
            ScanAxis::Spacing => inputs.system.spacing = value,
            ScanAxis::Coupling => inputs.system.gamma_wg = value,
            ScanAxis::NAtoms => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::InvalidParameter {
                        key: "system.n_atoms",
                        reason: format!("{value} is not a positive integer"),
                    });
                }
                inputs.system.n_atoms = value as usize;
            }
        }
        Ok(inputs)
    }
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub value: f64,
    pub outcome: Result<TransportSummary>,
}

/// Runs the stationary pipeline for every axis value; failures are kept in
/// their row and the rows come back in input order.
pub fn parameter_scan(template: &ScenarioInputs, axis: ScanAxis, values: &[f64]) -> Vec<ScanRow> {
    values
        .par_iter()
        .map(|&value| {
            let outcome = axis
                .apply(template, value)
                .and_then(|inputs| inputs.validate())
                .and_then(|scenario| freq_domain::solve(&scenario))
                .map(|spectra| reflect_transmit(&spectra));
            ScanRow { value, outcome }
        })
        .collect()
}

/// FWHM of the reflectivity curve of a scan; failed rows break the curve.
pub fn scan_fwhm(rows: &[ScanRow]) -> Option<f64> {
    let ok: Option<Vec<(f64, f64)>> = rows
        .iter()
        .map(|r| r.outcome.as_ref().ok().map(|s| (r.value, s.reflectivity)))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = ok?.into_iter().unzip();
    fwhm(&x, &y).map(|(lo, hi)| hi - lo)
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, GridSpec, PulseSpec, SystemConfig};

    fn spectra(n: usize, spacing: f64, eta: f64) -> SpectralSolution {
        let system = SystemConfig {
            n_atoms: n,
            spacing,
            gamma_wg: eta,
            ..Default::default()
        };
        let grid = GridSpec {
            points: 1024,
            extent: 8.0,
        };
        let s = validate(&system, &PulseSpec::default(), &grid).unwrap();
        freq_domain::solve(&s).unwrap()
    }

    #[test]
    fn free_propagation() {
        let s = spectra(1, 0.5, 0.0);
        let rt = reflect_transmit(&s);
        assert!(rt.reflectivity.abs() < 1e-15);
        assert!((rt.transmittivity - 1.0).abs() < 1e-10);
        assert!(rt.warnings.is_empty());
    }

    #[test]
    fn quoted_prefactor_overshoots() {
        for &eta in &[0.3, 1.0, 5.0] {
            let (c, _) = one_atom_rt_eta(eta, Prefactor::Corrected);
            let (p, _) = one_atom_rt_eta(eta, Prefactor::Quoted);
            assert!((p / c - PI / 2.0).abs() < 1e-12);
        }
        assert!((one_atom_rt_eta(1e6, Prefactor::Corrected).0 - 1.0).abs() < 1e-3);
        assert!(one_atom_rt_eta(1e-6, Prefactor::Corrected).0 < 1e-5);
        assert!(one_atom_rt_eta(1e6, Prefactor::Quoted).0 > 1.5);
    }

    #[test]
    fn reflectivity_integral_by_quadrature() {
        let eta = 1.7;
        let n = 200_000;
        let h = 20.0 / n as f64;
        let values: Vec<f64> = (0..=n)
            .map(|i| {
                let y = -10.0 + i as f64 * h;
                (-2.0 * y * y).exp() / (1.0 + 4.0 * y * y / (eta * eta))
            })
            .collect();
        let direct = (2.0 / PI).sqrt() * crate::quadrature::trapezoid(&values, h);
        assert!((direct - one_atom_rt_eta(eta, Prefactor::Corrected).0).abs() < 1e-10);
    }

    #[test]
    fn peak_positions() {
        let (p, m) = transmission_peaks(1.0);
        assert!((p - 0.5).abs() < 1e-12 && (m + 0.5).abs() < 1e-12);
        let (p, m) = transmission_peaks(1e6);
        assert!((p - m - SQRT_2).abs() < 1e-3);
        // vanishes like √η
        assert!(transmission_peaks(1e-6).0 < 1e-3);
        assert!(transmission_peaks(1e-10).0 < 1e-5);
    }

    #[test]
    fn gaussian_fwhm_and_features() {
        let s = spectra(1, 0.5, 1.0);
        let features = spectral_features(&s, &FeatureThresholds::default());
        let input_fwhm = features
            .iter()
            .find(|f| f.kind == FeatureKind::Fwhm && f.channel == Channel::Input)
            .unwrap();
        let step = s.grid.step() / s.delta;
        assert!((input_fwhm.width - (2.0 * 2f64.ln()).sqrt()).abs() < step);
        let peaks: Vec<f64> = features
            .iter()
            .filter(|f| f.kind == FeatureKind::Peak && f.channel == Channel::Transmitted)
            .map(|f| f.location)
            .collect();
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0] + 0.5).abs() < step && (peaks[1] - 0.5).abs() < step);
    }

    #[test]
    fn concurrence_values() {
        let z = C64::new(0.0, 0.0);
        assert_eq!(concurrence(z, z), 0.0);
        let a = C64::new((0.125f64).sqrt(), 0.0);
        assert!((concurrence(a, a) - 1.0 / (4.0 * SQRT_2)).abs() < 1e-15);
        assert!((concurrence_pure_state(a, a) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn scan_records_failures_in_order() {
        let template = ScenarioInputs::default();
        let rows = parameter_scan(&template, ScanAxis::NAtoms, &[1.0, 2.5, 3.0]);
        assert_eq!(
            rows.iter().map(|r| r.value).collect::<Vec<_>>(),
            vec![1.0, 2.5, 3.0]
        );
        assert!(rows[0].outcome.is_ok() && rows[1].outcome.is_err() && rows[2].outcome.is_ok());
    }

    #[test]
    fn fwhm_of_triangle() {
        let x = linspace(-2.0, 2.0, 5);
        let y = vec![0.0, 0.5, 1.0, 0.5, 0.0];
        // crossings sit on the samples at ±1 but the search needs values
        // strictly below half
        let (lo, hi) = fwhm(&x, &y).unwrap();
        assert!((hi - lo - 2.0).abs() < 1e-12);
    }
}
