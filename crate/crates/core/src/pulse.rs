//! Input photon spectra and the drive terms `b_j(t)` they exert on the atoms.
//!
//! The photon enters from the left in right-moving modes only, so every
//! spectral amplitude is a function of `δk = k - k_a` with `k > 0`. A pulse
//! whose center sits at `x_c` at `t = 0` carries the displacement phase
//! `e^{-iδk·x_c}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{KGrid, PulseShape, PulseSpec, Scenario, GROUP_VELOCITY, RESONANT_WAVEVECTOR};
use crate::C64;

/// Minimum number of grid steps across the Lorentzian half-width.
const LORENTZIAN_MIN_SAMPLES: usize = 4;

/// Boundary density (relative to the peak) above which the drive quadrature
/// is considered unconverged.
const QUADRATURE_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    /// `(8π)^{1/4}/√(2πΔ)·exp(-(δk-δ₀)²/Δ²)`
    Gaussian { width: f64 },
    /// `√(κ/π)/(κ + i(δk-δ₀))` with half-width `κ = Γ/2v_g`
    Lorentzian { half_width: f64 },
}

/// Square-normalized input spectrum `φ(δk)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAmplitude {
    profile: Profile,
    center: f64,
    origin: f64,
}

impl SpectralAmplitude {
    /// Spectrum without the displacement phase.
    pub fn envelope(&self, delta_k: f64) -> C64 {
        let u = delta_k - self.center;
        match self.profile {
            Profile::Gaussian { width } => {
                let norm = (8.0 * PI).powf(0.25) / (2.0 * PI * width).sqrt();
                C64::new(norm * (-(u * u) / (width * width)).exp(), 0.0)
            }
            Profile::Lorentzian { half_width } => {
                (half_width / PI).sqrt() / C64::new(half_width, u)
            }
        }
    }

    /// `φ(δk)` including the phase that places the pulse center at
    /// [`origin`](Self::origin) at `t = 0`.
    pub fn value(&self, delta_k: f64) -> C64 {
        self.envelope(delta_k) * C64::from_polar(1.0, -delta_k * self.origin)
    }

    pub fn density(&self, delta_k: f64) -> f64 {
        self.envelope(delta_k).norm_sqr()
    }

    /// Center detuning `δ₀` in absolute units.
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Position of the pulse center (or trailing edge, for the inversion
    /// pulse) at `t = 0`.
    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    /// Full width at half maximum of `|φ|²`.
    pub fn bandwidth(&self) -> f64 {
        match self.profile {
            Profile::Gaussian { width } => (2.0 * 2f64.ln()).sqrt() * width,
            Profile::Lorentzian { half_width } => 2.0 * half_width,
        }
    }

    pub fn shape(&self) -> PulseShape {
        match self.profile {
            Profile::Gaussian { .. } => PulseShape::Gaussian,
            Profile::Lorentzian { .. } => PulseShape::Inversion,
        }
    }

    /// Field amplitude `∫φ(δk) e^{iδk·y} dδk` of the pulse shape at
    /// displacement `y` from its center, in closed form.
    fn displaced_field(&self, y: f64) -> C64 {
        let carrier = C64::from_polar(1.0, self.center * y);
        match self.profile {
            Profile::Gaussian { width } => {
                let norm = (8.0 * PI).powf(0.25) / (2.0 * PI * width).sqrt();
                carrier * (norm * width * PI.sqrt() * (-0.25 * width * width * y * y).exp())
            }
            Profile::Lorentzian { half_width } => {
                // the pulse lies ahead of its trailing edge
                if y < 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    carrier * (2.0 * PI * (half_width / PI).sqrt() * (-half_width * y).exp())
                }
            }
        }
    }
}

/// Gaussian spectrum centered at `δ₀ = (k_0 - k_a)`, pulse center at
/// `-d_0` relative to the origin.
pub fn gaussian_spectrum(pulse: &PulseSpec) -> Result<SpectralAmplitude> {
    if pulse.shape != PulseShape::Gaussian {
        return Err(Error::PulseShapeMismatch {
            expected: "gaussian",
        });
    }
    if !(pulse.width.is_finite() && pulse.width > 0.0) {
        return Err(Error::DegeneratePulseWidth(pulse.width));
    }
    Ok(SpectralAmplitude {
        profile: Profile::Gaussian { width: pulse.width },
        center: pulse.center_detuning * pulse.width,
        origin: -pulse.initial_offset / pulse.width,
    })
}

/// Lorentzian spectrum of half-width `Γ/2v_g` whose time profile at the atom
/// is a rising exponential `e^{Γt/2}` truncated at the arrival time.
pub fn inversion_spectrum(
    pulse: &PulseSpec,
    gamma: f64,
    grid: &KGrid,
) -> Result<SpectralAmplitude> {
    if pulse.shape != PulseShape::Inversion {
        return Err(Error::PulseShapeMismatch {
            expected: "inversion",
        });
    }
    if !(pulse.width.is_finite() && pulse.width > 0.0) {
        return Err(Error::DegeneratePulseWidth(pulse.width));
    }
    let half_width = 0.5 * gamma / GROUP_VELOCITY;
    if !(half_width >= LORENTZIAN_MIN_SAMPLES as f64 * grid.step()) {
        return Err(Error::UnresolvedSpectrum {
            linewidth: half_width,
            step: grid.step(),
            min_samples: LORENTZIAN_MIN_SAMPLES,
        });
    }
    Ok(SpectralAmplitude {
        profile: Profile::Lorentzian { half_width },
        center: pulse.center_detuning * pulse.width,
        origin: -pulse.initial_offset / pulse.width,
    })
}

/// Prefactor `√(Γ v_g / 4π)` linking atomic amplitudes to `φ`.
pub fn emission_factor(gamma: f64) -> f64 {
    (gamma * GROUP_VELOCITY / (4.0 * PI)).sqrt()
}

/// `b_j(t) = -i√(Γv_g/4π) ∫ φ(δk) e^{i(k_a+δk) r_j - iδk v_g t} dδk`, in
/// closed form.
pub fn drive_term(scenario: &Scenario, j: usize, t: f64) -> C64 {
    let r = scenario.positions()[j];
    let spectrum = scenario.spectrum();
    let y = r - spectrum.origin() - GROUP_VELOCITY * t;
    let phase = C64::from_polar(1.0, RESONANT_WAVEVECTOR * r);
    C64::new(0.0, -emission_factor(scenario.gamma())) * phase * spectrum.displaced_field(y)
}

/// The same drive evaluated by trapezoid quadrature over the scenario's
/// k-grid.
pub fn drive_term_quadrature(scenario: &Scenario, j: usize, t: f64) -> Result<C64> {
    let grid = scenario.grid();
    let spectrum = scenario.spectrum();
    let peak = spectrum.density(spectrum.center());
    let samples = grid.samples();
    let edge = spectrum
        .density(samples[0])
        .max(spectrum.density(samples[samples.len() - 1]));
    if edge > QUADRATURE_TAIL * peak {
        return Err(Error::QuadratureNonConvergence {
            boundary_ratio: edge / peak,
        });
    }
    let r = scenario.positions()[j];
    let values: Vec<C64> = samples
        .iter()
        .map(|&dk| {
            spectrum.value(dk)
                * C64::from_polar(
                    1.0,
                    (RESONANT_WAVEVECTOR + dk) * r - dk * GROUP_VELOCITY * t,
                )
        })
        .collect();
    let integral = crate::quadrature::trapezoid_complex(&values, grid.step());
    Ok(C64::new(0.0, -emission_factor(scenario.gamma())) * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, GridSpec, SystemConfig};

    fn scenario(eta: f64, n: usize) -> Scenario {
        let system = SystemConfig {
            n_atoms: n,
            gamma_wg: eta,
            spacing: 0.25,
            ..Default::default()
        };
        validate(&system, &PulseSpec::default(), &GridSpec::default()).unwrap()
    }

    #[test]
    fn gaussian_is_normalized() {
        let s = scenario(1.0, 1);
        let grid = s.grid();
        let density: Vec<f64> = grid
            .samples()
            .iter()
            .map(|&k| s.spectrum().density(k))
            .collect();
        assert!((grid.integrate(&density) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_falls_by_e_at_one_width() {
        let p = PulseSpec {
            center_detuning: 0.7,
            ..Default::default()
        };
        let spec = gaussian_spectrum(&p).unwrap();
        let d0 = spec.center();
        let ratio = spec.envelope(d0 + p.width).re / spec.envelope(d0).re;
        assert!((ratio - (-1f64).exp()).abs() < 1e-14);
        assert!(spec.envelope(d0).im == 0.0 && spec.envelope(d0).re > 0.0);
    }

    #[test]
    fn gaussian_density_fwhm() {
        let p = PulseSpec::default();
        let spec = gaussian_spectrum(&p).unwrap();
        let half = 0.5 * spec.density(0.0);
        let x = 0.5 * spec.bandwidth();
        assert!((spec.density(x) - half).abs() < 1e-12 * half);
        assert!((spec.bandwidth() - (2.0 * 2f64.ln()).sqrt() * p.width).abs() < 1e-15);
    }

    #[test]
    fn inversion_rejects_unresolved_linewidth() {
        let p = PulseSpec {
            shape: PulseShape::Inversion,
            ..Default::default()
        };
        let grid = KGrid::new(0.0, 8.0 * p.width, 4096).unwrap();
        assert!(inversion_spectrum(&p, 1e-3 * p.width, &grid).is_err());
        assert!(inversion_spectrum(&p, p.width, &grid).is_ok());
    }

    #[test]
    fn inversion_is_normalized() {
        // substitute δk = κ tan θ: the density becomes dθ/π on (-π/2, π/2)
        let p = PulseSpec {
            shape: PulseShape::Inversion,
            ..Default::default()
        };
        let grid = KGrid::new(0.0, 8.0 * p.width, 4096).unwrap();
        let spec = inversion_spectrum(&p, p.width, &grid).unwrap();
        let kappa = 0.5 * p.width;
        let n = 20_000;
        let h = PI / n as f64;
        let total: f64 = (0..n)
            .map(|i| {
                let theta = -0.5 * PI + (i as f64 + 0.5) * h;
                let jac = kappa / theta.cos().powi(2);
                spec.density(kappa * theta.tan()) * jac * h
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_drive_matches_quadrature() {
        let s = scenario(1.0, 2);
        let arrival = s.arrival_time(0);
        for j in 0..2 {
            for &dt in &[-300.0, -80.0, 0.0, 45.0, 150.0] {
                let t = arrival + dt;
                let exact = drive_term(&s, j, t);
                let quad = drive_term_quadrature(&s, j, t).unwrap();
                let scale = drive_term(&s, j, s.arrival_time(j)).norm();
                assert!((exact - quad).norm() <= 1e-8 * scale, "j={j} t={t}");
            }
        }
    }

    #[test]
    fn zero_coupling_has_no_drive() {
        let s = scenario(0.0, 1);
        for i in 0..100 {
            assert_eq!(drive_term(&s, 0, i as f64 * 20.0).norm(), 0.0);
        }
    }

    #[test]
    fn drive_peaks_on_arrival_with_gaussian_envelope() {
        let s = scenario(1.0, 1);
        let h = 1.0 / (50.0 * s.delta());
        let samples: Vec<(f64, f64)> = (0..2000)
            .map(|i| {
                let t = i as f64 * h;
                (t, drive_term(&s, 0, t).norm_sqr())
            })
            .collect();
        let (t_max, peak) =
            samples
                .iter()
                .copied()
                .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let d0 = s.initial_offset();
        assert!((t_max - d0 / GROUP_VELOCITY).abs() <= h);
        // |b|² has temporal FWHM 2√(2 ln 2)/(Δ v_g)
        let half_width = (2.0 * 2f64.ln()).sqrt() / (s.delta() * GROUP_VELOCITY);
        let at_half = drive_term(&s, 0, t_max + half_width).norm_sqr();
        assert!((at_half / peak - 0.5).abs() < 1e-9);
    }

    #[test]
    fn inversion_drive_needs_wider_grid() {
        let system = SystemConfig::default();
        let pulse = PulseSpec {
            shape: PulseShape::Inversion,
            ..Default::default()
        };
        let s = validate(&system, &pulse, &GridSpec::default()).unwrap();
        assert!(matches!(
            drive_term_quadrature(&s, 0, 10.0),
            Err(Error::QuadratureNonConvergence { .. })
        ));
    }
}
