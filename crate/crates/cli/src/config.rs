//! Scenario files: TOML with `[system]`, `[pulse]`, `[grid]`, `[solver]` and
//! `[output]` sections whose keys mirror the library field names. Unknown
//! keys are rejected. Lengths are in resonant wavelengths, times in
//! wavelengths over the group velocity.

use std::path::Path;

use serde::Deserialize;
use wgqed_core::{
    GridSpec, Interpolation, PulseShape, PulseSpec, Retardation, ScenarioInputs, SystemConfig,
    GROUP_VELOCITY, RESONANT_WAVEVECTOR,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    system: SystemSection,
    pulse: Option<PulseSection>,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    n_atoms: Option<usize>,
    spacing: Option<f64>,
    gamma_wg: Option<f64>,
    gamma_free: Option<f64>,
    first_position: Option<f64>,
    // fixed by the unit convention; accepted only at their fixed values
    group_velocity: Option<f64>,
    k_a: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PulseSection {
    shape: Option<ShapeKey>,
    width: Option<f64>,
    center_detuning: Option<f64>,
    initial_offset: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ShapeKey {
    Gaussian,
    Inversion,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    points: Option<usize>,
    extent: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    step: Option<f64>,
    horizon: Option<f64>,
    interpolation: Option<InterpolationKey>,
    retardation: Option<RetardationKey>,
    regularize: Option<bool>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum InterpolationKey {
    Linear,
    Cubic,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RetardationKey {
    Full,
    Markovian,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    pulse_time: Option<f64>,
    incoming_time: Option<f64>,
    x_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverOptions {
    pub step: Option<f64>,
    pub horizon: Option<f64>,
    pub interpolation: Interpolation,
    pub retardation: Retardation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputOptions {
    /// Time of the outgoing pulse shapes; none skips pulseshape.csv.
    pub pulse_time: Option<f64>,
    /// Time of the incoming pulse shape, defaults to `pulse_time`.
    pub incoming_time: Option<f64>,
    pub x_points: usize,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            pulse_time: None,
            incoming_time: None,
            x_points: 2001,
        }
    }
}

/// Everything a command needs besides the output directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub inputs: ScenarioInputs,
    pub solver: SolverOptions,
    pub output: OutputOptions,
    /// Whether the point count was chosen explicitly; otherwise it grows to
    /// resolve the narrowest resonance.
    pub fixed_points: bool,
}

/// Command-line grid overrides, applied after the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct GridOverride {
    pub points: Option<usize>,
    pub extent: Option<f64>,
}

impl RunConfig {
    pub fn from_inputs(inputs: ScenarioInputs) -> Self {
        Self {
            inputs,
            ..Default::default()
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let file: ScenarioFile = toml::from_str(text)
            .map_err(|e| CliError::Usage(format!("invalid scenario file: {e}")))?;
        let Some(pulse) = file.pulse else {
            return Err(CliError::Usage("pulse.width required".into()));
        };
        let Some(width) = pulse.width else {
            return Err(CliError::Usage("pulse.width required".into()));
        };
        check_fixed(
            "system.group_velocity",
            file.system.group_velocity,
            GROUP_VELOCITY,
        )?;
        check_fixed("system.k_a", file.system.k_a, RESONANT_WAVEVECTOR)?;

        let system_default = SystemConfig::default();
        let pulse_default = PulseSpec::default();
        let grid_default = GridSpec::default();
        let system = SystemConfig {
            n_atoms: file.system.n_atoms.unwrap_or(system_default.n_atoms),
            spacing: file.system.spacing.unwrap_or(system_default.spacing),
            gamma_wg: file.system.gamma_wg.unwrap_or(system_default.gamma_wg),
            gamma_free: file.system.gamma_free.unwrap_or(system_default.gamma_free),
            first_position: file
                .system
                .first_position
                .unwrap_or(system_default.first_position),
        };
        let pulse = PulseSpec {
            shape: match pulse.shape {
                None | Some(ShapeKey::Gaussian) => PulseShape::Gaussian,
                Some(ShapeKey::Inversion) => PulseShape::Inversion,
            },
            width,
            center_detuning: pulse
                .center_detuning
                .unwrap_or(pulse_default.center_detuning),
            initial_offset: pulse.initial_offset.unwrap_or(pulse_default.initial_offset),
        };
        let grid = GridSpec {
            points: file.grid.points.unwrap_or(grid_default.points),
            extent: file.grid.extent.unwrap_or(grid_default.extent),
        };
        let solver = SolverOptions {
            step: file.solver.step,
            horizon: file.solver.horizon,
            interpolation: match file.solver.interpolation {
                Some(InterpolationKey::Linear) => Interpolation::Linear,
                Some(InterpolationKey::Cubic) | None => Interpolation::Cubic,
            },
            retardation: match file.solver.retardation {
                Some(RetardationKey::Markovian) => Retardation::Markovian,
                Some(RetardationKey::Full) | None => Retardation::Full,
            },
        };
        let output = OutputOptions {
            pulse_time: file.output.pulse_time,
            incoming_time: file.output.incoming_time,
            x_points: file
                .output
                .x_points
                .unwrap_or(OutputOptions::default().x_points),
        };
        if output.x_points < 2 {
            return Err(CliError::Usage("output.x_points must be at least 2".into()));
        }
        Ok(Self {
            inputs: ScenarioInputs {
                system,
                pulse,
                grid,
                regularize: file.solver.regularize.unwrap_or(false),
            },
            solver,
            output,
            fixed_points: file.grid.points.is_some(),
        })
    }

    pub fn apply(&mut self, grid: GridOverride) {
        if let Some(points) = grid.points {
            self.inputs.grid.points = points;
            self.fixed_points = true;
        }
        if let Some(extent) = grid.extent {
            self.inputs.grid.extent = extent;
        }
    }
}

fn check_fixed(key: &str, value: Option<f64>, fixed: f64) -> CliResult<()> {
    match value {
        Some(v) if (v - fixed).abs() > 1e-12 * fixed => Err(CliError::Usage(format!(
            "{key} is fixed to {fixed} by the unit convention, got {v}"
        ))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let cfg = RunConfig::parse("[pulse]\nwidth = 0.01\n").unwrap();
        assert_eq!(cfg.inputs.system, SystemConfig::default());
        assert_eq!(cfg.inputs.pulse, PulseSpec::default());
        assert!(!cfg.fixed_points);
        assert_eq!(cfg.output.pulse_time, None);
    }

    #[test]
    fn full_file_round_trips() {
        let text = r#"
[system]
n_atoms = 2
spacing = 0.25
gamma_wg = 2.0
gamma_free = 0.2
first_position = 1.0
group_velocity = 1.0

[pulse]
shape = "inversion"
width = 0.02
center_detuning = 0.5
initial_offset = 12.0

[grid]
points = 2048
extent = 6.0

[solver]
step = 0.1
horizon = 500.0
interpolation = "linear"
retardation = "markovian"
regularize = true

[output]
pulse_time = 2000.0
x_points = 11
"#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.inputs.system.n_atoms, 2);
        assert_eq!(cfg.inputs.system.gamma_free, 0.2);
        assert_eq!(cfg.inputs.pulse.shape, PulseShape::Inversion);
        assert_eq!(cfg.inputs.grid.points, 2048);
        assert!(cfg.inputs.regularize);
        assert!(cfg.fixed_points);
        assert_eq!(cfg.solver.interpolation, Interpolation::Linear);
        assert_eq!(cfg.solver.retardation, Retardation::Markovian);
        assert_eq!(cfg.output.x_points, 11);
    }

    #[test]
    fn missing_pulse_names_the_key() {
        let err = RunConfig::parse("[system]\nn_atoms = 2\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("pulse.width required"));
        let err = RunConfig::parse("[pulse]\nshape = \"gaussian\"\n").unwrap_err();
        assert!(err.to_string().contains("pulse.width required"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("[pulse]\nwidth = 0.01\nwidht = 0.02\n").unwrap_err();
        assert!(err.to_string().contains("widht"));
        assert!(RunConfig::parse("[pulse]\nwidth = 0.01\n[extra]\n").is_err());
        assert!(RunConfig::parse("[pulse]\nwidth = 0.01\nshape = \"square\"\n").is_err());
    }

    #[test]
    fn fixed_constants_must_match() {
        assert!(
            RunConfig::parse("[system]\nk_a = 6.283185307179586\n[pulse]\nwidth = 0.01\n").is_ok()
        );
        let err = RunConfig::parse("[system]\ngroup_velocity = 2.0\n[pulse]\nwidth = 0.01\n")
            .unwrap_err();
        assert!(err.to_string().contains("system.group_velocity"));
    }

    #[test]
    fn override_fixes_the_point_count() {
        let mut cfg = RunConfig::parse("[pulse]\nwidth = 0.01\n").unwrap();
        cfg.apply(GridOverride {
            points: Some(1024),
            extent: Some(5.0),
        });
        assert!(cfg.fixed_points);
        assert_eq!(
            cfg.inputs.grid,
            GridSpec {
                points: 1024,
                extent: 5.0
            }
        );
    }
}
