//! Bundled scenarios for the figure set. All presets share
//! `Δ = 0.01`, a pulse starting `10/Δ` before the first atom at `x = 0`, and
//! `Γ = Δ` unless the figure varies it. Outputs are `figure_<id>.csv`, plus
//! `figure_<id>_summary.csv` for spectra.

use std::path::{Path, PathBuf};

use wgqed_core::observables::{self, Prefactor, ScanAxis};
use wgqed_core::{freq_domain, time_domain, DdeSettings, PulseShape, ScenarioInputs, SystemConfig};

use crate::commands::{self, dde_settings, prepare, scan_rows};
use crate::config::{GridOverride, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{label, Cell, Table};

pub const FIGURE_IDS: &[&str] = &[
    "2a", "2b", "2c", "2d", "2e", "2f", "3a", "3b", "3c", "3d", "3e", "3f", "3g", "3h", "3i", "4a",
    "4b", "4c", "5", "6a", "6b", "6c", "6d", "6e", "6f", "6g", "6h", "6i", "7a", "7b", "8a", "8b",
    "8c",
];

#[derive(Debug, Clone)]
enum Preset {
    /// Gaussian and inversion pulses on one atom.
    PulseComparison,
    Dynamics(ScenarioInputs),
    Spectrum(ScenarioInputs),
    /// Incoming shape at `incoming`, outgoing at `outgoing`, both in `1/Γ`.
    PulseShape {
        inputs: ScenarioInputs,
        incoming: f64,
        outgoing: f64,
    },
    CouplingTable,
    Scan {
        axis: ScanAxis,
        values: Vec<f64>,
        series: Vec<(String, ScenarioInputs)>,
    },
    Concurrence(Vec<(String, ScenarioInputs)>),
}

fn chain(n_atoms: usize, spacing: f64) -> ScenarioInputs {
    ScenarioInputs {
        system: SystemConfig {
            n_atoms,
            spacing,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn with_eta(mut inputs: ScenarioInputs, eta: f64) -> ScenarioInputs {
    inputs.system.gamma_wg = eta;
    inputs
}

fn with_loss(mut inputs: ScenarioInputs, gamma_free: f64) -> ScenarioInputs {
    inputs.system.gamma_free = gamma_free;
    inputs
}

fn spacing_series(n_atoms: usize, spacings: &[f64]) -> Vec<(String, ScenarioInputs)> {
    spacings
        .iter()
        .map(|&a| (format!("a_{}", label(a)), chain(n_atoms, a)))
        .collect()
}

fn preset(id: &str) -> Option<Preset> {
    use Preset::*;
    let shape = |n, a, outgoing| PulseShape {
        inputs: chain(n, a),
        incoming: 6.0,
        outgoing,
    };
    let detuning = observables::linspace(-4.0, 4.0, 161);
    let all_spacings = [0.5, 0.25, 0.125, 0.375];
    Some(match id {
        "2a" => PulseComparison,
        "2b" => Spectrum(chain(1, 0.5)),
        "2c" => shape(1, 0.5, 20.0),
        "2d" => CouplingTable,
        "2e" => {
            let mut inputs = chain(1, 0.5);
            inputs.pulse.center_detuning = 0.5;
            Spectrum(inputs)
        }
        "2f" => Scan {
            axis: ScanAxis::Detuning,
            values: detuning,
            series: vec![(String::new(), chain(1, 0.5))],
        },
        "3a" => Dynamics(chain(2, 0.5)),
        "3b" => shape(2, 0.5, 20.0),
        "3c" => Spectrum(chain(2, 0.5)),
        "3d" => Dynamics(chain(2, 0.25)),
        "3e" => shape(2, 0.25, 20.0),
        "3f" => Spectrum(chain(2, 0.25)),
        "3g" => Dynamics(chain(2, 0.125)),
        "3h" => Spectrum(chain(2, 0.125)),
        "3i" => Spectrum(chain(2, 0.375)),
        "4a" => Scan {
            axis: ScanAxis::Spacing,
            values: observables::linspace(0.05, 1.0, 96),
            series: [0.5, 1.0, 2.0]
                .iter()
                .map(|&eta| (format!("eta_{}", label(eta)), with_eta(chain(2, 0.5), eta)))
                .collect(),
        },
        "4b" => Scan {
            axis: ScanAxis::Detuning,
            values: detuning,
            series: spacing_series(2, &all_spacings),
        },
        "4c" => Scan {
            axis: ScanAxis::Coupling,
            values: observables::linspace(0.1, 5.0, 50),
            series: spacing_series(2, &all_spacings[..3]),
        },
        "5" => Concurrence(spacing_series(2, &all_spacings[..3])),
        "6a" => Dynamics(chain(5, 0.5)),
        "6b" => shape(5, 0.5, 30.0),
        "6c" => Spectrum(chain(5, 0.5)),
        "6d" => Dynamics(chain(5, 0.25)),
        "6e" => shape(5, 0.25, 30.0),
        "6f" => Spectrum(chain(5, 0.25)),
        "6g" => Dynamics(chain(5, 0.125)),
        "6h" => shape(5, 0.125, 30.0),
        "6i" => Spectrum(chain(5, 0.125)),
        "7a" => Scan {
            axis: ScanAxis::Detuning,
            values: detuning,
            series: spacing_series(5, &all_spacings),
        },
        "7b" => Scan {
            axis: ScanAxis::NAtoms,
            values: (1..=10).map(f64::from).collect(),
            series: spacing_series(1, &all_spacings[..2]),
        },
        "8a" => Spectrum(with_loss(chain(2, 0.25), 0.2)),
        "8b" => Spectrum(with_loss(chain(2, 0.25), 1.0)),
        "8c" => Spectrum(with_loss(chain(5, 0.25), 1.0)),
        _ => return None,
    })
}

pub fn is_known(id: &str) -> bool {
    FIGURE_IDS.contains(&id)
}

/// Runs figure `id` and writes its tables into `out`.
pub fn run(id: &str, grid: GridOverride, out: &Path, hash: &str) -> CliResult<Vec<PathBuf>> {
    let preset = preset(id).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown figure `{id}`; known: {}",
            FIGURE_IDS.join(", ")
        ))
    })?;
    let config = |inputs: &ScenarioInputs| {
        let mut cfg = RunConfig::from_inputs(inputs.clone());
        cfg.apply(grid);
        cfg
    };
    let main = format!("figure_{id}.csv");
    let mut written = Vec::new();
    match preset {
        Preset::PulseComparison => {
            let gaussian = config(&chain(1, 0.5));
            let mut inversion = gaussian.clone();
            inversion.inputs.pulse.shape = PulseShape::Inversion;
            let table = excitation_table(&[
                ("gaussian".into(), gaussian),
                ("inversion".into(), inversion),
            ])?;
            written.push(table.write(out, &main, hash)?);
        }
        Preset::Dynamics(inputs) => {
            let cfg = config(&inputs);
            let scenario = cfg.inputs.validate()?;
            let traj = time_domain::integrate_dde(&scenario, &dde_settings(&cfg, &scenario))?;
            written.push(commands::trajectory_table(&traj).write(out, &main, hash)?);
        }
        Preset::Spectrum(inputs) => {
            let scenario = prepare(&config(&inputs))?;
            let spectra = freq_domain::solve(&scenario)?;
            let summary = observables::reflect_transmit(&spectra);
            for w in &summary.warnings {
                log::warn!("{w}");
            }
            written.push(commands::spectrum_table(&spectra).write(out, &main, hash)?);
            let table = commands::summary_table(&summary, scenario.delta());
            written.push(table.write(out, &format!("figure_{id}_summary.csv"), hash)?);
        }
        Preset::PulseShape {
            inputs,
            incoming,
            outgoing,
        } => {
            let cfg = config(&inputs);
            let scenario = prepare(&cfg)?;
            let spectra = freq_domain::solve(&scenario)?;
            let table = commands::pulse_table(
                &scenario,
                &spectra,
                incoming / scenario.gamma(),
                outgoing / scenario.gamma(),
                cfg.output.x_points,
            );
            written.push(table.write(out, &main, hash)?);
        }
        Preset::CouplingTable => {
            let base = config(&chain(1, 0.5));
            written.push(coupling_table(&base)?.write(out, &main, hash)?);
        }
        Preset::Scan {
            axis,
            values,
            series,
        } => {
            let mut columns = vec![axis.name().to_string()];
            let mut results = Vec::new();
            for (name, inputs) in &series {
                let suffix = if name.is_empty() {
                    String::new()
                } else {
                    format!("_{name}")
                };
                columns.push(format!("reflectivity{suffix}"));
                columns.push(format!("transmittivity{suffix}"));
                results.push(scan_rows(&config(inputs).inputs, axis, &values)?);
            }
            let mut table = Table::new(columns);
            for (i, &v) in values.iter().enumerate() {
                let mut row = vec![Cell::Num(v)];
                for rows in &results {
                    row.push(rows[i].1.reflectivity.into());
                    row.push(rows[i].1.transmittivity.into());
                }
                table.push(row);
            }
            written.push(table.write(out, &main, hash)?);
        }
        Preset::Concurrence(series) => {
            let runs: Vec<(String, RunConfig)> =
                series.iter().map(|(n, i)| (n.clone(), config(i))).collect();
            written.push(concurrence_series(&runs)?.write(out, &main, hash)?);
        }
    }
    Ok(written)
}

/// Step and horizon that suit every run, so the series share a time axis.
fn shared_settings(
    runs: &[(String, RunConfig)],
) -> CliResult<Vec<(wgqed_core::Scenario, DdeSettings)>> {
    let mut prepared = Vec::new();
    for (_, cfg) in runs {
        let scenario = cfg.inputs.validate()?;
        let settings = dde_settings(cfg, &scenario);
        prepared.push((scenario, settings));
    }
    let step = prepared
        .iter()
        .map(|p| p.1.step)
        .fold(f64::INFINITY, f64::min);
    let horizon = prepared.iter().map(|p| p.1.horizon).fold(0.0, f64::max);
    Ok(prepared
        .into_iter()
        .map(|(s, d)| (s, d.with_step(step).with_horizon(horizon)))
        .collect())
}

fn excitation_table(runs: &[(String, RunConfig)]) -> CliResult<Table> {
    let mut columns = vec!["t".to_string()];
    let mut trajectories = Vec::new();
    for ((name, _), (scenario, settings)) in runs.iter().zip(shared_settings(runs)?) {
        columns.push(format!("excitation_{name}"));
        trajectories.push(time_domain::integrate_dde(&scenario, &settings)?);
    }
    let mut table = Table::new(columns);
    for i in 0..trajectories[0].len() {
        let mut row = vec![Cell::Num(trajectories[0].time(i))];
        row.extend(
            trajectories
                .iter()
                .map(|t| Cell::Num(t.total_excitation(i))),
        );
        table.push(row);
    }
    Ok(table)
}

fn concurrence_series(runs: &[(String, RunConfig)]) -> CliResult<Table> {
    let mut columns = vec!["t".to_string()];
    let mut curves = Vec::new();
    for ((name, _), (scenario, settings)) in runs.iter().zip(shared_settings(runs)?) {
        columns.push(format!("concurrence_{name}"));
        let traj = time_domain::integrate_dde(&scenario, &settings)?;
        curves.push(observables::concurrence_trajectory(&traj)?);
    }
    let mut table = Table::new(columns);
    for i in 0..curves[0].times.len() {
        let mut row = vec![Cell::Num(curves[0].times[i])];
        row.extend(curves.iter().map(|c| Cell::Num(c.values[i])));
        table.push(row);
    }
    Ok(table)
}

/// One-atom reflectivity and reflected-spectrum width against `η`; the width
/// is relative to the input spectral FWHM.
fn coupling_table(base: &RunConfig) -> CliResult<Table> {
    let mut table = Table::new([
        "eta",
        "reflectivity",
        "transmittivity",
        "reflected_fwhm_ratio",
        "reflectivity_closed_form",
    ]);
    for eta in observables::linspace(0.1, 5.0, 50) {
        let mut cfg = base.clone();
        cfg.inputs.system.gamma_wg = eta;
        let scenario = prepare(&cfg)?;
        let spectra = freq_domain::solve(&scenario)?;
        let summary = observables::reflect_transmit(&spectra);
        let x: Vec<f64> = spectra
            .grid
            .samples()
            .iter()
            .map(|k| k / spectra.delta)
            .collect();
        let width = |y: &[f64]| observables::fwhm(&x, y).map(|(lo, hi)| hi - lo);
        let ratio = match (
            width(&spectra.reflected_density()),
            width(&spectra.input_density()),
        ) {
            (Some(r), Some(i)) => Some(r / i),
            _ => None,
        };
        table.push(vec![
            eta.into(),
            summary.reflectivity.into(),
            summary.transmittivity.into(),
            ratio.into(),
            observables::one_atom_rt_eta(eta, Prefactor::Corrected)
                .0
                .into(),
        ]);
    }
    Ok(table)
}
