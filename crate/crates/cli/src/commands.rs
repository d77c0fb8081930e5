use std::path::{Path, PathBuf};

use log::warn;
use wgqed_core::observables::{self, ScanAxis};
use wgqed_core::{
    freq_domain, time_domain, AmplitudeTrajectory, DdeSettings, GridSpec, Scenario, ScenarioInputs,
    SpectralSolution, TransportSummary, GROUP_VELOCITY,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

/// Grid steps across the narrowest driven resonance when the point count is
/// left to the tool.
const RESOLVE_PER_WIDTH: f64 = 4.0;

/// Validated scenario, with the k-grid refined unless its size was fixed.
pub fn prepare(cfg: &RunConfig) -> CliResult<Scenario> {
    let scenario = cfg.inputs.validate()?;
    let needed = freq_domain::resolving_points(&scenario, RESOLVE_PER_WIDTH);
    if needed <= scenario.grid().len() {
        return Ok(scenario);
    }
    if cfg.fixed_points {
        warn!(
            "grid.points = {} leaves the narrowest resonance unresolved; {needed} would resolve it",
            scenario.grid().len()
        );
        return Ok(scenario);
    }
    let grid = GridSpec {
        points: needed,
        ..cfg.inputs.grid
    };
    Ok(scenario.with_grid(&grid)?)
}

pub fn dde_settings(cfg: &RunConfig, scenario: &Scenario) -> DdeSettings {
    let mut settings = DdeSettings::for_scenario(scenario)
        .with_interpolation(cfg.solver.interpolation)
        .with_retardation(cfg.solver.retardation);
    if let Some(step) = cfg.solver.step {
        settings = settings.with_step(step);
    }
    if let Some(horizon) = cfg.solver.horizon {
        settings = settings.with_horizon(horizon);
    }
    settings
}

pub fn trajectory_table(traj: &AmplitudeTrajectory) -> Table {
    let mut columns = vec!["t".to_string()];
    for j in 1..=traj.n_atoms() {
        columns.push(format!("alpha_{j}_abs2"));
        columns.push(format!("alpha_{j}_re"));
        columns.push(format!("alpha_{j}_im"));
    }
    let mut table = Table::new(columns);
    for i in 0..traj.len() {
        let mut row = vec![Cell::Num(traj.time(i))];
        for a in traj.amplitudes_at(i) {
            row.extend([a.norm_sqr().into(), a.re.into(), a.im.into()]);
        }
        table.push(row);
    }
    table
}

pub fn concurrence_table(traj: &AmplitudeTrajectory) -> CliResult<Table> {
    let c = observables::concurrence_trajectory(traj)?;
    let mut table = Table::new(["t", "concurrence"]);
    for (t, v) in c.times.iter().zip(&c.values) {
        table.push(vec![(*t).into(), (*v).into()]);
    }
    Ok(table)
}

/// Densities are scaled by `Δ` so they integrate to probabilities over
/// `dk_over_delta`.
pub fn spectrum_table(spectra: &SpectralSolution) -> Table {
    let delta = spectra.delta;
    let mut table = Table::new([
        "dk_over_delta",
        "input_density",
        "reflected_density",
        "transmitted_density",
    ]);
    for (i, &dk) in spectra.grid.samples().iter().enumerate() {
        table.push(vec![
            (dk / delta).into(),
            (spectra.input[i].norm_sqr() * delta).into(),
            (spectra.beta_l[i].norm_sqr() * delta).into(),
            (spectra.beta_r[i].norm_sqr() * delta).into(),
        ]);
    }
    table
}

/// Totals first, then one row per spectral feature. Feature positions are
/// in units of `Δ`; densities carry the same scaling as the spectrum table.
pub fn summary_table(summary: &TransportSummary, delta: f64) -> Table {
    let mut table = Table::new([
        "quantity",
        "channel",
        "location_over_delta",
        "lower_over_delta",
        "upper_over_delta",
        "width_over_delta",
        "value",
    ]);
    for (name, value) in [
        ("reflectivity", summary.reflectivity),
        ("transmittivity", summary.transmittivity),
        ("guided_fraction", summary.guided_fraction),
    ] {
        let mut row = vec![Cell::from(name)];
        row.extend(std::iter::repeat_n(Cell::Empty, 5));
        row.push(value.into());
        table.push(row);
    }
    for f in &summary.features {
        let value = if f.threshold.is_some() {
            f.value
        } else {
            f.value * delta
        };
        table.push(vec![
            f.kind.name().into(),
            f.channel.name().into(),
            f.location.into(),
            f.bounds.map(|b| b.0).into(),
            f.bounds.map(|b| b.1).into(),
            f.width.into(),
            value.into(),
        ]);
    }
    table
}

/// Incoming field at `incoming_time` and outgoing fields at `outgoing_time`
/// on an x-grid wide enough to hold all three pulses.
pub fn pulse_table(
    scenario: &Scenario,
    spectra: &SpectralSolution,
    incoming_time: f64,
    outgoing_time: f64,
    points: usize,
) -> Table {
    let d0 = scenario.initial_offset();
    let positions = scenario.positions();
    let reach = (GROUP_VELOCITY * outgoing_time - d0)
        .abs()
        .max((GROUP_VELOCITY * incoming_time - d0).abs())
        + 10.0 / scenario.delta();
    let x = observables::linspace(
        positions[0] - reach,
        positions[positions.len() - 1] + reach,
        points,
    );
    let before = observables::pulse_shape(spectra, &x, incoming_time);
    let after = observables::pulse_shape(spectra, &x, outgoing_time);
    for w in before.warnings.iter().chain(&after.warnings) {
        warn!("{w}");
    }
    let mut table = Table::new([
        "x",
        "incoming_density",
        "transmitted_density",
        "reflected_density",
    ]);
    for (i, &xv) in x.iter().enumerate() {
        table.push(vec![
            xv.into(),
            before.incoming[i].norm_sqr().into(),
            after.right[i].norm_sqr().into(),
            after.left[i].norm_sqr().into(),
        ]);
    }
    table
}

pub fn scan_rows(
    template: &ScenarioInputs,
    axis: ScanAxis,
    values: &[f64],
) -> CliResult<Vec<(f64, TransportSummary)>> {
    observables::parameter_scan(template, axis, values)
        .into_iter()
        .map(|row| match row.outcome {
            Ok(summary) => {
                for w in &summary.warnings {
                    warn!("{} = {}: {w}", axis.name(), row.value);
                }
                Ok((row.value, summary))
            }
            Err(e) => {
                warn!("scan failed at {} = {}", axis.name(), row.value);
                Err(CliError::Core(e))
            }
        })
        .collect()
}

pub fn dynamics(cfg: &RunConfig, out: &Path, hash: &str) -> CliResult<Vec<PathBuf>> {
    let scenario = cfg.inputs.validate()?;
    let traj = time_domain::integrate_dde(&scenario, &dde_settings(cfg, &scenario))?;
    let mut written = vec![trajectory_table(&traj).write(out, "trajectory.csv", hash)?];
    if scenario.n_atoms() == 2 {
        written.push(concurrence_table(&traj)?.write(out, "concurrence.csv", hash)?);
    }
    Ok(written)
}

pub fn spectrum(cfg: &RunConfig, out: &Path, hash: &str) -> CliResult<Vec<PathBuf>> {
    let scenario = prepare(cfg)?;
    let spectra = freq_domain::solve(&scenario)?;
    let summary = observables::reflect_transmit(&spectra);
    for w in &summary.warnings {
        warn!("{w}");
    }
    let mut written = vec![
        spectrum_table(&spectra).write(out, "spectrum.csv", hash)?,
        summary_table(&summary, scenario.delta()).write(out, "summary.csv", hash)?,
    ];
    if let Some(t) = cfg.output.pulse_time {
        let t_in = cfg.output.incoming_time.unwrap_or(t);
        let table = pulse_table(&scenario, &spectra, t_in, t, cfg.output.x_points);
        written.push(table.write(out, "pulseshape.csv", hash)?);
    }
    Ok(written)
}

pub fn scan(
    cfg: &RunConfig,
    axis: ScanAxis,
    values: &[f64],
    out: &Path,
    hash: &str,
) -> CliResult<Vec<PathBuf>> {
    let rows = scan_rows(&cfg.inputs, axis, values)?;
    let mut table = Table::new([
        "axis_value",
        "reflectivity",
        "transmittivity",
        "guided_fraction",
    ]);
    for (value, s) in rows {
        table.push(vec![
            value.into(),
            s.reflectivity.into(),
            s.transmittivity.into(),
            s.guided_fraction.into(),
        ]);
    }
    Ok(vec![table.write(out, "scan.csv", hash)?])
}

/// Parses `start:stop:count` into evenly spaced values.
pub fn parse_range(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || {
        CliError::Usage(format!(
            "malformed range `{spec}`, expected start:stop:count"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if !(start.is_finite() && stop.is_finite()) || count == 0 || (count == 1 && start != stop) {
        return Err(bad());
    }
    Ok(observables::linspace(start, stop, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use wgqed_core::SystemConfig;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("-4:4:2").unwrap(), vec![-4.0, 4.0]);
        assert_eq!(parse_range("2:2:1").unwrap(), vec![2.0]);
        for bad in [
            "", "0:1", "0:1:0", "a:1:3", "0:1:3:4", "0:inf:3", "0:1:-2", "0:1:1",
        ] {
            let err = parse_range(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn grid_refines_unless_fixed() {
        let inputs = ScenarioInputs {
            system: SystemConfig {
                n_atoms: 5,
                spacing: 0.125,
                ..Default::default()
            },
            ..Default::default()
        };
        let mut cfg = RunConfig::from_inputs(inputs);
        assert!(prepare(&cfg).unwrap().grid().len() > 4096);
        cfg.fixed_points = true;
        assert_eq!(prepare(&cfg).unwrap().grid().len(), 4096);
    }

    #[test]
    fn summary_lists_totals_first() {
        let cfg = RunConfig::default();
        let scenario = prepare(&cfg).unwrap();
        let spectra = freq_domain::solve(&scenario).unwrap();
        let summary = observables::reflect_transmit(&spectra);
        let table = summary_table(&summary, scenario.delta());
        assert_eq!(table.rows[0][0], Cell::from("reflectivity"));
        assert_eq!(table.rows[2][0], Cell::from("guided_fraction"));
        assert!(table.rows.len() > 3);
        let spec = spectrum_table(&spectra);
        let x = spec.column("dk_over_delta").unwrap();
        let input = spec.column("input_density").unwrap();
        let norm: f64 = input.iter().sum::<f64>() * (x[1] - x[0]);
        assert!((norm - 1.0).abs() < 1e-6);
    }
}
