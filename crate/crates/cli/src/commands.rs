use std::io::Write;

use beamswarm::geometry::OrbitConfig;
use beamswarm::sim::{run_sweep, write_results, OutputFormat, ScenarioConfig, SweepAxis, SweepRecord};
use beamswarm::spacing::{optimal_spacing, SpacingQuery};
use beamswarm::units::km_to_m;
use beamswarm::{Error, Result};

use crate::{ConfigArgs, Format, SpacingArgs, SweepArgs};

pub fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::NoRoot(_) => 2,
        Error::Numerical(_) | Error::NoConvergence(_) => 3,
        _ => 1,
    }
}

fn elevation_grid(a: &SpacingArgs) -> Result<Vec<f64>> {
    if let Some(t) = a.theta_deg {
        return Ok(vec![t]);
    }
    let (Some(from), Some(to)) = (a.from, a.to) else {
        return Err(Error::InvalidInput(
            "give either --theta-deg or --from/--to".into(),
        ));
    };
    if !(a.step > 0.0) || !(to >= from) {
        return Err(Error::InvalidInput(format!(
            "invalid grid {from}..{to} step {}",
            a.step
        )));
    }
    // Index-based so that the last point is not lost to rounding.
    let n = ((to - from) / a.step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * a.step).collect())
}

pub fn spacing(a: &SpacingArgs) -> Result<()> {
    let orbit = OrbitConfig::new(km_to_m(a.d0_km))?;
    let grid = elevation_grid(a)?;
    let mut out = std::io::stdout().lock();
    let io = |e: std::io::Error| Error::Io {
        path: "<stdout>".into(),
        source: e,
    };
    writeln!(out, "theta_deg,ds_orth_km,delta_phi,iterations").map_err(io)?;
    for theta in grid {
        let query = SpacingQuery::new(theta.to_radians(), a.nr, orbit).with_harmonic(a.k);
        let r = optimal_spacing(&query).map_err(|e| e.context(format!("θ = {theta} deg")))?;
        writeln!(
            out,
            "{theta},{},{},{}",
            r.ds_orth * 1e-3,
            r.delta_phi_achieved,
            r.iterations
        )
        .map_err(io)?;
    }
    Ok(())
}

fn load(a: &ConfigArgs) -> Result<ScenarioConfig> {
    let mut overrides = a.overrides.clone();
    if let Some(s) = a.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(t) = a.trials {
        overrides.push(format!("trials={t}"));
    }
    ScenarioConfig::load(&a.config, &overrides)
}

pub fn validate(a: &ConfigArgs) -> Result<()> {
    let config = load(a)?;
    println!("ok {}", config.digest());
    Ok(())
}

#[derive(Clone, Copy)]
pub enum SweepKind {
    Distance,
    Power,
    Pass,
}

impl SweepKind {
    fn axis(self) -> SweepAxis {
        match self {
            SweepKind::Distance => SweepAxis::InterSatDistance,
            SweepKind::Power => SweepAxis::TransmitPower,
            SweepKind::Pass => SweepAxis::MeanElevationTime,
        }
    }

    fn name(self) -> &'static str {
        match self {
            SweepKind::Distance => "sweep-ds",
            SweepKind::Power => "sweep-power",
            SweepKind::Pass => "pass",
        }
    }
}

pub fn sweep(a: &SweepArgs, kind: SweepKind) -> Result<()> {
    let config = load(&a.config)?;
    if config.sweep.axis != kind.axis() {
        return Err(Error::InvalidConfig(format!(
            "{} needs sweep.axis = {:?}, the scenario has {:?}",
            kind.name(),
            kind.axis(),
            config.sweep.axis
        )));
    }
    let records = run_sweep(&config)?;
    let format = match a.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let path = write_results(&records, &a.out, kind.name(), format)?;
    print_summary(&records);
    println!("wrote {}", path.display());
    Ok(())
}

fn print_summary(records: &[SweepRecord]) {
    let columns: [(&str, fn(&SweepRecord) -> f64); 5] = [
        ("r_opt", |r| r.mean.r_opt),
        ("r_per", |r| r.mean.r_per),
        ("r_lin_geo", |r| r.mean.r_lin),
        ("r_lin_opt_eq", |r| r.mean.r_lin_opt_eq),
        ("r_upper", |r| r.mean.r_upper_geo),
    ];
    println!("{:<14}{:>12}{:>12}{:>12}", "rate", "min", "max", "mean");
    for (name, f) in columns {
        let v: Vec<f64> = records.iter().map(f).collect();
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        println!("{name:<14}{min:>12.4}{max:>12.4}{mean:>12.4}");
    }
}
