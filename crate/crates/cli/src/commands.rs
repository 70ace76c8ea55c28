use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use bounce_core::experiments::{
    asymptotic_report, restitution_from_flights, sticky_sweep, AsymptoticReport, StickySweep,
};
use bounce_core::{
    energy, rigid_bounce, run_nonlinear, run_simulation, AsymptoticConstants, BallState, EngineConfig, ModelParams,
    SimulationLog, Termination,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ModelKind, ScenarioConfig};
use crate::output::{write_events, write_json, write_restitution, write_rigid, write_sweep, write_trajectory};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: Option<String>,
    pub model: ModelKind,
    pub impacts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<BallState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restitution_plateau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<AsymptoticConstants>,
    /// Total flight time of a rigid run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
}

impl RunSummary {
    pub fn line(&self) -> String {
        let mut s = format!("impacts {}", self.impacts);
        if let Some(e) = self.final_energy {
            s += &format!(", final energy {e:.9e}");
        }
        if let Some(t) = self.termination {
            s += &format!(", termination {t:?}");
        }
        if let Some(t) = self.total_time {
            s += &format!(", total flight time {t:.12}");
        }
        if let Some(r) = self.restitution_plateau {
            s += &format!(
                ", restitution plateau {r:.6} over {} flights",
                self.plateau_len.unwrap_or(0)
            );
        }
        s
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn summarize(cfg: &ScenarioConfig, log: &SimulationLog, e0: f64, e1: f64) -> RunSummary {
    let rest = (cfg.model == ModelKind::Linear)
        .then(|| restitution_from_flights(log).ok())
        .flatten();
    RunSummary {
        name: cfg.name.clone(),
        model: cfg.model,
        impacts: log.events.len(),
        termination: Some(log.termination),
        initial_energy: Some(e0),
        final_energy: Some(e1),
        final_state: Some(log.final_state),
        restitution_plateau: rest.as_ref().map(|r| r.plateau),
        plateau_len: rest.as_ref().map(|r| r.plateau_len),
        tail: log.asymptotics,
        total_time: None,
    }
}

fn write_log<E>(dir: &Path, cfg: &ScenarioConfig, log: &SimulationLog, energy: E) -> Result<(), CliError>
where
    E: Fn(&BallState) -> f64,
{
    write_events(&dir.join("events.csv"), &log.events)?;
    if cfg.output.trajectory != Some(false) {
        write_trajectory(&dir.join("traj.csv"), &log.trajectory, energy)?;
    }
    if cfg.model == ModelKind::Linear {
        if let Ok(r) = restitution_from_flights(log) {
            write_restitution(&dir.join("restitution.csv"), &r)?;
        }
    }
    Ok(())
}

/// Runs one scenario and writes its files into `dir`.
pub fn simulate(cfg: &ScenarioConfig, dir: &Path) -> Result<RunSummary, CliError> {
    create_dir(dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml()?).map_err(|e| CliError::Io(e.to_string()))?;
    let summary = match cfg.model {
        ModelKind::Linear => {
            let p = cfg.model_params()?;
            let init = cfg.initial_state()?;
            let log = run_simulation(&init, &p, &cfg.engine_config()?)?;
            let en = |s: &BallState| energy(s, &p).value();
            write_log(dir, cfg, &log, en)?;
            summarize(cfg, &log, en(&init), en(&log.final_state))
        }
        ModelKind::Nonlinear => {
            let p = cfg.nonlinear_params()?;
            let init = cfg.initial_state()?;
            let log = run_nonlinear(&init, &p, &cfg.nonlinear_config()?)?;
            let en = |s: &BallState| p.energy(s);
            write_log(dir, cfg, &log, en)?;
            summarize(cfg, &log, en(&init), en(&log.final_state))
        }
        ModelKind::Rigid => {
            let r = &cfg.rigid;
            let b = rigid_bounce(
                r.u0.unwrap_or(1.0),
                r.g.unwrap_or(1.0),
                cfg.restitution_model()?,
                r.n.unwrap_or(30),
            )?;
            write_rigid(&dir.join("rigid.csv"), &b)?;
            RunSummary {
                name: cfg.name.clone(),
                model: cfg.model,
                impacts: b.speeds.len(),
                termination: None,
                initial_energy: None,
                final_energy: None,
                final_state: None,
                restitution_plateau: None,
                plateau_len: None,
                tail: None,
                total_time: b.cumulative_time.last().copied(),
            }
        }
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Runs a linear scenario without trajectory output and reports the tail
/// statistics of the impact sequence.
pub fn asymptotics(cfg: &ScenarioConfig, dir: &Path) -> Result<AsymptoticReport, CliError> {
    if cfg.model != ModelKind::Linear {
        return Err(CliError::Config("asymptotics needs the linear model".into()));
    }
    create_dir(dir)?;
    let p = cfg.model_params()?;
    let engine = EngineConfig {
        sample_dt: None,
        ..cfg.engine_config()?
    };
    let log = run_simulation(&cfg.initial_state()?, &p, &engine)?;
    write_events(&dir.join("events.csv"), &log.events)?;
    let report = asymptotic_report(&log)?;
    write_json(&dir.join("asymptotics.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SweepInfo<'a> {
    gamma: f64,
    mu: f64,
    ydot0: f64,
    #[serde(flatten)]
    sweep: &'a StickySweep,
}

pub fn sticky(
    epsilons: &[f64],
    ydot0: f64,
    p: &ModelParams,
    cfg: &EngineConfig,
    dir: &Path,
) -> Result<StickySweep, CliError> {
    create_dir(dir)?;
    let sweep = sticky_sweep(epsilons, ydot0, p, cfg)?;
    write_sweep(&dir.join("sweep.csv"), &sweep)?;
    write_json(
        &dir.join("sticky.json"),
        &SweepInfo {
            gamma: p.gamma,
            mu: p.mu,
            ydot0,
            sweep: &sweep,
        },
    )?;
    Ok(sweep)
}

/// Output directory name of a scenario: its `name`, else the file stem.
pub fn scenario_dir_name(cfg: &ScenarioConfig, path: &Path) -> String {
    cfg.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into())
    })
}

/// Runs every scenario in parallel, each into its own directory under `out`.
pub fn sweep(scenarios: &[(String, ScenarioConfig)], out: &Path) -> Result<Vec<(String, RunSummary)>, CliError> {
    let mut seen = BTreeSet::new();
    for (name, _) in scenarios {
        if !seen.insert(name.as_str()) {
            return Err(CliError::Config(format!(
                "two scenarios share the output directory {name}"
            )));
        }
    }
    create_dir(out)?;
    scenarios
        .par_iter()
        .map(|(name, cfg)| {
            let dir: PathBuf = out.join(name);
            simulate(cfg, &dir)
                .map(|s| (name.clone(), s))
                .map_err(|e| CliError::Scenario(name.clone(), Box::new(e)))
        })
        .collect()
}
