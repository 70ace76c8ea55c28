use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bounce_cli::commands::{asymptotics, scenario_dir_name, simulate, sticky, sweep};
use bounce_cli::config::{Overrides, ScenarioConfig};
use bounce_cli::output::write_map;
use bounce_cli::CliError;
use bounce_core::{
    alpha_implicit_map_iterate, power_map_iterate, quadratic_map_iterate, rigid_bounce, EngineConfig, MapSequence,
    ModelParams, RestitutionModel,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bounce", version, about = "Two-mass bouncing ball simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write events.csv, traj.csv and summary.json.
    Simulate(ScenarioArgs),
    /// Run a long linear scenario and report the tail constants.
    Asymptotics(ScenarioArgs),
    /// Sweep the initial lift-off velocity of a sticky start.
    StickySweep(StickyArgs),
    /// Rigid ball with a restitution law.
    Rigid(RigidArgs),
    /// Iterate one of the scalar maps.
    Maps(MapsArgs),
    /// Run several scenario files in parallel.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Spring stiffness scale; selects the nonlinear model.
    #[arg(long)]
    rho: Option<f64>,
    /// Stiffness exponent; selects the nonlinear model.
    #[arg(long)]
    a: Option<f64>,
    /// Damping exponent; selects the nonlinear model.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    psi0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    psidot0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xidot0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xdot0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ydot0: Option<f64>,
    /// Start at rest on the floor at static equilibrium.
    #[arg(long)]
    equilibrium: bool,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    max_impacts: Option<usize>,
    #[arg(long)]
    tau_floor: Option<f64>,
    #[arg(long)]
    sample_dt: Option<f64>,
    /// Do not write traj.csv.
    #[arg(long)]
    no_traj: bool,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        cfg.apply(&Overrides {
            gamma: self.gamma,
            mu: self.mu,
            rho: self.rho,
            a: self.a,
            b: self.b,
            psi0: self.psi0,
            psidot0: self.psidot0,
            xi0: self.xi0,
            xidot0: self.xidot0,
            x0: self.x0,
            xdot0: self.xdot0,
            y0: self.y0,
            ydot0: self.ydot0,
            equilibrium: self.equilibrium,
            t_max: self.t_max,
            max_impacts: self.max_impacts,
            tau_floor: self.tau_floor,
            sample_dt: self.sample_dt,
            no_traj: self.no_traj,
        });
        Ok(cfg)
    }
}

#[derive(Args)]
struct StickyArgs {
    #[arg(long, default_value_t = 0.01)]
    gamma: f64,
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    /// Upper-mass velocity at the start.
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    ydot0: f64,
    /// Comma-separated lift-off velocities; defaults to a halving grid.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    /// Largest velocity of the halving grid.
    #[arg(long, default_value_t = 0.1)]
    eps_max: f64,
    /// Number of points of the halving grid.
    #[arg(long, default_value_t = 12)]
    levels: usize,
    #[arg(long, default_value_t = 1e4)]
    t_max: f64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RigidArgs {
    /// Constant restitution coefficient.
    #[arg(long, conflicts_with_all = ["one_fifth", "gamma"])]
    r: Option<f64>,
    /// Speed scale of the one-fifth law.
    #[arg(long, conflicts_with = "gamma")]
    one_fifth: Option<f64>,
    /// Gravity of the deformable ball whose restitution law is used.
    #[arg(long, requires = "mu")]
    gamma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    u0: f64,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 30)]
    n: usize,
    /// Directory for rigid.csv; nothing is written when absent.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct MapsArgs {
    #[command(subcommand)]
    map: MapKind,
    /// Directory for map.csv; nothing is written when absent.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MapKind {
    /// x -> x - alpha x^2
    Quadratic {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.01)]
        x0: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
    /// x -> x - alpha x^beta
    Power {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.2)]
        beta: f64,
        #[arg(long, default_value_t = 0.01)]
        x0: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
    /// f(alpha_{n+1}) = g(alpha_n)
    Alpha {
        #[arg(long, default_value_t = 0.5)]
        alpha0: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario files.
    #[arg(required = true)]
    configs: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let s = simulate(&args.scenario()?, &args.out_dir)?;
            println!("{}", s.line());
        }
        Command::Asymptotics(args) => {
            let r = asymptotics(&args.scenario()?, &args.out_dir)?;
            println!(
                "window {}: n tau mu/3 = {:.6}, n X mu/(3 gamma) = {:.6}, X/(tau gamma) = {:.6}, tau exponent {:.6}",
                r.window, r.n_tau.mean, r.n_velocity.mean, r.velocity_over_tau.mean, r.tau_exponent
            );
        }
        Command::StickySweep(args) => {
            let p = ModelParams::new(args.gamma, args.mu)?;
            let eps = if args.eps.is_empty() {
                (0..args.levels).map(|k| args.eps_max * 0.5f64.powi(k as i32)).collect()
            } else {
                args.eps.clone()
            };
            let cfg = EngineConfig {
                t_max: args.t_max,
                ..EngineConfig::default()
            };
            let s = sticky(&eps, args.ydot0, &p, &cfg, &args.out_dir)?;
            println!("t_c {:.9}", s.t_c);
            for r in &s.rows {
                println!("epsilon {:.6e}: {} impacts, norm {:.6e}", r.epsilon, r.impacts, r.norm);
            }
        }
        Command::Rigid(args) => {
            let model = match (args.r, args.one_fifth, args.gamma, args.mu) {
                (Some(r), _, _, _) => RestitutionModel::Constant(r),
                (None, Some(u), _, _) => RestitutionModel::OneFifth { u_scale: u },
                (None, None, Some(g), Some(m)) => RestitutionModel::Stitched(ModelParams::new(g, m)?),
                _ => return Err(CliError::Config("give --r, --one-fifth, or --gamma with --mu".into())),
            };
            let b = rigid_bounce(args.u0, args.g, model, args.n)?;
            if let Some(dir) = &args.out_dir {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(e.to_string()))?;
                bounce_cli::output::write_rigid(&dir.join("rigid.csv"), &b)?;
            }
            println!(
                "flights {}, last speed {:.9e}, total flight time {:.12}",
                b.speeds.len(),
                b.speeds[b.speeds.len() - 1],
                b.cumulative_time[b.cumulative_time.len() - 1]
            );
        }
        Command::Maps(args) => {
            let (seq, scale): (MapSequence, f64) = match args.map {
                MapKind::Quadratic { alpha, x0, n } => (quadratic_map_iterate(x0, |_| alpha, n)?, 1.0),
                MapKind::Power { alpha, beta, x0, n } => (power_map_iterate(x0, alpha, beta, n)?, 1.0 / (beta - 1.0)),
                MapKind::Alpha { alpha0, n } => (alpha_implicit_map_iterate(alpha0, |_| 0.0, n)?, 0.0),
            };
            write_map_if(&args.out_dir, &seq)?;
            let n = seq.len() - 1;
            let last = seq.last().unwrap_or(f64::NAN);
            println!(
                "n {n}, x_n {last:.9e}, n^{scale} x_n {:.9}",
                (n as f64).powf(scale) * last
            );
        }
        Command::Sweep(args) => {
            let scenarios = args
                .configs
                .iter()
                .map(|p| ScenarioConfig::load(p).map(|c| (scenario_dir_name(&c, p), c)))
                .collect::<Result<Vec<_>, _>>()?;
            for (name, s) in sweep(&scenarios, &args.out_dir)? {
                println!("{name}: {}", s.line());
            }
        }
    }
    Ok(())
}

fn write_map_if(dir: &Option<PathBuf>, seq: &MapSequence) -> Result<(), CliError> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(e.to_string()))?;
        write_map(&Path::new(dir).join("map.csv"), seq)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
