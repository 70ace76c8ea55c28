//! Scenario files: one TOML document per run, with command-line overrides.

use std::path::Path;

use bounce_core::{
    characteristic_times, BallState, BounceError, CmCoords, EngineConfig, ModelParams, NonlinearConfig,
    NonlinearParams, RestitutionModel,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Linear,
    Nonlinear,
    Rigid,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

/// Initial condition, either in `(x, y)` or in centre-of-mass form. Unset
/// fields are zero; `equilibrium = true` starts at rest on the floor.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psidot0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xidot0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xdot0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ydot0: Option<f64>,
}

impl InitialSection {
    fn cm_set(&self) -> bool {
        self.psi0.is_some() || self.psidot0.is_some() || self.xi0.is_some() || self.xidot0.is_some()
    }

    fn xy_set(&self) -> bool {
        self.x0.is_some() || self.xdot0.is_some() || self.y0.is_some() || self.ydot0.is_some()
    }

    fn clear_cm(&mut self) {
        (self.psi0, self.psidot0, self.xi0, self.xidot0) = (None, None, None, None);
    }

    fn clear_xy(&mut self) {
        (self.x0, self.xdot0, self.y0, self.ydot0) = (None, None, None, None);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_impacts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_eps: Option<f64>,
    /// Local error tolerance of the nonlinear integrator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidSection {
    /// Constant restitution coefficient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Speed scale of the one-fifth law; used when `r` is unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_fifth_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Trajectory sample step; defaults to `min(T_psi, T_xi) / 200`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    /// Set to false to skip `traj.csv`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub rigid: RigidSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Values given on the command line; each one replaces the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub psi0: Option<f64>,
    pub psidot0: Option<f64>,
    pub xi0: Option<f64>,
    pub xidot0: Option<f64>,
    pub x0: Option<f64>,
    pub xdot0: Option<f64>,
    pub y0: Option<f64>,
    pub ydot0: Option<f64>,
    pub equilibrium: bool,
    pub t_max: Option<f64>,
    pub max_impacts: Option<usize>,
    pub tau_floor: Option<f64>,
    pub sample_dt: Option<f64>,
    pub no_traj: bool,
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

pub const DEFAULT_GAMMA: f64 = 0.01;
pub const DEFAULT_MU: f64 = 0.1;
pub const SAMPLES_PER_TIME: f64 = 200.0;

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        let p = &mut self.params;
        set(&mut p.gamma, o.gamma);
        set(&mut p.mu, o.mu);
        set(&mut p.rho, o.rho);
        set(&mut p.a, o.a);
        set(&mut p.b, o.b);
        if o.rho.is_some() || o.a.is_some() || o.b.is_some() {
            self.model = ModelKind::Nonlinear;
        }

        let i = &mut self.initial;
        let cm = o.psi0.is_some() || o.psidot0.is_some() || o.xi0.is_some() || o.xidot0.is_some();
        let xy = o.x0.is_some() || o.xdot0.is_some() || o.y0.is_some() || o.ydot0.is_some();
        if o.equilibrium {
            *i = InitialSection {
                equilibrium: Some(true),
                ..InitialSection::default()
            };
        } else if cm || xy {
            i.equilibrium = None;
        }
        if cm && !xy {
            i.clear_xy();
        }
        if xy && !cm {
            i.clear_cm();
        }
        set(&mut i.psi0, o.psi0);
        set(&mut i.psidot0, o.psidot0);
        set(&mut i.xi0, o.xi0);
        set(&mut i.xidot0, o.xidot0);
        set(&mut i.x0, o.x0);
        set(&mut i.xdot0, o.xdot0);
        set(&mut i.y0, o.y0);
        set(&mut i.ydot0, o.ydot0);

        set(&mut self.engine.t_max, o.t_max);
        set(&mut self.engine.max_impacts, o.max_impacts);
        set(&mut self.engine.tau_floor, o.tau_floor);
        set(&mut self.output.sample_dt, o.sample_dt);
        if o.no_traj {
            self.output.trajectory = Some(false);
        }
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(
            self.params.gamma.unwrap_or(DEFAULT_GAMMA),
            self.params.mu.unwrap_or(DEFAULT_MU),
        )?)
    }

    pub fn nonlinear_params(&self) -> Result<NonlinearParams, CliError> {
        let m = self.model_params()?;
        Ok(NonlinearParams::new(
            m.gamma,
            m.mu,
            self.params.rho.unwrap_or(1.0),
            self.params.a.unwrap_or(0.0),
            self.params.b.unwrap_or(0.0),
        )?)
    }

    pub fn initial_state(&self) -> Result<BallState, CliError> {
        let i = &self.initial;
        if i.cm_set() && i.xy_set() {
            return Err(CliError::Config(
                "initial condition mixes (x, y) and (psi, xi) forms".into(),
            ));
        }
        if i.equilibrium == Some(true) {
            if i.cm_set() || i.xy_set() {
                return Err(CliError::Config("equilibrium start takes no coordinates".into()));
            }
            return Ok(match self.model {
                ModelKind::Nonlinear => self.nonlinear_params()?.equilibrium_state(),
                _ => BallState::equilibrium(&self.model_params()?),
            });
        }
        if i.xy_set() {
            let x = i.x0.unwrap_or(0.0);
            return Ok(BallState::new(
                0.0,
                x,
                i.xdot0.unwrap_or(0.0),
                i.y0.unwrap_or(x + 1.0),
                i.ydot0.unwrap_or(0.0),
            ));
        }
        Ok(BallState::from_cm(
            0.0,
            CmCoords {
                psi: i.psi0.unwrap_or(0.0),
                psidot: i.psidot0.unwrap_or(0.0),
                xi: i.xi0.unwrap_or(0.0),
                xidot: i.xidot0.unwrap_or(0.0),
            },
        ))
    }

    pub fn default_sample_dt(p: &ModelParams) -> f64 {
        let c = characteristic_times(p);
        c.t_psi.min(c.t_xi.unwrap_or(c.t_d)) / SAMPLES_PER_TIME
    }

    pub fn engine_config(&self) -> Result<EngineConfig, CliError> {
        let d = EngineConfig::default();
        let e = &self.engine;
        let sample_dt = match self.output.trajectory {
            Some(false) => None,
            _ => Some(match self.output.sample_dt {
                Some(dt) => dt,
                None => Self::default_sample_dt(&self.model_params()?),
            }),
        };
        let cfg = EngineConfig {
            t_max: e.t_max.unwrap_or(d.t_max),
            max_impacts: e.max_impacts.unwrap_or(d.max_impacts),
            tau_floor: e.tau_floor.unwrap_or(d.tau_floor),
            v_eps: e.v_eps.unwrap_or(d.v_eps),
            a_eps: e.a_eps.unwrap_or(d.a_eps),
            sample_dt,
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn nonlinear_config(&self) -> Result<NonlinearConfig, CliError> {
        let d = NonlinearConfig::default();
        Ok(NonlinearConfig {
            engine: self.engine_config()?,
            tol: self.engine.tol.unwrap_or(d.tol),
            ..d
        })
    }

    pub fn restitution_model(&self) -> Result<RestitutionModel, CliError> {
        match (self.rigid.r, self.rigid.one_fifth_scale) {
            (Some(r), None) => Ok(RestitutionModel::Constant(r)),
            (None, Some(u)) => Ok(RestitutionModel::OneFifth { u_scale: u }),
            (None, None) => Ok(RestitutionModel::Stitched(self.model_params()?)),
            (Some(_), Some(_)) => Err(CliError::Config("give either r or one_fifth_scale, not both".into())),
        }
    }
}

impl From<BounceError> for CliError {
    fn from(e: BounceError) -> Self {
        CliError::Model(e)
    }
}
