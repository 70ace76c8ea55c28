//! Event-driven simulation of a deformable ball made of two point masses
//! joined by a damped spring, bouncing on a rigid floor.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod flight;
pub mod maps;
pub mod model;
pub mod nonlinear;
pub mod oscillator;
pub mod rigid;
pub mod roots;
pub mod sticky;

pub use engine::{
    classify_contact, collide, find_next_contact, jump_relations_check, run_simulation, AsymptoticConstants,
    ContactEvent, ContactKind, EngineConfig, JumpReport, SimulationLog, Termination,
};
pub use error::{BounceError, Result};
pub use flight::{build_flight, eval_flight, eval_flight_derivatives, FlightSolution};
pub use maps::{
    alpha_implicit_map_iterate, divergent_sum_check, power_map_iterate, quadratic_map_iterate, MapRule, MapSequence,
};
pub use model::{
    anomaly_energy_barrier, characteristic_times, energy, floor_force, to_cm_coords, BallState, CharacteristicTimes,
    CmCoords, Energy, ModelParams,
};
pub use nonlinear::{
    nonlinear_asymptotic_alpha, nonlinear_find_contact, nonlinear_flight_step, run_nonlinear, NonlinearConfig,
    NonlinearParams,
};
pub use oscillator::Regime;
pub use rigid::{rigid_bounce, RestitutionModel, RigidBounce};
pub use sticky::{build_sticky, find_detachment, min_duration_check, resting_contact, Detachment, StickySolution};
