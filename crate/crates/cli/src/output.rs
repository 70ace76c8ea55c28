//! CSV and JSON writers. Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use bounce_core::experiments::{RestitutionSeries, StickySweep};
use bounce_core::{BallState, ContactEvent, MapSequence, RigidBounce};
use serde::Serialize;

use crate::CliError;

pub const EVENT_COLUMNS: [&str; 9] = ["n", "t", "tau", "kind", "xdot_pre", "xdot_post", "y", "ydot", "E"];
pub const TRAJ_COLUMNS: [&str; 8] = ["t", "x", "xdot", "y", "ydot", "psi", "xi", "E"];
pub const RESTITUTION_COLUMNS: [&str; 3] = ["n", "flight", "ratio"];
pub const SWEEP_COLUMNS: [&str; 3] = ["epsilon", "impacts", "norm"];
pub const RIGID_COLUMNS: [&str; 4] = ["k", "speed", "flight_time", "cumulative_time"];
pub const MAP_COLUMNS: [&str; 2] = ["n", "value"];

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_events(path: &Path, events: &[ContactEvent]) -> Result<(), CliError> {
    write_csv(
        path,
        &EVENT_COLUMNS,
        events.iter().map(|e| {
            vec![
                e.n.to_string(),
                num(e.t),
                num(e.tau),
                e.kind.as_str().to_string(),
                num(e.xdot_pre),
                num(e.xdot_post),
                num(e.y),
                num(e.ydot),
                num(e.energy),
            ]
        }),
    )
}

pub fn write_trajectory<E>(path: &Path, samples: &[BallState], energy: E) -> Result<(), CliError>
where
    E: Fn(&BallState) -> f64,
{
    write_csv(
        path,
        &TRAJ_COLUMNS,
        samples.iter().map(|s| {
            let c = s.to_cm();
            vec![
                num(s.t),
                num(s.x),
                num(s.xdot),
                num(s.y),
                num(s.ydot),
                num(c.psi),
                num(c.xi),
                num(energy(s)),
            ]
        }),
    )
}

/// One row per macroscopic flight; `ratio` is empty where it is undefined.
pub fn write_restitution(path: &Path, r: &RestitutionSeries) -> Result<(), CliError> {
    write_csv(
        path,
        &RESTITUTION_COLUMNS,
        r.flights.iter().enumerate().map(|(n, f)| {
            let ratio = n
                .checked_sub(1)
                .and_then(|k| r.ratios.get(k))
                .map_or(String::new(), |&v| num(v));
            vec![n.to_string(), num(*f), ratio]
        }),
    )
}

pub fn write_sweep(path: &Path, s: &StickySweep) -> Result<(), CliError> {
    write_csv(
        path,
        &SWEEP_COLUMNS,
        s.rows
            .iter()
            .map(|r| vec![num(r.epsilon), r.impacts.to_string(), num(r.norm)]),
    )
}

pub fn write_rigid(path: &Path, b: &RigidBounce) -> Result<(), CliError> {
    write_csv(
        path,
        &RIGID_COLUMNS,
        (0..b.speeds.len()).map(|k| {
            vec![
                k.to_string(),
                num(b.speeds[k]),
                num(b.flight_times[k]),
                num(b.cumulative_time[k]),
            ]
        }),
    )
}

pub fn write_map(path: &Path, m: &MapSequence) -> Result<(), CliError> {
    write_csv(
        path,
        &MAP_COLUMNS,
        m.iterates.iter().enumerate().map(|(n, v)| vec![n.to_string(), num(*v)]),
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Checks that `path` is a CSV file whose header is exactly `columns`.
pub fn check_header(path: &Path, columns: &[&str]) -> Result<(), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| io_err(path, e))?;
    if header.iter().eq(columns.iter().copied()) {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{}: expected columns {columns:?}, found {:?}",
            path.display(),
            header.iter().collect::<Vec<_>>()
        )))
    }
}
