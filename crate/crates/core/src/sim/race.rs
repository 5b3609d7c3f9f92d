use super::{simulate_with, RaceEvent, Schedule, SimOptions};
use crate::error::Result;
use crate::matrix::{random_matrix, Dtype, Matrix};
use crate::tile::TileConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaceVerdict {
    Clean,
    RaceDetected,
}

#[derive(Debug, Clone)]
pub struct RaceReport {
    pub verdict: RaceVerdict,
    pub schedules: Vec<Schedule>,
    /// Racy accesses found by happens-before tracking, summed over schedules.
    pub race_count: u64,
    pub first_race: Option<RaceEvent>,
    /// Schedules whose result differs bitwise from the first schedule's.
    pub divergent: Vec<Schedule>,
}

/// Row-major, reversed and five seeded shuffles.
pub fn default_schedules() -> Vec<Schedule> {
    let mut s = vec![Schedule::RowMajor, Schedule::Reversed];
    s.extend((1..=5).map(Schedule::SeededShuffle));
    s
}

/// Runs the tiled kernel on seeded random inputs under the default schedules.
pub fn detect_barrier_race(cfg: &TileConfig, n: usize, drop_barriers: bool) -> Result<RaceReport> {
    let a = random_matrix(n, Dtype::F32, 42, -0.5, 0.5)?;
    let b = random_matrix(n, Dtype::F32, 43, -0.5, 0.5)?;
    detect_barrier_race_with(&a, &b, cfg, drop_barriers, &default_schedules())
}

pub fn detect_barrier_race_with(
    a: &Matrix,
    b: &Matrix,
    cfg: &TileConfig,
    drop_barriers: bool,
    schedules: &[Schedule],
) -> Result<RaceReport> {
    assert!(
        schedules.len() >= 2,
        "race detection needs at least two schedules"
    );
    let mut race_count = 0;
    let mut first_race = None;
    let mut divergent = Vec::new();
    let mut baseline: Option<Matrix> = None;
    for s in schedules {
        let mut opts = SimOptions::default().with_schedule(s.clone());
        opts.barriers = !drop_barriers;
        let out = simulate_with(a, b, cfg, &opts)?;
        race_count += out.race_count;
        if first_race.is_none() {
            first_race = out.races.first().copied();
        }
        match &baseline {
            None => baseline = Some(out.result),
            Some(base) if !base.bitwise_eq(&out.result) => divergent.push(s.clone()),
            Some(_) => {}
        }
    }
    let verdict = if race_count == 0 && divergent.is_empty() {
        RaceVerdict::Clean
    } else {
        RaceVerdict::RaceDetected
    };
    Ok(RaceReport {
        verdict,
        schedules: schedules.to_vec(),
        race_count,
        first_race,
        divergent,
    })
}
