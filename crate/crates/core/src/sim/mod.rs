//! Deterministic simulator of the work-group execution model.
//!
//! Work-items of a group interleave only at barriers: between two barriers
//! each work-item runs its whole segment before the next one starts, in the
//! order given by the [`Schedule`]. With barriers removed the whole program
//! of a work-item is one segment. Groups run one after another.
//!
//! Every local-memory cell remembers the work-item and barrier interval
//! ("epoch") of its last write and the readers of the current epoch. A read
//! is racy when the cell was never written in this group or when another
//! work-item wrote it in the same epoch; a write is racy when another
//! work-item read the cell in the same epoch. These checks are independent
//! of the order the schedule happened to pick.

mod coalescing;
mod kernel;
mod race;
mod report;
mod traffic;

pub use coalescing::{analyze_coalescing, analyze_coalescing_with, DEFAULT_RUN_WIDTH};
pub use kernel::StagingPattern;
pub use race::{
    default_schedules, detect_barrier_race, detect_barrier_race_with, RaceReport, RaceVerdict,
};
pub use report::{Coalescing, TrafficCounts, TrafficReport, TRAFFIC_FIELDS};
pub use traffic::{predict_traffic, simulate_naive_matmul};

use std::fmt;
use std::str::FromStr;

use crate::error::Result;
use crate::expo::Backend;
use crate::matrix::{Element, Matrix, Storage};
use crate::rng::SplitMix64;
use crate::tile::{LaunchGeometry, TileConfig, DEFAULT_MAX_WORK_GROUP};
use kernel::Layout;

/// Order in which work-items of a group run between barriers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    RowMajor,
    Reversed,
    /// A fresh permutation per segment, drawn from SplitMix64.
    SeededShuffle(u64),
    /// Fixed permutation of the flat local ids, used for every segment.
    Custom(Vec<usize>),
}

impl Schedule {
    fn order(&self, items: usize, rng: &mut Option<SplitMix64>) -> Vec<usize> {
        let mut order: Vec<usize> = (0..items).collect();
        match self {
            Schedule::RowMajor => {}
            Schedule::Reversed => order.reverse(),
            Schedule::SeededShuffle(_) => rng.as_mut().expect("seeded").shuffle(&mut order),
            Schedule::Custom(perm) => {
                assert_eq!(
                    perm.len(),
                    items,
                    "custom schedule must cover every work-item"
                );
                order.clone_from(perm);
            }
        }
        order
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::RowMajor => f.write_str("row-major"),
            Schedule::Reversed => f.write_str("reversed"),
            Schedule::SeededShuffle(s) => write!(f, "shuffle:{s}"),
            Schedule::Custom(p) => write!(f, "custom:{p:?}"),
        }
    }
}

/// Parses `row-major`, `reversed` or `shuffle:SEED`.
impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "row-major" | "row_major" => Ok(Schedule::RowMajor),
            "reversed" => Ok(Schedule::Reversed),
            _ => {
                let seed = s
                    .strip_prefix("shuffle:")
                    .ok_or_else(|| format!("unknown schedule `{s}`"))?;
                seed.parse()
                    .map(Schedule::SeededShuffle)
                    .map_err(|_| format!("bad shuffle seed `{seed}`"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaceKind {
    /// Read of a cell nobody in the group has written yet.
    Uninitialized,
    /// Read of a cell another work-item wrote in the same epoch.
    ReadAfterUnorderedWrite,
    /// Write of a cell another work-item read in the same epoch.
    WriteAfterUnorderedRead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaceEvent {
    pub kind: RaceKind,
    pub group: (usize, usize),
    pub phase: usize,
    pub item: usize,
    pub cell: usize,
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub schedule: Schedule,
    pub barriers: bool,
    pub staging: StagingPattern,
    pub run_width: usize,
    pub max_work_group: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            schedule: Schedule::RowMajor,
            barriers: true,
            staging: StagingPattern::RowMajor,
            run_width: DEFAULT_RUN_WIDTH,
            max_work_group: DEFAULT_MAX_WORK_GROUP,
        }
    }
}

impl SimOptions {
    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn without_barriers(mut self) -> Self {
        self.barriers = false;
        self
    }

    pub fn with_staging(mut self, staging: StagingPattern) -> Self {
        self.staging = staging;
        self
    }
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub result: Matrix,
    pub report: TrafficReport,
    /// Total number of racy accesses.
    pub race_count: u64,
    /// The first few racy accesses, in execution order.
    pub races: Vec<RaceEvent>,
}

const KEPT_RACES: usize = 16;

/// Runs the tiled kernel with intact barriers under `schedule`.
pub fn simulate_tiled_matmul(
    a: &Matrix,
    b: &Matrix,
    cfg: &TileConfig,
    schedule: Schedule,
) -> Result<(Matrix, TrafficReport)> {
    let out = simulate_with(a, b, cfg, &SimOptions::default().with_schedule(schedule))?;
    Ok((out.result, out.report))
}

pub fn simulate_with(
    a: &Matrix,
    b: &Matrix,
    cfg: &TileConfig,
    opts: &SimOptions,
) -> Result<SimOutcome> {
    a.ensure_same_shape(b)?;
    let n = a.n();
    cfg.check_problem(n, a.dtype())?;
    LaunchGeometry::for_problem(n, cfg, opts.max_work_group)?;
    let layout = Layout::new(n, cfg, opts.staging);
    let coalescing = analyze_coalescing_with(n, cfg, opts.staging, opts.run_width)?;
    let (result, counts, race_count, races) = match (a.storage(), b.storage()) {
        (Storage::F32(x), Storage::F32(y)) => {
            let (c, counts, rc, r) = run_kernel(&layout, cfg.vector_width, x, y, opts);
            (Matrix::from_vec(n, c)?, counts, rc, r)
        }
        (Storage::F64(x), Storage::F64(y)) => {
            let (c, counts, rc, r) = run_kernel(&layout, cfg.vector_width, x, y, opts);
            (Matrix::from_vec(n, c)?, counts, rc, r)
        }
        _ => unreachable!("shape check covers dtype"),
    };
    Ok(SimOutcome {
        result,
        report: TrafficReport::from_parts(counts, coalescing),
        race_count,
        races,
    })
}

#[derive(Clone, Copy)]
enum Readers {
    None,
    One(usize),
    Many,
}

#[derive(Clone, Copy)]
struct Cell<T> {
    value: T,
    writer: Option<(usize, u64)>,
    read_epoch: u64,
    readers: Readers,
}

struct GroupState<'a, T> {
    layout: &'a Layout,
    vector_width: usize,
    a: &'a [T],
    b: &'a [T],
    c: &'a mut [T],
    group: (usize, usize),
    local: Vec<Cell<T>>,
    acc: Vec<[T; 4]>,
    epoch: u64,
    counts: TrafficCounts,
    race_count: u64,
    races: Vec<RaceEvent>,
}

impl<T: Element> GroupState<'_, T> {
    fn race(&mut self, kind: RaceKind, phase: usize, item: usize, cell: usize) {
        self.race_count += 1;
        if self.races.len() < KEPT_RACES {
            self.races.push(RaceEvent {
                kind,
                group: self.group,
                phase,
                item,
                cell,
            });
        }
    }

    fn write_local(&mut self, phase: usize, item: usize, cell: usize, value: T) {
        let meta = self.local[cell];
        let foreign_reader = match meta.readers {
            Readers::None => false,
            Readers::One(r) => r != item,
            Readers::Many => true,
        };
        if meta.read_epoch == self.epoch && foreign_reader {
            self.race(RaceKind::WriteAfterUnorderedRead, phase, item, cell);
        }
        self.local[cell] = Cell {
            value,
            writer: Some((item, self.epoch)),
            read_epoch: self.epoch,
            readers: Readers::None,
        };
        self.counts.local_stores += 1;
    }

    fn read_local(&mut self, phase: usize, item: usize, cell: usize) -> T {
        let meta = self.local[cell];
        match meta.writer {
            None => self.race(RaceKind::Uninitialized, phase, item, cell),
            Some((w, e)) if w != item && e == self.epoch => {
                self.race(RaceKind::ReadAfterUnorderedWrite, phase, item, cell)
            }
            _ => {}
        }
        let slot = &mut self.local[cell];
        if slot.read_epoch != self.epoch {
            slot.read_epoch = self.epoch;
            slot.readers = Readers::None;
        }
        slot.readers = match slot.readers {
            Readers::None => Readers::One(item),
            Readers::One(r) if r == item => Readers::One(r),
            _ => Readers::Many,
        };
        self.counts.local_loads += 1;
        slot.value
    }

    fn stage(&mut self, phase: usize, item: usize) {
        let l = *self.layout;
        if let Some(el) = l.a_element(item) {
            let v = self.a[l.global_a(self.group, phase, el)];
            self.counts.global_loads += 1;
            self.write_local(phase, item, l.local_a(el.0, el.1), v);
        }
        if let Some(el) = l.b_element(item) {
            let v = self.b[l.global_b(self.group, phase, el)];
            self.counts.global_loads += 1;
            self.write_local(phase, item, l.local_b(el.0, el.1), v);
        }
    }

    fn compute(&mut self, phase: usize, item: usize) {
        let l = *self.layout;
        let (r, c) = (item / l.cols, item % l.cols);
        for k in 0..l.kw {
            let x = self.read_local(phase, item, l.local_a(r, k));
            let y = self.read_local(phase, item, l.local_b(k, c));
            let lane = if self.vector_width == 4 { k % 4 } else { 0 };
            let acc = &mut self.acc[item][lane];
            *acc = *acc + x * y;
        }
        if phase + 1 == l.phases() {
            let [l0, l1, l2, l3] = self.acc[item];
            let v = if self.vector_width == 4 {
                (l0 + l1) + (l2 + l3)
            } else {
                l0
            };
            self.c[l.global_c(self.group, item)] = v;
            self.counts.global_stores += 1;
        }
    }

    // Segment 2p stages phase p, segment 2p + 1 accumulates it.
    fn segment(&mut self, seg: usize, item: usize) {
        if seg.is_multiple_of(2) {
            self.stage(seg / 2, item);
        } else {
            self.compute(seg / 2, item);
        }
    }

    fn barrier(&mut self) {
        self.epoch += 1;
        self.counts.barriers_executed += 1;
    }
}

fn run_kernel<T: Element>(
    layout: &Layout,
    vector_width: usize,
    a: &[T],
    b: &[T],
    opts: &SimOptions,
) -> (Vec<T>, TrafficCounts, u64, Vec<RaceEvent>) {
    let n = layout.n;
    let items = layout.items();
    let segments = 2 * layout.phases();
    let mut c = vec![T::zero(); n * n];
    let mut counts = TrafficCounts::default();
    let mut race_count = 0;
    let mut races = Vec::new();
    let mut rng = match opts.schedule {
        Schedule::SeededShuffle(seed) => Some(SplitMix64::new(seed)),
        _ => None,
    };
    let blank = Cell {
        value: T::zero(),
        writer: None,
        read_epoch: u64::MAX,
        readers: Readers::None,
    };

    let (group_rows, group_cols) = layout.groups();
    for gr in 0..group_rows {
        for gc in 0..group_cols {
            let mut st = GroupState {
                layout,
                vector_width,
                a,
                b,
                c: &mut c,
                group: (gr, gc),
                local: vec![blank; layout.local_cells()],
                acc: vec![[T::zero(); 4]; items],
                epoch: 0,
                counts,
                race_count,
                races: std::mem::take(&mut races),
            };
            if opts.barriers {
                for seg in 0..segments {
                    for item in opts.schedule.order(items, &mut rng) {
                        st.segment(seg, item);
                    }
                    st.barrier();
                }
            } else {
                for item in opts.schedule.order(items, &mut rng) {
                    for seg in 0..segments {
                        st.segment(seg, item);
                    }
                }
            }
            counts = st.counts;
            race_count = st.race_count;
            races = st.races;
        }
    }
    (c, counts, race_count, races)
}

/// Backend that multiplies through the simulator (row-major schedule).
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulatedBackend {
    pub cfg: TileConfig,
}

impl SimulatedBackend {
    pub fn new(cfg: TileConfig) -> Self {
        Self { cfg }
    }
}

impl Backend for SimulatedBackend {
    fn name(&self) -> &str {
        "sim"
    }

    fn multiply(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        simulate_tiled_matmul(a, b, &self.cfg, Schedule::RowMajor).map(|(m, _)| m)
    }
}
