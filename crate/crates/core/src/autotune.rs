//! Tile-size search trading modeled throughput against on-chip footprint.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::grid::{Dims3, Halo, SplitMix64};
use crate::kernels::Kernel;
use crate::perfmodel::{simulate_run, MachineModel, ModelError, Workload};
use crate::tiling::{plan_windows, tile_footprint, PlanError, TileSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TuneError {
    #[error("search space has no candidates")]
    EmptySpace,
    #[error("no tile fits the footprint budget")]
    NoFeasiblePoint,
    #[error("tile {tile} is not legal: {source}")]
    InvalidTile { tile: TileSpec, source: PlanError },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Candidate tiles for one kernel on one domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    pub kernel: Kernel,
    pub domain: Dims3,
    pub halo: Halo,
    pub tx: Vec<usize>,
    pub ty: Vec<usize>,
    pub tz: Vec<usize>,
    pub bytes_per_elem: u64,
    pub footprint_budget: Option<u64>,
    /// PE count the throughput is modeled at.
    pub n_pe: usize,
}

/// Powers of two up to `extent`, plus `extent` itself.
pub fn default_candidates(extent: usize) -> Vec<usize> {
    let mut v: Vec<usize> = core::iter::successors(Some(1usize), |&p| p.checked_mul(2))
        .take_while(|&p| p <= extent)
        .collect();
    if extent > 0 && !extent.is_power_of_two() {
        v.push(extent);
    }
    v
}

impl SearchSpace {
    /// Default candidates over the interior of `domain`; vadvc pins `tz` to
    /// the column height.
    pub fn new(kernel: Kernel, domain: Dims3, halo: Halo, bytes_per_elem: u64) -> Self {
        let h = halo.as_array();
        let [ix, iy, iz] = [0, 1, 2].map(|a| domain.as_array()[a].saturating_sub(2 * h[a]));
        let tz = if kernel.owns_columns() {
            alloc::vec![iz]
        } else {
            default_candidates(iz)
        };
        SearchSpace {
            kernel,
            domain,
            halo,
            tx: default_candidates(ix),
            ty: default_candidates(iy),
            tz,
            bytes_per_elem,
            footprint_budget: None,
            n_pe: 1,
        }
    }

    pub fn with_budget(mut self, budget: Option<u64>) -> Self {
        self.footprint_budget = budget;
        self
    }

    pub fn len(&self) -> usize {
        self.tx.len() * self.ty.len() * self.tz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn tile_at(&self, idx: [usize; 3]) -> TileSpec {
        TileSpec::new(self.tx[idx[0]], self.ty[idx[1]], self.tz[idx[2]])
    }

    /// Every candidate, `tx` varying fastest.
    pub fn tiles(&self) -> Vec<TileSpec> {
        let mut out = Vec::with_capacity(self.len());
        for &tz in &self.tz {
            for &ty in &self.ty {
                for &tx in &self.tx {
                    out.push(TileSpec::new(tx, ty, tz));
                }
            }
        }
        out
    }

    fn fits(&self, tile: TileSpec) -> bool {
        self.footprint_budget
            .is_none_or(|b| tile_footprint(tile, self.kernel, self.bytes_per_elem) <= b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub tile: TileSpec,
    /// Modeled GFLOP/s.
    pub throughput: f64,
    /// Bytes.
    pub footprint: u64,
}

impl ParetoPoint {
    /// At least as good in both objectives and better in one.
    pub fn dominates(&self, other: &ParetoPoint) -> bool {
        self.throughput >= other.throughput
            && self.footprint <= other.footprint
            && (self.throughput > other.throughput || self.footprint < other.footprint)
    }

    fn order_key(&self, other: &ParetoPoint) -> Ordering {
        self.footprint
            .cmp(&other.footprint)
            .then_with(|| self.tile.as_array().cmp(&other.tile.as_array()))
    }
}

pub fn evaluate_tile(
    tile: TileSpec,
    space: &SearchSpace,
    model: &MachineModel,
) -> Result<ParetoPoint, TuneError> {
    let plan = plan_windows(space.domain, space.halo, tile, space.kernel)
        .map_err(|source| TuneError::InvalidTile { tile, source })?;
    let work = Workload::from_plan(&plan, space.bytes_per_elem);
    let sim = simulate_run(&work, space.n_pe, model)?;
    Ok(ParetoPoint {
        tile,
        throughput: sim.gflops,
        footprint: tile_footprint(tile, space.kernel, space.bytes_per_elem),
    })
}

/// Non-dominated points, by footprint then tile.
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut front: Vec<ParetoPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| q.dominates(p)))
        .copied()
        .collect();
    front.sort_by(ParetoPoint::order_key);
    front.dedup_by(|a, b| a.tile == b.tile);
    front
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Random { samples: usize, seed: u64 },
    HillClimb { starts: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub front: Vec<ParetoPoint>,
    /// Every evaluated point, in `(tz, ty, tx)` order.
    pub evaluated: Vec<ParetoPoint>,
    pub evaluations: usize,
}

impl TuneResult {
    pub fn on_front(&self, p: &ParetoPoint) -> bool {
        self.front.iter().any(|f| f.tile == p.tile)
    }
}

struct Evaluator<'a> {
    space: &'a SearchSpace,
    model: &'a MachineModel,
    seen: BTreeSet<[usize; 3]>,
    points: Vec<ParetoPoint>,
}

impl Evaluator<'_> {
    /// Evaluates candidate `idx` once; `None` if it breaks the budget.
    fn visit(&mut self, idx: [usize; 3]) -> Result<Option<ParetoPoint>, TuneError> {
        let tile = self.space.tile_at(idx);
        if !self.space.fits(tile) {
            return Ok(None);
        }
        if self.seen.insert(idx) {
            let p = evaluate_tile(tile, self.space, self.model)?;
            self.points.push(p);
            return Ok(Some(p));
        }
        Ok(self.points.iter().find(|p| p.tile == tile).copied())
    }

    fn finish(mut self) -> Result<TuneResult, TuneError> {
        if self.points.is_empty() {
            return Err(TuneError::NoFeasiblePoint);
        }
        self.points
            .sort_by_key(|p| (p.tile.tz, p.tile.ty, p.tile.tx));
        Ok(TuneResult {
            front: pareto_front(&self.points),
            evaluations: self.points.len(),
            evaluated: self.points,
        })
    }
}

/// Better in the search's scalar order: throughput, then smaller footprint.
fn better(a: &ParetoPoint, b: &ParetoPoint) -> bool {
    a.throughput > b.throughput || (a.throughput == b.throughput && a.footprint < b.footprint)
}

pub fn search(
    space: &SearchSpace,
    mode: SearchMode,
    model: &MachineModel,
) -> Result<TuneResult, TuneError> {
    if space.is_empty() {
        return Err(TuneError::EmptySpace);
    }
    let mut ev = Evaluator {
        space,
        model,
        seen: BTreeSet::new(),
        points: Vec::new(),
    };
    let dims = [space.tx.len(), space.ty.len(), space.tz.len()];
    // Random draws and hill-climb starts come from the tiles within budget.
    let mut feasible = Vec::new();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                if space.fits(space.tile_at([x, y, z])) {
                    feasible.push([x, y, z]);
                }
            }
        }
    }
    if feasible.is_empty() {
        return Err(TuneError::NoFeasiblePoint);
    }
    let random_idx = |rng: &mut SplitMix64| feasible[rng.next_below(feasible.len())];

    match mode {
        SearchMode::Exhaustive => {
            for &idx in &feasible {
                ev.visit(idx)?;
            }
        }
        SearchMode::Random { samples, seed } => {
            let mut rng = SplitMix64::new(seed);
            for _ in 0..samples {
                ev.visit(random_idx(&mut rng))?;
            }
        }
        SearchMode::HillClimb { starts, seed } => {
            let mut rng = SplitMix64::new(seed);
            for _ in 0..starts {
                let mut at = random_idx(&mut rng);
                let Some(mut here) = ev.visit(at)? else {
                    continue;
                };
                loop {
                    let mut step = None;
                    for axis in 0..3 {
                        for next in [at[axis].wrapping_sub(1), at[axis] + 1] {
                            if next >= dims[axis] {
                                continue;
                            }
                            let mut idx = at;
                            idx[axis] = next;
                            if let Some(p) = ev.visit(idx)? {
                                if better(&p, step.as_ref().map_or(&here, |(_, s)| s)) {
                                    step = Some((idx, p));
                                }
                            }
                        }
                    }
                    match step {
                        Some((idx, p)) => (at, here) = (idx, p),
                        None => break,
                    }
                }
            }
        }
    }
    ev.finish()
}

/// Highest-throughput point within `budget`; ties go to the smaller
/// footprint.
pub fn pick_operating_point(front: &[ParetoPoint], budget: u64) -> Result<ParetoPoint, TuneError> {
    front
        .iter()
        .filter(|p| p.footprint <= budget)
        .fold(None, |best: Option<&ParetoPoint>, p| match best {
            Some(b) if !better(p, b) => Some(b),
            _ => Some(p),
        })
        .copied()
        .ok_or(TuneError::NoFeasiblePoint)
}

/// Footprint budget of [`precision_demo_space`].
pub const DEMO_BUDGET: u64 = 65_536;

/// hdiff on a 64x64x64 interior, `tx`, `ty` powers of two and `tz` in
/// `8..=64`, modeled on one OpenCAPI HBM PE. Under [`DEMO_BUDGET`] the best
/// tile for 4-byte elements is not the best tile for 2-byte elements.
pub fn precision_demo_space(bytes_per_elem: u64) -> SearchSpace {
    let domain = Dims3::new(68, 68, 64).expect("demo dims are valid");
    SearchSpace {
        tz: alloc::vec![8, 16, 32, 64],
        ..SearchSpace::new(Kernel::Hdiff, domain, Halo::DYCORE, bytes_per_elem)
    }
    .with_budget(Some(DEMO_BUDGET))
}

pub fn precision_demo_model() -> MachineModel {
    crate::perfmodel::preset("hbm_ocapi")
        .and_then(|p| p.model(Kernel::Hdiff))
        .expect("hbm_ocapi calibrates hdiff")
}
