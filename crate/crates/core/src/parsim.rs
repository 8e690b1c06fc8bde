//! Simulated execution of a scheme on a tiled parallel machine.
//!
//! The image is cut into tiles of quadruples; each tile is a work-group and
//! each quadruple (including the halo ring) is handled by one thread. Steps are
//! grouped into epochs separated by barriers. Inside an epoch a thread keeps
//! its own quadruple in registers and reads neighbouring quadruples from
//! shared memory, which only receives the register contents when the epoch
//! ends. Reading a neighbour's cell that was modified earlier in the same
//! epoch therefore returns a stale value; such reads are reported as hazards.
//!
//! Every shared cell carries a version stamp `(epoch, writer)`. The initial
//! load stamps each cell with epoch 0 and its owning thread.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::polyphase::{cumulative_reach, Component, StepMatrix};
use crate::schemes::{Scheme, SchemeError, SchemeKind};
use crate::transform::{polyphase_split, BoundaryMode, Image, QuadGrid, TransformError};
use crate::wavelets::WaveletName;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("tile size {tile_w}x{tile_h} must be even and positive")]
    BadTile { tile_w: usize, tile_h: usize },
    #[error("halo {halo} leaves cells unloaded for this scheme (the safe default is {required})")]
    InsufficientHalo { halo: usize, required: usize },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Buffering {
    Single,
    #[default]
    Double,
}

impl std::str::FromStr for Buffering {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Buffering::Single),
            "double" => Ok(Buffering::Double),
            _ => Err(format!("unknown buffering mode '{s}'")),
        }
    }
}

/// Tile geometry in quadruples (component-grid units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TileConfig {
    pub tile_w: usize,
    pub tile_h: usize,
    /// `None` selects [`required_halo`].
    pub halo: Option<usize>,
    pub buffering: Buffering,
    pub boundary: BoundaryMode,
}

impl TileConfig {
    pub fn new(tile_w: usize, tile_h: usize, buffering: Buffering) -> TileConfig {
        TileConfig {
            tile_w,
            tile_h,
            halo: None,
            buffering,
            boundary: BoundaryMode::Periodic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub component: Component,
    pub row: i64,
    pub col: i64,
}

/// Positions are global quadruple coordinates before boundary mapping, so
/// halo threads of different tiles stay distinguishable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hazard {
    pub step: usize,
    pub tile: usize,
    pub reader: (i64, i64),
    pub cell: Cell,
    pub writer: (i64, i64),
}

/// A shared-memory read whose cell had already been written in the reader's
/// epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SameEpochRead {
    pub step: usize,
    pub epoch: u32,
    pub tile: usize,
    pub reader: (i64, i64),
    pub cell: Cell,
    pub writer: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecTrace {
    pub buffering: Buffering,
    pub halo: usize,
    pub tiles: usize,
    /// Barriers per work-group, including split barriers in single mode.
    pub barriers_executed: usize,
    pub split_barriers: usize,
    /// Epoch in which each step ran.
    pub step_epochs: Vec<u32>,
    pub same_epoch_reads: Vec<SameEpochRead>,
    pub hazards: Vec<Hazard>,
    pub local_reads: usize,
    pub local_writes: usize,
    pub cells_per_quadruple: usize,
}

/// Reads that observed a write by another thread in the same epoch.
pub fn detect_hazards(trace: &ExecTrace) -> Vec<Hazard> {
    trace
        .same_epoch_reads
        .iter()
        .filter(|r| r.writer != r.reader)
        .map(|r| Hazard {
            step: r.step,
            tile: r.tile,
            reader: r.reader,
            cell: r.cell,
            writer: r.writer,
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Tap {
    src: usize,
    dm: i64,
    dn: i64,
    coef: f64,
}

struct CompiledStep {
    barrier: bool,
    /// Taps per output component; `None` for identity rows.
    rows: [Option<Vec<Tap>>; 4],
}

fn compile(step: &StepMatrix) -> CompiledStep {
    let rows = std::array::from_fn(|i| {
        if step.is_identity_row(i) {
            return None;
        }
        let mut taps = Vec::new();
        for (j, e) in step.entries[i].iter().enumerate() {
            for ((km, kn), c) in e.terms() {
                taps.push(Tap {
                    src: j,
                    dm: *km as i64,
                    dn: *kn as i64,
                    coef: c.to_f64(),
                });
            }
        }
        Some(taps)
    });
    CompiledStep {
        barrier: step.needs_barrier,
        rows,
    }
}

/// Halo needed so that every tile interior is computed from valid data:
/// the sum over steps of each step's largest shift.
pub fn required_halo(steps: &[StepMatrix]) -> usize {
    cumulative_reach(steps)
}

/// Epoch boundaries: indices of steps that start a new epoch.
fn epochs(steps: &[StepMatrix]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, s) in steps.iter().enumerate() {
        if s.needs_barrier && i > start {
            out.push(start..i);
            start = i;
        }
    }
    if start < steps.len() {
        out.push(start..steps.len());
    }
    out
}

/// Components read from a neighbouring quadruple (nonzero shift).
fn shared_reads(step: &StepMatrix) -> BTreeSet<(usize, (i32, i32))> {
    let mut out = BTreeSet::new();
    for i in 0..4 {
        if step.is_identity_row(i) {
            continue;
        }
        for (j, e) in step.entries[i].iter().enumerate() {
            for (k, _) in e.terms() {
                if *k != (0, 0) {
                    out.insert((j, *k));
                }
            }
        }
    }
    out
}

fn modified(step: &StepMatrix) -> BTreeSet<usize> {
    (0..4).filter(|i| !step.is_identity_row(*i)).collect()
}

/// Whether an epoch overwrites a component it also reads from shared memory,
/// which with a single buffer requires a barrier between reads and writes.
fn needs_split(steps: &[StepMatrix]) -> bool {
    let read: BTreeSet<usize> = steps.iter().flat_map(|s| shared_reads(s).into_iter().map(|(j, _)| j)).collect();
    steps.iter().any(|s| modified(s).iter().any(|c| read.contains(c)))
}

/// Executes the steps of `scheme` (without scaling) on `img`.
pub fn simulate(img: &Image, scheme: &Scheme, cfg: &TileConfig) -> Result<(QuadGrid, ExecTrace), SimError> {
    let steps = scheme.matrices()?;
    simulate_steps(img, &steps, cfg)
}

pub fn simulate_steps(img: &Image, steps: &[StepMatrix], cfg: &TileConfig) -> Result<(QuadGrid, ExecTrace), SimError> {
    if cfg.tile_w == 0 || cfg.tile_h == 0 || !cfg.tile_w.is_multiple_of(2) || !cfg.tile_h.is_multiple_of(2) {
        return Err(SimError::BadTile {
            tile_w: cfg.tile_w,
            tile_h: cfg.tile_h,
        });
    }
    let global = polyphase_split(img)?;
    let required = required_halo(steps);
    let halo = cfg.halo.unwrap_or(required);
    let compiled: Vec<CompiledStep> = steps.iter().map(compile).collect();

    let epoch_ranges = epochs(steps);
    let split_barriers = match cfg.buffering {
        Buffering::Single => epoch_ranges.iter().filter(|r| needs_split(&steps[(*r).clone()])).count(),
        Buffering::Double => 0,
    };
    let traffic = traffic_report(steps);
    let cells = cells_report(steps);

    let mut out = QuadGrid::zeros(global.width, global.height);
    let mut trace = ExecTrace {
        buffering: cfg.buffering,
        halo,
        tiles: 0,
        barriers_executed: steps.iter().filter(|s| s.needs_barrier).count() + split_barriers,
        split_barriers,
        step_epochs: Vec::with_capacity(steps.len()),
        same_epoch_reads: Vec::new(),
        hazards: Vec::new(),
        local_reads: traffic.reads,
        local_writes: traffic.writes,
        cells_per_quadruple: match cfg.buffering {
            Buffering::Single => cells.single,
            Buffering::Double => cells.double,
        },
    };
    let mut epoch = 0u32;
    for s in steps {
        if s.needs_barrier {
            epoch += 1;
        }
        trace.step_epochs.push(epoch);
    }

    let mut insufficient = false;
    let mut tile = 0;
    for r0 in (0..global.height).step_by(cfg.tile_h) {
        for c0 in (0..global.width).step_by(cfg.tile_w) {
            let th = cfg.tile_h.min(global.height - r0);
            let tw = cfg.tile_w.min(global.width - c0);
            let t = TileRun::new(&global, cfg.boundary, tile, (r0, c0), (th, tw), halo);
            insufficient |= t.run(&compiled, &trace.step_epochs, &mut out, &mut trace.same_epoch_reads);
            tile += 1;
        }
    }
    trace.tiles = tile;
    if insufficient {
        return Err(SimError::InsufficientHalo { halo, required });
    }
    trace.hazards = detect_hazards(&trace);
    Ok((out, trace))
}

struct TileRun {
    tile: usize,
    origin: (i64, i64),
    size: (usize, usize),
    halo: usize,
    lw: usize,
    lh: usize,
    shared: [Vec<f64>; 4],
    shared_valid: [Vec<bool>; 4],
    /// `(epoch, writer thread index)` of the last write to each shared cell.
    stamp: [Vec<(u32, usize)>; 4],
}

impl TileRun {
    fn new(
        global: &QuadGrid,
        boundary: BoundaryMode,
        tile: usize,
        (r0, c0): (usize, usize),
        (th, tw): (usize, usize),
        halo: usize,
    ) -> TileRun {
        let (lh, lw) = (th + 2 * halo, tw + 2 * halo);
        let mut shared: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; lw * lh]);
        for comp in Component::ALL {
            let plane = &mut shared[comp.index()];
            for lr in 0..lh {
                let gr = boundary.map_component(r0 as i64 + lr as i64 - halo as i64, comp.row_phase(), global.height);
                for lc in 0..lw {
                    let gc =
                        boundary.map_component(c0 as i64 + lc as i64 - halo as i64, comp.col_phase(), global.width);
                    plane[lr * lw + lc] = global.get(comp, gr, gc);
                }
            }
        }
        TileRun {
            tile,
            origin: (r0 as i64 - halo as i64, c0 as i64 - halo as i64),
            size: (th, tw),
            halo,
            lw,
            lh,
            shared,
            shared_valid: std::array::from_fn(|_| vec![true; lw * lh]),
            stamp: std::array::from_fn(|_| (0..lw * lh).map(|t| (0, t)).collect()),
        }
    }

    fn global_pos(&self, idx: usize) -> (i64, i64) {
        (self.origin.0 + (idx / self.lw) as i64, self.origin.1 + (idx % self.lw) as i64)
    }

    /// Runs all steps; returns true if a tile-interior result is invalid.
    fn run(
        mut self,
        steps: &[CompiledStep],
        step_epochs: &[u32],
        out: &mut QuadGrid,
        log: &mut Vec<SameEpochRead>,
    ) -> bool {
        let n = self.lw * self.lh;
        let mut regs: Vec<[f64; 4]> = (0..n).map(|t| std::array::from_fn(|c| self.shared[c][t])).collect();
        let mut regs_valid: Vec<[bool; 4]> = vec![[true; 4]; n];
        let mut next = regs.clone();
        let mut next_valid = regs_valid.clone();

        for (s, step) in steps.iter().enumerate() {
            let epoch = step_epochs[s];
            if step.barrier && s > 0 {
                self.flush(&regs, &regs_valid, step_epochs[s - 1]);
            }
            for t in 0..n {
                let (lr, lc) = ((t / self.lw) as i64, (t % self.lw) as i64);
                for (i, taps) in step.rows.iter().enumerate() {
                    let Some(taps) = taps else {
                        next[t][i] = regs[t][i];
                        next_valid[t][i] = regs_valid[t][i];
                        continue;
                    };
                    let mut acc = 0.0;
                    let mut valid = true;
                    for tap in taps {
                        if tap.dm == 0 && tap.dn == 0 {
                            acc += tap.coef * regs[t][tap.src];
                            valid &= regs_valid[t][tap.src];
                            continue;
                        }
                        let (rr, cc) = (lr - tap.dn, lc - tap.dm);
                        if rr < 0 || cc < 0 || rr >= self.lh as i64 || cc >= self.lw as i64 {
                            valid = false;
                            continue;
                        }
                        let idx = rr as usize * self.lw + cc as usize;
                        acc += tap.coef * self.shared[tap.src][idx];
                        valid &= self.shared_valid[tap.src][idx];
                        let (w_epoch, writer) = self.stamp[tap.src][idx];
                        if w_epoch == epoch {
                            log.push(SameEpochRead {
                                step: s,
                                epoch,
                                tile: self.tile,
                                reader: self.global_pos(t),
                                cell: Cell {
                                    component: Component::ALL[tap.src],
                                    row: self.origin.0 + rr,
                                    col: self.origin.1 + cc,
                                },
                                writer: self.global_pos(writer),
                            });
                        }
                    }
                    next[t][i] = acc;
                    next_valid[t][i] = valid;
                }
            }
            std::mem::swap(&mut regs, &mut next);
            std::mem::swap(&mut regs_valid, &mut next_valid);
            // stamp the logical writes of this step
            for (i, taps) in step.rows.iter().enumerate() {
                if taps.is_some() {
                    for t in 0..n {
                        self.stamp[i][t] = (epoch, t);
                    }
                }
            }
        }

        let mut insufficient = false;
        let (th, tw) = self.size;
        for r in 0..th {
            for c in 0..tw {
                let t = (r + self.halo) * self.lw + c + self.halo;
                let (gr, gc) = (self.origin.0 + (r + self.halo) as i64, self.origin.1 + (c + self.halo) as i64);
                for comp in 0..4 {
                    insufficient |= !regs_valid[t][comp];
                    out.planes[comp][gr as usize * out.width + gc as usize] = regs[t][comp];
                }
            }
        }
        insufficient
    }

    /// Publishes register contents to shared memory at an epoch boundary.
    fn flush(&mut self, regs: &[[f64; 4]], valid: &[[bool; 4]], _epoch: u32) {
        for (t, (q, v)) in regs.iter().zip(valid).enumerate() {
            for c in 0..4 {
                self.shared[c][t] = q[c];
                self.shared_valid[c][t] = v[c];
            }
        }
    }
}

/// Per-quadruple shared-memory traffic under the counting model:
///
/// * reads: distinct `(component, shift)` cells a step fetches from a
///   neighbour; a fetched cell stays cached until its component is modified;
/// * writes: components published to shared memory for later epochs; a
///   component counts again only after it has been modified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrafficReport {
    pub reads: usize,
    pub writes: usize,
}

pub fn traffic_report(steps: &[StepMatrix]) -> TrafficReport {
    let mut reads = 0;
    let mut cache: BTreeSet<(usize, (i32, i32))> = BTreeSet::new();
    for s in steps {
        for cell in shared_reads(s) {
            if cache.insert(cell) {
                reads += 1;
            }
        }
        let m = modified(s);
        cache.retain(|(c, _)| !m.contains(c));
    }
    let mut writes = 0;
    let mut published: BTreeSet<usize> = BTreeSet::new();
    for (need, mods) in epoch_needs(steps) {
        writes += need.difference(&published).count();
        published.extend(need);
        published.retain(|c| !mods.contains(c));
    }
    TrafficReport { reads, writes }
}

/// For each epoch: components read from neighbours, and components modified.
fn epoch_needs(steps: &[StepMatrix]) -> Vec<(BTreeSet<usize>, BTreeSet<usize>)> {
    epochs(steps)
        .into_iter()
        .map(|r| {
            let need = steps[r.clone()]
                .iter()
                .flat_map(|s| shared_reads(s).into_iter().map(|(j, _)| j))
                .collect();
            let mods = steps[r].iter().flat_map(modified).collect();
            (need, mods)
        })
        .collect()
}

/// Shared cells a thread keeps live at once: one epoch's inputs with a
/// single buffer, and additionally the next epoch's newly published inputs
/// with two buffers. At least the resident quadruple slot is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellsReport {
    pub single: usize,
    pub double: usize,
}

pub fn cells_report(steps: &[StepMatrix]) -> CellsReport {
    let needs = epoch_needs(steps);
    let mut single = 1;
    let mut double = 1;
    let mut published: BTreeSet<usize> = BTreeSet::new();
    let mut fresh = Vec::with_capacity(needs.len());
    for (need, mods) in &needs {
        fresh.push(need.difference(&published).count());
        published.extend(need.iter().copied());
        published.retain(|c| !mods.contains(c));
    }
    for (e, (need, _)) in needs.iter().enumerate() {
        single = single.max(need.len());
        let following = fresh.get(e + 1).copied().unwrap_or(0);
        double = double.max(need.len() + following);
    }
    CellsReport { single, double }
}

/// Published cells per quadruple as `(single, double, double when stages
/// are connected)`.
pub fn published_cells(kind: SchemeKind) -> Option<(usize, usize, usize)> {
    Some(match kind {
        SchemeKind::Sweldens => (2, 3, 3),
        SchemeKind::Iwahashi => (3, 4, 4),
        SchemeKind::IwahashiStar => (3, 4, 6),
        SchemeKind::Explosive => (2, 3, 3),
        SchemeKind::ExplosiveStar => (2, 3, 3),
        SchemeKind::Monolithic => (3, 6, 6),
        SchemeKind::MonolithicStar => (3, 6, 6),
        SchemeKind::Polyphase => (4, 4, 8),
        SchemeKind::PolyphaseStar => (4, 4, 8),
        SchemeKind::Convolution => return None,
    })
}

/// Published shared-memory traffic `(reads, writes)` for a shipped wavelet.
pub fn published_traffic(kind: SchemeKind, wavelet: WaveletName) -> Option<TrafficReport> {
    let k = match wavelet {
        WaveletName::Cdf97 => 2,
        _ => 1,
    };
    let idx = SchemeKind::ALL.iter().position(|x| *x == kind)?;
    if idx >= 9 {
        return None;
    }
    let reads_per_stage = match wavelet {
        WaveletName::Dd137 => [24, 42, 42, 42, 42, 42, 42, 117, 117],
        _ => [8, 10, 10, 10, 10, 10, 10, 21, 12],
    };
    let writes = match kind {
        SchemeKind::Sweldens => 1 + 4 * k,
        SchemeKind::Iwahashi => 2 + 4 * k,
        SchemeKind::IwahashiStar | SchemeKind::Monolithic | SchemeKind::MonolithicStar => 6 * k,
        _ => 4 * k,
    };
    Some(TrafficReport {
        reads: reads_per_stage[idx] * k,
        writes,
    })
}

/// One row of the traffic/cells comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryReport {
    pub kind: SchemeKind,
    pub wavelet: String,
    pub traffic: TrafficReport,
    pub cells: CellsReport,
    pub published_traffic: Option<TrafficReport>,
    pub published_cells: Option<(usize, usize)>,
}

impl MemoryReport {
    pub fn matches_published(&self) -> bool {
        self.published_traffic.is_none_or(|p| p == self.traffic)
            && self
                .published_cells
                .is_none_or(|(s, d)| s == self.cells.single && d == self.cells.double)
    }
}

pub fn memory_report(scheme: &Scheme, wavelet: WaveletName) -> Result<MemoryReport, SchemeError> {
    let steps = scheme.matrices()?;
    let connected = scheme.wavelet.stages.len() > 1;
    Ok(MemoryReport {
        kind: scheme.kind,
        wavelet: scheme.wavelet.name.clone(),
        traffic: traffic_report(&steps),
        cells: cells_report(&steps),
        published_traffic: published_traffic(scheme.kind, wavelet),
        published_cells: published_cells(scheme.kind).map(|(s, d, dc)| (s, if connected { dc } else { d })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::Mode;
    use crate::schemes::build_scheme;
    use crate::transform::forward;
    use crate::wavelets::get_wavelet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..w * h).map(|_| rng.gen_range(0.0..1.0)).collect();
        Image::new(w, h, samples).unwrap()
    }

    fn scheme(kind: SchemeKind, w: WaveletName) -> Scheme {
        build_scheme(kind, &get_wavelet(w)).unwrap()
    }

    #[test]
    fn monolithic_double_matches_forward() {
        let img = random_image(64, 64, 1);
        let s = scheme(SchemeKind::Monolithic, WaveletName::Cdf53);
        let (q, trace) = simulate(&img, &s, &TileConfig::new(8, 8, Buffering::Double)).unwrap();
        let reference = forward(&img, &s, BoundaryMode::Periodic, false).unwrap();
        assert!(q.max_abs_diff(&reference) <= 1e-12);
        assert_eq!(trace.barriers_executed, 2);
        assert!(trace.hazards.is_empty());
    }

    #[test]
    fn sweldens_single_buffering() {
        let img = random_image(16, 16, 2);
        let s = scheme(SchemeKind::Sweldens, WaveletName::Cdf53);
        let (_, trace) = simulate(&img, &s, &TileConfig::new(4, 4, Buffering::Single)).unwrap();
        assert!(trace.hazards.is_empty());
        assert_eq!(trace.barriers_executed, 4);
    }

    #[test]
    fn single_tile_equals_many_tiles() {
        let img = random_image(32, 16, 3);
        let s = scheme(SchemeKind::Explosive, WaveletName::Dd137);
        let (one, _) = simulate(&img, &s, &TileConfig::new(16, 8, Buffering::Double)).unwrap();
        let (many, _) = simulate(&img, &s, &TileConfig::new(4, 2, Buffering::Double)).unwrap();
        assert!(one.max_abs_diff(&many) <= 1e-12);
    }

    #[test]
    fn cleared_barrier_is_a_hazard() {
        let img = random_image(16, 16, 4);
        let s = scheme(SchemeKind::Monolithic, WaveletName::Cdf53);
        let mut steps = s.matrices().unwrap();
        steps[1].needs_barrier = false;
        let (q, trace) = simulate_steps(&img, &steps, &TileConfig::new(4, 4, Buffering::Double)).unwrap();
        assert!(!trace.hazards.is_empty());
        assert!(trace.hazards.iter().all(|h| h.step == 1));
        let reference = forward(&img, &s, BoundaryMode::Periodic, false).unwrap();
        assert!(q.max_abs_diff(&reference) > 1e-6, "stale reads change the result");
    }

    #[test]
    fn identity_steps_never_race() {
        let img = random_image(8, 8, 5);
        let steps = vec![StepMatrix::identity(Mode::Exact).with_barrier(false); 3];
        let (q, trace) = simulate_steps(&img, &steps, &TileConfig::new(2, 2, Buffering::Single)).unwrap();
        assert!(trace.hazards.is_empty());
        assert_eq!(trace.barriers_executed, 0);
        assert_eq!(q, polyphase_split(&img).unwrap());
        assert_eq!(traffic_report(&steps), TrafficReport { reads: 0, writes: 0 });
        assert_eq!(cells_report(&steps), CellsReport { single: 1, double: 1 });
    }

    #[test]
    fn small_halo_is_reported() {
        let img = random_image(16, 16, 6);
        let s = scheme(SchemeKind::Sweldens, WaveletName::Cdf53);
        let mut cfg = TileConfig::new(4, 4, Buffering::Double);
        cfg.halo = Some(0);
        assert!(matches!(simulate(&img, &s, &cfg), Err(SimError::InsufficientHalo { .. })));
        cfg.halo = Some(6);
        assert!(simulate(&img, &s, &cfg).is_ok());
    }

    #[test]
    fn odd_tiles_rejected() {
        let img = random_image(8, 8, 7);
        let s = scheme(SchemeKind::Sweldens, WaveletName::Cdf53);
        assert!(matches!(
            simulate(&img, &s, &TileConfig::new(3, 4, Buffering::Double)),
            Err(SimError::BadTile { .. })
        ));
    }

    #[test]
    fn sweldens_traffic() {
        let s = scheme(SchemeKind::Sweldens, WaveletName::Cdf53);
        let steps = s.matrices().unwrap();
        assert_eq!(traffic_report(&steps), TrafficReport { reads: 8, writes: 5 });
        assert_eq!(cells_report(&steps), CellsReport { single: 2, double: 3 });
    }

    #[test]
    fn explosive_traffic() {
        let s = scheme(SchemeKind::Explosive, WaveletName::Cdf53);
        let t = traffic_report(&s.matrices().unwrap());
        assert_eq!(t, TrafficReport { reads: 10, writes: 4 });
    }

    #[test]
    fn monolithic_cells() {
        let s = scheme(SchemeKind::Monolithic, WaveletName::Cdf53);
        assert_eq!(cells_report(&s.matrices().unwrap()).double, 6);
    }

    #[test]
    fn memory_model_matches_published_tables() {
        for w in WaveletName::ALL {
            for k in SchemeKind::ALL {
                let r = memory_report(&scheme(k, w), w).unwrap();
                assert!(r.matches_published(), "{w} {k}: {r:?}");
            }
        }
    }
}
