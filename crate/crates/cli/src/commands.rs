//! Command implementations. Each writes its report to `out` and returns the
//! process exit code.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::json;
use wavelift_core::laurent::Mode;
use wavelift_core::parsim::{self, Buffering, TileConfig};
use wavelift_core::polyphase::Tolerance;
use wavelift_core::schemes::{build_scheme, cost_csv, cost_table, published_cost, verify_scheme, SchemeKind};
use wavelift_core::transform::{
    check_levels, forward, multi_level_forward, multi_level_inverse, pad_symmetric, BoundaryMode, Image,
};
use wavelift_core::wavelets::{get_wavelet, WaveletName};

use crate::pgm::{self, Pgm};
use crate::subband::SubbandFile;

/// Float tolerance for checking the irrational wavelet.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Round-trip error allowed on the 8-bit sample scale.
pub const ROUNDTRIP_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
    Markdown,
}

fn selected<T: Copy>(one: Option<T>, all: &[T]) -> Vec<T> {
    one.map_or_else(|| all.to_vec(), |x| vec![x])
}

pub fn verify(wavelet: Option<WaveletName>, scheme: Option<SchemeKind>, format: Format, out: &mut dyn Write) -> Result<i32> {
    let mut all_pass = true;
    let mut rows = Vec::new();
    for w in selected(wavelet, &WaveletName::ALL) {
        let spec = get_wavelet(w);
        let tol = match spec.mode() {
            Mode::Exact => Tolerance::Exact,
            Mode::Float => Tolerance::Abs(FLOAT_TOLERANCE),
        };
        for k in selected(scheme, &SchemeKind::ALL) {
            let reports = verify_scheme(&build_scheme(k, &spec)?, tol)?;
            let pass = reports.iter().all(|r| r.matches);
            let dev = reports.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
            let mismatch = reports
                .iter()
                .find_map(|r| r.first_mismatch)
                .map(|(i, j)| format!("{i},{j}"));
            all_pass &= pass;
            match format {
                Format::Json => rows.push(json!({
                    "wavelet": w.as_str(),
                    "scheme": k.as_str(),
                    "mode": spec.mode(),
                    "stages": reports.len(),
                    "max_deviation": dev,
                    "first_mismatch": mismatch,
                    "pass": pass,
                })),
                _ => writeln!(
                    out,
                    "{} {:<6} {:<16} {:<5} max_deviation={:e}{}",
                    if pass { "PASS" } else { "FAIL" },
                    w,
                    k,
                    spec.mode(),
                    dev,
                    mismatch.map(|m| format!(" first_mismatch={m}")).unwrap_or_default()
                )?,
            }
        }
    }
    if format == Format::Json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
    }
    Ok(if all_pass { 0 } else { 1 })
}

pub fn report_costs(format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let wavelets: Vec<_> = WaveletName::ALL.iter().map(|w| get_wavelet(*w)).collect();
    let table = cost_table(&wavelets, &SchemeKind::ALL)?;
    let mismatches: Vec<_> = table
        .iter()
        .filter(|r| {
            let name: WaveletName = r.wavelet.parse().expect("shipped wavelet");
            published_cost(name, r.kind) != (r.barriers, r.macs)
        })
        .collect();
    match format {
        Format::Csv => {
            write!(out, "{}", cost_csv(&table))?;
            for r in &mismatches {
                let (b, m) = published_cost(r.wavelet.parse()?, r.kind);
                writeln!(err, "note: {} {} differs from the published {b} barriers / {m} operations", r.wavelet, r.kind)?;
            }
        }
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&table)?)?,
        _ => {
            writeln!(out, "| Wavelet | Scheme | Barriers | Operations |")?;
            writeln!(out, "|---|---|---:|---:|")?;
            for r in &table {
                let flag = if mismatches.contains(&r) { "*" } else { "" };
                writeln!(out, "| {} | {} | {} | {}{flag} |", r.wavelet, r.kind.label(), r.barriers, r.macs)?;
            }
            writeln!(out)?;
            if mismatches.is_empty() {
                writeln!(out, "All {} cells match the published barrier and operation counts.", table.len())?;
            } else {
                for r in &mismatches {
                    let (b, m) = published_cost(r.wavelet.parse()?, r.kind);
                    writeln!(out, "\\* published: {b} barriers, {m} operations ({} {})", r.wavelet, r.kind.label())?;
                }
            }
        }
    }
    Ok(0)
}

pub fn report_memory(format: Format, out: &mut dyn Write) -> Result<i32> {
    let mut rows = Vec::new();
    for w in WaveletName::ALL {
        for k in SchemeKind::ALL {
            rows.push(parsim::memory_report(&build_scheme(k, &get_wavelet(w))?, w)?);
        }
    }
    let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?,
        Format::Csv => {
            writeln!(
                out,
                "wavelet,scheme,reads,writes,cells_single,cells_double,published_reads,published_writes,published_cells_single,published_cells_double,match"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.wavelet,
                    r.kind,
                    r.traffic.reads,
                    r.traffic.writes,
                    r.cells.single,
                    r.cells.double,
                    opt(r.published_traffic.map(|t| t.reads)),
                    opt(r.published_traffic.map(|t| t.writes)),
                    opt(r.published_cells.map(|c| c.0)),
                    opt(r.published_cells.map(|c| c.1)),
                    r.matches_published()
                )?;
            }
        }
        _ => {
            writeln!(out, "| Wavelet | Scheme | Reads | Writes | Cells (single) | Cells (double) |")?;
            writeln!(out, "|---|---|---:|---:|---:|---:|")?;
            for r in &rows {
                let flag = if r.matches_published() { "" } else { "*" };
                writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {}{flag} |",
                    r.wavelet,
                    r.kind.label(),
                    r.traffic.reads,
                    r.traffic.writes,
                    r.cells.single,
                    r.cells.double
                )?;
            }
        }
    }
    Ok(0)
}

#[derive(Debug, Clone)]
pub struct TransformOptions {
    pub wavelet: WaveletName,
    pub scheme: SchemeKind,
    pub levels: usize,
    pub boundary: BoundaryMode,
    pub scaling: bool,
    pub pad: bool,
}

/// Loads the image and pads it when asked to.
fn prepare(input: &Path, opts: &TransformOptions) -> Result<(Pgm, Image)> {
    let pgm = pgm::read(input).with_context(|| format!("reading {}", input.display()))?;
    let img = pgm.to_image();
    let img = if opts.pad {
        let multiple = 1usize
            .checked_shl(opts.levels as u32)
            .filter(|m| *m > 0)
            .context("too many levels")?;
        pad_symmetric(&img, multiple)
    } else {
        img
    };
    check_levels(img.width, img.height, opts.levels)
        .with_context(|| format!("{}x{} image (use --pad to extend it)", pgm.width, pgm.height))?;
    Ok((pgm, img))
}

pub fn transform(input: &Path, output: &Path, opts: &TransformOptions, out: &mut dyn Write) -> Result<i32> {
    let (pgm, img) = prepare(input, opts)?;
    let scheme = build_scheme(opts.scheme, &get_wavelet(opts.wavelet))?;
    let pyramid = multi_level_forward(&img, &scheme, opts.levels, opts.boundary, opts.scaling)?;
    let file = SubbandFile {
        wavelet: opts.wavelet,
        scheme: opts.scheme,
        boundary: opts.boundary,
        scaling: opts.scaling,
        width: img.width,
        height: img.height,
        crop_width: pgm.width,
        crop_height: pgm.height,
        pyramid,
    };
    file.write(output).with_context(|| format!("writing {}", output.display()))?;
    writeln!(
        out,
        "wrote {} ({} levels, coarsest planes {}x{})",
        output.display(),
        opts.levels,
        img.width >> opts.levels,
        img.height >> opts.levels
    )?;
    Ok(0)
}

pub fn inverse(input: &Path, output: &Path, maxval: u16, out: &mut dyn Write) -> Result<i32> {
    let file = SubbandFile::read(input).with_context(|| format!("reading {}", input.display()))?;
    let img = multi_level_inverse(&file.pyramid, &get_wavelet(file.wavelet), file.boundary, file.scaling)?;
    let img = img.crop(file.crop_width, file.crop_height);
    pgm::write(output, &Pgm::from_image(&img, maxval))?;
    writeln!(out, "wrote {} ({}x{})", output.display(), img.width, img.height)?;
    Ok(0)
}

pub fn roundtrip(input: &Path, opts: &TransformOptions, out: &mut dyn Write) -> Result<i32> {
    let (pgm, img) = prepare(input, opts)?;
    let wavelet = get_wavelet(opts.wavelet);
    let scheme = build_scheme(opts.scheme, &wavelet)?;
    let pyramid = multi_level_forward(&img, &scheme, opts.levels, opts.boundary, opts.scaling)?;
    let back = multi_level_inverse(&pyramid, &wavelet, opts.boundary, opts.scaling)?;
    let original = pgm.to_image();
    let err = back.crop(pgm.width, pgm.height).max_abs_diff(&original);
    let err8 = err * 256.0;
    let ok = err8 <= ROUNDTRIP_LIMIT;
    writeln!(
        out,
        "{} max_abs_error={err:e} max_abs_error_8bit={err8:e} limit={ROUNDTRIP_LIMIT:e}",
        if ok { "PASS" } else { "FAIL" }
    )?;
    Ok(if ok { 0 } else { 1 })
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub wavelet: WaveletName,
    pub scheme: SchemeKind,
    pub tile: (usize, usize),
    pub halo: Option<usize>,
    pub buffering: Buffering,
    pub boundary: BoundaryMode,
    /// 1-based index of the barrier to remove.
    pub break_barrier: Option<usize>,
    pub max_hazards: usize,
}

pub fn simulate(input: &Path, opts: &SimulateOptions, out: &mut dyn Write) -> Result<i32> {
    let img = pgm::read(input).with_context(|| format!("reading {}", input.display()))?.to_image();
    let scheme = build_scheme(opts.scheme, &get_wavelet(opts.wavelet))?;
    let mut steps = scheme.matrices()?;
    if let Some(n) = opts.break_barrier {
        let barriered: Vec<usize> = (0..steps.len()).filter(|i| steps[*i].needs_barrier).collect();
        let Some(&idx) = n.checked_sub(1).and_then(|i| barriered.get(i)) else {
            bail!("--break-barrier {n}: the scheme has {} barriers", barriered.len());
        };
        steps[idx].needs_barrier = false;
    }
    let cfg = TileConfig {
        tile_w: opts.tile.0,
        tile_h: opts.tile.1,
        halo: opts.halo,
        buffering: opts.buffering,
        boundary: opts.boundary,
    };
    let (q, trace) = parsim::simulate_steps(&img, &steps, &cfg)?;
    let reference = forward(&img, &scheme, opts.boundary, false)?;
    let shown: Vec<_> = trace.hazards.iter().take(opts.max_hazards).collect();
    let report = json!({
        "scheme": opts.scheme.as_str(),
        "wavelet": opts.wavelet.as_str(),
        "tile": [opts.tile.0, opts.tile.1],
        "halo": trace.halo,
        "tiles": trace.tiles,
        "buffering": opts.buffering,
        "boundary": opts.boundary,
        "barriers": trace.barriers_executed,
        "split_barriers": trace.split_barriers,
        "step_epochs": trace.step_epochs,
        "local_reads": trace.local_reads,
        "local_writes": trace.local_writes,
        "cells_per_quadruple": trace.cells_per_quadruple,
        "max_abs_diff_vs_forward": q.max_abs_diff(&reference),
        "hazard_count": trace.hazards.len(),
        "hazards": shown,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(if trace.hazards.is_empty() { 0 } else { 1 })
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub size: (usize, usize),
    pub wavelet: WaveletName,
    pub scheme: Option<SchemeKind>,
    pub reps: usize,
    pub boundary: BoundaryMode,
}

pub fn bench(opts: &BenchOptions, format: Format, out: &mut dyn Write) -> Result<i32> {
    if opts.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let (w, h) = opts.size;
    let img = Image::from_fn(w, h, |r, c| ((r * 7919 + c * 104729) % 251) as f64 / 251.0);
    let bytes = (w * h * 8) as f64;
    if format == Format::Csv {
        writeln!(out, "scheme,wavelet,size,mbps")?;
    }
    for kind in selected(opts.scheme, &SchemeKind::ALL) {
        let scheme = build_scheme(kind, &get_wavelet(opts.wavelet))?;
        let mut times = Vec::with_capacity(opts.reps);
        for _ in 0..opts.reps {
            let t = Instant::now();
            std::hint::black_box(forward(&img, &scheme, opts.boundary, true)?);
            times.push(t.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        let median = times[times.len() / 2].max(1e-9);
        let mbps = bytes / median / 1e6;
        match format {
            Format::Csv => writeln!(out, "{kind},{},{w}x{h},{mbps:.2}", opts.wavelet)?,
            _ => writeln!(out, "{:<16} {} {w}x{h}: {mbps:.2} MB/s (median of {})", kind, opts.wavelet, opts.reps)?,
        }
    }
    Ok(0)
}
