//! Executing schemes on images.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::laurent::LaurentPoly2;
use crate::polyphase::{cumulative_reach, sweldens_steps, Component, PolyphaseError, StepMatrix};
use crate::schemes::{Scheme, SchemeError, SchemeKind, Step};
use crate::wavelets::WaveletSpec;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("image dimensions {width}x{height} must be even")]
    OddDimension { width: usize, height: usize },
    #[error("image dimensions {width}x{height} are not divisible by 2^{levels}")]
    NotDivisible { width: usize, height: usize, levels: usize },
    #[error("expected {expected} samples, got {actual}")]
    SampleCount { expected: usize, actual: usize },
    #[error("at least one level is required")]
    NoLevels,
    #[error("empty image")]
    Empty,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Polyphase(#[from] PolyphaseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    #[default]
    Periodic,
    /// Whole-point symmetric extension: `x[-1] = x[1]`.
    Symmetric,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Symmetric => "symmetric",
        }
    }

    /// Maps a possibly out-of-range full-resolution index into `0..len`.
    pub fn map_full(self, f: i64, len: usize) -> usize {
        let n = len as i64;
        if (0..n).contains(&f) {
            return f as usize;
        }
        match self {
            BoundaryMode::Periodic => f.rem_euclid(n) as usize,
            BoundaryMode::Symmetric => {
                if n == 1 {
                    return 0;
                }
                let period = 2 * n - 2;
                let r = f.rem_euclid(period);
                (if r >= n { period - r } else { r }) as usize
            }
        }
    }

    /// Maps index `i` of a component grid of length `len` whose samples sit at
    /// full-resolution positions `2i + parity`.
    pub fn map_component(self, i: i64, parity: usize, len: usize) -> usize {
        let n = len as i64;
        if (0..n).contains(&i) {
            return i as usize;
        }
        match self {
            BoundaryMode::Periodic => i.rem_euclid(n) as usize,
            BoundaryMode::Symmetric => self.map_full(2 * i + parity as i64, 2 * len) / 2,
        }
    }
}

impl std::str::FromStr for BoundaryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(BoundaryMode::Periodic),
            "symmetric" => Ok(BoundaryMode::Symmetric),
            _ => Err(format!("unknown boundary mode '{s}'")),
        }
    }
}

/// Row-major grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Image, TransformError> {
        if samples.len() != width * height {
            return Err(TransformError::SampleCount {
                expected: width * height,
                actual: samples.len(),
            });
        }
        Ok(Image { width, height, samples })
    }

    pub fn zeros(width: usize, height: usize) -> Image {
        Image {
            width,
            height,
            samples: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Image {
        let samples = (0..height).flat_map(|r| (0..width).map(move |c| (r, c))).map(|(r, c)| f(r, c)).collect();
        Image { width, height, samples }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.width + col]
    }

    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        max_abs_diff(&self.samples, &other.samples)
    }

    /// Top-left `width x height` region.
    pub fn crop(&self, width: usize, height: usize) -> Image {
        Image::from_fn(width, height, |r, c| self.get(r, c))
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The four polyphase components, each `width x height`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    pub width: usize,
    pub height: usize,
    pub planes: [Vec<f64>; 4],
}

impl QuadGrid {
    pub fn zeros(width: usize, height: usize) -> QuadGrid {
        QuadGrid {
            width,
            height,
            planes: std::array::from_fn(|_| vec![0.0; width * height]),
        }
    }

    pub fn plane(&self, c: Component) -> &[f64] {
        &self.planes[c.index()]
    }

    pub fn plane_mut(&mut self, c: Component) -> &mut [f64] {
        &mut self.planes[c.index()]
    }

    pub fn get(&self, c: Component, row: usize, col: usize) -> f64 {
        self.planes[c.index()][row * self.width + col]
    }

    pub fn max_abs_diff(&self, other: &QuadGrid) -> f64 {
        (0..4)
            .map(|i| max_abs_diff(&self.planes[i], &other.planes[i]))
            .fold(0.0, f64::max)
    }

    /// Largest deviation ignoring `margin` rows and columns at every edge of
    /// the component grid.
    pub fn max_abs_diff_interior(&self, other: &QuadGrid, margin: usize) -> f64 {
        let mut worst = 0.0f64;
        for p in 0..4 {
            for r in margin..self.height.saturating_sub(margin) {
                for c in margin..self.width.saturating_sub(margin) {
                    let i = r * self.width + c;
                    worst = worst.max((self.planes[p][i] - other.planes[p][i]).abs());
                }
            }
        }
        worst
    }
}

fn check_even(width: usize, height: usize) -> Result<(), TransformError> {
    if width == 0 || height == 0 {
        return Err(TransformError::Empty);
    }
    if !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(TransformError::OddDimension { width, height });
    }
    Ok(())
}

pub fn polyphase_split(img: &Image) -> Result<QuadGrid, TransformError> {
    check_even(img.width, img.height)?;
    let (w, h) = (img.width / 2, img.height / 2);
    let mut q = QuadGrid::zeros(w, h);
    for comp in Component::ALL {
        let (pr, pc) = (comp.row_phase(), comp.col_phase());
        let plane = &mut q.planes[comp.index()];
        for r in 0..h {
            for c in 0..w {
                plane[r * w + c] = img.get(2 * r + pr, 2 * c + pc);
            }
        }
    }
    Ok(q)
}

pub fn polyphase_merge(q: &QuadGrid) -> Image {
    let mut img = Image::zeros(2 * q.width, 2 * q.height);
    for comp in Component::ALL {
        let (pr, pc) = (comp.row_phase(), comp.col_phase());
        for r in 0..q.height {
            for c in 0..q.width {
                img.samples[(2 * r + pr) * img.width + 2 * c + pc] = q.get(comp, r, c);
            }
        }
    }
    img
}

/// One float tap: reads `x_src[r - dn][c - dm]`.
#[derive(Debug, Clone, Copy)]
struct Tap {
    src: usize,
    dm: i64,
    dn: i64,
    coef: f64,
}

fn row_taps(m: &StepMatrix, row: usize) -> Vec<Tap> {
    let mut taps = Vec::new();
    for (j, e) in m.entries[row].iter().enumerate() {
        for ((km, kn), c) in e.terms() {
            taps.push(Tap {
                src: j,
                dm: *km as i64,
                dn: *kn as i64,
                coef: c.to_f64(),
            });
        }
    }
    taps
}

/// Applies `y = M x` out of place.
pub fn apply_step(q: &QuadGrid, step: &StepMatrix, boundary: BoundaryMode) -> QuadGrid {
    let (w, h) = (q.width, q.height);
    let mut out = q.clone();
    for (i, plane) in out.planes.iter_mut().enumerate() {
        if step.is_identity_row(i) {
            continue;
        }
        let taps = row_taps(step, i);
        plane.par_chunks_mut(w).enumerate().for_each(|(r, row)| {
            for (c, y) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for t in &taps {
                    let comp = Component::ALL[t.src];
                    let rr = boundary.map_component(r as i64 - t.dn, comp.row_phase(), h);
                    let cc = boundary.map_component(c as i64 - t.dm, comp.col_phase(), w);
                    acc += t.coef * q.planes[t.src][rr * w + cc];
                }
                *y = acc;
            }
        });
    }
    out
}

/// Applies `steps` in order.
///
/// With symmetric extension the component grids are extended once by the
/// cumulative reach of the steps, the steps run on the extended grids and the
/// result is cropped. This equals per-step reflection whenever the
/// intermediate results stay symmetric, and it keeps schemes with one-sided
/// operators consistent with the others at the image border.
pub fn apply_steps(q: &QuadGrid, steps: &[StepMatrix], boundary: BoundaryMode) -> QuadGrid {
    match boundary {
        BoundaryMode::Periodic => steps
            .iter()
            .fold(q.clone(), |acc, s| apply_step(&acc, s, BoundaryMode::Periodic)),
        BoundaryMode::Symmetric => {
            let m = cumulative_reach(steps);
            let mut ext = extend(q, m, boundary);
            for s in steps {
                ext = apply_step(&ext, s, BoundaryMode::Periodic);
            }
            crop(&ext, m, q.width, q.height)
        }
    }
}

/// Grows every plane by `margin` cells on each side.
pub fn extend(q: &QuadGrid, margin: usize, boundary: BoundaryMode) -> QuadGrid {
    let (w, h) = (q.width + 2 * margin, q.height + 2 * margin);
    let mut out = QuadGrid::zeros(w, h);
    for comp in Component::ALL {
        let plane = &mut out.planes[comp.index()];
        for r in 0..h {
            let sr = boundary.map_component(r as i64 - margin as i64, comp.row_phase(), q.height);
            for c in 0..w {
                let sc = boundary.map_component(c as i64 - margin as i64, comp.col_phase(), q.width);
                plane[r * w + c] = q.get(comp, sr, sc);
            }
        }
    }
    out
}

fn crop(q: &QuadGrid, margin: usize, width: usize, height: usize) -> QuadGrid {
    let mut out = QuadGrid::zeros(width, height);
    for p in 0..4 {
        for r in 0..height {
            let src = (r + margin) * q.width + margin;
            out.planes[p][r * width..(r + 1) * width].copy_from_slice(&q.planes[p][src..src + width]);
        }
    }
    out
}

/// Evaluates the four 2-D analysis filters directly on the image at the
/// subsampled output positions.
pub fn convolve_direct(img: &Image, filters: &[LaurentPoly2; 4], boundary: BoundaryMode) -> Result<QuadGrid, TransformError> {
    check_even(img.width, img.height)?;
    let (w, h) = (img.width / 2, img.height / 2);
    let mut q = QuadGrid::zeros(w, h);
    for comp in Component::ALL {
        let taps: Vec<(i64, i64, f64)> = filters[comp.index()]
            .terms()
            .map(|((tm, tn), c)| (*tm as i64, *tn as i64, c.to_f64()))
            .collect();
        let (pr, pc) = (comp.row_phase() as i64, comp.col_phase() as i64);
        q.planes[comp.index()]
            .par_chunks_mut(w)
            .enumerate()
            .for_each(|(r, row)| {
                for (c, y) in row.iter_mut().enumerate() {
                    let (cr, cc) = (2 * r as i64 + pr, 2 * c as i64 + pc);
                    let mut acc = 0.0;
                    for &(tm, tn, coef) in &taps {
                        let rr = boundary.map_full(cr - tn, img.height);
                        let col = boundary.map_full(cc - tm, img.width);
                        acc += coef * img.get(rr, col);
                    }
                    *y = acc;
                }
            });
    }
    Ok(q)
}

fn scale(q: &mut QuadGrid, zeta: f64, undo: bool) {
    let z2 = zeta * zeta;
    let (ll, hh) = if undo { (1.0 / z2, z2) } else { (z2, 1.0 / z2) };
    q.plane_mut(Component::LL).iter_mut().for_each(|v| *v *= ll);
    q.plane_mut(Component::HH).iter_mut().for_each(|v| *v *= hh);
}

/// One level of the forward transform.
pub fn forward(img: &Image, scheme: &Scheme, boundary: BoundaryMode, apply_scaling: bool) -> Result<QuadGrid, TransformError> {
    let mut q = if scheme.kind == SchemeKind::Convolution {
        let Some(Step::Convolution { filters, .. }) = scheme.steps.first() else {
            unreachable!("convolution scheme holds one convolution step")
        };
        convolve_direct(img, filters, boundary)?
    } else {
        apply_steps(&polyphase_split(img)?, &scheme.matrices()?, boundary)
    };
    if apply_scaling {
        scale(&mut q, scheme.wavelet.zeta, false);
    }
    Ok(q)
}

/// Steps undoing the lifting stages of `wavelet`, in application order.
pub fn inverse_steps(wavelet: &WaveletSpec) -> Result<Vec<StepMatrix>, TransformError> {
    let mut steps = Vec::new();
    for stage in wavelet.stages.iter().rev() {
        let fwd = sweldens_steps(&stage.predict.neg(), &stage.update.neg())?;
        steps.extend(fwd.into_iter().rev());
    }
    Ok(steps)
}

/// One level of the inverse transform. Works for the output of any scheme.
pub fn inverse(q: &QuadGrid, wavelet: &WaveletSpec, boundary: BoundaryMode, undo_scaling: bool) -> Result<Image, TransformError> {
    let mut q = q.clone();
    if undo_scaling {
        scale(&mut q, wavelet.zeta, true);
    }
    Ok(polyphase_merge(&apply_steps(&q, &inverse_steps(wavelet)?, boundary)))
}

/// Multi-level decomposition. `levels[k]` is the output of level `k + 1`;
/// its LL plane is the input of the next level, so only the last LL plane
/// is part of the final result.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub levels: Vec<QuadGrid>,
}

impl Pyramid {
    pub fn coarsest_ll(&self) -> &[f64] {
        self.levels.last().expect("non-empty pyramid").plane(Component::LL)
    }
}

pub fn check_levels(width: usize, height: usize, levels: usize) -> Result<(), TransformError> {
    if levels == 0 {
        return Err(TransformError::NoLevels);
    }
    if width == 0 || height == 0 {
        return Err(TransformError::Empty);
    }
    let d = 1usize.checked_shl(levels as u32).unwrap_or(0);
    if d == 0 || !width.is_multiple_of(d) || !height.is_multiple_of(d) {
        return Err(TransformError::NotDivisible { width, height, levels });
    }
    Ok(())
}

pub fn multi_level_forward(
    img: &Image,
    scheme: &Scheme,
    levels: usize,
    boundary: BoundaryMode,
    apply_scaling: bool,
) -> Result<Pyramid, TransformError> {
    check_levels(img.width, img.height, levels)?;
    let mut out = Vec::with_capacity(levels);
    let mut current = img.clone();
    for _ in 0..levels {
        let q = forward(&current, scheme, boundary, apply_scaling)?;
        current = Image::new(q.width, q.height, q.plane(Component::LL).to_vec())?;
        out.push(q);
    }
    Ok(Pyramid { levels: out })
}

pub fn multi_level_inverse(
    pyramid: &Pyramid,
    wavelet: &WaveletSpec,
    boundary: BoundaryMode,
    undo_scaling: bool,
) -> Result<Image, TransformError> {
    let mut ll: Option<Vec<f64>> = None;
    let mut img = None;
    for level in pyramid.levels.iter().rev() {
        let mut q = level.clone();
        if let Some(ll) = ll.take() {
            q.planes[Component::LL.index()] = ll;
        }
        let rec = inverse(&q, wavelet, boundary, undo_scaling)?;
        ll = Some(rec.samples.clone());
        img = Some(rec);
    }
    img.ok_or(TransformError::NoLevels)
}

/// Extends `img` on the right and bottom by whole-point symmetric reflection
/// so both dimensions become multiples of `multiple`.
pub fn pad_symmetric(img: &Image, multiple: usize) -> Image {
    let round = |n: usize| n.div_ceil(multiple) * multiple;
    let (w, h) = (round(img.width), round(img.height));
    Image::from_fn(w, h, |r, c| {
        img.get(
            BoundaryMode::Symmetric.map_full(r as i64, img.height),
            BoundaryMode::Symmetric.map_full(c as i64, img.width),
        )
    })
}

/// Unit impulse at `(row, col)`.
pub fn impulse_image(width: usize, height: usize, row: usize, col: usize) -> Image {
    Image::from_fn(width, height, |r, c| if (r, c) == (row, col) { 1.0 } else { 0.0 })
}
