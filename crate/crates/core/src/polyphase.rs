//! 2x2 and 4x4 polyphase matrices.
//!
//! Component vectors are ordered `[LL, HL, LH, HH]`. A matrix maps input
//! components (columns) to output components (rows). A term `c * z_m^a * z_n^b`
//! in entry `(i, j)` contributes `c * x_j[r - b][col - a]` to `y_i[r][col]`,
//! so `z^-1` reads the next sample and `z` the previous one.
//!
//! Products follow the pipe order of a scheme: the first-applied step is the
//! rightmost factor. [`compose`] is the only place that multiplies a step list.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::laurent::{AlgebraError, Axis, Coefficient, LaurentPoly1, LaurentPoly2, Mode};
use crate::wavelets::WaveletSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyphaseError {
    #[error("matrix kind {kind:?} requires a {operator} operator")]
    MissingOperator {
        kind: StepKind,
        operator: &'static str,
    },
    #[error("cannot compose an empty step list")]
    EmptySteps,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// One of the four polyphase components. The discriminant is the row/column
/// index in every 4x4 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Component {
    LL = 0,
    HL = 1,
    LH = 2,
    HH = 3,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::LL, Component::HL, Component::LH, Component::HH];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Sample parity along the vertical axis (0 = even rows).
    pub fn row_phase(self) -> usize {
        self.index() / 2
    }

    /// Sample parity along the horizontal axis (0 = even columns).
    pub fn col_phase(self) -> usize {
        self.index() % 2
    }

    pub fn from_phases(row_phase: usize, col_phase: usize) -> Component {
        Component::ALL[2 * row_phase + col_phase]
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Component::LL => "LL",
            Component::HL => "HL",
            Component::LH => "LH",
            Component::HH => "HH",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StepKind {
    /// Horizontal predict.
    TH,
    /// Vertical predict.
    TV,
    /// Horizontal update.
    SH,
    /// Vertical update.
    SV,
    TI,
    RI,
    SI,
    TE,
    RE,
    SE,
    TMono,
    SMono,
    NFull,
    Identity,
    /// Result of multiplying other matrices.
    Composite,
}

impl StepKind {
    /// Whether the kind is built from the predict operator.
    pub fn needs_predict(self) -> bool {
        matches!(
            self,
            StepKind::TH
                | StepKind::TV
                | StepKind::TI
                | StepKind::RI
                | StepKind::TE
                | StepKind::RE
                | StepKind::TMono
                | StepKind::NFull
        )
    }

    pub fn needs_update(self) -> bool {
        matches!(
            self,
            StepKind::SH
                | StepKind::SV
                | StepKind::RI
                | StepKind::SI
                | StepKind::RE
                | StepKind::SE
                | StepKind::SMono
                | StepKind::NFull
        )
    }
}

/// Operators a matrix kind is parameterized by.
#[derive(Debug, Clone, Default)]
pub struct MatrixKindParams {
    pub predict: Option<LaurentPoly1>,
    pub update: Option<LaurentPoly1>,
}

impl MatrixKindParams {
    pub fn new(predict: &LaurentPoly1, update: &LaurentPoly1) -> Self {
        MatrixKindParams {
            predict: Some(predict.clone()),
            update: Some(update.clone()),
        }
    }

    pub fn predict(p: &LaurentPoly1) -> Self {
        MatrixKindParams {
            predict: Some(p.clone()),
            update: None,
        }
    }

    pub fn update(u: &LaurentPoly1) -> Self {
        MatrixKindParams {
            predict: None,
            update: Some(u.clone()),
        }
    }
}

/// A 4x4 matrix of bivariate Laurent polynomials, tagged with its kind and
/// whether a barrier must precede it.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMatrix {
    pub kind: StepKind,
    pub entries: [[LaurentPoly2; 4]; 4],
    pub needs_barrier: bool,
}

impl StepMatrix {
    pub fn identity(mode: Mode) -> StepMatrix {
        let entries = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                if i == j {
                    LaurentPoly2::one(mode)
                } else {
                    LaurentPoly2::zero(mode)
                }
            })
        });
        StepMatrix {
            kind: StepKind::Identity,
            entries,
            needs_barrier: true,
        }
    }

    pub fn mode(&self) -> Mode {
        self.entries[0][0].mode()
    }

    pub fn entry(&self, row: Component, col: Component) -> &LaurentPoly2 {
        &self.entries[row.index()][col.index()]
    }

    pub fn with_barrier(mut self, needs_barrier: bool) -> StepMatrix {
        self.needs_barrier = needs_barrier;
        self
    }

    /// A row is an identity row when it only copies its own component.
    pub fn is_identity_row(&self, row: usize) -> bool {
        (0..4).all(|j| {
            if j == row {
                self.entries[row][j].is_one()
            } else {
                self.entries[row][j].is_zero()
            }
        })
    }

    pub fn is_identity(&self) -> bool {
        (0..4).all(|i| self.is_identity_row(i))
    }

    /// Largest horizontal and vertical shift over all entries.
    pub fn max_shift(&self) -> (i32, i32) {
        self.entries
            .iter()
            .flatten()
            .map(LaurentPoly2::max_shift)
            .fold((0, 0), |(am, an), (m, n)| (am.max(m), an.max(n)))
    }

    pub fn to_float(&self) -> StepMatrix {
        StepMatrix {
            kind: self.kind,
            entries: std::array::from_fn(|i| std::array::from_fn(|j| self.entries[i][j].to_float())),
            needs_barrier: self.needs_barrier,
        }
    }
}

impl fmt::Display for StepMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:?} (barrier: {})", self.kind, self.needs_barrier)?;
        for (i, row) in self.entries.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            writeln!(f, "  {}: [{}]", Component::ALL[i], cells.join(", "))?;
        }
        Ok(())
    }
}

/// Builds one of the displayed matrix kinds from its operators.
///
/// `P` and `U` are oriented horizontally; `P*` and `U*` are their transposes.
pub fn build_matrix(kind: StepKind, params: &MatrixKindParams) -> Result<StepMatrix, PolyphaseError> {
    let mode = params
        .predict
        .as_ref()
        .or(params.update.as_ref())
        .map(LaurentPoly1::mode)
        .unwrap_or(Mode::Exact);
    if kind == StepKind::Identity {
        return Ok(StepMatrix::identity(mode));
    }
    let missing = |operator| PolyphaseError::MissingOperator { kind, operator };
    let p = if kind.needs_predict() {
        Some(
            params
                .predict
                .as_ref()
                .ok_or_else(|| missing("predict"))?
                .orient(Axis::Horizontal),
        )
    } else {
        None
    };
    let u = if kind.needs_update() {
        Some(
            params
                .update
                .as_ref()
                .ok_or_else(|| missing("update"))?
                .orient(Axis::Horizontal),
        )
    } else {
        None
    };
    if kind == StepKind::Composite {
        return Err(missing("composite"));
    }

    let mut m = StepMatrix::identity(mode);
    m.kind = kind;
    let e = &mut m.entries;
    let (ll, hl, lh, hh) = (0, 1, 2, 3);
    let pp = || -> Result<LaurentPoly2, AlgebraError> {
        let p = p.as_ref().unwrap();
        p.mul(&p.transpose())
    };
    let uu = || -> Result<LaurentPoly2, AlgebraError> {
        let u = u.as_ref().unwrap();
        u.mul(&u.transpose())
    };
    match kind {
        StepKind::TH => {
            let p = p.unwrap();
            e[hl][ll] = p.clone();
            e[hh][lh] = p;
        }
        StepKind::TV => {
            let ps = p.unwrap().transpose();
            e[lh][ll] = ps.clone();
            e[hh][hl] = ps;
        }
        StepKind::SH => {
            let u = u.unwrap();
            e[ll][hl] = u.clone();
            e[lh][hh] = u;
        }
        StepKind::SV => {
            let us = u.unwrap().transpose();
            e[ll][lh] = us.clone();
            e[hl][hh] = us;
        }
        StepKind::TI => {
            e[hh][ll] = pp()?;
            let p = p.unwrap();
            e[hh][hl] = p.transpose();
            e[hh][lh] = p;
        }
        StepKind::RI => {
            let (p, u) = (p.unwrap(), u.unwrap());
            e[hl][ll] = p.clone();
            e[hl][hh] = u.transpose();
            e[lh][ll] = p.transpose();
            e[lh][hh] = u;
        }
        StepKind::SI => {
            e[ll][hh] = uu()?.neg();
            let u = u.unwrap();
            e[ll][hl] = u.clone();
            e[ll][lh] = u.transpose();
        }
        StepKind::TE => {
            e[hh][ll] = pp()?.neg();
            let p = p.unwrap();
            e[hl][ll] = p.clone();
            e[lh][ll] = p.transpose();
        }
        StepKind::RE => {
            let (p, u) = (p.unwrap(), u.unwrap());
            e[ll][hl] = u.clone();
            e[ll][lh] = u.transpose();
            e[hh][hl] = p.transpose();
            e[hh][lh] = p;
        }
        StepKind::SE => {
            e[ll][hh] = uu()?;
            let u = u.unwrap();
            e[hl][hh] = u.transpose();
            e[lh][hh] = u;
        }
        StepKind::TMono => {
            e[hh][ll] = pp()?;
            let p = p.unwrap();
            e[hl][ll] = p.clone();
            e[lh][ll] = p.transpose();
            e[hh][hl] = p.transpose();
            e[hh][lh] = p;
        }
        StepKind::SMono => {
            e[ll][hh] = uu()?;
            let u = u.unwrap();
            e[ll][hl] = u.clone();
            e[ll][lh] = u.transpose();
            e[hl][hh] = u.transpose();
            e[lh][hh] = u;
        }
        StepKind::NFull => {
            let (p, u) = (p.unwrap(), u.unwrap());
            let one = LaurentPoly2::one(mode);
            let v = p.mul(&u)?.add(&one)?;
            let (ps, us, vs) = (p.transpose(), u.transpose(), v.transpose());
            e[ll] = [vs.mul(&v)?, vs.mul(&u)?, us.mul(&v)?, us.mul(&u)?];
            e[hl] = [vs.mul(&p)?, vs.clone(), us.mul(&p)?, us.clone()];
            e[lh] = [ps.mul(&v)?, ps.mul(&u)?, v, u];
            e[hh] = [ps.mul(&p)?, ps, p, one];
        }
        StepKind::Identity | StepKind::Composite => unreachable!(),
    }
    Ok(m)
}

/// Standard matrix product `a * b` (so `b` is applied first).
pub fn matmul(a: &StepMatrix, b: &StepMatrix) -> Result<StepMatrix, PolyphaseError> {
    let mode = a.mode();
    let mut entries: [[LaurentPoly2; 4]; 4] =
        std::array::from_fn(|_| std::array::from_fn(|_| LaurentPoly2::zero(mode)));
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut acc = LaurentPoly2::zero(mode);
            for k in 0..4 {
                let (x, y) = (&a.entries[i][k], &b.entries[k][j]);
                if x.is_zero() || y.is_zero() {
                    // still enforce a shared mode
                    if x.mode() != y.mode() {
                        return Err(AlgebraError::ModeMismatch {
                            left: x.mode(),
                            right: y.mode(),
                        }
                        .into());
                    }
                    continue;
                }
                acc = acc.add(&x.mul(y)?)?;
            }
            *cell = acc;
        }
    }
    Ok(StepMatrix {
        kind: StepKind::Composite,
        entries,
        needs_barrier: true,
    })
}

/// Product of steps listed in application order: `steps[n-1] * ... * steps[0]`.
pub fn compose<'a, I>(steps: I) -> Result<StepMatrix, PolyphaseError>
where
    I: IntoIterator<Item = &'a StepMatrix>,
{
    let mut acc: Option<StepMatrix> = None;
    for step in steps {
        acc = Some(match acc {
            None => step.clone(),
            Some(prev) => matmul(step, &prev)?,
        });
    }
    acc.ok_or(PolyphaseError::EmptySteps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Tolerance {
    Exact,
    Abs(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub matches: bool,
    pub mode: Mode,
    pub max_deviation: f64,
    pub first_mismatch: Option<(Component, Component)>,
}

/// Compares the composed product of `steps` (application order) against
/// `reference`. Exact tolerance requires identical rational entries; if
/// either side is float the comparison falls back to absolute deviation.
pub fn verify_scheme_identity(
    steps: &[StepMatrix],
    reference: &StepMatrix,
    tol: Tolerance,
) -> Result<VerificationReport, PolyphaseError> {
    let product = compose(steps)?;
    let exact = product.mode() == Mode::Exact && reference.mode() == Mode::Exact;
    let mut report = VerificationReport {
        matches: true,
        mode: if exact { Mode::Exact } else { Mode::Float },
        max_deviation: 0.0,
        first_mismatch: None,
    };
    for i in 0..4 {
        for j in 0..4 {
            let (a, b) = (&product.entries[i][j], &reference.entries[i][j]);
            let dev = a.max_abs_diff(b);
            report.max_deviation = report.max_deviation.max(dev);
            let ok = match (tol, exact) {
                (Tolerance::Exact, true) => a.exactly_equals(b),
                (Tolerance::Exact, false) => dev == 0.0,
                (Tolerance::Abs(t), _) => dev <= t,
            };
            if !ok && report.matches {
                report.matches = false;
                report.first_mismatch = Some((Component::ALL[i], Component::ALL[j]));
            }
        }
    }
    Ok(report)
}

/// Polyphase form of four 2-D analysis filters `[F_LL, F_HL, F_LH, F_HH]`.
///
/// Filter taps follow the same reading convention as matrix entries, taken
/// relative to the output sample position of each subband.
pub fn conv_filters_to_polyphase(filters: &[LaurentPoly2; 4]) -> Result<StepMatrix, PolyphaseError> {
    let mode = filters[0].mode();
    let mut entries: [[LaurentPoly2; 4]; 4] =
        std::array::from_fn(|_| std::array::from_fn(|_| LaurentPoly2::zero(mode)));
    let split = |t: i32, out_phase: usize| -> (usize, i32) {
        let q = out_phase as i32 - t;
        let phase = q.rem_euclid(2);
        (phase as usize, (t - out_phase as i32 + phase) / 2)
    };
    for out in Component::ALL {
        let mut terms: [Vec<((i32, i32), Coefficient)>; 4] = Default::default();
        for ((tm, tn), c) in filters[out.index()].terms() {
            let (pc, km) = split(*tm, out.col_phase());
            let (pr, kn) = split(*tn, out.row_phase());
            terms[Component::from_phases(pr, pc).index()].push(((km, kn), c.clone()));
        }
        for (j, t) in terms.into_iter().enumerate() {
            entries[out.index()][j] = LaurentPoly2::from_terms(mode, t)?;
        }
    }
    Ok(StepMatrix {
        kind: StepKind::Composite,
        entries,
        needs_barrier: true,
    })
}

/// 2x2 polyphase matrix. Rows are outputs `[L, H]`; columns are input phases
/// `[even, odd]` with `even[n] = x[2n]`, `odd[n] = x[2n+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix2 {
    pub entries: [[LaurentPoly1; 2]; 2],
}

impl PolyMatrix2 {
    pub fn identity(mode: Mode) -> Self {
        PolyMatrix2 {
            entries: [
                [LaurentPoly1::one(mode), LaurentPoly1::zero(mode)],
                [LaurentPoly1::zero(mode), LaurentPoly1::one(mode)],
            ],
        }
    }

    pub fn mul(&self, other: &PolyMatrix2) -> Result<PolyMatrix2, AlgebraError> {
        let a = &self.entries;
        let b = &other.entries;
        let cell = |i: usize, j: usize| -> Result<LaurentPoly1, AlgebraError> {
            a[i][0].mul(&b[0][j])?.add(&a[i][1].mul(&b[1][j])?)
        };
        Ok(PolyMatrix2 {
            entries: [[cell(0, 0)?, cell(0, 1)?], [cell(1, 0)?, cell(1, 1)?]],
        })
    }

    pub fn determinant(&self) -> Result<LaurentPoly1, AlgebraError> {
        let e = &self.entries;
        e[0][0].mul(&e[1][1])?.sub(&e[0][1].mul(&e[1][0])?)
    }
}

/// Splits analysis filters into the 2x2 polyphase matrix.
///
/// The low-pass filter is centred on even samples and the high-pass filter on
/// odd samples (see [`crate::wavelets::analysis_filters`]). In the usual
/// naming, the high-pass row holds `[G1_o, G1_e]`: the taps at odd offsets
/// from the filter centre act on the even input phase.
pub fn build_1d_polyphase(g0: &LaurentPoly1, g1: &LaurentPoly1) -> PolyMatrix2 {
    PolyMatrix2 {
        entries: [
            [g0.phase(0), g0.shift(1).phase(0)],
            [g1.shift(-1).phase(0), g1.phase(0)],
        ],
    }
}

/// Inverse of [`build_1d_polyphase`]: interleaves the phases back into the
/// filters `(g0, g1)`.
pub fn interleave_1d(m: &PolyMatrix2) -> Result<(LaurentPoly1, LaurentPoly1), AlgebraError> {
    let e = &m.entries;
    let g0 = e[0][0].upsample(2).add(&e[0][1].upsample(2).shift(-1))?;
    let g1 = e[1][0].upsample(2).shift(1).add(&e[1][1].upsample(2))?;
    Ok((g0, g1))
}

/// Product of the elementary 1-D lifting matrices, first stage rightmost,
/// optionally followed by the scaling diagonal `diag(zeta, 1/zeta)`.
///
/// Scaling forces float mode since `zeta` is irrational for the shipped
/// wavelets.
pub fn lifting_product_1d(spec: &WaveletSpec, include_scaling: bool) -> Result<PolyMatrix2, AlgebraError> {
    let mode = spec.mode();
    let mut acc = PolyMatrix2::identity(mode);
    for stage in &spec.stages {
        let predict = PolyMatrix2 {
            entries: [
                [LaurentPoly1::one(mode), LaurentPoly1::zero(mode)],
                [stage.predict.clone(), LaurentPoly1::one(mode)],
            ],
        };
        let update = PolyMatrix2 {
            entries: [
                [LaurentPoly1::one(mode), stage.update.clone()],
                [LaurentPoly1::zero(mode), LaurentPoly1::one(mode)],
            ],
        };
        acc = update.mul(&predict.mul(&acc)?)?;
    }
    if include_scaling {
        let zeta = spec.zeta;
        let scale = PolyMatrix2 {
            entries: [
                [
                    LaurentPoly1::constant(Coefficient::Float(zeta)),
                    LaurentPoly1::zero(Mode::Float),
                ],
                [
                    LaurentPoly1::zero(Mode::Float),
                    LaurentPoly1::constant(Coefficient::Float(1.0 / zeta)),
                ],
            ],
        };
        let float_acc = PolyMatrix2 {
            entries: [
                [acc.entries[0][0].to_float(), acc.entries[0][1].to_float()],
                [acc.entries[1][0].to_float(), acc.entries[1][1].to_float()],
            ],
        };
        acc = scale.mul(&float_acc)?;
    }
    Ok(acc)
}

/// How far results can depend on samples away from their own quadruple
/// after running `steps`: the sum of each step's largest shift, taking the
/// larger of the two axes.
pub fn cumulative_reach(steps: &[StepMatrix]) -> usize {
    let (m, n) = steps.iter().fold((0, 0), |(am, an), s| {
        let (m, n) = s.max_shift();
        (am + m as usize, an + n as usize)
    });
    m.max(n)
}

/// The four elementary Sweldens matrices of one stage in application order:
/// `[T_H(P), T_V(P), S_H(U), S_V(U)]`.
pub fn sweldens_steps(predict: &LaurentPoly1, update: &LaurentPoly1) -> Result<Vec<StepMatrix>, PolyphaseError> {
    Ok(vec![
        build_matrix(StepKind::TH, &MatrixKindParams::predict(predict))?,
        build_matrix(StepKind::TV, &MatrixKindParams::predict(predict))?,
        build_matrix(StepKind::SH, &MatrixKindParams::update(update))?,
        build_matrix(StepKind::SV, &MatrixKindParams::update(update))?,
    ])
}
