//! The ten named schemes and their cost model.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::laurent::{LaurentPoly1, LaurentPoly2, Mode};
use crate::polyphase::{
    build_matrix, compose, conv_filters_to_polyphase, verify_scheme_identity, MatrixKindParams, PolyphaseError,
    StepKind, StepMatrix, Tolerance, VerificationReport,
};
use crate::wavelets::{conv2d_filters, split_operators, WaveletError, WaveletName, WaveletSpec};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("unknown scheme '{0}'")]
    Unknown(String),
    #[error(transparent)]
    Polyphase(#[from] PolyphaseError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Sweldens,
    Iwahashi,
    IwahashiStar,
    Explosive,
    ExplosiveStar,
    Monolithic,
    MonolithicStar,
    Polyphase,
    PolyphaseStar,
    Convolution,
}

impl SchemeKind {
    /// Table row order.
    pub const ALL: [SchemeKind; 10] = [
        SchemeKind::Sweldens,
        SchemeKind::Iwahashi,
        SchemeKind::IwahashiStar,
        SchemeKind::Explosive,
        SchemeKind::ExplosiveStar,
        SchemeKind::Monolithic,
        SchemeKind::MonolithicStar,
        SchemeKind::Polyphase,
        SchemeKind::PolyphaseStar,
        SchemeKind::Convolution,
    ];

    /// Identifier used on the command line and in CSV output.
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Sweldens => "sweldens",
            SchemeKind::Iwahashi => "iwahashi",
            SchemeKind::IwahashiStar => "iwahashi_star",
            SchemeKind::Explosive => "explosive",
            SchemeKind::ExplosiveStar => "explosive_star",
            SchemeKind::Monolithic => "monolithic",
            SchemeKind::MonolithicStar => "monolithic_star",
            SchemeKind::Polyphase => "polyphase",
            SchemeKind::PolyphaseStar => "polyphase_star",
            SchemeKind::Convolution => "convolution",
        }
    }

    /// Human-readable label, e.g. `Iwahashi*`.
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Sweldens => "Sweldens",
            SchemeKind::Iwahashi => "Iwahashi",
            SchemeKind::IwahashiStar => "Iwahashi*",
            SchemeKind::Explosive => "Explosive",
            SchemeKind::ExplosiveStar => "Explosive*",
            SchemeKind::Monolithic => "Monolithic",
            SchemeKind::MonolithicStar => "Monolithic*",
            SchemeKind::Polyphase => "Polyphase",
            SchemeKind::PolyphaseStar => "Polyphase*",
            SchemeKind::Convolution => "Convolution",
        }
    }

    pub fn is_star(self) -> bool {
        matches!(
            self,
            SchemeKind::IwahashiStar | SchemeKind::ExplosiveStar | SchemeKind::MonolithicStar | SchemeKind::PolyphaseStar
        )
    }

    /// The unimproved variant of a Star kind; other kinds map to themselves.
    pub fn base(self) -> SchemeKind {
        match self {
            SchemeKind::IwahashiStar => SchemeKind::Iwahashi,
            SchemeKind::ExplosiveStar => SchemeKind::Explosive,
            SchemeKind::MonolithicStar => SchemeKind::Monolithic,
            SchemeKind::PolyphaseStar => SchemeKind::Polyphase,
            k => k,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('*', "_star").replace('-', "_");
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| SchemeError::Unknown(s.to_string()))
    }
}

/// One step of a scheme. A barrier flag means all previous writes must be
/// visible before the step reads its inputs.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Step {
    Matrix(StepMatrix),
    Convolution {
        filters: [LaurentPoly2; 4],
        needs_barrier: bool,
    },
}

impl Step {
    pub fn needs_barrier(&self) -> bool {
        match self {
            Step::Matrix(m) => m.needs_barrier,
            Step::Convolution { needs_barrier, .. } => *needs_barrier,
        }
    }

    pub fn macs(&self) -> usize {
        match self {
            Step::Matrix(m) => matrix_macs(m),
            Step::Convolution { filters, .. } => filters.iter().map(LaurentPoly2::tap_count).sum(),
        }
    }

    /// Polyphase form of the step.
    pub fn to_matrix(&self) -> Result<StepMatrix, SchemeError> {
        match self {
            Step::Matrix(m) => Ok(m.clone()),
            Step::Convolution { filters, needs_barrier } => {
                Ok(conv_filters_to_polyphase(filters)?.with_barrier(*needs_barrier))
            }
        }
    }
}

fn matrix_macs(m: &StepMatrix) -> usize {
    let mut n = 0;
    for (i, row) in m.entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if i == j && e.is_one() {
                continue;
            }
            n += e.tap_count();
        }
    }
    n
}

#[derive(Debug, Clone)]
pub struct Scheme {
    pub kind: SchemeKind,
    pub wavelet: WaveletSpec,
    pub steps: Vec<Step>,
    /// Step index range of each lifting stage. Convolution has one range
    /// covering all stages.
    pub stage_ranges: Vec<Range<usize>>,
}

impl Scheme {
    pub fn mode(&self) -> Mode {
        self.wavelet.mode()
    }

    /// Steps as polyphase matrices, in application order.
    pub fn matrices(&self) -> Result<Vec<StepMatrix>, SchemeError> {
        self.steps.iter().map(Step::to_matrix).collect()
    }
}

fn step(kind: StepKind, p: &LaurentPoly1, u: &LaurentPoly1, barrier: bool) -> Result<Step, SchemeError> {
    let m = build_matrix(kind, &MatrixKindParams::new(p, u))?;
    Ok(Step::Matrix(m.with_barrier(barrier)))
}

fn stage_steps(kind: SchemeKind, p: &LaurentPoly1, u: &LaurentPoly1) -> Result<Vec<Step>, SchemeError> {
    use StepKind::*;
    let seq: &[StepKind] = match kind {
        SchemeKind::Sweldens => &[TH, TV, SH, SV],
        SchemeKind::Iwahashi => &[TI, RI, SI],
        SchemeKind::Explosive => &[TE, RE, SE],
        SchemeKind::Monolithic => &[TMono, SMono],
        SchemeKind::Polyphase => &[NFull],
        _ => unreachable!("only base kinds have a plain step sequence"),
    };
    seq.iter().map(|k| step(*k, p, u, true)).collect()
}

pub fn build_scheme(kind: SchemeKind, wavelet: &WaveletSpec) -> Result<Scheme, SchemeError> {
    let mut steps = Vec::new();
    let mut stage_ranges = Vec::new();

    if kind == SchemeKind::Convolution {
        steps.push(Step::Convolution {
            filters: conv2d_filters(wavelet)?,
            needs_barrier: true,
        });
        stage_ranges.push(0..1);
        return Ok(Scheme {
            kind,
            wavelet: wavelet.clone(),
            steps,
            stage_ranges,
        });
    }

    let splits = split_operators(wavelet);
    for (stage, split) in wavelet.stages.iter().zip(&splits) {
        let start = steps.len();
        if !kind.is_star() {
            steps.extend(stage_steps(kind, &stage.predict, &stage.update)?);
        } else {
            // Scalar parts run as unbarriered separable steps around the
            // residual core; they only touch a thread's own quadruple.
            let zero = LaurentPoly1::zero(wavelet.mode());
            if !split.p0.is_zero() {
                steps.push(step(StepKind::TH, &split.p0, &zero, false)?);
                steps.push(step(StepKind::TV, &split.p0, &zero, false)?);
            }
            steps.extend(stage_steps(kind.base(), &split.p1, &split.u1)?);
            if !split.u0.is_zero() {
                steps.push(step(StepKind::SH, &zero, &split.u0, false)?);
                steps.push(step(StepKind::SV, &zero, &split.u0, false)?);
            }
        }
        stage_ranges.push(start..steps.len());
    }
    Ok(Scheme {
        kind,
        wavelet: wavelet.clone(),
        steps,
        stage_ranges,
    })
}

pub fn count_macs(scheme: &Scheme) -> usize {
    scheme.steps.iter().map(Step::macs).sum()
}

pub fn count_barriers(scheme: &Scheme) -> usize {
    scheme.steps.iter().filter(|s| s.needs_barrier()).count()
}

/// Checks every stage of `scheme` against the full polyphase matrix of that
/// stage. Convolution is checked against the product over all stages.
pub fn verify_scheme(scheme: &Scheme, tol: Tolerance) -> Result<Vec<VerificationReport>, SchemeError> {
    let reference = |p: &LaurentPoly1, u: &LaurentPoly1| build_matrix(StepKind::NFull, &MatrixKindParams::new(p, u));
    let mut reports = Vec::new();
    if scheme.kind == SchemeKind::Convolution {
        let refs = scheme
            .wavelet
            .stages
            .iter()
            .map(|s| reference(&s.predict, &s.update))
            .collect::<Result<Vec<_>, _>>()?;
        let full = compose(&refs)?;
        reports.push(verify_scheme_identity(&scheme.matrices()?, &full, tol)?);
        return Ok(reports);
    }
    for (stage, range) in scheme.wavelet.stages.iter().zip(&scheme.stage_ranges) {
        let mats = scheme.steps[range.clone()]
            .iter()
            .map(Step::to_matrix)
            .collect::<Result<Vec<_>, _>>()?;
        let n = reference(&stage.predict, &stage.update)?;
        reports.push(verify_scheme_identity(&mats, &n, tol)?);
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub kind: SchemeKind,
    pub wavelet: String,
    pub barriers: usize,
    pub macs: usize,
}

/// Costs for every (wavelet, kind) pair, wavelet-major, kinds in the given order.
pub fn cost_table(wavelets: &[WaveletSpec], kinds: &[SchemeKind]) -> Result<Vec<CostReport>, SchemeError> {
    let mut out = Vec::with_capacity(wavelets.len() * kinds.len());
    for w in wavelets {
        for &kind in kinds {
            let s = build_scheme(kind, w)?;
            out.push(CostReport {
                kind,
                wavelet: w.name.clone(),
                barriers: count_barriers(&s),
                macs: count_macs(&s),
            });
        }
    }
    Ok(out)
}

pub fn cost_csv(reports: &[CostReport]) -> String {
    let mut s = String::from("wavelet,scheme,barriers,macs\n");
    for r in reports {
        s.push_str(&format!("{},{},{},{}\n", r.wavelet, r.kind, r.barriers, r.macs));
    }
    s
}

/// Published reference costs as `(barriers, operations)`.
pub fn published_cost(wavelet: WaveletName, kind: SchemeKind) -> (usize, usize) {
    let row: [(usize, usize); 10] = match wavelet {
        WaveletName::Cdf53 => [
            (4, 16),
            (3, 24),
            (3, 18),
            (3, 24),
            (3, 18),
            (2, 24),
            (2, 18),
            (1, 63),
            (1, 23),
            (1, 64),
        ],
        WaveletName::Cdf97 => [
            (8, 32),
            (6, 48),
            (6, 36),
            (6, 48),
            (6, 36),
            (4, 48),
            (4, 36),
            (2, 126),
            (2, 46),
            (1, 256),
        ],
        WaveletName::Dd137 => [
            (4, 32),
            (3, 64),
            (3, 50),
            (3, 64),
            (3, 50),
            (2, 64),
            (2, 50),
            (1, 255),
            (1, 203),
            (1, 256),
        ],
    };
    let idx = SchemeKind::ALL.iter().position(|k| *k == kind).unwrap();
    row[idx]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelets::get_wavelet;

    fn scheme(kind: SchemeKind, w: WaveletName) -> Scheme {
        build_scheme(kind, &get_wavelet(w)).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.as_str().parse::<SchemeKind>().unwrap(), k);
            assert_eq!(k.label().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("lazy".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn step_counts() {
        let s = scheme(SchemeKind::Monolithic, WaveletName::Cdf53);
        assert_eq!(s.steps.len(), 2);
        assert!(s.steps.iter().all(Step::needs_barrier));
        let s = scheme(SchemeKind::Sweldens, WaveletName::Cdf97);
        assert_eq!(s.steps.len(), 8);
        assert_eq!(count_barriers(&s), 8);
        assert_eq!(s.stage_ranges, vec![0..4, 4..8]);
    }

    #[test]
    fn polyphase_star_epochs() {
        let s = scheme(SchemeKind::PolyphaseStar, WaveletName::Cdf53);
        let kinds: Vec<_> = s
            .steps
            .iter()
            .map(|st| match st {
                Step::Matrix(m) => (m.kind, m.needs_barrier),
                _ => panic!(),
            })
            .collect();
        assert_eq!(
            kinds,
            vec![
                (StepKind::TH, false),
                (StepKind::TV, false),
                (StepKind::NFull, true),
                (StepKind::SH, false),
                (StepKind::SV, false),
            ]
        );
        assert_eq!(count_barriers(&s), 1);
    }

    #[test]
    fn mac_examples() {
        assert_eq!(count_macs(&scheme(SchemeKind::Sweldens, WaveletName::Cdf53)), 16);
        assert_eq!(count_macs(&scheme(SchemeKind::MonolithicStar, WaveletName::Dd137)), 50);
        assert_eq!(count_macs(&scheme(SchemeKind::PolyphaseStar, WaveletName::Cdf53)), 23);
    }

    #[test]
    fn polyphase_star_core_collapses() {
        // V1 = P1*U1 + 1 is the scalar 7/8 for CDF 5/3
        let w = get_wavelet(WaveletName::Cdf53);
        let sp = &split_operators(&w)[0];
        let v = sp.p1.mul(&sp.u1).unwrap().add(&LaurentPoly1::one(Mode::Exact)).unwrap();
        assert_eq!(v, LaurentPoly1::constant(crate::laurent::rat(7, 8)));
    }

    #[test]
    fn barrier_examples() {
        assert_eq!(count_barriers(&scheme(SchemeKind::Iwahashi, WaveletName::Dd137)), 3);
        assert_eq!(count_barriers(&scheme(SchemeKind::Monolithic, WaveletName::Cdf97)), 4);
        assert_eq!(count_barriers(&scheme(SchemeKind::Convolution, WaveletName::Cdf97)), 1);
    }

    #[test]
    fn cdf97_operations_column() {
        let t = cost_table(&[get_wavelet(WaveletName::Cdf97)], &SchemeKind::ALL).unwrap();
        let macs: Vec<_> = t.iter().map(|r| r.macs).collect();
        assert_eq!(macs, vec![32, 48, 36, 48, 36, 48, 36, 126, 46, 256]);
    }

    #[test]
    fn empty_kinds() {
        assert!(cost_table(&[get_wavelet(WaveletName::Cdf53)], &[]).unwrap().is_empty());
    }

    #[test]
    fn full_table_matches_published() {
        let ws: Vec<_> = WaveletName::ALL.iter().map(|n| get_wavelet(*n)).collect();
        let t = cost_table(&ws, &SchemeKind::ALL).unwrap();
        assert_eq!(t.len(), 30);
        for r in &t {
            let name: WaveletName = r.wavelet.parse().unwrap();
            assert_eq!((r.barriers, r.macs), published_cost(name, r.kind), "{} {}", r.wavelet, r.kind);
        }
    }

    #[test]
    fn every_scheme_equals_polyphase() {
        for w in WaveletName::ALL {
            let tol = match get_wavelet(w).mode() {
                Mode::Exact => Tolerance::Exact,
                Mode::Float => Tolerance::Abs(1e-12),
            };
            for k in SchemeKind::ALL {
                for r in verify_scheme(&scheme(k, w), tol).unwrap() {
                    assert!(r.matches, "{k} {w}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn csv_layout() {
        let t = cost_table(&[get_wavelet(WaveletName::Cdf53)], &[SchemeKind::Sweldens]).unwrap();
        assert_eq!(cost_csv(&t), "wavelet,scheme,barriers,macs\ncdf53,sweldens,4,16\n");
    }
}
