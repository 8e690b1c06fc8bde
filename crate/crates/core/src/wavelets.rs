//! Lifting factorizations of the shipped wavelets.
//!
//! Each wavelet is an ordered list of predict/update pairs plus a scaling
//! factor. The scaling factor never enters step matrices or operation counts;
//! it is applied separately by the transform when requested.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::laurent::{rat, AlgebraError, Coefficient, LaurentPoly1, LaurentPoly2, Mode};
use crate::polyphase;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WaveletError {
    #[error("unknown wavelet `{0}` (expected cdf53, cdf97 or dd137)")]
    Unknown(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WaveletName {
    #[serde(rename = "cdf53")]
    Cdf53,
    #[serde(rename = "cdf97")]
    Cdf97,
    #[serde(rename = "dd137")]
    Dd137,
}

impl WaveletName {
    pub const ALL: [WaveletName; 3] = [WaveletName::Cdf53, WaveletName::Cdf97, WaveletName::Dd137];

    pub fn as_str(self) -> &'static str {
        match self {
            WaveletName::Cdf53 => "cdf53",
            WaveletName::Cdf97 => "cdf97",
            WaveletName::Dd137 => "dd137",
        }
    }
}

impl fmt::Display for WaveletName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WaveletName {
    type Err = WaveletError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cdf53" => Ok(WaveletName::Cdf53),
            "cdf97" => Ok(WaveletName::Cdf97),
            "dd137" => Ok(WaveletName::Dd137),
            _ => Err(WaveletError::Unknown(s.to_string())),
        }
    }
}

/// One predict/update pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftingStage {
    pub predict: LaurentPoly1,
    pub update: LaurentPoly1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub name: String,
    pub stages: Vec<LiftingStage>,
    pub zeta: f64,
}

// Standard CDF 9/7 lifting constants.
pub const CDF97_ALPHA: f64 = -1.586_134_342_069_364_8;
pub const CDF97_BETA: f64 = -0.052_980_118_572_961;
pub const CDF97_GAMMA: f64 = 0.882_911_075_530_934;
pub const CDF97_DELTA: f64 = 0.443_506_852_043_971;
pub const CDF97_ZETA: f64 = 1.149_604_398_860_241;

fn exact(terms: &[(i32, i64, i64)]) -> LaurentPoly1 {
    LaurentPoly1::from_terms(Mode::Exact, terms.iter().map(|&(k, n, d)| (k, rat(n, d))))
        .expect("exact terms")
}

/// `c * (1 + z^k)` in float mode.
fn two_tap(c: f64, k: i32) -> LaurentPoly1 {
    LaurentPoly1::from_terms(
        Mode::Float,
        [(0, Coefficient::Float(c)), (k, Coefficient::Float(c))],
    )
    .expect("float terms")
}

pub fn get_wavelet(name: WaveletName) -> WaveletSpec {
    match name {
        WaveletName::Cdf53 => WaveletSpec {
            name: name.as_str().into(),
            stages: vec![LiftingStage {
                predict: exact(&[(0, -1, 2), (-1, -1, 2)]),
                update: exact(&[(0, 1, 4), (1, 1, 4)]),
            }],
            zeta: std::f64::consts::SQRT_2,
        },
        WaveletName::Cdf97 => WaveletSpec {
            name: name.as_str().into(),
            stages: vec![
                LiftingStage {
                    predict: two_tap(CDF97_ALPHA, -1),
                    update: two_tap(CDF97_BETA, 1),
                },
                LiftingStage {
                    predict: two_tap(CDF97_GAMMA, -1),
                    update: two_tap(CDF97_DELTA, 1),
                },
            ],
            zeta: CDF97_ZETA,
        },
        WaveletName::Dd137 => WaveletSpec {
            name: name.as_str().into(),
            stages: vec![LiftingStage {
                predict: exact(&[(1, 1, 16), (-2, 1, 16), (0, -9, 16), (-1, -9, 16)]),
                update: exact(&[(0, 9, 32), (1, 9, 32), (-1, -1, 32), (2, -1, 32)]),
            }],
            zeta: std::f64::consts::SQRT_2,
        },
    }
}

impl WaveletSpec {
    pub fn by_name(name: &str) -> Result<WaveletSpec, WaveletError> {
        Ok(get_wavelet(name.parse()?))
    }

    pub fn mode(&self) -> Mode {
        self.stages
            .first()
            .map(|s| s.predict.mode())
            .unwrap_or(Mode::Exact)
    }

    /// Largest operator degree across all stages.
    pub fn max_degree(&self) -> i32 {
        self.stages
            .iter()
            .flat_map(|s| [&s.predict, &s.update])
            .filter_map(|p| p.degree().ok())
            .max()
            .unwrap_or(0)
    }

    /// Float twin with identical structure.
    pub fn to_float(&self) -> WaveletSpec {
        WaveletSpec {
            name: self.name.clone(),
            stages: self
                .stages
                .iter()
                .map(|s| LiftingStage {
                    predict: s.predict.to_float(),
                    update: s.update.to_float(),
                })
                .collect(),
            zeta: self.zeta,
        }
    }
}

/// Scalar and residual parts of one stage's operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitStage {
    pub p0: LaurentPoly1,
    pub p1: LaurentPoly1,
    pub u0: LaurentPoly1,
    pub u1: LaurentPoly1,
}

pub fn split_operators(spec: &WaveletSpec) -> Vec<SplitStage> {
    spec.stages
        .iter()
        .map(|s| {
            let (p0, p1) = s.predict.split_scalar();
            let (u0, u1) = s.update.split_scalar();
            SplitStage { p0, p1, u0, u1 }
        })
        .collect()
}

/// Low-pass and high-pass analysis filters whose polyphase matrix equals the
/// unscaled lifting product.
///
/// Filters are indexed so that the tap at exponent `t` multiplies input
/// sample `x[c - t]`, where `c` is the output position: `2n` for the low-pass
/// output `L[n]` and `2n + 1` for the high-pass output `H[n]`.
pub fn analysis_filters(spec: &WaveletSpec) -> Result<(LaurentPoly1, LaurentPoly1), WaveletError> {
    let m = polyphase::lifting_product_1d(spec, false)?;
    Ok(polyphase::interleave_1d(&m)?)
}

/// The four 2-D analysis filters `[F_LL, F_HL, F_LH, F_HH]` as tensor products
/// of the 1-D filters; the first factor is horizontal.
pub fn conv2d_filters(spec: &WaveletSpec) -> Result<[LaurentPoly2; 4], WaveletError> {
    let (g0, g1) = analysis_filters(spec)?;
    Ok([
        LaurentPoly2::tensor(&g0, &g0)?,
        LaurentPoly2::tensor(&g1, &g0)?,
        LaurentPoly2::tensor(&g0, &g1)?,
        LaurentPoly2::tensor(&g1, &g1)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf53_definition() {
        let w = get_wavelet(WaveletName::Cdf53);
        assert_eq!(w.stages.len(), 1);
        let p = &w.stages[0].predict;
        assert_eq!(p.tap_count(), 2);
        assert_eq!(p.coefficient(0), Some(&rat(-1, 2)));
        assert_eq!(p.coefficient(-1), Some(&rat(-1, 2)));
        assert!((w.zeta - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dd137_definition() {
        let w = get_wavelet(WaveletName::Dd137);
        let p = &w.stages[0].predict;
        assert_eq!(p.coefficient(1), Some(&rat(1, 16)));
        assert_eq!(p.coefficient(0), Some(&rat(-9, 16)));
        assert_eq!(p.coefficient(-1), Some(&rat(-9, 16)));
        assert_eq!(p.coefficient(-2), Some(&rat(1, 16)));
        assert_eq!(p.degree(), Ok(3));
        assert_eq!(w.max_degree(), 3);
    }

    #[test]
    fn cdf97_definition() {
        let w = get_wavelet(WaveletName::Cdf97);
        assert_eq!(w.stages.len(), 2);
        for s in &w.stages {
            assert_eq!(s.predict.tap_count(), 2);
            assert_eq!(s.update.tap_count(), 2);
            assert_eq!(s.predict.degree(), Ok(1));
        }
        assert_eq!(w.mode(), Mode::Float);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(WaveletSpec::by_name("haar"), Err(WaveletError::Unknown(_))));
        assert_eq!("CDF53".parse::<WaveletName>(), Ok(WaveletName::Cdf53));
    }

    #[test]
    fn split_examples() {
        let s = &split_operators(&get_wavelet(WaveletName::Cdf53))[0];
        assert_eq!(s.p0, LaurentPoly1::constant(rat(-1, 2)));
        assert_eq!(s.p1, exact(&[(-1, -1, 2)]));
        assert_eq!(s.u0, LaurentPoly1::constant(rat(1, 4)));
        assert_eq!(s.u1, exact(&[(1, 1, 4)]));

        let d = &split_operators(&get_wavelet(WaveletName::Dd137))[0];
        assert_eq!(d.u0, LaurentPoly1::constant(rat(9, 32)));

        let no_const = WaveletSpec {
            name: "shifted".into(),
            stages: vec![LiftingStage {
                predict: exact(&[(-1, -1, 1)]),
                update: exact(&[(1, 1, 2)]),
            }],
            zeta: 1.0,
        };
        let s = &split_operators(&no_const)[0];
        assert!(s.p0.is_zero());
        assert_eq!(s.p1, exact(&[(-1, -1, 1)]));
    }

    #[test]
    fn split_reconstructs_every_wavelet() {
        for name in WaveletName::ALL {
            let w = get_wavelet(name);
            for (stage, split) in w.stages.iter().zip(split_operators(&w)) {
                assert_eq!(split.p0.add(&split.p1).unwrap(), stage.predict);
                assert_eq!(split.u0.add(&split.u1).unwrap(), stage.update);
            }
        }
    }

    #[test]
    fn cdf53_analysis_filters() {
        let (g0, g1) = analysis_filters(&get_wavelet(WaveletName::Cdf53)).unwrap();
        assert_eq!(
            g0,
            exact(&[(2, -1, 8), (1, 1, 4), (0, 3, 4), (-1, 1, 4), (-2, -1, 8)])
        );
        assert_eq!(g1, exact(&[(1, -1, 2), (0, 1, 1), (-1, -1, 2)]));
    }

    #[test]
    fn filter_lengths_match_names() {
        let span = |p: &LaurentPoly1| p.max_exponent().unwrap() - p.min_exponent().unwrap() + 1;
        let lengths = |n| {
            let (g0, g1) = analysis_filters(&get_wavelet(n)).unwrap();
            (span(&g0), span(&g1))
        };
        assert_eq!(lengths(WaveletName::Cdf53), (5, 3));
        assert_eq!(lengths(WaveletName::Cdf97), (9, 7));
        assert_eq!(lengths(WaveletName::Dd137), (13, 7));
        // the DD filters have zero taps inside their support
        let (g0, g1) = analysis_filters(&get_wavelet(WaveletName::Dd137)).unwrap();
        assert_eq!((g0.tap_count(), g1.tap_count()), (11, 5));
    }

    #[test]
    fn conv2d_tap_counts() {
        let counts = |n| {
            conv2d_filters(&get_wavelet(n))
                .unwrap()
                .iter()
                .map(|f| f.tap_count())
                .collect::<Vec<_>>()
        };
        assert_eq!(counts(WaveletName::Cdf53), vec![25, 15, 15, 9]);
        assert_eq!(counts(WaveletName::Cdf97), vec![81, 63, 63, 49]);
        assert_eq!(counts(WaveletName::Dd137), vec![121, 55, 55, 25]);
    }

    #[test]
    fn conv2d_is_separable() {
        let w = get_wavelet(WaveletName::Cdf53);
        let (g0, g1) = analysis_filters(&w).unwrap();
        let f = conv2d_filters(&w).unwrap();
        for ((m, n), c) in f[1].terms() {
            let expect = g1.coefficient(*m).unwrap().checked_mul(g0.coefficient(*n).unwrap());
            assert_eq!(Some(c.clone()), expect.ok());
        }
    }

    // Vanishing moments of the high-pass filter gate the externally sourced
    // CDF 9/7 constants.
    #[test]
    fn cdf97_highpass_annihilates_polynomials() {
        let (_, g1) = analysis_filters(&get_wavelet(WaveletName::Cdf97)).unwrap();
        for power in 0..2 {
            let response: f64 = g1
                .terms()
                .map(|(t, c)| c.to_f64() * (10.0 - *t as f64).powi(power))
                .sum();
            assert!(response.abs() < 1e-9, "moment {power}: {response}");
        }
    }

    fn lifting_det(name: WaveletName) -> LaurentPoly1 {
        polyphase::lifting_product_1d(&get_wavelet(name), false)
            .unwrap()
            .determinant()
            .unwrap()
    }

    #[test]
    fn determinant_is_a_monomial() {
        for name in [WaveletName::Cdf53, WaveletName::Dd137] {
            let det = lifting_det(name);
            assert!(det.is_one(), "{name}: {det}");
        }
        let det = lifting_det(WaveletName::Cdf97);
        let one = LaurentPoly1::one(Mode::Float);
        assert!(det.max_abs_diff(&one) <= 1e-12, "{det}");
    }
}
