//! Sparse Laurent polynomials in one and two variables.
//!
//! A polynomial stores only its nonzero terms, keyed by exponent. Bivariate
//! exponents are `(k_m, k_n)`: `k_m` belongs to the horizontal variable `z_m`,
//! `k_n` to the vertical variable `z_n`.
//!
//! Every polynomial carries a coefficient [`Mode`]. Exact polynomials hold
//! arbitrary-precision rationals and are used to prove matrix identities;
//! float polynomials hold `f64` and are used where the coefficients are not
//! rational (CDF 9/7) or when executing on images. Arithmetic between the two
//! modes is rejected with [`AlgebraError::ModeMismatch`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("coefficient mode mismatch: {left:?} vs {right:?}")]
    ModeMismatch { left: Mode, right: Mode },
    #[error("the zero polynomial has no degree")]
    ZeroDegree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

/// A single filter tap.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Exact(BigRational),
    Float(f64),
}

/// Builds the exact coefficient `num / den`, reduced to lowest terms.
pub fn rat(num: i64, den: i64) -> Coefficient {
    Coefficient::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

impl Coefficient {
    pub fn mode(&self) -> Mode {
        match self {
            Coefficient::Exact(_) => Mode::Exact,
            Coefficient::Float(_) => Mode::Float,
        }
    }

    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Coefficient::Exact(BigRational::zero()),
            Mode::Float => Coefficient::Float(0.0),
        }
    }

    pub fn one(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Coefficient::Exact(BigRational::one()),
            Mode::Float => Coefficient::Float(1.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(r) => r.is_zero(),
            Coefficient::Float(x) => *x == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coefficient::Exact(r) => r.is_one(),
            Coefficient::Float(x) => *x == 1.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coefficient::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Coefficient::Float(x) => *x,
        }
    }

    pub fn to_float(&self) -> Coefficient {
        Coefficient::Float(self.to_f64())
    }

    pub fn checked_add(&self, other: &Coefficient) -> Result<Coefficient, AlgebraError> {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => Ok(Coefficient::Exact(a + b)),
            (Coefficient::Float(a), Coefficient::Float(b)) => Ok(Coefficient::Float(a + b)),
            _ => Err(AlgebraError::ModeMismatch {
                left: self.mode(),
                right: other.mode(),
            }),
        }
    }

    pub fn checked_mul(&self, other: &Coefficient) -> Result<Coefficient, AlgebraError> {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => Ok(Coefficient::Exact(a * b)),
            (Coefficient::Float(a), Coefficient::Float(b)) => Ok(Coefficient::Float(a * b)),
            _ => Err(AlgebraError::ModeMismatch {
                left: self.mode(),
                right: other.mode(),
            }),
        }
    }

    pub fn neg(&self) -> Coefficient {
        match self {
            Coefficient::Exact(r) => Coefficient::Exact(-r),
            Coefficient::Float(x) => Coefficient::Float(-x),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Coefficient::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Coefficient {
    fn is_negative(&self) -> bool {
        match self {
            Coefficient::Exact(r) => r.is_negative(),
            Coefficient::Float(x) => *x < 0.0,
        }
    }
}

/// Exponent keys: `i32` for one variable, `(i32, i32)` for two.
pub trait Exponent: Ord + Copy + fmt::Debug {
    fn origin() -> Self;
    fn combine(self, other: Self) -> Self;
}

impl Exponent for i32 {
    fn origin() -> Self {
        0
    }
    fn combine(self, other: Self) -> Self {
        self + other
    }
}

impl Exponent for (i32, i32) {
    fn origin() -> Self {
        (0, 0)
    }
    fn combine(self, other: Self) -> Self {
        (self.0 + other.0, self.1 + other.1)
    }
}

/// Sparse Laurent polynomial. Zero coefficients are never stored, so the
/// empty map is exactly the zero polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent<E: Exponent> {
    mode: Mode,
    terms: BTreeMap<E, Coefficient>,
}

pub type LaurentPoly1 = Laurent<i32>;
pub type LaurentPoly2 = Laurent<(i32, i32)>;

impl<E: Exponent> Laurent<E> {
    pub fn zero(mode: Mode) -> Self {
        Laurent {
            mode,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(mode: Mode) -> Self {
        Self::monomial(E::origin(), Coefficient::one(mode))
    }

    pub fn constant(c: Coefficient) -> Self {
        Self::monomial(E::origin(), c)
    }

    pub fn monomial(exp: E, c: Coefficient) -> Self {
        let mut p = Self::zero(c.mode());
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    /// Collects terms, summing repeated exponents. All coefficients must
    /// share `mode`.
    pub fn from_terms<I>(mode: Mode, terms: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (E, Coefficient)>,
    {
        let mut p = Self::zero(mode);
        for (e, c) in terms {
            p.accumulate(e, &c)?;
        }
        Ok(p)
    }

    fn accumulate(&mut self, exp: E, c: &Coefficient) -> Result<(), AlgebraError> {
        if c.mode() != self.mode {
            return Err(AlgebraError::ModeMismatch {
                left: self.mode,
                right: c.mode(),
            });
        }
        let sum = match self.terms.get(&exp) {
            Some(old) => old.checked_add(c)?,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, sum);
        }
        Ok(())
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the constant polynomial 1.
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&E::origin())
                .map(Coefficient::is_one)
                .unwrap_or(false)
    }

    /// Number of stored (nonzero) terms.
    pub fn tap_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&E, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: E) -> Option<&Coefficient> {
        self.terms.get(&exp)
    }

    fn check_mode(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.mode != other.mode {
            return Err(AlgebraError::ModeMismatch {
                left: self.mode,
                right: other.mode,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_mode(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.accumulate(*e, c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Laurent {
            mode: self.mode,
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_mode(other)?;
        let mut out = Self::zero(self.mode);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.accumulate(ea.combine(*eb), &ca.checked_mul(cb)?)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Coefficient) -> Result<Self, AlgebraError> {
        self.mul(&Self::constant(c.clone()))
    }

    /// Float twin of this polynomial (identity for float polynomials).
    pub fn to_float(&self) -> Self {
        Laurent {
            mode: Mode::Float,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c.to_float()))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Largest absolute coefficient difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (e, c) in &self.terms {
            let o = other.terms.get(e).map(Coefficient::to_f64).unwrap_or(0.0);
            worst = worst.max((c.to_f64() - o).abs());
        }
        for (e, c) in &other.terms {
            if !self.terms.contains_key(e) {
                worst = worst.max(c.to_f64().abs());
            }
        }
        worst
    }

    pub fn exactly_equals(&self, other: &Self) -> bool {
        self.mode == other.mode && self.terms == other.terms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl LaurentPoly1 {
    /// Max exponent minus min exponent.
    pub fn degree(&self) -> Result<i32, AlgebraError> {
        let lo = self.terms.keys().next().ok_or(AlgebraError::ZeroDegree)?;
        let hi = self.terms.keys().next_back().ok_or(AlgebraError::ZeroDegree)?;
        Ok(hi - lo)
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    /// Splits off the exponent-0 term: `(scalar_part, residual)` with
    /// `scalar_part + residual == self`.
    pub fn split_scalar(&self) -> (LaurentPoly1, LaurentPoly1) {
        let mut residual = self.clone();
        let scalar = match residual.terms.remove(&0) {
            Some(c) => LaurentPoly1::constant(c),
            None => LaurentPoly1::zero(self.mode),
        };
        (scalar, residual)
    }

    /// Embeds the 1-D filter along one axis of the plane.
    pub fn orient(&self, axis: Axis) -> LaurentPoly2 {
        Laurent {
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| {
                    let e = match axis {
                        Axis::Horizontal => (*k, 0),
                        Axis::Vertical => (0, *k),
                    };
                    (e, c.clone())
                })
                .collect(),
        }
    }

    /// `p(z) -> p(z^factor)`.
    pub fn upsample(&self, factor: i32) -> LaurentPoly1 {
        Laurent {
            mode: self.mode,
            terms: self.terms.iter().map(|(k, c)| (k * factor, c.clone())).collect(),
        }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i32) -> LaurentPoly1 {
        Laurent {
            mode: self.mode,
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// Terms whose exponent has the given parity (0 or 1), with exponents
    /// mapped `e -> (e - parity) / 2`.
    pub fn phase(&self, parity: i32) -> LaurentPoly1 {
        Laurent {
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.rem_euclid(2) == parity)
                .map(|(e, c)| ((e - parity).div_euclid(2), c.clone()))
                .collect(),
        }
    }
}

impl LaurentPoly2 {
    /// Swaps the horizontal and vertical variables.
    pub fn transpose(&self) -> LaurentPoly2 {
        Laurent {
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .map(|((m, n), c)| ((*n, *m), c.clone()))
                .collect(),
        }
    }

    /// Largest `|k_m|` and `|k_n|` over all terms.
    pub fn max_shift(&self) -> (i32, i32) {
        self.terms
            .keys()
            .fold((0, 0), |(am, an), (m, n)| (am.max(m.abs()), an.max(n.abs())))
    }

    /// Tensor product `a(z_m) * b(z_n)`.
    pub fn tensor(horizontal: &LaurentPoly1, vertical: &LaurentPoly1) -> Result<Self, AlgebraError> {
        horizontal
            .orient(Axis::Horizontal)
            .mul(&vertical.orient(Axis::Vertical))
    }
}

impl fmt::Display for LaurentPoly1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms.iter().rev().map(|(k, c)| {
            let mut vars = Vec::new();
            if *k != 0 {
                vars.push(format!("z^{k}"));
            }
            (c, vars)
        }))
    }
}

impl fmt::Display for LaurentPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms.iter().rev().map(|((m, n), c)| {
            let mut vars = Vec::new();
            if *m != 0 {
                vars.push(format!("z_m^{m}"));
            }
            if *n != 0 {
                vars.push(format!("z_n^{n}"));
            }
            (c, vars)
        }))
    }
}

fn write_terms<'a, I>(f: &mut fmt::Formatter<'_>, terms: I) -> fmt::Result
where
    I: Iterator<Item = (&'a Coefficient, Vec<String>)>,
{
    let mut first = true;
    for (c, vars) in terms {
        if first {
            write!(f, "{c}")?;
        } else if c.is_negative() {
            write!(f, " - {}", c.neg())?;
        } else {
            write!(f, " + {c}")?;
        }
        for v in vars {
            write!(f, "*{v}")?;
        }
        first = false;
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}
