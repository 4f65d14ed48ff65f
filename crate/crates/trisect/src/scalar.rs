//! Numeric backend abstraction.
//!
//! Every geometric quantity in this crate is a [`Scalar`] belonging to a
//! [`Backend`]. Two backends are provided: plain `f64` ("machine") and an
//! arbitrary-precision float ("bigfloat") with a configurable number of
//! mantissa bits. The whole kernel is generic over the scalar type, so a
//! construction replays identically at either precision.

use std::cell::RefCell;
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use thiserror::Error;

/// An abstract real number.
///
/// Closed under the arithmetic operators, `sqrt` of a nonnegative argument,
/// and the trigonometric operations needed to place a given angle. In-contract
/// inputs never produce NaN, and comparisons are total for the values the
/// kernel manufactures. Arithmetic is expressed as methods so that the same
/// code monomorphizes over both backends.
pub trait Scalar:
    Sized + Clone + PartialEq + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Builds a value from `v` carrying `precision_bits` of mantissa.
    fn from_f64_prec(v: f64, precision_bits: u32) -> Self;
    /// Builds a constant at the same precision as `self`.
    fn lift(&self, v: f64) -> Self;
    /// Nearest `f64` (used for reporting and rendering, never for geometry).
    fn to_f64(&self) -> f64;
    /// π at the precision of `self`.
    fn pi_like(&self) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    /// Four-quadrant arctangent; `self` is the y component.
    fn atan2(&self, x: &Self) -> Self;

    fn is_zero(&self) -> bool {
        *self == self.lift(0.0)
    }
}

impl Scalar for f64 {
    fn from_f64_prec(v: f64, _precision_bits: u32) -> Self {
        v
    }
    fn lift(&self, v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pi_like(&self) -> Self {
        std::f64::consts::PI
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constants cache allocation"));
}

/// Arbitrary-precision scalar backed by `astro_float::BigFloat`.
///
/// Each value carries its precision; binary operations round to the larger
/// precision of the two operands with round-to-even, so a fixed operation
/// sequence is bit-reproducible.
#[derive(Clone, Debug)]
pub struct BigScalar {
    value: BigFloat,
    prec: usize,
}

impl BigScalar {
    fn wrap(value: BigFloat, prec: usize) -> Self {
        BigScalar { value, prec }
    }

    fn join(&self, rhs: &Self) -> usize {
        self.prec.max(rhs.prec)
    }

    pub fn precision_bits(&self) -> usize {
        self.prec
    }

    /// 2^k at precision `prec`.
    fn pow2(k: i32, prec: usize) -> Self {
        let mut v = BigFloat::from_f64(1.0, prec);
        // astro-float keeps the mantissa in [0.5, 1), so 1.0 has exponent 1.
        v.set_exponent(1 + k);
        BigScalar::wrap(v, prec)
    }
}

impl PartialEq for BigScalar {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for BigScalar {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl fmt::Display for BigScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.value, f)
    }
}

impl Scalar for BigScalar {
    fn from_f64_prec(v: f64, precision_bits: u32) -> Self {
        let p = precision_bits as usize;
        BigScalar::wrap(BigFloat::from_f64(v, p), p)
    }

    fn lift(&self, v: f64) -> Self {
        BigScalar::wrap(BigFloat::from_f64(v, self.prec), self.prec)
    }

    fn to_f64(&self) -> f64 {
        if self.value.is_zero() {
            return 0.0;
        }
        match self.value.as_raw_parts() {
            Some((m, _n, s, e, _inexact)) => {
                let k = m.len();
                let top = m[k - 1] as f64;
                let next = if k >= 2 { m[k - 2] as f64 } else { 0.0 };
                let frac = top * 2f64.powi(-64) + next * 2f64.powi(-128);
                let v = frac * 2f64.powi(e);
                if s == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
            None => f64::NAN,
        }
    }

    fn pi_like(&self) -> Self {
        let p = self.prec;
        BigScalar::wrap(CONSTS.with(|cc| cc.borrow_mut().pi(p, RM)), p)
    }

    fn add(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        BigScalar::wrap(self.value.add(&rhs.value, p, RM), p)
    }

    fn sub(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        BigScalar::wrap(self.value.sub(&rhs.value, p, RM), p)
    }

    fn mul(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        BigScalar::wrap(self.value.mul(&rhs.value, p, RM), p)
    }

    fn div(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        BigScalar::wrap(self.value.div(&rhs.value, p, RM), p)
    }

    fn neg(&self) -> Self {
        let mut v = self.value.clone();
        v.inv_sign();
        BigScalar::wrap(v, self.prec)
    }

    fn abs(&self) -> Self {
        BigScalar::wrap(self.value.abs(), self.prec)
    }

    fn sqrt(&self) -> Self {
        BigScalar::wrap(self.value.sqrt(self.prec, RM), self.prec)
    }

    fn sin(&self) -> Self {
        let p = self.prec;
        BigScalar::wrap(CONSTS.with(|cc| self.value.sin(p, RM, &mut cc.borrow_mut())), p)
    }

    fn cos(&self) -> Self {
        let p = self.prec;
        BigScalar::wrap(CONSTS.with(|cc| self.value.cos(p, RM, &mut cc.borrow_mut())), p)
    }

    fn tan(&self) -> Self {
        let p = self.prec;
        BigScalar::wrap(CONSTS.with(|cc| self.value.tan(p, RM, &mut cc.borrow_mut())), p)
    }

    fn atan2(&self, x: &Self) -> Self {
        let p = self.join(x);
        let zero = self.lift(0.0);
        if x.value.is_zero() {
            if self.value.is_zero() {
                return zero;
            }
            let half_pi = self.pi_like().div(&self.lift(2.0));
            return if *self > zero { half_pi } else { half_pi.neg() };
        }
        let q = self.div(x);
        let base = BigScalar::wrap(
            CONSTS.with(|cc| q.value.atan(p, RM, &mut cc.borrow_mut())),
            p,
        );
        if *x > zero {
            base
        } else if *self >= zero {
            base.add(&self.pi_like())
        } else {
            base.sub(&self.pi_like())
        }
    }

    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

/// An angle in degrees, the external unit throughout the crate.
///
/// Undirected measurements lie in [0, 180]; raw values (differences,
/// signed seeds) may leave that interval.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct AngleDeg<S>(pub S);

impl<S: Scalar> AngleDeg<S> {
    pub fn new(deg: S) -> Self {
        AngleDeg(deg)
    }

    pub fn deg(&self) -> &S {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Degrees to radians.
    pub fn to_radians(&self) -> S {
        self.0.mul(&self.0.pi_like()).div(&self.0.lift(180.0))
    }

    /// Radians to degrees.
    pub fn from_radians(rad: &S) -> Self {
        AngleDeg(rad.mul(&rad.lift(180.0)).div(&rad.pi_like()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("bigfloat backend needs at least 53 precision bits, got {0}")]
    PrecisionTooLow(u32),
}

/// A configured numeric backend: precision plus the comparison tolerance used
/// for degeneracy decisions on unit-scale constructions.
#[derive(Clone, Debug)]
pub struct Backend<S: Scalar> {
    name: String,
    precision_bits: u32,
    eps: S,
}

impl Backend<f64> {
    /// The machine backend: 53-bit significand, default eps 1e-9.
    pub fn machine() -> Self {
        Backend {
            name: "machine".to_string(),
            precision_bits: 53,
            eps: 1e-9,
        }
    }
}

impl Backend<BigScalar> {
    /// A high-precision backend. Default eps is 2^(−precision_bits/2 + 4).
    pub fn bigfloat(precision_bits: u32) -> Result<Self, BackendError> {
        if precision_bits < 53 {
            return Err(BackendError::PrecisionTooLow(precision_bits));
        }
        let k = 4 - (precision_bits as i32) / 2;
        Ok(Backend {
            name: format!("bigfloat:{precision_bits}"),
            precision_bits,
            eps: BigScalar::pow2(k, precision_bits as usize),
        })
    }
}

impl<S: Scalar> Backend<S> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn eps(&self) -> &S {
        &self.eps
    }

    /// Overrides the comparison tolerance.
    pub fn with_eps(mut self, eps: S) -> Self {
        self.eps = eps;
        self
    }

    /// Lifts an `f64` into this backend's scalar type.
    pub fn scalar(&self, v: f64) -> S {
        S::from_f64_prec(v, self.precision_bits)
    }

    pub fn angle(&self, deg: f64) -> AngleDeg<S> {
        AngleDeg(self.scalar(deg))
    }
}

/// Which backend to construct; the CLI parses this from flags or the
/// `GEOM_BACKEND` environment variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendSpec {
    Machine,
    Bigfloat { precision_bits: u32 },
}

impl std::str::FromStr for BackendSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "machine" {
            return Ok(BackendSpec::Machine);
        }
        if let Some(bits) = s.strip_prefix("bigfloat:") {
            let precision_bits: u32 = bits
                .parse()
                .map_err(|_| format!("invalid precision in backend spec `{s}`"))?;
            return Ok(BackendSpec::Bigfloat { precision_bits });
        }
        Err(format!(
            "unknown backend `{s}` (expected `machine` or `bigfloat:<bits>`)"
        ))
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Machine => write!(f, "machine"),
            BackendSpec::Bigfloat { precision_bits } => write!(f, "bigfloat:{precision_bits}"),
        }
    }
}
