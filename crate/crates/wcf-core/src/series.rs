//! Truncated formal series on the positive cone of the twisted torus algebra.
//!
//! A [`ConeSeries`] is a finite sum `sum_x c_x e_x` with exact rational
//! coefficients, supported on cone charges of total degree at most `N`
//! (the [`TruncationOrder`]).  Multiplication is *twisted* by a pairing:
//!
//! `e_x * e_y = (-1)^{<x, y>} e_{x + y}`,
//!
//! and every operation discards terms of degree above `N`, so the algebra is
//! the quotient by charges of degree `> N`.  The twisted product is
//! commutative and associative because the pairing is skew: the sign is
//! symmetric in `x` and `y`.
//!
//! Representation invariants: zero coefficients are never stored, and all
//! stored charges lie in the positive cone with degree `<= N`.  Binary
//! operations require equal truncation orders and fail otherwise.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::lattice::{Charge, Pairing, Sign};

/// Exact rational scalar used for every coefficient in the crate.
pub type Rat = BigRational;

/// Errors produced by series-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    /// Truncation orders start at 1; order 0 would leave only constants.
    #[error("truncation order must be at least 1")]
    ZeroOrder,
    /// Binary operations require both operands truncated at the same order.
    #[error("mismatched truncation orders {left} and {right}")]
    OrderMismatch { left: u32, right: u32 },
    /// The operation needs a series with constant term exactly 1.
    #[error("series has constant term {found}, expected 1")]
    NotUnit { found: Rat },
    /// The operation needs a series with no constant term.
    #[error("series has nonzero constant term {found}")]
    ConstantTermNotZero { found: Rat },
    /// Series live on the positive cone only.
    #[error("charge {0} lies outside the positive cone")]
    OutsideCone(Charge),
    /// The zero charge spans no ray and cannot index a dilogarithm.
    #[error("the zero charge has no ray")]
    ZeroCharge,
}

/// The truncation order `N >= 1`: charges of total degree above `N` are
/// discarded by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TruncationOrder(u32);

impl TruncationOrder {
    pub fn new(n: u32) -> Result<Self, SeriesError> {
        if n == 0 {
            Err(SeriesError::ZeroOrder)
        } else {
            Ok(TruncationOrder(n))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    fn degree_bound(self) -> i64 {
        i64::from(self.0)
    }
}

impl fmt::Display for TruncationOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A truncated series over the positive cone.
///
/// Coefficients are exact rationals; the map never stores zeros, so equality
/// of representations is equality of series (at equal truncation order).
/// Iteration follows the graded order on charges (degree, then `a`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSeries {
    coeffs: BTreeMap<Charge, Rat>,
    order: TruncationOrder,
}

impl ConeSeries {
    /// The zero series at the given order.
    pub fn zero(order: TruncationOrder) -> Self {
        ConeSeries { coeffs: BTreeMap::new(), order }
    }

    /// The constant series 1.
    pub fn one(order: TruncationOrder) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Charge::ZERO, Rat::one());
        ConeSeries { coeffs, order }
    }

    /// The single term `c * e_x`.  The charge must lie in the positive cone;
    /// a charge of degree above the order yields the zero series, consistent
    /// with the quotient semantics.
    pub fn monomial(order: TruncationOrder, x: Charge, c: Rat) -> Result<Self, SeriesError> {
        if !x.in_cone() {
            return Err(SeriesError::OutsideCone(x));
        }
        let mut s = ConeSeries::zero(order);
        if x.degree() <= order.degree_bound() && !c.is_zero() {
            s.coeffs.insert(x, c);
        }
        Ok(s)
    }

    pub fn order(&self) -> TruncationOrder {
        self.order
    }

    /// The coefficient of `e_x` (zero if absent).
    pub fn coeff(&self, x: Charge) -> Rat {
        self.coeffs.get(&x).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(Charge::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.constant_term().is_one()
    }

    /// Iterates `(charge, coefficient)` pairs in graded order.
    pub fn iter(&self) -> impl Iterator<Item = (Charge, &Rat)> {
        self.coeffs.iter().map(|(c, r)| (*c, r))
    }

    /// Iterates the terms of exact total degree `d`, in order of `a`.
    pub fn degree_terms(&self, d: u32) -> impl Iterator<Item = (Charge, &Rat)> {
        let d = i64::from(d);
        self.coeffs
            .range(..=max_charge_of_degree(d))
            .filter(move |(c, _)| c.degree() == d)
            .map(|(c, r)| (*c, r))
    }

    /// Reinterprets the series at another truncation order, discarding any
    /// terms above the new order.  Raising the order does not (and cannot)
    /// recover previously discarded terms.
    pub fn truncate_to(&self, order: TruncationOrder) -> Self {
        let coeffs = self
            .coeffs
            .range(..=max_charge_of_degree(order.degree_bound()))
            .map(|(c, r)| (*c, r.clone()))
            .collect();
        ConeSeries { coeffs, order }
    }

    /// Wraps an accumulated coefficient map (crate-internal).  The map must
    /// already respect the invariants: cone charges of degree within `order`,
    /// no stored zeros.  The accumulation helpers below maintain them.
    pub(crate) fn from_raw(coeffs: BTreeMap<Charge, Rat>, order: TruncationOrder) -> Self {
        ConeSeries { coeffs, order }
    }

    fn check_same_order(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order != other.order {
            Err(SeriesError::OrderMismatch {
                left: self.order.get(),
                right: other.order.get(),
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_same_order(other)?;
        let mut out = self.clone();
        for (x, c) in &other.coeffs {
            add_to(&mut out.coeffs, *x, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_same_order(other)?;
        let mut out = self.clone();
        for (x, c) in &other.coeffs {
            add_to(&mut out.coeffs, *x, -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(x, c)| (*x, -c.clone())).collect();
        ConeSeries { coeffs, order: self.order }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return ConeSeries::zero(self.order);
        }
        let coeffs = self.coeffs.iter().map(|(x, r)| (*x, r * c)).collect();
        ConeSeries { coeffs, order: self.order }
    }

    /// The twisted product `sum (-1)^{<x, y>} c_x d_y e_{x + y}`, truncated.
    pub fn twisted_mul(&self, other: &Self, pairing: Pairing) -> Result<Self, SeriesError> {
        self.check_same_order(other)?;
        let mut acc = BTreeMap::new();
        acc_mul_shifted(
            &mut acc,
            self,
            other,
            Charge::ZERO,
            &Rat::one(),
            pairing,
            self.order,
        );
        Ok(ConeSeries { coeffs: acc, order: self.order })
    }

    /// Integer power of a series with constant term 1.  Negative exponents
    /// invert: `unit_pow(f, -1)` is the multiplicative inverse modulo the
    /// truncation.
    pub fn unit_pow(&self, m: i64, pairing: Pairing) -> Result<Self, SeriesError> {
        let _ = self.require_unit()?;
        let (base, e) = if m < 0 {
            (self.unit_inverse(pairing)?, m.unsigned_abs())
        } else {
            (self.clone(), m.unsigned_abs())
        };
        // Binary exponentiation; each squaring stays truncated.
        let mut result = ConeSeries::one(self.order);
        let mut square = base;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.twisted_mul(&square, pairing)?;
            }
            e >>= 1;
            if e > 0 {
                square = square.twisted_mul(&square, pairing)?;
            }
        }
        Ok(result)
    }

    /// Rational power `f^c = exp(c * log f)` of a series with constant term 1.
    /// Integer `c` delegates to [`ConeSeries::unit_pow`]; the two branches
    /// agree where both apply.
    pub fn unit_pow_rational(&self, c: &Rat, pairing: Pairing) -> Result<Self, SeriesError> {
        if c.is_integer() {
            if let Some(m) = c.numer().to_i64() {
                return self.unit_pow(m, pairing);
            }
        }
        let log = self.series_log(pairing)?;
        log.scale(c).series_exp(pairing)
    }

    /// The exponential `sum_j f^j / j!` of a series with zero constant term.
    pub fn series_exp(&self, pairing: Pairing) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        if !c0.is_zero() {
            return Err(SeriesError::ConstantTermNotZero { found: c0 });
        }
        let mut result = ConeSeries::one(self.order);
        let mut power = ConeSeries::one(self.order);
        let mut factorial = Rat::one();
        for j in 1..=self.order.get() as i64 {
            power = power.twisted_mul(self, pairing)?;
            if power.is_zero() {
                break;
            }
            factorial *= Rat::from_integer(j.into());
            result = result.add(&power.scale(&factorial.recip()))?;
        }
        Ok(result)
    }

    /// The logarithm `sum_j (-1)^{j+1} u^j / j` of `1 + u`, requiring
    /// constant term exactly 1.
    pub fn series_log(&self, pairing: Pairing) -> Result<Self, SeriesError> {
        let u = self.require_unit()?;
        let mut result = ConeSeries::zero(self.order);
        let mut power = ConeSeries::one(self.order);
        for j in 1..=self.order.get() as i64 {
            power = power.twisted_mul(&u, pairing)?;
            if power.is_zero() {
                break;
            }
            let coeff = Rat::new(Sign::from_parity(j + 1).as_i64().into(), j.into());
            result = result.add(&power.scale(&coeff))?;
        }
        Ok(result)
    }

    /// The truncated dilogarithm `sum_{m >= 1} e_{m x} / m^2` of a nonzero
    /// cone charge, the Hamiltonian generating a single dilogarithm flow.
    pub fn dilog(order: TruncationOrder, x: Charge) -> Result<Self, SeriesError> {
        if x.is_zero() {
            return Err(SeriesError::ZeroCharge);
        }
        if !x.in_cone() {
            return Err(SeriesError::OutsideCone(x));
        }
        let mut s = ConeSeries::zero(order);
        let mut m = 1i64;
        while m * x.degree() <= order.degree_bound() {
            s.coeffs.insert(x.scaled(m), Rat::new(1.into(), (m * m).into()));
            m += 1;
        }
        Ok(s)
    }

    /// The inverse of a series with constant term 1, via the geometric series
    /// of its positive-degree part.
    fn unit_inverse(&self, pairing: Pairing) -> Result<Self, SeriesError> {
        let u = self.require_unit()?;
        let mut result = ConeSeries::one(self.order);
        let mut power = ConeSeries::one(self.order);
        for j in 1..=self.order.get() as i64 {
            power = power.twisted_mul(&u, pairing)?;
            if power.is_zero() {
                break;
            }
            if Sign::from_parity(j).is_negative() {
                result = result.sub(&power)?;
            } else {
                result = result.add(&power)?;
            }
        }
        Ok(result)
    }

    /// Checks the constant term is 1 and returns the positive-degree part.
    fn require_unit(&self) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        if !c0.is_one() {
            return Err(SeriesError::NotUnit { found: c0 });
        }
        let mut u = self.clone();
        u.coeffs.remove(&Charge::ZERO);
        Ok(u)
    }
}

impl fmt::Display for ConeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (x, c)) in self.iter().enumerate() {
            let negative = c.is_negative();
            let magnitude = if negative { -c.clone() } else { c.clone() };
            if i == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else if negative {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if x.is_zero() {
                write!(f, "{magnitude}")?;
            } else if magnitude.is_one() {
                write!(f, "e{x}")?;
            } else {
                write!(f, "{magnitude} e{x}")?;
            }
        }
        Ok(())
    }
}

/// The largest charge of total degree `d` in the graded order; used as an
/// upper bound for range queries over cone charges of degree `<= d`.
fn max_charge_of_degree(d: i64) -> Charge {
    Charge::new(d, 0)
}

fn add_to(map: &mut BTreeMap<Charge, Rat>, x: Charge, c: Rat) {
    match map.entry(x) {
        Entry::Vacant(e) => {
            if !c.is_zero() {
                e.insert(c);
            }
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// Accumulates `scale * f * g * e_shift` (twisted product) into `acc`,
/// truncating at `order`.  Fusing the shift into the double loop lets
/// automorphism application run without intermediate series allocations.
pub(crate) fn acc_mul_shifted(
    acc: &mut BTreeMap<Charge, Rat>,
    f: &ConeSeries,
    g: &ConeSeries,
    shift: Charge,
    scale: &Rat,
    pairing: Pairing,
    order: TruncationOrder,
) {
    let bound = order.degree_bound();
    let scale_is_one = scale.is_one();
    for (x, cx) in f.iter() {
        let remaining = bound - x.degree() - shift.degree();
        if remaining < 0 {
            break; // graded iteration: every later term of f is too deep
        }
        for (y, cy) in g.coeffs.range(..=max_charge_of_degree(remaining)) {
            let z = x + *y + shift;
            // e_x e_y e_shift = (-1)^{<x,y> + <x+y,shift>} e_z
            let parity = pairing.pair(x, *y) + pairing.pair(x + *y, shift);
            let mut term = cx * cy;
            if !scale_is_one {
                term *= scale;
            }
            if Sign::from_parity(parity).is_negative() {
                term = -term;
            }
            add_to(acc, z, term);
        }
    }
}

/// Accumulates `sum_{x, y} w(x, y) * c_x * d_y * e_{x + y}` into `acc`,
/// truncated at `order`, for an integer-valued weight `w`.  Pairs with zero
/// weight are skipped.  This is the common shape of the twisted product
/// (weight `(-1)^{<x,y>}`) and the Poisson bracket
/// (weight `(-1)^{<x,y>} <x,y>`).
pub(crate) fn acc_pairwise(
    acc: &mut BTreeMap<Charge, Rat>,
    f: &ConeSeries,
    g: &ConeSeries,
    order: TruncationOrder,
    w: impl Fn(Charge, Charge) -> i64,
) {
    let bound = order.degree_bound();
    for (x, cx) in f.iter() {
        let remaining = bound - x.degree();
        if remaining < 0 {
            break;
        }
        for (y, cy) in g.coeffs.range(..=max_charge_of_degree(remaining)) {
            let weight = w(x, *y);
            if weight == 0 {
                continue;
            }
            let mut term = cx * cy;
            term *= Rat::from_integer(weight.into());
            add_to(acc, x + *y, term);
        }
    }
}
