//! Rank-2 charge lattice: integer charge vectors, the skew pairing, signs,
//! quadratic refinements, and the slope order on rays.
//!
//! Conventions used throughout the crate:
//!
//! * a charge `(a, b)` is the vector `a*g1 + b*g2` for the fixed basis
//!   `g1 = (1, 0)`, `g2 = (0, 1)`;
//! * the pairing is `<(a1, b1), (a2, b2)> = k * (a1*b2 - a2*b1)` where
//!   `k = <g1, g2>` is the single integer that determines it;
//! * the *positive cone* consists of charges with `a >= 0` and `b >= 0`;
//! * rays in the positive cone are ordered by slope `b/a` **descending**, so
//!   the vertical ray through `(0, 1)` comes first and the horizontal ray
//!   through `(1, 0)` comes last.  This is the traversal order called
//!   *clockwise* elsewhere in the crate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use thiserror::Error;

/// Errors produced by lattice-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    /// The zero charge lies on no ray, has no primitive part, and cannot be
    /// slope-ordered.
    #[error("the zero charge has no ray")]
    ZeroCharge,
    /// Slope ordering is defined on the positive cone only.
    #[error("charge {0} lies outside the positive cone")]
    OutsideCone(Charge),
    /// The multiple of the primitive charge does not fit in `u32`.
    #[error("charge {0} is too large to decompose")]
    MultipleOverflow(Charge),
}

/// A point of the rank-2 charge lattice.
///
/// The derived ordering is *graded lexicographic*: charges compare first by
/// total degree `a + b`, then by `a`.  Iterating a sorted collection of cone
/// charges therefore visits them degree by degree, which the series layer
/// relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Charge {
    pub a: i64,
    pub b: i64,
}

impl Charge {
    /// Origin of the lattice.
    pub const ZERO: Charge = Charge { a: 0, b: 0 };
    /// First basis charge `(1, 0)`.
    pub const G1: Charge = Charge { a: 1, b: 0 };
    /// Second basis charge `(0, 1)`.
    pub const G2: Charge = Charge { a: 0, b: 1 };

    pub const fn new(a: i64, b: i64) -> Self {
        Charge { a, b }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// Whether the charge lies in the positive cone `a >= 0, b >= 0`.
    pub fn in_cone(self) -> bool {
        self.a >= 0 && self.b >= 0
    }

    /// Total degree `a + b`; the grading used for series truncation.
    pub fn degree(self) -> i64 {
        self.a + self.b
    }

    /// The `2 x 2` determinant `self.a * other.b - other.a * self.b`.
    ///
    /// This is the un-scaled pairing; it is negative exactly when `self` has
    /// strictly larger slope than `other` (i.e. precedes it clockwise).
    pub fn cross(self, other: Charge) -> i64 {
        self.a * other.b - other.a * self.b
    }

    /// Scalar multiple `n * self`.
    pub fn scaled(self, n: i64) -> Charge {
        Charge::new(self.a * n, self.b * n)
    }

    /// Splits a nonzero charge as `multiple * primitive` with `multiple >= 1`
    /// and `primitive` having coprime coordinates on the same ray.
    ///
    /// ```
    /// use wcf_core::lattice::Charge;
    /// let (p, n) = Charge::new(6, 9).primitive_decompose().unwrap();
    /// assert_eq!((p, n), (Charge::new(2, 3), 3));
    /// ```
    pub fn primitive_decompose(self) -> Result<(Charge, u32), LatticeError> {
        if self.is_zero() {
            return Err(LatticeError::ZeroCharge);
        }
        let g = self.a.abs().gcd(&self.b.abs());
        let n = u32::try_from(g).map_err(|_| LatticeError::MultipleOverflow(self))?;
        Ok((Charge::new(self.a / g, self.b / g), n))
    }
}

impl Add for Charge {
    type Output = Charge;
    fn add(self, rhs: Charge) -> Charge {
        Charge::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl Sub for Charge {
    type Output = Charge;
    fn sub(self, rhs: Charge) -> Charge {
        Charge::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for Charge {
    type Output = Charge;
    fn neg(self) -> Charge {
        Charge::new(-self.a, -self.b)
    }
}

impl Ord for Charge {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.degree(), self.a, self.b).cmp(&(other.degree(), other.a, other.b))
    }
}

impl PartialOrd for Charge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Orders nonzero cone charges by slope `b/a` descending: `Less` means `x`
/// comes strictly before `y` in a clockwise traversal, `Equal` means they lie
/// on the same ray.
///
/// ```
/// use std::cmp::Ordering;
/// use wcf_core::lattice::{slope_compare, Charge};
/// let vertical = Charge::new(0, 1);
/// let diagonal = Charge::new(1, 1);
/// assert_eq!(slope_compare(vertical, diagonal), Ok(Ordering::Less));
/// assert_eq!(slope_compare(diagonal, Charge::new(3, 3)), Ok(Ordering::Equal));
/// ```
pub fn slope_compare(x: Charge, y: Charge) -> Result<Ordering, LatticeError> {
    for c in [x, y] {
        if c.is_zero() {
            return Err(LatticeError::ZeroCharge);
        }
        if !c.in_cone() {
            return Err(LatticeError::OutsideCone(c));
        }
    }
    Ok(x.cross(y).cmp(&0))
}

/// The skew pairing on the lattice, determined by `k = <g1, g2>`.
///
/// `k = 0` is allowed as the degenerate pairing (every bracket vanishes); it
/// is useful as the "ordinary", untwisted multiplication rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pairing {
    k: u32,
}

impl Pairing {
    pub const fn new(k: u32) -> Self {
        Pairing { k }
    }

    pub fn k(self) -> u32 {
        self.k
    }

    /// `<x, y> = k * (x.a * y.b - y.a * x.b)`.
    ///
    /// ```
    /// use wcf_core::lattice::{Charge, Pairing};
    /// let p = Pairing::new(2);
    /// assert_eq!(p.pair(Charge::new(1, 0), Charge::new(0, 1)), 2);
    /// ```
    pub fn pair(self, x: Charge, y: Charge) -> i64 {
        i64::from(self.k) * x.cross(y)
    }

    /// `(-1)^{<x, y>}`, the sign twisting products of lattice monomials.
    pub fn sign_of(self, x: Charge, y: Charge) -> Sign {
        Sign::from_parity(self.pair(x, y))
    }
}

/// An exact sign, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^n`.
    pub fn from_parity(n: i64) -> Sign {
        if n.rem_euclid(2) == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Minus
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// A sign-valued quadratic refinement of a pairing: a map `sigma` with
///
/// `sigma(x) * sigma(y) = (-1)^{<x, y>} * sigma(x + y)`.
///
/// Any such map is determined by its values `s1 = sigma(g1)`, `s2 = sigma(g2)`
/// on the basis; the closed form is `sigma(a, b) = (-1)^{k*a*b} * s1^a * s2^b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadraticRefinement {
    pub s1: Sign,
    pub s2: Sign,
}

impl QuadraticRefinement {
    pub const fn new(s1: Sign, s2: Sign) -> Self {
        QuadraticRefinement { s1, s2 }
    }

    /// All four refinements of a given pairing.
    pub fn all() -> [QuadraticRefinement; 4] {
        [
            QuadraticRefinement::new(Sign::Plus, Sign::Plus),
            QuadraticRefinement::new(Sign::Plus, Sign::Minus),
            QuadraticRefinement::new(Sign::Minus, Sign::Plus),
            QuadraticRefinement::new(Sign::Minus, Sign::Minus),
        ]
    }

    /// Evaluates the refinement at a charge.
    ///
    /// ```
    /// use wcf_core::lattice::{Charge, Pairing, QuadraticRefinement, Sign};
    /// let q = QuadraticRefinement::default();
    /// assert_eq!(q.refine(Charge::new(1, 1), Pairing::new(1)), Sign::Minus);
    /// ```
    pub fn refine(self, x: Charge, p: Pairing) -> Sign {
        let base = Sign::from_parity(i64::from(p.k()) * x.a * x.b);
        let on_g1 = pow_sign(self.s1, x.a);
        let on_g2 = pow_sign(self.s2, x.b);
        base * on_g1 * on_g2
    }
}

impl Default for QuadraticRefinement {
    /// The refinement taking `+1` on both basis charges.
    fn default() -> Self {
        QuadraticRefinement::new(Sign::Plus, Sign::Plus)
    }
}

fn pow_sign(s: Sign, e: i64) -> Sign {
    match s {
        Sign::Plus => Sign::Plus,
        Sign::Minus => Sign::from_parity(e),
    }
}
