//! Central charges, the support property, and exact wall-crossing along
//! straight-line paths.
//!
//! A [`StabilityData`] bundles a pairing, a rational central charge `Z`
//! (a complex-linear map from charges to `Q + Qi`), a rational quadratic
//! form `Q`, and a [`RaySpectrum`] of weights.  The *support property*
//! ([`check_support`]) asks that `Q` be positive on every weighted charge,
//! that `Z` not vanish there, and that `Q` be negative on the kernel of `Z`
//! whenever that kernel is nontrivial.
//!
//! Moving `Z` along the straight segment from one central charge to another
//! ([`lift_path`]) transports the spectrum.  Because `Z_t` is linear in the
//! charge, the alignment locus of any two charges is governed by the single
//! quadratic `W(t) = cross(Z_t(g1), Z_t(g2))`: two cone charges can only
//! become argument-aligned at a root of `W`, where `Z_t` drops to rank one
//! and *every* charge maps onto one real line.  Each such root splits the
//! relevant charges into two opposite half-line classes; a class containing
//! at least two distinct rays forms a wall ([`Wall`]), and crossing it
//! re-factors the sector product in the opposite slope order
//! ([`cross_wall`]).  All of this is exact: wall parameters are rationals or
//! quadratic surds with isolating intervals ([`PathParam`]), and every sign
//! is decided by exact arithmetic.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::factor::{factorize, spectrum_to_auto, Direction, FactorError, RaySpectrum};
use crate::lattice::{slope_compare, Charge, LatticeError, Pairing};
use crate::series::Rat;

/// Errors produced by stability-side operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    /// The quadratic form must be non-degenerate.
    #[error("quadratic form is degenerate (zero determinant)")]
    DegenerateForm,
    /// The support property fails for the data at hand.
    #[error("support property fails: {0}")]
    Support(SupportReport),
    /// The central charge of a relevant charge vanishes somewhere on the
    /// path (walls are not isolated there).
    #[error("central charge of {charge} vanishes at parameter {t} on the path")]
    CentralChargeVanishesOnPath { charge: Charge, t: Rat },
    /// Two relevant charges on different rays stay aligned along the entire
    /// path; the path runs inside a wall instead of across it.
    #[error("charges {first} and {second} stay aligned along the entire path")]
    PermanentlyAligned { first: Charge, second: Charge },
    /// The alignment locus touches the path without crossing it.
    #[error("wall at parameter {t} is tangent to the path (no transversal crossing)")]
    TangentWall { t: PathParam },
    /// A path endpoint sits exactly on a wall.
    #[error("path endpoint at parameter {t} lies on the wall spanned by {hi} and {lo}")]
    EndpointOnWall { t: Rat, hi: Charge, lo: Charge },
    /// Two walls in opposite half-planes share one parameter; the path is
    /// not generic and the crossing order is ambiguous.
    #[error("two walls share parameter {t}: sectors ({hi1}, {lo1}) and ({hi2}, {lo2})")]
    CoincidentWalls {
        t: PathParam,
        hi1: Charge,
        lo1: Charge,
        hi2: Charge,
        lo2: Charge,
    },
    /// At a wall parameter the form fails to be negative on the kernel line
    /// of the central charge.
    #[error("quadratic form is not negative on the central-charge kernel at wall parameter {t}")]
    KernelNotNegativeAtWall { t: PathParam },
    /// A wall must consist of two distinct rays in slope order.
    #[error("invalid wall: {hi} must be strictly steeper than {lo}")]
    InvalidWall { hi: Charge, lo: Charge },
}

/// A complex number with exact rational parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalComplex {
    pub re: Rat,
    pub im: Rat,
}

impl RationalComplex {
    pub fn new(re: Rat, im: Rat) -> Self {
        RationalComplex { re, im }
    }

    pub fn from_integers(re: i64, im: i64) -> Self {
        RationalComplex::new(Rat::from_integer(re.into()), Rat::from_integer(im.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// `re * other.im - im * other.re`; zero exactly when the two are
    /// real-collinear.
    pub fn cross(&self, other: &RationalComplex) -> Rat {
        &self.re * &other.im - &self.im * &other.re
    }

    /// The Euclidean inner product `re * other.re + im * other.im`.
    pub fn dot(&self, other: &RationalComplex) -> Rat {
        &self.re * &other.re + &self.im * &other.im
    }
}

impl fmt::Display for RationalComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", self.re, self.im)
    }
}

/// A rational central charge, determined by its values on the two basis
/// charges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentralCharge {
    pub z1: RationalComplex,
    pub z2: RationalComplex,
}

impl CentralCharge {
    pub fn new(z1: RationalComplex, z2: RationalComplex) -> Self {
        CentralCharge { z1, z2 }
    }

    /// `Z(a, b) = a z1 + b z2`.
    pub fn eval(&self, gamma: Charge) -> RationalComplex {
        let a = Rat::from_integer(gamma.a.into());
        let b = Rat::from_integer(gamma.b.into());
        RationalComplex::new(
            &a * &self.z1.re + &b * &self.z2.re,
            &a * &self.z1.im + &b * &self.z2.im,
        )
    }
}

/// A non-degenerate rational quadratic form
/// `Q(a, b) = q11 a^2 + 2 q12 a b + q22 b^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    q11: Rat,
    q12: Rat,
    q22: Rat,
}

impl QuadraticForm {
    pub fn new(q11: Rat, q12: Rat, q22: Rat) -> Result<Self, StabilityError> {
        let form = QuadraticForm { q11, q12, q22 };
        if form.determinant().is_zero() {
            return Err(StabilityError::DegenerateForm);
        }
        Ok(form)
    }

    pub fn q11(&self) -> &Rat {
        &self.q11
    }

    pub fn q12(&self) -> &Rat {
        &self.q12
    }

    pub fn q22(&self) -> &Rat {
        &self.q22
    }

    pub fn determinant(&self) -> Rat {
        &self.q11 * &self.q22 - &self.q12 * &self.q12
    }

    pub fn eval(&self, gamma: Charge) -> Rat {
        let a = Rat::from_integer(gamma.a.into());
        let b = Rat::from_integer(gamma.b.into());
        self.eval_rational(&a, &b)
    }

    fn eval_rational(&self, a: &Rat, b: &Rat) -> Rat {
        &self.q11 * a * a + Rat::from_integer(2.into()) * &self.q12 * a * b + &self.q22 * b * b
    }
}

/// A spectrum together with the stability inputs that constrain it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityData {
    pub pairing: Pairing,
    pub central_charge: CentralCharge,
    pub form: QuadraticForm,
    pub spectrum: RaySpectrum,
}

/// One way the support property can fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupportViolation {
    /// `Z` vanishes on a weighted charge.
    VanishingCentralCharge { charge: Charge },
    /// `Q` is not positive on a weighted charge.
    NonPositiveOnSupport { charge: Charge, value: Rat },
    /// `Z` has a nontrivial kernel and `Q` is not negative on it; the
    /// direction is a (projective) rational witness.
    NonNegativeOnKernel { direction: (Rat, Rat), value: Rat },
}

impl fmt::Display for SupportViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportViolation::VanishingCentralCharge { charge } => {
                write!(f, "central charge vanishes on weighted charge {charge}")
            }
            SupportViolation::NonPositiveOnSupport { charge, value } => {
                write!(f, "form takes non-positive value {value} on weighted charge {charge}")
            }
            SupportViolation::NonNegativeOnKernel { direction, value } => {
                write!(
                    f,
                    "form takes non-negative value {value} on central-charge kernel direction ({}, {})",
                    direction.0, direction.1
                )
            }
        }
    }
}

/// The outcome of a support check: empty means the property holds.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportReport {
    pub violations: Vec<SupportViolation>,
}

impl SupportReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for SupportReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            return f.write_str("support property holds");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the support property: `Q > 0` and `Z != 0` on every weighted
/// charge, and `Q < 0` on the kernel of `Z` when `Z` is degenerate.
pub fn check_support(data: &StabilityData) -> SupportReport {
    let mut report = SupportReport::default();
    for charge in data.spectrum.support_charges() {
        if data.central_charge.eval(charge).is_zero() {
            report.violations.push(SupportViolation::VanishingCentralCharge { charge });
        }
        let value = data.form.eval(charge);
        if !value.is_positive() {
            report.violations.push(SupportViolation::NonPositiveOnSupport { charge, value });
        }
    }
    let z = &data.central_charge;
    if z.z1.is_zero() && z.z2.is_zero() {
        // Z = 0: the kernel is the whole plane, so Q must be negative
        // definite.  Report a witness direction otherwise.
        let q = &data.form;
        let witness = if !q.q11.is_negative() {
            Some((Rat::one(), Rat::zero()))
        } else if !q.q22.is_negative() {
            Some((Rat::zero(), Rat::one()))
        } else if !q.determinant().is_positive() {
            // With q11 < 0, Q(q12, -q11) = q11 * det >= 0 when det <= 0.
            Some((q.q12.clone(), -q.q11.clone()))
        } else {
            None
        };
        if let Some(direction) = witness {
            let value = data.form.eval_rational(&direction.0, &direction.1);
            report.violations.push(SupportViolation::NonNegativeOnKernel { direction, value });
        }
    } else if z.z1.cross(&z.z2).is_zero() {
        // Rank one: the kernel is the line through (z2, -z1) read off either
        // the real or the imaginary components (whichever is nonzero).
        let direction = if !z.z1.re.is_zero() || !z.z2.re.is_zero() {
            (z.z2.re.clone(), -z.z1.re.clone())
        } else {
            (z.z2.im.clone(), -z.z1.im.clone())
        };
        let value = data.form.eval_rational(&direction.0, &direction.1);
        if !value.is_negative() {
            report.violations.push(SupportViolation::NonNegativeOnKernel { direction, value });
        }
    }
    report
}

/// An exact path parameter in `[0, 1]`: either a rational or the unique
/// irrational root of a rational quadratic inside an isolating interval.
#[derive(Debug, Clone)]
pub enum PathParam {
    Rational(Rat),
    /// The single root of `poly[0] + poly[1] t + poly[2] t^2` inside
    /// `(lo, hi)`; the polynomial has opposite signs at the endpoints and
    /// the root is irrational (`poly` has no rational roots).
    QuadraticRoot { poly: [Rat; 3], lo: Rat, hi: Rat },
}

impl PathParam {
    /// Exact comparison against a rational.  Never `Equal` for an
    /// irrational root.
    pub fn cmp_rational(&self, r: &Rat) -> Ordering {
        match self {
            PathParam::Rational(v) => v.cmp(r),
            PathParam::QuadraticRoot { poly, lo, hi } => {
                if r <= lo {
                    Ordering::Greater
                } else if r >= hi {
                    Ordering::Less
                } else {
                    // The sign of the polynomial flips exactly at the root:
                    // matching the sign at `lo` puts `r` left of the root.
                    let at_lo = quad_eval(poly, lo);
                    let at_r = quad_eval(poly, r);
                    debug_assert!(!at_r.is_zero(), "isolated root is irrational");
                    if at_r.is_positive() == at_lo.is_positive() {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    }
                }
            }
        }
    }

    /// Exact comparison of two parameters.
    pub fn compare(&self, other: &PathParam) -> Ordering {
        match (self, other) {
            (PathParam::Rational(a), PathParam::Rational(b)) => a.cmp(b),
            (PathParam::Rational(a), PathParam::QuadraticRoot { .. }) => {
                other.cmp_rational(a).reverse()
            }
            (PathParam::QuadraticRoot { .. }, PathParam::Rational(b)) => self.cmp_rational(b),
            (
                PathParam::QuadraticRoot { poly: p, .. },
                PathParam::QuadraticRoot { poly: q, .. },
            ) => {
                if quad_proportional(p, q) {
                    // Same minimal polynomial: compare which of its two roots
                    // each interval isolates (left root < vertex < right).
                    let side = |param: &PathParam| -> i8 {
                        if let PathParam::QuadraticRoot { poly, lo, .. } = param {
                            let s_lo = quad_eval(poly, lo);
                            if s_lo.is_positive() == poly[2].is_positive() {
                                -1 // signs match the leading branch: left root
                            } else {
                                1
                            }
                        } else {
                            unreachable!()
                        }
                    };
                    side(self).cmp(&side(other))
                } else {
                    // Distinct irrational roots: refine both isolating
                    // intervals until they separate.
                    let mut a = self.clone();
                    let mut b = other.clone();
                    loop {
                        if let (Some(o), _) = (a.interval_cmp(&b), ()) {
                            return o;
                        }
                        a.refine();
                        b.refine();
                    }
                }
            }
        }
    }

    /// `Some(ordering)` once the isolating intervals are disjoint.
    fn interval_cmp(&self, other: &PathParam) -> Option<Ordering> {
        let (alo, ahi) = self.bounds();
        let (blo, bhi) = other.bounds();
        if ahi <= blo {
            Some(Ordering::Less)
        } else if bhi <= alo {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    fn bounds(&self) -> (&Rat, &Rat) {
        match self {
            PathParam::Rational(v) => (v, v),
            PathParam::QuadraticRoot { lo, hi, .. } => (lo, hi),
        }
    }

    /// Halves the isolating interval of an irrational root (no-op for
    /// rationals).
    pub fn refine(&mut self) {
        if let PathParam::QuadraticRoot { poly, lo, hi } = self {
            let mid = (&*lo + &*hi) / Rat::from_integer(2.into());
            let at_mid = quad_eval(poly, &mid);
            debug_assert!(!at_mid.is_zero(), "isolated root is irrational");
            if at_mid.is_positive() == quad_eval(poly, lo).is_positive() {
                *lo = mid;
            } else {
                *hi = mid;
            }
        }
    }

    /// A floating-point approximation for display purposes only.
    pub fn approx(&self) -> f64 {
        match self {
            PathParam::Rational(v) => rat_to_f64(v),
            PathParam::QuadraticRoot { .. } => {
                let mut p = self.clone();
                for _ in 0..64 {
                    p.refine();
                }
                let (lo, hi) = p.bounds();
                (rat_to_f64(lo) + rat_to_f64(hi)) / 2.0
            }
        }
    }
}

impl PartialEq for PathParam {
    fn eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

impl Eq for PathParam {}

impl PartialOrd for PathParam {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.compare(other))
    }
}

impl Ord for PathParam {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl fmt::Display for PathParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathParam::Rational(v) => write!(f, "{v}"),
            PathParam::QuadraticRoot { .. } => write!(f, "~{:.9}", self.approx()),
        }
    }
}

/// A wall met along a path: the parameter where the sector's charges align,
/// and the extremal primitive rays of that sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    /// Path parameter of the crossing, strictly inside `(0, 1)`.
    pub t: PathParam,
    /// The steepest primitive ray of the wall's sector.
    pub hi_ray: Charge,
    /// The shallowest primitive ray of the wall's sector.
    pub lo_ray: Charge,
}

// --- exact polynomial helpers ------------------------------------------------

/// `c[0] + c[1] t`, an affine rational function of the path parameter.
type Affine = [Rat; 2];
/// `c[0] + c[1] t + c[2] t^2`.
type Quad = [Rat; 3];

fn aff_eval(a: &Affine, t: &Rat) -> Rat {
    &a[0] + &a[1] * t
}

fn aff_mul(a: &Affine, b: &Affine) -> Quad {
    [
        &a[0] * &b[0],
        &a[0] * &b[1] + &a[1] * &b[0],
        &a[1] * &b[1],
    ]
}

fn quad_eval(q: &Quad, t: &Rat) -> Rat {
    &q[0] + &q[1] * t + &q[2] * t * t
}

fn quad_is_zero(q: &Quad) -> bool {
    q.iter().all(Rat::is_zero)
}

fn quad_add(a: &Quad, b: &Quad) -> Quad {
    [&a[0] + &b[0], &a[1] + &b[1], &a[2] + &b[2]]
}

fn quad_sub(a: &Quad, b: &Quad) -> Quad {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn quad_scale(a: &Quad, c: &Rat) -> Quad {
    [&a[0] * c, &a[1] * c, &a[2] * c]
}

fn quad_proportional(p: &Quad, q: &Quad) -> bool {
    for i in 0..3 {
        for j in (i + 1)..3 {
            if &p[i] * &q[j] != &p[j] * &q[i] {
                return false;
            }
        }
    }
    true
}

fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// The exact sign (`-1`, `0`, `1`) of a rational quadratic evaluated at a
/// path parameter.
fn sign_at(q: &Quad, t: &PathParam) -> i8 {
    match t {
        PathParam::Rational(r) => rat_sign(&quad_eval(q, r)),
        PathParam::QuadraticRoot { poly, .. } => {
            // Reduce modulo the parameter's minimal polynomial: the
            // remainder is linear and its sign at the root is decided by
            // comparing the root against the remainder's zero.
            debug_assert!(!poly[2].is_zero());
            let ratio = &q[2] / &poly[2];
            let l0 = &q[0] - &ratio * &poly[0];
            let l1 = &q[1] - &ratio * &poly[1];
            if l1.is_zero() {
                return rat_sign(&l0);
            }
            let zero_of_linear = -&l0 / &l1;
            let l1_sign = rat_sign(&l1);
            match t.cmp_rational(&zero_of_linear) {
                Ordering::Greater => l1_sign,
                Ordering::Less => -l1_sign,
                Ordering::Equal => 0,
            }
        }
    }
}

fn rat_sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Exact square root of a non-negative rational, if it is a perfect square.
fn rat_sqrt(r: &Rat) -> Option<Rat> {
    debug_assert!(!r.is_negative());
    let numer = r.numer();
    let denom = r.denom();
    let sn = numer.sqrt();
    let sd = denom.sqrt();
    if &(&sn * &sn) == numer && &(&sd * &sd) == denom {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

// --- path geometry -----------------------------------------------------------

/// The affine components of `Z_t = (1 - t) Z_start + t Z_end`.
struct PathGeometry {
    z1_re: Affine,
    z1_im: Affine,
    z2_re: Affine,
    z2_im: Affine,
}

impl PathGeometry {
    fn new(start: &CentralCharge, end: &CentralCharge) -> Self {
        let affine = |s: &Rat, e: &Rat| -> Affine { [s.clone(), e - s] };
        PathGeometry {
            z1_re: affine(&start.z1.re, &end.z1.re),
            z1_im: affine(&start.z1.im, &end.z1.im),
            z2_re: affine(&start.z2.re, &end.z2.re),
            z2_im: affine(&start.z2.im, &end.z2.im),
        }
    }

    fn charge_re(&self, gamma: Charge) -> Affine {
        let a = Rat::from_integer(gamma.a.into());
        let b = Rat::from_integer(gamma.b.into());
        [
            &a * &self.z1_re[0] + &b * &self.z2_re[0],
            &a * &self.z1_re[1] + &b * &self.z2_re[1],
        ]
    }

    fn charge_im(&self, gamma: Charge) -> Affine {
        let a = Rat::from_integer(gamma.a.into());
        let b = Rat::from_integer(gamma.b.into());
        [
            &a * &self.z1_im[0] + &b * &self.z2_im[0],
            &a * &self.z1_im[1] + &b * &self.z2_im[1],
        ]
    }

    /// `W(t) = cross(Z_t(g1), Z_t(g2))`; every pairwise alignment quadratic
    /// is `cross(x, y) * W`, so walls live exactly at roots of `W`.
    fn degeneracy_quad(&self) -> Quad {
        quad_sub(
            &aff_mul(&self.z1_re, &self.z2_im),
            &aff_mul(&self.z1_im, &self.z2_re),
        )
    }

    /// errors if `Z_t(gamma) = 0` for some `t` in `[0, 1]`.
    fn check_no_vanishing(&self, gamma: Charge) -> Result<(), StabilityError> {
        let re = self.charge_re(gamma);
        let im = self.charge_im(gamma);
        let zero_of = |f: &Affine| -> Option<Rat> {
            if f[1].is_zero() {
                None
            } else {
                Some(-&f[0] / &f[1])
            }
        };
        let in_unit = |t: &Rat| !t.is_negative() && *t <= Rat::one();
        let re_zero = re.iter().all(Rat::is_zero);
        let im_zero = im.iter().all(Rat::is_zero);
        let vanish_at = if re_zero && im_zero {
            Some(Rat::zero())
        } else if re_zero {
            zero_of(&im).filter(in_unit)
        } else if im_zero {
            zero_of(&re).filter(in_unit)
        } else {
            match zero_of(&re) {
                Some(t) if in_unit(&t) && aff_eval(&im, &t).is_zero() => Some(t),
                _ => None,
            }
        };
        match vanish_at {
            Some(t) => Err(StabilityError::CentralChargeVanishesOnPath { charge: gamma, t }),
            None => Ok(()),
        }
    }
}

// --- wall finding ------------------------------------------------------------

/// All charges relevant to wall formation: the weighted charges of the
/// spectrum, closed under addition up to the truncation order.
fn candidate_charges(spectrum: &RaySpectrum) -> Vec<Charge> {
    let bound = i64::from(spectrum.order().get());
    let support = spectrum.support_charges();
    let mut seen: BTreeSet<Charge> = support.iter().copied().collect();
    let mut queue: Vec<Charge> = support.clone();
    while let Some(c) = queue.pop() {
        for s in &support {
            let sum = c + *s;
            if sum.degree() <= bound && seen.insert(sum) {
                queue.push(sum);
            }
        }
    }
    seen.into_iter().collect()
}

/// The distinct primitive rays of the two half-line classes at a degeneracy
/// parameter: at a root of `W`, every charge maps onto one real line, on the
/// positive or negative side of a reference image.
fn classify_rays(
    geometry: &PathGeometry,
    candidates: &[Charge],
    t: &PathParam,
) -> (Vec<Charge>, Vec<Charge>) {
    let reference = candidates[0];
    let ref_re = geometry.charge_re(reference);
    let ref_im = geometry.charge_im(reference);
    let mut positive: BTreeSet<Charge> = BTreeSet::new();
    let mut negative: BTreeSet<Charge> = BTreeSet::new();
    for &gamma in candidates {
        let dot = quad_add(
            &aff_mul(&geometry.charge_re(gamma), &ref_re),
            &aff_mul(&geometry.charge_im(gamma), &ref_im),
        );
        let sign = sign_at(&dot, t);
        debug_assert!(sign != 0, "nonvanishing images on one line cannot be orthogonal");
        let (primitive, _) = gamma.primitive_decompose().expect("candidates are nonzero");
        if sign > 0 {
            positive.insert(primitive);
        } else {
            negative.insert(primitive);
        }
    }
    let by_slope = |set: BTreeSet<Charge>| -> Vec<Charge> {
        let mut rays: Vec<Charge> = set.into_iter().collect();
        rays.sort_by(|a, b| slope_compare(*a, *b).expect("primitive cone rays"));
        rays
    };
    (by_slope(positive), by_slope(negative))
}

/// The extremal rays `(steepest, shallowest)` of a class, when it holds at
/// least two distinct rays and therefore forms a wall.
fn extremal(rays: &[Charge]) -> Option<(Charge, Charge)> {
    if rays.len() >= 2 {
        Some((rays[0], rays[rays.len() - 1]))
    } else {
        None
    }
}

/// Roots of the degeneracy quadratic inside `[0, 1]`, each flagged when it is
/// a double (tangent) root.  Sorted ascending.
fn unit_interval_roots(w: &Quad) -> Vec<(PathParam, bool)> {
    let in_closed_unit =
        |t: &Rat| -> bool { !t.is_negative() && *t <= Rat::one() };
    if w[2].is_zero() {
        if w[1].is_zero() {
            return Vec::new();
        }
        let root = -&w[0] / &w[1];
        if in_closed_unit(&root) {
            return vec![(PathParam::Rational(root), false)];
        }
        return Vec::new();
    }
    let two = Rat::from_integer(2.into());
    let four = Rat::from_integer(4.into());
    let disc = &w[1] * &w[1] - &four * &w[2] * &w[0];
    if disc.is_negative() {
        return Vec::new();
    }
    let vertex = -&w[1] / (&two * &w[2]);
    if disc.is_zero() {
        if in_closed_unit(&vertex) {
            return vec![(PathParam::Rational(vertex), true)];
        }
        return Vec::new();
    }
    let mut roots = Vec::new();
    if let Some(sq) = rat_sqrt(&disc) {
        for signed in [-sq.clone(), sq] {
            let root = (-&w[1] + signed) / (&two * &w[2]);
            if in_closed_unit(&root) {
                roots.push((PathParam::Rational(root), false));
            }
        }
    } else {
        // Irrational pair: isolate each root beside the vertex.  The offset
        // bound majorizes sqrt(disc) / (2 |w2|), strictly so because the
        // root is irrational.
        let spread_sq = &disc / (&four * &w[2] * &w[2]);
        let bound = if spread_sq > Rat::one() { spread_sq } else { Rat::one() };
        let left = PathParam::QuadraticRoot {
            poly: w.clone(),
            lo: &vertex - &bound,
            hi: vertex.clone(),
        };
        let right = PathParam::QuadraticRoot {
            poly: w.clone(),
            lo: vertex.clone(),
            hi: &vertex + &bound,
        };
        for root in [left, right] {
            if root.cmp_rational(&Rat::zero()) == Ordering::Greater
                && root.cmp_rational(&Rat::one()) == Ordering::Less
            {
                roots.push((root, false));
            }
        }
    }
    roots.sort_by(|(a, _), (b, _)| a.compare(b));
    roots
}

/// Finds the walls met by the straight central-charge path from `start` to
/// `end`, for the charges relevant to `spectrum`.  Walls are returned in
/// path order.
///
/// Scaling both endpoints by one positive rational leaves the result
/// unchanged.  Errors report non-generic situations: a charge whose central
/// charge vanishes on the path, permanent alignment, tangent walls,
/// endpoints on a wall, and coincident opposite-sector walls.
pub fn find_walls(
    start: &CentralCharge,
    end: &CentralCharge,
    spectrum: &RaySpectrum,
) -> Result<Vec<Wall>, StabilityError> {
    let candidates = candidate_charges(spectrum);
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let geometry = PathGeometry::new(start, end);
    for &gamma in &candidates {
        geometry.check_no_vanishing(gamma)?;
    }
    let w = geometry.degeneracy_quad();
    if quad_is_zero(&w) {
        // The torus of charge images is rank one for every t: classes are
        // constant, and any class with two rays is a permanent wall.
        let (positive, negative) = classify_rays(
            &geometry,
            &candidates,
            &PathParam::Rational(Rat::zero()),
        );
        for class in [&positive, &negative] {
            if class.len() >= 2 {
                return Err(StabilityError::PermanentlyAligned {
                    first: class[0],
                    second: class[1],
                });
            }
        }
        return Ok(Vec::new());
    }
    let mut walls = Vec::new();
    for (t, tangent) in unit_interval_roots(&w) {
        let (positive, negative) = classify_rays(&geometry, &candidates, &t);
        let wall_pos = extremal(&positive);
        let wall_neg = extremal(&negative);
        let (hi, lo) = match (wall_pos, wall_neg) {
            (None, None) => continue,
            (Some((hi1, lo1)), Some((hi2, lo2))) => {
                return Err(StabilityError::CoincidentWalls { t, hi1, lo1, hi2, lo2 });
            }
            (Some(pair), None) | (None, Some(pair)) => pair,
        };
        if tangent {
            return Err(StabilityError::TangentWall { t });
        }
        if let PathParam::Rational(r) = &t {
            if r.is_zero() || r.is_one() {
                return Err(StabilityError::EndpointOnWall { t: r.clone(), hi, lo });
            }
        }
        walls.push(Wall { t, hi_ray: hi, lo_ray: lo });
    }
    Ok(walls)
}

// --- wall crossing -----------------------------------------------------------

/// Transports the spectrum across one wall: the weights inside the wall's
/// sector (between the two rays, inclusive) are replaced by the
/// factorization of their slope-ordered product in the *opposite* traversal
/// order; weights outside the sector are untouched.  `incoming` names the
/// order in which the sector product was assembled on the approaching side.
///
/// Crossing the same wall back (with the opposite incoming direction)
/// restores the original data exactly.  The support property is enforced on
/// both the input and the output.
pub fn cross_wall(
    data: &StabilityData,
    wall: &Wall,
    incoming: Direction,
) -> Result<StabilityData, StabilityError> {
    if slope_compare(wall.hi_ray, wall.lo_ray)? != Ordering::Less {
        return Err(StabilityError::InvalidWall { hi: wall.hi_ray, lo: wall.lo_ray });
    }
    let report = check_support(data);
    if !report.holds() {
        return Err(StabilityError::Support(report));
    }
    let order = data.spectrum.order();
    let mut inside = RaySpectrum::new(order);
    let mut outside = RaySpectrum::new(order);
    for (primitive, multiple, omega) in data.spectrum.entries() {
        let in_sector =
            wall.hi_ray.cross(primitive) <= 0 && primitive.cross(wall.lo_ray) <= 0;
        let target = if in_sector { &mut inside } else { &mut outside };
        target.set_omega(primitive.scaled(i64::from(multiple)), omega.clone())?;
    }
    let product = spectrum_to_auto(&inside, incoming, data.pairing)?;
    let replacement = factorize(&product, incoming.opposite())?;
    let mut merged = outside;
    for (primitive, multiple, omega) in replacement.entries() {
        merged.set_omega(primitive.scaled(i64::from(multiple)), omega.clone())?;
    }
    let crossed = StabilityData { spectrum: merged, ..data.clone() };
    let report = check_support(&crossed);
    if !report.holds() {
        return Err(StabilityError::Support(report));
    }
    Ok(crossed)
}

/// Transports stability data along the straight path to `z_end`, crossing
/// every wall in order.  The walls are recomputed after each crossing (new
/// rays can create new relevant charges), the incoming traversal direction
/// at each wall is read off the orientation of the path, and the form is
/// required to be negative on the central-charge kernel at every wall
/// parameter.  The returned data carries `z_end` as its central charge.
pub fn lift_path(
    data: &StabilityData,
    z_end: &CentralCharge,
) -> Result<StabilityData, StabilityError> {
    let report = check_support(data);
    if !report.holds() {
        return Err(StabilityError::Support(report));
    }
    let start = data.central_charge.clone();
    let geometry = PathGeometry::new(&start, z_end);
    let w = geometry.degeneracy_quad();
    let mut current = data.clone();
    let mut last_crossed: Option<PathParam> = None;
    loop {
        let walls = find_walls(&start, z_end, &current.spectrum)?;
        let next = walls.into_iter().find(|wall| match &last_crossed {
            None => true,
            Some(done) => wall.t.compare(done) == Ordering::Greater,
        });
        let wall = match next {
            Some(wall) => wall,
            None => break,
        };
        check_kernel_negative(&geometry, &current.form, &wall.t)?;
        // Just before the wall the sector still multiplies in the order
        // induced by the path orientation: W decreasing through its root
        // means the positive side comes first (clockwise traversal).  Walls
        // only sit at simple roots, so the derivative cannot vanish there.
        let two = Rat::from_integer(2.into());
        let w_derivative: Quad = [w[1].clone(), &two * &w[2], Rat::zero()];
        let slope_sign = sign_at(&w_derivative, &wall.t);
        debug_assert!(slope_sign != 0, "wall roots are simple");
        let incoming = if slope_sign < 0 {
            Direction::Clockwise
        } else {
            Direction::Counterclockwise
        };
        current = cross_wall(&current, &wall, incoming)?;
        last_crossed = Some(wall.t);
    }
    let mut finished = current;
    finished.central_charge = z_end.clone();
    let report = check_support(&finished);
    if !report.holds() {
        return Err(StabilityError::Support(report));
    }
    Ok(finished)
}

/// Requires `Q < 0` on the kernel line of `Z_t` at a wall parameter.  The
/// kernel direction is `(z2, -z1)` read off the real components (or the
/// imaginary ones when those both vanish at `t`).
fn check_kernel_negative(
    geometry: &PathGeometry,
    form: &QuadraticForm,
    t: &PathParam,
) -> Result<(), StabilityError> {
    let as_quad = |a: &Affine| -> Quad { [a[0].clone(), a[1].clone(), Rat::zero()] };
    let re_pair_vanishes = sign_at(&as_quad(&geometry.z1_re), t) == 0
        && sign_at(&as_quad(&geometry.z2_re), t) == 0;
    let (f, g) = if re_pair_vanishes {
        (&geometry.z2_im, &geometry.z1_im)
    } else {
        (&geometry.z2_re, &geometry.z1_re)
    };
    // Q(f, -g) = q11 f^2 - 2 q12 f g + q22 g^2 as a quadratic in t.
    let two = Rat::from_integer(2.into());
    let value = quad_add(
        &quad_sub(
            &quad_scale(&aff_mul(f, f), form.q11()),
            &quad_scale(&aff_mul(f, g), &(&two * form.q12())),
        ),
        &quad_scale(&aff_mul(g, g), form.q22()),
    );
    if sign_at(&value, t) >= 0 {
        return Err(StabilityError::KernelNotNegativeAtWall { t: t.clone() });
    }
    Ok(())
}
