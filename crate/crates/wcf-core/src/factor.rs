//! Ray spectra and slope-ordered factorization.
//!
//! A [`RaySpectrum`] assigns a rational weight to each charge `m * p` (`p`
//! primitive, `m >= 1`) of the positive cone.  [`spectrum_to_auto`] composes
//! the dilogarithm flows of all weighted charges in slope order — clockwise
//! traversal visits rays by slope descending, counterclockwise ascending, and
//! in either case the first-visited ray acts first (innermost factor).
//!
//! [`factorize`] inverts this: given an automorphism that *is* such a
//! product, it recovers the unique spectrum for the requested direction by
//! peeling known factors degree by degree.  The two directions generally
//! yield different spectra for the same automorphism; that difference is the
//! wall-crossing phenomenon.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::autos::{AutoError, TorusAuto};
use crate::lattice::{slope_compare, Charge, LatticeError, Pairing};
use crate::series::{ConeSeries, Rat, SeriesError, TruncationOrder};

/// Errors produced while building or factoring slope-ordered products.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Auto(#[from] AutoError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    /// Spectra live on the positive cone.
    #[error("charge {0} lies outside the positive cone")]
    OutsideCone(Charge),
    /// A weighted charge must fit within the truncation order.
    #[error("charge {charge} has degree beyond the truncation order {order}")]
    DegreeBeyondOrder { charge: Charge, order: u32 },
    /// A ray logarithm must be supported on multiples of one primitive.
    #[error("series spans more than one ray: {first} and {second}")]
    MixedRays { first: Charge, second: Charge },
    /// The degree-by-degree peel found a residual coefficient that no
    /// dilogarithm flow can produce: the input is not a slope-ordered product
    /// of such flows (e.g. it fails to preserve the Poisson bracket).
    #[error("automorphism is not a product of dilogarithm flows: inconsistent residual at charge {charge}")]
    NotFactorizable { charge: Charge },
    /// The recomposed product failed to reproduce the input exactly.
    #[error("factorization did not recompose to the input automorphism")]
    RecompositionMismatch,
}

/// Traversal direction over rays of the positive cone.
///
/// `Clockwise` runs from the vertical ray `(0, 1)` down to the horizontal ray
/// `(1, 0)` (slope descending); `Counterclockwise` is the reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Clockwise,
    Counterclockwise,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Clockwise => Direction::Counterclockwise,
            Direction::Counterclockwise => Direction::Clockwise,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Clockwise => "clockwise",
            Direction::Counterclockwise => "counterclockwise",
        })
    }
}

/// Rational weights on cone charges, stored per ray: primitive charge to
/// (multiple to weight).  Zero weights are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaySpectrum {
    rays: BTreeMap<Charge, BTreeMap<u32, Rat>>,
    order: TruncationOrder,
}

impl RaySpectrum {
    pub fn new(order: TruncationOrder) -> Self {
        RaySpectrum { rays: BTreeMap::new(), order }
    }

    pub fn order(&self) -> TruncationOrder {
        self.order
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Sets the weight of a charge (any nonzero cone charge of degree within
    /// the truncation order; it is decomposed into primitive and multiple).
    /// A zero weight removes the entry.
    pub fn set_omega(&mut self, gamma: Charge, omega: Rat) -> Result<(), FactorError> {
        let (primitive, multiple) = gamma.primitive_decompose()?;
        if !gamma.in_cone() {
            return Err(FactorError::OutsideCone(gamma));
        }
        if gamma.degree() > i64::from(self.order.get()) {
            return Err(FactorError::DegreeBeyondOrder { charge: gamma, order: self.order.get() });
        }
        if omega.is_zero() {
            if let Some(weights) = self.rays.get_mut(&primitive) {
                weights.remove(&multiple);
                if weights.is_empty() {
                    self.rays.remove(&primitive);
                }
            }
        } else {
            self.rays.entry(primitive).or_default().insert(multiple, omega);
        }
        Ok(())
    }

    /// The weight of a charge; zero when the charge carries no entry.
    pub fn omega(&self, gamma: Charge) -> Rat {
        gamma
            .primitive_decompose()
            .ok()
            .and_then(|(primitive, multiple)| self.rays.get(&primitive)?.get(&multiple).cloned())
            .unwrap_or_else(Rat::zero)
    }

    /// Iterates `(primitive, multiple, weight)` entries, grouped by ray in
    /// graded charge order, multiples ascending.
    pub fn entries(&self) -> impl Iterator<Item = (Charge, u32, &Rat)> {
        self.rays.iter().flat_map(|(primitive, weights)| {
            weights.iter().map(move |(multiple, omega)| (*primitive, *multiple, omega))
        })
    }

    /// The number of weighted charges.
    pub fn len(&self) -> usize {
        self.rays.values().map(BTreeMap::len).sum()
    }

    /// The weighted charges themselves (`multiple * primitive` per entry).
    pub fn support_charges(&self) -> Vec<Charge> {
        self.entries()
            .map(|(primitive, multiple, _)| primitive.scaled(i64::from(multiple)))
            .collect()
    }

    /// The primitive ray charges in traversal order for a direction.
    pub fn rays_in(&self, direction: Direction) -> Vec<Charge> {
        let mut rays: Vec<Charge> = self.rays.keys().copied().collect();
        rays.sort_by(|a, b| slope_compare(*a, *b).expect("spectrum rays are nonzero cone charges"));
        if direction == Direction::Counterclockwise {
            rays.reverse();
        }
        rays
    }

    /// The logarithm series attached to one ray: with weights `omega_j` on
    /// the multiples `j * p` of the primitive `p`, the coefficient of
    /// `e_{m p}` is `-(1/m^2) * sum_{j | m} omega_j j^2`.  A single weight on
    /// the primitive gives `-omega * dilog(e_p)`.  [`dilog_invert`] recovers
    /// the weights from this series.
    pub fn ray_log(&self, gamma: Charge) -> Result<ConeSeries, FactorError> {
        let (primitive, _) = gamma.primitive_decompose()?;
        if !gamma.in_cone() {
            return Err(FactorError::OutsideCone(gamma));
        }
        let weights = match self.rays.get(&primitive) {
            Some(w) => w,
            None => return Ok(ConeSeries::zero(self.order)),
        };
        let mut log = ConeSeries::zero(self.order);
        let max_multiple = i64::from(self.order.get()) / primitive.degree();
        for m in 1..=max_multiple {
            let mut total = Rat::zero();
            for (j, omega) in weights.range(..=(m as u32)) {
                let j = i64::from(*j);
                if m % j == 0 {
                    total += omega * Rat::from_integer((j * j).into());
                }
            }
            if !total.is_zero() {
                let coeff = -total / Rat::from_integer((m * m).into());
                log = log.add(&ConeSeries::monomial(self.order, primitive.scaled(m), coeff)?)?;
            }
        }
        Ok(log)
    }
}

/// Recovers ray weights from a ray logarithm (see [`RaySpectrum::ray_log`]).
/// Returns `(multiple, weight)` pairs for every multiple up to the truncation
/// order, including interior zeros.  The zero series yields no entries.
pub fn dilog_invert(log: &ConeSeries) -> Result<Vec<(u32, Rat)>, FactorError> {
    let c0 = log.constant_term();
    if !c0.is_zero() {
        return Err(FactorError::Series(SeriesError::ConstantTermNotZero { found: c0 }));
    }
    let lowest = match log.iter().next() {
        Some((c, _)) => c,
        None => return Ok(Vec::new()),
    };
    let (primitive, _) = lowest.primitive_decompose()?;
    for (c, _) in log.iter() {
        let (p, _) = c.primitive_decompose()?;
        if p != primitive {
            return Err(FactorError::MixedRays { first: lowest, second: c });
        }
    }
    let max_multiple = i64::from(log.order().get()) / primitive.degree();
    let mut weights: Vec<(u32, Rat)> = Vec::with_capacity(max_multiple as usize);
    for m in 1..=max_multiple {
        // -d_m m^2 = sum_{j | m} omega_j j^2, solved for the new omega_m.
        let d_m = log.coeff(primitive.scaled(m));
        let mut omega = -d_m;
        for (j, prior) in &weights {
            let j = i64::from(*j);
            if m % j == 0 {
                omega -= prior * Rat::new((j * j).into(), (m * m).into());
            }
        }
        weights.push((m as u32, omega));
    }
    Ok(weights)
}

/// The slope-ordered product of dilogarithm flows for a spectrum: traverse
/// rays in the direction's order, composing each ray's factor *outside* the
/// product so far (first-visited ray acts first).  Within one ray the flows
/// of different multiples commute.
pub fn spectrum_to_auto(
    spectrum: &RaySpectrum,
    direction: Direction,
    pairing: Pairing,
) -> Result<TorusAuto, FactorError> {
    let mut product = TorusAuto::identity(pairing, spectrum.order());
    for p in spectrum.rays_in(direction) {
        let factor = ray_factor(spectrum, p, false, pairing, spectrum.order())?;
        product = factor.compose(&product)?;
    }
    Ok(product)
}

/// The composed dilogarithm flows of one ray (multiples ascending), with all
/// weights negated when `inverted` — which is exactly the inverse factor.
fn ray_factor(
    spectrum: &RaySpectrum,
    primitive: Charge,
    inverted: bool,
    pairing: Pairing,
    order: TruncationOrder,
) -> Result<TorusAuto, FactorError> {
    let mut factor = TorusAuto::identity(pairing, order);
    let weights = match spectrum.rays.get(&primitive) {
        Some(w) => w,
        None => return Ok(factor),
    };
    for (multiple, omega) in weights {
        let charge = primitive.scaled(i64::from(*multiple));
        if charge.degree() > i64::from(order.get()) {
            continue;
        }
        let omega = if inverted { -omega.clone() } else { omega.clone() };
        let flow = TorusAuto::dilogarithm_flow(charge, &omega, pairing, order)?;
        factor = flow.compose(&factor)?;
    }
    Ok(factor)
}

/// Factors an automorphism into the slope-ordered product of dilogarithm
/// flows for the given direction, returning the unique spectrum of weights.
///
/// Degree by degree, the factors already determined are peeled off (their
/// inverses composed on, outermost first) and the lowest-degree residual
/// coefficients determine the weights of that degree.  A final recomposition
/// check guarantees the result reproduces the input exactly.
pub fn factorize(auto: &TorusAuto, direction: Direction) -> Result<RaySpectrum, FactorError> {
    let order = auto.order();
    let pairing = auto.pairing();
    let k = i64::from(pairing.k());
    let mut spectrum = RaySpectrum::new(order);
    for d in 1..=order.get() {
        let partial_order = TruncationOrder::new(d).expect("degrees start at 1");
        let mut residual = auto.truncated(partial_order);
        let mut rays = spectrum.rays_in(direction);
        rays.reverse();
        for p in rays {
            let inverse = ray_factor(&spectrum, p, true, pairing, partial_order)?;
            residual = inverse.compose(&residual)?;
        }
        let mut charges: BTreeSet<Charge> = BTreeSet::new();
        charges.extend(residual.u1().degree_terms(d).map(|(c, _)| c));
        charges.extend(residual.u2().degree_terms(d).map(|(c, _)| c));
        for c in charges {
            // A flow of weight omega at charge c contributes, at lowest
            // order, -omega * k * c.b to the first multiplier at c and
            // omega * k * c.a to the second.  Both readings must agree.
            let w1 = residual.u1().coeff(c);
            let w2 = residual.u2().coeff(c);
            let den1 = -k * c.b;
            let den2 = k * c.a;
            let from_u1 = (den1 != 0).then(|| w1.clone() / Rat::from_integer(den1.into()));
            let from_u2 = (den2 != 0).then(|| w2.clone() / Rat::from_integer(den2.into()));
            let lambda = match (from_u1, from_u2) {
                (Some(l1), Some(l2)) => {
                    if l1 != l2 {
                        return Err(FactorError::NotFactorizable { charge: c });
                    }
                    l1
                }
                (Some(l1), None) => {
                    if !w2.is_zero() {
                        return Err(FactorError::NotFactorizable { charge: c });
                    }
                    l1
                }
                (None, Some(l2)) => {
                    if !w1.is_zero() {
                        return Err(FactorError::NotFactorizable { charge: c });
                    }
                    l2
                }
                (None, None) => {
                    // Degenerate pairing: only the identity factors.
                    return Err(FactorError::NotFactorizable { charge: c });
                }
            };
            spectrum.set_omega(c, -lambda)?;
        }
    }
    let recomposed = spectrum_to_auto(&spectrum, direction, pairing)?;
    if recomposed != *auto {
        return Err(FactorError::RecompositionMismatch);
    }
    Ok(spectrum)
}
