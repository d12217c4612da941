//! Formal Poisson automorphisms of the truncated twisted algebra.
//!
//! An automorphism is stored by its *unit multipliers* on the two basis
//! monomials: `theta(e_(1,0)) = u1 * e_(1,0)` and `theta(e_(0,1)) = u2 *
//! e_(0,1)`, where `u1`, `u2` are series with constant term 1.  Extending
//! multiplicatively, the image of any monomial is
//!
//! `theta(e_(a,b)) = u1^a * u2^b * e_(a,b)`
//!
//! (twisted products and powers throughout), so any pair of unit multipliers
//! defines an invertible algebra endomorphism.  Preserving the *Poisson*
//! bracket is an extra condition; the dilogarithm flows built by
//! [`TorusAuto::dilogarithm_flow`] have it, and [`TorusAuto::preserves_poisson`]
//! checks it for arbitrary maps.
//!
//! Composition `compose(f, g)` applies `g` first, then `f`, matching ordinary
//! function composition; the commutator is `t^-1 . s . t . s^-1`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::lattice::{Charge, Pairing, QuadraticRefinement, Sign};
use crate::series::{acc_mul_shifted, acc_pairwise, ConeSeries, Rat, SeriesError, TruncationOrder};

/// Errors produced by automorphism-level operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutoError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    /// Automorphisms can only be combined over one pairing.
    #[error("mismatched pairings: k = {left} vs k = {right}")]
    PairingMismatch { left: u32, right: u32 },
    /// A generator multiplier must be a unit (constant term 1).
    #[error("multiplier for generator {generator} has constant term {found}, expected 1")]
    MultiplierNotUnit { generator: Charge, found: Rat },
    /// The zero charge generates no dilogarithm flow.
    #[error("the zero charge has no ray")]
    ZeroCharge,
    /// Dilogarithm flows are attached to rays of the positive cone.
    #[error("charge {0} lies outside the positive cone")]
    OutsideCone(Charge),
}

/// A formal automorphism of the truncated twisted algebra, stored by its unit
/// multipliers on the two generators.
///
/// Two automorphisms are equal exactly when their multipliers (and pairing
/// and truncation order) are equal; since the multipliers determine the map
/// on every monomial, this is semantic equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusAuto {
    u1: ConeSeries,
    u2: ConeSeries,
    pairing: Pairing,
}

impl TorusAuto {
    /// The identity automorphism.
    pub fn identity(pairing: Pairing, order: TruncationOrder) -> Self {
        TorusAuto {
            u1: ConeSeries::one(order),
            u2: ConeSeries::one(order),
            pairing,
        }
    }

    /// Builds an automorphism from explicit generator multipliers, which must
    /// be units of the same truncation order.
    pub fn from_multipliers(
        u1: ConeSeries,
        u2: ConeSeries,
        pairing: Pairing,
    ) -> Result<Self, AutoError> {
        if u1.order() != u2.order() {
            return Err(AutoError::Series(SeriesError::OrderMismatch {
                left: u1.order().get(),
                right: u2.order().get(),
            }));
        }
        for (generator, u) in [(Charge::G1, &u1), (Charge::G2, &u2)] {
            let c0 = u.constant_term();
            if !c0.is_one() {
                return Err(AutoError::MultiplierNotUnit { generator, found: c0 });
            }
        }
        Ok(TorusAuto { u1, u2, pairing })
    }

    /// The dilogarithm flow attached to the ray of a nonzero cone charge
    /// `gamma`, with rational weight `omega`:
    ///
    /// `theta(e_g) = (1 - e_gamma)^{omega * <gamma, g>} * e_g`
    ///
    /// for each generator `g`.  Weight zero (or a charge deeper than the
    /// truncation order) gives the identity.
    pub fn dilogarithm_flow(
        gamma: Charge,
        omega: &Rat,
        pairing: Pairing,
        order: TruncationOrder,
    ) -> Result<Self, AutoError> {
        if gamma.is_zero() {
            return Err(AutoError::ZeroCharge);
        }
        if !gamma.in_cone() {
            return Err(AutoError::OutsideCone(gamma));
        }
        let base = ConeSeries::one(order).sub(&ConeSeries::monomial(order, gamma, Rat::one())?)?;
        let mut multipliers = Vec::with_capacity(2);
        for g in [Charge::G1, Charge::G2] {
            let exponent = omega * Rat::from_integer(pairing.pair(gamma, g).into());
            multipliers.push(base.unit_pow_rational(&exponent, pairing)?);
        }
        let u2 = multipliers.pop().expect("two exponents");
        let u1 = multipliers.pop().expect("two exponents");
        Ok(TorusAuto { u1, u2, pairing })
    }

    pub fn order(&self) -> TruncationOrder {
        self.u1.order()
    }

    pub fn pairing(&self) -> Pairing {
        self.pairing
    }

    /// Multiplier of the first generator `(1, 0)`.
    pub fn u1(&self) -> &ConeSeries {
        &self.u1
    }

    /// Multiplier of the second generator `(0, 1)`.
    pub fn u2(&self) -> &ConeSeries {
        &self.u2
    }

    pub fn is_identity(&self) -> bool {
        self.u1.is_one() && self.u2.is_one()
    }

    /// Reinterprets the automorphism at a lower truncation order by
    /// truncating both multipliers.
    pub fn truncated(&self, order: TruncationOrder) -> Self {
        TorusAuto {
            u1: self.u1.truncate_to(order),
            u2: self.u2.truncate_to(order),
            pairing: self.pairing,
        }
    }

    /// Applies the automorphism to a series.  For repeated application of
    /// the same automorphism, prefer [`TorusAuto::applier`], which caches
    /// multiplier powers.
    pub fn apply(&self, f: &ConeSeries) -> Result<ConeSeries, AutoError> {
        self.applier().apply(f)
    }

    /// A reusable applier that caches the twisted powers `u1^a`, `u2^b`.
    pub fn applier(&self) -> Applier<'_> {
        Applier {
            auto: self,
            pow1: vec![ConeSeries::one(self.order())],
            pow2: vec![ConeSeries::one(self.order())],
        }
    }

    /// Composition `self . g`: apply `g` first, then `self`.
    pub fn compose(&self, g: &TorusAuto) -> Result<TorusAuto, AutoError> {
        self.check_compatible(g)?;
        let mut applier = self.applier();
        // (self . g)(e_i) = self(g.u_i) * self(e_i) = self(g.u_i) * u_i * e_i.
        let u1 = applier.apply(&g.u1)?.twisted_mul(&self.u1, self.pairing)?;
        let u2 = applier.apply(&g.u2)?.twisted_mul(&self.u2, self.pairing)?;
        Ok(TorusAuto { u1, u2, pairing: self.pairing })
    }

    /// The inverse automorphism: `self.compose(&self.invert()?)` is the
    /// identity (exactly, at the shared truncation order).
    pub fn invert(&self) -> Result<TorusAuto, AutoError> {
        let mut applier = self.applier();
        // Want v_i with self(v_i) * u_i = 1, i.e. self(v_i) = u_i^{-1}.
        let u1 = solve_image(&mut applier, &self.u1.unit_pow(-1, self.pairing)?)?;
        let u2 = solve_image(&mut applier, &self.u2.unit_pow(-1, self.pairing)?)?;
        Ok(TorusAuto { u1, u2, pairing: self.pairing })
    }

    /// The group commutator `t^-1 . s . t . s^-1`.
    pub fn commutator(s: &TorusAuto, t: &TorusAuto) -> Result<TorusAuto, AutoError> {
        t.invert()?
            .compose(s)?
            .compose(t)?
            .compose(&s.invert()?)
    }

    /// Whether the map respects the Poisson bracket `{f, g}` on every pair of
    /// basis monomials whose total degree fits the truncation order.  True
    /// for dilogarithm flows and their compositions and inverses; false for
    /// generic unit multipliers.
    pub fn preserves_poisson(&self) -> Result<bool, AutoError> {
        let order = self.order();
        let bound = i64::from(order.get());
        let mut applier = self.applier();
        let charges: Vec<Charge> = (0..=bound)
            .flat_map(|a| (0..=bound - a).map(move |b| Charge::new(a, b)))
            .filter(|c| !c.is_zero())
            .collect();
        let mut images = BTreeMap::new();
        for &x in &charges {
            let e = ConeSeries::monomial(order, x, Rat::one())?;
            images.insert(x, applier.apply(&e)?);
        }
        for &x in &charges {
            for &y in &charges {
                if x.degree() + y.degree() > bound || y < x {
                    continue;
                }
                let bracket = poisson_bracket(
                    &ConeSeries::monomial(order, x, Rat::one())?,
                    &ConeSeries::monomial(order, y, Rat::one())?,
                    self.pairing,
                )?;
                let lhs = applier.apply(&bracket)?;
                let rhs = poisson_bracket(&images[&x], &images[&y], self.pairing)?;
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The time-1 flow of a Hamiltonian vector field `f -> {f, h}`:
    /// `f -> sum_j {{f, h}, h, ...}_j / j!`.
    ///
    /// The image of each generator is computed one degree above the stored
    /// order and then truncated, so the resulting multipliers agree exactly
    /// with the closed dilogarithm form: `dilogarithm_flow(gamma, omega, ..)`
    /// equals `flow` of `omega * dilog(gamma)`.
    pub fn flow(h: &HamiltonianElement, pairing: Pairing) -> Result<TorusAuto, AutoError> {
        let order = h.series().order();
        let inner = TruncationOrder::new(order.get() + 1).expect("positive order");
        let h_inner = h.series().truncate_to(inner);
        let mut multipliers = Vec::with_capacity(2);
        for g in [Charge::G1, Charge::G2] {
            let mut image = ConeSeries::monomial(inner, g, Rat::one())?;
            let mut term = image.clone();
            let mut j = 1i64;
            loop {
                term = poisson_bracket(&term, &h_inner, pairing)?
                    .scale(&Rat::new(1.into(), j.into()));
                if term.is_zero() {
                    break;
                }
                image = image.add(&term)?;
                j += 1;
            }
            multipliers.push(extract_multiplier(&image, g, pairing, order));
        }
        let u2 = multipliers.pop().expect("two generators");
        let u1 = multipliers.pop().expect("two generators");
        Ok(TorusAuto { u1, u2, pairing })
    }

    /// Transports the automorphism to the *ordinary* (untwisted) algebra
    /// through the change of monomials `x_c = sigma(c) e_c` defined by a
    /// quadratic refinement `sigma`.  In the ordinary algebra the map sends
    /// each untwisted generator to itself times the returned multiplier.
    pub fn untwist(&self, refinement: QuadraticRefinement) -> OrdinaryAuto {
        let twist = |u: &ConeSeries| -> ConeSeries {
            let order = u.order();
            let coeffs = u
                .iter()
                .map(|(c, r)| {
                    let r = r.clone();
                    match refinement.refine(c, self.pairing) {
                        Sign::Plus => (c, r),
                        Sign::Minus => (c, -r),
                    }
                })
                .collect();
            ConeSeries::from_raw(coeffs, order)
        };
        OrdinaryAuto {
            x_multiplier: twist(&self.u1),
            y_multiplier: twist(&self.u2),
        }
    }

    fn check_compatible(&self, other: &TorusAuto) -> Result<(), AutoError> {
        if self.pairing != other.pairing {
            return Err(AutoError::PairingMismatch {
                left: self.pairing.k(),
                right: other.pairing.k(),
            });
        }
        if self.order() != other.order() {
            return Err(AutoError::Series(SeriesError::OrderMismatch {
                left: self.order().get(),
                right: other.order().get(),
            }));
        }
        Ok(())
    }
}

/// Applies one automorphism to many series, caching the twisted powers of
/// the generator multipliers between calls.
pub struct Applier<'a> {
    auto: &'a TorusAuto,
    pow1: Vec<ConeSeries>,
    pow2: Vec<ConeSeries>,
}

impl Applier<'_> {
    /// The image `sum_x c_x u1^{x.a} u2^{x.b} e_x` of a series.
    pub fn apply(&mut self, f: &ConeSeries) -> Result<ConeSeries, AutoError> {
        let order = self.auto.order();
        if f.order() != order {
            return Err(AutoError::Series(SeriesError::OrderMismatch {
                left: order.get(),
                right: f.order().get(),
            }));
        }
        let pairing = self.auto.pairing;
        let mut acc = BTreeMap::new();
        for (x, c) in f.iter() {
            self.grow_to(x)?;
            acc_mul_shifted(
                &mut acc,
                &self.pow1[x.a as usize],
                &self.pow2[x.b as usize],
                x,
                c,
                pairing,
                order,
            );
        }
        Ok(ConeSeries::from_raw(acc, order))
    }

    fn grow_to(&mut self, x: Charge) -> Result<(), AutoError> {
        let pairing = self.auto.pairing;
        while self.pow1.len() <= x.a as usize {
            let next = self.pow1.last().expect("nonempty").twisted_mul(&self.auto.u1, pairing)?;
            self.pow1.push(next);
        }
        while self.pow2.len() <= x.b as usize {
            let next = self.pow2.last().expect("nonempty").twisted_mul(&self.auto.u2, pairing)?;
            self.pow2.push(next);
        }
        Ok(())
    }
}

/// Solves `applier(v) = w` for `v`.  The applier differs from the identity by
/// terms of strictly higher degree, so the residual of `v <- v - (applier(v)
/// - w)` loses its lowest-degree term on every pass and the iteration
/// terminates within the truncation order.
fn solve_image(applier: &mut Applier<'_>, w: &ConeSeries) -> Result<ConeSeries, AutoError> {
    let mut v = w.clone();
    for _ in 0..=w.order().get() {
        let error = applier.apply(&v)?.sub(w)?;
        if error.is_zero() {
            return Ok(v);
        }
        v = v.sub(&error)?;
    }
    let error = applier.apply(&v)?.sub(w)?;
    debug_assert!(error.is_zero(), "image solve failed to converge");
    Ok(v)
}

/// Reads the multiplier `m` off an image `m * e_g` computed one order deep,
/// inverting `m * e_g = sum_y m_y (-1)^{<y, g>} e_{y + g}` and truncating to
/// the target order.
fn extract_multiplier(
    image: &ConeSeries,
    g: Charge,
    pairing: Pairing,
    order: TruncationOrder,
) -> ConeSeries {
    let bound = i64::from(order.get());
    let coeffs = image
        .iter()
        .map(|(z, c)| {
            let y = z - g;
            debug_assert!(y.in_cone(), "image term {z} not divisible by e{g}");
            let c = match pairing.sign_of(y, g) {
                Sign::Plus => c.clone(),
                Sign::Minus => -c.clone(),
            };
            (y, c)
        })
        .filter(|(y, _)| y.degree() <= bound)
        .collect();
    ConeSeries::from_raw(coeffs, order)
}

/// The Poisson bracket `{e_x, e_y} = (-1)^{<x, y>} <x, y> e_{x + y}`,
/// extended bilinearly and truncated.
pub fn poisson_bracket(
    f: &ConeSeries,
    g: &ConeSeries,
    pairing: Pairing,
) -> Result<ConeSeries, SeriesError> {
    if f.order() != g.order() {
        return Err(SeriesError::OrderMismatch {
            left: f.order().get(),
            right: g.order().get(),
        });
    }
    let mut acc = BTreeMap::new();
    acc_pairwise(&mut acc, f, g, f.order(), |x, y| {
        let p = pairing.pair(x, y);
        Sign::from_parity(p).as_i64() * p
    });
    Ok(ConeSeries::from_raw(acc, f.order()))
}

/// A series with zero constant term, the valid argument of a Hamiltonian
/// flow.  Closed under the Poisson bracket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamiltonianElement(ConeSeries);

impl HamiltonianElement {
    pub fn new(series: ConeSeries) -> Result<Self, SeriesError> {
        let c0 = series.constant_term();
        if !c0.is_zero() {
            return Err(SeriesError::ConstantTermNotZero { found: c0 });
        }
        Ok(HamiltonianElement(series))
    }

    pub fn series(&self) -> &ConeSeries {
        &self.0
    }

    pub fn into_series(self) -> ConeSeries {
        self.0
    }
}

/// The Lie bracket of Hamiltonians (their Poisson bracket, which again has
/// zero constant term).
pub fn lie_bracket(
    f: &HamiltonianElement,
    g: &HamiltonianElement,
    pairing: Pairing,
) -> Result<HamiltonianElement, SeriesError> {
    let series = poisson_bracket(f.series(), g.series(), pairing)?;
    debug_assert!(series.constant_term().is_zero());
    Ok(HamiltonianElement(series))
}

/// An automorphism of the *ordinary* (untwisted) truncated algebra, stored by
/// its multipliers on the coordinates `x`, `y`.  Products among its series
/// use the degenerate pairing `k = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinaryAuto {
    pub x_multiplier: ConeSeries,
    pub y_multiplier: ConeSeries,
}

impl OrdinaryAuto {
    /// Applies the map in the ordinary algebra.
    pub fn apply(&self, f: &ConeSeries) -> Result<ConeSeries, AutoError> {
        let auto = TorusAuto::from_multipliers(
            self.x_multiplier.clone(),
            self.y_multiplier.clone(),
            Pairing::new(0),
        )?;
        auto.apply(f)
    }
}
