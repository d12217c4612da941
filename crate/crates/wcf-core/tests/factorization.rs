//! End-to-end factorization checks against independently computed
//! reference tables for the commutator of the two basis dilogarithm
//! automorphisms.

use wcf_core::{
    factorize, spectrum_to_auto, Charge, Direction, Pairing, Rat, RaySpectrum, TorusAuto,
    TruncationOrder,
};

use num_traits::One;

fn ord(n: u32) -> TruncationOrder {
    TruncationOrder::new(n).unwrap()
}

fn int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// The clockwise factorization of `T^{-1} S T S^{-1}` where `S` and `T` are
/// the weight-1 dilogarithm automorphisms of the basis charges.
fn commutator_spectrum(k: u32, order: u32) -> RaySpectrum {
    let pairing = Pairing::new(k);
    let order = ord(order);
    let one = Rat::one();
    let s = TorusAuto::dilogarithm_flow(Charge::G1, &one, pairing, order).unwrap();
    let t = TorusAuto::dilogarithm_flow(Charge::G2, &one, pairing, order).unwrap();
    let commutator = TorusAuto::commutator(&s, &t).unwrap();
    factorize(&commutator, Direction::Clockwise).unwrap()
}

fn spectrum_from_rows(order: u32, rows: &[(i64, i64, u32, i64)]) -> RaySpectrum {
    let mut spectrum = RaySpectrum::new(ord(order));
    for &(a, b, n, omega) in rows {
        let total = Charge::new(a, b).scaled(i64::from(n));
        spectrum.set_omega(total, int(omega)).unwrap();
    }
    spectrum
}

#[test]
fn pentagon_spectrum_is_the_single_diagonal_ray() {
    let spectrum = commutator_spectrum(1, 8);
    let expected = spectrum_from_rows(8, &[(1, 1, 1, 1)]);
    assert_eq!(spectrum, expected);
}

#[test]
fn commutator_table_for_pairing_two_matches_the_reference() {
    let spectrum = commutator_spectrum(2, 8);
    let expected = spectrum_from_rows(
        8,
        &[
            (1, 2, 1, 1),
            (3, 5, 1, -4),
            (2, 3, 1, -3),
            (3, 4, 1, 3),
            (1, 1, 1, -2),
            (1, 1, 3, 6),
            (1, 1, 4, -16),
            (4, 3, 1, 3),
            (3, 2, 1, -3),
            (5, 3, 1, -4),
            (2, 1, 1, 1),
        ],
    );
    assert_eq!(spectrum, expected);
}

#[test]
fn commutator_table_for_pairing_three_matches_the_reference() {
    let spectrum = commutator_spectrum(3, 8);
    let expected = spectrum_from_rows(
        8,
        &[
            (1, 3, 1, 1),
            (2, 5, 1, -6),
            (1, 2, 1, 3),
            (1, 2, 2, 12),
            (3, 5, 1, 77),
            (2, 3, 1, -14),
            (3, 4, 1, -67),
            (1, 1, 1, 3),
            (1, 1, 2, -6),
            (1, 1, 3, -63),
            (1, 1, 4, -96),
            (4, 3, 1, -67),
            (3, 2, 1, -14),
            (5, 3, 1, 77),
            (2, 1, 1, 3),
            (2, 1, 2, 12),
            (5, 2, 1, -6),
            (3, 1, 1, 1),
        ],
    );
    assert_eq!(spectrum, expected);
}

#[test]
fn commutator_invariants_are_integral_through_pairing_three() {
    for k in 1..=3 {
        let spectrum = commutator_spectrum(k, 8);
        for (primitive, multiple, omega) in spectrum.entries() {
            assert!(
                omega.is_integer(),
                "k = {k}: omega at {primitive} (multiple {multiple}) = {omega} is fractional"
            );
        }
    }
}

#[test]
fn pentagon_factorizations_agree_in_both_directions() {
    let pairing = Pairing::new(1);
    let order = ord(8);
    let one = Rat::one();
    let s = TorusAuto::dilogarithm_flow(Charge::G1, &one, pairing, order).unwrap();
    let t = TorusAuto::dilogarithm_flow(Charge::G2, &one, pairing, order).unwrap();
    let commutator = TorusAuto::commutator(&s, &t).unwrap();
    let clockwise = factorize(&commutator, Direction::Clockwise).unwrap();
    let counterclockwise = factorize(&commutator, Direction::Counterclockwise).unwrap();
    // A single ray reads the same both ways.
    assert_eq!(clockwise, counterclockwise);
}

#[test]
fn factorizations_in_opposite_directions_recompose_identically() {
    let pairing = Pairing::new(2);
    let order = ord(6);
    let auto = {
        let mut spectrum = RaySpectrum::new(order);
        spectrum.set_omega(Charge::new(1, 0), int(1)).unwrap();
        spectrum.set_omega(Charge::new(1, 1), int(-2)).unwrap();
        spectrum.set_omega(Charge::new(0, 1), int(3)).unwrap();
        spectrum_to_auto(&spectrum, Direction::Clockwise, pairing).unwrap()
    };
    let clockwise = factorize(&auto, Direction::Clockwise).unwrap();
    let counterclockwise = factorize(&auto, Direction::Counterclockwise).unwrap();
    // The ray tables differ for k >= 2 ...
    assert_ne!(clockwise, counterclockwise);
    // ... but both recompose to the very same automorphism.
    let from_cw = spectrum_to_auto(&clockwise, Direction::Clockwise, pairing).unwrap();
    let from_ccw =
        spectrum_to_auto(&counterclockwise, Direction::Counterclockwise, pairing).unwrap();
    assert_eq!(from_cw, auto);
    assert_eq!(from_ccw, auto);
}

#[test]
fn an_automorphism_off_the_ray_group_is_rejected() {
    use wcf_core::factor::FactorError;
    use wcf_core::ConeSeries;

    let pairing = Pairing::new(1);
    let order = ord(4);
    // u1 gains a term along (1, 0), which no dilogarithm ray can produce:
    // the exponent pairing vanishes on the ray itself.
    let u1 = ConeSeries::one(order)
        .add(&ConeSeries::monomial(order, Charge::G1, int(1)).unwrap())
        .unwrap();
    let u2 = ConeSeries::one(order);
    let auto = TorusAuto::from_multipliers(u1, u2, pairing).unwrap();
    assert!(matches!(
        factorize(&auto, Direction::Clockwise),
        Err(FactorError::NotFactorizable { .. })
    ));
}

#[test]
fn single_ray_logs_invert_back_to_their_weights() {
    let order = ord(8);
    let mut spectrum = RaySpectrum::new(order);
    let primitive = Charge::new(1, 1);
    let weights = [(1, int(2)), (2, int(-1)), (3, int(4)), (4, int(7))];
    for (m, w) in &weights {
        spectrum.set_omega(primitive.scaled(*m), w.clone()).unwrap();
    }
    let log = spectrum.ray_log(primitive).unwrap();
    let recovered = wcf_core::dilog_invert(&log).unwrap();
    assert_eq!(
        recovered,
        vec![(1, int(2)), (2, int(-1)), (3, int(4)), (4, int(7))]
    );
}
