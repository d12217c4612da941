//! Integration tests for wall geometry: sector products across a crossing,
//! support preservation, multi-wall paths, and exact irrational wall
//! parameters.

use wcf_core::stability::{PathParam, StabilityError};
use wcf_core::{
    check_support, cross_wall, find_walls, lift_path, spectrum_to_auto, CentralCharge, Charge,
    Direction, Pairing, QuadraticForm, Rat, RationalComplex, RaySpectrum, StabilityData,
    TruncationOrder, Wall,
};

fn ord(n: u32) -> TruncationOrder {
    TruncationOrder::new(n).unwrap()
}

fn int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(numer.into(), denom.into())
}

fn complex(re: Rat, im: Rat) -> RationalComplex {
    RationalComplex::new(re, im)
}

fn charge(re1: i64, im1: i64, re2: i64, im2: i64) -> CentralCharge {
    CentralCharge::new(
        complex(int(re1), int(im1)),
        complex(int(re2), int(im2)),
    )
}

fn spectrum_of(order: u32, entries: &[(i64, i64, i64)]) -> RaySpectrum {
    let mut s = RaySpectrum::new(ord(order));
    for &(a, b, omega) in entries {
        s.set_omega(Charge::new(a, b), int(omega)).unwrap();
    }
    s
}

fn full_cone_wall() -> Wall {
    Wall {
        t: PathParam::Rational(rat(1, 2)),
        hi_ray: Charge::new(0, 1),
        lo_ray: Charge::new(1, 0),
    }
}

#[test]
fn crossing_preserves_the_sector_automorphism() {
    let data = StabilityData {
        pairing: Pairing::new(2),
        central_charge: charge(1, 0, 0, 1),
        form: QuadraticForm::new(int(1), int(2), int(1)).unwrap(),
        spectrum: spectrum_of(6, &[(1, 0, 1), (1, 1, -2), (0, 1, 3)]),
    };
    let crossed = cross_wall(&data, &full_cone_wall(), Direction::Clockwise).unwrap();
    let before = spectrum_to_auto(&data.spectrum, Direction::Clockwise, data.pairing).unwrap();
    let after =
        spectrum_to_auto(&crossed.spectrum, Direction::Counterclockwise, data.pairing).unwrap();
    assert_eq!(before, after);
}

#[test]
fn crossing_back_is_an_involution() {
    let data = StabilityData {
        pairing: Pairing::new(2),
        central_charge: charge(1, 0, 0, 1),
        form: QuadraticForm::new(int(1), int(2), int(1)).unwrap(),
        spectrum: spectrum_of(6, &[(1, 0, 1), (1, 1, -2), (0, 1, 3)]),
    };
    let wall = full_cone_wall();
    let crossed = cross_wall(&data, &wall, Direction::Clockwise).unwrap();
    assert_ne!(crossed.spectrum, data.spectrum);
    let restored = cross_wall(&crossed, &wall, Direction::Counterclockwise).unwrap();
    assert_eq!(restored, data);
}

#[test]
fn crossing_outputs_keep_the_support_property() {
    // Repeated crossings with one fixed form never leave the supported
    // region: every output passes the same check the input passed.
    let mut data = StabilityData {
        pairing: Pairing::new(1),
        central_charge: charge(1, 0, 0, 1),
        form: QuadraticForm::new(int(1), int(2), int(1)).unwrap(),
        spectrum: spectrum_of(6, &[(1, 0, 1), (0, 1, 1)]),
    };
    assert!(check_support(&data).holds());
    for direction in [Direction::Clockwise, Direction::Counterclockwise] {
        data = cross_wall(&data, &full_cone_wall(), direction).unwrap();
        assert!(check_support(&data).holds());
    }
}

#[test]
fn a_two_wall_path_lists_both_crossings_in_order() {
    // W(t) = 16t^2 - 16t + 3 vanishes at 1/4 and 3/4.
    let start = charge(1, 0, 4, 3);
    let end = charge(1, 4, 0, 3);
    let spectrum = spectrum_of(6, &[(1, 0, 1), (0, 1, 1)]);
    let walls = find_walls(&start, &end, &spectrum).unwrap();
    assert_eq!(walls.len(), 2);
    assert_eq!(walls[0].t, PathParam::Rational(rat(1, 4)));
    assert_eq!(walls[1].t, PathParam::Rational(rat(3, 4)));
    for wall in &walls {
        assert_eq!(wall.hi_ray, Charge::new(0, 1));
        assert_eq!(wall.lo_ray, Charge::new(1, 0));
    }
}

#[test]
fn lifting_across_two_irrational_walls_round_trips() {
    // W(t) = 8t^2 - 8t + 1 has the two irrational roots (2 +- sqrt(2)) / 4,
    // both inside (0, 1).  The path crosses into the reordered chamber and
    // back out, so the spectrum returns to its starting value while every
    // wall parameter, class sign, and kernel check runs through exact surd
    // arithmetic.
    let form = QuadraticForm::new(int(12), rat(145, 2), int(12)).unwrap();
    let data = StabilityData {
        pairing: Pairing::new(1),
        central_charge: charge(1, 0, 1, 1),
        form,
        spectrum: spectrum_of(5, &[(1, 0, 1), (0, 1, 1)]),
    };
    let z_end = charge(1, 8, 0, 1);
    // Both wall parameters are irrational and exactly isolated.
    let walls = find_walls(&data.central_charge, &z_end, &data.spectrum).unwrap();
    assert_eq!(walls.len(), 2);
    let lower = (2.0 - 2.0_f64.sqrt()) / 4.0;
    let upper = (2.0 + 2.0_f64.sqrt()) / 4.0;
    assert!(matches!(walls[0].t, PathParam::QuadraticRoot { .. }));
    assert!((walls[0].t.approx() - lower).abs() < 1e-9);
    assert!((walls[1].t.approx() - upper).abs() < 1e-9);
    let lifted = lift_path(&data, &z_end).unwrap();
    assert_eq!(lifted.spectrum, data.spectrum);
    assert_eq!(lifted.central_charge, z_end);
}

#[test]
fn lift_reports_tangent_walls() {
    let data = StabilityData {
        pairing: Pairing::new(1),
        central_charge: charge(1, 0, 2, 1),
        form: QuadraticForm::new(int(1), int(2), int(1)).unwrap(),
        spectrum: spectrum_of(4, &[(1, 0, 1), (1, 1, 1)]),
    };
    let z_end = charge(1, 1, -2, -1);
    assert!(matches!(
        lift_path(&data, &z_end).unwrap_err(),
        StabilityError::TangentWall { .. }
    ));
}

#[test]
fn lift_reports_support_violations_before_moving() {
    let data = StabilityData {
        pairing: Pairing::new(1),
        central_charge: charge(1, 0, 0, 1),
        form: QuadraticForm::new(int(-1), int(0), int(1)).unwrap(),
        spectrum: spectrum_of(4, &[(1, 0, 1)]),
    };
    let z_end = charge(0, 1, 1, 0);
    assert!(matches!(
        lift_path(&data, &z_end).unwrap_err(),
        StabilityError::Support(_)
    ));
}

#[test]
fn new_rays_participate_in_later_walls() {
    // First wall at t = 1/4 inserts (1, 1); the second crossing at t = 3/4
    // must treat the enlarged spectrum as one sector to undo the first.
    // Restricting the second crossing to the original two rays would not
    // restore the spectrum, so equality here shows the recomputation uses
    // the new ray.
    let data = StabilityData {
        pairing: Pairing::new(1),
        central_charge: charge(1, 0, 4, 3),
        form: QuadraticForm::new(int(1), int(2), int(1)).unwrap(),
        spectrum: spectrum_of(8, &[(1, 0, 1), (0, 1, 1)]),
    };
    let z_end = charge(1, 4, 0, 3);
    let lifted = lift_path(&data, &z_end).unwrap();
    assert_eq!(lifted.spectrum, data.spectrum);
    let back = lift_path(&lifted, &data.central_charge).unwrap();
    assert_eq!(back.spectrum, data.spectrum);
    assert_eq!(back.central_charge, data.central_charge);
}
