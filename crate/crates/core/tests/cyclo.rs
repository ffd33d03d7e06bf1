use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use classmoments::cyclo::{parse_rational, Cyclotomic};

fn z(m: u32, k: i64) -> Cyclotomic {
    Cyclotomic::root_of_unity(m, k)
}

fn sum_of_roots(m: u32, terms: &[(i64, i64)]) -> Cyclotomic {
    terms.iter().fold(Cyclotomic::zero(m), |acc, &(c, k)| {
        &acc + &(&Cyclotomic::from_integer(m, c) * &z(m, k))
    })
}

#[test]
fn spec_examples() {
    assert_eq!(&z(3, 1) + &z(3, 2), Cyclotomic::from_integer(3, -1));
    assert!((0..6).fold(Cyclotomic::zero(6), |a, k| &a + &z(6, k)).is_zero());

    let v = &(&z(7, 1) + &z(7, 2)) + &z(7, 4);
    assert!((&(&(&v * &v) + &v) + &Cyclotomic::from_integer(7, 2)).is_zero());
    assert_eq!(v.abs_square().to_rational(), Some(BigRational::from_integer(2.into())));
    let n = v.numeric();
    assert!((n.re + 0.5).abs() < 1e-9 && (n.im - 7f64.sqrt() / 2.0).abs() < 1e-9);
    assert!(!v.is_real_times_root_of_unity());

    let c3 = &z(3, 1) + &z(3, -1);
    assert_eq!(c3.abs_square().to_rational(), Some(BigRational::from_integer(1.into())));
    assert!(Cyclotomic::zero(5).abs_square().is_zero());

    let i = z(4, 1).numeric();
    assert!(i.re.abs() < 1e-12 && (i.im - 1.0).abs() < 1e-12);

    let two_cos = &z(5, 1) + &z(5, -1);
    assert_eq!((&two_cos * &z(3, 1)).real_times_root_of_unity(), Some(3));
    assert_eq!(Cyclotomic::from_integer(4, -3).real_times_root_of_unity(), Some(1));
    assert_eq!(Cyclotomic::zero(9).real_times_root_of_unity(), Some(1));
}

#[test]
fn canonical_zero_and_lifting() {
    let a = &z(4, 1) + &z(6, 1);
    let b = &z(6, 1) + &z(4, 1);
    assert_eq!(a, b);
    assert_eq!(a.conductor(), 12);
    assert_eq!(z(3, 1), z(6, 2));
    assert!((&a - &b)
        .coeffs()
        .iter()
        .all(|c| *c == BigRational::from_integer(0.into())));
}

#[test]
fn text_format() {
    let v = &(&z(7, 1) + &z(7, 2)) + &z(7, 4);
    let s = v.to_string();
    assert!(s.ends_with("@ 7"), "{s}");
    assert_eq!(s.parse::<Cyclotomic>().unwrap(), v);
    assert_eq!(
        parse_rational("3/2").unwrap(),
        BigRational::new(BigInt::from(3), BigInt::from(2))
    );
    assert_eq!(
        parse_rational("0.75").unwrap(),
        BigRational::new(BigInt::from(3), BigInt::from(4))
    );
    assert!(parse_rational("x").is_err());
}

fn arb_element() -> impl Strategy<Value = Cyclotomic> {
    (
        prop::sample::select(vec![1u32, 3, 4, 5, 6, 8, 12]),
        prop::collection::vec((-3i64..=3, 0i64..24), 0..5),
    )
        .prop_map(|(m, terms)| sum_of_roots(m, &terms))
}

/// `v ∈ ℝ·μ_∞` via the argument: `v^{2m}` real iff `arg(v)·2m/π ∈ ℤ`.
fn numeric_oracle(v: &Cyclotomic) -> bool {
    let n = v.numeric();
    if n.norm() < 1e-9 {
        return true;
    }
    let t = n.arg() * 2.0 * v.conductor() as f64 / PI;
    (t - t.round()).abs() < 1e-7
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_axioms(a in arb_element(), b in arb_element(), c in arb_element()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn conjugation(a in arb_element(), b in arb_element()) {
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
        let s = a.abs_square();
        prop_assert_eq!(s.conj(), s.clone());
        prop_assert!(s.numeric().re >= -1e-9);
        prop_assert!((s.numeric().re - a.numeric().norm_sqr()).abs() < 1e-8 * (1.0 + s.numeric().re));
    }

    #[test]
    fn numeric_is_a_homomorphism(a in arb_element(), b in arb_element()) {
        let (na, nb) = (a.numeric(), b.numeric());
        prop_assert!(((&a * &b).numeric() - na * nb).norm() < 1e-9 * (1.0 + na.norm() * nb.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn real_times_root_matches_numeric(
        m in 1u32..=12,
        terms in prop::collection::vec((prop::sample::select(vec![-1i64, 1]), 0i64..24), 0..=4),
    ) {
        let v = sum_of_roots(m, &terms);
        prop_assert_eq!(v.is_real_times_root_of_unity(), numeric_oracle(&v), "{}", v);
    }
}
