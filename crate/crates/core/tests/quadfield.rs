use classmoments::quadfield::{
    count_representations, enumerate_reduced, eta_product_coeffs, ideal_class_counts, is_fundamental_discriminant,
    CoefficientTable, FormClassGroup, QuadDiscriminant, QuadForm,
};
use classmoments::sampler::primes_up_to;
use classmoments::Error;

fn jacobi(mut a: i64, mut n: i64) -> i64 {
    debug_assert!(n > 0 && n % 2 == 1);
    a = a.rem_euclid(n);
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(D/n)` for `n ≥ 1`.
fn kronecker(d: i64, mut n: i64) -> i64 {
    let mut t = 1;
    while n % 2 == 0 {
        n /= 2;
        t *= match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    t * jacobi(d, n)
}

fn table(d: i64, x: u64) -> (FormClassGroup, CoefficientTable) {
    let g = FormClassGroup::new(d).unwrap();
    let t = ideal_class_counts(&g, x).unwrap();
    (g, t)
}

fn fundamental_discriminants(bound: i64) -> Vec<i64> {
    (3..=bound)
        .map(|n| -n)
        .filter(|&d| is_fundamental_discriminant(d))
        .collect()
}

#[test]
fn reduced_form_lists() {
    assert_eq!(
        enumerate_reduced(-23).unwrap(),
        [QuadForm::new(1, 1, 6), QuadForm::new(2, -1, 3), QuadForm::new(2, 1, 3)]
    );
    assert_eq!(FormClassGroup::new(-4).unwrap().class_number(), 1);
    assert_eq!(FormClassGroup::new(-3).unwrap().class_number(), 1);
    let g = FormClassGroup::new(-39).unwrap();
    assert_eq!(g.structure.factors(), &[4]);
    assert_eq!(g.forms.iter().filter(|f| f.a == 1).count(), 1);
    for d in fundamental_discriminants(400) {
        for f in enumerate_reduced(d).unwrap() {
            assert!(f.is_reduced() && f.is_primitive() && f.discriminant() == d);
            assert!(3 * f.a * f.a <= -d);
        }
    }
    assert!(matches!(FormClassGroup::new(-5), Err(Error::InvalidDiscriminant(-5))));
}

#[test]
fn units_and_conductors() {
    assert_eq!(QuadDiscriminant::new(-3).unwrap().units, 6);
    assert_eq!(QuadDiscriminant::new(-4).unwrap().units, 4);
    assert_eq!(QuadDiscriminant::new(-23).unwrap().units, 2);
    let q = QuadDiscriminant::new(-63).unwrap();
    assert_eq!((q.fundamental, q.conductor), (-7, 3));
    assert!(!q.in_domain(9) && q.in_domain(10));
}

#[test]
fn composition_is_a_group_law() {
    for d in fundamental_discriminants(400) {
        let g = FormClassGroup::new(d).unwrap();
        let h = g.class_number();
        let e = g.forms.iter().position(|f| f.a == 1).unwrap();
        for i in 0..h {
            assert_eq!(g.mul(e, i), i);
            assert_eq!(g.mul(i, g.inverse(i)), e);
            for j in 0..h {
                assert_eq!(g.mul(i, j), g.mul(j, i));
                for k in 0..h {
                    assert_eq!(g.mul(g.mul(i, j), k), g.mul(i, g.mul(j, k)), "D = {d}");
                }
            }
        }
        assert_eq!(g.structure.order(), h);
    }
    let f = QuadForm::new(2, 1, 3);
    assert_eq!(f.compose(&f), QuadForm::new(2, -1, 3));
    assert_eq!(f.compose(&f).compose(&f), QuadForm::new(1, 1, 6));
}

#[test]
fn representation_numbers() {
    // r(n) for x² + y² is 4(d₁(n) − d₃(n))
    let r = count_representations(&QuadForm::new(1, 0, 1), 2000);
    for n in 1..=2000u64 {
        let (d1, d3) = (1..=n).filter(|d| n % d == 0).fold((0, 0), |(a, b), d| match d % 4 {
            1 => (a + 1, b),
            3 => (a, b + 1),
            _ => (a, b),
        });
        assert_eq!(r[n as usize] as i64, 4 * (d1 - d3), "n = {n}");
    }
    assert_eq!(r[25], 12);
    let r23 = count_representations(&QuadForm::new(2, 1, 3), 10);
    assert_eq!(r23[2], 2);
    assert_eq!(r23[3], 2);
}

#[test]
fn class_sums_match_divisor_sums() {
    let x = 10_000u64;
    for d in [-3, -4, -23, -39, -84, -47, -56, -71] {
        let (_, t) = table(d, x);
        let w = t.disc.units as i64;
        for n in 1..=x {
            let total: i64 = t.reps.iter().map(|r| r[n as usize] as i64).sum();
            let divisor_sum: i64 = (1..=n).filter(|k| n % k == 0).map(|k| kronecker(d, k as i64)).sum();
            assert_eq!(total, w * divisor_sum, "D = {d}, n = {n}");
        }
        for (col, reps) in t.counts.iter().zip(&t.reps) {
            for n in 1..=x as usize {
                assert_eq!(reps[n], t.disc.units * col[n]);
            }
        }
    }
}

#[test]
fn inverse_classes_share_counts() {
    for d in [-23, -39, -47, -56, -71, -84] {
        let (g, t) = table(d, 5000);
        for s in 0..g.class_number() {
            assert_eq!(t.counts[s], t.counts[g.inverse(s)], "D = {d}");
        }
        for chi in 0..g.class_number() {
            assert!(t.char_coefficients(&g, chi, 5000).unwrap().iter().all(|v| v.is_real()));
        }
    }
}

#[test]
fn character_coefficients_are_multiplicative() {
    for d in [-23, -39, -47] {
        let (g, t) = table(d, 250_000);
        let primes: Vec<u64> = primes_up_to(500)
            .into_iter()
            .map(u64::from)
            .filter(|&p| d.unsigned_abs() % p != 0)
            .collect();
        for chi in 0..g.class_number() {
            let a = t.char_coefficients_f64(&g, chi);
            for (i, &p) in primes.iter().enumerate() {
                for &q in &primes[i + 1..] {
                    let (ap, aq, apq) = (a[p as usize], a[q as usize], a[(p * q) as usize]);
                    assert!((apq - ap * aq).abs() < 1e-9, "D = {d}, χ = {chi}, {p}·{q}");
                }
            }
        }
    }
    let (g, t) = table(-23, 10);
    let a = t.char_coefficients(&g, 1, 10).unwrap();
    assert_eq!(a[2], classmoments::cyclo::Cyclotomic::from_integer(1, -1));
}

#[test]
fn order_four_cusp_numerators_vanish() {
    let (g, t) = table(-39, 10_000);
    let mut seen = 0;
    for s in 0..g.class_number() {
        let nums = t.cusp_numerators(&g, s);
        if g.element_order(s) == 4 {
            seen += 1;
            assert!(nums.iter().all(|&v| v == 0));
        } else {
            assert!(nums.iter().any(|&v| v != 0));
        }
    }
    assert_eq!(seen, 2);
}

#[test]
fn eta_product() {
    let c = eta_product_coeffs(&[(1, 1), (23, 1)], 6).unwrap();
    assert_eq!(&c[1..], &[1, -1, -1, 0, 0, 1]);
    assert!(matches!(
        eta_product_coeffs(&[(1, 1), (22, 1)], 6),
        Err(Error::NonIntegralWeightOffset { numerator: 23 })
    ));
}

#[test]
fn binary_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for d in [-23, -39, -92, -4] {
        let (_, t) = table(d, 3000);
        let path = dir.path().join(format!("table{d}.bin"));
        t.save_binary(&path).unwrap();
        let back = CoefficientTable::load_binary(&path).unwrap();
        assert_eq!(back.counts, t.counts);
        assert_eq!(back.forms, t.forms);
        assert_eq!(back.disc, t.disc);
        assert_eq!(back.x, t.x);
    }
    let path = dir.path().join("truncated.bin");
    let (_, t) = table(-23, 100);
    let mut buf = Vec::new();
    t.write_binary(&mut buf).unwrap();
    std::fs::write(&path, &buf[..buf.len() - 1]).unwrap();
    assert!(CoefficientTable::load_binary(&path).is_err());
}

#[test]
fn table_guards() {
    let g = FormClassGroup::new(-23).unwrap();
    assert!(matches!(
        ideal_class_counts(&g, 20_000_000),
        Err(Error::MemoryBudget { .. })
    ));
    let t = ideal_class_counts(&g, 100).unwrap();
    assert!(matches!(
        t.char_coefficients(&g, 0, 101),
        Err(Error::DomainExceeded { .. })
    ));
}

#[test]
fn csv_export() {
    let (_, t) = table(-23, 10);
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines[0].starts_with("n,in_domain"));
    assert!(lines[1].starts_with("1,1,1,0,0"));
}
