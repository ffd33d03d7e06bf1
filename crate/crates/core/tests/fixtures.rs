use classmoments::abelian::AbelianStructure;
use classmoments::fixtures::{builtin, quad_fixture, resolve, semidirect_spec, BUILTIN_NAMES};
use classmoments::permgroup::FrameSpec;
use classmoments::Error;

#[test]
fn specs_round_trip_through_json() {
    let names = BUILTIN_NAMES
        .iter()
        .map(|s| s.to_string())
        .chain(["quad(-23)".into(), "quad(-84)".into()]);
    for name in names {
        let fixture = builtin(&name).unwrap();
        let text = fixture.spec.to_json();
        let back = FrameSpec::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        let (a, b) = (fixture.frame().unwrap(), back.build().unwrap());
        assert_eq!(a.group().elements(), b.group().elements(), "{name}");
        assert_eq!(a.classes().class_of, b.classes().class_of);
        assert_eq!(a.quotient().structure.factors(), b.quotient().structure.factors());
        assert_eq!(a.index(), b.index());
    }
}

#[test]
fn hashes_identify_specs() {
    let a = builtin("c7c3").unwrap();
    assert_eq!(a.hash(), builtin("c7c3").unwrap().hash());
    assert_ne!(a.hash(), builtin("cubic-c3").unwrap().hash());
    assert_eq!(
        builtin("quad(-23)").unwrap().hash(),
        builtin("quad:-23").unwrap().hash()
    );
}

#[test]
fn resolve_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s3.json");
    std::fs::write(&path, builtin("s3-nongalois").unwrap().spec.to_json()).unwrap();
    let f = resolve(path.to_str().unwrap()).unwrap();
    assert_eq!(f.frame().unwrap().group().order(), 6);

    std::fs::write(&path, "{\"degree\": 3}").unwrap();
    assert!(resolve(path.to_str().unwrap()).is_err());
    assert!(matches!(resolve("missing.json"), Err(Error::BadFixture(_))));
    assert!(matches!(builtin("quad(x)"), Err(Error::BadFixture(_))));
}

#[test]
fn quadratic_frames_are_dihedral_extensions() {
    for d in [-23, -39, -56, -84, -71] {
        let f = quad_fixture(d).unwrap().frame().unwrap();
        let h = f.quotient().order();
        assert_eq!(f.group().order(), 2 * h);
        assert_eq!(f.index(), 2);
        assert!(f.q_data().is_some());
    }
}

#[test]
fn semidirect_builder_checks_its_input() {
    let s = AbelianStructure::new(vec![5]).unwrap();
    let square: Vec<usize> = (0..5).map(|x| (2 * x) % 5).collect();
    let spec = semidirect_spec(&s, &square, 4).unwrap();
    let f = spec.build().unwrap();
    assert_eq!(f.group().order(), 20);
    assert!(matches!(semidirect_spec(&s, &square, 3), Err(Error::BadFixture(_))));
    assert!(matches!(
        semidirect_spec(&s, &[0, 1, 2], 2),
        Err(Error::NotAutomorphism)
    ));
}
