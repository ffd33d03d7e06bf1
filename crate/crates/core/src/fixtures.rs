//! Built-in frames and the semidirect-product builder.
//!
//! Every built-in resolves to a [`FrameSpec`], so it round-trips through the
//! JSON fixture schema. `A ⋊ Z/q` frames are realized by the left regular
//! representation on pairs `(a, j)`, stored at point `a + |A|·j`.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::abelian::AbelianStructure;
use crate::error::{Error, Result};
use crate::permgroup::{FrameSpec, GaloisFrame, KernelSpec, Permutation, SubgroupSpec};
use crate::quadfield::FormClassGroup;

/// Generators of the degree-12 group, 1-indexed as printed by GAP/MAGMA.
pub const S4_DEG12_GENERATORS: [&str; 7] = [
    "(2,12)(4,7)(8,10)",
    "(2,3,4)(5,10,7)(8,11,12)",
    "(3,5,11)(4,12,10)",
    "(2,7,8)(4,12,10)",
    "(1,5)(2,4)(3,9)(6,11)(7,10)(8,12)",
    "(1,7)(2,9)(3,4)(5,10)(6,8)(11,12)",
    "(1,6,9)(2,8,7)(3,11,5)(4,10,12)",
];

pub const BUILTIN_NAMES: [&str; 5] = ["s3-nongalois", "s4-deg12", "c7c3", "cubic-c3", "cubic-v4"];

#[derive(Clone, Debug, Serialize)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    pub spec: FrameSpec,
    /// Discriminant for `quad(D)` fixtures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disc: Option<i64>,
}

impl Fixture {
    pub fn frame(&self) -> Result<GaloisFrame> {
        self.spec.build()
    }

    /// SHA-256 of the canonical JSON frame spec.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.spec).expect("frame spec serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn cycles(degree: usize, text: &str, one_indexed: bool) -> Vec<u32> {
    Permutation::parse_cycles(degree, text, one_indexed)
        .expect("built-in permutation is valid")
        .images()
        .to_vec()
}

/// `A ⋊ Z/q` with `Z/q` generated by the automorphism `alpha` (on structure
/// indices), `H = N = A` and trivial kernel.
pub fn semidirect_spec(structure: &AbelianStructure, alpha: &[usize], q: usize) -> Result<FrameSpec> {
    let n = structure.order();
    if alpha.len() != n {
        return Err(Error::NotAutomorphism);
    }
    for a in 0..n {
        for b in 0..n {
            if alpha[structure.add(a, b)] != structure.add(alpha[a], alpha[b]) {
                return Err(Error::NotAutomorphism);
            }
        }
    }
    let mut power = (0..n).collect::<Vec<_>>();
    for _ in 0..q {
        power = power.iter().map(|&x| alpha[x]).collect();
    }
    if power.iter().enumerate().any(|(i, &x)| i != x) {
        return Err(Error::BadFixture(format!("automorphism order does not divide {q}")));
    }
    // alpha^j for j < q
    let mut powers = vec![(0..n).collect::<Vec<_>>()];
    for j in 1..q {
        powers.push(powers[j - 1].iter().map(|&x| alpha[x]).collect());
    }
    let degree = n * q;
    // left multiplication by (a, j): (b, k) ↦ (a + α^j(b), j + k)
    let left = |a: usize, j: usize| -> Vec<u32> {
        (0..degree)
            .map(|p| {
                let (b, k) = (p % n, p / n);
                (structure.add(a, powers[j][b]) + n * ((j + k) % q)) as u32
            })
            .collect()
    };
    let rank = structure.rank();
    let basis: Vec<usize> = (0..rank)
        .map(|i| {
            let mut unit = vec![0u32; rank];
            unit[i] = 1;
            structure.index(&unit)
        })
        .collect();
    let a_gens: Vec<Vec<u32>> = basis.iter().map(|&b| left(b, 0)).collect();
    let mut generators = a_gens.clone();
    if q > 1 {
        generators.push(left(0, 1));
    }
    if generators.is_empty() {
        generators.push((0..degree as u32).collect());
    }
    Ok(FrameSpec {
        degree,
        generators,
        h: SubgroupSpec::Generated { generators: a_gens },
        ksub: KernelSpec::Trivial,
    })
}

/// The ring/Hilbert class field frame of an imaginary quadratic field:
/// class group extended by inversion.
pub fn quad_fixture(d: i64) -> Result<Fixture> {
    let group = FormClassGroup::new(d)?;
    let s = &group.structure;
    let inversion: Vec<usize> = (0..s.order()).map(|x| s.neg(x)).collect();
    Ok(Fixture {
        name: format!("quad({d})"),
        description: format!("class group of discriminant {d} extended by complex conjugation"),
        spec: semidirect_spec(s, &inversion, 2)?,
        disc: Some(d),
    })
}

fn named(name: &str, description: &str, spec: FrameSpec) -> Fixture {
    Fixture {
        name: name.into(),
        description: description.into(),
        spec,
        disc: None,
    }
}

pub fn builtin(name: &str) -> Result<Fixture> {
    let name = name.trim();
    if let Some(d) = name
        .strip_prefix("quad(")
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| name.strip_prefix("quad:"))
    {
        let d: i64 = d
            .trim()
            .parse()
            .map_err(|_| Error::BadFixture(format!("bad discriminant in {name:?}")))?;
        return quad_fixture(d);
    }
    let fixture = match name {
        "s3-nongalois" => named(
            name,
            "non-Galois cubic field: S3 on three points, H = K = point stabilizer",
            FrameSpec {
                degree: 3,
                generators: vec![cycles(3, "(0,1)", false), cycles(3, "(0,1,2)", false)],
                h: SubgroupSpec::PointMembership {
                    points: vec![2],
                    point: 2,
                },
                ksub: KernelSpec::Stabilizer { point: 2 },
            },
        ),
        "s4-deg12" => named(
            name,
            "degree-12 Galois closure of order 648 with a quartic subfield of class number 3",
            FrameSpec {
                degree: 12,
                generators: S4_DEG12_GENERATORS.iter().map(|g| cycles(12, g, true)).collect(),
                h: SubgroupSpec::PointMembership {
                    points: vec![0, 5, 8],
                    point: 0,
                },
                ksub: KernelSpec::Stabilizer { point: 0 },
            },
        ),
        "c7c3" => named(
            name,
            "C7 ⋊ C3 of order 21 acting on seven points, H = C7",
            FrameSpec {
                degree: 7,
                generators: vec![cycles(7, "(0,1,2,3,4,5,6)", false), cycles(7, "(1,2,4)(3,6,5)", false)],
                h: SubgroupSpec::Generated {
                    generators: vec![cycles(7, "(0,1,2,3,4,5,6)", false)],
                },
                ksub: KernelSpec::Trivial,
            },
        ),
        "cubic-c3" => {
            let s = AbelianStructure::new(vec![3])?;
            let identity: Vec<usize> = (0..3).collect();
            named(
                name,
                "cyclic cubic field with class group Z/3 fixed by Galois",
                semidirect_spec(&s, &identity, 3)?,
            )
        }
        "cubic-v4" => {
            let s = AbelianStructure::new(vec![2, 2])?;
            // (x, y) ↦ (y, x + y)
            let alpha: Vec<usize> = (0..4)
                .map(|i| {
                    let c = s.coords(i);
                    s.index(&[c[1], (c[0] + c[1]) % 2])
                })
                .collect();
            named(
                name,
                "cyclic cubic field with class group (Z/2)^2 permuted transitively",
                semidirect_spec(&s, &alpha, 3)?,
            )
        }
        _ => return Err(Error::BadFixture(format!("unknown fixture {name:?}"))),
    };
    Ok(fixture)
}

/// A built-in name, `quad(D)`, or a path to a JSON frame spec.
pub fn resolve(name_or_path: &str) -> Result<Fixture> {
    match builtin(name_or_path) {
        Ok(f) => Ok(f),
        Err(Error::BadFixture(_)) if std::path::Path::new(name_or_path).is_file() => {
            let text = std::fs::read_to_string(name_or_path)?;
            Ok(named(
                name_or_path,
                "frame loaded from file",
                FrameSpec::from_json(&text)?,
            ))
        }
        Err(e) => Err(e),
    }
}
