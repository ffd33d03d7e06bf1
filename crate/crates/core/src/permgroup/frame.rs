use serde::{Deserialize, Serialize};

use super::{quotient_abelian, AbelianQuotient, ConjugacyClasses, FiniteGroup, Permutation, Subgroup};
use crate::error::{Error, Result};

/// How `H` is selected inside `G` in a fixture file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SubgroupSpec {
    /// `{g : g(point) ∈ points}`.
    PointMembership {
        points: Vec<u32>,
        #[serde(default)]
        point: u32,
    },
    Generated {
        generators: Vec<Vec<u32>>,
    },
    Whole,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    Stabilizer { point: u32 },
    Trivial,
    Generated { generators: Vec<Vec<u32>> },
}

/// Serialized form of a [`GaloisFrame`]. Points are 0-indexed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub degree: usize,
    pub generators: Vec<Vec<u32>>,
    #[serde(rename = "H")]
    pub h: SubgroupSpec,
    #[serde(rename = "Ksub")]
    pub ksub: KernelSpec,
}

impl FrameSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("frame spec serializes")
    }

    pub fn build(&self) -> Result<GaloisFrame> {
        let perms = |gens: &[Vec<u32>]| -> Result<Vec<Permutation>> {
            gens.iter()
                .map(|g| {
                    if g.len() != self.degree {
                        return Err(Error::DegreeMismatch {
                            expected: self.degree,
                            found: g.len(),
                        });
                    }
                    Permutation::new(g.clone())
                })
                .collect()
        };
        let group = FiniteGroup::closure(self.degree, &perms(&self.generators)?)?;
        let lookup = |ps: Vec<Permutation>| -> Result<Vec<usize>> {
            ps.iter()
                .map(|p| {
                    group
                        .index_of(p)
                        .ok_or_else(|| Error::BadFixture(format!("{p} is not in G")))
                })
                .collect()
        };
        let h = match &self.h {
            SubgroupSpec::PointMembership { points, point } => {
                if *point as usize >= self.degree {
                    return Err(Error::BadFixture(format!("point {point} out of range")));
                }
                group.subgroup_from_predicate(|p| points.contains(&p.apply(*point)))?
            }
            SubgroupSpec::Generated { generators } => group.subgroup_generated(&lookup(perms(generators)?)?),
            SubgroupSpec::Whole => group.whole(),
        };
        let ksub = match &self.ksub {
            KernelSpec::Stabilizer { point } => {
                if *point as usize >= self.degree {
                    return Err(Error::BadFixture(format!("point {point} out of range")));
                }
                group.subgroup_from_predicate(|p| {
                    p.apply(*point) == *point && h.contains(group.index_of(p).expect("element of G"))
                })?
            }
            KernelSpec::Trivial => group.trivial_subgroup(),
            KernelSpec::Generated { generators } => group.subgroup_generated(&lookup(perms(generators)?)?),
        };
        GaloisFrame::new(group, h, ksub)
    }
}

/// Data available when `H ⊴ G` and `Ksub ⊴ G`, so that `Q = G/H` acts on `N`.
#[derive(Clone, Debug)]
pub struct QAction {
    /// Minimal element of each coset of `H`, identity coset first.
    pub q_lifts: Vec<usize>,
    /// Group element -> index in `Q`.
    pub q_of: Vec<usize>,
    /// For each `τ ∈ Q`, the automorphism `n ↦ τ̃⁻¹ n τ̃` of `N` on structure indices.
    pub action: Vec<Vec<usize>>,
}

impl QAction {
    pub fn order(&self) -> usize {
        self.q_lifts.len()
    }
}

/// `(G, H, Ksub)` with `N = H/Ksub` abelian, plus the class data every
/// character computation needs.
#[derive(Clone, Debug)]
pub struct GaloisFrame {
    group: FiniteGroup,
    h: Subgroup,
    ksub: Subgroup,
    quotient: AbelianQuotient,
    classes: ConjugacyClasses,
    /// Per class, how many elements of `H ∩ C` map to each element of `N`.
    class_fibres: Vec<Vec<u32>>,
    q_data: Option<QAction>,
}

impl GaloisFrame {
    pub fn new(group: FiniteGroup, h: Subgroup, ksub: Subgroup) -> Result<Self> {
        let quotient = quotient_abelian(&group, &h, &ksub)?;
        let classes = group.conjugacy_classes();
        let n = quotient.order();
        let mut class_fibres = vec![vec![0u32; n]; classes.len()];
        for &x in h.members() {
            let idx = quotient.image[x].expect("H maps into N");
            class_fibres[classes.class_of[x]][idx] += 1;
        }
        let whole = group.whole();
        let q_data = if group.is_normal(&h, &whole) && group.is_normal(&ksub, &whole) {
            let cosets = group.left_cosets(&h, &whole);
            let mut q_of = vec![0; group.order()];
            for (q, coset) in cosets.iter().enumerate() {
                for &g in coset {
                    q_of[g] = q;
                }
            }
            let q_lifts: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
            let action = q_lifts
                .iter()
                .map(|&t| {
                    quotient
                        .lifts
                        .iter()
                        .map(|&x| quotient.image[group.conj(t, x)].expect("H is normal"))
                        .collect()
                })
                .collect();
            Some(QAction { q_lifts, q_of, action })
        } else {
            None
        };
        Ok(Self {
            group,
            h,
            ksub,
            quotient,
            classes,
            class_fibres,
            q_data,
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn h(&self) -> &Subgroup {
        &self.h
    }

    pub fn ksub(&self) -> &Subgroup {
        &self.ksub
    }

    pub fn quotient(&self) -> &AbelianQuotient {
        &self.quotient
    }

    pub fn classes(&self) -> &ConjugacyClasses {
        &self.classes
    }

    pub fn class_fibres(&self) -> &[Vec<u32>] {
        &self.class_fibres
    }

    /// `[G:H]`.
    pub fn index(&self) -> usize {
        self.group.order() / self.h.order()
    }

    pub fn q_data(&self) -> Option<&QAction> {
        self.q_data.as_ref()
    }

    pub fn require_q_action(&self) -> Result<&QAction> {
        self.q_data.as_ref().ok_or(Error::NotNormalFrame)
    }

    /// Conjugacy class of `G` containing the minimal lift of `σ ∈ N`.
    pub fn class_of_n(&self, sigma: usize) -> usize {
        self.classes.class_of[self.quotient.lifts[sigma]]
    }

    /// `|H ∩ C|` for every class.
    pub fn h_meets(&self) -> Vec<usize> {
        self.class_fibres
            .iter()
            .map(|f| f.iter().map(|&c| c as usize).sum())
            .collect()
    }
}
