//! Exact finite permutation groups: closure, conjugacy classes, subgroups,
//! cosets and abelian quotients.
//!
//! Groups are small (a few thousand elements at most in practice), so every
//! operation is a direct enumeration. Elements are stored sorted
//! lexicographically by image array; the identity is always index 0.
//! Products follow function composition: `mul(a, b)` applies `b` first.

mod frame;

pub use frame::{FrameSpec, GaloisFrame, KernelSpec, QAction, SubgroupSpec};

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::abelian::{decompose, AbelianStructure};
use crate::error::{Error, Result};

/// Guard on closure size.
pub const ORDER_GUARD: usize = 100_000;
const TABLE_LIMIT: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn new(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i as usize >= n || std::mem::replace(&mut seen[i as usize], true) {
                return Err(Error::NotAPermutation { degree: n });
            }
        }
        Ok(Self { images })
    }

    pub fn identity(degree: usize) -> Self {
        Self {
            images: (0..degree as u32).collect(),
        }
    }

    /// Builds a permutation from disjoint cycles on `0..degree`.
    pub fn from_cycles(degree: usize, cycles: &[Vec<u32>]) -> Result<Self> {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        for cycle in cycles {
            for (k, &a) in cycle.iter().enumerate() {
                let b = cycle[(k + 1) % cycle.len()];
                if a as usize >= degree || b as usize >= degree {
                    return Err(Error::NotAPermutation { degree });
                }
                images[a as usize] = b;
            }
        }
        Self::new(images)
    }

    /// Parses cycle notation such as `(2,12)(4,7)(8,10)`.
    ///
    /// With `one_indexed` the points are shifted down by one, which is how
    /// permutations printed by computer-algebra systems are read.
    pub fn parse_cycles(degree: usize, text: &str, one_indexed: bool) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .find('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {text:?}")))?;
            let close = rest
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced cycle in {text:?}")))?;
            let inner = &rest[open + 1..close];
            let mut cycle = Vec::new();
            for tok in inner.split([',', ' ']).filter(|t| !t.is_empty()) {
                let v: u32 = tok.parse().map_err(|_| Error::Parse(format!("bad point {tok:?}")))?;
                if one_indexed && v == 0 {
                    return Err(Error::Parse("point 0 in one-indexed cycle".into()));
                }
                cycle.push(if one_indexed { v - 1 } else { v });
            }
            cycles.push(cycle);
            rest = rest[close + 1..].trim();
        }
        Self::from_cycles(degree, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn apply(&self, point: u32) -> u32 {
        self.images[point as usize]
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.degree(), other.degree());
        Self {
            images: other.images.iter().map(|&i| self.images[i as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j as usize] = i as u32;
        }
        Self { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.degree()];
        let mut any = false;
        for start in 0..self.degree() {
            if seen[start] || self.images[start] as usize == start {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut p = start;
            let mut first = true;
            while !seen[p] {
                seen[p] = true;
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "{p}")?;
                first = false;
                p = self.images[p] as usize;
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FiniteGroup {
    degree: usize,
    elements: Vec<Permutation>,
    lookup: HashMap<Permutation, usize>,
    generators: Vec<usize>,
    inverses: Vec<usize>,
    table: Option<Vec<u32>>,
}

impl FiniteGroup {
    pub fn closure(degree: usize, generators: &[Permutation]) -> Result<Self> {
        Self::closure_bounded(degree, generators, ORDER_GUARD)
    }

    pub fn closure_bounded(degree: usize, generators: &[Permutation], bound: usize) -> Result<Self> {
        for g in generators {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                });
            }
        }
        let id = Permutation::identity(degree);
        let mut seen: HashMap<Permutation, ()> = HashMap::new();
        seen.insert(id.clone(), ());
        let mut queue = VecDeque::from([id]);
        let mut found = Vec::new();
        while let Some(x) = queue.pop_front() {
            for g in generators {
                let y = g.compose(&x);
                if !seen.contains_key(&y) {
                    if seen.len() >= bound {
                        return Err(Error::OrderBound { bound });
                    }
                    seen.insert(y.clone(), ());
                    queue.push_back(y);
                }
            }
            found.push(x);
        }
        found.sort();
        let lookup: HashMap<Permutation, usize> = found.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let mut gen_idx: Vec<usize> = generators.iter().map(|g| lookup[g]).collect();
        gen_idx.sort_unstable();
        gen_idx.dedup();
        let inverses = found.iter().map(|p| lookup[&p.inverse()]).collect();
        let mut group = Self {
            degree,
            elements: found,
            lookup,
            generators: gen_idx,
            inverses,
            table: None,
        };
        let n = group.order();
        if n <= TABLE_LIMIT {
            let mut table = vec![0u32; n * n];
            for i in 0..n {
                for j in 0..n {
                    table[i * n + j] = group.mul_slow(i, j) as u32;
                }
            }
            group.table = Some(table);
        }
        Ok(group)
    }

    fn mul_slow(&self, a: usize, b: usize) -> usize {
        self.lookup[&self.elements[a].compose(&self.elements[b])]
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.lookup.get(p).copied()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.order() + b] as usize,
            None => self.mul_slow(a, b),
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// `g⁻¹ x g`.
    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.inv(g), self.mul(x, g))
    }

    pub fn orbit(&self, point: u32) -> Vec<u32> {
        let mut seen = vec![false; self.degree];
        seen[point as usize] = true;
        let mut out = vec![point];
        let mut k = 0;
        while k < out.len() {
            let p = out[k];
            for &g in &self.generators {
                let q = self.elements[g].apply(p);
                if !std::mem::replace(&mut seen[q as usize], true) {
                    out.push(q);
                }
            }
            k += 1;
        }
        out.sort_unstable();
        out
    }

    pub fn conjugacy_classes(&self) -> ConjugacyClasses {
        let n = self.order();
        let mut class_of = vec![usize::MAX; n];
        let mut classes = Vec::new();
        for start in 0..n {
            if class_of[start] != usize::MAX {
                continue;
            }
            let id = classes.len();
            class_of[start] = id;
            let mut members = vec![start];
            let mut k = 0;
            while k < members.len() {
                let x = members[k];
                for &g in &self.generators {
                    let y = self.conj(g, x);
                    if class_of[y] == usize::MAX {
                        class_of[y] = id;
                        members.push(y);
                    }
                }
                k += 1;
            }
            members.sort_unstable();
            classes.push(ConjugacyClass {
                representative: start,
                members,
            });
        }
        ConjugacyClasses { classes, class_of }
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup::from_members(self.order(), (0..self.order()).collect())
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup::from_members(self.order(), vec![0])
    }

    /// Selects the elements satisfying `pred` and verifies they form a subgroup.
    pub fn subgroup_from_predicate(&self, pred: impl Fn(&Permutation) -> bool) -> Result<Subgroup> {
        let members: Vec<usize> = (0..self.order()).filter(|&i| pred(&self.elements[i])).collect();
        let sub = Subgroup::from_members(self.order(), members);
        if !sub.contains(0) || !self.order().is_multiple_of(sub.order()) {
            return Err(Error::NotClosed);
        }
        for &a in sub.members() {
            for &b in sub.members() {
                if !sub.contains(self.mul(a, b)) {
                    return Err(Error::NotClosed);
                }
            }
        }
        Ok(sub)
    }

    pub fn subgroup_generated(&self, gens: &[usize]) -> Subgroup {
        let mut mask = vec![false; self.order()];
        mask[0] = true;
        let mut members = vec![0];
        let mut k = 0;
        while k < members.len() {
            let x = members[k];
            for &g in gens {
                let y = self.mul(g, x);
                if !std::mem::replace(&mut mask[y], true) {
                    members.push(y);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        Subgroup::from_members(self.order(), members)
    }

    pub fn stabilizer(&self, point: u32) -> Subgroup {
        let members = (0..self.order())
            .filter(|&i| self.elements[i].apply(point) == point)
            .collect();
        Subgroup::from_members(self.order(), members)
    }

    /// Whether `sub` is normalized by every element of `within`.
    pub fn is_normal(&self, sub: &Subgroup, within: &Subgroup) -> bool {
        within
            .members()
            .iter()
            .all(|&g| sub.members().iter().all(|&x| sub.contains(self.conj(g, x))))
    }

    /// Left cosets `gS` of `sub` in `within`, each sorted, ordered by minimal element.
    pub fn left_cosets(&self, sub: &Subgroup, within: &Subgroup) -> Vec<Vec<usize>> {
        let mut assigned = vec![false; self.order()];
        let mut out = Vec::new();
        for &g in within.members() {
            if assigned[g] {
                continue;
            }
            let mut coset: Vec<usize> = sub.members().iter().map(|&s| self.mul(g, s)).collect();
            coset.sort_unstable();
            for &x in &coset {
                assigned[x] = true;
            }
            out.push(coset);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyClass {
    pub representative: usize,
    pub members: Vec<usize>,
}

impl ConjugacyClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug)]
pub struct ConjugacyClasses {
    pub classes: Vec<ConjugacyClass>,
    /// Element index -> class index.
    pub class_of: Vec<usize>,
}

impl ConjugacyClasses {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(ConjugacyClass::size).collect()
    }
}

/// A subgroup as a sorted index set into its parent group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl Subgroup {
    fn from_members(parent_order: usize, members: Vec<usize>) -> Self {
        let mut mask = vec![false; parent_order];
        for &m in &members {
            mask[m] = true;
        }
        Self { members, mask }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn index_in(&self, group: &FiniteGroup) -> usize {
        group.order() / self.order()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }
}

/// `N = H / Ksub` in normal form, with the quotient map restricted to `H`.
#[derive(Clone, Debug)]
pub struct AbelianQuotient {
    pub structure: AbelianStructure,
    /// Group element -> index in `structure`; `None` outside `H`.
    pub image: Vec<Option<usize>>,
    /// Structure index -> minimal group element in the corresponding coset.
    pub lifts: Vec<usize>,
}

impl AbelianQuotient {
    pub fn order(&self) -> usize {
        self.structure.order()
    }
}

pub fn quotient_abelian(group: &FiniteGroup, h: &Subgroup, ksub: &Subgroup) -> Result<AbelianQuotient> {
    if !ksub.is_subgroup_of(h) || !group.is_normal(ksub, h) {
        return Err(Error::NotNormal);
    }
    let cosets = group.left_cosets(ksub, h);
    let mut coset_of = vec![usize::MAX; group.order()];
    for (c, members) in cosets.iter().enumerate() {
        for &m in members {
            coset_of[m] = c;
        }
    }
    let reps: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
    let mul = |a: usize, b: usize| coset_of[group.mul(reps[a], reps[b])];
    for a in 0..reps.len() {
        for b in (a + 1)..reps.len() {
            if mul(a, b) != mul(b, a) {
                return Err(Error::NotAbelian);
            }
        }
    }
    let dec = decompose(reps.len(), coset_of[0], mul)?;
    let image = (0..group.order())
        .map(|g| match coset_of[g] {
            usize::MAX => None,
            c => Some(dec.to_structure[c]),
        })
        .collect();
    let lifts = dec.from_structure.iter().map(|&c| reps[c]).collect();
    Ok(AbelianQuotient {
        structure: dec.structure,
        image,
        lifts,
    })
}
