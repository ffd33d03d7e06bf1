//! Finite abelian groups in invariant-factor form.
//!
//! An [`AbelianStructure`] is `Z/d1 x ... x Z/dr` with `d1 | d2 | ... | dr`
//! and every `di > 1`. Elements are indexed in mixed radix with the last
//! coordinate varying fastest, so index 0 is always the identity.
//!
//! [`decompose`] turns an abstract abelian group, given only by a
//! multiplication closure on `0..n`, into that normal form together with
//! the isomorphism in both directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianStructure {
    factors: Vec<u32>,
}

impl AbelianStructure {
    pub fn new(factors: Vec<u32>) -> Result<Self> {
        let factors: Vec<u32> = factors.into_iter().filter(|&d| d != 1).collect();
        if factors.contains(&0) {
            return Err(Error::Parse("invariant factor 0".into()));
        }
        if factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::Parse(format!(
                "invariant factors {factors:?} do not form a divisibility chain"
            )));
        }
        Ok(Self { factors })
    }

    pub fn trivial() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(|&d| d as usize).product()
    }

    /// Least common multiple of all element orders (1 for the trivial group).
    pub fn exponent(&self) -> u32 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn coords(&self, mut index: usize) -> Vec<u32> {
        let mut out = vec![0; self.factors.len()];
        for (slot, &d) in out.iter_mut().zip(&self.factors).rev() {
            *slot = (index % d as usize) as u32;
            index /= d as usize;
        }
        out
    }

    pub fn index(&self, coords: &[u32]) -> usize {
        debug_assert_eq!(coords.len(), self.factors.len());
        coords
            .iter()
            .zip(&self.factors)
            .fold(0usize, |acc, (&c, &d)| acc * d as usize + (c % d) as usize)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let sum: Vec<u32> = ca
            .iter()
            .zip(&cb)
            .zip(&self.factors)
            .map(|((&x, &y), &d)| (x + y) % d)
            .collect();
        self.index(&sum)
    }

    pub fn neg(&self, a: usize) -> usize {
        let c: Vec<u32> = self
            .coords(a)
            .iter()
            .zip(&self.factors)
            .map(|(&x, &d)| (d - x) % d)
            .collect();
        self.index(&c)
    }

    pub fn scale(&self, a: usize, k: u64) -> usize {
        let c: Vec<u32> = self
            .coords(a)
            .iter()
            .zip(&self.factors)
            .map(|(&x, &d)| ((x as u64 * k) % d as u64) as u32)
            .collect();
        self.index(&c)
    }

    pub fn element_order(&self, a: usize) -> u32 {
        self.coords(a)
            .iter()
            .zip(&self.factors)
            .map(|(&x, &d)| d / num_integer::gcd(x, d))
            .fold(1, num_integer::lcm)
    }

    /// True when the group is `Z/4 x (Z/2)^n` for some `n >= 0`.
    pub fn is_z4_times_elementary_2(&self) -> bool {
        match self.factors.split_last() {
            Some((&4, rest)) => rest.iter().all(|&d| d == 2),
            _ => false,
        }
    }
}

/// Isomorphism between an abstract abelian group on `0..n` and its normal form.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub structure: AbelianStructure,
    /// Abstract element generating each cyclic factor.
    pub basis: Vec<usize>,
    /// Abstract element -> structure index.
    pub to_structure: Vec<usize>,
    /// Structure index -> abstract element.
    pub from_structure: Vec<usize>,
}

fn power(x: usize, k: u64, identity: usize, mul: &impl Fn(usize, usize) -> usize) -> usize {
    let mut acc = identity;
    let mut base = x;
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        k >>= 1;
    }
    acc
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_power_of(mut n: u64, p: u64) -> bool {
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

/// Decomposes the abelian group `0..n` with the given identity and product.
///
/// Each Sylow subgroup is split greedily: pick the element of largest order
/// modulo the span of the basis found so far, then correct it by an element
/// of that span so the new cyclic factor meets the span trivially. Sylow
/// bases are then merged into invariant factors.
pub fn decompose(n: usize, identity: usize, mul: impl Fn(usize, usize) -> usize) -> Result<Decomposition> {
    if n <= 1024 {
        for a in 0..n {
            for b in (a + 1)..n {
                if mul(a, b) != mul(b, a) {
                    return Err(Error::NotAbelian);
                }
            }
        }
    }
    let orders: Vec<u64> = (0..n)
        .map(|x| {
            let mut k = 1u64;
            let mut y = x;
            while y != identity {
                y = mul(y, x);
                k += 1;
            }
            k
        })
        .collect();

    let mut sylow_bases: Vec<Vec<(usize, u64)>> = Vec::new();
    for p in prime_factors(n as u64) {
        let sylow: Vec<usize> = (0..n).filter(|&x| is_power_of(orders[x], p)).collect();
        let mut in_span = vec![false; n];
        in_span[identity] = true;
        let mut span = vec![identity];
        let mut basis = Vec::new();
        while span.len() < sylow.len() {
            let mut best: Option<(usize, u64)> = None;
            for &x in &sylow {
                if in_span[x] {
                    continue;
                }
                let mut m = 1u64;
                let mut y = x;
                while !in_span[y] {
                    y = mul(y, x);
                    m += 1;
                }
                if best.is_none_or(|(_, bm)| m > bm) {
                    best = Some((x, m));
                }
            }
            let (x, m) = best.expect("span smaller than Sylow subgroup");
            let target = power(x, m, identity, &mul);
            let y = span
                .iter()
                .copied()
                .find(|&y| power(y, m, identity, &mul) == target)
                .ok_or_else(|| Error::CrossCheckMismatch("no m-th root in span during decomposition".into()))?;
            let y_inv = power(y, orders[y] - 1, identity, &mul);
            let x = mul(x, y_inv);
            let mut next = Vec::with_capacity(span.len() * m as usize);
            let mut step = identity;
            for _ in 0..m {
                for &b in &span {
                    let z = mul(b, step);
                    if in_span[z] && step != identity {
                        return Err(Error::CrossCheckMismatch(
                            "cyclic factor meets span nontrivially".into(),
                        ));
                    }
                    next.push(z);
                }
                step = mul(step, x);
            }
            for &z in &next {
                in_span[z] = true;
            }
            span = next;
            basis.push((x, m));
        }
        sylow_bases.push(basis);
    }

    // Largest invariant factor first, then reversed into a divisibility chain.
    let rank = sylow_bases.iter().map(Vec::len).max().unwrap_or(0);
    let mut gens = Vec::with_capacity(rank);
    let mut factors = Vec::with_capacity(rank);
    for k in 0..rank {
        let mut g = identity;
        let mut d = 1u64;
        for basis in &sylow_bases {
            if let Some(&(x, m)) = basis.get(k) {
                g = mul(g, x);
                d *= m;
            }
        }
        gens.push(g);
        factors.push(d as u32);
    }
    gens.reverse();
    factors.reverse();
    let structure = AbelianStructure::new(factors)?;

    let mut from_structure = vec![usize::MAX; structure.order()];
    let mut to_structure = vec![usize::MAX; n];
    for (idx, slot) in from_structure.iter_mut().enumerate() {
        let coords = structure.coords(idx);
        let mut e = identity;
        for (&g, &c) in gens.iter().zip(&coords) {
            e = mul(e, power(g, c as u64, identity, &mul));
        }
        if to_structure[e] != usize::MAX {
            return Err(Error::CrossCheckMismatch("decomposition map is not injective".into()));
        }
        to_structure[e] = idx;
        *slot = e;
    }
    if structure.order() != n {
        return Err(Error::CrossCheckMismatch(format!(
            "decomposition order {} != group order {n}",
            structure.order()
        )));
    }
    Ok(Decomposition {
        structure,
        basis: gens,
        to_structure,
        from_structure,
    })
}
