//! Characters of `N`, their induction to `G`, moment exponents, the extremal
//! set, the `Q`-action on `N̂` and the cuspidal classification.
//!
//! Characters are indexed exactly like elements of `N`: the exponent vector
//! of a character is the coordinate vector of its index in the
//! [`AbelianStructure`], so index 0 is the trivial character and the order
//! is lexicographic in exponents.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::abelian::AbelianStructure;
use crate::cyclo::{as_integer, rational_sqrt, Cyclotomic};
use crate::error::{Error, Result};
use crate::permgroup::GaloisFrame;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DualCharacter {
    pub index: usize,
    pub exps: Vec<u32>,
    pub order: u32,
}

/// `χ(x)` as an exponent of `ζ_E`, `E` the exponent of the group.
pub fn char_exponent(structure: &AbelianStructure, exps: &[u32], x: usize) -> u32 {
    let e = structure.exponent() as u64;
    let coords = structure.coords(x);
    let k = structure
        .factors()
        .iter()
        .zip(exps)
        .zip(&coords)
        .map(|((&d, &a), &b)| a as u64 * b as u64 * (e / d as u64))
        .sum::<u64>();
    (k % e) as u32
}

pub fn char_value(structure: &AbelianStructure, exps: &[u32], x: usize) -> Cyclotomic {
    Cyclotomic::root_of_unity(structure.exponent(), char_exponent(structure, exps, x) as i64)
}

pub fn dual_of(structure: &AbelianStructure) -> Vec<DualCharacter> {
    (0..structure.order())
        .map(|index| DualCharacter {
            index,
            exps: structure.coords(index),
            order: structure.element_order(index),
        })
        .collect()
}

pub fn dual_group(frame: &GaloisFrame) -> Vec<DualCharacter> {
    dual_of(&frame.quotient().structure)
}

/// Values on the conjugacy classes of the frame's group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassFunction {
    pub values: Vec<Cyclotomic>,
}

impl ClassFunction {
    pub fn product(&self, other: &Self) -> Self {
        Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            values: self.values.iter().map(Cyclotomic::conj).collect(),
        }
    }
}

fn ratio(a: usize, b: usize) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// `χ̃^ind(C) = ([G:H]/|C|) Σ_{h∈H∩C} χ̃(h)`.
pub fn induce(frame: &GaloisFrame, chi: usize) -> ClassFunction {
    let structure = &frame.quotient().structure;
    let exps = structure.coords(chi);
    let e = structure.exponent();
    let index = frame.index();
    let values = frame
        .class_fibres()
        .iter()
        .zip(&frame.classes().classes)
        .map(|(fibre, class)| {
            let mut counts = vec![0i64; e as usize];
            for (x, &c) in fibre.iter().enumerate() {
                if c > 0 {
                    counts[char_exponent(structure, &exps, x) as usize] += c as i64;
                }
            }
            Cyclotomic::from_integer_power_sums(e, &counts).scale(&ratio(index, class.size()))
        })
        .collect();
    ClassFunction { values }
}

pub fn induce_all(frame: &GaloisFrame) -> Vec<ClassFunction> {
    (0..frame.quotient().order()).map(|c| induce(frame, c)).collect()
}

/// Class-weighted mean `(1/|G|) Σ_C |C| f(C)`.
fn class_mean(frame: &GaloisFrame, values: &[Cyclotomic]) -> Cyclotomic {
    let order = frame.group().order();
    values
        .iter()
        .zip(&frame.classes().classes)
        .fold(Cyclotomic::zero(1), |acc, (v, class)| {
            &acc + &v.scale(&ratio(class.size(), order))
        })
}

pub fn inner_product(frame: &GaloisFrame, f1: &ClassFunction, f2: &ClassFunction) -> Cyclotomic {
    class_mean(frame, &f1.product(&f2.conj()).values)
}

/// An exponent value: exact when the arithmetic allows it.
#[derive(Clone, Debug, PartialEq)]
pub enum ExponentValue {
    Exact(BigRational),
    Approx(f64),
}

impl ExponentValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Self::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Self::Exact(r) => Some(r),
            Self::Approx(_) => None,
        }
    }

    /// Comparison that is exact when both sides are, and otherwise treats
    /// values within `1e-9` (relative) as equal.
    pub fn compare(&self, other: &Self) -> Ordering {
        if let (Self::Exact(a), Self::Exact(b)) = (self, other) {
            return a.cmp(b);
        }
        let (a, b) = (self.to_f64(), other.to_f64());
        if (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0) {
            Ordering::Equal
        } else {
            a.partial_cmp(&b).unwrap_or(Ordering::Equal)
        }
    }
}

impl std::fmt::Display for ExponentValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Exact(r) => write!(f, "{r}"),
            Self::Approx(x) => write!(f, "{x:.12}"),
        }
    }
}

impl Serialize for ExponentValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("value", &self.to_f64())?;
        if let Self::Exact(r) = self {
            map.serialize_entry("exact", &r.to_string())?;
        }
        map.end()
    }
}

fn pow_rational(r: &BigRational, k: u64) -> BigRational {
    num_traits::pow(r.clone(), k as usize)
}

/// `(1/|G|) Σ_C |C| a_C^β` for totally real non-negative `a_C = |value|²`.
///
/// Integer `β` is exact. Half-integer `β` is exact when every `a_C` is a
/// rational square. Everything else is evaluated in floating point.
fn weighted_power_mean(frame: &GaloisFrame, abs_squares: &[Cyclotomic], beta: &BigRational) -> ExponentValue {
    let two_beta = beta * BigInt::from(2);
    if let Some(k) = as_integer(beta).and_then(|k| k.to_u64()) {
        let powered: Vec<Cyclotomic> = abs_squares.iter().map(|a| a.pow(k)).collect();
        if let Some(r) = class_mean(frame, &powered).to_rational() {
            return ExponentValue::Exact(r);
        }
    } else if let Some(k) = as_integer(&two_beta).and_then(|k| k.to_u64()) {
        let roots: Option<Vec<BigRational>> = abs_squares
            .iter()
            .map(|a| a.to_rational().and_then(|r| rational_sqrt(&r)))
            .collect();
        if let Some(roots) = roots {
            let order = frame.group().order();
            let sum = roots
                .iter()
                .zip(&frame.classes().classes)
                .fold(BigRational::zero(), |acc, (r, class)| {
                    acc + pow_rational(r, k) * ratio(class.size(), order)
                });
            return ExponentValue::Exact(sum);
        }
    }
    let b = beta.to_f64().unwrap_or(f64::NAN);
    let order = frame.group().order() as f64;
    let total = abs_squares
        .iter()
        .zip(&frame.classes().classes)
        .map(|(a, class)| class.size() as f64 * a.numeric().re.max(0.0).powf(b))
        .sum::<f64>();
    ExponentValue::Approx(total / order)
}

fn check_beta(beta: &BigRational) -> Result<()> {
    if beta.is_positive() {
        Ok(())
    } else {
        Err(Error::Parse(format!("beta must be positive, got {beta}")))
    }
}

/// `ρ(χ,β) = (1/|G|) Σ_g |χ̃^ind(g)|^{2β}`.
pub fn rho_char(frame: &GaloisFrame, chi: usize, beta: &BigRational) -> Result<ExponentValue> {
    check_beta(beta)?;
    let abs: Vec<Cyclotomic> = induce(frame, chi).values.iter().map(Cyclotomic::abs_square).collect();
    Ok(weighted_power_mean(frame, &abs, beta))
}

/// `[G:H]|H∩C|/|C|` for every class: the permutation character of `G/H`.
pub fn trivial_induced_values(frame: &GaloisFrame) -> Vec<BigRational> {
    let index = frame.index();
    frame
        .h_meets()
        .iter()
        .zip(&frame.classes().classes)
        .map(|(&meet, class)| ratio(index * meet, class.size()))
        .collect()
}

/// `ρ(β) = (1/|G|) Σ_C |C| ([G:H]|H∩C|/|C|)^{2β}`, exact whenever `2β` is an integer.
pub fn rho_max(frame: &GaloisFrame, beta: &BigRational) -> Result<ExponentValue> {
    check_beta(beta)?;
    let values = trivial_induced_values(frame);
    let order = frame.group().order();
    let two_beta = beta * BigInt::from(2);
    if let Some(k) = as_integer(&two_beta).and_then(|k| k.to_u64()) {
        let sum = values
            .iter()
            .zip(&frame.classes().classes)
            .fold(BigRational::zero(), |acc, (t, class)| {
                acc + pow_rational(t, k) * ratio(class.size(), order)
            });
        return Ok(ExponentValue::Exact(sum));
    }
    let b = two_beta.to_f64().unwrap_or(f64::NAN);
    let total = values
        .iter()
        .zip(&frame.classes().classes)
        .map(|(t, class)| class.size() as f64 * t.to_f64().unwrap_or(f64::NAN).powf(b))
        .sum::<f64>();
    Ok(ExponentValue::Approx(total / order as f64))
}

fn in_extremal(induced: &ClassFunction, trivial: &[BigRational]) -> bool {
    induced
        .values
        .iter()
        .zip(trivial)
        .all(|(v, t)| v.abs_square().to_rational().is_some_and(|a| a == t * t))
}

/// `𝔛`: characters whose induced values match the trivial induction in absolute value.
pub fn extremal_set(frame: &GaloisFrame) -> Vec<usize> {
    let trivial = trivial_induced_values(frame);
    (0..frame.quotient().order())
        .filter(|&c| in_extremal(&induce(frame, c), &trivial))
        .collect()
}

/// `(1/|G|) Σ_g χ̃₁^ind(g)⋯χ̃_k^ind(g)` as a non-negative integer.
pub fn rho_joint(frame: &GaloisFrame, chars: &[usize]) -> Result<BigInt> {
    let induced: Vec<ClassFunction> = chars.iter().map(|&c| induce(frame, c)).collect();
    rho_joint_induced(frame, &induced.iter().collect::<Vec<_>>())
}

pub fn rho_joint_induced(frame: &GaloisFrame, induced: &[&ClassFunction]) -> Result<BigInt> {
    let classes = frame.classes().len();
    let products: Vec<Cyclotomic> = (0..classes)
        .map(|c| induced.iter().fold(Cyclotomic::one(1), |acc, f| &acc * &f.values[c]))
        .collect();
    let mean = class_mean(frame, &products);
    mean.to_rational()
        .and_then(|r| as_integer(&r))
        .filter(|n| !n.is_negative())
        .ok_or_else(|| Error::NotInteger(mean.to_string()))
}

/// `τχ` where `(τχ)(h) = χ(τ̃⁻¹hτ̃)`.
pub fn q_action(frame: &GaloisFrame, tau: usize, chi: usize) -> Result<usize> {
    let qd = frame.require_q_action()?;
    let structure = &frame.quotient().structure;
    Ok(act_on_character(structure, &qd.action[tau], chi))
}

/// Pulls a character back along an automorphism of `N`.
pub fn act_on_character(structure: &AbelianStructure, automorphism: &[usize], chi: usize) -> usize {
    let exps = structure.coords(chi);
    let e = structure.exponent();
    let new_exps: Vec<u32> = structure
        .factors()
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let mut unit = vec![0u32; structure.rank()];
            unit[j] = 1;
            let image = automorphism[structure.index(&unit)];
            char_exponent(structure, &exps, image) / (e / d)
        })
        .collect();
    structure.index(&new_exps)
}

/// Orbits of `Q` on `N̂`, each sorted, listed by minimal member.
pub fn q_orbits(frame: &GaloisFrame) -> Result<Vec<Vec<usize>>> {
    let qd = frame.require_q_action()?;
    let n = frame.quotient().order();
    let mut seen = vec![false; n];
    let mut orbits = Vec::new();
    for chi in 0..n {
        if seen[chi] {
            continue;
        }
        let mut orbit: Vec<usize> = (0..qd.order())
            .map(|t| q_action(frame, t, chi))
            .collect::<Result<_>>()?;
        orbit.sort_unstable();
        orbit.dedup();
        for &x in &orbit {
            seen[x] = true;
        }
        orbits.push(orbit);
    }
    Ok(orbits)
}

/// Characters moved by every nontrivial `τ ∈ Q`.
pub fn cuspidal_characters(frame: &GaloisFrame) -> Result<Vec<usize>> {
    let qd = frame.require_q_action()?;
    let n = frame.quotient().order();
    let mut out = Vec::new();
    for chi in 0..n {
        let mut free = true;
        for tau in 1..qd.order() {
            if q_action(frame, tau, chi)? == chi {
                free = false;
                break;
            }
        }
        if free {
            out.push(chi);
        }
    }
    Ok(out)
}

/// One representative per `Q`-orbit of cuspidal characters (the minimal one).
pub fn cuspidal_representatives(frame: &GaloisFrame) -> Result<Vec<usize>> {
    let cusp = cuspidal_characters(frame)?;
    Ok(q_orbits(frame)?
        .into_iter()
        .filter(|o| cusp.binary_search(&o[0]).is_ok())
        .map(|o| o[0])
        .collect())
}

/// `χᵢ^ind(σ)` for every cuspidal representative.
fn cusp_values(frame: &GaloisFrame, sigma: usize) -> Result<Vec<(usize, Cyclotomic)>> {
    let class = frame.class_of_n(sigma);
    Ok(cuspidal_representatives(frame)?
        .into_iter()
        .map(|chi| (chi, induce(frame, chi).values[class].clone()))
        .collect())
}

pub fn cusp_vanishes(frame: &GaloisFrame, sigma: usize) -> Result<bool> {
    Ok(cusp_values(frame, sigma)?.iter().all(|(_, v)| v.is_zero()))
}

/// `𝔛_{σ,β}` with the attained maximum, or `None` when the projection vanishes.
pub fn cusp_extremal(
    frame: &GaloisFrame,
    sigma: usize,
    beta: &BigRational,
) -> Result<Option<(ExponentValue, Vec<usize>)>> {
    let mut best: Option<(ExponentValue, Vec<usize>)> = None;
    for (chi, v) in cusp_values(frame, sigma)? {
        if v.is_zero() {
            continue;
        }
        let rho = rho_char(frame, chi, beta)?;
        best = match best {
            None => Some((rho, vec![chi])),
            Some((b, mut set)) => match rho.compare(&b) {
                Ordering::Greater => Some((rho, vec![chi])),
                Ordering::Equal => {
                    set.push(chi);
                    Some((b, set))
                }
                Ordering::Less => Some((b, set)),
            },
        };
    }
    Ok(best)
}

pub fn rho_cusp(frame: &GaloisFrame, sigma: usize, beta: &BigRational) -> Result<Option<ExponentValue>> {
    Ok(cusp_extremal(frame, sigma, beta)?.map(|(v, _)| v))
}

/// Every character in `𝔛_{σ,β}` takes only values in `ℝ × (root of unity)`.
pub fn star_star(frame: &GaloisFrame, sigma: usize, beta: &BigRational) -> Result<bool> {
    let Some((_, set)) = cusp_extremal(frame, sigma, beta)? else {
        return Ok(true);
    };
    Ok(set.iter().all(|&chi| {
        induce(frame, chi)
            .values
            .iter()
            .all(Cyclotomic::is_real_times_root_of_unity)
    }))
}

/// `(1/(|A||Q|)) Σ_{a∈A} |Σ_{τ∈Q} χ(τa)|^{2β}` for `Q` given by its full list
/// of permutations of the elements of `A`.
pub fn rho_galois_action(
    structure: &AbelianStructure,
    action: &[Vec<usize>],
    chi: usize,
    beta: &BigRational,
) -> Result<ExponentValue> {
    check_beta(beta)?;
    let n = structure.order();
    for perm in action {
        if perm.len() != n {
            return Err(Error::NotAutomorphism);
        }
        let mut seen = vec![false; n];
        for &x in perm {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::NotAutomorphism);
            }
        }
        for a in 0..n {
            for b in 0..n {
                if perm[structure.add(a, b)] != structure.add(perm[a], perm[b]) {
                    return Err(Error::NotAutomorphism);
                }
            }
        }
    }
    let exps = structure.coords(chi);
    let e = structure.exponent();
    let abs: Vec<Cyclotomic> = (0..n)
        .map(|a| {
            let mut counts = vec![0i64; e as usize];
            for perm in action {
                counts[char_exponent(structure, &exps, perm[a]) as usize] += 1;
            }
            Cyclotomic::from_integer_power_sums(e, &counts).abs_square()
        })
        .collect();
    let total = (n * action.len()) as i64;
    let two_beta = beta * BigInt::from(2);
    if let Some(k) = as_integer(beta).and_then(|k| k.to_u64()) {
        let sum = abs.iter().fold(Cyclotomic::zero(1), |acc, a| &acc + &a.pow(k));
        if let Some(r) = sum.to_rational() {
            return Ok(ExponentValue::Exact(r / BigInt::from(total)));
        }
    } else if let Some(k) = as_integer(&two_beta).and_then(|k| k.to_u64()) {
        let roots: Option<Vec<BigRational>> = abs
            .iter()
            .map(|a| a.to_rational().and_then(|r| rational_sqrt(&r)))
            .collect();
        if let Some(roots) = roots {
            let sum = roots
                .iter()
                .fold(BigRational::zero(), |acc, r| acc + pow_rational(r, k));
            return Ok(ExponentValue::Exact(sum / BigInt::from(total)));
        }
    }
    let b = beta.to_f64().unwrap_or(f64::NAN);
    let sum: f64 = abs.iter().map(|a| a.numeric().re.max(0.0).powf(b)).sum();
    Ok(ExponentValue::Approx(sum / total as f64))
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterEntry {
    pub index: usize,
    pub exps: Vec<u32>,
    pub order: u32,
    pub induced: Vec<String>,
    pub rho: Vec<ExponentValue>,
    pub extremal: bool,
    pub cuspidal: bool,
    pub orbit: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaEntry {
    pub sigma: usize,
    pub coords: Vec<u32>,
    pub vanishes: bool,
    pub rho_cusp: Vec<Option<ExponentValue>>,
    /// `𝔛_{σ,β}` at each grid point.
    pub extremal: Vec<Vec<usize>>,
    pub star_star: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CuspidalReport {
    pub structure: Vec<u32>,
    pub q_order: usize,
    pub betas: Vec<String>,
    pub cuspidal: Vec<usize>,
    pub representatives: Vec<usize>,
    pub characters: Vec<CharacterEntry>,
    pub sigmas: Vec<SigmaEntry>,
}

pub fn cuspidal_report(frame: &GaloisFrame, betas: &[BigRational]) -> Result<CuspidalReport> {
    let qd = frame.require_q_action()?;
    let structure = &frame.quotient().structure;
    let cuspidal = cuspidal_characters(frame)?;
    let orbits = q_orbits(frame)?;
    let representatives = cuspidal_representatives(frame)?;
    let induced = induce_all(frame);
    let trivial = trivial_induced_values(frame);

    // N̂₀ must coincide with the characters whose induction is irreducible.
    for (chi, f) in induced.iter().enumerate() {
        let irreducible = inner_product(frame, f, f).to_rational() == Some(BigRational::one());
        if irreducible != cuspidal.binary_search(&chi).is_ok() {
            return Err(Error::CrossCheckMismatch(format!(
                "character {chi}: irreducibility disagrees with the Q-action"
            )));
        }
    }
    if !cuspidal.is_empty() && cuspidal.len() != representatives.len() * qd.order() {
        return Err(Error::CrossCheckMismatch("Q does not act freely on N̂₀".into()));
    }

    let mut orbit_of = vec![0; structure.order()];
    for (k, o) in orbits.iter().enumerate() {
        for &x in o {
            orbit_of[x] = k;
        }
    }
    let characters = dual_group(frame)
        .into_iter()
        .map(|c| {
            Ok(CharacterEntry {
                rho: betas
                    .iter()
                    .map(|b| rho_char(frame, c.index, b))
                    .collect::<Result<_>>()?,
                induced: induced[c.index].values.iter().map(ToString::to_string).collect(),
                extremal: in_extremal(&induced[c.index], &trivial),
                cuspidal: cuspidal.binary_search(&c.index).is_ok(),
                orbit: orbit_of[c.index],
                index: c.index,
                exps: c.exps,
                order: c.order,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sigmas = (0..structure.order())
        .map(|sigma| {
            let mut rho_cusp = Vec::new();
            let mut extremal = Vec::new();
            let mut stars = Vec::new();
            for b in betas {
                let ext = cusp_extremal(frame, sigma, b)?;
                stars.push(star_star(frame, sigma, b)?);
                extremal.push(ext.as_ref().map(|(_, s)| s.clone()).unwrap_or_default());
                rho_cusp.push(ext.map(|(v, _)| v));
            }
            Ok(SigmaEntry {
                sigma,
                coords: structure.coords(sigma),
                vanishes: cusp_vanishes(frame, sigma)?,
                rho_cusp,
                extremal,
                star_star: stars,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CuspidalReport {
        structure: structure.factors().to_vec(),
        q_order: qd.order(),
        betas: betas.iter().map(ToString::to_string).collect(),
        cuspidal,
        representatives,
        characters,
        sigmas,
    })
}
