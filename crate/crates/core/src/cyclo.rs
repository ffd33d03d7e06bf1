//! Exact arithmetic in cyclotomic fields `Q(ζ_m)`.
//!
//! A [`Cyclotomic`] stores rational coefficients against the power basis
//! `1, ζ, …, ζ^{φ(m)-1}`, always reduced modulo `Φ_m`, so two values are
//! equal exactly when their conductors and coefficient vectors agree.
//! Binary operations lift both operands to the lcm of their conductors.
//! Conductors are never minimized.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

type Poly = Arc<Vec<i64>>;

fn cache() -> &'static RwLock<HashMap<u32, Poly>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Poly>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Coefficients of `Φ_m`, lowest degree first.
pub fn cyclotomic_polynomial(m: u32) -> Poly {
    assert!(m >= 1, "conductor must be positive");
    if let Some(p) = cache().read().expect("cache lock").get(&m) {
        return p.clone();
    }
    // x^m - 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = divide_monic(&num, &cyclotomic_polynomial(d));
        }
    }
    let poly = Arc::new(num);
    cache().write().expect("cache lock").entry(m).or_insert(poly).clone()
}

fn divide_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![0i64; num.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[k + j] = rem[k + j]
                    .checked_sub(c.checked_mul(dj).expect("cyclotomic coefficient overflow"))
                    .expect("cyclotomic coefficient overflow");
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

pub fn totient(m: u32) -> usize {
    cyclotomic_polynomial(m).len() - 1
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug)]
pub struct Cyclotomic {
    m: u32,
    coeffs: Vec<BigRational>,
}

/// Equality as field elements, whatever the conductors.
impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.m == other.m {
            return self.coeffs == other.coeffs;
        }
        let m = self.m.lcm(&other.m);
        self.lift(m).coeffs == other.lift(m).coeffs
    }
}

impl Eq for Cyclotomic {}

impl Cyclotomic {
    pub fn zero(m: u32) -> Self {
        Self {
            m,
            coeffs: vec![BigRational::zero(); totient(m)],
        }
    }

    pub fn from_rational(m: u32, r: BigRational) -> Self {
        let mut v = Self::zero(m);
        v.coeffs[0] = r;
        v
    }

    pub fn from_integer(m: u32, n: i64) -> Self {
        Self::from_rational(m, rat(n))
    }

    pub fn one(m: u32) -> Self {
        Self::from_integer(m, 1)
    }

    /// `ζ_m^k`.
    pub fn root_of_unity(m: u32, k: i64) -> Self {
        let mut dense = vec![BigRational::zero(); m as usize];
        dense[k.rem_euclid(m as i64) as usize] = BigRational::one();
        Self::from_power_sums(m, dense)
    }

    /// `Σ c_i ζ_m^i` for an arbitrary-length coefficient list.
    pub fn from_power_sums(m: u32, coeffs: Vec<BigRational>) -> Self {
        let mut dense = vec![BigRational::zero(); m as usize];
        for (i, c) in coeffs.into_iter().enumerate() {
            if !c.is_zero() {
                dense[i % m as usize] += c;
            }
        }
        Self {
            m,
            coeffs: reduce(m, dense),
        }
    }

    /// Integer-weighted sum of powers of `ζ_m`; `counts[i]` multiplies `ζ_m^i`.
    pub fn from_integer_power_sums(m: u32, counts: &[i64]) -> Self {
        Self::from_power_sums(m, counts.iter().map(|&c| rat(c)).collect())
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(Zero::is_zero)
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.coeffs[0].clone())
    }

    /// The same value written over `ζ_big`, where `m | big`.
    pub fn lift(&self, big: u32) -> Self {
        if big == self.m {
            return self.clone();
        }
        assert_eq!(big % self.m, 0, "conductor {} does not divide {big}", self.m);
        let step = (big / self.m) as usize;
        let mut dense = vec![BigRational::zero(); big as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            dense[i * step] = c.clone();
        }
        Self {
            m: big,
            coeffs: reduce(big, dense),
        }
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        let m = a.m.lcm(&b.m);
        (a.lift(m), b.lift(m))
    }

    /// Complex conjugation `ζ^i ↦ ζ^{m-i}`.
    pub fn conj(&self) -> Self {
        let m = self.m as usize;
        let mut dense = vec![BigRational::zero(); m];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                dense[(m - i) % m] += c;
            }
        }
        Self {
            m: self.m,
            coeffs: reduce(self.m, dense),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self {
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// `v · conj(v)`, a totally real element.
    pub fn abs_square(&self) -> Self {
        self * &self.conj()
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = Self::one(self.m);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn is_real(&self) -> bool {
        self.conj() == *self
    }

    /// Floating-point value. Error stays below `1e-12` for the small
    /// coefficients and conductors used here.
    pub fn numeric(&self) -> Complex64 {
        let m = self.m as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let angle = std::f64::consts::TAU * i as f64 / m;
                Complex64::from_polar(1.0, angle) * c.to_f64().unwrap_or(f64::NAN)
            })
            .sum()
    }

    /// The least `t ≥ 1` with `v^t` real when `v` is a real multiple of a
    /// root of unity; `Some(1)` for zero.
    ///
    /// Roots of unity in `Q(ζ_m)` have order dividing `2m`, so only divisors
    /// of `2m` need checking.
    pub fn real_times_root_of_unity(&self) -> Option<u32> {
        if self.is_zero() {
            return Some(1);
        }
        let two_m = 2 * self.m;
        (1..=two_m)
            .filter(|t| two_m.is_multiple_of(*t))
            .find(|&t| self.pow(t as u64).is_real())
    }

    pub fn is_real_times_root_of_unity(&self) -> bool {
        self.real_times_root_of_unity().is_some()
    }
}

fn reduce(m: u32, mut dense: Vec<BigRational>) -> Vec<BigRational> {
    let phi = cyclotomic_polynomial(m);
    let deg = phi.len() - 1;
    for k in (deg..dense.len()).rev() {
        if dense[k].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut dense[k], BigRational::zero());
        for (j, &pj) in phi.iter().enumerate().take(deg) {
            if pj != 0 {
                let idx = k - deg + j;
                dense[idx] -= &c * rat(pj);
            }
        }
    }
    dense.truncate(deg);
    dense.resize(deg, BigRational::zero());
    dense
}

impl Add for &Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &Cyclotomic) -> Cyclotomic {
        let (a, b) = Cyclotomic::common(self, rhs);
        Cyclotomic {
            m: a.m,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }
}

impl Sub for &Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &Cyclotomic) -> Cyclotomic {
        self + &(-rhs)
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic {
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        let (a, b) = Cyclotomic::common(self, rhs);
        let len = a.coeffs.len();
        let mut dense = vec![BigRational::zero(); (2 * len).saturating_sub(1).max(1)];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    dense[i + j] += x * y;
                }
            }
        }
        Cyclotomic {
            m: a.m,
            coeffs: reduce(a.m, dense),
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Cyclotomic {
            type Output = Cyclotomic;
            fn $f(self, rhs: Cyclotomic) -> Cyclotomic {
                (&self).$f(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        -&self
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, " + {c}*z^{i}")?;
            }
        }
        write!(f, " @ {}", self.m)
    }
}

impl FromStr for Cyclotomic {
    type Err = Error;

    /// Parses `c0 + c1*z^1 + … @ m`; terms may appear in any order and
    /// exponents may exceed `φ(m)`.
    fn from_str(s: &str) -> Result<Self> {
        let (body, m) = s
            .rsplit_once('@')
            .ok_or_else(|| Error::Parse(format!("missing '@ m' in {s:?}")))?;
        let m: u32 = m
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad conductor in {s:?}")))?;
        if m == 0 {
            return Err(Error::Parse("conductor 0".into()));
        }
        let mut dense = vec![BigRational::zero(); m as usize];
        for term in body.split(" + ").map(str::trim).filter(|t| !t.is_empty()) {
            let (c, k) = match term.split_once("*z^") {
                Some((c, k)) => (
                    c,
                    k.parse::<u64>()
                        .map_err(|_| Error::Parse(format!("bad exponent in {term:?}")))?,
                ),
                None => (term, 0),
            };
            let c: BigRational = c
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient in {term:?}")))?;
            dense[(k % m as u64) as usize] += c;
        }
        Ok(Self::from_power_sums(m, dense))
    }
}

/// Parses an exact rational such as `3/2`, `2` or `0.75`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{frac}", int.trim_start_matches(['-', '+']));
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    s.parse().map_err(|_| bad())
}

/// Integer `n` with `r = n`, if any.
pub fn as_integer(r: &BigRational) -> Option<BigInt> {
    r.is_integer().then(|| r.to_integer())
}

/// Exact square root of a non-negative rational, if it is a perfect square.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}
