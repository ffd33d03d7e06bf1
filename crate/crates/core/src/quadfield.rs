//! Imaginary quadratic ground truth: reduced forms, composition, the form
//! class group, representation numbers and ideal-class counting tables.
//!
//! Class counts `a(σ,n)` are defined as `r_g(n)/w` on `gcd(n,f) = 1`; other
//! `n` are outside the table's domain and hold 0.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::abelian::{decompose, AbelianStructure};
use crate::chartheory::char_exponent;
use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};

/// Total `u32` cells a coefficient table may hold.
pub const CELL_BUDGET: u128 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuadDiscriminant {
    pub d: i64,
    pub fundamental: i64,
    pub conductor: u32,
    pub units: u32,
}

fn squarefree_split(n: u64) -> (u64, u64) {
    // n = core * s^2 with core squarefree
    let mut core = 1u64;
    let mut s = 1u64;
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            core *= p;
        }
        p += 1;
    }
    (core * m, s)
}

impl QuadDiscriminant {
    pub fn new(d: i64) -> Result<Self> {
        if d >= 0 || d.rem_euclid(4) > 1 {
            return Err(Error::InvalidDiscriminant(d));
        }
        let (core, s) = squarefree_split(d.unsigned_abs());
        let core = -(core as i64);
        let (fundamental, conductor) = if core.rem_euclid(4) == 1 {
            (core, s)
        } else {
            if s % 2 != 0 {
                return Err(Error::InvalidDiscriminant(d));
            }
            (4 * core, s / 2)
        };
        let units = match d {
            -3 => 6,
            -4 => 4,
            _ => 2,
        };
        Ok(Self {
            d,
            fundamental,
            conductor: conductor as u32,
            units,
        })
    }

    pub fn is_fundamental(&self) -> bool {
        self.conductor == 1
    }

    pub fn in_domain(&self, n: u64) -> bool {
        n.gcd(&(self.conductor as u64)) == 1
    }
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    QuadDiscriminant::new(d).is_ok_and(|q| q.is_fundamental())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let Self { a, b, c } = *self;
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    /// Reduced representative of a positive definite form.
    pub fn reduce(&self) -> Self {
        let d = self.discriminant() as i128;
        let (mut a, mut b) = (self.a as i128, self.b as i128);
        let mut c = self.c as i128;
        loop {
            if b > a || b <= -a {
                let k = (a - b).div_euclid(2 * a);
                b += 2 * a * k;
                c = (b * b - d) / (4 * a);
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            break;
        }
        Self::new(a as i64, b as i64, c as i64)
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.a, -self.b, self.c).reduce()
    }

    /// Reduced composite of two primitive forms of one discriminant.
    pub fn compose(&self, other: &Self) -> Self {
        let disc = self.discriminant() as i128;
        let (mut f1, mut f2) = (*self, *other);
        if f1.a > f2.a {
            std::mem::swap(&mut f1, &mut f2);
        }
        let (a1, b1) = (f1.a as i128, f1.b as i128);
        let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, d) = if a2 % a1 == 0 {
            (0, a1)
        } else {
            let g = a2.extended_gcd(&a1);
            (g.x, g.gcd)
        };
        let (x2, y2, d1) = if s % d == 0 {
            (0, -1, d)
        } else {
            let g = s.extended_gcd(&d);
            (g.x, -g.y, g.gcd)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (b3 * b3 - disc) / (4 * a3);
        Self::new(a3 as i64, b3 as i64, c3 as i64).reduce()
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// All reduced primitive forms of discriminant `d`, sorted by `(a, b, c)`.
pub fn enumerate_reduced(d: i64) -> Result<Vec<QuadForm>> {
    QuadDiscriminant::new(d)?;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in (-a + 1)..=a {
            if (b - d).rem_euclid(2) != 0 || (b * b - d) % (4 * a) != 0 {
                continue;
            }
            let f = QuadForm::new(a, b, (b * b - d) / (4 * a));
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
        a += 1;
    }
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FormClassGroup {
    pub disc: QuadDiscriminant,
    pub forms: Vec<QuadForm>,
    table: Vec<usize>,
    pub structure: AbelianStructure,
    /// Form index -> structure index.
    pub to_structure: Vec<usize>,
    /// Structure index -> form index.
    pub from_structure: Vec<usize>,
}

impl FormClassGroup {
    pub fn new(d: i64) -> Result<Self> {
        let disc = QuadDiscriminant::new(d)?;
        let forms = enumerate_reduced(d)?;
        let h = forms.len();
        let mut table = vec![0; h * h];
        for i in 0..h {
            for j in 0..h {
                let f = forms[i].compose(&forms[j]);
                table[i * h + j] = forms.binary_search(&f).map_err(|_| {
                    Error::CrossCheckMismatch(format!("{} ∘ {} = {f} is not reduced", forms[i], forms[j]))
                })?;
            }
        }
        let dec = decompose(h, 0, |i, j| table[i * h + j])?;
        Ok(Self {
            disc,
            forms,
            table,
            structure: dec.structure,
            to_structure: dec.to_structure,
            from_structure: dec.from_structure,
        })
    }

    pub fn class_number(&self) -> usize {
        self.forms.len()
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i * self.forms.len() + j]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.forms
            .binary_search(&self.forms[i].inverse())
            .expect("inverse of a reduced form is listed")
    }

    pub fn index_of(&self, f: &QuadForm) -> Option<usize> {
        self.forms.binary_search(&f.reduce()).ok()
    }

    pub fn element_order(&self, i: usize) -> u32 {
        self.structure.element_order(self.to_structure[i])
    }

    /// `χ(σ)` as an exponent of `ζ_E`, with characters indexed as in
    /// [`crate::chartheory::dual_of`] over [`Self::structure`].
    pub fn char_exponent(&self, chi: usize, sigma: usize) -> u32 {
        let exps = self.structure.coords(chi);
        char_exponent(&self.structure, &exps, self.to_structure[sigma])
    }

    /// Characters with values in `{±1}`.
    pub fn real_characters(&self) -> Vec<usize> {
        (0..self.class_number())
            .filter(|&chi| self.structure.element_order(chi) <= 2)
            .collect()
    }
}

/// `r_g(n)` for `0 ≤ n ≤ x` (entry 0 is left at 0).
pub fn count_representations(form: &QuadForm, x: u64) -> Vec<u32> {
    let mut r = vec![0u32; x as usize + 1];
    let QuadForm { a, b, c } = *form;
    let d = -form.discriminant() as i128;
    let (a128, x128) = (a as i128, x as i128);
    let ymax = ((4 * a128 * x128 / d) as f64).sqrt() as i64 + 1;
    for y in -ymax..=ymax {
        let disc = 4 * a128 * x128 - d * (y as i128) * (y as i128);
        if disc < 0 {
            continue;
        }
        let s = (disc as f64).sqrt() as i64 + 1;
        let lo = (-b * y - s).div_euclid(2 * a) - 1;
        let hi = (-b * y + s).div_euclid(2 * a) + 1;
        let cy = c * y * y;
        for xv in lo..=hi {
            let v = a * xv * xv + b * xv * y + cy;
            if v > 0 && v as u64 <= x {
                r[v as usize] += 1;
            }
        }
    }
    r
}

#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub disc: QuadDiscriminant,
    pub x: u64,
    pub forms: Vec<QuadForm>,
    /// `a(σ,n)` per class, index `n`, zero outside the domain.
    pub counts: Vec<Vec<u32>>,
    /// `r_g(n)` per class, all `n`.
    pub reps: Vec<Vec<u32>>,
}

pub fn ideal_class_counts(group: &FormClassGroup, x: u64) -> Result<CoefficientTable> {
    let h = group.class_number() as u128;
    let cells = 2 * h * (x as u128 + 1);
    if cells > CELL_BUDGET {
        return Err(Error::MemoryBudget {
            cells,
            budget: CELL_BUDGET,
        });
    }
    let disc = group.disc;
    let w = disc.units;
    let reps: Vec<Vec<u32>> = group.forms.par_iter().map(|f| count_representations(f, x)).collect();
    let counts = reps
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(n, &v)| {
                    if n == 0 || !disc.in_domain(n as u64) {
                        Ok(0)
                    } else if v % w != 0 {
                        Err(Error::NonIntegral(format!("r({n}) = {v} not divisible by {w}")))
                    } else {
                        Ok(v / w)
                    }
                })
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<_>>()?;
    Ok(CoefficientTable {
        disc,
        x,
        forms: group.forms.clone(),
        counts,
        reps,
    })
}

impl CoefficientTable {
    pub fn class_number(&self) -> usize {
        self.forms.len()
    }

    fn check_limit(&self, limit: u64) -> Result<()> {
        if limit > self.x {
            return Err(Error::DomainExceeded {
                available: self.x,
                requested: limit,
            });
        }
        Ok(())
    }

    /// Exact `a(χ,n) = Σ_σ χ(σ) a(σ,n)` for `n ≤ limit`; entry 0 is zero.
    pub fn char_coefficients(&self, group: &FormClassGroup, chi: usize, limit: u64) -> Result<Vec<Cyclotomic>> {
        self.check_limit(limit)?;
        let e = group.structure.exponent();
        let exps: Vec<u32> = (0..self.class_number()).map(|s| group.char_exponent(chi, s)).collect();
        (0..=limit as usize)
            .map(|n| {
                let mut power_counts = vec![0i64; e as usize];
                for (s, col) in self.counts.iter().enumerate() {
                    power_counts[exps[s] as usize] += col[n] as i64;
                }
                let v = Cyclotomic::from_integer_power_sums(e, &power_counts);
                if v.is_real() {
                    Ok(v)
                } else {
                    Err(Error::CrossCheckMismatch(format!("a(χ,{n}) is not real")))
                }
            })
            .collect()
    }

    /// Floating-point `a(χ,n)` over the whole table.
    pub fn char_coefficients_f64(&self, group: &FormClassGroup, chi: usize) -> Vec<f64> {
        let e = group.structure.exponent() as f64;
        let weights: Vec<f64> = (0..self.class_number())
            .map(|s| (std::f64::consts::TAU * group.char_exponent(chi, s) as f64 / e).cos())
            .collect();
        (0..=self.x as usize)
            .map(|n| self.counts.iter().zip(&weights).map(|(col, w)| col[n] as f64 * w).sum())
            .collect()
    }

    /// `h · a_cusp(σ,n) = h·a(σ,n) − Σ_{χ real} χ(σ) a(χ,n)`, all integers.
    pub fn cusp_numerators(&self, group: &FormClassGroup, sigma: usize) -> Vec<i64> {
        let h = self.class_number() as i64;
        let real = group.real_characters();
        // sign[χ][τ] = χ(τ) for real χ
        let e = group.structure.exponent();
        let sign = |chi: usize, tau: usize| -> i64 {
            if group.char_exponent(chi, tau) == 0 {
                1
            } else {
                debug_assert_eq!(2 * group.char_exponent(chi, tau), e);
                -1
            }
        };
        // Σ_χ χ(σ)χ(τ) over real χ, per class τ
        let weights: Vec<i64> = (0..self.class_number())
            .map(|tau| real.iter().map(|&chi| sign(chi, sigma) * sign(chi, tau)).sum())
            .collect();
        (0..=self.x as usize)
            .map(|n| {
                let proj: i64 = self
                    .counts
                    .iter()
                    .zip(&weights)
                    .map(|(col, &w)| w * col[n] as i64)
                    .sum();
                h * self.counts[sigma][n] as i64 - proj
            })
            .collect()
    }

    /// Binary layout: `D: i64, X: u64, h: u32, f: u32, w: u32`, then for each
    /// class the counts `a(σ,1..=X)` as little-endian `u32`.
    pub fn write_binary(&self, mut out: impl Write) -> Result<()> {
        out.write_all(&self.disc.d.to_le_bytes())?;
        out.write_all(&self.x.to_le_bytes())?;
        out.write_all(&(self.class_number() as u32).to_le_bytes())?;
        out.write_all(&self.disc.conductor.to_le_bytes())?;
        out.write_all(&self.disc.units.to_le_bytes())?;
        for col in &self.counts {
            let mut buf = Vec::with_capacity(col.len() * 4);
            for v in &col[1..] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            out.write_all(&buf)?;
        }
        Ok(())
    }

    /// Reads the binary layout back. `r_g` is rebuilt as `w·a(σ,n)`, so it
    /// is zero outside the domain.
    pub fn read_binary(mut input: impl Read) -> Result<Self> {
        let mut b8 = [0u8; 8];
        let mut b4 = [0u8; 4];
        input.read_exact(&mut b8)?;
        let d = i64::from_le_bytes(b8);
        input.read_exact(&mut b8)?;
        let x = u64::from_le_bytes(b8);
        input.read_exact(&mut b4)?;
        let h = u32::from_le_bytes(b4) as usize;
        input.read_exact(&mut b4)?;
        let f = u32::from_le_bytes(b4);
        input.read_exact(&mut b4)?;
        let w = u32::from_le_bytes(b4);
        let disc = QuadDiscriminant::new(d)?;
        let forms = enumerate_reduced(d)?;
        if forms.len() != h || disc.conductor != f || disc.units != w {
            return Err(Error::Parse(format!("inconsistent table header for D = {d}")));
        }
        let cells = h as u128 * (x as u128 + 1);
        if cells > CELL_BUDGET {
            return Err(Error::MemoryBudget {
                cells,
                budget: CELL_BUDGET,
            });
        }
        let mut counts = Vec::with_capacity(h);
        let mut buf = vec![0u8; x as usize * 4];
        for _ in 0..h {
            input.read_exact(&mut buf)?;
            let mut col = Vec::with_capacity(x as usize + 1);
            col.push(0);
            col.extend(buf.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())));
            counts.push(col);
        }
        let reps = counts.iter().map(|c| c.iter().map(|&v| v * w).collect()).collect();
        Ok(Self {
            disc,
            x,
            forms,
            counts,
            reps,
        })
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(file)
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        Self::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// CSV with columns `n, in_domain, (a,b,c)...`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n".to_string(), "in_domain".to_string()];
        header.extend(self.forms.iter().map(ToString::to_string));
        w.write_record(&header)?;
        for n in 1..=self.x as usize {
            let mut row = vec![n.to_string(), (self.disc.in_domain(n as u64) as u8).to_string()];
            row.extend(self.counts.iter().map(|c| c[n].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `Σ_k (-1)^k q^{k(3k-1)/2}` over generalized pentagonal exponents `≤ x`.
fn pentagonal_terms(x: u64) -> Vec<(u64, i64)> {
    let mut out = vec![(0, 1)];
    for k in 1i64.. {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let p1 = (k * (3 * k - 1) / 2) as u64;
        let p2 = (k * (3 * k + 1) / 2) as u64;
        if p1 > x {
            break;
        }
        out.push((p1, sign));
        if p2 <= x {
            out.push((p2, sign));
        }
    }
    out
}

/// Coefficients `c_0..=c_x` of `q^{Σ m·e/24} Π_{(m,e)} Π_n (1 − q^{mn})^e`.
pub fn eta_product_coeffs(levels: &[(u32, u32)], x: u64) -> Result<Vec<i64>> {
    let weight: i64 = levels.iter().map(|&(m, e)| m as i64 * e as i64).sum();
    if weight % 24 != 0 {
        return Err(Error::NonIntegralWeightOffset { numerator: weight });
    }
    let shift = (weight / 24) as u64;
    let mut out = vec![0i64; x as usize + 1];
    if shift > x {
        return Ok(out);
    }
    let len = (x - shift) as usize + 1;
    let mut series = vec![0i64; len];
    series[0] = 1;
    for &(m, e) in levels {
        if m == 0 || e == 0 {
            return Err(Error::Parse("eta levels and exponents must be positive".into()));
        }
        let terms: Vec<(usize, i64)> = pentagonal_terms((len as u64 - 1) / m as u64)
            .into_iter()
            .map(|(p, s)| (p as usize * m as usize, s))
            .collect();
        for _ in 0..e {
            let mut next = vec![0i64; len];
            for (i, &c) in series.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &(p, s) in &terms {
                    if i + p >= len {
                        break;
                    }
                    next[i + p] = next[i + p].checked_add(s * c).ok_or(Error::Overflow("eta product"))?;
                }
            }
            series = next;
        }
    }
    out[shift as usize..].copy_from_slice(&series);
    Ok(out)
}
