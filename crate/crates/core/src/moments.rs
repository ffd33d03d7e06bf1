//! Partial sums `Σ_{n≤x} |a(n)|^{2β}` (or `a(n)^k`) at checkpoints, and two
//! estimators of the log-power exponent `ρ` in `x (log x)^{ρ-1}`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Filter {
    All,
    Squarefree,
    /// `gcd(n, f) = 1`.
    CoprimeF(u64),
}

impl Filter {
    pub fn label(&self) -> &'static str {
        match self {
            Self::All => "all",
            Self::Squarefree => "squarefree",
            Self::CoprimeF(_) => "coprime-f",
        }
    }

    /// Membership mask for `0..=x` (entry 0 is always false).
    pub fn mask(&self, x: u64) -> Vec<bool> {
        let n = x as usize;
        let mut mask = vec![true; n + 1];
        mask[0] = false;
        match *self {
            Self::All => {}
            Self::Squarefree => {
                let mut k = 2usize;
                while k * k <= n {
                    let mut m = k * k;
                    while m <= n {
                        mask[m] = false;
                        m += k * k;
                    }
                    k += 1;
                }
            }
            Self::CoprimeF(f) => {
                let mut g = f;
                let mut p = 2;
                while g > 1 {
                    if g % p == 0 {
                        while g % p == 0 {
                            g /= p;
                        }
                        let mut m = p as usize;
                        while m <= n {
                            mask[m] = false;
                            m += p as usize;
                        }
                    }
                    p += 1;
                }
            }
        }
        mask
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `2^14, 2^15, …` below `xmax`, then `xmax` itself.
pub fn checkpoint_grid(xmax: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (14..64).map(|k| 1u64 << k).take_while(|&x| x < xmax).collect();
    grid.push(xmax);
    grid
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentSeries {
    pub checkpoints: Vec<(u64, f64)>,
    /// Exact numerators at the checkpoints, divided by `denominator` to give `S`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<i128>>,
    pub denominator: i128,
    pub domain: Filter,
    pub power: String,
    pub source: String,
}

impl MomentSeries {
    pub fn from_values(checkpoints: Vec<(u64, f64)>, domain: Filter, power: &str, source: &str) -> Self {
        Self {
            checkpoints,
            exact: None,
            denominator: 1,
            domain,
            power: power.into(),
            source: source.into(),
        }
    }

    pub fn last(&self) -> (u64, f64) {
        *self.checkpoints.last().expect("series has checkpoints")
    }

    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "S", "domain", "power", "source"])?;
        for (i, &(x, s)) in self.checkpoints.iter().enumerate() {
            let s = match &self.exact {
                Some(e) if self.denominator == 1 => e[i].to_string(),
                _ => format!("{s:.17e}"),
            };
            w.write_record([
                x.to_string(),
                s,
                self.domain.label().into(),
                self.power.clone(),
                self.source.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_grid(len: usize, grid: &[u64]) -> Result<()> {
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid.first() == Some(&0) {
        return Err(Error::InsufficientSpan(
            "checkpoints must be positive and increasing".into(),
        ));
    }
    if let Some(&max) = grid.last() {
        if max as usize >= len {
            return Err(Error::DomainExceeded {
                available: len.saturating_sub(1) as u64,
                requested: max,
            });
        }
    }
    Ok(())
}

const CHUNK: usize = 1 << 16;

/// Per-chunk segment totals merged in chunk order, then prefix-summed at the grid.
fn segmented<T: Send + Copy + Default>(
    grid: &[u64],
    term: impl Fn(usize) -> T + Sync,
    add: impl Fn(&mut T, T) + Sync,
) -> Vec<T> {
    let top = *grid.last().unwrap_or(&0) as usize;
    let chunks: Vec<Vec<T>> = (0..top.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = 1 + c * CHUNK;
            let hi = (lo + CHUNK - 1).min(top);
            let mut seg = vec![T::default(); grid.len()];
            let mut k = grid.partition_point(|&g| (g as usize) < lo);
            for n in lo..=hi {
                while (grid[k] as usize) < n {
                    k += 1;
                }
                add(&mut seg[k], term(n));
            }
            seg
        })
        .collect();
    let mut totals = vec![T::default(); grid.len()];
    for seg in &chunks {
        for (t, &s) in totals.iter_mut().zip(seg) {
            add(t, s);
        }
    }
    let mut acc = T::default();
    totals
        .into_iter()
        .map(|t| {
            add(&mut acc, t);
            acc
        })
        .collect()
}

/// Exact sums of `a(n)^k` (`absolute = false`) or `|a(n)|^k` over integer
/// coefficients, reported as `S = numerator / denominator`.
pub fn partial_sums_int(
    coeffs: &[i64],
    k: u32,
    absolute: bool,
    denominator: i128,
    grid: &[u64],
    filter: Filter,
    source: &str,
) -> Result<MomentSeries> {
    check_grid(coeffs.len(), grid)?;
    let mask = filter.mask(*grid.last().unwrap_or(&0));
    let overflow = std::sync::atomic::AtomicBool::new(false);
    let exact = segmented(
        grid,
        |n| {
            if !mask[n] {
                return 0i128;
            }
            let base = if absolute { coeffs[n].abs() } else { coeffs[n] } as i128;
            base.checked_pow(k).unwrap_or_else(|| {
                overflow.store(true, std::sync::atomic::Ordering::Relaxed);
                0
            })
        },
        |acc, v| {
            *acc = acc.checked_add(v).unwrap_or_else(|| {
                overflow.store(true, std::sync::atomic::Ordering::Relaxed);
                0
            })
        },
    );
    if overflow.into_inner() {
        return Err(Error::Overflow("integer moment accumulation"));
    }
    let checkpoints = grid
        .iter()
        .zip(&exact)
        .map(|(&x, &s)| (x, s as f64 / denominator as f64))
        .collect();
    let power = if absolute { format!("|a|^{k}") } else { format!("a^{k}") };
    Ok(MomentSeries {
        checkpoints,
        exact: Some(exact),
        denominator,
        domain: filter,
        power,
        source: source.into(),
    })
}

/// Compensated sums of `|a(n)|^{2β}` over floating-point coefficients.
pub fn partial_sums_f64(
    coeffs: &[f64],
    two_beta: f64,
    grid: &[u64],
    filter: Filter,
    source: &str,
) -> Result<MomentSeries> {
    check_grid(coeffs.len(), grid)?;
    let mask = filter.mask(*grid.last().unwrap_or(&0));
    let sums = segmented(
        grid,
        |n| {
            let mut c = CompensatedSum::default();
            if mask[n] && coeffs[n] != 0.0 {
                c.add(coeffs[n].abs().powf(two_beta));
            }
            c
        },
        |acc, v| acc.merge(&v),
    );
    let checkpoints = grid.iter().zip(&sums).map(|(&x, s)| (x, s.value())).collect();
    Ok(MomentSeries::from_values(
        checkpoints,
        filter,
        &format!("|a|^{two_beta}"),
        source,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LogFit,
    DirichletFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentEstimate {
    pub rho_hat: f64,
    pub stderr: f64,
    pub method: Method,
    pub window: (f64, f64),
}

/// Least squares `y ≈ X c`, returning coefficients and their standard errors.
fn least_squares(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(y, 1e-12)
        .map_err(|e| Error::InsufficientSpan(e.to_string()))?;
    let resid = y - design * &coef;
    let dof = design.nrows().saturating_sub(design.ncols()).max(1) as f64;
    let sigma2 = resid.norm_squared() / dof;
    let gram = design.transpose() * design;
    let se = match gram.try_inverse() {
        Some(inv) => DVector::from_iterator(
            coef.len(),
            (0..coef.len()).map(|i| (sigma2 * inv[(i, i)]).max(0.0).sqrt()),
        ),
        None => DVector::from_element(coef.len(), f64::NAN),
    };
    Ok((coef, se))
}

/// Slope of `log(S/x)` against `log log x`, plus one.
///
/// Needs at least six positive checkpoints with `x_max ≥ 4 x_min`.
pub fn fit_log_exponent(series: &MomentSeries) -> Result<ExponentEstimate> {
    let points: Vec<(f64, f64)> = series
        .checkpoints
        .iter()
        .filter(|&&(x, s)| x > 1 && s > 0.0)
        .map(|&(x, s)| (x as f64, s))
        .collect();
    if points.len() < 6 {
        return Err(Error::InsufficientSpan(format!(
            "{} usable checkpoints, need 6",
            points.len()
        )));
    }
    let (lo, hi) = (points[0].0, points[points.len() - 1].0);
    if hi < 4.0 * lo {
        return Err(Error::InsufficientSpan(format!("x spans only [{lo}, {hi}]")));
    }
    let design = DMatrix::from_fn(points.len(), 2, |i, j| if j == 0 { points[i].0.ln().ln() } else { 1.0 });
    let y = DVector::from_iterator(points.len(), points.iter().map(|&(x, s)| (s / x).ln()));
    let (coef, se) = least_squares(&design, &y)?;
    Ok(ExponentEstimate {
        rho_hat: coef[0] + 1.0,
        stderr: se[0],
        method: Method::LogFit,
        window: (lo, hi),
    })
}

/// Sixteen geometric points in `[3/log X, 1]`.
pub fn default_eps_grid(x: u64) -> Vec<f64> {
    let lo = 3.0 / (x as f64).ln();
    let steps = 16;
    (0..steps)
        .map(|i| lo * (1.0 / lo).powf(i as f64 / (steps - 1) as f64))
        .collect()
}

/// Estimates `ρ` from `F(1+ε) = Σ b_n n^{-1-ε} ≍ ε^{-ρ}` for `b_n ≥ 0`.
///
/// The truncation at `X` is compensated by a tail with density
/// `A (log t)^{ρ-1}`, `A` matched on `(X/2, X]`; the tail integral is
/// `A ε^{-ρ} Γ(ρ) Q(ρ, ε log X)`. `log F` is then fitted by
/// `ρ log(1/ε) + c₀ + c₁ε + c₂ε² + c₃ε³`, iterating on `ρ`.
pub fn dirichlet_exponent(b: &[f64], eps_grid: &[f64]) -> Result<ExponentEstimate> {
    let x = b.len().saturating_sub(1);
    if x < 16 {
        return Err(Error::InsufficientSpan(format!("only {x} coefficients")));
    }
    let log_x = (x as f64).ln();
    let floor = 3.0 / log_x;
    let min_eps = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eps < floor * (1.0 - 1e-12) {
        return Err(Error::EpsilonTooSmall { eps: min_eps, floor });
    }
    if eps_grid.len() < 6 {
        return Err(Error::InsufficientSpan(format!("{} ε values, need 6", eps_grid.len())));
    }
    if b[1..].iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroSeries);
    }
    let heads: Vec<f64> = eps_grid
        .par_iter()
        .map(|&e| {
            let mut acc = CompensatedSum::default();
            for (n, &v) in b.iter().enumerate().skip(1) {
                if v != 0.0 {
                    acc.add(v * (-(1.0 + e) * (n as f64).ln()).exp());
                }
            }
            acc.value()
        })
        .collect();
    let half = x / 2;
    let segment: f64 = b[half + 1..].iter().sum();
    let logs: Vec<f64> = (half + 1..=x).map(|t| (t as f64).ln()).collect();

    let m = eps_grid.len();
    let design = DMatrix::from_fn(m, 5, |i, j| match j {
        0 => (1.0 / eps_grid[i]).ln(),
        _ => eps_grid[i].powi(j as i32 - 1),
    });
    let mut rho = 1.0f64;
    let mut se = f64::NAN;
    for _ in 0..20 {
        let density: f64 = logs.iter().map(|l| l.powf(rho - 1.0)).sum();
        let a = segment / density;
        let y = DVector::from_iterator(
            m,
            eps_grid.iter().zip(&heads).map(|(&e, &h)| {
                let tail = a * e.powf(-rho) * gamma(rho) * gamma_ur(rho, e * log_x);
                (h + tail).ln()
            }),
        );
        let (coef, err) = least_squares(&design, &y)?;
        let next = coef[0].max(0.05);
        se = err[0];
        let done = (next - rho).abs() < 1e-10;
        rho = next;
        if done {
            break;
        }
    }
    Ok(ExponentEstimate {
        rho_hat: rho,
        stderr: se,
        method: Method::DirichletFit,
        window: (min_eps, eps_grid.iter().copied().fold(0.0, f64::max)),
    })
}
