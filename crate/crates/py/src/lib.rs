//! Python bindings: group frames and their exponents, quadratic class
//! groups with their counting tables, and the moment estimators.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use classmoments::chartheory::{self, ExponentValue};
use classmoments::cyclo::parse_rational;
use classmoments::fixtures::{resolve, BUILTIN_NAMES};
use classmoments::moments::{self, checkpoint_grid, default_eps_grid, Filter, MomentSeries};
use classmoments::permgroup::GaloisFrame;
use classmoments::quadfield::{self, FormClassGroup};
use classmoments::sampler;

create_exception!(classmoments, ClassMomentsError, PyValueError);

fn err(e: classmoments::Error) -> PyErr {
    ClassMomentsError::new_err(e.to_string())
}

fn beta(text: &str) -> PyResult<BigRational> {
    parse_rational(text).map_err(err)
}

/// `(value, exact)` where `exact` is the rational as text when known.
fn exponent(v: ExponentValue) -> (f64, Option<String>) {
    (v.to_f64(), v.exact().map(ToString::to_string))
}

fn from_json<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| ClassMomentsError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A finite group with the subgroups `H ⊇ Ksub`, from a built-in name,
/// `quad(D)`, or a JSON file.
#[pyclass(name = "Frame", frozen)]
struct PyFrame {
    name: String,
    frame: GaloisFrame,
}

#[pymethods]
impl PyFrame {
    #[new]
    fn new(fixture: &str) -> PyResult<Self> {
        let f = resolve(fixture).map_err(err)?;
        let frame = f.frame().map_err(err)?;
        Ok(Self { name: f.name, frame })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.name
    }

    #[getter]
    fn group_order(&self) -> usize {
        self.frame.group().order()
    }

    #[getter]
    fn class_sizes(&self) -> Vec<usize> {
        self.frame.classes().sizes()
    }

    #[getter]
    fn index(&self) -> usize {
        self.frame.index()
    }

    /// Invariant factors of `N = H/Ksub`.
    #[getter]
    fn structure(&self) -> Vec<u32> {
        self.frame.quotient().structure.factors().to_vec()
    }

    /// Whether `H` and `Ksub` are normal, so `Q = G/H` acts on `N` and cuspidal data exists.
    #[getter]
    fn has_q_action(&self) -> bool {
        self.frame.q_data().is_some()
    }

    fn rho_max(&self, beta_text: &str) -> PyResult<(f64, Option<String>)> {
        chartheory::rho_max(&self.frame, &beta(beta_text)?)
            .map(exponent)
            .map_err(err)
    }

    fn rho_char(&self, chi: usize, beta_text: &str) -> PyResult<(f64, Option<String>)> {
        self.check_char(chi)?;
        chartheory::rho_char(&self.frame, chi, &beta(beta_text)?)
            .map(exponent)
            .map_err(err)
    }

    /// `None` when the cuspidal projection at `sigma` vanishes.
    fn rho_cusp(&self, sigma: usize, beta_text: &str) -> PyResult<Option<(f64, Option<String>)>> {
        self.check_char(sigma)?;
        let v = chartheory::rho_cusp(&self.frame, sigma, &beta(beta_text)?).map_err(err)?;
        Ok(v.map(exponent))
    }

    fn rho_joint(&self, chars: Vec<usize>) -> PyResult<String> {
        for &c in &chars {
            self.check_char(c)?;
        }
        chartheory::rho_joint(&self.frame, &chars)
            .map(|v| v.to_string())
            .map_err(err)
    }

    fn extremal(&self) -> Vec<usize> {
        chartheory::extremal_set(&self.frame)
    }

    /// `χ̃^ind` on each conjugacy class, as complex numbers.
    fn induced(&self, chi: usize) -> PyResult<Vec<Complex64>> {
        self.check_char(chi)?;
        Ok(sampler::char_weights(&self.frame, chi))
    }

    fn cusp_report<'py>(&self, py: Python<'py>, betas: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
        let betas = betas.iter().map(|b| beta(b)).collect::<PyResult<Vec<_>>>()?;
        let report = chartheory::cuspidal_report(&self.frame, &betas).map_err(err)?;
        from_json(py, &report)
    }

    fn __repr__(&self) -> String {
        format!(
            "Frame({:?}, order={}, index={}, structure={:?})",
            self.name,
            self.group_order(),
            self.index(),
            self.structure()
        )
    }
}

impl PyFrame {
    fn check_char(&self, chi: usize) -> PyResult<()> {
        let n = self.frame.quotient().order();
        if chi >= n {
            return Err(ClassMomentsError::new_err(format!(
                "index {chi} outside N of order {n}"
            )));
        }
        Ok(())
    }
}

/// Form class group of an imaginary quadratic discriminant.
#[pyclass(name = "ClassGroup", frozen)]
struct PyClassGroup {
    group: FormClassGroup,
}

#[pymethods]
impl PyClassGroup {
    #[new]
    fn new(disc: i64) -> PyResult<Self> {
        FormClassGroup::new(disc).map(|group| Self { group }).map_err(err)
    }

    #[getter]
    fn disc(&self) -> i64 {
        self.group.disc.d
    }

    #[getter]
    fn class_number(&self) -> usize {
        self.group.class_number()
    }

    #[getter]
    fn units(&self) -> u32 {
        self.group.disc.units
    }

    #[getter]
    fn conductor(&self) -> u32 {
        self.group.disc.conductor
    }

    #[getter]
    fn structure(&self) -> Vec<u32> {
        self.group.structure.factors().to_vec()
    }

    /// Reduced forms `(a, b, c)`, in the order used by every per-class list.
    #[getter]
    fn forms(&self) -> Vec<(i64, i64, i64)> {
        self.group.forms.iter().map(|f| (f.a, f.b, f.c)).collect()
    }

    fn element_order(&self, sigma: usize) -> PyResult<u32> {
        self.check_class(sigma)?;
        Ok(self.group.element_order(sigma))
    }

    /// `a(σ,n)` for `n = 0..=xmax`, one list per form.
    fn counts(&self, py: Python<'_>, xmax: u64) -> PyResult<Vec<Vec<u32>>> {
        let table = py
            .detach(|| quadfield::ideal_class_counts(&self.group, xmax))
            .map_err(err)?;
        Ok(table.counts)
    }

    /// `h · a_cusp(σ,n)` for `n = 0..=xmax`.
    fn cusp_numerators(&self, py: Python<'_>, sigma: usize, xmax: u64) -> PyResult<Vec<i64>> {
        self.check_class(sigma)?;
        let table = py
            .detach(|| quadfield::ideal_class_counts(&self.group, xmax))
            .map_err(err)?;
        Ok(table.cusp_numerators(&self.group, sigma))
    }

    fn __repr__(&self) -> String {
        format!(
            "ClassGroup({}, h={}, structure={:?})",
            self.disc(),
            self.class_number(),
            self.structure()
        )
    }
}

impl PyClassGroup {
    fn check_class(&self, sigma: usize) -> PyResult<()> {
        let h = self.group.class_number();
        if sigma >= h {
            return Err(ClassMomentsError::new_err(format!(
                "class {sigma} outside a group of order {h}"
            )));
        }
        Ok(())
    }
}

/// Built-in fixture names; `quad(D)` is accepted as well.
#[pyfunction]
fn fixtures() -> Vec<&'static str> {
    BUILTIN_NAMES.to_vec()
}

/// `q`-expansion coefficients `c_0..=c_xmax` of `Π η(m z)^e`.
#[pyfunction]
fn eta_coefficients(levels: Vec<(u32, u32)>, xmax: u64) -> PyResult<Vec<i64>> {
    quadfield::eta_product_coeffs(&levels, xmax).map_err(err)
}

/// `2^14, 2^15, …` below `xmax`, then `xmax`.
#[pyfunction]
fn checkpoints(xmax: u64) -> Vec<u64> {
    checkpoint_grid(xmax)
}

/// Log-power fit of `S(x) ≍ x (log x)^{ρ-1}`; returns `(ρ̂, stderr)`.
#[pyfunction]
fn log_exponent(points: Vec<(u64, f64)>) -> PyResult<(f64, f64)> {
    let series = MomentSeries::from_values(points, Filter::All, "python", "python");
    moments::fit_log_exponent(&series)
        .map(|e| (e.rho_hat, e.stderr))
        .map_err(err)
}

/// Pole-order fit of `Σ b_n n^{-1-ε}`; `b[0]` is ignored.
#[pyfunction]
#[pyo3(signature = (b, eps = None))]
fn dirichlet_exponent(py: Python<'_>, b: Vec<f64>, eps: Option<Vec<f64>>) -> PyResult<(f64, f64)> {
    let eps = eps.unwrap_or_else(|| default_eps_grid(b.len().saturating_sub(1) as u64));
    py.detach(|| moments::dirichlet_exponent(&b, &eps))
        .map(|e| (e.rho_hat, e.stderr))
        .map_err(err)
}

/// Chebotarev-sampled squarefree moments on a frame. Returns the trivial and
/// cuspidal checkpoint series with their log-power fits.
#[pyfunction]
#[pyo3(signature = (fixture, xmax, seed = 1, beta_text = "1", sigma = 0))]
fn synthetic<'py>(
    py: Python<'py>,
    fixture: &str,
    xmax: u64,
    seed: u64,
    beta_text: &str,
    sigma: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let frame = resolve(fixture).and_then(|f| f.frame()).map_err(err)?;
    if sigma >= frame.quotient().order() {
        return Err(ClassMomentsError::new_err(format!("σ = {sigma} outside N")));
    }
    let two_beta = 2.0 * beta(beta_text)?.to_f64().unwrap_or(f64::NAN);
    let run = py
        .detach(|| {
            let assignment = sampler::assign(&frame, xmax, seed)?;
            sampler::synthetic_moments(&frame, &assignment, sigma, two_beta, &checkpoint_grid(xmax))
        })
        .map_err(err)?;
    let fit = |s: &MomentSeries| moments::fit_log_exponent(s).ok().map(|e| e.rho_hat);
    let out = serde_json::json!({
        "trivial": { "series": run.trivial.checkpoints, "rho_hat": fit(&run.trivial) },
        "cusp": run.cusp.as_ref().map(|c| serde_json::json!({ "series": c.checkpoints, "rho_hat": fit(c) })),
        "representatives": run.representatives,
    });
    from_json(py, &out)
}

#[pymodule(name = "classmoments")]
fn classmoments_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ClassMomentsError", m.py().get_type::<ClassMomentsError>())?;
    m.add_class::<PyFrame>()?;
    m.add_class::<PyClassGroup>()?;
    m.add_function(wrap_pyfunction!(fixtures, m)?)?;
    m.add_function(wrap_pyfunction!(eta_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(checkpoints, m)?)?;
    m.add_function(wrap_pyfunction!(log_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic, m)?)?;
    Ok(())
}
