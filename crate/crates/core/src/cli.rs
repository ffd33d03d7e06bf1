//! Command-line front end. Exit codes: 0 success, 2 validation failure,
//! 3 cross-check failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chartheory::{cuspidal_report, dual_group, extremal_set, rho_char, rho_cusp, rho_max, ExponentValue};
use crate::cyclo::parse_rational;
use crate::error::{Error, Result};
use crate::fixtures::{builtin, resolve, Fixture, BUILTIN_NAMES};
use crate::moments::{
    checkpoint_grid, default_eps_grid, dirichlet_exponent, fit_log_exponent, partial_sums_f64, partial_sums_int,
    Filter, MomentSeries,
};
use crate::quadfield::{eta_product_coeffs, ideal_class_counts, CoefficientTable, FormClassGroup};
use crate::sampler::{assign, prime_class_counts, synthetic_moments};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CROSS_CHECK: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "classmoments",
    version,
    about = "Moment exponents of ideal-class counting functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// ρ(χ,β), ρ(β) and the extremal set for a fixture.
    Exponent(ExponentArgs),
    /// Cuspidal characters, Q-orbits and per-σ vanishing / ρ_cusp / (**) flags.
    CuspClassify(ExponentArgs),
    /// Reduced forms, class group and the ideal-class counting table of D.
    Quad(QuadArgs),
    /// Partial sums and exponent estimates for quadratic coefficient tables.
    Moments(MomentArgs),
    /// Compares a(χ,n) for D = -23 with the q-expansion of η(z)η(23z).
    EtaVerify(EtaArgs),
    /// Chebotarev-sampled squarefree streams on a group fixture.
    Synthetic(SyntheticArgs),
    /// Built-in fixtures.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum FixturesAction {
    List,
    /// Prints the JSON frame spec of a fixture.
    Show {
        name: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum FilterArg {
    All,
    Squarefree,
    CoprimeF,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum SourceArg {
    /// a(σ,n) for the class with form index `--index`.
    Class,
    /// a(χ,n) for the character with index `--index`.
    Char,
    /// The cuspidal projection a_cusp(σ,n).
    Cusp,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Output file; stdout when absent. A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ExponentArgs {
    /// Built-in name, quad(D), or a JSON frame file (0-indexed points;
    /// subtract one from 1-indexed GAP/MAGMA cycles).
    #[arg(long)]
    pub fixture: String,
    /// Exact rational β, repeatable (e.g. 1, 3/2, 0.75).
    #[arg(long = "beta", default_values = ["1/2", "1", "3/2", "2"])]
    pub betas: Vec<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct QuadArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
    #[arg(long, default_value_t = 10_000)]
    pub xmax: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct MomentArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
    #[arg(long, default_value_t = 1_000_000)]
    pub xmax: u64,
    #[arg(long, value_enum, default_value = "class")]
    pub source: SourceArg,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Integer power k of a(n).
    #[arg(long, conflicts_with = "beta")]
    pub power: Option<u32>,
    /// Moment |a(n)|^{2β}.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long, value_enum, default_value = "all")]
    pub filter: FilterArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EtaArgs {
    #[arg(long, default_value_t = 5000)]
    pub xmax: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SyntheticArgs {
    #[arg(long)]
    pub fixture: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub xmax: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "1")]
    pub beta: String,
    /// Element of N at which the cuspidal projection is taken.
    #[arg(long, default_value_t = 0)]
    pub sigma: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub args: Vec<String>,
}

impl Manifest {
    fn new(command: &str, fixture: Option<&Fixture>, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            fixture: fixture.map(|f| f.name.clone()),
            fixture_hash: fixture.map(Fixture::hash),
            seed,
            args: std::env::args().skip(1).collect(),
        }
    }
}

/// A cross-check failure found while producing otherwise valid output.
#[derive(Debug)]
struct Failed(String);

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::CrossCheckMismatch(_) | Error::NotInteger(_) | Error::NonIntegral(_) => EXIT_CROSS_CHECK,
        _ => EXIT_VALIDATION,
    }
}

fn emit(common: &Common, manifest: &Manifest, body: &[u8]) -> Result<()> {
    let manifest_json = serde_json::to_string(manifest)?;
    match &common.out {
        Some(path) => {
            std::fs::write(path, body)?;
            std::fs::write(manifest_path(path), manifest_json + "\n")?;
        }
        None => {
            std::io::stdout().write_all(body)?;
            eprintln!("{manifest_json}");
        }
    }
    Ok(())
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn json_bytes(v: &impl Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

fn parse_betas(raw: &[String]) -> Result<Vec<BigRational>> {
    raw.iter().map(|b| parse_rational(b)).collect()
}

pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Exponent(a) => cmd_exponent(a),
        Command::CuspClassify(a) => cmd_cusp_classify(a),
        Command::Quad(a) => cmd_quad(a),
        Command::Moments(a) => cmd_moments(a),
        Command::EtaVerify(a) => cmd_eta_verify(a),
        Command::Synthetic(a) => cmd_synthetic(a),
        Command::Fixtures { action } => cmd_fixtures(action),
    };
    match result {
        Ok(None) => EXIT_OK,
        Ok(Some(Failed(msg))) => {
            eprintln!("cross-check failed: {msg}");
            EXIT_CROSS_CHECK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

type Outcome = Result<Option<Failed>>;

fn cmd_fixtures(action: &FixturesAction) -> Outcome {
    match action {
        FixturesAction::List => {
            for name in BUILTIN_NAMES {
                let f = builtin(name)?;
                println!("{name}\t{}", f.description);
            }
            println!("quad(D)\tclass group of an imaginary quadratic discriminant D extended by conjugation");
        }
        FixturesAction::Show { name } => println!("{}", builtin(name)?.spec.to_json()),
    }
    Ok(None)
}

fn cmd_exponent(args: &ExponentArgs) -> Outcome {
    let fixture = resolve(&args.fixture)?;
    let frame = fixture.frame()?;
    let betas = parse_betas(&args.betas)?;
    let extremal = extremal_set(&frame);
    let mut failures = Vec::new();

    let half = rho_max(&frame, &BigRational::new(1.into(), 2.into()))?;
    if half != ExponentValue::Exact(BigRational::one()) {
        failures.push(format!("ρ(1/2) = {half}, expected 1"));
    }
    let mut rows = Vec::new();
    let mut max_rows = Vec::new();
    for beta in &betas {
        let max = rho_max(&frame, beta)?;
        for c in dual_group(&frame) {
            let rho = rho_char(&frame, c.index, beta)?;
            let member = extremal.contains(&c.index);
            let cmp = rho.compare(&max);
            if cmp.is_gt() || (cmp.is_eq() != member) {
                failures.push(format!("χ{}: ρ(χ,{beta}) = {rho} vs ρ(β) = {max}", c.index));
            }
            rows.push((beta.to_string(), c.index, c.exps, c.order, rho, member));
        }
        max_rows.push((beta.to_string(), max));
    }
    let cusp = match frame.q_data() {
        Some(_) => Some(cuspidal_report(&frame, &betas)?),
        None => None,
    };

    let body = match args.common.format {
        Format::Json => json_bytes(&json!({
            "fixture": fixture.name,
            "group_order": frame.group().order(),
            "classes": frame.classes().sizes(),
            "index": frame.index(),
            "structure": frame.quotient().structure.factors(),
            "extremal": extremal,
            "rho_max": max_rows.iter().map(|(b, v)| json!({"beta": b, "rho": v})).collect::<Vec<_>>(),
            "characters": rows.iter().map(|(b, i, e, o, r, m)| json!({
                "beta": b, "index": i, "exps": e, "order": o, "rho": r, "extremal": m
            })).collect::<Vec<_>>(),
            "cusp": cusp,
        }))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["beta", "character", "exps", "order", "rho", "extremal"])?;
            for (b, v) in &max_rows {
                w.write_record([b.as_str(), "max", "", "", &v.to_string(), ""])?;
            }
            for (b, i, e, o, r, m) in &rows {
                let exps = e.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
                w.write_record([
                    b.clone(),
                    i.to_string(),
                    exps,
                    o.to_string(),
                    r.to_string(),
                    m.to_string(),
                ])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?
        }
    };
    emit(&args.common, &Manifest::new("exponent", Some(&fixture), None), &body)?;
    Ok((!failures.is_empty()).then(|| Failed(failures.join("; "))))
}

fn cmd_cusp_classify(args: &ExponentArgs) -> Outcome {
    let fixture = resolve(&args.fixture)?;
    let frame = fixture.frame()?;
    let betas = parse_betas(&args.betas)?;
    let report = cuspidal_report(&frame, &betas)?;
    let body = match args.common.format {
        Format::Json => json_bytes(&report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "sigma",
                "coords",
                "beta",
                "vanishes",
                "rho_cusp",
                "extremal",
                "star_star",
            ])?;
            for s in &report.sigmas {
                let coords = s.coords.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
                for (k, b) in report.betas.iter().enumerate() {
                    let ext = s.extremal[k]
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" ");
                    w.write_record([
                        s.sigma.to_string(),
                        coords.clone(),
                        b.clone(),
                        s.vanishes.to_string(),
                        s.rho_cusp[k].as_ref().map(ToString::to_string).unwrap_or_default(),
                        ext,
                        s.star_star[k].to_string(),
                    ])?;
                }
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?
        }
    };
    emit(
        &args.common,
        &Manifest::new("cusp-classify", Some(&fixture), None),
        &body,
    )?;
    Ok(None)
}

fn table_for(disc: i64, xmax: u64) -> Result<(FormClassGroup, CoefficientTable)> {
    let group = FormClassGroup::new(disc)?;
    let table = ideal_class_counts(&group, xmax)?;
    Ok((group, table))
}

fn cmd_quad(args: &QuadArgs) -> Outcome {
    let (group, table) = table_for(args.disc, args.xmax)?;
    let fixture = builtin(&format!("quad({})", args.disc))?;
    let manifest = Manifest::new("quad", Some(&fixture), None);
    let summary = json!({
        "disc": group.disc,
        "class_number": group.class_number(),
        "structure": group.structure.factors(),
        "forms": group.forms.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "xmax": args.xmax,
    });
    match (&args.common.out, args.common.format) {
        (Some(path), Format::Json) => {
            table.save_binary(path)?;
            std::fs::write(manifest_path(path), serde_json::to_string(&manifest)? + "\n")?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        (_, Format::Csv) => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            emit(&args.common, &manifest, &buf)?;
        }
        (None, Format::Json) => emit(&args.common, &manifest, &json_bytes(&summary)?)?,
    }
    Ok(None)
}

/// Integer coefficients when the source allows, with the common denominator.
enum Coefficients {
    Exact(Vec<i64>, i128),
    Float(Vec<f64>),
}

fn quad_coefficients(
    group: &FormClassGroup,
    table: &CoefficientTable,
    source: SourceArg,
    index: usize,
) -> Result<Coefficients> {
    let h = group.class_number();
    if index >= h {
        return Err(Error::Parse(format!("index {index} out of range for class number {h}")));
    }
    Ok(match source {
        SourceArg::Class => Coefficients::Exact(table.counts[index].iter().map(|&v| v as i64).collect(), 1),
        SourceArg::Cusp => Coefficients::Exact(table.cusp_numerators(group, index), h as i128),
        SourceArg::Char => {
            let vals = table.char_coefficients_f64(group, index);
            if vals.iter().all(|v| (v - v.round()).abs() < 1e-6) {
                Coefficients::Exact(vals.iter().map(|v| v.round() as i64).collect(), 1)
            } else {
                Coefficients::Float(vals)
            }
        }
    })
}

fn cmd_moments(args: &MomentArgs) -> Outcome {
    let (group, table) = table_for(args.disc, args.xmax)?;
    let filter = match args.filter {
        FilterArg::All => Filter::All,
        FilterArg::Squarefree => Filter::Squarefree,
        FilterArg::CoprimeF => Filter::CoprimeF(group.disc.conductor as u64),
    };
    let coeffs = quad_coefficients(&group, &table, args.source, args.index)?;
    let grid = checkpoint_grid(args.xmax);
    let source = format!("D={} {:?} {}", args.disc, args.source, args.index).to_lowercase();
    // (power for the series, exponent applied to |a| for the Dirichlet fit)
    let (k, two_beta) = match (&args.power, &args.beta) {
        (Some(k), _) => (Some(*k), *k as f64),
        (None, Some(b)) => {
            let b = parse_rational(b)?;
            let two = &b * BigRational::from_integer(2.into());
            let k = two
                .is_integer()
                .then(|| two.to_integer().to_u32())
                .flatten()
                .filter(|k| k % 2 == 0);
            (k, two.to_f64().unwrap_or(f64::NAN))
        }
        (None, None) => (Some(2), 2.0),
    };
    let absolute = args.power.is_none();
    let series: MomentSeries = match (&coeffs, k) {
        (Coefficients::Exact(c, den), Some(k)) => partial_sums_int(c, k, absolute, den.pow(k), &grid, filter, &source)?,
        (Coefficients::Exact(c, den), None) => {
            let f: Vec<f64> = c.iter().map(|&v| v as f64 / *den as f64).collect();
            partial_sums_f64(&f, two_beta, &grid, filter, &source)?
        }
        (Coefficients::Float(f), _) => partial_sums_f64(f, two_beta, &grid, filter, &source)?,
    };
    let mask = filter.mask(args.xmax);
    let b: Vec<f64> = match &coeffs {
        Coefficients::Exact(c, den) => c
            .iter()
            .map(|&v| (v as f64 / *den as f64).abs().powf(two_beta))
            .collect::<Vec<f64>>(),
        Coefficients::Float(f) => f.iter().map(|v| v.abs().powf(two_beta)).collect::<Vec<f64>>(),
    }
    .into_iter()
    .enumerate()
    .map(|(n, v)| if mask[n] { v } else { 0.0 })
    .collect();
    let log_fit = fit_log_exponent(&series).map_err(|e| e.to_string());
    let dirichlet = dirichlet_exponent(&b, &default_eps_grid(args.xmax)).map_err(|e| e.to_string());
    let manifest = Manifest::new("moments", builtin(&format!("quad({})", args.disc)).ok().as_ref(), None);
    let body = match args.common.format {
        Format::Json => json_bytes(&json!({
            "series": series,
            "log_fit": to_value(&log_fit),
            "dirichlet_fit": to_value(&dirichlet),
        }))?,
        Format::Csv => {
            let mut buf = Vec::new();
            series.write_csv(&mut buf)?;
            buf
        }
    };
    emit(&args.common, &manifest, &body)?;
    Ok(None)
}

fn to_value<T: Serialize>(r: &std::result::Result<T, String>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e }),
    }
}

/// `a(χ,n)` for a nontrivial character of D = -23 against `η(z)η(23z)`, for
/// `n ≤ min(X, 5000)`. Returns the first mismatch.
pub fn eta_mismatch(xmax: u64) -> Result<(Vec<(u64, i64, i64)>, Option<u64>)> {
    let limit = xmax.min(5000);
    let (group, table) = table_for(-23, limit)?;
    let chi = (1..group.class_number())
        .find(|&c| group.structure.element_order(c) > 1)
        .ok_or_else(|| Error::CrossCheckMismatch("no nontrivial character".into()))?;
    let exact = table.char_coefficients(&group, chi, limit)?;
    let eta = eta_product_coeffs(&[(1, 1), (23, 1)], limit)?;
    let mut rows = Vec::with_capacity(limit as usize);
    let mut first_bad = None;
    for n in 1..=limit {
        let v = exact[n as usize]
            .to_rational()
            .filter(|r| r.is_integer())
            .and_then(|r| r.to_integer().to_i64())
            .ok_or_else(|| Error::NonIntegral(format!("a(χ,{n}) = {}", exact[n as usize])))?;
        if v != eta[n as usize] && first_bad.is_none() {
            first_bad = Some(n);
        }
        rows.push((n, v, eta[n as usize]));
    }
    Ok((rows, first_bad))
}

fn cmd_eta_verify(args: &EtaArgs) -> Outcome {
    let (rows, first_bad) = eta_mismatch(args.xmax)?;
    let body = match args.common.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "a_chi", "eta"])?;
            for (n, a, e) in &rows {
                w.write_record([n.to_string(), a.to_string(), e.to_string()])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?
        }
        Format::Json => json_bytes(&json!({
            "checked": rows.len(),
            "first_mismatch": first_bad,
        }))?,
    };
    emit(&args.common, &Manifest::new("eta-verify", None, None), &body)?;
    Ok(first_bad.map(|n| Failed(format!("a(χ,{n}) differs from the eta coefficient"))))
}

fn cmd_synthetic(args: &SyntheticArgs) -> Outcome {
    let fixture = resolve(&args.fixture)?;
    let frame = fixture.frame()?;
    let beta = parse_rational(&args.beta)?;
    if args.sigma >= frame.quotient().order() {
        return Err(Error::Parse(format!("σ = {} outside N", args.sigma)));
    }
    prime_class_counts(&frame)?;
    let assignment = assign(&frame, args.xmax, args.seed)?;
    let two_beta = (&beta * BigRational::from_integer(2.into()))
        .to_f64()
        .unwrap_or(f64::NAN);
    let grid = checkpoint_grid(args.xmax);
    let run = synthetic_moments(&frame, &assignment, args.sigma, two_beta, &grid)?;
    let predicted_trivial = rho_char(&frame, 0, &beta)?;
    let predicted_cusp = match frame.q_data() {
        Some(_) => rho_cusp(&frame, args.sigma, &beta)?,
        None => None,
    };
    let fit = |s: &MomentSeries| to_value(&fit_log_exponent(s).map_err(|e| e.to_string()));
    let body = match args.common.format {
        Format::Json => json_bytes(&json!({
            "fixture": fixture.name,
            "xmax": args.xmax,
            "seed": args.seed,
            "beta": beta.to_string(),
            "trivial": { "series": run.trivial, "fit": fit(&run.trivial), "predicted_rho": predicted_trivial },
            "cusp": run.cusp.as_ref().map(|c| json!({
                "series": c, "fit": fit(c), "predicted_rho": predicted_cusp,
                "representatives": run.representatives,
            })),
        }))?,
        Format::Csv => {
            let mut buf = Vec::new();
            run.trivial.write_csv(&mut buf)?;
            if let Some(c) = &run.cusp {
                let mut more = Vec::new();
                c.write_csv(&mut more)?;
                // drop the repeated header
                let skip = more.iter().position(|&b| b == b'\n').map_or(0, |p| p + 1);
                buf.extend_from_slice(&more[skip..]);
            }
            buf
        }
    };
    emit(
        &args.common,
        &Manifest::new("synthetic", Some(&fixture), Some(args.seed)),
        &body,
    )?;
    Ok(None)
}
