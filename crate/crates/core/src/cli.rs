//! Command-line front end. Every subcommand writes JSON or CSV to `--out` (or stdout);
//! human-readable summaries go to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::anisotropy::DEFAULT_CONVEXITY_TOL;
use crate::catalog::{self, AuditScope, ExtendOptions, AUDIT_RESOLUTION};
use crate::classify::{self, Case, ClassifyOptions};
use crate::fit::{self, FitOptions};
use crate::focal::{self, FocalOptions};
use crate::hypersurface::{self, DEFAULT_CLUSTER_TOL};
use crate::{parallel, wulff, AnisotropyFunction, Error, SubsphereSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// `--strict` threshold on the Cartan residual of `focal`.
pub const FOCAL_CARTAN_TOL: f64 = 1e-10;
pub const DEFAULT_TRANSLATE_T: [f64; 9] = [-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 1.5, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Obj,
}

/// Everything a run needs besides the subcommand. Also the schema of `--config` files.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// path to an anisotropy JSON document, or a family name such as `quadratic-norm:1,1,4`
    pub anisotropy: Option<String>,
    pub dim: Option<usize>,
    /// band half-width of the axial extension to one more dimension
    pub extend: Option<f64>,
    pub extend_scope: Option<AuditScope>,
    pub entry: Option<String>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub cluster_tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub complete: Option<bool>,
    pub strict: Option<bool>,
    pub seed: Option<u64>,
    /// sub-Wulff dimension
    pub k: Option<usize>,
    pub t: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub at: Option<Vec<f64>>,
    /// skip the constant-curvature check along the focal leaf
    pub pointwise: Option<bool>,
    pub emit_anisotropy: Option<PathBuf>,
    pub fit: Option<FitOptions>,
}

#[derive(Debug, Parser)]
#[command(name = "wulfflab", version, about = "Anisotropic Wulff shapes, curvatures, parallel and focal sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration; flags override its fields
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// anisotropy JSON path or family name [default: isotropic]
    #[arg(long, global = true, value_name = "PATH|NAME")]
    anisotropy: Option<String>,
    /// ambient dimension n+1 for named families [default: 3]
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// extend F axially to one more dimension with this band half-width
    #[arg(long, global = true, allow_negative_numbers = true, value_name = "H")]
    extend: Option<f64>,
    /// where the extension is audited
    #[arg(long, global = true, value_enum)]
    extend_scope: Option<AuditScope>,
    /// catalog patch, e.g. `cylinder:k=1,t=0.5`
    #[arg(long, global = true)]
    entry: Option<String>,
    /// grid resolution (meaning depends on the subcommand)
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// main tolerance of the subcommand
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol: Option<f64>,
    /// tolerance for grouping equal curvatures
    #[arg(long, global = true, allow_negative_numbers = true)]
    cluster_tol: Option<f64>,
    /// output file [default: stdout]
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// assert the patch is part of a complete hypersurface
    #[arg(long, global = true)]
    complete: bool,
    /// exit 1 on a negative outcome
    #[arg(long, global = true)]
    strict: bool,
    /// seed for the fit's random restarts [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convexity audit: minimum eigenvalue of A_F = D²F + F·I over a sphere grid.
    Audit,
    /// Wulff shape W_F = φ(S^n), or the sub-Wulff shape W^k_F = φ(S^k), as CSV, OBJ or JSON.
    Wulff {
        /// sample the sub-Wulff shape over the coordinate k-sphere
        #[arg(long)]
        k: Option<usize>,
    },
    /// Anisotropic principal curvatures λ_i (eigenvalues of S_F), H_F and g on a chart grid.
    Curvature,
    /// Anisotropic parallel translation x_t = x + tφ(ν): min singular value of dx_t and
    /// deviation of λ_i(t) from λ_i/(1 − tλ_i).
    Translate {
        /// comma-separated translation parameters
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Option<Vec<f64>>,
    },
    /// Focal map at t = 1/λ: focal point q, leaf, II_ν, Γ_F^k and the Cartan residual.
    Focal {
        /// curvature λ defining the focal set [default: largest |λ| at the seed]
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        /// comma-separated chart parameters of the seed [default: patch center]
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
        /// do not require constant curvatures along the leaf
        #[arg(long)]
        pointwise: bool,
    },
    /// Classification verdict: plane, Wulff shape, product S^k × R^(n−k), or local only.
    Classify,
    /// Fit an axisymmetric F making the patch anisotropic isoparametric (FitResult JSON).
    Fit {
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        target_spread: Option<f64>,
        /// also write the fitted anisotropy JSON here
        #[arg(long, value_name = "PATH")]
        emit_anisotropy: Option<PathBuf>,
    },
    /// List built-in anisotropies and catalog patches with their expected spectra.
    Catalog,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    flag: Option<&'static str>,
}

impl Failure {
    fn input(message: impl Into<String>, flag: &'static str) -> Self {
        Failure { code: EXIT_INPUT, message: message.into(), flag: Some(flag) }
    }

    /// Input error if the library says so, numerical failure otherwise.
    fn from_error(e: Error, flag: Option<&'static str>) -> Self {
        let code = if e.is_input_error() { EXIT_INPUT } else { EXIT_NUMERICAL };
        Failure { code, message: e.to_string(), flag: if code == EXIT_INPUT { flag } else { None } }
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Run with the process arguments, writing to stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("usage error");
            let _ = writeln!(err, "wulfflab: {}", line.trim_start_matches("error: "));
            return EXIT_INPUT;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = match f.flag {
                Some(flag) => writeln!(err, "wulfflab: {} (--{flag})", f.message),
                None => writeln!(err, "wulfflab: {}", f.message),
            };
            f.code
        }
    }
}

fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(v) = std::env::var("WULFFLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure { code: EXIT_INPUT, message: format!("WULFFLAB_THREADS must be a positive integer, got `{v}`"), flag: None })?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load_config(path: &Path) -> std::result::Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display()), "config"))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("invalid config {}: {e}", path.display()), "config"))
}

fn merge(cli: &Cli) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match &cli.common.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let c = &cli.common;
    macro_rules! over {
        ($($field:ident),*) => { $( if c.$field.is_some() { cfg.$field = c.$field.clone(); } )* };
    }
    over!(anisotropy, dim, extend, extend_scope, entry, grid, tol, cluster_tol, out, format, seed);
    if c.complete {
        cfg.complete = Some(true);
    }
    if c.strict {
        cfg.strict = Some(true);
    }
    match &cli.command {
        Command::Wulff { k } if k.is_some() => cfg.k = *k,
        Command::Translate { t } if t.is_some() => cfg.t = t.clone(),
        Command::Focal { lambda, at, pointwise } => {
            if lambda.is_some() {
                cfg.lambda = *lambda;
            }
            if at.is_some() {
                cfg.at = at.clone();
            }
            if *pointwise {
                cfg.pointwise = Some(true);
            }
        }
        Command::Fit { degree, restarts, max_iterations, target_spread, emit_anisotropy } => {
            let mut o = cfg.fit.clone().unwrap_or_default();
            if let Some(v) = degree {
                o.basis_degree = *v;
            }
            if let Some(v) = restarts {
                o.restarts = *v;
            }
            if let Some(v) = max_iterations {
                o.max_iterations = *v;
            }
            if let Some(v) = target_spread {
                o.target_spread = *v;
            }
            if let Some(s) = cfg.seed {
                o.seed = s;
            }
            cfg.fit = Some(o);
            if emit_anisotropy.is_some() {
                cfg.emit_anisotropy = emit_anisotropy.clone();
            }
        }
        _ => {}
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> std::result::Result<(), Failure> {
    for (v, flag) in [(cfg.tol, "tol"), (cfg.cluster_tol, "cluster-tol"), (cfg.extend, "extend")] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(Failure::input(format!("must be positive, got {v}"), flag));
            }
        }
    }
    if cfg.grid == Some(0) {
        return Err(Failure::input("must be positive", "grid"));
    }
    if let Some(d) = cfg.dim {
        if d < 2 {
            return Err(Failure::input(format!("ambient dimension must be at least 2, got {d}"), "dim"));
        }
    }
    Ok(())
}

fn load_anisotropy(cfg: &RunConfig, audited: bool) -> std::result::Result<AnisotropyFunction, Failure> {
    let dim = cfg.dim.unwrap_or(3);
    let spec = cfg.anisotropy.as_deref().unwrap_or("isotropic");
    let path = Path::new(spec);
    let mut f = if path.is_file() || spec.ends_with(".json") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {spec}: {e}"), "anisotropy"))?;
        let f = AnisotropyFunction::from_json(&text).map_err(|e| Failure::input(e.to_string(), "anisotropy"))?;
        if audited {
            f.require_convex(AUDIT_RESOLUTION).map_err(|e| Failure::input(e.to_string(), "anisotropy"))?;
        }
        f
    } else {
        let r = if audited { catalog::anisotropy_by_name(spec, dim) } else { catalog::parse_anisotropy(spec, dim) };
        r.map_err(|e| Failure::input(e.to_string(), "anisotropy"))?
    };
    if let Some(h) = cfg.extend {
        let options = ExtendOptions { scope: cfg.extend_scope.unwrap_or(AuditScope::Global), ..ExtendOptions::default() };
        f = catalog::extend_axis_with(&f, h, &options).map_err(|e| Failure::input(e.to_string(), "extend"))?.function;
    }
    Ok(f)
}

fn load_entry(cfg: &RunConfig, f: &AnisotropyFunction, default: Option<&str>) -> std::result::Result<catalog::CatalogEntry, Failure> {
    let name = cfg
        .entry
        .as_deref()
        .or(default)
        .ok_or_else(|| Failure::input("this subcommand needs a catalog patch", "entry"))?;
    catalog::entry(f, name).map_err(|e| Failure::input(e.to_string(), "entry"))
}

fn format_of(cfg: &RunConfig, default: Format, allowed: &[Format]) -> std::result::Result<Format, Failure> {
    let fmt = cfg.format.unwrap_or(default);
    if !allowed.contains(&fmt) {
        return Err(Failure::input(format!("format {fmt:?} is not available for this subcommand").to_lowercase(), "format"));
    }
    Ok(fmt)
}

fn emit(cfg: &RunConfig, out: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()), "out")),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure { code: EXIT_NUMERICAL, message: format!("cannot write output: {e}"), flag: None }),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

fn strict_code(cfg: &RunConfig, negative: bool) -> i32 {
    if negative && cfg.strict.unwrap_or(false) {
        EXIT_NEGATIVE
    } else {
        EXIT_OK
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    configure_threads()?;
    let cfg = merge(&cli)?;
    let numeric = |e: Error| Failure::from_error(e, None);
    match cli.command {
        Command::Audit => {
            format_of(&cfg, Format::Json, &[Format::Json])?;
            let f = load_anisotropy(&cfg, false)?;
            let report = f
                .convexity_audit_with_tol(cfg.grid.unwrap_or(AUDIT_RESOLUTION), cfg.tol.unwrap_or(DEFAULT_CONVEXITY_TOL))
                .map_err(|e| Failure::from_error(e, Some("grid")))?;
            emit(&cfg, out, &json(&report))?;
            let _ = writeln!(err, "audit: {} (min eigenvalue {:e})", if report.pass { "pass" } else { "fail" }, report.min_eigenvalue);
            Ok(strict_code(&cfg, !report.pass))
        }
        Command::Wulff { .. } => {
            let fmt = format_of(&cfg, Format::Csv, &[Format::Csv, Format::Obj, Format::Json])?;
            let f = load_anisotropy(&cfg, true)?;
            let res = cfg.grid.unwrap_or(32);
            let sample = match cfg.k {
                Some(k) => {
                    let spec = SubsphereSpec::coordinate(f.ambient_dim(), k).map_err(|e| Failure::input(e.to_string(), "k"))?;
                    wulff::sample_sub_wulff(&f, &spec, res)
                }
                None => wulff::sample_wulff(&f, res),
            }
            .map_err(|e| Failure::from_error(e, Some("grid")))?;
            let text = match fmt {
                Format::Csv => sample.to_csv(),
                Format::Obj => sample.to_obj().map_err(|e| Failure::input(e.to_string(), "format"))?,
                Format::Json => json(&sample),
            };
            emit(&cfg, out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Curvature => {
            let fmt = format_of(&cfg, Format::Csv, &[Format::Csv, Format::Json])?;
            let f = load_anisotropy(&cfg, true)?;
            let e = load_entry(&cfg, &f, None)?;
            let grid = e.patch.chart_grid(cfg.grid.unwrap_or(classify::DEFAULT_GRID));
            let rows = hypersurface::curvature_report(&f, &e.patch, &grid, cfg.cluster_tol.unwrap_or(DEFAULT_CLUSTER_TOL))
                .map_err(numeric)?;
            let text = if fmt == Format::Csv { hypersurface::curvature_csv(&rows) } else { json(&rows) };
            emit(&cfg, out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Translate { .. } => {
            let fmt = format_of(&cfg, Format::Csv, &[Format::Csv, Format::Json])?;
            let f = load_anisotropy(&cfg, true)?;
            let e = load_entry(&cfg, &f, None)?;
            let ts = cfg.t.clone().unwrap_or_else(|| DEFAULT_TRANSLATE_T.to_vec());
            if ts.iter().any(|t| *t == 0.0 || !t.is_finite()) {
                return Err(Failure::input("translation parameters must be finite and nonzero", "t"));
            }
            let grid = e.patch.chart_grid(cfg.grid.unwrap_or(9));
            let rows = parallel::translation_sweep(&f, &e.patch, &ts, &grid).map_err(|e| Failure::from_error(e, Some("t")))?;
            let text = if fmt == Format::Csv { parallel::sweep_csv(&rows) } else { json(&rows) };
            emit(&cfg, out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Focal { .. } => {
            format_of(&cfg, Format::Json, &[Format::Json])?;
            let f = load_anisotropy(&cfg, true)?;
            let e = load_entry(&cfg, &f, None)?;
            let at = cfg.at.clone().unwrap_or_else(|| e.patch.center());
            if at.len() != e.patch.chart_dim() {
                return Err(Failure::input(format!("expected {} chart parameters, got {}", e.patch.chart_dim(), at.len()), "at"));
            }
            let lambda = match cfg.lambda {
                Some(l) => l,
                None => {
                    let spec = hypersurface::anisotropic_curvatures(&f, &e.patch, &at).map_err(|e| Failure::from_error(e, Some("at")))?;
                    let top = spec.lambdas.iter().copied().fold(0.0_f64, |m, l| if l.abs() > m.abs() { l } else { m });
                    if top.abs() < 1e-12 {
                        return Err(Failure::input("all curvatures vanish at the seed; the focal set is empty", "entry"));
                    }
                    top
                }
            };
            let options = FocalOptions {
                leaf_resolution: cfg.grid.unwrap_or(focal::DEFAULT_LEAF_RESOLUTION),
                iso_tol: cfg.tol.unwrap_or(if f.has_analytic_derivatives() { focal::DEFAULT_ISO_TOL } else { classify::FD_ISO_TOL }),
                require_isoparametric: !cfg.pointwise.unwrap_or(false),
                cluster_tol: cfg.cluster_tol.unwrap_or(DEFAULT_CLUSTER_TOL),
                ..FocalOptions::default()
            };
            let pointwise = !options.require_isoparametric;
            let data = if pointwise {
                focal::focal_map_with(&f, &e.patch, lambda, &at, &options)
            } else {
                match focal::cartan_residual_with(&f, &e.patch, lambda, &at, &options) {
                    Err(Error::AntipodeNotFound { residual }) => {
                        let _ = writeln!(err, "focal: no antipodal leaf point (best residual {residual:e}); Cartan residual omitted");
                        focal::focal_second_form_with(&f, &e.patch, lambda, &at, &options)
                    }
                    r => r,
                }
            }
            .map_err(|e| match e {
                Error::NotIsoparametric { .. } => Failure::input(format!("{e}; --pointwise skips this check"), "entry"),
                e => Failure::from_error(e, Some("lambda")),
            })?;
            if let Some(r) = data.cartan_residual {
                let _ = writeln!(err, "focal: t = {}, cartan residual {r:e}", data.t);
            }
            emit(&cfg, out, &data.to_json())?;
            let negative = data.cartan_residual.is_some_and(|r| r >= FOCAL_CARTAN_TOL);
            Ok(strict_code(&cfg, negative))
        }
        Command::Classify => {
            format_of(&cfg, Format::Json, &[Format::Json])?;
            let f = load_anisotropy(&cfg, true)?;
            let e = load_entry(&cfg, &f, None)?;
            let mut options = ClassifyOptions::for_anisotropy(&f);
            if let Some(t) = cfg.tol {
                options.iso_tol = t;
            }
            if let Some(t) = cfg.cluster_tol {
                options.cluster_tol = t;
            }
            let grid = e.patch.chart_grid(cfg.grid.unwrap_or(classify::DEFAULT_GRID));
            let verdict =
                classify::classify_with(&f, &e.patch, &grid, cfg.complete.unwrap_or(false), &options).map_err(numeric)?;
            emit(&cfg, out, &verdict.to_json())?;
            let _ = writeln!(err, "{}", verdict.summary());
            let _ = writeln!(err, "  spread {:e}  g {}  group mismatch {}", verdict.spread, verdict.g, verdict.group_mismatch);
            for g in &verdict.groups {
                let _ = writeln!(err, "  lambda {:>24}  x{}", g.lambda, g.multiplicity);
            }
            if let Some(note) = &verdict.diagnostics.note {
                let _ = writeln!(err, "  note: {note}");
            }
            let negative = matches!(verdict.case, Case::NotIsoparametric | Case::InconsistentCompleteness);
            Ok(strict_code(&cfg, negative))
        }
        Command::Fit { .. } => {
            format_of(&cfg, Format::Json, &[Format::Json])?;
            let f = load_anisotropy(&cfg, true)?;
            let e = load_entry(&cfg, &f, Some("helicoid"))?;
            let options = cfg.fit.clone().unwrap_or_default();
            if options.basis_degree % 2 != 0 || !(2..=8).contains(&options.basis_degree) {
                return Err(Failure::input(format!("basis degree must be even and in 2..=8, got {}", options.basis_degree), "degree"));
            }
            if options.restarts == 0 {
                return Err(Failure::input("need at least one restart", "restarts"));
            }
            let grid = e.patch.chart_grid(cfg.grid.unwrap_or(classify::DEFAULT_GRID));
            let result = fit::fit_anisotropy(&e.patch, &grid, &options).map_err(|e| Failure::from_error(e, Some("entry")))?;
            emit(&cfg, out, &result.to_json())?;
            if let Some(p) = &cfg.emit_anisotropy {
                let fitted = result.anisotropy(e.patch.ambient_dim()).map_err(numeric)?;
                std::fs::write(p, fitted.to_json() + "\n")
                    .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()), "emit-anisotropy"))?;
            }
            let _ = writeln!(
                err,
                "fit: final spread {:e} (target {:e}), normalized spectrum {:?}",
                result.final_spread, options.target_spread, result.normalized_spectrum
            );
            Ok(strict_code(&cfg, !result.converged))
        }
        Command::Catalog => {
            let fmt = format_of(&cfg, Format::Json, &[Format::Json, Format::Csv])?;
            let dim = cfg.dim.unwrap_or(3);
            let listing = catalog_listing(dim).map_err(|e| Failure::from_error(e, Some("dim")))?;
            let text = match fmt {
                Format::Csv => {
                    let mut s = String::from("anisotropy,entry,expected_lambdas,complete\n");
                    for a in &listing.anisotropies {
                        for e in &a.entries {
                            let lambdas = e
                                .expected_spectrum
                                .as_ref()
                                .map(|x| x.lambdas().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "))
                                .unwrap_or_default();
                            s.push_str(&format!("{},\"{}\",{},{}\n", a.name, e.name, lambdas, e.complete));
                        }
                    }
                    s
                }
                _ => json(&listing),
            };
            emit(&cfg, out, &text)?;
            Ok(EXIT_OK)
        }
    }
}

#[derive(Debug, Serialize)]
struct ListedEntry {
    name: String,
    expected_spectrum: Option<catalog::ExpectedSpectrum>,
    complete: bool,
}

#[derive(Debug, Serialize)]
struct ListedAnisotropy {
    name: String,
    anisotropy: AnisotropyFunction,
    entries: Vec<ListedEntry>,
}

#[derive(Debug, Serialize)]
struct Listing {
    dim: usize,
    entry_names: Vec<&'static str>,
    anisotropies: Vec<ListedAnisotropy>,
}

fn catalog_listing(dim: usize) -> crate::Result<Listing> {
    let anisotropies = catalog::builtin_anisotropies(dim)?
        .into_iter()
        .map(|a| {
            let entries = catalog::builtin_patches(&a.function)?
                .into_iter()
                .map(|e| ListedEntry { name: e.name, expected_spectrum: e.expected_spectrum, complete: e.complete })
                .collect();
            Ok(ListedAnisotropy { name: a.name, anisotropy: a.function, entries })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(Listing { dim, entry_names: catalog::ENTRY_NAMES.to_vec(), anisotropies })
}
