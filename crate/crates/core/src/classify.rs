//! Isoparametric detection and classification of sampled hypersurfaces.
//!
//! Complete anisotropic isoparametric hypersurfaces are open parts of a hyperplane,
//! of a Wulff shape, or of a product `W^k_F × R^{n−k}`. Completeness cannot be read off
//! samples, so it is an input to [`classify`].

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::anisotropy::AnisotropyFunction;
use crate::catalog::ExpectedGroup;
use crate::error::{Error, Result};
use crate::focal;
use crate::hypersurface::{self, CurvatureSpectrum};
use crate::patch::ImmersionPatch;

pub const DEFAULT_ISO_TOL: f64 = 1e-6;
/// Tolerances used when `F` is differentiated numerically.
pub const FD_ISO_TOL: f64 = 1e-4;
pub const DEFAULT_GRID: usize = 15;
pub const WULFF_CHECK_TOL: f64 = 1e-6;
pub const PRODUCT_CHECK_TOL: f64 = 1e-6;
/// Grid points used by the Wulff-center fit.
pub const WULFF_CHECK_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyOptions {
    pub iso_tol: f64,
    pub cluster_tol: f64,
}

impl ClassifyOptions {
    /// Tight tolerances for analytic derivatives, looser ones for finite differences.
    pub fn for_anisotropy(f: &AnisotropyFunction) -> Self {
        let tol = if f.has_analytic_derivatives() { DEFAULT_ISO_TOL } else { FD_ISO_TOL };
        ClassifyOptions { iso_tol: tol, cluster_tol: tol }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoReport {
    pub isoparametric: bool,
    /// max over sorted positions `i` of `max λ_i − min λ_i`
    pub spread: f64,
    pub g: usize,
    pub groups: Vec<GroupStats>,
    /// per-position standard deviation over the grid
    pub std_devs: Vec<f64>,
    /// true when the group count differs between grid points
    pub group_mismatch: bool,
    pub points: usize,
    pub iso_tol: f64,
}

/// Spectra over `grid`, matched by sorted order.
pub fn detect_isoparametric(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    grid: &[Vec<f64>],
    options: &ClassifyOptions,
) -> Result<IsoReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("sample grid is empty".into()));
    }
    let spectra = grid
        .par_iter()
        .map(|p| hypersurface::anisotropic_curvatures_with(f, patch, p, options.cluster_tol))
        .collect::<Result<Vec<CurvatureSpectrum>>>()?;
    Ok(iso_report(&spectra, options))
}

fn iso_report(spectra: &[CurvatureSpectrum], options: &ClassifyOptions) -> IsoReport {
    let n = spectra[0].lambdas.len();
    let count = spectra.len() as f64;
    let mut spread: f64 = 0.0;
    let mut means = vec![0.0; n];
    let mut mins = vec![f64::INFINITY; n];
    let mut maxs = vec![f64::NEG_INFINITY; n];
    let mut std_devs = vec![0.0; n];
    for i in 0..n {
        for s in spectra {
            let l = s.lambdas[i];
            means[i] += l / count;
            mins[i] = mins[i].min(l);
            maxs[i] = maxs[i].max(l);
        }
        std_devs[i] = (spectra.iter().map(|s| (s.lambdas[i] - means[i]).powi(2)).sum::<f64>() / count).sqrt();
        spread = spread.max(maxs[i] - mins[i]);
    }
    let g0 = spectra[0].g();
    let group_mismatch = spectra.iter().any(|s| s.g() != g0);

    // groups of the mean spectrum
    let mut groups: Vec<GroupStats> = Vec::new();
    for i in 0..n {
        match groups.last_mut() {
            Some(g) if (means[i - 1] - means[i]).abs() <= options.cluster_tol => {
                let m = g.multiplicity as f64;
                g.mean = (g.mean * m + means[i]) / (m + 1.0);
                g.min = g.min.min(mins[i]);
                g.max = g.max.max(maxs[i]);
                g.multiplicity += 1;
            }
            _ => groups.push(GroupStats { mean: means[i], min: mins[i], max: maxs[i], multiplicity: 1 }),
        }
    }
    IsoReport {
        isoparametric: spread < options.iso_tol && !group_mismatch,
        spread,
        g: groups.len(),
        groups,
        std_devs,
        group_mismatch,
        points: spectra.len(),
        iso_tol: options.iso_tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Plane,
    WulffShape,
    ProductK,
    LocalOnly,
    NotIsoparametric,
    /// complete and isoparametric, but with a spectrum no complete example can have
    InconsistentCompleteness,
}

#[derive(Debug, Clone, Serialize)]
pub struct WulffCheck {
    /// center `q` with `x − q ∈ −φ(ν)/λ`
    pub center: Vec<f64>,
    /// `max |F*(−λ(x − q)) − 1|` over the grid
    pub dual_norm_deviation: f64,
    pub iterations: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductCheck {
    pub lambda: f64,
    pub cartan_residual: Option<f64>,
    pub ii_max_abs: Option<f64>,
    pub focal_rank_deficiency: Option<usize>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub wulff: Option<WulffCheck>,
    pub product: Option<ProductCheck>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationVerdict {
    pub case: Case,
    pub isoparametric: bool,
    pub spread: f64,
    pub g: usize,
    pub groups: Vec<ExpectedGroup>,
    pub k: Option<usize>,
    pub completeness_asserted: bool,
    pub group_mismatch: bool,
    pub diagnostics: Diagnostics,
}

impl ClassificationVerdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        let groups: Vec<String> = self.groups.iter().map(|g| format!("{}x{}", g.lambda, g.multiplicity)).collect();
        let case = serde_json::to_value(self.case).unwrap();
        let mut s = format!("case={} g={} groups=[{}] spread={:e}", case.as_str().unwrap(), self.g, groups.join(","), self.spread);
        if let Some(k) = self.k {
            s.push_str(&format!(" k={k}"));
        }
        s
    }
}

pub fn classify(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    grid: &[Vec<f64>],
    completeness_asserted: bool,
) -> Result<ClassificationVerdict> {
    classify_with(f, patch, grid, completeness_asserted, &ClassifyOptions::for_anisotropy(f))
}

pub fn classify_with(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    grid: &[Vec<f64>],
    completeness_asserted: bool,
    options: &ClassifyOptions,
) -> Result<ClassificationVerdict> {
    let report = detect_isoparametric(f, patch, grid, options)?;
    let groups: Vec<ExpectedGroup> =
        report.groups.iter().map(|g| ExpectedGroup { lambda: g.mean, multiplicity: g.multiplicity }).collect();
    let mut verdict = ClassificationVerdict {
        case: Case::NotIsoparametric,
        isoparametric: report.isoparametric,
        spread: report.spread,
        g: report.g,
        groups,
        k: None,
        completeness_asserted,
        group_mismatch: report.group_mismatch,
        diagnostics: Diagnostics::default(),
    };
    if !report.isoparametric {
        if report.group_mismatch {
            verdict.diagnostics.note = Some("group count varies over the grid".into());
        }
        return Ok(verdict);
    }
    if !completeness_asserted {
        verdict.case = Case::LocalOnly;
        return Ok(verdict);
    }
    let tol = options.cluster_tol;
    let zero = |l: f64| l.abs() < tol;
    match verdict.groups.as_slice() {
        [only] if zero(only.lambda) => verdict.case = Case::Plane,
        [only] => {
            verdict.case = Case::WulffShape;
            verdict.diagnostics.wulff = Some(wulff_center(f, patch, grid, only.lambda)?);
        }
        [a, b] if zero(a.lambda) != zero(b.lambda) => {
            let nonzero = if zero(a.lambda) { b } else { a };
            verdict.case = Case::ProductK;
            verdict.k = Some(nonzero.multiplicity);
            verdict.diagnostics.product = Some(product_check(f, patch, nonzero.lambda));
        }
        _ => {
            verdict.case = Case::InconsistentCompleteness;
            verdict.diagnostics.note = Some(format!(
                "g = {} with {} nonzero groups cannot occur on a complete hypersurface",
                verdict.g,
                verdict.groups.iter().filter(|g| !zero(g.lambda)).count()
            ));
        }
    }
    Ok(verdict)
}

/// Gauss-Newton fit of `q` in `Σ (F*(−λ(x − q)) − 1)²`, seeded at the centroid, over at
/// most [`WULFF_CHECK_POINTS`] evenly strided grid points.
///
/// The gradient of `F*` at `y` is `z/F(z)` with `z` the maximizer.
pub fn wulff_center(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    grid: &[Vec<f64>],
    lambda: f64,
) -> Result<WulffCheck> {
    let stride = grid.len().div_ceil(WULFF_CHECK_POINTS).max(1);
    let xs = grid.iter().step_by(stride).map(|p| patch.position(p)).collect::<Result<Vec<DVector<f64>>>>()?;
    let d = f.ambient_dim();
    let mut q = xs.iter().fold(DVector::zeros(d), |a, x| a + x) / xs.len() as f64;
    let residuals = |q: &DVector<f64>| -> Result<Vec<(f64, DVector<f64>)>> {
        xs.par_iter()
            .map(|x| {
                let y = (x - q) * -lambda;
                let dn = f.dual_norm(&y)?;
                let z = DVector::from_column_slice(&dn.maximizer);
                // d/dq F*(−λ(x − q)) = λ z / F(z)
                let grad = &z * (lambda / f.value(&z)?);
                Ok((dn.value - 1.0, grad))
            })
            .collect()
    };
    let mut res = residuals(&q)?;
    let mut iterations = 0;
    for _ in 0..30 {
        iterations += 1;
        let mut jtj = nalgebra::DMatrix::<f64>::zeros(d, d);
        let mut jtr = DVector::<f64>::zeros(d);
        for (r, g) in &res {
            jtj += g * g.transpose();
            jtr += g * *r;
        }
        let Some(step) = (jtj + nalgebra::DMatrix::identity(d, d) * 1e-14).cholesky().map(|c| c.solve(&jtr)) else {
            break;
        };
        let cost = |r: &[(f64, DVector<f64>)]| r.iter().map(|(v, _)| v * v).sum::<f64>();
        let before = cost(&res);
        let mut scale = 1.0;
        let mut accepted = false;
        while scale > 1e-6 {
            let cand = &q - &step * scale;
            let r = residuals(&cand)?;
            if cost(&r) < before {
                q = cand;
                res = r;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted || step.norm() * scale < 1e-13 {
            break;
        }
    }
    let dual_norm_deviation = res.iter().map(|(r, _)| r.abs()).fold(0.0, f64::max);
    Ok(WulffCheck {
        center: q.iter().copied().collect(),
        dual_norm_deviation,
        iterations,
        pass: dual_norm_deviation < WULFF_CHECK_TOL,
    })
}

fn product_check(f: &AnisotropyFunction, patch: &ImmersionPatch, lambda: f64) -> ProductCheck {
    let options = focal::FocalOptions {
        iso_tol: if f.has_analytic_derivatives() { focal::DEFAULT_ISO_TOL } else { FD_ISO_TOL },
        cluster_tol: if f.has_analytic_derivatives() { hypersurface::DEFAULT_CLUSTER_TOL } else { FD_ISO_TOL },
        ..focal::FocalOptions::default()
    };
    match focal::cartan_residual_with(f, patch, lambda, &patch.center(), &options) {
        Ok(data) => {
            let cartan = data.cartan_residual;
            let ii = data.ii_max_abs();
            let pass = cartan.is_some_and(|c| c.abs() < PRODUCT_CHECK_TOL) && ii.is_some_and(|v| v < PRODUCT_CHECK_TOL);
            ProductCheck {
                lambda,
                cartan_residual: cartan,
                ii_max_abs: ii,
                focal_rank_deficiency: Some(data.focal_rank_deficiency),
                error: None,
                pass,
            }
        }
        Err(e) => ProductCheck {
            lambda,
            cartan_residual: None,
            ii_max_abs: None,
            focal_rank_deficiency: None,
            error: Some(e.to_string()),
            pass: false,
        },
    }
}
