//! Anisotropic parallel translation `x_t = x + t·φ∘ν` and the curvature transformation law.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::anisotropy::AnisotropyFunction;
use crate::error::{Error, Result};
use crate::hypersurface::{self, CurvatureSpectrum, DEFAULT_CLUSTER_TOL};
use crate::linalg;
use crate::patch::ImmersionPatch;

/// Singular values of `dx_t` below this count as degenerate directions.
pub const DEGENERACY_TOL: f64 = 1e-6;
/// `|1 − tλ|` below this makes the translated spectrum undefined.
pub const SINGULAR_T_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLE_RES: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct TranslationResult {
    pub t: f64,
    pub patch_t: ImmersionPatch,
    pub min_singular_value: f64,
    pub degenerate: bool,
    pub points_checked: usize,
}

/// Translate over the patch's default sample grid.
pub fn translate(f: &AnisotropyFunction, patch: &ImmersionPatch, t: f64) -> Result<TranslationResult> {
    translate_on(f, patch, t, &patch.chart_grid(DEFAULT_SAMPLE_RES))
}

pub fn translate_on(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    t: f64,
    grid: &[Vec<f64>],
) -> Result<TranslationResult> {
    if !t.is_finite() {
        return Err(Error::InvalidParams("t must be finite".into()));
    }
    if f.ambient_dim() != patch.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: patch.ambient_dim(), got: f.ambient_dim() });
    }
    let patch_t = if t == 0.0 { patch.clone() } else { patch.translated(f, t) };
    let sigmas = grid
        .par_iter()
        .map(|p| Ok(linalg::smallest_singular_value(&patch_t.first(p)?.1)))
        .collect::<Result<Vec<f64>>>()?;
    let min_singular_value = sigmas.into_iter().fold(f64::INFINITY, f64::min);
    Ok(TranslationResult {
        t,
        patch_t,
        min_singular_value,
        degenerate: min_singular_value < DEGENERACY_TOL,
        points_checked: grid.len(),
    })
}

/// Singular values of `dx_t` at one chart point, descending.
pub fn translated_singular_values(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    params: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let (_, dx_t) = patch.translated(f, t).first(params)?;
    let mut s: Vec<f64> = linalg::singular_values(&dx_t).iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformedSpectrum {
    pub t: f64,
    pub source: CurvatureSpectrum,
    pub actual: CurvatureSpectrum,
    /// `λ_i/(1 − tλ_i)`, descending
    pub predicted: Vec<f64>,
    pub max_deviation: f64,
}

fn check_admissible(lambdas: &[f64], t: f64, tol: f64) -> Result<()> {
    for &l in lambdas {
        let gap = (1.0 - t * l).abs();
        if gap < tol {
            return Err(Error::DegenerateTranslation { gap });
        }
    }
    Ok(())
}

/// Spectrum of `x_t` computed directly, next to the prediction from the source spectrum.
pub fn transformed_spectrum(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    params: &[f64],
    t: f64,
) -> Result<TransformedSpectrum> {
    let source = hypersurface::anisotropic_curvatures(f, patch, params)?;
    check_admissible(&source.lambdas, t, SINGULAR_T_TOL)?;
    let mut predicted: Vec<f64> = source.lambdas.iter().map(|l| l / (1.0 - t * l)).collect();
    predicted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let patch_t = if t == 0.0 { patch.clone() } else { patch.translated(f, t) };
    let actual = hypersurface::anisotropic_curvatures_with(f, &patch_t, params, DEFAULT_CLUSTER_TOL)?;
    let max_deviation = actual.lambdas.iter().zip(&predicted).map(|(a, p)| (a - p).abs()).fold(0.0, f64::max);
    Ok(TransformedSpectrum { t, source, actual, predicted, max_deviation })
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanProfilePoint {
    pub t: f64,
    /// `H_F(t)` from the spectrum of `x_t`
    pub mean: f64,
    /// `−(1/n)·(log Σ(−1)^k M_k t^k)′` from the source point
    pub generating_prediction: f64,
    pub deviation: f64,
}

/// `−(1/n)·P′(t)/P(t)` with `P(t) = Σ_k (−1)^k M_k t^k`.
pub fn generating_mean(sym_functions: &[f64], t: f64) -> f64 {
    let n = sym_functions.len() - 1;
    let mut p = 0.0;
    let mut dp = 0.0;
    for (k, m) in sym_functions.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        p += sign * m * t.powi(k as i32);
        if k > 0 {
            dp += sign * k as f64 * m * t.powi(k as i32 - 1);
        }
    }
    -dp / (p * n as f64)
}

pub fn mean_profile(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    params: &[f64],
    t_grid: &[f64],
) -> Result<Vec<MeanProfilePoint>> {
    let source = hypersurface::anisotropic_curvatures(f, patch, params)?;
    t_grid
        .iter()
        .map(|&t| {
            check_admissible(&source.lambdas, t, DEGENERACY_TOL)?;
            let patch_t = if t == 0.0 { patch.clone() } else { patch.translated(f, t) };
            let mean = hypersurface::anisotropic_curvatures(f, &patch_t, params)?.mean;
            let generating_prediction = generating_mean(&source.sym_functions, t);
            Ok(MeanProfilePoint { t, mean, generating_prediction, deviation: (mean - generating_prediction).abs() })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub params: Vec<f64>,
    pub min_singular_value: f64,
    /// `None` where `1 − tλ` vanishes
    pub deviation: Option<f64>,
}

/// Per-point translation report over a set of `t` values.
pub fn translation_sweep(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    t_values: &[f64],
    grid: &[Vec<f64>],
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &t in t_values {
        let chunk = grid
            .par_iter()
            .map(|p| {
                let sigma = translated_singular_values(f, patch, p, t)?.last().copied().unwrap_or(0.0);
                let deviation = match transformed_spectrum(f, patch, p, t) {
                    Ok(ts) => Some(ts.max_deviation),
                    Err(Error::DegenerateTranslation { .. }) | Err(Error::RankDeficient { .. }) => None,
                    Err(e) => return Err(e),
                };
                Ok(SweepRow { t, params: p.clone(), min_singular_value: sigma, deviation })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(chunk);
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("# wulfflab translation-sweep v1\n");
    let n = rows.first().map_or(0, |r| r.params.len());
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("p{i}")));
    header.push("min_singular_value".into());
    header.push("lambda_deviation".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        let mut cells = vec![r.t.to_string()];
        cells.extend(r.params.iter().map(|v| v.to_string()));
        cells.push(r.min_singular_value.to_string());
        cells.push(r.deviation.map_or_else(|| "nan".to_string(), |d| d.to_string()));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Rows of a matrix, for JSON output.
pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
