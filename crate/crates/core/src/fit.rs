//! Inverse design: an axisymmetric `F(u) = Σ c_j u_last^{2j}` making a target patch
//! anisotropic isoparametric.
//!
//! The objective is the summed variance of each sorted `λ_i` over the sample grid,
//! divided by the squared mean `|λ|` so that shrinking all curvatures is not rewarded,
//! plus a quadratic penalty when `A_F` drops below a margin. `c_0 = 1` fixes the scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisotropyFunction;
use crate::catalog::AUDIT_RESOLUTION;
use crate::error::{Error, Result};
use crate::hypersurface::{self, PointGeometry};
use crate::patch::ImmersionPatch;

/// Objective value for coefficients whose curvatures cannot be evaluated.
const INFEASIBLE: f64 = 1e3;
const TIE_TOL: f64 = 1e-14;
/// Axial samples for the convexity penalty.
const PENALTY_NODES: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// even, at most 8
    pub basis_degree: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub target_spread: f64,
    pub penalty: f64,
    /// required lower bound on the eigenvalues of `A_F`
    pub margin: f64,
    /// restarts after the first start uniformly in `[-box, box]` per coefficient
    pub coefficient_box: f64,
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            basis_degree: 8,
            restarts: 5,
            max_iterations: 500,
            target_spread: 1e-3,
            penalty: 1e4,
            margin: 0.05,
            coefficient_box: 0.3,
            initial_step: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartSummary {
    pub start: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// `c_0 … c_{d/2}` with `c_0 = 1`
    pub coefficients: Vec<f64>,
    /// best objective after each iteration of the winning restart
    pub objective_history: Vec<f64>,
    /// max over `i` of the standard deviation of `λ_i` over the grid
    pub final_spread: f64,
    /// `final_spread` divided by the largest `|mean λ_i|`
    pub relative_spread: f64,
    /// mean of each `λ_i` over the grid
    pub mean_spectrum: Vec<f64>,
    /// `mean_spectrum` scaled so the largest `|λ|` is 1
    pub normalized_spectrum: Vec<f64>,
    pub min_a_eigenvalue: f64,
    /// `final_spread ≤ target_spread`
    pub converged: bool,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
}

impl FitResult {
    pub fn anisotropy(&self, ambient_dim: usize) -> Result<AnisotropyFunction> {
        AnisotropyFunction::axisymmetric(ambient_dim, &self.coefficients)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit result serializes")
    }
}

/// Exact eigenvalues of `A_F` for `F = f(u_last)`: `a = f − z f'` on the
/// `n − 1` directions orthogonal to the axis, `b = a + (1 − z²) f''` along it.
pub fn axial_a_eigenvalues(coeffs: &[f64], z: f64) -> (f64, f64) {
    let mut f = 0.0;
    let mut f1 = 0.0;
    let mut f2 = 0.0;
    for (j, &c) in coeffs.iter().enumerate() {
        let p = 2 * j as i32;
        f += c * z.powi(p);
        if j >= 1 {
            f1 += c * p as f64 * z.powi(p - 1);
            f2 += c * (p * (p - 1)) as f64 * z.powi(p - 2);
        }
    }
    let a = f - z * f1;
    (a, a + (1.0 - z * z) * f2)
}

/// Smallest `A_F` eigenvalue over `z ∈ [0, 1]` (the profile is even).
pub fn axial_min_eigenvalue(coeffs: &[f64]) -> f64 {
    (0..PENALTY_NODES)
        .map(|i| {
            let (a, b) = axial_a_eigenvalues(coeffs, i as f64 / (PENALTY_NODES - 1) as f64);
            a.min(b)
        })
        .fold(f64::INFINITY, f64::min)
}

struct Problem<'a> {
    dim: usize,
    geometry: &'a [PointGeometry],
    options: &'a FitOptions,
}

struct Spectra {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Problem<'_> {
    fn coefficients(&self, free: &[f64]) -> Vec<f64> {
        std::iter::once(1.0).chain(free.iter().copied()).collect()
    }

    fn spectra(&self, coeffs: &[f64]) -> Option<Spectra> {
        let f = AnisotropyFunction::axisymmetric(self.dim, coeffs).ok()?;
        let all: Vec<Vec<f64>> =
            self.geometry.iter().map(|g| hypersurface::lambdas_at(&f, g).ok()).collect::<Option<_>>()?;
        let n = all[0].len();
        let count = all.len() as f64;
        let means: Vec<f64> = (0..n).map(|i| all.iter().map(|l| l[i]).sum::<f64>() / count).collect();
        let stds = (0..n)
            .map(|i| (all.iter().map(|l| (l[i] - means[i]).powi(2)).sum::<f64>() / count).sqrt())
            .collect();
        Some(Spectra { means, stds })
    }

    fn objective(&self, free: &[f64]) -> f64 {
        let coeffs = self.coefficients(free);
        let min_a = axial_min_eigenvalue(&coeffs);
        let penalty = self.options.penalty * (self.options.margin - min_a).max(0.0).powi(2);
        if min_a <= 0.0 {
            return INFEASIBLE + penalty;
        }
        let Some(s) = self.spectra(&coeffs) else { return INFEASIBLE + penalty };
        let scale = s.means.iter().map(|m| m.abs()).sum::<f64>() / s.means.len() as f64;
        if !(scale > 1e-12) {
            return INFEASIBLE + penalty;
        }
        s.stds.iter().map(|v| v * v).sum::<f64>() / (scale * scale) + penalty
    }
}

struct Minimum {
    x: Vec<f64>,
    value: f64,
    history: Vec<f64>,
    iterations: usize,
}

/// Nelder-Mead with the standard coefficients (1, 2, 1/2, 1/2).
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], step: f64, max_iterations: usize) -> Minimum {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += step;
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    order(&mut simplex);
    let mut history = Vec::with_capacity(max_iterations);
    let mut iterations = 0;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    while iterations < max_iterations {
        iterations += 1;
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let size = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= 1e-15 * best.abs().max(1e-300) && size < 1e-10 {
            history.push(best);
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64).collect();
        let reflected = lerp(&centroid, &simplex[n].0, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &simplex[n].0, -2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (target, ft) = if fr < simplex[n].1 { (reflected, fr) } else { (simplex[n].0.clone(), simplex[n].1) };
            let contracted = lerp(&centroid, &target, 0.5);
            let fc = f(&contracted);
            if fc < ft {
                simplex[n] = (contracted, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    v.0 = lerp(&x0, &v.0, 0.5);
                    v.1 = f(&v.0);
                }
            }
        }
        order(&mut simplex);
        history.push(simplex[0].1);
    }
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, history, iterations }
}

/// Fit `F` on `grid` of `target`; the result carries `converged = false` when the spread
/// target was not reached.
pub fn fit_anisotropy(target: &ImmersionPatch, grid: &[Vec<f64>], options: &FitOptions) -> Result<FitResult> {
    if options.basis_degree % 2 != 0 || options.basis_degree == 0 || options.basis_degree > 8 {
        return Err(Error::InvalidParams("basis_degree must be even and in 2..=8".into()));
    }
    if options.restarts == 0 || grid.is_empty() {
        return Err(Error::InvalidParams("need at least one restart and one grid point".into()));
    }
    let dim = target.ambient_dim();
    let geometry = grid
        .par_iter()
        .map(|p| hypersurface::point_geometry(target, p))
        .collect::<Result<Vec<PointGeometry>>>()?;
    if geometry.iter().all(|g| g.w.abs().max() < 1e-12) {
        return Err(Error::InvalidParams("target is flat; the relative spread is undefined".into()));
    }
    let problem = Problem { dim, geometry: &geometry, options };
    let free = options.basis_degree / 2;

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let starts: Vec<Vec<f64>> = (0..options.restarts)
        .map(|r| {
            if r == 0 {
                vec![0.0; free]
            } else {
                (0..free).map(|_| rng.gen_range(-options.coefficient_box..=options.coefficient_box)).collect()
            }
        })
        .collect();
    let runs: Vec<Minimum> = starts
        .par_iter()
        .map(|s| nelder_mead(|x| problem.objective(x), s, options.initial_step, options.max_iterations))
        .collect();

    // best audited restart; objectives within TIE_TOL count as ties, won by the lowest index
    let audited = |i: usize| -> Result<bool> {
        if runs[i].value >= INFEASIBLE {
            return Ok(false);
        }
        let f = AnisotropyFunction::axisymmetric(dim, &problem.coefficients(&runs[i].x))?;
        Ok(f.convexity_audit(AUDIT_RESOLUTION)?.pass)
    };
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| runs[a].value.partial_cmp(&runs[b].value).unwrap().then(a.cmp(&b)));
    let mut chosen = None;
    for &i in &order {
        if audited(i)? {
            chosen = Some(i);
            break;
        }
    }
    if let Some(c) = chosen {
        let bar = runs[c].value + TIE_TOL;
        for i in 0..c {
            if runs[i].value <= bar && audited(i)? {
                chosen = Some(i);
                break;
            }
        }
    }
    let Some(best) = chosen else {
        let coeffs = problem.coefficients(&runs[order[0]].x);
        return Err(Error::ConvexityViolation { min_eigenvalue: axial_min_eigenvalue(&coeffs), at: coeffs });
    };
    let coefficients = problem.coefficients(&runs[best].x);
    let spectra = problem
        .spectra(&coefficients)
        .ok_or_else(|| Error::InvalidParams("fitted coefficients cannot be evaluated".into()))?;
    let final_spread = spectra.stds.iter().copied().fold(0.0, f64::max);
    let top = spectra.means.iter().map(|m| m.abs()).fold(0.0, f64::max);
    Ok(FitResult {
        min_a_eigenvalue: axial_min_eigenvalue(&coefficients),
        coefficients,
        objective_history: runs[best].history.clone(),
        final_spread,
        relative_spread: final_spread / top,
        normalized_spectrum: spectra.means.iter().map(|m| m / top).collect(),
        mean_spectrum: spectra.means,
        converged: final_spread <= options.target_spread,
        best_restart: best,
        restarts: runs
            .iter()
            .zip(&starts)
            .map(|(r, s)| RestartSummary { start: s.clone(), objective: r.value, iterations: r.iterations })
            .collect(),
    })
}
