//! Anisotropy integrands `F: S^n → R⁺` and their sphere calculus.
//!
//! Everything is computed through the 1-homogeneous extension `F̂(y) = |y| F(y/|y|)`:
//! its ambient gradient at a unit vector `u` is the Wulff map `φ(u) = DF_u + F(u) u`,
//! and its ambient Hessian restricted to `u^⊥` is `A_F = D²F + F I`. Since `F̂` is
//! 1-homogeneous the Hessian annihilates `u`, so no sphere coordinates are needed.

use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere;

pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Hessians use a coarser step than gradients; second differences at `1e-5`
/// carry ~1e-6 of round-off.
pub const HESSIAN_STEP_FACTOR: f64 = 10.0;
pub const UNIT_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_CONVEXITY_TOL: f64 = 1e-8;
pub const DUAL_NORM_MAX_ITER: usize = 100;
pub const DUAL_NORM_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Isotropic,
    QuadraticNorm,
    AxisymmetricSeries,
    BandExtension,
    Tabulated,
}

impl Family {
    fn code(self) -> f64 {
        match self {
            Family::Isotropic => 0.0,
            Family::QuadraticNorm => 1.0,
            Family::AxisymmetricSeries => 2.0,
            Family::BandExtension => 3.0,
            Family::Tabulated => 4.0,
        }
    }

    fn from_code(code: f64) -> Option<Family> {
        match code.round() as i64 {
            0 => Some(Family::Isotropic),
            1 => Some(Family::QuadraticNorm),
            2 => Some(Family::AxisymmetricSeries),
            3 => Some(Family::BandExtension),
            4 => Some(Family::Tabulated),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// Serialized form of an [`AnisotropyFunction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnisotropySpec {
    pub ambient_dim: usize,
    pub family: Family,
    pub params: Vec<f64>,
    pub derivative_mode: DerivativeMode,
    pub fd_step: f64,
}

/// Axial profile `f(z)` of a rotationally symmetric `F(u) = f(u_last)`.
#[derive(Debug, Clone, PartialEq)]
enum AxialProfile {
    /// `f(z) = Σ c_j z^{2j}`
    EvenSeries(Vec<f64>),
    /// natural cubic spline through uniform nodes on `[-1, 1]`
    Spline { values: Vec<f64>, moments: Vec<f64> },
}

impl AxialProfile {
    fn spline(values: Vec<f64>) -> Self {
        let m = values.len();
        let h = 2.0 / (m - 1) as f64;
        // second-derivative moments, natural end conditions
        let mut moments = vec![0.0; m];
        if m > 2 {
            let k = m - 2;
            let mut diag = vec![4.0; k];
            let mut rhs: Vec<f64> = (1..m - 1)
                .map(|i| 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h))
                .collect();
            for i in 1..k {
                let w = 1.0 / diag[i - 1];
                diag[i] -= w;
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; k];
            sol[k - 1] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                sol[i] = (rhs[i] - sol[i + 1]) / diag[i];
            }
            moments[1..m - 1].copy_from_slice(&sol);
        }
        AxialProfile::Spline { values, moments }
    }

    /// `(f, f', f'')` at `z`.
    fn eval(&self, z: f64) -> (f64, f64, f64) {
        match self {
            AxialProfile::EvenSeries(c) => {
                let mut f = 0.0;
                let mut f1 = 0.0;
                let mut f2 = 0.0;
                for (j, &cj) in c.iter().enumerate() {
                    let p = 2 * j as i32;
                    f += cj * z.powi(p);
                    if j >= 1 {
                        f1 += cj * p as f64 * z.powi(p - 1);
                        f2 += cj * (p * (p - 1)) as f64 * z.powi(p - 2);
                    }
                }
                (f, f1, f2)
            }
            AxialProfile::Spline { values, moments } => {
                let m = values.len();
                let h = 2.0 / (m - 1) as f64;
                let s = ((z.clamp(-1.0, 1.0) + 1.0) / h).floor() as usize;
                let i = s.min(m - 2);
                let x0 = -1.0 + i as f64 * h;
                let a = (x0 + h - z) / h;
                let b = (z - x0) / h;
                let (m0, m1) = (moments[i], moments[i + 1]);
                let (y0, y1) = (values[i], values[i + 1]);
                let f = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
                let f1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h / 6.0 * m0 + (3.0 * b * b - 1.0) * h / 6.0 * m1;
                let f2 = a * m0 + b * m1;
                (f, f1, f2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Band {
    base: Box<AnisotropyFunction>,
    halfwidth: f64,
    ramp: f64,
    plateau: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Isotropic,
    Quadratic(Vec<f64>),
    Axial(AxialProfile),
    Band(Band),
}

/// A smooth positive function on `S^{ambient_dim - 1}` with derivative access.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnisotropySpec", into = "AnisotropySpec")]
pub struct AnisotropyFunction {
    spec: AnisotropySpec,
    #[serde(skip)]
    kind: Kind,
    #[serde(skip)]
    audits: AuditCache,
}

/// Audit reports keyed by grid resolution and tolerance. A function is immutable once
/// built, so clones share one cache.
#[derive(Debug, Clone, Default)]
struct AuditCache(Arc<Mutex<Vec<(usize, u64, ConvexityReport)>>>);

impl PartialEq for AuditCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl From<AnisotropyFunction> for AnisotropySpec {
    fn from(f: AnisotropyFunction) -> Self {
        f.spec
    }
}

impl TryFrom<AnisotropySpec> for AnisotropyFunction {
    type Error = Error;

    fn try_from(spec: AnisotropySpec) -> Result<Self> {
        AnisotropyFunction::from_spec(spec)
    }
}

/// `F`, its sphere gradient and `A_F` at a unit vector.
#[derive(Debug, Clone)]
pub struct AnisotropyEval {
    pub u: DVector<f64>,
    pub value: f64,
    /// `DF_u`, tangent at `u`
    pub gradient: DVector<f64>,
    /// `φ(u) = DF_u + F(u) u`
    pub phi: DVector<f64>,
    /// ambient Hessian of `F̂` at `u` (annihilates `u`)
    pub hessian: DMatrix<f64>,
    /// rows: orthonormal basis of `u^⊥`
    pub basis: DMatrix<f64>,
    /// `A_F` in `basis`
    pub a_matrix: DMatrix<f64>,
    /// `C_F = A_F^{1/2}`; `None` when `A_F` has an eigenvalue below `-1e-8`
    pub c_matrix: Option<DMatrix<f64>>,
    pub min_eigenvalue: f64,
}

impl AnisotropyEval {
    pub fn c_matrix(&self) -> Result<&DMatrix<f64>> {
        self.c_matrix.as_ref().ok_or_else(|| Error::ConvexityViolation {
            min_eigenvalue: self.min_eigenvalue,
            at: self.u.iter().copied().collect(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DualNorm {
    pub value: f64,
    pub maximizer: Vec<f64>,
    pub iterations: usize,
    /// false when the tangential gradient at the optimum stays above `DUAL_NORM_RESIDUAL_TOL`
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub min_eigenvalue: f64,
    pub argmin: Vec<f64>,
    pub points_checked: usize,
    pub tolerance: f64,
    pub pass: bool,
}

fn quintic_ramp(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

impl AnisotropyFunction {
    pub fn from_spec(spec: AnisotropySpec) -> Result<Self> {
        let dim = spec.ambient_dim;
        if dim < 2 {
            return Err(Error::InvalidParams(format!("ambient_dim must be >= 2, got {dim}")));
        }
        if !(spec.fd_step > 0.0 && spec.fd_step.is_finite()) {
            return Err(Error::InvalidParams("fd_step must be positive".into()));
        }
        if spec.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParams("params must be finite".into()));
        }
        let kind = match spec.family {
            Family::Isotropic => Kind::Isotropic,
            Family::QuadraticNorm => {
                if spec.params.len() != dim || spec.params.iter().any(|&q| q <= 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "quadratic-norm needs {dim} positive diagonal entries"
                    )));
                }
                Kind::Quadratic(spec.params.clone())
            }
            Family::AxisymmetricSeries => {
                if spec.params.is_empty() {
                    return Err(Error::InvalidParams("axisymmetric-series needs c_0".into()));
                }
                Kind::Axial(AxialProfile::EvenSeries(spec.params.clone()))
            }
            Family::Tabulated => {
                if spec.params.len() < 3 {
                    return Err(Error::InvalidParams("tabulated needs at least 3 axial nodes".into()));
                }
                Kind::Axial(AxialProfile::spline(spec.params.clone()))
            }
            Family::BandExtension => {
                if spec.derivative_mode == DerivativeMode::Analytic {
                    return Err(Error::InvalidParams(
                        "band-extension has no analytic derivatives; use finite-difference".into(),
                    ));
                }
                if spec.params.len() < 4 || dim < 3 {
                    return Err(Error::InvalidParams(
                        "band-extension params: [base_family, halfwidth, ramp, plateau, base params...]".into(),
                    ));
                }
                let base_family = Family::from_code(spec.params[0])
                    .filter(|f| *f != Family::BandExtension)
                    .ok_or_else(|| Error::InvalidParams("invalid band-extension base family".into()))?;
                let (halfwidth, ramp, plateau) = (spec.params[1], spec.params[2], spec.params[3]);
                if !(halfwidth > 0.0 && halfwidth < FRAC_PI_2 && ramp > 0.0 && halfwidth + ramp < FRAC_PI_2) {
                    return Err(Error::InvalidParams(
                        "band-extension needs 0 < halfwidth, 0 < ramp, halfwidth + ramp < pi/2".into(),
                    ));
                }
                if plateau <= 0.0 {
                    return Err(Error::InvalidParams("band-extension plateau must be positive".into()));
                }
                let base = AnisotropyFunction::from_spec(AnisotropySpec {
                    ambient_dim: dim - 1,
                    family: base_family,
                    params: spec.params[4..].to_vec(),
                    derivative_mode: DerivativeMode::Analytic,
                    fd_step: spec.fd_step,
                })?;
                Kind::Band(Band { base: Box::new(base), halfwidth, ramp, plateau })
            }
        };
        Ok(AnisotropyFunction { spec, kind, audits: AuditCache::default() })
    }

    fn build(dim: usize, family: Family, params: Vec<f64>) -> Result<Self> {
        Self::from_spec(AnisotropySpec {
            ambient_dim: dim,
            family,
            params,
            derivative_mode: DerivativeMode::Analytic,
            fd_step: DEFAULT_FD_STEP,
        })
    }

    pub fn isotropic(ambient_dim: usize) -> Self {
        Self::build(ambient_dim, Family::Isotropic, vec![]).expect("valid isotropic")
    }

    /// `F(u) = √(uᵀQu)` with `Q = diag(q)`.
    pub fn quadratic(q: &[f64]) -> Result<Self> {
        Self::build(q.len(), Family::QuadraticNorm, q.to_vec())
    }

    /// `F(u) = Σ c_j u_last^{2j}`.
    pub fn axisymmetric(ambient_dim: usize, coeffs: &[f64]) -> Result<Self> {
        Self::build(ambient_dim, Family::AxisymmetricSeries, coeffs.to_vec())
    }

    /// `F(u) = f(u_last)` with `f` the natural cubic spline through `values` at uniform nodes on `[-1, 1]`.
    pub fn tabulated(ambient_dim: usize, values: &[f64]) -> Result<Self> {
        Self::build(ambient_dim, Family::Tabulated, values.to_vec())
    }

    /// Band extension of `base` to one dimension higher (see `catalog::extend_axis`).
    pub fn band_extension(base: &AnisotropyFunction, halfwidth: f64, ramp: f64, plateau: f64) -> Result<Self> {
        if base.family() == Family::BandExtension {
            return Err(Error::InvalidParams("cannot extend a band extension".into()));
        }
        let mut params = vec![base.family().code(), halfwidth, ramp, plateau];
        params.extend_from_slice(base.params());
        Self::from_spec(AnisotropySpec {
            ambient_dim: base.ambient_dim() + 1,
            family: Family::BandExtension,
            params,
            derivative_mode: DerivativeMode::FiniteDifference,
            fd_step: base.fd_step(),
        })
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Result<Self> {
        self.spec.derivative_mode = mode;
        Self::from_spec(self.spec)
    }

    pub fn with_fd_step(mut self, step: f64) -> Result<Self> {
        self.spec.fd_step = step;
        Self::from_spec(self.spec)
    }

    /// The same function multiplied by `c > 0` (homothetic Wulff shape).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut spec = self.spec.clone();
        match spec.family {
            Family::Isotropic => {
                spec.family = Family::QuadraticNorm;
                spec.params = vec![c * c; spec.ambient_dim];
            }
            Family::QuadraticNorm => spec.params.iter_mut().for_each(|q| *q *= c * c),
            Family::AxisymmetricSeries | Family::Tabulated => spec.params.iter_mut().for_each(|p| *p *= c),
            Family::BandExtension => {
                spec.params[3] *= c;
                let base = self.band().unwrap().base.scaled(c)?;
                spec.params[0] = base.family().code();
                spec.params.truncate(4);
                spec.params.extend_from_slice(base.params());
            }
        }
        Self::from_spec(spec)
    }

    pub fn spec(&self) -> &AnisotropySpec {
        &self.spec
    }

    pub fn ambient_dim(&self) -> usize {
        self.spec.ambient_dim
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn params(&self) -> &[f64] {
        &self.spec.params
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.spec.derivative_mode
    }

    pub fn fd_step(&self) -> f64 {
        self.spec.fd_step
    }

    pub fn is_isotropic(&self) -> bool {
        self.spec.family == Family::Isotropic
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.spec.derivative_mode == DerivativeMode::Analytic
    }

    fn band(&self) -> Option<&Band> {
        match &self.kind {
            Kind::Band(b) => Some(b),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.spec).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: AnisotropySpec = serde_json::from_str(s)?;
        Self::from_spec(spec)
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: v.len() });
        }
        Ok(())
    }

    fn normalized(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(u)?;
        let norm = u.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitInput { norm });
        }
        Ok(u / norm)
    }

    /// `F` on the unit sphere (no unit check; `u` must be nonzero).
    fn sphere_value(&self, u: &DVector<f64>) -> f64 {
        self.homogeneous(&(u / u.norm()))
    }

    /// The 1-homogeneous extension `F̂(y) = |y| F(y/|y|)`.
    pub fn homogeneous(&self, y: &DVector<f64>) -> f64 {
        let r = y.norm();
        if r == 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Isotropic => r,
            Kind::Quadratic(q) => y.iter().zip(q).map(|(yi, qi)| qi * yi * yi).sum::<f64>().sqrt(),
            Kind::Axial(p) => r * p.eval(y[y.len() - 1] / r).0,
            Kind::Band(b) => {
                let d = y.len();
                let x = y.rows(0, d - 1).into_owned();
                let xn = x.norm();
                let theta = y[d - 1].atan2(xn).abs();
                let g = if theta <= b.halfwidth {
                    b.base.sphere_value(&x)
                } else if theta >= b.halfwidth + b.ramp || xn == 0.0 {
                    b.plateau
                } else {
                    let s = quintic_ramp((theta - b.halfwidth) / b.ramp);
                    (1.0 - s) * b.base.sphere_value(&x) + s * b.plateau
                };
                r * g
            }
        }
    }

    /// `F(u)` at a unit vector.
    pub fn value(&self, u: &DVector<f64>) -> Result<f64> {
        let u = self.normalized(u)?;
        Ok(self.homogeneous(&u))
    }

    /// Value, ambient gradient, ambient Hessian of `F̂` at a unit `u`.
    fn analytic_jet(&self, u: &DVector<f64>) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
        let d = u.len();
        let eye = DMatrix::<f64>::identity(d, d);
        match &self.kind {
            Kind::Isotropic => Some((1.0, u.clone(), &eye - u * u.transpose())),
            Kind::Quadratic(q) => {
                let qy = DVector::from_iterator(d, u.iter().zip(q).map(|(yi, qi)| qi * yi));
                let f = qy.dot(u).sqrt();
                let grad = &qy / f;
                let hess = DMatrix::from_diagonal(&DVector::from_column_slice(q)) / f - &qy * qy.transpose() / (f * f * f);
                Some((f, grad, hess))
            }
            Kind::Axial(p) => {
                let z = u[d - 1];
                let (f, f1, f2) = p.eval(z);
                let mut w = -u * z;
                w[d - 1] += 1.0;
                let grad = u * f + &w * f1;
                let hess = (&eye - u * u.transpose()) * (f - z * f1) + &w * w.transpose() * f2;
                Some((f, grad, hess))
            }
            Kind::Band(_) => None,
        }
    }

    fn fd_gradient(&self, u: &DVector<f64>, h: f64) -> DVector<f64> {
        let d = u.len();
        DVector::from_iterator(
            d,
            (0..d).map(|i| {
                let mut p = u.clone();
                let mut m = u.clone();
                p[i] += h;
                m[i] -= h;
                (self.homogeneous(&p) - self.homogeneous(&m)) / (2.0 * h)
            }),
        )
    }

    fn fd_hessian(&self, u: &DVector<f64>, h: f64) -> DMatrix<f64> {
        let d = u.len();
        let mut hess = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let at = |si: f64, sj: f64| {
                    let mut y = u.clone();
                    y[i] += si * h;
                    y[j] += sj * h;
                    self.homogeneous(&y)
                };
                let v = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        hess
    }

    /// Value, ambient gradient (`= φ`) and ambient Hessian of `F̂` at a unit vector.
    fn jet(&self, u: &DVector<f64>) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let jet = match (self.spec.derivative_mode, self.analytic_jet(u)) {
            (DerivativeMode::Analytic, Some(j)) => j,
            _ => {
                let h = self.spec.fd_step;
                (
                    self.homogeneous(u),
                    self.fd_gradient(u, h),
                    self.fd_hessian(u, h * HESSIAN_STEP_FACTOR),
                )
            }
        };
        if !jet.0.is_finite() || jet.1.iter().any(|v| !v.is_finite()) || jet.2.iter().any(|v| !v.is_finite()) {
            return Err(Error::DerivativeFailure { context: format!("{:?}", u.as_slice()) });
        }
        Ok(jet)
    }

    /// Ambient Hessian of `F̂` at a unit vector, i.e. `A_F` extended by zero along `u`.
    pub fn hessian(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let u = self.normalized(u)?;
        Ok(linalg::symmetrize(&self.jet(&u)?.2))
    }

    pub fn evaluate(&self, u: &DVector<f64>) -> Result<AnisotropyEval> {
        let u = self.normalized(u)?;
        let (value, grad, hess) = self.jet(&u)?;
        let hessian = linalg::symmetrize(&hess);
        let gradient = &grad - &u * u.dot(&grad);
        let phi = &gradient + &u * value;
        let basis = linalg::orthonormal_complement(&u);
        let a_matrix = linalg::symmetrize(&(&basis * &hessian * basis.transpose()));
        let min_eigenvalue = linalg::min_sym_eigenvalue(&a_matrix);
        let c_matrix = linalg::sym_sqrt(&a_matrix).ok();
        Ok(AnisotropyEval { u, value, gradient, phi, hessian, basis, a_matrix, c_matrix, min_eigenvalue })
    }

    /// The Wulff map `φ(u) = DF_u + F(u) u`.
    pub fn phi(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let u = self.normalized(u)?;
        self.phi_unit(&u)
    }

    fn phi_unit(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let (value, grad) = match (self.spec.derivative_mode, self.analytic_jet(u)) {
            (DerivativeMode::Analytic, Some((v, g, _))) => (v, g),
            _ => (self.homogeneous(u), self.fd_gradient(u, self.spec.fd_step)),
        };
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::DerivativeFailure { context: format!("{:?}", u.as_slice()) });
        }
        let gradient = &grad - u * u.dot(&grad);
        Ok(gradient + u * value)
    }

    /// The dual norm `F*(y) = sup_{|z|=1} ⟨y, z⟩ / F(z)`.
    ///
    /// Equivalently `1 / min F̂(z)` over the plane `⟨y, z⟩ = 1`, a convex problem. Seeds
    /// with the best point of a level-3 geodesic grid (or its analogue in other dimensions)
    /// and runs damped Newton on the plane.
    pub fn dual_norm(&self, y: &DVector<f64>) -> Result<DualNorm> {
        self.check_dim(y)?;
        let d = y.len();
        let ynorm = y.norm();
        if ynorm == 0.0 {
            return Ok(DualNorm { value: 0.0, maximizer: vec![0.0; d], iterations: 0, converged: true });
        }
        let seeds = match d {
            2 => sphere::circle_grid(256),
            3 => sphere::icosphere(3).0,
            _ => sphere::low_discrepancy_sphere(d, 4000),
        };
        let seed = seeds
            .into_iter()
            .map(|s| (y.dot(&s) / self.homogeneous(&s), s))
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .map(|(_, s)| s)
            .unwrap();
        let mut z = &seed / y.dot(&seed);
        // rows span y⊥
        let p = linalg::orthonormal_complement(y);
        let mut value = self.homogeneous(&z);
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < DUAL_NORM_MAX_ITER {
            iterations += 1;
            let r = z.norm();
            let (_, grad, hess) = self.jet(&(&z / r))?;
            let g = &p * &grad;
            residual = g.norm();
            if residual < 1e-14 {
                break;
            }
            let h = linalg::symmetrize(&(&p * hess * p.transpose())) / r;
            let dir = match h.clone().cholesky() {
                Some(c) => -c.solve(&g),
                None => -&g * r,
            };
            let slope = g.dot(&dir);
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-12 {
                let cand = &z + p.transpose() * (&dir * t);
                let v = self.homogeneous(&cand);
                if v <= value + 1e-4 * t * slope {
                    moved = v < value || (&cand - &z).norm() > 0.0;
                    z = cand;
                    value = v;
                    break;
                }
                t *= 0.5;
            }
            if !moved || (&dir * t).norm() < 1e-15 * z.norm() {
                break;
            }
        }
        Ok(DualNorm {
            value: 1.0 / value,
            maximizer: z.normalize().iter().copied().collect(),
            iterations,
            converged: residual < DUAL_NORM_RESIDUAL_TOL,
        })
    }

    /// Minimum eigenvalue of `A_F` over a quasi-uniform sphere grid.
    pub fn convexity_audit(&self, grid_resolution: usize) -> Result<ConvexityReport> {
        self.convexity_audit_with_tol(grid_resolution, DEFAULT_CONVEXITY_TOL)
    }

    pub fn convexity_audit_with_tol(&self, grid_resolution: usize, tolerance: f64) -> Result<ConvexityReport> {
        if grid_resolution < 8 {
            return Err(Error::InvalidParams("grid_resolution must be >= 8".into()));
        }
        let key = (grid_resolution, tolerance.to_bits());
        if let Some(hit) = self.audits.0.lock().unwrap().iter().find(|c| (c.0, c.1) == key) {
            return Ok(hit.2.clone());
        }
        let (points, _) = sphere::sphere_grid(self.ambient_dim(), grid_resolution);
        let report = self.audit_points(&points, tolerance)?;
        self.audits.0.lock().unwrap().push((key.0, key.1, report.clone()));
        Ok(report)
    }

    pub(crate) fn audit_points(&self, points: &[DVector<f64>], tolerance: f64) -> Result<ConvexityReport> {
        let mins: Vec<(f64, usize)> = points
            .par_iter()
            .enumerate()
            .map(|(i, u)| {
                let h = linalg::symmetrize(&self.jet(u)?.2);
                let e = linalg::orthonormal_complement(u);
                Ok((linalg::min_sym_eigenvalue(&(&e * h * e.transpose())), i))
            })
            .collect::<Result<_>>()?;
        let (min_eigenvalue, at) = mins
            .into_iter()
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
            .unwrap_or((f64::INFINITY, 0));
        Ok(ConvexityReport {
            min_eigenvalue,
            argmin: points.get(at).map(|p| p.iter().copied().collect()).unwrap_or_default(),
            points_checked: points.len(),
            tolerance,
            pass: min_eigenvalue > tolerance,
        })
    }

    /// Audit that returns an error instead of a failing report.
    pub fn require_convex(&self, grid_resolution: usize) -> Result<ConvexityReport> {
        let report = self.convexity_audit(grid_resolution)?;
        if !report.pass {
            return Err(Error::ConvexityViolation {
                min_eigenvalue: report.min_eigenvalue,
                at: report.argmin.clone(),
            });
        }
        Ok(report)
    }

    /// Range of `F` over a sphere grid, used to pick band-extension plateaus.
    pub(crate) fn value_range(&self, grid_resolution: usize) -> (f64, f64) {
        let (points, _) = sphere::sphere_grid(self.ambient_dim(), grid_resolution);
        points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| {
            let v = self.homogeneous(u);
            (lo.min(v), hi.max(v))
        })
    }
}
