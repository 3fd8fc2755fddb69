//! Focal submanifolds at `t = 1/λ`, their leaves, the focal second fundamental form and
//! the Cartan-type identity.
//!
//! Along a leaf `L` of the curvature distribution `D` of `λ`, `x_t` is constant and
//! `x + φ(ν)/λ = q`, i.e. `λ(x − q) = −φ(ν)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::anisotropy::AnisotropyFunction;
use crate::error::{Error, Result};
use crate::hypersurface::{self, Symmetrized, CROSS_CHECK_STEP, DEFAULT_CLUSTER_TOL};
use crate::linalg;
use crate::parallel::{matrix_rows, DEGENERACY_TOL};
use crate::patch::ImmersionPatch;

pub const LEAF_STEP: f64 = 1e-2;
pub const LEAF_DRIFT_TOL: f64 = 1e-5;
pub const MIN_LEAF_STEP: f64 = 1e-6;
/// Steps grow after each accepted step up to this length; the drift test still decides.
pub const MAX_LEAF_STEP: f64 = 8e-2;
pub const DEFAULT_ISO_TOL: f64 = 1e-5;
pub const DEFAULT_LEAF_RESOLUTION: usize = 64;
/// Steps between recorded leaf samples before thinning.
const MAX_LEAF_STEPS: usize = 4000;

#[derive(Debug, Clone)]
pub struct FocalOptions {
    pub leaf_resolution: usize,
    pub iso_tol: f64,
    /// Require constant curvatures along the leaf before building `II_ν`.
    pub require_isoparametric: bool,
    pub antipodal_pairs: usize,
    /// Tolerance for recognising `λ*` among the curvatures.
    pub cluster_tol: f64,
}

impl Default for FocalOptions {
    fn default() -> Self {
        FocalOptions {
            leaf_resolution: DEFAULT_LEAF_RESOLUTION,
            iso_tol: DEFAULT_ISO_TOL,
            require_isoparametric: true,
            antipodal_pairs: 5,
            cluster_tol: DEFAULT_CLUSTER_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafSample {
    pub params: Vec<f64>,
    pub x: Vec<f64>,
    pub normal: Vec<f64>,
}

/// `II_ν` of the focal submanifold at one point of a leaf.
#[derive(Debug, Clone, Serialize)]
pub struct SecondForm {
    pub params: Vec<f64>,
    pub normal: Vec<f64>,
    /// `Ã_F = (⟨ε_a, ε_b⟩)` over the complementary eigendirections
    pub reduced_a: Vec<Vec<f64>>,
    /// diagonal of `Ã_F⁻¹`
    pub reduced_a_inv_diag: Vec<f64>,
    /// complementary curvatures `λ_a`
    pub lambdas: Vec<f64>,
    /// `⟨dx_t(ẽ_a), −dν(ẽ_b)⟩`
    pub ii_matrix: Vec<Vec<f64>>,
    /// `C̃⁻¹ Λ̃(I − tΛ̃)⁻¹ C̃⁻¹`
    pub ii_closed_form: Vec<Vec<f64>>,
    pub ii_deviation: f64,
    /// `max |⟨dx_t ẽ_a, dx_t ẽ_b⟩ − δ_ab|`
    pub basis_orthonormality: f64,
    pub trace: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AntipodalPair {
    pub u: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub trace_u: f64,
    pub trace_minus_u: f64,
    /// `|ν(p2) + u|`
    pub normal_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FocalData {
    pub lambda_star: f64,
    pub t: f64,
    pub multiplicity: usize,
    pub seed_params: Vec<f64>,
    pub q: Vec<f64>,
    pub leaf_samples: Vec<LeafSample>,
    /// `max |x_t − q|` over the leaf samples
    pub leaf_drift: f64,
    /// `max |λ(x − q) + φ(ν)|` over the leaf samples
    pub leaf_equation_residual: f64,
    /// smallest singular value of `dν` restricted to `D` along the leaf
    pub gauss_map_min_singular: f64,
    /// number of singular values of `dx_t` below the degeneracy tolerance at the seed
    pub focal_rank_deficiency: usize,
    /// largest principal angle between `dx(D) ⊕ ν` and the normal space of `x_t(M)`
    pub d_normal_angle: f64,
    pub iso_drift: Option<f64>,
    pub second_form: Option<SecondForm>,
    /// `Γ_F^k` for the groups other than `λ*`, in descending order of `λ_k`
    pub gamma: Vec<f64>,
    pub gamma_lambdas: Vec<f64>,
    pub cartan_residual: Option<f64>,
    pub antipodal_pairs: Vec<AntipodalPair>,
    /// `max |tr(II_u) + tr(II_{−u})|`
    pub trace_antisymmetry: Option<f64>,
}

impl FocalData {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("focal data serializes")
    }

    pub fn ii_max_abs(&self) -> Option<f64> {
        self.second_form
            .as_ref()
            .map(|s| s.ii_matrix.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())))
    }
}

struct Ctx<'a> {
    f: &'a AnisotropyFunction,
    patch: &'a ImmersionPatch,
    patch_t: ImmersionPatch,
    lambda: f64,
    t: f64,
    match_tol: f64,
}

impl<'a> Ctx<'a> {
    fn new(f: &'a AnisotropyFunction, patch: &'a ImmersionPatch, lambda: f64) -> Result<Self> {
        if lambda == 0.0 {
            return Err(Error::ZeroCurvature);
        }
        let t = 1.0 / lambda;
        Ok(Ctx {
            f,
            patch,
            patch_t: patch.translated(f, t),
            lambda,
            t,
            match_tol: 1e-3 * lambda.abs().max(1.0),
        })
    }

    fn sym(&self, p: &[f64]) -> Result<Symmetrized> {
        hypersurface::symmetrized(self.f, self.patch, p)
    }

    /// Indices of the eigenvalues belonging to `λ*` and the rest.
    fn split(&self, sym: &Symmetrized) -> (Vec<usize>, Vec<usize>) {
        (0..sym.lambdas.len()).partition(|&i| (sym.lambdas[i] - self.lambda).abs() <= self.match_tol)
    }

    fn x_t(&self, p: &[f64]) -> Result<DVector<f64>> {
        let nu = self.patch.normal(p)?;
        Ok(self.patch.position(p)? + self.f.phi(&nu)? * self.t)
    }

    /// Unit (in the induced metric) chart vector in `D` closest to `d`.
    fn leaf_direction(&self, p: &[f64], d: &DVector<f64>) -> Result<DVector<f64>> {
        let sym = self.sym(p)?;
        let (focal, _) = self.split(&sym);
        if focal.is_empty() {
            return Err(Error::NotACurvature { lambda: self.lambda, params: p.to_vec() });
        }
        let frame = sym.eigenframe();
        let xi = frame.select_columns(&focal);
        let g = sym.jet.dx.transpose() * &sym.jet.dx;
        let gram = xi.transpose() * &g * &xi;
        let coeff = gram
            .try_inverse()
            .ok_or_else(|| Error::RankDeficient { params: p.to_vec(), sigma: 0.0 })?
            * xi.transpose()
            * &g
            * d;
        let v = &xi * coeff;
        let len = (v.transpose() * &g * &v)[(0, 0)].sqrt();
        if !(len > 1e-12) {
            return Err(Error::RankDeficient { params: p.to_vec(), sigma: len });
        }
        Ok(v / len)
    }
}

fn add(p: &[f64], v: &DVector<f64>, s: f64) -> Vec<f64> {
    p.iter().zip(v.iter()).map(|(a, b)| a + s * b).collect()
}

fn inside(domain: &[(f64, f64)], p: &[f64]) -> bool {
    domain.iter().zip(p).all(|(&(a, b), &v)| v >= a && v <= b)
}

/// One RK4 step of the field `p ↦ Π_D(p)·d`, with `d` frozen over the step.
fn rk4_step(ctx: &Ctx, p: &[f64], d: &DVector<f64>, h: f64) -> Result<Vec<f64>> {
    let k1 = ctx.leaf_direction(p, d)?;
    let k2 = ctx.leaf_direction(&add(p, &k1, h / 2.0), d)?;
    let k3 = ctx.leaf_direction(&add(p, &k2, h / 2.0), d)?;
    let k4 = ctx.leaf_direction(&add(p, &k3, h), d)?;
    let v = (k1 + k2 * 2.0 + k3 * 2.0 + k4) / 6.0;
    Ok(add(p, &v, h))
}

/// Integrate one leaf curve starting along `d0`; returns the visited chart points.
fn leaf_curve(ctx: &Ctx, seed: &[f64], d0: &DVector<f64>, q: &DVector<f64>) -> Result<Vec<Vec<f64>>> {
    let domain = ctx.patch.domain();
    let u0 = ctx.patch.normal(seed)?;
    let mut p = seed.to_vec();
    let mut d = ctx.leaf_direction(&p, d0)?;
    let mut out = Vec::new();
    let mut steps = 0;
    let mut h = LEAF_STEP;
    while steps < MAX_LEAF_STEPS {
        let next = loop {
            let cand = match rk4_step(ctx, &p, &d, h) {
                Ok(c) => c,
                Err(Error::RankDeficient { .. }) => return Ok(out),
                Err(e) => return Err(e),
            };
            let drift = (ctx.x_t(&cand)? - q).norm();
            if drift <= LEAF_DRIFT_TOL {
                break cand;
            }
            h *= 0.5;
            if h < MIN_LEAF_STEP {
                return Err(Error::LeafDrift { drift, step: h });
            }
        };
        if !inside(domain, &next) {
            break;
        }
        d = match ctx.leaf_direction(&next, &d) {
            Ok(d) => d,
            Err(Error::RankDeficient { .. }) => break,
            Err(e) => return Err(e),
        };
        p = next;
        steps += 1;
        h = (h * 1.5).min(MAX_LEAF_STEP);
        out.push(p.clone());
        // stop once the normal has turned half way round
        if ctx.patch.normal(&p)?.dot(&u0) < -0.999 {
            break;
        }
    }
    Ok(out)
}

fn thin<T: Clone>(items: &[T], count: usize) -> Vec<T> {
    if items.len() <= count || count == 0 {
        return items.to_vec();
    }
    (0..count).map(|i| items[i * (items.len() - 1) / (count - 1).max(1)].clone()).collect()
}

/// Focal point `q = x_t(seed)` with `t = 1/λ*` and samples of the leaf through `seed`.
pub fn focal_map(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    lambda_star: f64,
    seed_params: &[f64],
    leaf_resolution: usize,
) -> Result<FocalData> {
    let options = FocalOptions { leaf_resolution, ..FocalOptions::default() };
    focal_map_with(f, patch, lambda_star, seed_params, &options)
}

pub fn focal_map_with(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    lambda_star: f64,
    seed_params: &[f64],
    options: &FocalOptions,
) -> Result<FocalData> {
    let ctx = Ctx::new(f, patch, lambda_star)?;
    let sym = ctx.sym(seed_params)?;
    let spectrum = hypersurface::CurvatureSpectrum::from_lambdas(sym.lambdas.clone(), DMatrix::zeros(0, 0), options.cluster_tol);
    if spectrum.group_of(lambda_star, options.cluster_tol.max(1e-9 * lambda_star.abs())).is_none() {
        return Err(Error::NotACurvature { lambda: lambda_star, params: seed_params.to_vec() });
    }
    let (focal, rest) = ctx.split(&sym);
    let m = focal.len();
    let q = ctx.x_t(seed_params)?;

    // leaf curves along each eigendirection of D at the seed, both ways
    let frame = sym.eigenframe();
    let mut points = vec![seed_params.to_vec()];
    for &i in &focal {
        let d = frame.column(i).into_owned();
        for sign in [1.0, -1.0] {
            points.extend(leaf_curve(&ctx, seed_params, &(&d * sign), &q)?);
        }
    }
    let points = thin(&points, options.leaf_resolution.max(2));

    let mut leaf_samples = Vec::with_capacity(points.len());
    let mut leaf_drift: f64 = 0.0;
    let mut leaf_equation_residual: f64 = 0.0;
    let mut gauss_map_min_singular = f64::INFINITY;
    for p in &points {
        let s = ctx.sym(p)?;
        let x = s.jet.x.clone();
        let nu = s.normal.clone();
        let phi = f.phi(&nu)?;
        leaf_drift = leaf_drift.max((&x + &phi * ctx.t - &q).norm());
        leaf_equation_residual = leaf_equation_residual.max(((&x - &q) * lambda_star + &phi).norm());
        // dν on D, measured on an orthonormal basis of dx(D)
        let (fi, _) = ctx.split(&s);
        if !fi.is_empty() {
            let xi = s.eigenframe().select_columns(&fi);
            let qa = (&s.jet.dx * &xi).qr().q();
            if let Some(pinv) = linalg::left_inverse(&s.jet.dx) {
                let dnu = -&s.jet.dx * &s.w;
                gauss_map_min_singular =
                    gauss_map_min_singular.min(linalg::smallest_singular_value(&(dnu * pinv * qa)));
            }
        }
        leaf_samples.push(LeafSample {
            params: p.clone(),
            x: x.iter().copied().collect(),
            normal: nu.iter().copied().collect(),
        });
    }

    // dx_t loses exactly the rank of D
    let (_, dx_t) = ctx.patch_t.first(seed_params)?;
    let svd = dx_t.clone().svd(true, false);
    let focal_rank_deficiency = svd.singular_values.iter().filter(|&&s| s < DEGENERACY_TOL).count();

    let dim = patch.ambient_dim();
    let u_mat = svd.u.unwrap();
    // complement of the focal tangent space in R^{n+1}
    let tangent: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] >= DEGENERACY_TOL).collect();
    let tan = u_mat.select_columns(&tangent);
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for axis in 0..dim {
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        for _ in 0..2 {
            for c in tan.column_iter() {
                let k = c.dot(&v);
                v.axpy(-k, &c, 1.0);
            }
            for c in &cols {
                let k = c.dot(&v);
                v.axpy(-k, c, 1.0);
            }
        }
        let n = v.norm();
        if n > 1e-6 && cols.len() < dim - tangent.len() {
            cols.push(v / n);
        }
    }
    let normal_basis = if cols.is_empty() { DMatrix::zeros(dim, 0) } else { DMatrix::from_columns(&cols) };
    let mut d_span = (&sym.jet.dx * frame.select_columns(&focal)).insert_column(m, 0.0);
    d_span.set_column(m, &sym.normal);
    let d_normal_angle = if normal_basis.ncols() == d_span.ncols() && !rest.is_empty() {
        linalg::max_principal_angle(&d_span, &normal_basis)
    } else {
        0.0
    };

    Ok(FocalData {
        lambda_star,
        t: ctx.t,
        multiplicity: m,
        seed_params: seed_params.to_vec(),
        q: q.iter().copied().collect(),
        leaf_samples,
        leaf_drift,
        leaf_equation_residual,
        gauss_map_min_singular,
        focal_rank_deficiency,
        d_normal_angle,
        iso_drift: None,
        second_form: None,
        gamma: vec![],
        gamma_lambdas: vec![],
        cartan_residual: None,
        antipodal_pairs: vec![],
        trace_antisymmetry: None,
    })
}

/// Chart derivative of `ν`, columns `∂ν/∂p_i`.
fn d_nu(patch: &ImmersionPatch, p: &[f64]) -> Result<DMatrix<f64>> {
    let n = p.len();
    let mut out = DMatrix::zeros(patch.ambient_dim(), n);
    for i in 0..n {
        let mut err = None;
        let col = linalg::central4_vec(
            |s| {
                let mut q = p.to_vec();
                q[i] += s;
                patch.normal(&q).unwrap_or_else(|e| {
                    err = Some(e);
                    DVector::zeros(patch.ambient_dim())
                })
            },
            CROSS_CHECK_STEP,
        );
        if let Some(e) = err {
            return Err(e);
        }
        out.set_column(i, &col);
    }
    Ok(out)
}

fn second_form_ctx(ctx: &Ctx, p: &[f64]) -> Result<SecondForm> {
    let sym = ctx.sym(p)?;
    let (_, rest) = ctx.split(&sym);
    let r = rest.len();
    let a = &sym.eval.a_matrix;
    let yc = sym.y.select_columns(&rest);
    let reduced_a = linalg::symmetrize(&(yc.transpose() * a * &yc));
    let lambdas: Vec<f64> = rest.iter().map(|&i| sym.lambdas[i]).collect();
    let normal: Vec<f64> = sym.normal.iter().copied().collect();
    if r == 0 {
        return Ok(SecondForm {
            params: p.to_vec(),
            normal,
            reduced_a: vec![],
            reduced_a_inv_diag: vec![],
            lambdas,
            ii_matrix: vec![],
            ii_closed_form: vec![],
            ii_deviation: 0.0,
            basis_orthonormality: 0.0,
            trace: 0.0,
        });
    }
    let c_red = linalg::sym_sqrt(&reduced_a)?;
    let c_red_inv = c_red
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::ConvexityViolation { min_eigenvalue: 0.0, at: normal.clone() })?;
    let a_inv = reduced_a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::ConvexityViolation { min_eigenvalue: 0.0, at: normal.clone() })?;
    let shrink = DMatrix::from_diagonal(&DVector::from_iterator(r, lambdas.iter().map(|l| 1.0 / (1.0 - ctx.t * l))));
    let ratio = DMatrix::from_diagonal(&DVector::from_iterator(r, lambdas.iter().map(|l| l / (1.0 - ctx.t * l))));
    let ii_closed = &c_red_inv * &ratio * &c_red_inv;

    // ẽ = ε (I − tΛ̃)⁻¹ C̃⁻¹ as chart vectors
    let eps = &sym.c * &yc;
    let e_tilde = eps * &shrink * &c_red_inv;
    let xi = &sym.b_inv * e_tilde;
    let (_, dx_t) = ctx.patch_t.first(p)?;
    let dnu = d_nu(ctx.patch, p)?;
    let img = &dx_t * &xi;
    let ii_direct = img.transpose() * (-dnu * &xi);
    let gram = img.transpose() * &img;
    let basis_orthonormality = linalg::max_abs(&(gram - DMatrix::<f64>::identity(r, r)));
    let ii_deviation = linalg::max_abs(&(&ii_direct - &ii_closed));
    let trace = (0..r).map(|i| a_inv[(i, i)] * ratio[(i, i)]).sum();
    Ok(SecondForm {
        params: p.to_vec(),
        normal,
        reduced_a: matrix_rows(&reduced_a),
        reduced_a_inv_diag: (0..r).map(|i| a_inv[(i, i)]).collect(),
        lambdas,
        ii_matrix: matrix_rows(&ii_direct),
        ii_closed_form: matrix_rows(&ii_closed),
        ii_deviation,
        basis_orthonormality,
        trace,
    })
}

/// `II_ν` at a single point without any leaf or isoparametric check.
pub fn second_form_at(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    lambda_star: f64,
    params: &[f64],
) -> Result<SecondForm> {
    let ctx = Ctx::new(f, patch, lambda_star)?;
    second_form_ctx(&ctx, params)
}

fn iso_drift(ctx: &Ctx, data: &FocalData) -> Result<f64> {
    let base = ctx.sym(&data.seed_params)?.lambdas;
    let mut drift: f64 = 0.0;
    for s in &data.leaf_samples {
        let l = ctx.sym(&s.params)?.lambdas;
        for (a, b) in l.iter().zip(&base) {
            drift = drift.max((a - b).abs());
        }
    }
    Ok(drift)
}

/// Focal map plus `II_ν` at the seed, both by direct assembly and closed form.
pub fn focal_second_form(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    lambda_star: f64,
    seed_params: &[f64],
) -> Result<FocalData> {
    focal_second_form_with(f, patch, lambda_star, seed_params, &FocalOptions::default())
}

pub fn focal_second_form_with(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    lambda_star: f64,
    seed_params: &[f64],
    options: &FocalOptions,
) -> Result<FocalData> {
    let mut data = focal_map_with(f, patch, lambda_star, seed_params, options)?;
    let ctx = Ctx::new(f, patch, lambda_star)?;
    let drift = iso_drift(&ctx, &data)?;
    data.iso_drift = Some(drift);
    if options.require_isoparametric && drift > options.iso_tol {
        return Err(Error::NotIsoparametric { drift, tol: options.iso_tol });
    }
    data.second_form = Some(second_form_ctx(&ctx, seed_params)?);
    Ok(data)
}

/// Leaf point with `ν = target`, by damped Gauss-Newton along `D` followed by a Newton
/// projection back onto `x_t = q` along the complementary directions.
fn find_on_leaf(ctx: &Ctx, start: &[f64], target: &DVector<f64>, q: &DVector<f64>) -> Result<Vec<f64>> {
    let mut p = start.to_vec();
    let mut best = f64::INFINITY;
    for _ in 0..80 {
        let sym = ctx.sym(&p)?;
        let r = &sym.normal - target;
        let rn = r.norm();
        best = best.min(rn);
        let drift = (ctx.x_t(&p)? - q).norm();
        if rn < 1e-11 && drift < 1e-9 {
            return Ok(p);
        }
        let (focal, rest) = ctx.split(&sym);
        let frame = sym.eigenframe();
        let xi = frame.select_columns(&focal);
        let dnu = -&sym.jet.dx * &sym.w;
        let j = &dnu * &xi;
        let m = xi.ncols();
        let jtj = j.transpose() * &j + DMatrix::<f64>::identity(m, m) * 1e-12;
        let step = jtj.try_inverse().map(|inv| -(inv * j.transpose() * &r)).unwrap_or_else(|| DVector::zeros(m));
        let mut dp = &xi * step;
        let len = dp.norm();
        if len > 0.5 {
            dp *= 0.5 / len;
        }
        let mut scale = 1.0;
        let mut moved = false;
        while scale > 1e-4 {
            let cand = add(&p, &dp, scale);
            if let Ok(nu) = ctx.patch.normal(&cand) {
                if (nu - target).norm() < rn {
                    p = cand;
                    moved = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        // back onto the leaf
        for _ in 0..3 {
            if rest.is_empty() {
                break;
            }
            let e = ctx.x_t(&p)? - q;
            if e.norm() < 1e-13 {
                break;
            }
            let s = ctx.sym(&p)?;
            let (_, rest_here) = ctx.split(&s);
            let xc = s.eigenframe().select_columns(&rest_here);
            let (_, dx_t) = ctx.patch_t.first(&p)?;
            let jc = dx_t * &xc;
            match linalg::left_inverse(&jc) {
                Some(pinv) => p = add(&p, &(&xc * (pinv * -e)), 1.0),
                None => break,
            }
        }
        if !moved && rn > 1e-11 {
            break;
        }
    }
    let sym = ctx.sym(&p)?;
    let rn = (&sym.normal - target).norm();
    if rn < 1e-9 && (ctx.x_t(&p)? - q).norm() < 1e-7 {
        Ok(p)
    } else {
        Err(Error::AntipodeNotFound { residual: best.min(rn) })
    }
}

/// Complete focal data: `II_ν`, `Γ_F^k`, the Cartan residual and the trace antisymmetry
/// `tr(II_{−u}) = −tr(II_u)` at several antipodal pairs of the leaf.
pub fn cartan_residual(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    lambda_star: f64,
    seed_params: &[f64],
) -> Result<FocalData> {
    cartan_residual_with(f, patch, lambda_star, seed_params, &FocalOptions::default())
}

pub fn cartan_residual_with(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    lambda_star: f64,
    seed_params: &[f64],
    options: &FocalOptions,
) -> Result<FocalData> {
    let mut data = focal_second_form_with(f, patch, lambda_star, seed_params, options)?;
    let ctx = Ctx::new(f, patch, lambda_star)?;
    let q = DVector::from_column_slice(&data.q);

    let antipode = |p1: &[f64]| -> Result<(DVector<f64>, Vec<f64>)> {
        let u = ctx.patch.normal(p1)?;
        let target = -&u;
        let start = data
            .leaf_samples
            .iter()
            .min_by(|a, b| {
                let da = (DVector::from_column_slice(&a.normal) - &target).norm();
                let db = (DVector::from_column_slice(&b.normal) - &target).norm();
                da.partial_cmp(&db).unwrap()
            })
            .map(|s| s.params.clone())
            .unwrap_or_else(|| p1.to_vec());
        Ok((u, find_on_leaf(&ctx, &start, &target, &q)?))
    };

    // Γ_F^k from the seed and its antipode
    let (_, p2) = antipode(seed_params)?;
    let sf1 = second_form_ctx(&ctx, seed_params)?;
    let sf2 = second_form_ctx(&ctx, &p2)?;
    let mut gamma = Vec::new();
    let mut gamma_lambdas = Vec::new();
    let mut i = 0;
    while i < sf1.lambdas.len() {
        let lk = sf1.lambdas[i];
        let mut g = 0.0;
        let mut j = i;
        while j < sf1.lambdas.len() && (sf1.lambdas[j] - lk).abs() <= options.cluster_tol.max(ctx.match_tol) {
            g += sf1.reduced_a_inv_diag[j] + sf2.reduced_a_inv_diag.get(j).copied().unwrap_or(f64::NAN);
            j += 1;
        }
        gamma.push(g);
        gamma_lambdas.push(lk);
        i = j;
    }
    let residual = gamma.iter().zip(&gamma_lambdas).map(|(g, l)| g * l / (1.0 - ctx.t * l)).sum::<f64>();
    data.gamma = gamma;
    data.gamma_lambdas = gamma_lambdas;
    data.cartan_residual = Some(residual);

    // trace antisymmetry at several pairs spread over the leaf
    let picks = thin(&data.leaf_samples, options.antipodal_pairs.max(1));
    let mut pairs = Vec::new();
    let mut worst: f64 = 0.0;
    for s in picks {
        let (u, p2) = antipode(&s.params)?;
        let tu = second_form_ctx(&ctx, &s.params)?.trace;
        let tm = second_form_ctx(&ctx, &p2)?.trace;
        worst = worst.max((tu + tm).abs());
        let normal_residual = (ctx.patch.normal(&p2)? + &u).norm();
        pairs.push(AntipodalPair {
            u: u.iter().copied().collect(),
            p1: s.params.clone(),
            p2,
            trace_u: tu,
            trace_minus_u: tm,
            normal_residual,
        });
    }
    data.antipodal_pairs = pairs;
    data.trace_antisymmetry = Some(worst);
    Ok(data)
}
