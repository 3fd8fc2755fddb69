//! Fundamental forms, the shape operator `T = −dν`, the F-Weingarten operator
//! `S_F = A_F ∘ T` and anisotropic principal curvatures.
//!
//! Sign dictionary: `T = −dν`, so the outward-oriented unit sphere has `T = −I` and the
//! outward Wulff shape has every anisotropic principal curvature equal to `−1`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::anisotropy::{AnisotropyEval, AnisotropyFunction};
use crate::error::{Error, Result};
use crate::linalg;
use crate::patch::{self, ImmersionPatch, PatchJet};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;
pub const RANK_TOL: f64 = 1e-8;
/// Step for the chart derivative of `φ∘ν` in cross-check mode.
pub const CROSS_CHECK_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct Frame {
    pub x: DVector<f64>,
    pub dx: DMatrix<f64>,
    pub normal: DVector<f64>,
    pub metric: DMatrix<f64>,
}

fn check_rank(params: &[f64], dx: &DMatrix<f64>) -> Result<()> {
    let sigma = linalg::smallest_singular_value(dx);
    if !(sigma >= RANK_TOL) {
        return Err(Error::RankDeficient { params: params.to_vec(), sigma });
    }
    Ok(())
}

pub fn frame_at(patch: &ImmersionPatch, params: &[f64]) -> Result<Frame> {
    let (x, dx) = patch.first(params)?;
    check_rank(params, &dx)?;
    let normal = patch.normal(params)?;
    let metric = dx.transpose() * &dx;
    Ok(Frame { x, dx, normal, metric })
}

fn jet_and_normal(patch: &ImmersionPatch, params: &[f64]) -> Result<(PatchJet, DVector<f64>)> {
    let jet = patch.jet(params)?;
    check_rank(params, &jet.dx)?;
    let nu = patch.normal_from_jet(params, &jet)?;
    Ok((jet, nu))
}

/// Chart matrix `W` of the shape operator: `−dν = dx·W`.
pub fn shape_operator(patch: &ImmersionPatch, params: &[f64]) -> Result<DMatrix<f64>> {
    let (jet, nu) = jet_and_normal(patch, params)?;
    patch::shape_matrix(&jet, &nu).map_err(|_| Error::RankDeficient {
        params: params.to_vec(),
        sigma: linalg::smallest_singular_value(&jet.dx),
    })
}

/// Everything needed to symmetrize `S_F` at one point.
///
/// `basis` (rows) is the orthonormal basis of `ν^⊥` stored by the anisotropy evaluation,
/// `b = basis·dx` maps chart vectors into it, `t_tilde = b·W·b⁻¹` is `T` in that basis
/// (symmetric), `c` is `C_F` and `y` holds the eigenvectors of `C̃T̃C̃` (columns, in
/// the order of `lambdas`).
#[derive(Debug, Clone)]
pub struct Symmetrized {
    pub jet: PatchJet,
    pub normal: DVector<f64>,
    pub eval: AnisotropyEval,
    pub w: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub b_inv: DMatrix<f64>,
    pub t_tilde: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub lambdas: Vec<f64>,
    pub y: DMatrix<f64>,
}

impl Symmetrized {
    /// `S_F` in the chart basis.
    pub fn s_chart(&self) -> DMatrix<f64> {
        &self.b_inv * &self.eval.a_matrix * &self.b * &self.w
    }

    /// `ε = C̃·y` (eigenvectors of `S_F`) in the orthonormal basis.
    pub fn eps(&self) -> DMatrix<f64> {
        &self.c * &self.y
    }

    /// Eigenvectors of `S_F` as chart vectors of unit length in the induced metric.
    pub fn eigenframe(&self) -> DMatrix<f64> {
        let mut xi = &self.b_inv * self.eps();
        for mut col in xi.column_iter_mut() {
            let len = (&self.b * &col).norm();
            col /= len;
        }
        xi
    }
}

fn normalize_sign(v: &mut DVector<f64>) {
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            *v *= -1.0;
        }
    }
}

/// Eigen-decomposition of `C̃T̃C̃`, sorted by descending eigenvalue, ties broken by the
/// (sign-normalized) eigenvectors in lexicographic order.
fn sorted_spectrum(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = linalg::symmetrize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut pairs: Vec<(f64, DVector<f64>)> = (0..n)
        .map(|i| {
            let mut v = eig.eigenvectors.column(i).into_owned();
            normalize_sign(&mut v);
            (eig.eigenvalues[i], v)
        })
        .collect();
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() > 1e-12 {
            b.0.partial_cmp(&a.0).unwrap()
        } else {
            a.1.iter()
                .zip(b.1.iter())
                .map(|(x, y)| x.partial_cmp(y).unwrap())
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        }
    });
    let mut y = DMatrix::zeros(n, n);
    for (c, (_, v)) in pairs.iter().enumerate() {
        y.set_column(c, v);
    }
    (pairs.into_iter().map(|p| p.0).collect(), y)
}

pub fn symmetrized(f: &AnisotropyFunction, patch: &ImmersionPatch, params: &[f64]) -> Result<Symmetrized> {
    if f.ambient_dim() != patch.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: patch.ambient_dim(), got: f.ambient_dim() });
    }
    let (jet, normal) = jet_and_normal(patch, params)?;
    let w = patch::shape_matrix(&jet, &normal)?;
    let eval = f.evaluate(&normal)?;
    let c = eval.c_matrix()?.clone();
    let b = &eval.basis * &jet.dx;
    let b_inv = b
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient { params: params.to_vec(), sigma: 0.0 })?;
    let t_tilde = linalg::symmetrize(&(&b * &w * &b_inv));
    let (lambdas, y) = sorted_spectrum(&(&c * &t_tilde * &c));
    Ok(Symmetrized { jet, normal, eval, w, b, b_inv, t_tilde, c, lambdas, y })
}

/// The anisotropy-independent part of [`symmetrized`], reusable across many `F`.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub params: Vec<f64>,
    pub dx: DMatrix<f64>,
    pub normal: DVector<f64>,
    pub w: DMatrix<f64>,
}

pub fn point_geometry(patch: &ImmersionPatch, params: &[f64]) -> Result<PointGeometry> {
    let (jet, normal) = jet_and_normal(patch, params)?;
    let w = patch::shape_matrix(&jet, &normal)?;
    Ok(PointGeometry { params: params.to_vec(), dx: jet.dx, normal, w })
}

/// Descending anisotropic principal curvatures from cached geometry.
pub fn lambdas_at(f: &AnisotropyFunction, geo: &PointGeometry) -> Result<Vec<f64>> {
    let eval = f.evaluate(&geo.normal)?;
    let c = eval.c_matrix()?;
    let b = &eval.basis * &geo.dx;
    let b_inv = b
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient { params: geo.params.clone(), sigma: 0.0 })?;
    let t_tilde = linalg::symmetrize(&(&b * &geo.w * &b_inv));
    let mut l: Vec<f64> = linalg::symmetrize(&(c * t_tilde * c)).symmetric_eigenvalues().iter().copied().collect();
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(l)
}

/// Chart matrix of `S_F = A_F ∘ T`.
pub fn f_weingarten(f: &AnisotropyFunction, patch: &ImmersionPatch, params: &[f64]) -> Result<DMatrix<f64>> {
    Ok(symmetrized(f, patch, params)?.s_chart())
}

/// Chart derivative of `φ∘ν`, columns `∂(φ∘ν)/∂p_i`.
pub fn d_phi_nu(f: &AnisotropyFunction, patch: &ImmersionPatch, params: &[f64]) -> Result<DMatrix<f64>> {
    let n = params.len();
    let mut out = DMatrix::zeros(patch.ambient_dim(), n);
    for i in 0..n {
        let mut err = None;
        let col = linalg::central4_vec(
            |s| {
                let mut q = params.to_vec();
                q[i] += s;
                match patch.normal(&q).and_then(|nu| f.phi(&nu)) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        DVector::zeros(patch.ambient_dim())
                    }
                }
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

#[derive(Debug, Clone, Serialize)]
pub struct WeingartenCheck {
    pub s: DMatrix<f64>,
    /// `−dx⁺·d(φ∘ν)`
    pub s_derivative: DMatrix<f64>,
    pub deviation: f64,
}

/// `S_F` by both routes: `B⁻¹·A_F·B·W` and the negative chart derivative of `φ∘ν`.
pub fn f_weingarten_checked(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    params: &[f64],
) -> Result<WeingartenCheck> {
    let sym = symmetrized(f, patch, params)?;
    let s = sym.s_chart();
    let pinv = linalg::left_inverse(&sym.jet.dx)
        .ok_or_else(|| Error::RankDeficient { params: params.to_vec(), sigma: 0.0 })?;
    let s_derivative = -pinv * d_phi_nu(f, patch, params)?;
    let deviation = linalg::max_abs(&(&s - &s_derivative));
    Ok(WeingartenCheck { s, s_derivative, deviation })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureGroup {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSpectrum {
    /// descending, with repetition
    pub lambdas: Vec<f64>,
    pub groups: Vec<CurvatureGroup>,
    /// partial sums `n_k = m_1 + … + m_k`
    pub group_offsets: Vec<usize>,
    /// columns: eigenvectors of `S_F` in the chart basis, in the order of `lambdas`
    pub eigenframe: DMatrix<f64>,
    /// `M_0 … M_n`
    pub sym_functions: Vec<f64>,
    pub mean: f64,
}

impl CurvatureSpectrum {
    pub fn from_lambdas(lambdas: Vec<f64>, eigenframe: DMatrix<f64>, cluster_tol: f64) -> Self {
        let mut groups: Vec<(f64, usize, f64)> = Vec::new();
        let mut last = f64::NAN;
        for &l in &lambdas {
            match groups.last_mut() {
                Some(g) if (last - l).abs() <= cluster_tol => {
                    g.0 += l;
                    g.1 += 1;
                }
                _ => groups.push((l, 1, 0.0)),
            }
            last = l;
        }
        let groups: Vec<CurvatureGroup> =
            groups.into_iter().map(|(s, m, _)| CurvatureGroup { value: s / m as f64, multiplicity: m }).collect();
        let group_offsets = groups
            .iter()
            .scan(0, |acc, g| {
                *acc += g.multiplicity;
                Some(*acc)
            })
            .collect();
        let mut sym = vec![1.0];
        for &l in &lambdas {
            let mut next = sym.clone();
            next.push(0.0);
            for k in 1..next.len() {
                next[k] += l * sym[k - 1];
            }
            sym = next;
        }
        let mean = lambdas.iter().sum::<f64>() / lambdas.len().max(1) as f64;
        CurvatureSpectrum { lambdas, groups, group_offsets, eigenframe, sym_functions: sym, mean }
    }

    pub fn g(&self) -> usize {
        self.groups.len()
    }

    /// Index of the group whose value is within `tol` of `lambda`.
    pub fn group_of(&self, lambda: f64, tol: f64) -> Option<usize> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(_, g)| (g.value - lambda).abs() <= tol)
            .min_by(|a, b| (a.1.value - lambda).abs().partial_cmp(&(b.1.value - lambda).abs()).unwrap())
            .map(|(i, _)| i)
    }

    /// Positions in `lambdas` belonging to group `k`.
    pub fn group_range(&self, k: usize) -> std::ops::Range<usize> {
        let end = self.group_offsets[k];
        end - self.groups[k].multiplicity..end
    }
}

pub fn anisotropic_curvatures(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    params: &[f64],
) -> Result<CurvatureSpectrum> {
    anisotropic_curvatures_with(f, patch, params, DEFAULT_CLUSTER_TOL)
}

pub fn anisotropic_curvatures_with(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    params: &[f64],
    cluster_tol: f64,
) -> Result<CurvatureSpectrum> {
    let sym = symmetrized(f, patch, params)?;
    Ok(CurvatureSpectrum::from_lambdas(sym.lambdas.clone(), sym.eigenframe(), cluster_tol))
}

/// `H_F = tr(S_F)/n`.
pub fn anisotropic_mean(f: &AnisotropyFunction, patch: &ImmersionPatch, params: &[f64]) -> Result<f64> {
    let s = f_weingarten(f, patch, params)?;
    Ok(s.trace() / s.nrows() as f64)
}

/// `H_F` by the trace of `S_F` and by `−tr(dx⁺·d(φ∘ν))/n`.
pub fn anisotropic_mean_checked(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    params: &[f64],
) -> Result<(f64, f64)> {
    let check = f_weingarten_checked(f, patch, params)?;
    let n = check.s.nrows() as f64;
    Ok((check.s.trace() / n, check.s_derivative.trace() / n))
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureRow {
    pub params: Vec<f64>,
    pub x: Vec<f64>,
    pub normal: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub mean: f64,
    pub g: usize,
}

pub fn curvature_report(
    f: &AnisotropyFunction,
    patch: &ImmersionPatch,
    grid: &[Vec<f64>],
    cluster_tol: f64,
) -> Result<Vec<CurvatureRow>> {
    grid.par_iter()
        .map(|p| {
            let sym = symmetrized(f, patch, p)?;
            let spec = CurvatureSpectrum::from_lambdas(sym.lambdas.clone(), DMatrix::zeros(0, 0), cluster_tol);
            Ok(CurvatureRow {
                params: p.clone(),
                x: sym.jet.x.iter().copied().collect(),
                normal: sym.normal.iter().copied().collect(),
                g: spec.g(),
                mean: spec.mean,
                lambdas: spec.lambdas,
            })
        })
        .collect()
}

pub fn curvature_csv(rows: &[CurvatureRow]) -> String {
    let mut out = String::from("# wulfflab curvature v1\n");
    let Some(first) = rows.first() else {
        return out;
    };
    let mut header: Vec<String> = Vec::new();
    header.extend((0..first.params.len()).map(|i| format!("p{i}")));
    header.extend((0..first.x.len()).map(|i| format!("x{i}")));
    header.extend((0..first.normal.len()).map(|i| format!("nu{i}")));
    header.extend((1..=first.lambdas.len()).map(|i| format!("lambda{i}")));
    header.push("H_F".into());
    header.push("g".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        let mut cells: Vec<String> = r
            .params
            .iter()
            .chain(&r.x)
            .chain(&r.normal)
            .chain(&r.lambdas)
            .map(|v| v.to_string())
            .collect();
        cells.push(r.mean.to_string());
        cells.push(r.g.to_string());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_and_sphere_shape_operators() {
        let plane = ImmersionPatch::plane(3);
        assert!(shape_operator(&plane, &[0.2, -0.3]).unwrap().abs().max() < 1e-15);
        let fr = frame_at(&plane, &[0.2, -0.3]).unwrap();
        assert_eq!(fr.normal, DVector::from_vec(vec![0.0, 0.0, 1.0]));

        let sphere = ImmersionPatch::sphere(&[0.0, 0.0, 0.0], 1.0).unwrap();
        let p = [1.1, 0.4];
        let w = shape_operator(&sphere, &p).unwrap();
        assert!((w + DMatrix::identity(2, 2)).abs().max() < 1e-12);
        let fr = frame_at(&sphere, &p).unwrap();
        assert!((fr.normal - fr.x).norm() < 1e-15);
    }

    #[test]
    fn cylinder_principal_curvatures() {
        let r = 0.7;
        let cyl = ImmersionPatch::custom(3, vec![(-3.0, 3.0), (-1.0, 1.0)], move |p| {
            DVector::from_vec(vec![r * p[0].cos(), r * p[0].sin(), p[1]])
        });
        // the finite-difference normal of this chart points outward
        let p = [0.3, 0.2];
        let nu = frame_at(&cyl, &p).unwrap().normal;
        assert!(nu[0] * 0.3f64.cos() + nu[1] * 0.3f64.sin() > 0.0);
        let mut ev: Vec<f64> = shape_operator(&cyl, &p).unwrap().eigenvalues().unwrap().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 1.0 / r).abs() < 1e-6);
        assert!(ev[1].abs() < 1e-6);
    }

    #[test]
    fn grouping_and_symmetric_functions() {
        let s = CurvatureSpectrum::from_lambdas(vec![2.0, 2.0 - 1e-9, 0.0], DMatrix::zeros(0, 0), 1e-6);
        assert_eq!(s.g(), 2);
        assert_eq!(s.groups[0].multiplicity, 2);
        assert_eq!(s.group_offsets, vec![2, 3]);
        assert!((s.sym_functions[1] - 4.0).abs() < 1e-8);
        assert!((s.sym_functions[2] - 4.0).abs() < 1e-8);
        assert_eq!(s.sym_functions[3], 0.0);
        assert_eq!(s.group_range(1), 2..3);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let degenerate = ImmersionPatch::custom(3, vec![(-1.0, 1.0), (-1.0, 1.0)], |p| {
            DVector::from_vec(vec![p[0], p[0], 0.0 * p[1]])
        });
        assert!(matches!(frame_at(&degenerate, &[0.0, 0.0]), Err(Error::RankDeficient { .. })));
    }
}
