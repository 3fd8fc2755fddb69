//! Wulff shapes `W_F = φ(S^n)`, sub-Wulff shapes `φ(S^k)` and the product immersions
//! `(u, v) ↦ v − t·φ(u)`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisotropyFunction;
use crate::error::{Error, Result};
use crate::patch::ImmersionPatch;
use crate::sphere::{self, Triangle};

/// Grid resolution of the convexity audit run before sampling.
pub const SAMPLE_AUDIT_RESOLUTION: usize = 32;
pub const DEFAULT_RESOLUTION: usize = 64;

/// A totally geodesic `S^k ⊂ S^n`, given by `k+1` orthonormal rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsphereSpec {
    pub k: usize,
    pub frame: DMatrix<f64>,
}

impl SubsphereSpec {
    pub fn new(frame: DMatrix<f64>) -> Result<Self> {
        let rows = frame.nrows();
        if rows < 2 || rows > frame.ncols() {
            return Err(Error::InvalidParams(format!(
                "subsphere frame must have 2..={} rows, got {rows}",
                frame.ncols()
            )));
        }
        let gram = &frame * frame.transpose();
        if (gram - DMatrix::<f64>::identity(rows, rows)).abs().max() > 1e-10 {
            return Err(Error::InvalidParams("subsphere frame rows must be orthonormal".into()));
        }
        Ok(SubsphereSpec { k: rows - 1, frame })
    }

    /// `S^k` in the span of the first `k+1` coordinate axes.
    pub fn coordinate(ambient_dim: usize, k: usize) -> Result<Self> {
        if k + 1 > ambient_dim {
            return Err(Error::InvalidParams(format!("k = {k} too large for ambient dimension {ambient_dim}")));
        }
        Self::new(DMatrix::identity(k + 1, ambient_dim))
    }

    /// Embed a unit vector of `R^{k+1}` into the ambient space.
    pub fn embed(&self, p: &DVector<f64>) -> DVector<f64> {
        self.frame.transpose() * p
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WulffPoint {
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WulffSample {
    pub points: Vec<WulffPoint>,
    pub mesh: Option<Vec<Triangle>>,
}

impl WulffSample {
    /// Triangulated surface; only available for `S²` samples.
    pub fn to_obj(&self) -> Result<String> {
        let mesh = self
            .mesh
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("OBJ export needs a triangulated S^2 sample".into()))?;
        let mut out = String::from("# wulfflab wulff shape\n");
        for p in &self.points {
            let _ = writeln!(out, "v {} {} {}", p.phi[0], p.phi[1], p.phi[2]);
        }
        for t in mesh {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        Ok(out)
    }

    /// Columns `u_0..u_n, phi_0..phi_n`.
    pub fn to_csv(&self) -> String {
        let dim = self.points.first().map_or(0, |p| p.u.len());
        let mut out = String::from("# wulfflab wulff-sample v1\n");
        let header: Vec<String> =
            (0..dim).map(|i| format!("u{i}")).chain((0..dim).map(|i| format!("phi{i}"))).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.u.iter().chain(p.phi.iter()).map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn apply_phi(f: &AnisotropyFunction, us: Vec<DVector<f64>>, mesh: Option<Vec<Triangle>>) -> Result<WulffSample> {
    let points = us
        .into_par_iter()
        .map(|u| {
            let phi = f.phi(&u)?;
            Ok(WulffPoint { u: u.iter().copied().collect(), phi: phi.iter().copied().collect() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WulffSample { points, mesh })
}

/// `φ` over a quasi-uniform grid of `S^n`; triangulated when `n = 2`.
pub fn sample_wulff(f: &AnisotropyFunction, resolution: usize) -> Result<WulffSample> {
    f.require_convex(SAMPLE_AUDIT_RESOLUTION)?;
    let (us, mesh) = sphere::sphere_grid(f.ambient_dim(), resolution);
    apply_phi(f, us, mesh)
}

/// `φ` over a grid of the subsphere `S^k` described by `spec`.
pub fn sample_sub_wulff(f: &AnisotropyFunction, spec: &SubsphereSpec, resolution: usize) -> Result<WulffSample> {
    if spec.frame.ncols() != f.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: f.ambient_dim(), got: spec.frame.ncols() });
    }
    f.require_convex(SAMPLE_AUDIT_RESOLUTION)?;
    let (ps, mesh) = sphere::sphere_grid(spec.k + 1, resolution);
    let us = ps.iter().map(|p| spec.embed(p)).collect();
    apply_phi(f, us, mesh)
}

/// `(u, v) ↦ v − t·φ(u)`, `u ∈ S^k`, `v` in the orthogonal complement of the `R^{k+1}` of `spec`.
pub fn product_immersion(f: &AnisotropyFunction, spec: &SubsphereSpec, t: f64) -> Result<ImmersionPatch> {
    if t == 0.0 {
        return Err(Error::ZeroT);
    }
    f.require_convex(SAMPLE_AUDIT_RESOLUTION)?;
    ImmersionPatch::product(f, &spec.frame, t)
}

/// Largest distance of the points from their best-fit affine `dim`-plane.
pub fn plane_fit_residual(points: &[DVector<f64>], dim: usize) -> f64 {
    let n = points.len();
    let d = points[0].len();
    let centroid = points.iter().fold(DVector::zeros(d), |a, p| a + p) / n as f64;
    let mut m = DMatrix::zeros(d, n);
    for (j, p) in points.iter().enumerate() {
        m.set_column(j, &(p - &centroid));
    }
    let svd = m.svd(true, false);
    let u = svd.u.unwrap();
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let basis: Vec<DVector<f64>> = idx.iter().take(dim).map(|&i| u.column(i).into_owned()).collect();
    points
        .iter()
        .map(|p| {
            let mut r = p - &centroid;
            for b in &basis {
                let c = b.dot(&r);
                r.axpy(-c, b, 1.0);
            }
            r.norm()
        })
        .fold(0.0, f64::max)
}
