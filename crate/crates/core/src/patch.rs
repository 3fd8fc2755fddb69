//! Parametrized hypersurface charts with derivative access.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::anisotropy::AnisotropyFunction;
use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere::SphereChart;

/// Position step for patches without analytic derivatives.
pub const POSITION_FD_STEP: f64 = 1e-4;
/// Step for differentiating analytic first derivatives once more.
pub const JET_FD_STEP: f64 = 1e-3;
/// Same, when the anisotropy itself is evaluated by finite differences.
pub const JET_FD_STEP_NOISY: f64 = 1e-2;

/// Position, first and second chart derivatives at one chart point.
#[derive(Debug, Clone)]
pub struct PatchJet {
    pub x: DVector<f64>,
    /// `(n+1) × n`, column `i` is `∂x/∂p_i`
    pub dx: DMatrix<f64>,
    /// `ddx[i]` has column `j` equal to `∂²x/∂p_i∂p_j`
    pub ddx: Vec<DMatrix<f64>>,
    /// column `i` is `∂ν/∂p_i` of the oriented normal, when known without differencing `dx`
    pub dnu: Option<DMatrix<f64>>,
}

impl PatchJet {
    pub fn second(&self, i: usize, j: usize) -> DVector<f64> {
        self.ddx[i].column(j).into_owned()
    }
}

pub type MapFn = dyn Fn(&[f64]) -> DVector<f64> + Send + Sync;

/// User-supplied map differentiated numerically.
#[derive(Clone)]
pub struct CustomMap {
    pub ambient_dim: usize,
    pub chart_dim: usize,
    map: Arc<MapFn>,
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomMap({} -> {})", self.chart_dim, self.ambient_dim)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PatchKind {
    /// `(p, 0)`
    Plane { ambient_dim: usize },
    /// `center + radius·u(p)`
    Sphere { center: Vec<f64>, radius: f64, chart: SphereChart },
    /// `φ(u(p))`
    Wulff { anisotropy: AnisotropyFunction, chart: SphereChart },
    /// `v − t·φ(u)` with `u` on a subsphere and `v` in its orthogonal complement
    Product { anisotropy: AnisotropyFunction, t: f64, chart: SphereChart, complement: DMatrix<f64> },
    /// `(t cos s, t sin s, pitch·s)`
    Helicoid { pitch: f64 },
    /// helicoid × line in R⁴
    HelicoidLine { pitch: f64 },
    /// torus of revolution about the last axis
    Torus { major: f64, minor: f64 },
    /// `x + t·φ(ν)`
    Translated { base: Box<ImmersionPatch>, anisotropy: AnisotropyFunction, t: f64 },
    /// `factor·x`
    Scaled { base: Box<ImmersionPatch>, factor: f64 },
    #[serde(skip)]
    Custom(CustomMap),
}

#[derive(Debug, Clone, Serialize)]
pub struct ImmersionPatch {
    #[serde(flatten)]
    kind: PatchKind,
    orientation: f64,
    domain: Vec<(f64, f64)>,
}

fn unit_box(n: usize) -> Vec<(f64, f64)> {
    vec![(-1.0, 1.0); n]
}

/// Rows spanning the orthogonal complement of the row space of `frame` (orthonormal rows).
pub fn row_complement(frame: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = frame.ncols();
    let mut kept: Vec<DVector<f64>> = frame.row_iter().map(|r| r.transpose()).collect();
    let start = kept.len();
    for axis in 0..dim {
        if kept.len() == dim {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        for _ in 0..2 {
            for k in &kept {
                let c = k.dot(&v);
                v.axpy(-c, k, 1.0);
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            kept.push(v / n);
        }
    }
    let mut out = DMatrix::zeros(dim - start, dim);
    for (r, v) in kept[start..].iter().enumerate() {
        out.set_row(r, &v.transpose());
    }
    out
}

impl ImmersionPatch {
    fn new(kind: PatchKind, domain: Vec<(f64, f64)>) -> Self {
        ImmersionPatch { kind, orientation: 1.0, domain }
    }

    pub fn plane(ambient_dim: usize) -> Self {
        Self::new(PatchKind::Plane { ambient_dim }, unit_box(ambient_dim - 1))
    }

    /// Round sphere with outward normal.
    pub fn sphere(center: &[f64], radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParams("sphere radius must be positive".into()));
        }
        let chart = SphereChart::new(DMatrix::identity(center.len(), center.len()), 0);
        let domain = chart.domain();
        Ok(Self::new(PatchKind::Sphere { center: center.to_vec(), radius, chart }, domain))
    }

    /// The Wulff shape `φ(S^n)` with outward normal `ν = u`.
    pub fn wulff(anisotropy: &AnisotropyFunction) -> Self {
        let d = anisotropy.ambient_dim();
        let chart = SphereChart::new(DMatrix::identity(d, d), 0);
        let domain = chart.domain();
        Self::new(PatchKind::Wulff { anisotropy: anisotropy.clone(), chart }, domain)
    }

    /// `(u, v) ↦ v − t·φ(u)` over the subsphere spanned by the rows of `frame`.
    pub fn product(anisotropy: &AnisotropyFunction, frame: &DMatrix<f64>, t: f64) -> Result<Self> {
        if t == 0.0 {
            return Err(Error::ZeroT);
        }
        if frame.ncols() != anisotropy.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: anisotropy.ambient_dim(), got: frame.ncols() });
        }
        let chart = SphereChart::new(frame.clone(), 0);
        let complement = row_complement(frame);
        let mut domain = chart.domain();
        domain.extend(unit_box(complement.nrows()));
        Ok(Self::new(PatchKind::Product { anisotropy: anisotropy.clone(), t, chart, complement }, domain))
    }

    pub fn helicoid(t_max: f64) -> Self {
        Self::new(PatchKind::Helicoid { pitch: 1.0 }, vec![(-PI, PI), (-t_max, t_max)])
    }

    pub fn helicoid_line(t_max: f64) -> Self {
        Self::new(PatchKind::HelicoidLine { pitch: 1.0 }, vec![(-PI, PI), (-t_max, t_max), (-1.0, 1.0)])
    }

    /// Torus with outward normal.
    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        if !(major > minor && minor > 0.0) {
            return Err(Error::InvalidParams("torus needs major > minor > 0".into()));
        }
        Ok(Self::new(PatchKind::Torus { major, minor }, vec![(-PI, PI), (-PI, PI)]))
    }

    /// A patch given only by its position map; derivatives are central differences.
    pub fn custom<M>(ambient_dim: usize, domain: Vec<(f64, f64)>, map: M) -> Self
    where
        M: Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    {
        let chart_dim = domain.len();
        Self::new(PatchKind::Custom(CustomMap { ambient_dim, chart_dim, map: Arc::new(map) }), domain)
    }

    /// `x + t·φ(ν)`; its normal is the source normal.
    pub fn translated(&self, anisotropy: &AnisotropyFunction, t: f64) -> Self {
        Self::new(
            PatchKind::Translated { base: Box::new(self.clone()), anisotropy: anisotropy.clone(), t },
            self.domain.clone(),
        )
    }

    /// Homothety `x ↦ c·x`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::InvalidParams("scale factor must be positive".into()));
        }
        Ok(Self::new(PatchKind::Scaled { base: Box::new(self.clone()), factor }, self.domain.clone()))
    }

    pub fn with_orientation(mut self, sign: f64) -> Self {
        self.orientation = if sign < 0.0 { -1.0 } else { 1.0 };
        self
    }

    pub fn flipped(&self) -> Self {
        self.clone().with_orientation(-self.orientation)
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        if domain.len() != self.chart_dim() || domain.iter().any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParams("domain must have one increasing interval per chart axis".into()));
        }
        self.domain = domain;
        Ok(self)
    }

    /// Use the second overlapping sphere chart (for sphere, Wulff and product patches).
    pub fn with_cap(mut self, cap: usize) -> Self {
        let rechart = |chart: &SphereChart| -> SphereChart {
            let frame = chart.frame_unrotated();
            SphereChart::new(frame, cap)
        };
        match &mut self.kind {
            PatchKind::Sphere { chart, .. } | PatchKind::Wulff { chart, .. } | PatchKind::Product { chart, .. } => {
                *chart = rechart(chart);
            }
            _ => {}
        }
        self
    }

    pub fn kind(&self) -> &PatchKind {
        &self.kind
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn chart_dim(&self) -> usize {
        self.domain.len()
    }

    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            PatchKind::Plane { ambient_dim } => *ambient_dim,
            PatchKind::Sphere { center, .. } => center.len(),
            PatchKind::Wulff { anisotropy, .. } | PatchKind::Product { anisotropy, .. } => anisotropy.ambient_dim(),
            PatchKind::Helicoid { .. } | PatchKind::Torus { .. } => 3,
            PatchKind::HelicoidLine { .. } => 4,
            PatchKind::Translated { base, .. } | PatchKind::Scaled { base, .. } => base.ambient_dim(),
            PatchKind::Custom(c) => c.ambient_dim,
        }
    }

    /// Midpoint of the domain.
    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// The anisotropy a patch was built from, if any.
    pub fn anisotropy(&self) -> Option<&AnisotropyFunction> {
        match &self.kind {
            PatchKind::Wulff { anisotropy, .. }
            | PatchKind::Product { anisotropy, .. }
            | PatchKind::Translated { anisotropy, .. } => Some(anisotropy),
            PatchKind::Scaled { base, .. } => base.anisotropy(),
            _ => None,
        }
    }

    fn check_params(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.chart_dim() {
            return Err(Error::DimensionMismatch { expected: self.chart_dim(), got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("chart parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn position(&self, p: &[f64]) -> Result<DVector<f64>> {
        self.check_params(p)?;
        self.position_unchecked(p)
    }

    fn position_unchecked(&self, p: &[f64]) -> Result<DVector<f64>> {
        Ok(match &self.kind {
            PatchKind::Custom(c) => (c.map)(p),
            PatchKind::Scaled { base, factor } => base.position_unchecked(p)? * *factor,
            _ => self.first_unchecked(p)?.0,
        })
    }

    /// Position and first derivatives.
    pub fn first(&self, p: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.check_params(p)?;
        self.first_unchecked(p)
    }

    fn first_unchecked(&self, p: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = p.len();
        Ok(match &self.kind {
            PatchKind::Plane { ambient_dim } => {
                let mut x = DVector::zeros(*ambient_dim);
                x.rows_mut(0, n).copy_from_slice(p);
                let mut dx = DMatrix::zeros(*ambient_dim, n);
                dx.view_mut((0, 0), (n, n)).fill_with_identity();
                (x, dx)
            }
            PatchKind::Sphere { center, radius, chart } => {
                let j = chart.eval(p);
                (DVector::from_column_slice(center) + &j.u * *radius, j.du * *radius)
            }
            PatchKind::Wulff { anisotropy, chart } => {
                let j = chart.eval(p);
                let h = anisotropy.hessian(&j.u)?;
                (anisotropy.phi(&j.u)?, h * j.du)
            }
            PatchKind::Product { anisotropy, t, chart, complement } => {
                let k = chart.k();
                let j = chart.eval(&p[..k]);
                let h = anisotropy.hessian(&j.u)?;
                let v = complement.transpose() * DVector::from_column_slice(&p[k..]);
                let x = v - anisotropy.phi(&j.u)? * *t;
                let mut dx = DMatrix::zeros(anisotropy.ambient_dim(), n);
                dx.view_mut((0, 0), (anisotropy.ambient_dim(), k)).copy_from(&(h * j.du * -*t));
                dx.view_mut((0, k), (anisotropy.ambient_dim(), n - k)).copy_from(&complement.transpose());
                (x, dx)
            }
            PatchKind::Helicoid { pitch } | PatchKind::HelicoidLine { pitch } => {
                let dim = self.ambient_dim();
                let (s, t) = (p[0], p[1]);
                let mut x = DVector::zeros(dim);
                x[0] = t * s.cos();
                x[1] = t * s.sin();
                x[2] = pitch * s;
                let mut dx = DMatrix::zeros(dim, n);
                dx[(0, 0)] = -t * s.sin();
                dx[(1, 0)] = t * s.cos();
                dx[(2, 0)] = *pitch;
                dx[(0, 1)] = s.cos();
                dx[(1, 1)] = s.sin();
                if dim == 4 {
                    x[3] = p[2];
                    dx[(3, 2)] = 1.0;
                }
                (x, dx)
            }
            PatchKind::Torus { major, minor } => {
                let (a, b) = (p[0], p[1]);
                let rho = major + minor * b.cos();
                let x = DVector::from_vec(vec![rho * a.cos(), rho * a.sin(), minor * b.sin()]);
                let dx = DMatrix::from_column_slice(
                    3,
                    2,
                    &[
                        -rho * a.sin(),
                        rho * a.cos(),
                        0.0,
                        -minor * b.sin() * a.cos(),
                        -minor * b.sin() * a.sin(),
                        minor * b.cos(),
                    ],
                );
                (x, dx)
            }
            PatchKind::Translated { base, anisotropy, t } => {
                let jet = base.jet_unchecked(p)?;
                let nu = base.normal_from_jet(p, &jet)?;
                let w = shape_matrix(&jet, &nu)?;
                let dnu = -&jet.dx * w;
                let h = anisotropy.hessian(&nu)?;
                let x = &jet.x + anisotropy.phi(&nu)? * *t;
                let dx = &jet.dx + h * dnu * *t;
                (x, dx)
            }
            PatchKind::Scaled { base, factor } => {
                let (x, dx) = base.first_unchecked(p)?;
                (x * *factor, dx * *factor)
            }
            PatchKind::Custom(c) => {
                let h = POSITION_FD_STEP;
                let mut dx = DMatrix::zeros(c.ambient_dim, n);
                for i in 0..n {
                    let col = linalg::central4_vec(
                        |s| {
                            let mut q = p.to_vec();
                            q[i] += s;
                            (c.map)(&q)
                        },
                        h,
                    );
                    dx.set_column(i, &col);
                }
                ((c.map)(p), dx)
            }
        })
    }

    fn jet_step(&self) -> f64 {
        match self.anisotropy() {
            Some(f) if !f.has_analytic_derivatives() => JET_FD_STEP_NOISY,
            _ => JET_FD_STEP,
        }
    }

    /// Second derivatives by differentiating the first derivatives once more.
    fn differentiated_jet(&self, p: &[f64]) -> Result<PatchJet> {
        let (x, dx) = self.first_unchecked(p)?;
        let n = p.len();
        let h = self.jet_step();
        let mut ddx = Vec::with_capacity(n);
        for i in 0..n {
            let mut err = None;
            let m = linalg::central4_mat(
                |s| {
                    let mut q = p.to_vec();
                    q[i] += s;
                    match self.first_unchecked(&q) {
                        Ok((_, d)) => d,
                        Err(e) => {
                            err = Some(e);
                            DMatrix::zeros(dx.nrows(), n)
                        }
                    }
                },
                h,
            );
            if let Some(e) = err {
                return Err(e);
            }
            ddx.push(m);
        }
        // enforce ∂_i∂_j x = ∂_j∂_i x
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = (ddx[i].column(j) + ddx[j].column(i)) * 0.5;
                ddx[i].set_column(j, &avg);
                ddx[j].set_column(i, &avg);
            }
        }
        Ok(PatchJet { x, dx, ddx, dnu: None })
    }

    pub fn jet(&self, p: &[f64]) -> Result<PatchJet> {
        self.check_params(p)?;
        self.jet_unchecked(p)
    }

    fn jet_unchecked(&self, p: &[f64]) -> Result<PatchJet> {
        let mut jet = self.jet_raw(p)?;
        let n = p.len();
        let dnu = match &self.kind {
            PatchKind::Sphere { chart, .. } | PatchKind::Wulff { chart, .. } => Some(chart.eval(p).du),
            PatchKind::Product { chart, .. } => {
                let k = chart.k();
                let mut m = DMatrix::zeros(self.ambient_dim(), n);
                m.view_mut((0, 0), (self.ambient_dim(), k)).copy_from(&chart.eval(&p[..k]).du);
                Some(m)
            }
            // the translated normal is the source normal
            PatchKind::Translated { base, .. } => {
                let bj = base.jet_unchecked(p)?;
                match bj.dnu {
                    Some(d) => Some(d),
                    None => {
                        let nu = base.normal_from_jet(p, &bj)?;
                        Some(-&bj.dx * shape_matrix(&bj, &nu)?)
                    }
                }
            }
            PatchKind::Scaled { .. } => jet.dnu.take(),
            _ => None,
        };
        jet.dnu = dnu.map(|d| d * self.orientation);
        Ok(jet)
    }

    fn jet_raw(&self, p: &[f64]) -> Result<PatchJet> {
        let n = p.len();
        let dim = self.ambient_dim();
        let zeros = || vec![DMatrix::zeros(dim, n); n];
        Ok(match &self.kind {
            PatchKind::Plane { .. } => {
                let (x, dx) = self.first_unchecked(p)?;
                PatchJet { x, dx, ddx: zeros(), dnu: None }
            }
            PatchKind::Sphere { center, radius, chart } => {
                let j = chart.eval(p);
                let mut ddx = zeros();
                for (a, row) in j.ddu.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        ddx[a].set_column(b, &(v * *radius));
                    }
                }
                PatchJet { x: DVector::from_column_slice(center) + &j.u * *radius, dx: j.du * *radius, ddx, dnu: None }
            }
            PatchKind::Helicoid { .. } | PatchKind::HelicoidLine { .. } => {
                let (x, dx) = self.first_unchecked(p)?;
                let (s, t) = (p[0], p[1]);
                let mut ddx = zeros();
                ddx[0][(0, 0)] = -t * s.cos();
                ddx[0][(1, 0)] = -t * s.sin();
                ddx[0][(0, 1)] = -s.sin();
                ddx[0][(1, 1)] = s.cos();
                ddx[1][(0, 0)] = -s.sin();
                ddx[1][(1, 0)] = s.cos();
                PatchJet { x, dx, ddx, dnu: None }
            }
            PatchKind::Torus { major, minor } => {
                let (x, dx) = self.first_unchecked(p)?;
                let (a, b) = (p[0], p[1]);
                let rho = major + minor * b.cos();
                let mut ddx = zeros();
                let xaa = DVector::from_vec(vec![-rho * a.cos(), -rho * a.sin(), 0.0]);
                let xab = DVector::from_vec(vec![minor * b.sin() * a.sin(), -minor * b.sin() * a.cos(), 0.0]);
                let xbb = DVector::from_vec(vec![-minor * b.cos() * a.cos(), -minor * b.cos() * a.sin(), -minor * b.sin()]);
                ddx[0].set_column(0, &xaa);
                ddx[0].set_column(1, &xab);
                ddx[1].set_column(0, &xab);
                ddx[1].set_column(1, &xbb);
                PatchJet { x, dx, ddx, dnu: None }
            }
            PatchKind::Scaled { base, factor } => {
                let j = base.jet_unchecked(p)?;
                PatchJet {
                    x: j.x * *factor,
                    dx: j.dx * *factor,
                    ddx: j.ddx.into_iter().map(|m| m * *factor).collect(),
                    dnu: j.dnu,
                }
            }
            PatchKind::Custom(c) => {
                let h = POSITION_FD_STEP;
                let (x, dx) = self.first_unchecked(p)?;
                let at = |offsets: &[(usize, f64)]| {
                    let mut q = p.to_vec();
                    for &(i, s) in offsets {
                        q[i] += s;
                    }
                    (c.map)(&q)
                };
                let mut ddx = zeros();
                for i in 0..n {
                    let xii = (at(&[(i, h)]) - &x * 2.0 + at(&[(i, -h)])) / (h * h);
                    ddx[i].set_column(i, &xii);
                    for j in (i + 1)..n {
                        let xij = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                            + at(&[(i, -h), (j, -h)]))
                            / (4.0 * h * h);
                        ddx[i].set_column(j, &xij);
                        ddx[j].set_column(i, &xij);
                    }
                }
                PatchJet { x, dx, ddx, dnu: None }
            }
            PatchKind::Wulff { .. } | PatchKind::Product { .. } | PatchKind::Translated { .. } => {
                self.differentiated_jet(p)?
            }
        })
    }

    /// Unit normal before applying this patch's orientation sign.
    fn raw_normal(&self, p: &[f64], dx: &DMatrix<f64>) -> Result<DVector<f64>> {
        Ok(match &self.kind {
            PatchKind::Plane { ambient_dim } => {
                let mut e = DVector::zeros(*ambient_dim);
                e[*ambient_dim - 1] = 1.0;
                e
            }
            PatchKind::Sphere { chart, .. } | PatchKind::Wulff { chart, .. } => chart.eval(p).u,
            PatchKind::Product { chart, .. } => chart.eval(&p[..chart.k()]).u,
            PatchKind::Helicoid { pitch } | PatchKind::HelicoidLine { pitch } => {
                let (s, t) = (p[0], p[1]);
                let mut nu = DVector::zeros(self.ambient_dim());
                nu[0] = -pitch * s.sin();
                nu[1] = pitch * s.cos();
                nu[2] = -t;
                nu.normalize()
            }
            PatchKind::Torus { .. } => {
                let (a, b) = (p[0], p[1]);
                DVector::from_vec(vec![b.cos() * a.cos(), b.cos() * a.sin(), b.sin()])
            }
            PatchKind::Translated { base, .. } | PatchKind::Scaled { base, .. } => base.normal_unchecked(p)?,
            PatchKind::Custom(_) => {
                let n = linalg::generalized_cross(dx);
                let norm = n.norm();
                if !(norm > 0.0) {
                    return Err(Error::RankDeficient { params: p.to_vec(), sigma: 0.0 });
                }
                n / norm
            }
        })
    }

    fn normal_unchecked(&self, p: &[f64]) -> Result<DVector<f64>> {
        let dx = match &self.kind {
            PatchKind::Custom(_) => self.first_unchecked(p)?.1,
            _ => DMatrix::zeros(0, 0),
        };
        Ok(self.raw_normal(p, &dx)? * self.orientation)
    }

    pub(crate) fn normal_from_jet(&self, p: &[f64], jet: &PatchJet) -> Result<DVector<f64>> {
        Ok(self.raw_normal(p, &jet.dx)? * self.orientation)
    }

    /// Unit normal `ν` with this patch's orientation.
    pub fn normal(&self, p: &[f64]) -> Result<DVector<f64>> {
        self.check_params(p)?;
        self.normal_unchecked(p)
    }

    /// Regular grid of cell centres, `res` per chart axis.
    pub fn chart_grid(&self, res: usize) -> Vec<Vec<f64>> {
        chart_grid(&self.domain, res)
    }

    /// Uniform random chart points inside the domain.
    pub fn random_params(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        random_params(&self.domain, count, seed)
    }
}

/// `W = g⁻¹ b` with `b_ij = −⟨∂_i x, ∂_j ν⟩` when `dν` is known, else `⟨∂_i∂_j x, ν⟩`.
pub(crate) fn shape_matrix(jet: &PatchJet, nu: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = jet.dx.ncols();
    let g = jet.dx.transpose() * &jet.dx;
    let b = match &jet.dnu {
        Some(dnu) => -jet.dx.transpose() * dnu,
        None => DMatrix::from_fn(n, n, |i, j| jet.ddx[i].column(j).dot(nu)),
    };
    let b = linalg::symmetrize(&b);
    g.clone()
        .cholesky()
        .map(|c| c.solve(&b))
        .ok_or_else(|| Error::RankDeficient { params: vec![], sigma: linalg::smallest_singular_value(&jet.dx) })
}

/// Cell-centre grid with `res` points per axis.
pub fn chart_grid(domain: &[(f64, f64)], res: usize) -> Vec<Vec<f64>> {
    let res = res.max(1);
    let n = domain.len();
    let total = res.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; n];
            for (axis, (a, b)) in domain.iter().enumerate().rev() {
                let i = idx % res;
                idx /= res;
                p[axis] = a + (b - a) * (i as f64 + 0.5) / res as f64;
            }
            p
        })
        .collect()
}

pub fn random_params(domain: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| domain.iter().map(|&(a, b)| rng.gen_range(a..b)).collect()).collect()
}
