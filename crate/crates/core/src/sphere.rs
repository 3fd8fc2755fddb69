//! Point sets and charts on unit spheres.
//!
//! * `S^1`: uniform angle grids.
//! * `S^2`: recursive icosahedral subdivision (with a watertight triangulation).
//! * `S^n`, `n ≥ 3`: a Kronecker low-discrepancy sequence pushed through Box-Muller.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Distance kept from chart singularities (poles and the azimuth seam).
pub const CHART_MARGIN: f64 = 0.05;

pub type Triangle = [usize; 3];

/// Vertices and faces of the icosphere at the given subdivision level.
pub fn icosphere(level: u32) -> (Vec<DVector<f64>>, Vec<Triangle>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    for v in verts.iter_mut() {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        v.iter_mut().for_each(|c| *c /= n);
    }
    let mut faces: Vec<Triangle> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = if a < b { (a, b) } else { (b, a) };
            if let Some(&i) = cache.get(&key) {
                return i;
            }
            let (va, vb) = (verts[a], verts[b]);
            let mut m = [va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]];
            let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
            m.iter_mut().for_each(|c| *c /= n);
            verts.push(m);
            cache.insert(key, verts.len() - 1);
            verts.len() - 1
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let a = midpoint(f[0], f[1], &mut verts);
            let b = midpoint(f[1], f[2], &mut verts);
            let c = midpoint(f[2], f[0], &mut verts);
            next.push([f[0], a, c]);
            next.push([f[1], b, a]);
            next.push([f[2], c, b]);
            next.push([a, b, c]);
        }
        faces = next;
    }
    let points = verts.into_iter().map(|v| DVector::from_column_slice(&v)).collect();
    (points, faces)
}

pub fn circle_grid(count: usize) -> Vec<DVector<f64>> {
    (0..count)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / count as f64;
            DVector::from_vec(vec![a.cos(), a.sin()])
        })
        .collect()
}

/// Quasi-uniform points on `S^{dim-1}` from an additive-recurrence sequence.
pub fn low_discrepancy_sphere(dim: usize, count: usize) -> Vec<DVector<f64>> {
    let pairs = dim.div_ceil(2);
    let cube = 2 * pairs;
    // generalized golden ratio: root of x^(d+1) = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (cube as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=cube).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
    (0..count)
        .map(|i| {
            let mut v = DVector::zeros(dim);
            for p in 0..pairs {
                let a = (0.5 + alpha[2 * p] * (i as f64 + 1.0)).fract();
                let b = (0.5 + alpha[2 * p + 1] * (i as f64 + 1.0)).fract();
                let r = (-2.0 * (1.0 - a).max(1e-300).ln()).sqrt();
                let th = 2.0 * PI * b;
                v[2 * p] = r * th.cos();
                if 2 * p + 1 < dim {
                    v[2 * p + 1] = r * th.sin();
                }
            }
            let n = v.norm();
            v / n
        })
        .collect()
}

/// Quasi-uniform grid on `S^{dim-1}` with a resolution knob.
///
/// `dim = 2`: `resolution` angles. `dim = 3`: the smallest icosphere with at least
/// `resolution²` vertices (faces returned). `dim ≥ 4`: `resolution^(dim-1)` points,
/// capped at 200 000.
pub fn sphere_grid(dim: usize, resolution: usize) -> (Vec<DVector<f64>>, Option<Vec<Triangle>>) {
    match dim {
        2 => (circle_grid(resolution.max(3)), None),
        3 => {
            let target = resolution * resolution;
            let mut level = 0;
            while 10 * 4usize.pow(level) + 2 < target {
                level += 1;
            }
            let (p, f) = icosphere(level);
            (p, Some(f))
        }
        _ => {
            let count = (resolution as f64).powi(dim as i32 - 1).min(200_000.0) as usize;
            (low_discrepancy_sphere(dim, count.max(16)), None)
        }
    }
}

/// Hyperspherical chart of a totally geodesic `S^k` spanned by the rows of `frame`.
///
/// Angles `(a_1, …, a_k)`: `a_1..a_{k-1}` are polar angles in `[m, π-m]`, `a_k` is the
/// azimuth in `[-π+m, π-m]`. `cap` cyclically rotates the frame rows so that two caps
/// cover the poles and seam of each other.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereChart {
    frame: DMatrix<f64>,
    cap: usize,
}

#[derive(Debug, Clone)]
pub struct SphereJet {
    pub u: DVector<f64>,
    /// `dim × k`, column `j` is `∂u/∂a_j`
    pub du: DMatrix<f64>,
    /// `ddu[i][j] = ∂²u/∂a_i∂a_j`
    pub ddu: Vec<Vec<DVector<f64>>>,
}

impl SphereChart {
    pub fn new(frame: DMatrix<f64>, cap: usize) -> Self {
        let rows = frame.nrows();
        let mut rotated = frame.clone();
        for r in 0..rows {
            rotated.set_row(r, &frame.row((r + cap) % rows));
        }
        SphereChart { frame: rotated, cap: cap % rows }
    }

    /// The frame as passed to [`Self::new`].
    pub fn frame_unrotated(&self) -> DMatrix<f64> {
        let rows = self.frame.nrows();
        let mut frame = self.frame.clone();
        for r in 0..rows {
            frame.set_row((r + self.cap) % rows, &self.frame.row(r));
        }
        frame
    }

    pub fn k(&self) -> usize {
        self.frame.nrows() - 1
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn domain(&self) -> Vec<(f64, f64)> {
        let k = self.k();
        let mut d = vec![(CHART_MARGIN, PI - CHART_MARGIN); k - 1];
        d.push((-PI + CHART_MARGIN, PI - CHART_MARGIN));
        d
    }

    /// Coordinates `c_i` of the point in the frame, with first and second angle derivatives.
    fn coefficients(&self, angles: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
        let k = self.k();
        // c_i = prod_j g_ij(a_j), g in {sin, cos, 1}
        // i < k: sin(a_1)...sin(a_i) cos(a_{i+1}); i = k: sin(a_1)...sin(a_k)
        #[derive(Clone, Copy)]
        enum G {
            Sin,
            Cos,
            One,
        }
        let factor = |i: usize, j: usize| -> G {
            if j < i {
                G::Sin
            } else if j == i {
                if i < k {
                    G::Cos
                } else {
                    G::One
                }
            } else {
                G::One
            }
        };
        // c_k uses sin for every angle
        let factor = |i: usize, j: usize| -> G {
            if i == k {
                G::Sin
            } else {
                factor(i, j)
            }
        };
        let eval = |g: G, a: f64, order: usize| -> f64 {
            match (g, order % 4) {
                (G::One, 0) => 1.0,
                (G::One, _) => 0.0,
                (G::Sin, 0) => a.sin(),
                (G::Sin, 1) => a.cos(),
                (G::Sin, 2) => -a.sin(),
                (G::Sin, _) => -a.cos(),
                (G::Cos, 0) => a.cos(),
                (G::Cos, 1) => -a.sin(),
                (G::Cos, 2) => -a.cos(),
                (G::Cos, _) => a.sin(),
            }
        };
        let mut c = vec![0.0; k + 1];
        let mut dc = vec![vec![0.0; k]; k + 1];
        let mut ddc = vec![vec![vec![0.0; k]; k]; k + 1];
        for i in 0..=k {
            let prod = |orders: &[usize]| -> f64 {
                (0..k).map(|j| eval(factor(i, j), angles[j], orders[j])).product()
            };
            let mut orders = vec![0usize; k];
            c[i] = prod(&orders);
            for a in 0..k {
                orders[a] += 1;
                dc[i][a] = prod(&orders);
                for b in 0..k {
                    orders[b] += 1;
                    ddc[i][a][b] = prod(&orders);
                    orders[b] -= 1;
                }
                orders[a] -= 1;
            }
        }
        (c, dc, ddc)
    }

    pub fn eval(&self, angles: &[f64]) -> SphereJet {
        let k = self.k();
        let dim = self.ambient_dim();
        let (c, dc, ddc) = self.coefficients(angles);
        let combine = |w: &dyn Fn(usize) -> f64| -> DVector<f64> {
            let mut v = DVector::zeros(dim);
            for i in 0..=k {
                let s = w(i);
                if s != 0.0 {
                    v += self.frame.row(i).transpose() * s;
                }
            }
            v
        };
        let u = combine(&|i| c[i]);
        let mut du = DMatrix::zeros(dim, k);
        for a in 0..k {
            du.set_column(a, &combine(&|i| dc[i][a]));
        }
        let ddu = (0..k)
            .map(|a| (0..k).map(|b| combine(&|i| ddc[i][a][b])).collect())
            .collect();
        SphereJet { u, du, ddu }
    }

    /// Chart angles of a unit vector lying in the frame's span (inverse of [`Self::eval`]).
    pub fn angles_of(&self, u: &DVector<f64>) -> Vec<f64> {
        let k = self.k();
        let c: Vec<f64> = (0..=k).map(|i| self.frame.row(i).transpose().dot(u)).collect();
        let mut angles = vec![0.0; k];
        for j in 0..k {
            if j + 1 < k {
                let tail: f64 = c[j..].iter().map(|v| v * v).sum::<f64>().sqrt();
                angles[j] = (c[j] / tail.max(1e-300)).clamp(-1.0, 1.0).acos();
            } else {
                angles[j] = c[k].atan2(c[k - 1]);
            }
        }
        angles
    }
}
