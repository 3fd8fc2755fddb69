//! Small dense linear-algebra helpers shared by the geometry modules.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{Error, Result};

/// Eigenvalues below this are treated as a genuine loss of positivity when taking square roots.
pub const SQRT_NEGATIVE_TOL: f64 = 1e-8;

/// Orthonormal basis of `u^⊥`, returned as the rows of an `n × (n+1)` matrix.
///
/// Gram-Schmidt is seeded with the coordinate axis least aligned with `u`, then the
/// remaining axes in increasing index order, so the basis depends only on `u`.
pub fn orthonormal_complement(u: &DVector<f64>) -> DMatrix<f64> {
    let dim = u.len();
    let norm = u.norm();
    let unit = u / norm;
    let seed = (0..dim)
        .min_by(|&a, &b| unit[a].abs().partial_cmp(&unit[b].abs()).unwrap())
        .unwrap_or(0);
    let mut order = vec![seed];
    order.extend((0..dim).filter(|&i| i != seed));

    let mut kept: Vec<DVector<f64>> = vec![unit.clone()];
    for axis in order {
        if kept.len() == dim {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        // two passes of classical Gram-Schmidt
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
    let mut basis = DMatrix::zeros(dim - 1, dim);
    for (r, v) in kept.iter().skip(1).enumerate() {
        basis.set_row(r, &v.transpose());
    }
    basis
}

/// Generalized cross product of the `n` columns of an `(n+1) × n` matrix.
///
/// Component `i` is `det[e_i, c_1, …, c_n]`, so `det[N, c_1, …, c_n] = |N|² > 0`.
pub fn generalized_cross(cols: &DMatrix<f64>) -> DVector<f64> {
    let dim = cols.nrows();
    debug_assert_eq!(cols.ncols() + 1, dim);
    let mut out = DVector::zeros(dim);
    let mut m = DMatrix::zeros(dim, dim);
    m.view_mut((0, 1), (dim, dim - 1)).copy_from(cols);
    for i in 0..dim {
        m.column_mut(0).fill(0.0);
        m[(i, 0)] = 1.0;
        out[i] = m.determinant();
    }
    out
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric eigen-decomposition with eigenvalues sorted in descending order.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = symmetrize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m).symmetric_eigen().eigenvalues.min()
}

/// Positive square root of a symmetric positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-8, 0)` are clamped to zero; anything more negative is a
/// convexity violation.
pub fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = symmetrize(m).symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min < -SQRT_NEGATIVE_TOL {
        return Err(Error::ConvexityViolation { min_eigenvalue: min, at: vec![] });
    }
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    Ok(symmetrize(&(q * DMatrix::from_diagonal(&roots) * q.transpose())))
}

pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    m.clone().svd(false, false).singular_values
}

pub fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    singular_values(m).min()
}

/// Left inverse `(AᵀA)⁻¹Aᵀ` of a full-column-rank matrix.
pub fn left_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let gram = a.transpose() * a;
    gram.try_inverse().map(|g| g * a.transpose())
}

/// Eigenvalues of a general square matrix. The scalar part `tr(m)/n` is shifted out and
/// the remainder rescaled before the Schur iteration, which otherwise can stall on
/// near-scalar input such as `−I + O(ε)`.
pub fn general_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(vec![]);
    }
    let shift = m.trace() / n as f64;
    let mut r = m - DMatrix::identity(n, n) * shift;
    let scale = max_abs(&r);
    if scale == 0.0 {
        return Ok(vec![Complex::new(shift, 0.0); n]);
    }
    r /= scale;
    let schur = Schur::try_new(r, f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::NoConvergence { context: "Schur eigenvalue iteration".into() })?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z * scale + shift).collect())
}

const SCHUR_MAX_ITER: usize = 10_000;

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Fourth-order central difference weights at offsets `-2h, -h, h, 2h`.
pub const CENTRAL4: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];

/// Fourth-order central derivative of a vector-valued function along a direction.
pub fn central4_vec<F>(mut f: F, h: f64) -> DVector<f64>
where
    F: FnMut(f64) -> DVector<f64>,
{
    let mut acc: Option<DVector<f64>> = None;
    for (off, w) in CENTRAL4 {
        let v = f(off * h) * (w / h);
        acc = Some(match acc {
            Some(a) => a + v,
            None => v,
        });
    }
    acc.unwrap()
}

pub fn central4_mat<F>(mut f: F, h: f64) -> DMatrix<f64>
where
    F: FnMut(f64) -> DMatrix<f64>,
{
    let mut acc: Option<DMatrix<f64>> = None;
    for (off, w) in CENTRAL4 {
        let v = f(off * h) * (w / h);
        acc = Some(match acc {
            Some(a) => a + v,
            None => v,
        });
    }
    acc.unwrap()
}

/// Largest principal angle between the column spans of two matrices (radians).
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let s = singular_values(&(qa.transpose() * qb));
    s.iter().fold(f64::INFINITY, |m, &v| m.min(v)).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_eigenvalues_of_near_scalar_matrix() {
        let mut m = -DMatrix::<f64>::identity(3, 3);
        m[(0, 1)] = 3e-16;
        m[(2, 0)] = -2e-16;
        m[(1, 1)] += 4e-16;
        let ev = general_eigenvalues(&m).unwrap();
        assert!(ev.iter().all(|z| (z.re + 1.0).abs() < 1e-14 && z.im.abs() < 1e-14));
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        let mut im: Vec<f64> = general_eigenvalues(&r).unwrap().iter().map(|z| z.im).collect();
        im.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((im[0] + 2.0).abs() < 1e-14 && (im[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let u = DVector::from_vec(vec![0.3, -0.5, 0.8]).normalize();
        let e = orthonormal_complement(&u);
        assert_eq!(e.shape(), (2, 3));
        let g = &e * e.transpose();
        assert!((g - DMatrix::identity(2, 2)).abs().max() < 1e-14);
        assert!((&e * &u).abs().max() < 1e-14);
    }

    #[test]
    fn complement_seed_is_least_aligned_axis() {
        let u = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let e = orthonormal_complement(&u);
        // x axis and y axis tie at 0; the first minimum wins
        assert!((e.row(0)[0] - 1.0).abs() < 1e-15);
        assert!((e.row(1)[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cross_matches_3d_cross_product() {
        let a = nalgebra::Vector3::new(1.0, 2.0, -0.5);
        let b = nalgebra::Vector3::new(-0.3, 0.7, 2.0);
        let mut m = DMatrix::zeros(3, 2);
        m.set_column(0, &DVector::from_column_slice(a.as_slice()));
        m.set_column(1, &DVector::from_column_slice(b.as_slice()));
        let n = generalized_cross(&m);
        let c = a.cross(&b);
        for i in 0..3 {
            assert!((n[i] - c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_clamps_round_off_and_rejects_negative() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, -1e-12]));
        let r = sym_sqrt(&m).unwrap();
        assert!((r[(0, 0)] - 2.0).abs() < 1e-14);
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, -1e-3]));
        assert!(matches!(sym_sqrt(&bad), Err(Error::ConvexityViolation { .. })));
    }

    #[test]
    fn central4_is_fourth_order() {
        let d = central4_vec(|s| DVector::from_element(1, (0.7 + s).sin()), 1e-2);
        assert!((d[0] - 0.7f64.cos()).abs() < 1e-9);
    }
}
