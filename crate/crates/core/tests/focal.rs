use nalgebra::DVector;
use wulfflab::focal::{cartan_residual, cartan_residual_with, focal_map, second_form_at, FocalOptions};
use wulfflab::wulff::{product_immersion, SubsphereSpec};
use wulfflab::{AnisotropyFunction, Error, ImmersionPatch};

fn quad3() -> AnisotropyFunction {
    AnisotropyFunction::quadratic(&[1.0, 2.0, 4.0]).unwrap()
}

#[test]
fn product_focal_point_is_the_line_component() {
    let f = quad3();
    let spec = SubsphereSpec::coordinate(3, 1).unwrap();
    let patch = product_immersion(&f, &spec, 0.5).unwrap();
    let seed = [0.3, 0.4];
    let data = focal_map(&f, &patch, 2.0, &seed, 40).unwrap();
    let v = patch.position(&seed).unwrap() + f.phi(&patch.normal(&seed).unwrap()).unwrap() * 0.5;
    assert!((DVector::from_column_slice(&data.q) - &v).norm() < 1e-12);
    assert!((data.q[2] - 0.4).abs() < 1e-12);
    assert!(data.leaf_samples.len() > 10);
    assert!(data.leaf_drift < 1e-6);
    assert!(data.leaf_equation_residual < 1e-8, "{}", data.leaf_equation_residual);
    assert_eq!(data.focal_rank_deficiency, 1);
    assert!(data.gauss_map_min_singular > 1e-6);
}

#[test]
fn product_cartan_terms_vanish() {
    let f = quad3();
    let spec = SubsphereSpec::coordinate(3, 1).unwrap();
    let patch = product_immersion(&f, &spec, 0.5).unwrap();
    let data = cartan_residual(&f, &patch, 2.0, &[0.3, 0.4]).unwrap();
    assert!(data.cartan_residual.unwrap().abs() < 1e-10);
    assert!(data.ii_max_abs().unwrap() < 1e-6);
    assert!(data.trace_antisymmetry.unwrap() < 1e-6);
    assert!(data.gamma.iter().all(|g| *g > 0.0));
    assert_eq!(data.antipodal_pairs.len(), 5);
    for pair in &data.antipodal_pairs {
        assert!(pair.normal_residual < 1e-9);
    }
}

#[test]
fn inward_sphere_focuses_at_center() {
    let f = AnisotropyFunction::isotropic(3);
    let patch = ImmersionPatch::sphere(&[0.5, -1.0, 2.0], 2.0).unwrap().with_orientation(-1.0);
    let data = focal_map(&f, &patch, 0.5, &[1.2, 0.3], 32).unwrap();
    assert!((DVector::from_column_slice(&data.q) - DVector::from_vec(vec![0.5, -1.0, 2.0])).norm() < 1e-12);
    assert_eq!(data.focal_rank_deficiency, 2);
}

#[test]
fn non_curvature_and_zero_are_rejected() {
    let f = quad3();
    let spec = SubsphereSpec::coordinate(3, 1).unwrap();
    let patch = product_immersion(&f, &spec, 0.5).unwrap();
    assert!(matches!(focal_map(&f, &patch, 0.0, &[0.3, 0.4], 8), Err(Error::ZeroCurvature)));
    assert!(matches!(focal_map(&f, &patch, 3.0, &[0.3, 0.4], 8), Err(Error::NotACurvature { .. })));
}

#[test]
fn isotropic_cylinder_gamma_counts_multiplicities() {
    let f = AnisotropyFunction::isotropic(4);
    let spec = SubsphereSpec::coordinate(4, 1).unwrap();
    let patch = product_immersion(&f, &spec, 0.5).unwrap();
    let data = cartan_residual(&f, &patch, 2.0, &patch.center()).unwrap();
    assert_eq!(data.gamma.len(), 1);
    assert!((data.gamma[0] - 4.0).abs() < 1e-9);
    assert!(data.cartan_residual.unwrap().abs() < 1e-12);
}

#[test]
fn torus_meridian_leaf_has_antisymmetric_traces() {
    // inward normal: the meridian curvature is +1/r and its focal set is the core circle
    let (big, small) = (2.0, 0.5);
    let f = AnisotropyFunction::isotropic(3);
    let patch = ImmersionPatch::torus(big, small).unwrap().with_orientation(-1.0);
    let options = FocalOptions { require_isoparametric: false, ..FocalOptions::default() };
    let seed = [0.4, 0.3];
    let data = cartan_residual_with(&f, &patch, 1.0 / small, &seed, &options).unwrap();
    assert!(data.iso_drift.unwrap() > 1e-3);
    assert!(data.leaf_equation_residual < 1e-8);
    let sf = data.second_form.as_ref().unwrap();
    assert!(sf.ii_deviation < 1e-6, "{}", sf.ii_deviation);
    // tr II_u = cos(b)/R on the core circle
    assert!((sf.trace - seed[1].cos() / big).abs() < 1e-6, "{}", sf.trace);
    assert!(data.trace_antisymmetry.unwrap() < 1e-6, "{:?}", data.trace_antisymmetry);
    assert!(data.antipodal_pairs.iter().any(|p| p.trace_u.abs() > 1e-2));
    assert!(data.d_normal_angle < 1e-9);
}

#[test]
fn strict_mode_rejects_torus() {
    let f = AnisotropyFunction::isotropic(3);
    let patch = ImmersionPatch::torus(2.0, 0.5).unwrap().with_orientation(-1.0);
    assert!(matches!(cartan_residual(&f, &patch, 2.0, &[0.4, 0.3]), Err(Error::NotIsoparametric { .. })));
}

#[test]
fn anisotropic_second_form_routes_agree() {
    let f = quad3();
    let patch = ImmersionPatch::torus(2.0, 0.5).unwrap().with_orientation(-1.0);
    for p in patch.random_params(6, 23) {
        let lambda = wulfflab::hypersurface::anisotropic_curvatures(&f, &patch, &p).unwrap().lambdas[0];
        let sf = second_form_at(&f, &patch, lambda, &p).unwrap();
        assert!(sf.ii_deviation < 1e-6, "{}", sf.ii_deviation);
        assert!(sf.basis_orthonormality < 1e-8);
    }
}

#[test]
fn isotropic_second_form_is_diagonal_ratio() {
    let f = AnisotropyFunction::isotropic(3);
    let patch = ImmersionPatch::torus(2.0, 0.5).unwrap().with_orientation(-1.0);
    let p = [0.1, 0.7];
    let sf = second_form_at(&f, &patch, 2.0, &p).unwrap();
    let l = sf.lambdas[0];
    let expected = l / (1.0 - 0.5 * l);
    assert!((sf.ii_closed_form[0][0] - expected).abs() < 1e-12);
    assert!((sf.ii_matrix[0][0] - expected).abs() < 1e-6);
}
