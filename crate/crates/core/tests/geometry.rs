use nalgebra::{DMatrix, DVector};
use wulfflab::hypersurface::{
    anisotropic_curvatures, anisotropic_mean, anisotropic_mean_checked, f_weingarten, f_weingarten_checked,
    frame_at, shape_operator,
};
use wulfflab::wulff::{product_immersion, SubsphereSpec};
use wulfflab::{AnisotropyFunction, DerivativeMode, ImmersionPatch};

fn anisotropies(dim: usize) -> Vec<AnisotropyFunction> {
    let mut q = vec![1.0; dim];
    q[dim - 1] = 4.0;
    vec![
        AnisotropyFunction::isotropic(dim),
        AnisotropyFunction::quadratic(&q).unwrap(),
        AnisotropyFunction::axisymmetric(dim, &[1.0, 0.05]).unwrap(),
    ]
}

#[test]
fn wulff_patch_is_umbilic_with_minus_one() {
    for f in anisotropies(3) {
        let patch = ImmersionPatch::wulff(&f);
        for p in patch.random_params(20, 5) {
            let spec = anisotropic_curvatures(&f, &patch, &p).unwrap();
            assert_eq!(spec.g(), 1);
            for l in &spec.lambdas {
                assert!((l + 1.0).abs() < 1e-8, "{l}");
            }
            assert!((anisotropic_mean(&f, &patch, &p).unwrap() + 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn product_spectrum_both_caps() {
    for f in anisotropies(4) {
        for k in [1, 2] {
            for t in [0.5, 2.0] {
                let spec = SubsphereSpec::coordinate(4, k).unwrap();
                for cap in [0, 1] {
                    let patch = product_immersion(&f, &spec, t).unwrap().with_cap(cap);
                    for p in patch.random_params(10, 7) {
                        let s = anisotropic_curvatures(&f, &patch, &p).unwrap();
                        let mut expected = vec![1.0 / t; k];
                        expected.extend(vec![0.0; 3 - k]);
                        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
                        for (a, e) in s.lambdas.iter().zip(&expected) {
                            assert!((a - e).abs() < 1e-8, "k={k} t={t} cap={cap}: {:?}", s.lambdas);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn product_spectrum_in_fd_mode() {
    let f = AnisotropyFunction::axisymmetric(4, &[1.0, 0.05])
        .unwrap()
        .with_mode(DerivativeMode::FiniteDifference)
        .unwrap();
    let spec = SubsphereSpec::coordinate(4, 2).unwrap();
    let patch = product_immersion(&f, &spec, 0.5).unwrap();
    for p in patch.random_params(10, 2) {
        let s = anisotropic_curvatures(&f, &patch, &p).unwrap();
        let expected = [2.0, 2.0, 0.0];
        for (a, e) in s.lambdas.iter().zip(&expected) {
            assert!((a - e).abs() < 1e-5, "{:?}", s.lambdas);
        }
    }
}

#[test]
fn helicoid_isotropic_curvatures() {
    let f = AnisotropyFunction::isotropic(3);
    let patch = ImmersionPatch::helicoid(2.0);
    for p in patch.random_params(10, 3) {
        let s = anisotropic_curvatures(&f, &patch, &p).unwrap();
        let k = 1.0 / (1.0 + p[1] * p[1]);
        assert!((s.lambdas[0] - k).abs() < 1e-12);
        assert!((s.lambdas[1] + k).abs() < 1e-12);
    }
}

#[test]
fn weingarten_routes_agree() {
    let f = AnisotropyFunction::quadratic(&[1.0, 2.0, 4.0]).unwrap();
    for patch in [
        ImmersionPatch::helicoid(2.0),
        ImmersionPatch::torus(2.0, 0.5).unwrap(),
        ImmersionPatch::wulff(&f),
    ] {
        for p in patch.random_params(10, 11) {
            let c = f_weingarten_checked(&f, &patch, &p).unwrap();
            assert!(c.deviation < 1e-6, "{}", c.deviation);
            let (h, h2) = anisotropic_mean_checked(&f, &patch, &p).unwrap();
            assert!((h - h2).abs() < 1e-6);
        }
    }
}

#[test]
fn spectrum_is_real_and_matches_nonsymmetric_route() {
    let f = AnisotropyFunction::quadratic(&[1.0, 2.0, 4.0]).unwrap();
    let patch = ImmersionPatch::torus(2.0, 0.5).unwrap();
    for p in patch.random_params(50, 13) {
        let s = f_weingarten(&f, &patch, &p).unwrap();
        let ev = wulfflab::linalg::general_eigenvalues(&s).unwrap();
        assert!(ev.iter().all(|z| z.im.abs() < 1e-10));
        let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let spec = anisotropic_curvatures(&f, &patch, &p).unwrap();
        for (a, b) in re.iter().zip(&spec.lambdas) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!((s.trace() - spec.lambdas.iter().sum::<f64>()).abs() < 1e-10);
    }
}

#[test]
fn isotropic_reduction_and_orientation_flip() {
    let f = AnisotropyFunction::isotropic(3);
    let patch = ImmersionPatch::torus(2.0, 0.5).unwrap();
    for p in patch.random_params(10, 17) {
        let w = shape_operator(&patch, &p).unwrap();
        let s = f_weingarten(&f, &patch, &p).unwrap();
        assert!((&w - &s).abs().max() < 1e-12);
        let a = anisotropic_curvatures(&f, &patch, &p).unwrap();
        let b = anisotropic_curvatures(&f, &patch.flipped(), &p).unwrap();
        for (x, y) in a.lambdas.iter().zip(b.lambdas.iter().rev()) {
            assert!((x + y).abs() < 1e-12);
        }
    }
}

#[test]
fn homothety_scales_curvatures() {
    let f = AnisotropyFunction::quadratic(&[1.0, 2.0, 4.0]).unwrap();
    let patch = ImmersionPatch::helicoid(2.0);
    let scaled = patch.scaled(2.5).unwrap();
    for p in patch.random_params(10, 19) {
        let a = anisotropic_curvatures(&f, &patch, &p).unwrap();
        let b = anisotropic_curvatures(&f, &scaled, &p).unwrap();
        for (x, y) in a.lambdas.iter().zip(&b.lambdas) {
            assert!((x / 2.5 - y).abs() < 1e-9);
        }
    }
}

#[test]
fn metric_of_helicoid_frame() {
    let fr = frame_at(&ImmersionPatch::helicoid(2.0), &[0.1, 0.5]).unwrap();
    let expected = DMatrix::from_row_slice(2, 2, &[1.25, 0.0, 0.0, 1.0]);
    assert!((fr.metric - expected).abs().max() < 1e-14);
    let _ = DVector::<f64>::zeros(1);
}
