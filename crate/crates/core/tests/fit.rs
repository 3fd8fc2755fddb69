use wulfflab::classify::{classify_with, ClassifyOptions};
use wulfflab::fit::{fit_anisotropy, FitOptions};
use wulfflab::hypersurface::anisotropic_curvatures;
use wulfflab::wulff::{product_immersion, SubsphereSpec};
use wulfflab::{AnisotropyFunction, ImmersionPatch};

#[test]
fn recovers_the_generator_of_a_wulff_patch() {
    let generator = AnisotropyFunction::axisymmetric(3, &[1.0, 0.05]).unwrap();
    let patch = ImmersionPatch::wulff(&generator);
    let grid = patch.chart_grid(8);
    let options = FitOptions { basis_degree: 4, max_iterations: 2000, ..FitOptions::default() };
    let r = fit_anisotropy(&patch, &grid, &options).unwrap();
    assert!((r.coefficients[1] - 0.05).abs() < 1e-3, "{:?}", r.coefficients);
    assert!(r.coefficients[2].abs() < 1e-3);
    assert!(r.final_spread < 1e-6, "{}", r.final_spread);
    assert!(r.converged);
}

#[test]
fn round_cylinder_stays_isotropic() {
    let f = AnisotropyFunction::isotropic(3);
    let spec = SubsphereSpec::coordinate(3, 1).unwrap();
    let patch = product_immersion(&f, &spec, 1.0).unwrap();
    let r = fit_anisotropy(&patch, &patch.chart_grid(8), &FitOptions::default()).unwrap();
    assert!(r.final_spread < 1e-8);
    assert_eq!(r.best_restart, 0);
    assert!(r.coefficients[1..].iter().all(|c| c.abs() < 1e-12), "{:?}", r.coefficients);
}

#[test]
fn helicoid_fit() {
    let patch = ImmersionPatch::helicoid(2.0);
    let grid = patch.chart_grid(15);
    let r = fit_anisotropy(&patch, &grid, &FitOptions::default()).unwrap();
    let f = r.anisotropy(3).unwrap();
    assert!(f.convexity_audit(32).unwrap().pass);
    assert!(r.objective_history.windows(2).all(|w| w[1] <= w[0]));
    // the degree-8 basis reaches about 4.5e-3, short of 1e-3
    assert!(r.final_spread < 1e-2, "{}", r.final_spread);
    assert!(!r.converged);
    assert!((r.normalized_spectrum[0] - 1.0).abs() < 1e-2);
    assert!((r.normalized_spectrum[1] + 1.0).abs() < 1e-2);

    // gauge: 2F doubles every curvature but keeps the verdict and the normalized spectrum
    let loose = ClassifyOptions { iso_tol: 5e-2, cluster_tol: 1e-2 };
    let g = f.scaled(2.0).unwrap();
    let a = classify_with(&f, &patch, &patch.chart_grid(7), false, &loose).unwrap();
    let b = classify_with(&g, &patch, &patch.chart_grid(7), false, &loose).unwrap();
    assert_eq!(a.case, b.case);
    for (x, y) in a.groups.iter().zip(&b.groups) {
        assert!((2.0 * x.lambda - y.lambda).abs() < 1e-9);
    }
    let p = [0.3, 1.1];
    let la = anisotropic_curvatures(&f, &patch, &p).unwrap().lambdas;
    let lb = anisotropic_curvatures(&g, &patch, &p).unwrap().lambdas;
    assert!((la[0] / la[1] - lb[0] / lb[1]).abs() < 1e-9);
}

#[test]
fn rejects_bad_options() {
    let patch = ImmersionPatch::helicoid(2.0);
    let grid = patch.chart_grid(3);
    for degree in [0, 3, 10] {
        let o = FitOptions { basis_degree: degree, ..FitOptions::default() };
        assert!(fit_anisotropy(&patch, &grid, &o).is_err());
    }
}
