//! The ten acceptance criteria, each at its stated tolerance and runtime budget.
//! Runs without the libtest harness so the per-criterion lines are never captured;
//! exits nonzero if any criterion fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wulfflab::catalog::{builtin_anisotropies, builtin_patches, entry, extend_axis_with, AuditScope, CatalogEntry, ExtendOptions};
use wulfflab::classify::{classify, classify_with, Case, ClassifyOptions};
use wulfflab::fit::{fit_anisotropy, FitOptions};
use wulfflab::focal::{cartan_residual, focal_map};
use wulfflab::hypersurface::{anisotropic_curvatures, anisotropic_mean, f_weingarten, shape_operator};
use wulfflab::parallel::{mean_profile, transformed_spectrum, translated_singular_values};
use wulfflab::sphere::low_discrepancy_sphere;
use wulfflab::wulff::{product_immersion, SubsphereSpec};
use wulfflab::{AnisotropyFunction, DerivativeMode, ImmersionPatch};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Quadratic norm `diag(1, …, 1, 4)` and axisymmetric `(1, 0.05)` with the isotropic norm.
fn three_families(dim: usize) -> Vec<(&'static str, AnisotropyFunction)> {
    let mut q = vec![1.0; dim];
    q[dim - 1] = 4.0;
    vec![
        ("isotropic", AnisotropyFunction::isotropic(dim)),
        ("quadratic", AnisotropyFunction::quadratic(&q).unwrap()),
        ("axisymmetric", AnisotropyFunction::axisymmetric(dim, &[1.0, 0.05]).unwrap()),
    ]
}

fn catalog(dim: usize) -> Vec<(String, CatalogEntry)> {
    let mut out = Vec::new();
    for a in builtin_anisotropies(dim).unwrap() {
        for e in builtin_patches(&a.function).unwrap() {
            out.push((a.name.clone(), e));
        }
    }
    out
}

fn isoparametric_catalog() -> Vec<(String, CatalogEntry)> {
    let mut out = catalog(3);
    out.extend(catalog(4));
    out.retain(|(_, e)| e.expected_spectrum.is_some());
    out
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn criterion_1() -> Verdict {
    let mut worst_analytic: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    let mut configs = 0;
    for dim in [3, 4] {
        let n = dim - 1;
        for (_, f) in three_families(dim) {
            let fd = f.clone().with_mode(DerivativeMode::FiniteDifference).unwrap();
            for k in 1..=n {
                let spec = SubsphereSpec::coordinate(dim, k).unwrap();
                for t in [0.5, 2.0] {
                    configs += 1;
                    let mut want = vec![1.0 / t; k];
                    want.extend(vec![0.0; n - k]);
                    for cap in [0, 1] {
                        for (g, worst) in [(&f, &mut worst_analytic), (&fd, &mut worst_fd)] {
                            let patch = product_immersion(g, &spec, t).unwrap().with_cap(cap);
                            for p in patch.random_params(100, 11 + cap as u64) {
                                let l = anisotropic_curvatures(g, &patch, &p).unwrap().lambdas;
                                *worst = worst.max(max_dev(&l, &want));
                            }
                        }
                    }
                }
            }
        }
    }
    verdict(
        worst_analytic < 1e-8 && worst_fd < 1e-5,
        format!("{configs} configurations x 200 points; max deviation {worst_analytic:.2e} analytic, {worst_fd:.2e} fd"),
    )
}

fn criterion_2() -> Verdict {
    let mut worst_lambda: f64 = 0.0;
    let mut worst_g = 1;
    let mut worst_dual: f64 = 0.0;
    for (_, f) in three_families(3) {
        let patch = ImmersionPatch::wulff(&f);
        for p in patch.random_params(200, 3) {
            let s = anisotropic_curvatures(&f, &patch, &p).unwrap();
            worst_g = worst_g.max(s.g());
            worst_lambda = s.lambdas.iter().map(|l| (l + 1.0).abs()).fold(worst_lambda, f64::max);
        }
        let res = 64;
        let grid: Vec<DVector<f64>> = (0..res)
            .flat_map(|i| {
                (0..res).map(move |j| {
                    let th = (i as f64 + 0.5) / res as f64 * std::f64::consts::PI;
                    let ph = j as f64 / res as f64 * 2.0 * std::f64::consts::PI;
                    DVector::from_vec(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()])
                })
            })
            .collect();
        let dev = grid
            .par_iter()
            .map(|u| (f.dual_norm(&f.phi(u).unwrap()).unwrap().value - 1.0).abs())
            .reduce(|| 0.0, f64::max);
        worst_dual = worst_dual.max(dev);
    }
    verdict(
        worst_g == 1 && worst_lambda < 1e-8 && worst_dual < 1e-6,
        format!("g = {worst_g}, max |lambda + 1| {worst_lambda:.2e}, max |F*(phi(u)) - 1| {worst_dual:.2e} on 64x64 (outward normal, T = -d nu)"),
    )
}

/// Nine translation parameters with `|1 − tλ| ≥ 0.25` for every `λ` of the entry.
fn admissible_t(lambdas: &[f64]) -> Vec<f64> {
    let candidates = [-1.9, -1.6, -1.3, -0.7, -0.45, -0.3, 0.15, 0.3, 0.45, 0.6, 0.9, 1.2, 1.4, 1.7, 1.95];
    candidates
        .iter()
        .copied()
        .filter(|t| lambdas.iter().all(|l| (1.0 - t * l).abs() >= 0.25))
        .take(9)
        .collect()
}

fn criterion_3() -> Verdict {
    let entries = isoparametric_catalog();
    let results: Vec<(f64, usize)> = entries
        .par_iter()
        .map(|(name, e)| {
            let f = &e.anisotropy;
            let ts = admissible_t(&e.expected_spectrum.as_ref().unwrap().lambdas());
            assert_eq!(ts.len(), 9, "{name} {}", e.name);
            let mut worst: f64 = 0.0;
            for p in e.patch.random_params(6, 21) {
                for &t in &ts {
                    worst = worst.max(transformed_spectrum(f, &e.patch, &p, t).unwrap().max_deviation);
                }
            }
            (worst, ts.len())
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    verdict(worst < 1e-6, format!("{} entries x 9 t x 6 points; max |lambda(t) - lambda/(1 - t lambda)| {worst:.2e}", entries.len()))
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pool: Vec<(AnisotropyFunction, ImmersionPatch)> = Vec::new();
    for (_, f) in three_families(3) {
        pool.push((f.clone(), entry(&f, "helicoid").unwrap().patch));
        pool.push((f.clone(), entry(&f, "torus").unwrap().patch));
        pool.push((f.clone(), entry(&f, "wulff").unwrap().patch));
    }
    for (_, f) in three_families(4) {
        pool.push((f.clone(), entry(&f, "cylinder:k=2,t=0.5").unwrap().patch));
        pool.push((f.clone(), entry(&f, "helicoid-line").unwrap().patch));
    }
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    while pairs < 50 {
        let (f, patch) = &pool[rng.gen_range(0..pool.len())];
        let p = patch.random_params(1, rng.gen()).remove(0);
        let lambdas = anisotropic_curvatures(f, patch, &p).unwrap().lambdas;
        let t: f64 = rng.gen_range(-0.6..0.6);
        if t.abs() < 1e-3 || lambdas.iter().any(|l| (1.0 - t * l).abs() < 0.2) {
            continue;
        }
        worst = worst.max(mean_profile(f, patch, &p, &[t]).unwrap()[0].deviation);
        pairs += 1;
    }
    verdict(worst < 1e-8, format!("50 (point, t) pairs; max |H_F(t) + (1/n)(log P)'(t)| {worst:.2e}"))
}

fn criterion_5() -> Verdict {
    let entries = isoparametric_catalog();
    let results: Vec<(bool, f64, String)> = entries
        .par_iter()
        .flat_map_iter(|(name, e)| {
            let f = &e.anisotropy;
            let groups = e.expected_spectrum.as_ref().unwrap().groups.clone();
            let seed = e.patch.random_params(1, 5).remove(0);
            groups.into_iter().filter(|g| g.lambda.abs() > 1e-12).map(move |g| {
                let sv = translated_singular_values(f, &e.patch, &seed, 1.0 / g.lambda).unwrap();
                let small = sv.iter().filter(|s| **s < 1e-6).count();
                let data = focal_map(f, &e.patch, g.lambda, &seed, 32).unwrap();
                let ok = small == g.multiplicity && data.focal_rank_deficiency == g.multiplicity;
                (ok, data.leaf_equation_residual, format!("{name}/{}", e.name))
            })
        })
        .collect();
    let rank_ok = results.iter().all(|r| r.0);
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let bad: Vec<&str> = results.iter().filter(|r| !r.0).map(|r| r.2.as_str()).collect();
    verdict(
        rank_ok && worst < 1e-6,
        format!(
            "{} focal sets; rank deficiency = m {}; max leaf |lambda(x - q) + phi(nu)| {worst:.2e}",
            results.len(),
            if rank_ok { "everywhere".to_string() } else { format!("fails on {bad:?}") }
        ),
    )
}

fn criterion_6() -> Verdict {
    let mut entries = catalog(3);
    entries.extend(catalog(4));
    entries.retain(|(_, e)| e.expected_spectrum.as_ref().is_some_and(|s| s.groups.len() == 2));
    let results: Vec<(f64, f64, f64, usize)> = entries
        .par_iter()
        .map(|(_, e)| {
            let l = e.expected_spectrum.as_ref().unwrap().groups.iter().find(|g| g.lambda != 0.0).unwrap().lambda;
            let seed = e.patch.random_params(1, 9).remove(0);
            let d = cartan_residual(&e.anisotropy, &e.patch, l, &seed).unwrap();
            (d.cartan_residual.unwrap().abs(), d.ii_max_abs().unwrap(), d.trace_antisymmetry.unwrap(), d.antipodal_pairs.len())
        })
        .collect();
    let cartan = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let ii = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let anti = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let pairs_ok = results.iter().all(|r| r.3 == 5);
    verdict(
        cartan < 1e-10 && ii < 1e-6 && anti < 1e-6 && pairs_ok,
        format!("{} g = 2 entries; cartan {cartan:.2e}, |II|_inf {ii:.2e}, trace antisymmetry {anti:.2e} at 5 pairs", results.len()),
    )
}

fn criterion_7() -> Verdict {
    let mut entries = catalog(3);
    entries.extend(catalog(4));
    let mut wrong = Vec::new();
    for (name, e) in &entries {
        let res = if e.patch.chart_dim() == 2 { 15 } else { 7 };
        let v = classify(&e.anisotropy, &e.patch, &e.patch.chart_grid(res), e.complete).unwrap();
        let ok = match e.name.as_str() {
            "plane" => v.case == Case::Plane,
            "wulff" => v.case == Case::WulffShape,
            n if n.starts_with("cylinder:k=") => v.case == Case::ProductK && v.k == n[11..12].parse().ok(),
            _ => v.case == Case::NotIsoparametric,
        };
        if !ok {
            wrong.push(format!("{name}/{} -> {:?}", e.name, v.case));
        }
    }
    verdict(wrong.is_empty(), format!("{} classifications, {} wrong {wrong:?}", entries.len(), wrong.len()))
}

fn criterion_8() -> Verdict {
    let patch = ImmersionPatch::helicoid(2.0);
    let options = FitOptions::default();
    let r = fit_anisotropy(&patch, &patch.chart_grid(15), &options).unwrap();
    let norm_ok = (r.normalized_spectrum[0] - 1.0).abs() < 1e-2 && (r.normalized_spectrum[1] + 1.0).abs() < 1e-2;
    let strict_fit = r.final_spread < 1e-3;
    let fallback_fit = r.final_spread < 1e-2;

    let f = r.anisotropy(3).unwrap();
    let ext = extend_axis_with(&f, 0.2, &ExtendOptions { scope: AuditScope::Band, ..Default::default() }).unwrap().function;
    let line = entry(&ext, "helicoid-line").unwrap();
    let grid = line.patch.chart_grid(9);
    let spectra: Vec<Vec<f64>> =
        grid.par_iter().map(|p| anisotropic_curvatures(&ext, &line.patch, p).unwrap().lambdas).collect();
    let c = spectra.iter().map(|l| l[0]).sum::<f64>() / spectra.len() as f64;
    let target = [c, 0.0, -c];
    let pointwise = spectra.iter().map(|l| max_dev(l, &target)).fold(0.0, f64::max);
    let loose = ClassifyOptions { iso_tol: 2e-2, cluster_tol: 1e-2 };
    let v = classify_with(&ext, &line.patch, &grid, false, &loose).unwrap();
    let local = v.case == Case::LocalOnly && v.g == 3;

    let pass = fallback_fit && norm_ok && local && pointwise < 1e-2;
    let mut detail = format!(
        "final_spread {:.2e}, normalized {:?}; UxR c = {c:.5}, max pointwise deviation {pointwise:.2e}, {:?} g = {}",
        r.final_spread,
        r.normalized_spectrum.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>(),
        v.case,
        v.g
    );
    if !strict_fit || pointwise >= 5e-3 {
        detail.push_str(&format!(
            "; met at the 1e-2 fallback only (spread < 1e-3: {strict_fit}, groups within 5e-3: {})",
            pointwise < 5e-3
        ));
    }
    verdict(pass, detail)
}

fn criterion_9() -> Verdict {
    // (a) eigenvalues of the nonsymmetric S_F against the symmetrized route
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut pool: Vec<AnisotropyFunction> = Vec::new();
    for dim in [3, 4] {
        pool.extend(builtin_anisotropies(dim).unwrap().into_iter().map(|a| a.function));
        for _ in 0..4 {
            let q: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..3.0)).collect();
            pool.push(AnisotropyFunction::quadratic(&q).unwrap());
            let c1 = rng.gen_range(-0.08..0.08);
            pool.push(AnisotropyFunction::axisymmetric(dim, &[1.0, c1, 0.3 * c1 * c1]).unwrap());
        }
    }
    let patches: Vec<Vec<CatalogEntry>> = pool.iter().map(|f| builtin_patches(f).unwrap()).collect();
    let configs: Vec<(usize, usize, u64)> = (0..1000).map(|_| (rng.gen_range(0..pool.len()), rng.gen_range(0..16), rng.gen())).collect();
    let eig = configs
        .par_iter()
        .map(|&(fi, ei, seed)| {
            let f = &pool[fi];
            let e = &patches[fi][ei % patches[fi].len()];
            let p = e.patch.random_params(1, seed).remove(0);
            let s = f_weingarten(f, &e.patch, &p).unwrap();
            let general = descending(wulfflab::linalg::general_eigenvalues(&s).unwrap().iter().map(|z| z.re).collect());
            let sym = anisotropic_curvatures(f, &e.patch, &p).unwrap().lambdas;
            max_dev(&general, &sym)
        })
        .reduce(|| 0.0, f64::max);

    // (b) analytic against finite-difference derivatives
    let mut fd_dev: f64 = 0.0;
    for dim in [3, 4] {
        for (_, f) in three_families(dim).into_iter().skip(1) {
            let fd = f.clone().with_mode(DerivativeMode::FiniteDifference).unwrap();
            for u in low_discrepancy_sphere(dim, 200) {
                let (a, b) = (f.evaluate(&u).unwrap(), fd.evaluate(&u).unwrap());
                fd_dev = fd_dev.max((&a.gradient - &b.gradient).amax()).max((&a.a_matrix - &b.a_matrix).amax());
            }
        }
    }

    // (c) dual norm solver against a brute-force sup over 10^6 sphere points
    let brute_points = low_discrepancy_sphere(3, 1_000_000);
    let mut dual_dev: f64 = 0.0;
    let mut below = false;
    for (_, f) in three_families(3).into_iter().skip(1) {
        for _ in 0..20 {
            let y = DVector::from_iterator(3, (0..3).map(|_| rng.gen_range(-2.0..2.0)));
            let solver = f.dual_norm(&y).unwrap().value;
            let brute = brute_points.par_iter().map(|z| y.dot(z) / f.homogeneous(z)).reduce(|| f64::NEG_INFINITY, f64::max);
            below |= solver < brute - 1e-12;
            dual_dev = dual_dev.max((solver - brute).abs());
        }
    }
    verdict(
        eig < 1e-8 && fd_dev < 1e-6 && dual_dev < 1e-4 && !below,
        format!(
            "1000 configurations: eig(S_F) vs eig(C T C) {eig:.2e}; analytic vs fd {fd_dev:.2e}; dual norm vs {} point brute force {dual_dev:.2e} on 2 x 20 y",
            brute_points.len()
        ),
    )
}

fn criterion_10() -> Verdict {
    let mut worst: f64 = 0.0;
    for dim in [3, 4] {
        let f = AnisotropyFunction::isotropic(dim);
        for e in builtin_patches(&f).unwrap() {
            let n = e.patch.chart_dim() as f64;
            for p in e.patch.random_params(20, 10) {
                let w = shape_operator(&e.patch, &p).unwrap();
                let s = f_weingarten(&f, &e.patch, &p).unwrap();
                worst = worst.max((&s - &w).amax() / w.amax().max(1.0));
                let classical = descending(wulfflab::linalg::general_eigenvalues(&w).unwrap().iter().map(|z| z.re).collect());
                let lambdas = anisotropic_curvatures(&f, &e.patch, &p).unwrap().lambdas;
                worst = worst.max(max_dev(&lambdas, &classical));
                worst = worst.max((anisotropic_mean(&f, &e.patch, &p).unwrap() - w.trace() / n).abs());
                let nu = e.patch.normal(&p).unwrap();
                let ev = f.evaluate(&nu).unwrap();
                worst = worst.max((&ev.phi - &nu).amax());
                worst = worst.max((&ev.a_matrix - DMatrix::identity(dim - 1, dim - 1)).amax());
                let y = e.patch.position(&p).unwrap() + &nu;
                worst = worst.max((f.dual_norm(&y).unwrap().value - y.norm()).abs());
            }
        }
    }
    verdict(worst < 1e-12, format!("S_F = W, lambda, H_F, phi = id, A_F = I, F* = |.| over the catalog: max deviation {worst:.2e}"))
}

fn main() {
    type Criterion = fn() -> Verdict;
    let criteria: [(&str, f64, Criterion); 10] = [
        ("product-immersion spectrum", 5.0, criterion_1),
        ("Wulff-shape umbilicity", 5.0, criterion_2),
        ("translation law", 10.0, criterion_3),
        ("generating identity", 5.0, criterion_4),
        ("focal degeneracy", 10.0, criterion_5),
        ("Cartan identity", 10.0, criterion_6),
        ("classification sweep", 30.0, criterion_7),
        ("helicoid reconstruction", 300.0, criterion_8),
        ("oracle equivalences", 60.0, criterion_9),
        ("isotropic reduction", 5.0, criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = v.pass && secs <= *budget;
        println!(
            "criterion {:>2} {name}: {} ({}) [{secs:.2} s of {budget} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
