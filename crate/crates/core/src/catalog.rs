//! Built-in anisotropies and example hypersurfaces with known spectra.
//!
//! Entry names: `plane`, `wulff`, `cylinder:k=1,t=0.5`, `helicoid`, `helicoid-line`,
//! `sphere`, `torus`. Key/value suffixes override defaults, e.g. `helicoid:t_max=1.5`
//! or `torus:major=3,minor=1,orientation=-1`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::anisotropy::{AnisotropyFunction, ConvexityReport, DEFAULT_CONVEXITY_TOL};
use crate::error::{Error, Result};
use crate::patch::ImmersionPatch;
use crate::sphere;
use crate::wulff::{product_immersion, SubsphereSpec};

pub const AUDIT_RESOLUTION: usize = 32;
pub const DEFAULT_RAMP: f64 = 0.2;
pub const DEFAULT_HELICOID_T_MAX: f64 = 2.0;
pub const PRODUCT_T_MENU: [f64; 2] = [0.5, 2.0];
/// Half-width and base coefficients of the built-in band extension.
pub const BUILTIN_BAND_HALFWIDTH: f64 = 0.3;
pub const BUILTIN_BAND_BASE: [f64; 2] = [1.0, 0.01];

#[derive(Debug, Clone, Serialize)]
pub struct NamedAnisotropy {
    pub name: String,
    pub function: AnisotropyFunction,
}

/// The built-in families in ambient dimension `dim`, each audited.
///
/// `quadratic-norm` uses `Q = diag(1, …, 1, 4)`, `axisymmetric-series` uses `c = (1, 0.05)`,
/// and `band-extension` (only for `dim ≥ 3`) extends the `dim − 1` axisymmetric series
/// `c = (1, 0.01)`; the flatter base keeps the default ramp globally convex.
pub fn builtin_anisotropies(dim: usize) -> Result<Vec<NamedAnisotropy>> {
    if dim < 2 {
        return Err(Error::InvalidParams("ambient dimension must be >= 2".into()));
    }
    let mut out = Vec::new();
    for name in ["isotropic", "quadratic-norm", "axisymmetric-series", "band-extension"] {
        if name == "band-extension" && dim < 3 {
            continue;
        }
        let function = anisotropy_by_name(name, dim)?;
        out.push(NamedAnisotropy { name: name.to_string(), function });
    }
    Ok(out)
}

/// Build a family by name, optionally with explicit parameters: `quadratic-norm:1,2,4`,
/// `axisymmetric-series:1,0.05`, `tabulated:1,1.05,1`. Named families are audited.
pub fn anisotropy_by_name(name: &str, dim: usize) -> Result<AnisotropyFunction> {
    let f = parse_anisotropy(name, dim)?;
    f.require_convex(AUDIT_RESOLUTION)?;
    Ok(f)
}

/// As [`anisotropy_by_name`] but without the convexity audit (band extensions are still
/// audited, since the construction itself can fail it).
pub fn parse_anisotropy(name: &str, dim: usize) -> Result<AnisotropyFunction> {
    let (family, args) = match name.split_once(':') {
        Some((f, a)) => (f.trim(), Some(a)),
        None => (name.trim(), None),
    };
    let params = args.map(parse_list).transpose()?;
    let f = match family {
        "isotropic" => AnisotropyFunction::isotropic(dim),
        "quadratic-norm" | "quadratic" => {
            let q = params.unwrap_or_else(|| {
                let mut q = vec![1.0; dim];
                q[dim - 1] = 4.0;
                q
            });
            AnisotropyFunction::quadratic(&q)?
        }
        "axisymmetric-series" | "axisymmetric" => {
            AnisotropyFunction::axisymmetric(dim, &params.unwrap_or_else(|| vec![1.0, 0.05]))?
        }
        "tabulated" => {
            let values = params.ok_or_else(|| Error::InvalidParams("tabulated needs node values, e.g. `tabulated:1,1.05,1`".into()))?;
            AnisotropyFunction::tabulated(dim, &values)?
        }
        "band-extension" | "band" => {
            if dim < 3 {
                return Err(Error::InvalidParams("band-extension needs ambient dimension >= 3".into()));
            }
            let base = AnisotropyFunction::axisymmetric(dim - 1, &params.unwrap_or_else(|| BUILTIN_BAND_BASE.to_vec()))?;
            return extend_axis(&base, BUILTIN_BAND_HALFWIDTH);
        }
        _ => return Err(Error::UnknownEntry(name.to_string())),
    };
    Ok(f)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::InvalidParams(format!("not a number: `{v}`"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedGroup {
    pub lambda: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedSpectrum {
    pub groups: Vec<ExpectedGroup>,
    pub provenance: String,
}

impl ExpectedSpectrum {
    /// The groups expanded to a descending list.
    pub fn lambdas(&self) -> Vec<f64> {
        let mut out: Vec<f64> =
            self.groups.iter().flat_map(|g| std::iter::repeat(g.lambda).take(g.multiplicity)).collect();
        out.sort_by(|a, b| b.partial_cmp(a).unwrap());
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub anisotropy: AnisotropyFunction,
    pub patch: ImmersionPatch,
    pub expected_spectrum: Option<ExpectedSpectrum>,
    /// whether the patch is a piece of a complete hypersurface
    pub complete: bool,
}

fn groups(items: &[(f64, usize)]) -> Vec<ExpectedGroup> {
    items
        .iter()
        .filter(|(_, m)| *m > 0)
        .map(|&(lambda, multiplicity)| ExpectedGroup { lambda, multiplicity })
        .collect()
}

/// The catalog for `f`: plane, Wulff shape, products `k = 1..n−1` for each `t` in the menu,
/// and the helicoid (ambient 3) or helicoid × line (ambient 4).
pub fn builtin_patches(f: &AnisotropyFunction) -> Result<Vec<CatalogEntry>> {
    let dim = f.ambient_dim();
    let mut names = vec!["plane".to_string(), "wulff".to_string()];
    for k in 1..dim - 1 {
        for t in PRODUCT_T_MENU {
            names.push(format!("cylinder:k={k},t={t}"));
        }
    }
    match dim {
        3 => names.push("helicoid".into()),
        4 => names.push("helicoid-line".into()),
        _ => {}
    }
    names.iter().map(|n| entry(f, n)).collect()
}

fn parse_kv(args: Option<&str>) -> Result<Vec<(String, f64)>> {
    let Some(args) = args else { return Ok(vec![]) };
    args.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("expected key=value, got `{kv}`")))?;
            let v = v.trim().parse::<f64>().map_err(|_| Error::InvalidParams(format!("not a number: `{v}`")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn take(kv: &mut Vec<(String, f64)>, key: &str, default: f64) -> f64 {
    match kv.iter().position(|(k, _)| k == key) {
        Some(i) => kv.remove(i).1,
        None => default,
    }
}

/// Instantiate a catalog entry by name.
pub fn entry(f: &AnisotropyFunction, name: &str) -> Result<CatalogEntry> {
    let dim = f.ambient_dim();
    let n = dim - 1;
    let (base, args) = match name.split_once(':') {
        Some((b, a)) => (b.trim(), Some(a)),
        None => (name.trim(), None),
    };
    let mut kv = parse_kv(args)?;
    let orientation = take(&mut kv, "orientation", 1.0);
    let need_dim = |d: usize| {
        if dim != d {
            Err(Error::DimensionMismatch { expected: d, got: dim })
        } else {
            Ok(())
        }
    };
    let (patch, expected, complete) = match base {
        "plane" => (
            ImmersionPatch::plane(dim),
            Some(ExpectedSpectrum { groups: groups(&[(0.0, n)]), provenance: "T = 0".into() }),
            true,
        ),
        "wulff" => {
            f.require_convex(AUDIT_RESOLUTION)?;
            let lambda = -orientation.signum();
            (
                ImmersionPatch::wulff(f),
                Some(ExpectedSpectrum {
                    groups: groups(&[(lambda, n)]),
                    provenance: "S_F = -I for the outward normal".into(),
                }),
                true,
            )
        }
        "cylinder" | "product" => {
            let k = take(&mut kv, "k", 1.0);
            let t = take(&mut kv, "t", 0.5);
            if k.fract() != 0.0 || k < 1.0 || k as usize > n {
                return Err(Error::InvalidParams(format!("k must be an integer in 1..={n}")));
            }
            let k = k as usize;
            let spec = SubsphereSpec::coordinate(dim, k)?;
            let lambda = orientation.signum() / t;
            (
                product_immersion(f, &spec, t)?,
                Some(ExpectedSpectrum {
                    groups: groups(&[(lambda, k), (0.0, n - k)]),
                    provenance: "{1/t with multiplicity k, 0 with multiplicity n-k}".into(),
                }),
                true,
            )
        }
        "helicoid" => {
            need_dim(3)?;
            (ImmersionPatch::helicoid(take(&mut kv, "t_max", DEFAULT_HELICOID_T_MAX)), None, false)
        }
        "helicoid-line" => {
            need_dim(4)?;
            (ImmersionPatch::helicoid_line(take(&mut kv, "t_max", DEFAULT_HELICOID_T_MAX)), None, false)
        }
        "sphere" => {
            let r = take(&mut kv, "r", 1.0);
            let expected = f.is_isotropic().then(|| ExpectedSpectrum {
                groups: groups(&[(-orientation.signum() / r, n)]),
                provenance: "round sphere, T = -I/r".into(),
            });
            (ImmersionPatch::sphere(&vec![0.0; dim], r)?, expected, true)
        }
        "torus" => {
            need_dim(3)?;
            let major = take(&mut kv, "major", 2.0);
            let minor = take(&mut kv, "minor", 0.5);
            (ImmersionPatch::torus(major, minor)?, None, true)
        }
        _ => return Err(Error::UnknownEntry(name.to_string())),
    };
    if let Some((k, _)) = kv.first() {
        return Err(Error::InvalidParams(format!("unknown key `{k}` for entry `{base}`")));
    }
    Ok(CatalogEntry {
        name: name.trim().to_string(),
        anisotropy: f.clone(),
        patch: patch.with_orientation(orientation),
        expected_spectrum: expected,
        complete,
    })
}

/// Where `extend_axis` audits the extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AuditScope {
    /// the whole sphere
    Global,
    /// only `|θ| ≤ band_halfwidth`, where `F̃` is the exact extension
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtendOptions {
    pub ramp: f64,
    /// constant outside the band; midrange of `F` when unset
    pub plateau: Option<f64>,
    pub scope: AuditScope,
    pub audit_resolution: usize,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions { ramp: DEFAULT_RAMP, plateau: None, scope: AuditScope::Global, audit_resolution: AUDIT_RESOLUTION }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Extension {
    pub function: AnisotropyFunction,
    pub audit: ConvexityReport,
    pub scope: AuditScope,
}

/// `F̃(cos θ·u + sin θ·e_last) = F(u)` for `|θ| ≤ band_halfwidth`, ramped to a constant
/// by a quintic over `ramp` radians, with the global audit.
pub fn extend_axis(f: &AnisotropyFunction, band_halfwidth: f64) -> Result<AnisotropyFunction> {
    Ok(extend_axis_with(f, band_halfwidth, &ExtendOptions::default())?.function)
}

pub fn extend_axis_with(f: &AnisotropyFunction, band_halfwidth: f64, options: &ExtendOptions) -> Result<Extension> {
    if !(band_halfwidth > 0.0 && band_halfwidth < FRAC_PI_2) {
        return Err(Error::InvalidParams("band_halfwidth must lie in (0, pi/2)".into()));
    }
    f.require_convex(options.audit_resolution)?;
    let plateau = match options.plateau {
        Some(p) => p,
        None => {
            let (lo, hi) = f.value_range(options.audit_resolution);
            0.5 * (lo + hi)
        }
    };
    let g = AnisotropyFunction::band_extension(f, band_halfwidth, options.ramp, plateau)?;
    let audit = match options.scope {
        AuditScope::Global => g.convexity_audit(options.audit_resolution)?,
        AuditScope::Band => {
            g.audit_points(&band_points(f.ambient_dim(), band_halfwidth, options.audit_resolution), DEFAULT_CONVEXITY_TOL)?
        }
    };
    if !audit.pass {
        return Err(Error::ConvexityViolation { min_eigenvalue: audit.min_eigenvalue, at: audit.argmin });
    }
    Ok(Extension { function: g, audit, scope: options.scope })
}

/// `cos θ·u + sin θ·e_last` for `u` on a grid of the base sphere and `|θ| ≤ halfwidth`.
pub fn band_points(base_dim: usize, halfwidth: f64, resolution: usize) -> Vec<DVector<f64>> {
    let (base, _) = sphere::sphere_grid(base_dim, resolution);
    let steps = (resolution / 2).max(2);
    let mut out = Vec::with_capacity(base.len() * (2 * steps + 1));
    for i in 0..=2 * steps {
        let theta = halfwidth * (i as f64 / steps as f64 - 1.0);
        for u in &base {
            let mut y = DVector::zeros(base_dim + 1);
            y.rows_mut(0, base_dim).copy_from(&(u * theta.cos()));
            y[base_dim] = theta.sin();
            out.push(y);
        }
    }
    out
}

/// Points with `|θ| ≥ band_halfwidth + ramp`, for checking the plateau.
pub fn plateau_points(base_dim: usize, start: f64, resolution: usize) -> Vec<DVector<f64>> {
    let (base, _) = sphere::sphere_grid(base_dim, resolution);
    let steps = (resolution / 4).max(2);
    let mut out = Vec::new();
    for i in 0..=steps {
        let theta = start + (FRAC_PI_2 - start) * i as f64 / steps as f64;
        for sign in [1.0, -1.0] {
            for u in &base {
                let mut y = DVector::zeros(base_dim + 1);
                y.rows_mut(0, base_dim).copy_from(&(u * theta.cos()));
                y[base_dim] = sign * theta.sin();
                out.push(y);
            }
        }
    }
    out
}

/// All names accepted by [`entry`], for listings.
pub const ENTRY_NAMES: [&str; 7] = ["plane", "wulff", "cylinder:k=K,t=T", "helicoid", "helicoid-line", "sphere", "torus"];
