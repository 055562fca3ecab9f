//! Checks of the inequality and of the structural laws its solutions obey.
//!
//! Divergence of a moment is not decidable on a finite grid. It is reported as
//! a growth signature: the truncated moment `M_p(l)` keeps gaining comparable
//! amounts each time the window `l` doubles. A tail `|x|^{-(d+alpha)}` makes
//! successive increments shrink by `2^{p-alpha}`, so a ratio near one marks a
//! logarithmic (or worse) divergence while a convergent power tail shows a
//! ratio bounded away from one.

use serde::{Deserialize, Serialize};

use crate::construct::{build_series, SeriesDiagnostics, SeriesOptions};
use crate::error::{Error, Result};
use crate::grid::{convolve, integrate, norm, GridFunction, GridSpec};

/// Fraction of the half-width excluded at the window edge from the violation scan.
pub const BOUNDARY_BAND: f64 = 1.0 / 8.0;
/// Samples below `-POSITIVITY_FLOOR * max|f|` count as negative.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// Two consecutive increment ratios at or above this mark a growing moment.
pub const GROWTH_RATIO: f64 = 0.85;
/// Increments below this fraction of the full-window moment are treated as zero.
pub const INCREMENT_FLOOR: f64 = 1e-9;
/// Largest `1 - R^2` of a log-linear fit still accepted as exponential decay.
pub const EXP_FIT_MAX_RESIDUAL: f64 = 0.01;

pub const DIVERGENCE_NOTE: &str = "divergence is not decidable on a finite grid; \
'growing' means the truncated moment gains comparable amounts on every window doubling";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Solution,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandDiagnostics {
    pub width: f64,
    pub min_residual: f64,
    pub location: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    /// `int f`.
    pub a: f64,
    /// `int u` with `u = f - f*f`.
    pub b: f64,
    pub min_residual: f64,
    pub min_residual_location: Vec<f64>,
    pub min_f: f64,
    /// `|(a - 1/2)^2 - (1/4 - b)|`.
    pub mass_relation_gap: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Worst interior violation, when there is one.
    pub violation_location: Option<Vec<f64>>,
    pub boundary_band: BandDiagnostics,
}

/// `1e-6 * max|f|`, the default scan tolerance.
pub fn default_tolerance(f: &GridFunction) -> f64 {
    1e-6 * f.max_abs()
}

fn interior_mask(spec: &GridSpec) -> Vec<bool> {
    let inner = spec.extent() * (1.0 - BOUNDARY_BAND);
    spec.sup_radii().into_iter().map(|r| r <= inner).collect()
}

fn node_vec(spec: &GridSpec, i: usize) -> Vec<f64> {
    spec.node(i)[..spec.dim()].to_vec()
}

/// `u = f - f*f` on the window.
pub fn residual(f: &GridFunction) -> Result<GridFunction> {
    f.sub(&convolve(f, f)?)
}

/// Checks `f >= f*f` away from the boundary band and reports the masses.
pub fn verify(f: &GridFunction, tolerance: f64) -> Result<SolutionReport> {
    verify_with_residual(f, tolerance).map(|(r, _)| r)
}

pub fn verify_with_residual(
    f: &GridFunction,
    tolerance: f64,
) -> Result<(SolutionReport, GridFunction)> {
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tolerance} must be nonnegative"
        )));
    }
    let spec = *f.spec();
    let u = residual(f)?;
    let a = integrate(f);
    let b = integrate(&u);
    let mask = interior_mask(&spec);

    let mut inner = (f64::INFINITY, spec.origin_index());
    let mut band = (f64::INFINITY, 0usize);
    for (i, (&r, &m)) in u.values().iter().zip(&mask).enumerate() {
        let slot = if m { &mut inner } else { &mut band };
        if r < slot.0 {
            *slot = (r, i);
        }
    }
    let min_f = f.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let verdict = if inner.0 >= -tolerance {
        Verdict::Solution
    } else {
        Verdict::Violation
    };
    let report = SolutionReport {
        a,
        b,
        min_residual: inner.0,
        min_residual_location: node_vec(&spec, inner.1),
        min_f,
        mass_relation_gap: ((a - 0.5).powi(2) - (0.25 - b)).abs(),
        tolerance,
        verdict,
        violation_location: (verdict == Verdict::Violation).then(|| node_vec(&spec, inner.1)),
        boundary_band: BandDiagnostics {
            width: spec.extent() * BOUNDARY_BAND,
            min_residual: band.0,
            location: node_vec(&spec, band.1),
        },
    };
    Ok((report, u))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Positivity {
    Nonnegative,
    SignChanging { location: Vec<f64>, value: f64 },
}

/// Finds the most negative sample below `-1e-12 max|f|`, if any.
pub fn positivity_check(f: &GridFunction) -> Positivity {
    let floor = -POSITIVITY_FLOOR * f.max_abs();
    let worst = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < floor)
        .min_by(|a, b| a.1.total_cmp(b.1));
    match worst {
        None => Positivity::Nonnegative,
        Some((i, &v)) => Positivity::SignChanging {
            location: node_vec(f.spec(), i),
            value: v,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReverseReport {
    /// `min (f*f - f)` over the resolved interior nodes.
    pub min_margin: f64,
    pub location: Vec<f64>,
    /// Interior nodes skipped because both `f` and `f*f` are below the noise floor.
    pub unresolved_nodes: usize,
    pub holds: bool,
}

/// Checks the reversed inequality `f < f*f` strictly on the interior.
pub fn reverse_check(f: &GridFunction) -> Result<ReverseReport> {
    let spec = *f.spec();
    let ff = convolve(f, f)?;
    let noise = 1e-12 * ff.max_abs().max(f.max_abs());
    let mask = interior_mask(&spec);
    let mut worst = (f64::INFINITY, spec.origin_index());
    let mut unresolved = 0;
    let samples = f.values().iter().zip(ff.values()).zip(&mask).enumerate();
    for (i, ((&v, &c), &inside)) in samples {
        if !inside {
            continue;
        }
        if v.abs() < noise && c.abs() < noise {
            unresolved += 1;
            continue;
        }
        if c - v < worst.0 {
            worst = (c - v, i);
        }
    }
    Ok(ReverseReport {
        min_margin: worst.0,
        location: node_vec(&spec, worst.1),
        unresolved_nodes: unresolved,
        holds: worst.0 > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Saturating,
    Growing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub p: f64,
    /// Nested window half-widths `L / 2^k, ..., L`.
    pub windows: Vec<f64>,
    /// `M_p` on each window.
    pub values: Vec<f64>,
    /// `M_p(2l) - M_p(l)`.
    pub growth_increments: Vec<f64>,
    /// Successive increment ratios.
    pub ratios: Vec<f64>,
    pub classification: Growth,
    pub note: String,
}

/// Truncated moments `h^d sum_{|x|_inf <= l} |x|^p f` on nested windows.
pub fn moment_scan(f: &GridFunction, p: f64, levels: usize) -> Result<MomentReport> {
    if p.is_nan() || p < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "moment order {p} must be >= 0"
        )));
    }
    if levels < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 levels, got {levels}"
        )));
    }
    let spec = *f.spec();
    let l = spec.extent();
    let windows: Vec<f64> = (0..levels)
        .map(|k| l / 2f64.powi((levels - 1 - k) as i32))
        .collect();
    let sup = spec.sup_radii();
    let mut values = vec![0.0; levels];
    for (i, &v) in f.values().iter().enumerate() {
        let weight = if p == 0.0 {
            1.0
        } else {
            norm(&spec.node(i)[..spec.dim()]).powf(p)
        };
        for (m, &w) in values.iter_mut().zip(&windows) {
            if sup[i] <= w {
                *m += weight * v;
            }
        }
    }
    let h_d = spec.cell_volume();
    values.iter_mut().for_each(|m| *m *= h_d);

    let growth_increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = growth_increments
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let floor = INCREMENT_FLOOR * values.last().unwrap().abs();
    let tail = growth_increments.len().min(3);
    let recent = &growth_increments[growth_increments.len() - tail..];
    let recent_ratios = &ratios[ratios.len().saturating_sub(2)..];
    let growing = recent.iter().skip(1).all(|&d| d > floor)
        && recent_ratios.iter().all(|&r| r >= GROWTH_RATIO);
    Ok(MomentReport {
        p,
        windows,
        values,
        growth_increments,
        ratios,
        classification: if growing {
            Growth::Growing
        } else {
            Growth::Saturating
        },
        note: DIVERGENCE_NOTE.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpFit {
    /// Slope of `log f` against `|x|`.
    pub rate: f64,
    pub intercept: f64,
    /// `1 - R^2` of the fit.
    pub residual: f64,
    pub rms: f64,
    pub points: usize,
    pub region: (f64, f64),
    pub is_exponential: bool,
}

/// Least-squares fit of `log f` against `|x|` on `inner <= |x| <= 0.9 L`.
pub fn exp_tail_fit(f: &GridFunction, inner: f64) -> Result<ExpFit> {
    exp_tail_fit_region(f, inner, 0.9 * f.spec().extent())
}

pub fn exp_tail_fit_region(f: &GridFunction, inner: f64, outer: f64) -> Result<ExpFit> {
    if !(inner >= 0.0 && outer > inner) {
        return Err(Error::InvalidArgument(format!(
            "empty fit region [{inner}, {outer}]"
        )));
    }
    let spec = *f.spec();
    let radii = spec.radii();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&r, &v) in radii.iter().zip(f.values()) {
        if r < inner || r > outer {
            continue;
        }
        if v <= 0.0 {
            return Err(Error::NonPositiveInFit {
                radius: r,
                value: v,
            });
        }
        xs.push(r);
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "only {} nodes in the fit region [{inner}, {outer}]",
            xs.len()
        )));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "fit region holds a single radius".into(),
        ));
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - rate * x).powi(2))
        .sum();
    let residual = if syy > 0.0 { sse / syy } else { 0.0 };
    Ok(ExpFit {
        rate,
        intercept,
        residual,
        rms: (sse / n).sqrt(),
        points: xs.len(),
        region: (inner, outer),
        is_exponential: rate < 0.0 && residual <= EXP_FIT_MAX_RESIDUAL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassRegime {
    /// `int u = 1/4`, so `int f = 1/2`.
    Critical,
    /// `int u < 1/4`.
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoOptions {
    pub series: SeriesOptions,
    /// The solution is built on a window this many times wider than `u`'s, then
    /// cut back, so that mass lost at the build edge does not distort the scan.
    pub guard_factor: usize,
}

impl DemoOptions {
    pub fn for_regime(regime: MassRegime) -> Self {
        let epsilon = match regime {
            MassRegime::Critical => 1e-3,
            MassRegime::Subcritical => 1e-6,
        };
        Self {
            series: SeriesOptions::with_epsilon(epsilon),
            guard_factor: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub regime: MassRegime,
    pub build: SeriesDiagnostics,
    /// Scans at `p = 0.5, 1, 2`.
    pub scans: Vec<MomentReport>,
}

impl DemoReport {
    pub fn scan(&self, p: f64) -> Option<&MomentReport> {
        self.scans.iter().find(|s| s.p == p)
    }
}

/// Builds `f` from a symmetric residual and scans `p = 0.5, 1, 2` moments.
///
/// At critical mass the first moment must diverge; below it, even the second
/// moment stays finite. Symmetry stands in for the zero-mean hypothesis.
pub fn critical_moment_theorem_demo(
    u: &GridFunction,
    regime: MassRegime,
    levels: usize,
    options: &DemoOptions,
) -> Result<DemoReport> {
    let spec = *u.spec();
    let scale = u.max_abs();
    for i in 0..spec.len() {
        let mut mirrored = spec.multi_index(i);
        let n = spec.points_per_axis();
        let mut on_edge = false;
        for a in mirrored.iter_mut().take(spec.dim()) {
            if *a == 0 {
                on_edge = true;
            }
            *a = (n - *a) % n;
        }
        let j = spec.flat_index(&mirrored);
        // the -L column has no mirror node; it must vanish instead
        let partner = if on_edge { 0.0 } else { u.values()[j] };
        if (u.values()[i] - partner).abs() > 1e-10 * scale {
            return Err(Error::InvalidArgument(format!(
                "residual is not symmetric under x -> -x near {:?}",
                node_vec(&spec, i)
            )));
        }
    }
    let b = integrate(u);
    match regime {
        MassRegime::Critical if (b - 0.25).abs() > 1e-6 * 0.25 => {
            return Err(Error::InvalidArgument(format!(
                "critical regime needs int u = 1/4, got {b}"
            )))
        }
        MassRegime::Subcritical if b >= 0.25 => {
            return Err(Error::InvalidArgument(format!(
                "subcritical regime needs int u < 1/4, got {b}"
            )))
        }
        _ => {}
    }
    let wide = u.zero_padded(options.guard_factor.max(1))?;
    let build = build_series(&wide, &options.series)?;
    let f = build.f.restricted(spec)?;
    let scans = [0.5, 1.0, 2.0]
        .iter()
        .map(|&p| moment_scan(&f, p, levels))
        .collect::<Result<Vec<_>>>()?;
    Ok(DemoReport {
        regime,
        build: build.diagnostics,
        scans,
    })
}
