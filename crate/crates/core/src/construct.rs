//! Solutions of `f >= f*f` parameterized by their residual `u = f - f*f >= 0`.
//!
//! Given `u >= 0` with `b = int u <= 1/4`, the unique integrable solution is
//! `f = 1/2 sum_{n>=1} c_n 4^n u^{*n}`, equivalently `f^ = (1 - sqrt(1 - 4 u^)) / 2`
//! on the Fourier side. Both routes are implemented independently so they can be
//! checked against each other.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::build_coeffs;
use crate::error::{Error, Result};
use crate::grid::{dft, idft, integrate, sample, Convolver, GridFunction, GridSpec, Spectrum};

/// Slack allowed on `b <= 1/4` for the series route, relative to 1/4.
pub const MASS_TOLERANCE: f64 = 1e-6;
/// Most negative sample of `u` that is treated as roundoff and clamped.
pub const NEGATIVE_FLOOR: f64 = -1e-12;
/// Largest negativity of `1 - 4 u^(0)` clamped to zero on the spectral route.
pub const CRITICAL_CLAMP: f64 = 1e-9;
pub const DEFAULT_MAX_TERMS: usize = 100_000;

/// L1 truncation target used when none is given.
pub fn default_epsilon(q: f64) -> f64 {
    if q <= 0.9 {
        1e-4
    } else if q <= 0.99 {
        1e-3
    } else {
        1e-2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// Target for the L1 norm of the dropped tail; `None` picks [`default_epsilon`].
    pub epsilon: Option<f64>,
    pub max_terms: usize,
    /// Use exactly this many terms instead of the epsilon rule.
    pub terms: Option<usize>,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            epsilon: None,
            max_terms: DEFAULT_MAX_TERMS,
            terms: None,
        }
    }
}

impl SeriesOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon: Some(epsilon),
            ..Self::default()
        }
    }
}

/// A series-built solution with its truncation certificate.
#[derive(Debug, Clone)]
pub struct SeriesBuild {
    pub u: GridFunction,
    pub f: GridFunction,
    pub diagnostics: SeriesDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesDiagnostics {
    /// `int u` after clamping.
    pub b: f64,
    /// `4 b`, the ratio of the geometric majorant.
    pub q: f64,
    pub n_terms: usize,
    pub epsilon: f64,
    /// Certified bound on the L1 norm of the dropped terms.
    pub tail_l1: f64,
    /// Certified bound on the sup norm of the dropped terms.
    pub tail_linf: f64,
    /// Pointwise budget for `f - f*f - u` implied by the tail bounds.
    pub residual_budget: f64,
    /// `1/2 - sqrt(1/4 - b)`, the exact mass of the untruncated solution.
    pub predicted_mass: f64,
    pub mass: f64,
    /// Largest negative roundoff removed from the convolution powers.
    pub clamped_roundoff: f64,
    pub warnings: Vec<String>,
}

impl SeriesBuild {
    pub fn n_terms(&self) -> usize {
        self.diagnostics.n_terms
    }

    pub fn tail_l1(&self) -> f64 {
        self.diagnostics.tail_l1
    }
}

/// Mass of the solution generated by a residual of mass `b`.
pub fn predicted_mass(b: f64) -> f64 {
    0.5 - 0.5 * (1.0 - 4.0 * b).max(0.0).sqrt()
}

/// Clamps roundoff negatives and enforces `0 <= b <= 1/4` within [`MASS_TOLERANCE`].
fn prepare_residual(u: &GridFunction, warnings: &mut Vec<String>) -> Result<(GridFunction, f64)> {
    let spec = *u.spec();
    if let Some((i, &v)) = u
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v < NEGATIVE_FLOOR)
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        return Err(Error::NegativeResidual {
            node: spec.node(i)[..spec.dim()].to_vec(),
            value: v,
        });
    }
    let clamped = u.values().iter().filter(|v| **v < 0.0).count();
    let mut u = if clamped > 0 {
        let msg = format!("clamped {clamped} roundoff-negative residual samples to zero");
        warn!("{msg}");
        warnings.push(msg);
        u.map(|v| v.max(0.0))?
    } else {
        u.clone()
    };
    let mut b = integrate(&u);
    if b > 0.25 * (1.0 + MASS_TOLERANCE) {
        return Err(Error::MassOutOfRange { b });
    }
    if b > 0.25 {
        let msg = format!("residual mass {b} rescaled to the critical value 1/4");
        warn!("{msg}");
        warnings.push(msg);
        u = u.scaled(0.25 / b)?;
        b = 0.25;
    }
    Ok((u, b))
}

/// `f = 1/2 sum_{n<=N} c_n 4^n u^{*n}` with `N` the fewest terms whose certified L1
/// tail `1/2 sum_{n>N} c_n q^n` is at most epsilon.
pub fn build_series(u: &GridFunction, options: &SeriesOptions) -> Result<SeriesBuild> {
    let mut warnings = Vec::new();
    let (u, b) = prepare_residual(u, &mut warnings)?;
    let q = (4.0 * b).min(1.0);
    let epsilon = options.epsilon.unwrap_or_else(|| default_epsilon(q));
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    if options.max_terms == 0 {
        return Err(Error::InvalidArgument("max_terms must be positive".into()));
    }

    let table_len = options.max_terms.max(options.terms.unwrap_or(0)) + 1;
    let table = build_coeffs(table_len)?;
    let n_terms = match options.terms {
        Some(0) => return Err(Error::InvalidArgument("terms must be positive".into())),
        Some(n) => n,
        None => {
            let mut chosen = None;
            for n in 1..=options.max_terms {
                if 0.5 * table.tail_bound(n, q)? <= epsilon {
                    chosen = Some(n);
                    break;
                }
            }
            chosen.ok_or_else(|| Error::TermCapExceeded {
                cap: options.max_terms,
                achieved: 0.5 * table.tail_bound(options.max_terms, q).unwrap_or(f64::NAN),
                target: epsilon,
            })?
        }
    };
    let tail_l1 = 0.5 * table.tail_bound(n_terms, q)?;
    let u_max = u.max_abs();
    // sup |4^n u^{*n}| <= 4^n b^{n-1} sup u = q^{n-1} 4 sup u
    let tail_linf = if q > 0.0 {
        tail_l1 * 4.0 * u_max / q
    } else {
        0.0
    };

    let spec = *u.spec();
    let mut f = vec![0.0; spec.len()];
    let mut clamped_roundoff = 0.0f64;
    if q > 0.0 {
        let four_u = u.scaled(4.0)?;
        let mut conv = Convolver::new(&four_u);
        let mut power = four_u.clone();
        for n in 1..=n_terms {
            if n > 1 {
                let next = conv.apply(&power)?;
                let mut vals = next.into_values();
                for v in vals.iter_mut() {
                    if *v < 0.0 {
                        clamped_roundoff = clamped_roundoff.max(-*v);
                        *v = 0.0;
                    }
                }
                power = GridFunction::new(spec, vals)?;
            }
            let w = 0.5 * table.coeff(n);
            for (acc, p) in f.iter_mut().zip(power.values()) {
                *acc += w * p;
            }
        }
    }
    let f = GridFunction::new(spec, f)?;
    let mass = integrate(&f);
    let diagnostics = SeriesDiagnostics {
        b,
        q,
        n_terms,
        epsilon,
        tail_l1,
        tail_linf,
        residual_budget: tail_linf * (2.0 + tail_l1),
        predicted_mass: predicted_mass(b),
        mass,
        clamped_roundoff,
        warnings,
    };
    Ok(SeriesBuild { u, f, diagnostics })
}

/// `f = idft((1 - sqrt(1 - 4 dft(u))) / 2)` on the principal branch.
///
/// The square root is checked for continuity between adjacent frequencies: for
/// arguments in the closed right half-plane `|sqrt z - sqrt w| <= sqrt |z - w|`,
/// so a larger jump means the branch flipped.
pub fn build_spectral(u: &GridFunction) -> Result<GridFunction> {
    let spec = *u.spec();
    if let Some((i, &v)) = u
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v < NEGATIVE_FLOOR)
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        return Err(Error::NegativeResidual {
            node: spec.node(i)[..spec.dim()].to_vec(),
            value: v,
        });
    }
    spectral_from_transform(&dft(u))
}

/// The spectral route starting from `u^` itself.
pub fn spectral_from_transform(u_hat: &Spectrum) -> Result<GridFunction> {
    let spec = *u_hat.spec();
    let origin = spec.origin_index();
    let zero = 1.0 - 4.0 * u_hat.at_zero().re;
    if zero < -CRITICAL_CLAMP {
        return Err(Error::MassOutOfRange {
            b: u_hat.at_zero().re,
        });
    }
    let mut z: Vec<Complex64> = Vec::with_capacity(spec.len());
    for (i, &uh) in u_hat.values().iter().enumerate() {
        let mut zi = Complex64::new(1.0, 0.0) - 4.0 * uh;
        if i == origin {
            zi.re = zi.re.max(0.0);
        } else if uh.norm() > 0.25 + 1e-6 {
            return Err(Error::SpectrumTooLarge {
                k: spec.frequency(i)[..spec.dim()].to_vec(),
                modulus: uh.norm(),
            });
        }
        z.push(zi);
    }
    let roots: Vec<Complex64> = z.iter().map(|v| v.sqrt()).collect();
    check_branch_continuity(&spec, &z, &roots)?;

    let f_hat: Vec<Complex64> = roots
        .iter()
        .map(|s| 0.5 * (Complex64::new(1.0, 0.0) - s))
        .collect();
    idft(&Spectrum::new(spec, f_hat)?)
}

fn check_branch_continuity(spec: &GridSpec, z: &[Complex64], roots: &[Complex64]) -> Result<()> {
    let n = spec.points_per_axis();
    for i in 0..spec.len() {
        let idx = spec.multi_index(i);
        for a in 0..spec.dim() {
            if idx[a] + 1 >= n {
                continue;
            }
            let mut next = idx;
            next[a] += 1;
            let j = spec.flat_index(&next);
            let jump = (roots[j] - roots[i]).norm();
            let allowed = (z[j] - z[i]).norm().sqrt() * (1.0 + 1e-9) + 1e-12;
            if jump > allowed {
                return Err(Error::BranchDiscontinuity {
                    k: spec.frequency(i)[..spec.dim()].to_vec(),
                    jump,
                });
            }
        }
    }
    Ok(())
}

/// L1 distance between the two constructions.
pub fn crosscheck(series: &SeriesBuild, spectral: &GridFunction) -> Result<f64> {
    series.f.l1_distance(spectral)
}

/// Profile of a compactly supported bump on `[-1, 1]^d`, taken as a product over axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bump {
    Indicator,
    RaisedCosine,
    Epanechnikov,
}

impl Bump {
    fn profile(self, s: f64) -> f64 {
        let s = s.abs();
        if s > 1.0 {
            return 0.0;
        }
        match self {
            Bump::Indicator => 1.0,
            Bump::RaisedCosine => 0.5 * (1.0 + (std::f64::consts::PI * s).cos()),
            Bump::Epanechnikov => 1.0 - s * s,
        }
    }

    /// Samples the bump on `spec` and rescales it to grid mass exactly `mass`.
    pub fn sample(self, spec: &GridSpec, mass: f64) -> Result<GridFunction> {
        let g = sample(spec, |x| x.iter().map(|&v| self.profile(v)).product())?;
        let m = integrate(&g);
        if m <= 0.0 {
            return Err(Error::InvalidArgument(
                "grid too coarse to resolve the bump".into(),
            ));
        }
        g.scaled(mass / m)
    }
}

impl std::str::FromStr for Bump {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indicator" => Ok(Bump::Indicator),
            "raised-cosine" => Ok(Bump::RaisedCosine),
            "epanechnikov" => Ok(Bump::Epanechnikov),
            other => Err(Error::InvalidArgument(format!("unknown bump {other:?}"))),
        }
    }
}

/// Strictly subcritical solution from a compactly supported residual of mass `r`.
///
/// Such a residual has every exponential moment, and so then does the solution.
pub fn build_exponential_example(
    spec: &GridSpec,
    r: f64,
    bump: Bump,
    options: &SeriesOptions,
) -> Result<SeriesBuild> {
    if !(r > 0.0 && r < 0.25) {
        return Err(Error::InvalidArgument(format!(
            "residual mass r = {r} must satisfy 0 < r < 1/4"
        )));
    }
    build_series(&bump.sample(spec, r)?, options)
}

/// `mass` times a centered Gaussian of standard deviation `sigma`, normalized on the grid.
pub fn gaussian_residual(spec: &GridSpec, mass: f64, sigma: f64) -> Result<GridFunction> {
    let g = sample(spec, crate::families::gaussian(sigma))?;
    let m = integrate(&g);
    g.scaled(mass / m)
}
