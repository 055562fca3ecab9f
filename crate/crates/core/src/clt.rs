//! Mass of a fixed ball under the rescaled `n`-fold convolution `n^{d/2} w^{*n}(sqrt(n) x)`.
//!
//! For finite variance this tends to the Gaussian ball mass; for a mean-zero,
//! infinite-variance `w` it tends to zero. The rescaled density is computed
//! with the characteristic-function power method: the transform of `w` is
//! evaluated by direct quadrature at the scaled frequencies `k / sqrt(n)`,
//! raised to the `n`-th power and inverted on the output grid. A Monte Carlo
//! estimate from an exact sampler is carried alongside, since the finite window
//! silently gives the heavy-tailed density a finite variance.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::families::{
    heavy_tail_density, sample_heavy_tail, sample_unit_variance_uniform, unit_variance_uniform,
};
use crate::grid::{idft, integrate, sample, GridFunction, GridSpec, Spectrum};

/// Negative density values down to this size are roundoff and set to zero.
const NEGATIVE_CLAMP: f64 = 1e-8;
/// Replicates per Monte Carlo work unit; each unit owns a generator stream.
const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WKind {
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    FiniteVariance,
    /// `(1 + |x|)^{-3}`.
    InfiniteVariance,
}

impl std::str::FromStr for WKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite_variance" | "finite-variance" | "finite" => Ok(WKind::FiniteVariance),
            "infinite_variance" | "infinite-variance" | "infinite" => Ok(WKind::InfiniteVariance),
            other => Err(Error::InvalidArgument(format!("unknown w kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceClass {
    Finite,
    Infinite,
}

/// Density of `n^{-1/2} (X_1 + ... + X_n)` for i.i.d. `X_j ~ w`, on `out_spec`.
pub fn rescaled_density(w: &GridFunction, n: u32, out_spec: &GridSpec) -> Result<GridFunction> {
    let spec = *w.spec();
    if spec.dim() != 1 || out_spec.dim() != 1 {
        return Err(Error::Unsupported(
            "rescaled densities are implemented in one dimension".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mass = integrate(w);
    if (mass - 1.0).abs() > 1e-4 {
        return Err(Error::InvalidArgument(format!(
            "w has mass {mass}, expected 1"
        )));
    }

    let scale = 1.0 / (n as f64).sqrt();
    let h = spec.spacing();
    let x0 = spec.axis_coord(0);
    let values = w.values();
    let nf = n as f64;
    let mut spectrum: Vec<Complex64> = (0..out_spec.len())
        .into_par_iter()
        .map(|c| {
            let k = out_spec.axis_frequency(c) * scale;
            let ch = characteristic(values, x0, h, k);
            if ch.norm() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                // n * log keeps |c|^n from under- or overflowing on the way
                (ch.ln() * nf).exp()
            }
        })
        .collect();
    // the Nyquist bin is its own mirror; a real density needs it real
    spectrum[0].im = 0.0;
    let density = idft(&Spectrum::new(*out_spec, spectrum)?)?;
    density.map(|v| {
        if (-NEGATIVE_CLAMP..0.0).contains(&v) {
            0.0
        } else {
            v
        }
    })
}

/// `h sum_j w_j exp(-i 2 pi k x_j)` by a phase recurrence, re-anchored every 1024 steps.
fn characteristic(values: &[f64], x0: f64, h: f64, k: f64) -> Complex64 {
    let omega = -2.0 * std::f64::consts::PI * k;
    let step = Complex64::from_polar(1.0, omega * h);
    let mut acc = Complex64::new(0.0, 0.0);
    for (block, chunk) in values.chunks(1024).enumerate() {
        let mut phase = Complex64::from_polar(1.0, omega * (x0 + (block * 1024) as f64 * h));
        for &v in chunk {
            acc += phase * v;
            phase *= step;
        }
    }
    acc * h
}

/// Weight of a node at distance `r` from the center: the fraction of its cell
/// inside the ball, exact in one dimension.
fn ball_weight(r: f64, radius: f64, h: f64) -> f64 {
    ((radius - r) / h + 0.5).clamp(0.0, 1.0)
}

/// `int_{|x| <= R} density`, with boundary cells split by the fraction inside.
pub fn ball_mass(density: &GridFunction, radius: f64) -> f64 {
    let spec = density.spec();
    let h = spec.spacing();
    let s: f64 = spec
        .radii()
        .iter()
        .zip(density.values())
        .map(|(&r, &v)| ball_weight(r, radius, h) * v)
        .sum();
    s * spec.cell_volume()
}

/// `int min(1, |x|) density`.
pub fn phi_functional(density: &GridFunction) -> f64 {
    let spec = density.spec();
    let s: f64 = spec
        .radii()
        .iter()
        .zip(density.values())
        .map(|(&r, &v)| r.min(1.0) * v)
        .sum();
    s * spec.cell_volume()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: WKind,
    pub n_list: Vec<u32>,
    /// Monte Carlo replicates per `n`; zero disables the cross-check.
    pub mc_samples: usize,
    pub seed: u64,
    /// Grid on which `w` is sampled.
    pub w_grid: GridSpec,
    /// Grid on which the rescaled densities are produced.
    pub out_grid: GridSpec,
}

impl ExperimentConfig {
    /// Defaults: the heavy-tailed `w` needs a wide window since its far tail
    /// drives the small-`k` behavior of the transform.
    pub fn new(kind: WKind, n_list: Vec<u32>, mc_samples: usize, seed: u64) -> Self {
        let w_grid = match kind {
            WKind::FiniteVariance => GridSpec::new(1, 4.0, 1 << 10),
            WKind::InfiniteVariance => GridSpec::new(1, 512.0, 1 << 16),
        }
        .expect("static grid");
        Self {
            kind,
            n_list,
            mc_samples,
            seed,
            w_grid,
            out_grid: GridSpec::new(1, 32.0, 1 << 11).expect("static grid"),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::InvalidArgument(
                "n list must be nonempty and positive".into(),
            ));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "n list must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub p: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltResult {
    pub kind: WKind,
    pub variance_class: VarianceClass,
    pub radius: f64,
    pub n_list: Vec<u32>,
    /// Ball mass `p_{n,R}` of each rescaled density.
    pub p_values: Vec<f64>,
    pub phi_values: Vec<f64>,
    /// Total mass of each rescaled density on the output window.
    pub masses: Vec<f64>,
    /// Empty when Monte Carlo is disabled.
    pub mc_values: Vec<McEstimate>,
    /// Variance of the sampled `w` on its window.
    pub w_variance: f64,
    /// Gaussian ball mass for the finite-variance branch.
    pub gaussian_target: Option<f64>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

/// Runs the experiment for a single radius.
pub fn run_experiment(config: &ExperimentConfig, radius: f64) -> Result<CltResult> {
    Ok(run_experiment_radii(config, &[radius])?.remove(0))
}

/// Runs the experiment once per `n` and evaluates every radius on the same densities.
pub fn run_experiment_radii(config: &ExperimentConfig, radii: &[f64]) -> Result<Vec<CltResult>> {
    config.validate()?;
    if radii.is_empty() || radii.iter().any(|r| r.is_nan() || *r <= 0.0) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    let w = match config.kind {
        WKind::FiniteVariance => sample(&config.w_grid, unit_variance_uniform())?,
        WKind::InfiniteVariance => sample(&config.w_grid, heavy_tail_density())?,
    };
    // the Riemann sum misses the kink or the jumps at O(h); normalize on the grid
    let w = w.scaled(1.0 / integrate(&w))?;
    let w_variance = crate::grid::moment(&w, 2.0)?;

    let mut warnings = Vec::new();
    let mut densities = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let rho = rescaled_density(&w, n, &config.out_grid)?;
        let m = integrate(&rho);
        if (m - 1.0).abs() > 0.02 {
            let msg = format!("rescaled density for n = {n} has mass {m}");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        densities.push(rho);
    }

    let hits = if config.mc_samples > 0 {
        Some(monte_carlo_hits(config, radii))
    } else {
        None
    };

    let (variance_class, gaussian_target) = match config.kind {
        WKind::FiniteVariance => (VarianceClass::Finite, true),
        WKind::InfiniteVariance => (VarianceClass::Infinite, false),
    };
    Ok(radii
        .iter()
        .enumerate()
        .map(|(ri, &radius)| CltResult {
            kind: config.kind,
            variance_class,
            radius,
            n_list: config.n_list.clone(),
            p_values: densities.iter().map(|d| ball_mass(d, radius)).collect(),
            phi_values: densities.iter().map(phi_functional).collect(),
            masses: densities.iter().map(integrate).collect(),
            mc_values: hits
                .as_ref()
                .map(|h| {
                    h.iter()
                        .map(|per_radius| {
                            let p = per_radius[ri] as f64 / config.mc_samples as f64;
                            McEstimate {
                                p,
                                stderr: (p * (1.0 - p) / config.mc_samples as f64).sqrt(),
                            }
                        })
                        .collect()
                })
                .unwrap_or_default(),
            w_variance,
            gaussian_target: gaussian_target.then(|| erf(radius / (2.0 * w_variance).sqrt())),
            seed: config.seed,
            warnings: warnings.clone(),
        })
        .collect())
}

/// Counts, per `n` and radius, replicates with `|n^{-1/2} sum X_j| <= R`.
///
/// Work unit `c` of the `i`-th `n` draws from stream `(i << 32) | c` of the master
/// seed, so results do not depend on the thread count.
fn monte_carlo_hits(config: &ExperimentConfig, radii: &[f64]) -> Vec<Vec<u64>> {
    let chunks = config.mc_samples.div_ceil(MC_CHUNK);
    config
        .n_list
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let scale = 1.0 / (n as f64).sqrt();
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream(((ni as u64) << 32) | c as u64);
                    let count = MC_CHUNK.min(config.mc_samples - c * MC_CHUNK);
                    let mut hits = vec![0u64; radii.len()];
                    for _ in 0..count {
                        let s: f64 = (0..n)
                            .map(|_| match config.kind {
                                WKind::FiniteVariance => sample_unit_variance_uniform(&mut rng),
                                WKind::InfiniteVariance => sample_heavy_tail(&mut rng),
                            })
                            .sum();
                        let z = (s * scale).abs();
                        for (h, &r) in hits.iter_mut().zip(radii) {
                            if z <= r {
                                *h += 1;
                            }
                        }
                    }
                    hits
                })
                .reduce(
                    || vec![0u64; radii.len()],
                    |mut a, b| {
                        a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                        a
                    },
                )
        })
        .collect()
}
