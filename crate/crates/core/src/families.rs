//! Closed-form families used as exact oracles and counterexamples.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm, sample, GridFunction, GridSpec};

/// Parameters of the Poisson kernel `f_{a,t}`, whose transform is `a exp(-2 pi t |k|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonParams {
    pub a: f64,
    pub t: f64,
    pub dim: usize,
}

impl PoissonParams {
    pub fn new(a: f64, t: f64, dim: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Poisson parameters need a, t > 0 (a={a}, t={t})"
            )));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "dimension {dim} not in 1..=3"
            )));
        }
        Ok(Self { a, t, dim })
    }

    /// `Gamma((d+1)/2) pi^{-(d+1)/2}`.
    fn normalization(&self) -> f64 {
        let gamma = match self.dim {
            1 => 1.0,
            2 => PI.sqrt() / 2.0,
            _ => 1.0,
        };
        gamma * PI.powf(-((self.dim + 1) as f64) / 2.0)
    }

    /// The parameters of `f_{a,t} * f_{a,t} = f_{a^2, 2t}`.
    pub fn squared(&self) -> Self {
        Self {
            a: self.a * self.a,
            t: 2.0 * self.t,
            dim: self.dim,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let p = (self.dim + 1) as f64 / 2.0;
        self.a * self.normalization() * self.t / (self.t * self.t + r2).powf(p)
    }
}

pub fn poisson(params: PoissonParams) -> impl Fn(&[f64]) -> f64 + Copy + Send + Sync {
    move |x: &[f64]| params.eval(x)
}

/// `f_{a,t} - f_{a^2,2t}`: the residual `f - f*f` of the Poisson family.
///
/// Nonnegative everywhere iff `a <= 1/2`. For `a > 1/2` it turns negative where
/// `|x|^2 (2a - 1) > t^2 (4 - 2a)`.
pub fn poisson_inequality_margin(
    a: f64,
    t: f64,
    dim: usize,
) -> Result<impl Fn(&[f64]) -> f64 + Copy + Send + Sync> {
    let p = PoissonParams::new(a, t, dim)?;
    let sq = p.squared();
    Ok(move |x: &[f64]| p.eval(x) - sq.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SincParams {
    /// Half-width of the frequency band.
    pub a: f64,
}

impl SincParams {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sinc half-width {a} must be positive"
            )));
        }
        Ok(Self { a })
    }
}

/// `sin(2 pi a x) / (pi x)`, the inverse transform of the indicator of `[-a, a]`.
///
/// Square-integrable but not integrable, and `f = f*f` holds exactly; it changes
/// sign, so positivity genuinely needs integrability.
pub fn sinc_counterexample(params: SincParams) -> impl Fn(&[f64]) -> f64 + Copy + Send + Sync {
    let a = params.a;
    move |x: &[f64]| {
        let x = x[0];
        if x == 0.0 {
            2.0 * a
        } else {
            (2.0 * PI * a * x).sin() / (PI * x)
        }
    }
}

/// Standard Gaussian density in any dimension, variance `sigma^2` per axis.
pub fn gaussian(sigma: f64) -> impl Fn(&[f64]) -> f64 + Copy + Send + Sync {
    move |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-r2 / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt()).powi(x.len() as i32)
    }
}

/// `a` times the standard Gaussian density, set to `-1` on the ball `|x| <= delta`.
///
/// For `a` above `2^{d/2}` the scaled Gaussian satisfies the reversed inequality
/// `f < f*f`; the negative dip is meant to survive it. Nothing is checked here.
pub fn reverse_example(spec: &GridSpec, a: f64, delta: f64) -> Result<GridFunction> {
    let g = gaussian(1.0);
    sample(spec, |x| if norm(x) <= delta { -1.0 } else { a * g(x) })
}

/// `w(x) = (1 + |x|)^{-3}` on the line: symmetric, unit mass, infinite variance.
pub fn heavy_tail_density() -> impl Fn(&[f64]) -> f64 + Copy + Send + Sync {
    |x: &[f64]| (1.0 + x[0].abs()).powi(-3)
}

pub fn heavy_tail_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - 0.5 / ((1.0 + x) * (1.0 + x))
    } else {
        0.5 / ((1.0 - x) * (1.0 - x))
    }
}

/// Inverse CDF of [`heavy_tail_density`] for `v` in `(0, 1)`.
pub fn heavy_tail_quantile(v: f64) -> f64 {
    let s = v - 0.5;
    let mag = (1.0 - 2.0 * s.abs()).powf(-0.5) - 1.0;
    if s < 0.0 {
        -mag
    } else {
        mag
    }
}

pub fn sample_heavy_tail<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // open interval keeps the quantile finite
    let v: f64 = loop {
        let v = rng.gen::<f64>();
        if v > 0.0 {
            break v;
        }
    };
    heavy_tail_quantile(v)
}

/// Uniform density on `[-sqrt 3, sqrt 3]` (variance one).
pub fn unit_variance_uniform() -> impl Fn(&[f64]) -> f64 + Copy + Send + Sync {
    let half = 3f64.sqrt();
    move |x: &[f64]| if x[0].abs() <= half { 0.5 / half } else { 0.0 }
}

pub fn sample_unit_variance_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let half = 3f64.sqrt();
    rng.gen_range(-half..half)
}
