//! Uniform centered grids on `[-L, L)^d`, sampled functions and their spectra.
//!
//! Nodes are `x_j = -L + j h` with `h = 2L / N`, so the origin is always a node.
//! Values are stored row-major with the last axis varying fastest. The spectrum
//! of a grid function uses the `exp(-i 2 pi k.x)` convention and is stored in
//! centered order, frequency `k_m = m / (2L)` for `m = -N/2 .. N/2 - 1`.

mod fft;
mod io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fft::{convolve, dft, idft, idft_complex, Convolver};

/// Largest grid accepted anywhere, in total node count.
pub const MAX_POINTS: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec")]
pub struct GridSpec {
    dim: usize,
    extent: f64,
    points_per_axis: usize,
}

#[derive(Deserialize)]
struct RawGridSpec {
    dim: usize,
    extent: f64,
    points_per_axis: usize,
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGridSpec) -> Result<Self> {
        GridSpec::new(raw.dim, raw.extent, raw.points_per_axis)
    }
}

impl GridSpec {
    pub fn new(dim: usize, extent: f64, points_per_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "dimension {dim} not in 1..=3"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "extent {extent} must be positive"
            )));
        }
        if points_per_axis < 8 || !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "points per axis {points_per_axis} must be a power of two >= 8"
            )));
        }
        match points_per_axis.checked_pow(dim as u32) {
            Some(total) if total <= MAX_POINTS => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "{points_per_axis}^{dim} nodes exceeds the limit of {MAX_POINTS}"
                )))
            }
        }
        Ok(Self {
            dim,
            extent,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half-width `L`.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points_per_axis as f64
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency spacing `1 / (2L)`.
    pub fn frequency_spacing(&self) -> f64 {
        0.5 / self.extent
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis_coord(&self, j: usize) -> f64 {
        -self.extent + j as f64 * self.spacing()
    }

    pub fn axis_frequency(&self, c: usize) -> f64 {
        (c as f64 - (self.points_per_axis / 2) as f64) * self.frequency_spacing()
    }

    /// Per-axis indices of a flat index.
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.points_per_axis;
        let mut idx = [0; 3];
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            idx[a] = rest % n;
            rest /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .take(self.dim)
            .fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    /// Coordinates of a node; only the first `dim` entries are meaningful.
    pub fn node(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.axis_coord(idx[a]);
        }
        x
    }

    /// Frequency vector of a centered spectrum index.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = self.axis_frequency(idx[a]);
        }
        k
    }

    /// Flat index of the origin node (also the zero frequency in a spectrum).
    pub fn origin_index(&self) -> usize {
        let half = self.points_per_axis / 2;
        self.flat_index(&[half; 3])
    }

    /// `|x|` at every node.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| norm(&self.node(i)[..self.dim]))
            .collect()
    }

    /// Max-norm `|x|_inf` at every node.
    pub fn sup_radii(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                self.node(i)[..self.dim]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect()
    }

    /// Same spacing, window widened by `factor` (a power of two).
    pub fn widened(&self, factor: usize) -> Result<Self> {
        if !factor.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "widening factor {factor} must be a power of two"
            )));
        }
        Self::new(
            self.dim,
            self.extent * factor as f64,
            self.points_per_axis * factor,
        )
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::SpecMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Real samples on a [`GridSpec`]; always finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    #[serde(flatten)]
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                spec.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                node: spec.node(i)[..spec.dim].to_vec(),
                value: values[i],
            });
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            values: vec![0.0; spec.len()],
            spec,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        self.map(|v| v * s)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &GridFunction, s: f64) -> Result<Self> {
        self.spec.check_same(&other.spec)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + s * b)
            .collect();
        Self::new(self.spec, values)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    /// `h^d * sum |self - other|`.
    pub fn l1_distance(&self, other: &GridFunction) -> Result<f64> {
        self.spec.check_same(&other.spec)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(s * self.spec.cell_volume())
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.spec.cell_volume()
    }

    pub fn value_at_origin(&self) -> f64 {
        self.values[self.spec.origin_index()]
    }

    /// Copy onto a wider grid with the same spacing, zero outside the old window.
    pub fn zero_padded(&self, factor: usize) -> Result<Self> {
        let wide = self.spec.widened(factor)?;
        let offset = (wide.points_per_axis - self.spec.points_per_axis) / 2;
        let mut out = vec![0.0; wide.len()];
        for (i, &v) in self.values.iter().enumerate() {
            let mut idx = self.spec.multi_index(i);
            for a in idx.iter_mut().take(self.spec.dim) {
                *a += offset;
            }
            out[wide.flat_index(&idx)] = v;
        }
        Self::new(wide, out)
    }

    /// Restriction onto a narrower grid with the same spacing.
    pub fn restricted(&self, spec: GridSpec) -> Result<Self> {
        let n_self = self.spec.points_per_axis;
        let n = spec.points_per_axis;
        if spec.dim != self.spec.dim
            || n > n_self
            || (spec.spacing() - self.spec.spacing()).abs() > 1e-12 * self.spec.spacing()
        {
            return Err(Error::SpecMismatch(format!(
                "cannot restrict {:?} onto {spec:?}",
                self.spec
            )));
        }
        let offset = (n_self - n) / 2;
        let values = (0..spec.len())
            .map(|i| {
                let mut idx = spec.multi_index(i);
                for a in idx.iter_mut().take(spec.dim) {
                    *a += offset;
                }
                self.values[self.spec.flat_index(&idx)]
            })
            .collect();
        Self::new(spec, values)
    }
}

/// Samples `evaluator` at every node. No normalization is applied.
pub fn sample<F>(spec: &GridSpec, evaluator: F) -> Result<GridFunction>
where
    F: Fn(&[f64]) -> f64,
{
    let d = spec.dim();
    let mut values = Vec::with_capacity(spec.len());
    for i in 0..spec.len() {
        let x = spec.node(i);
        let v = evaluator(&x[..d]);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                node: x[..d].to_vec(),
                value: v,
            });
        }
        values.push(v);
    }
    Ok(GridFunction {
        spec: *spec,
        values,
    })
}

/// Riemann sum `h^d * sum values` over the window.
pub fn integrate(g: &GridFunction) -> f64 {
    g.values.iter().sum::<f64>() * g.spec.cell_volume()
}

/// Truncated moment `M_p(L) = h^d * sum |x_j|^p g(x_j)` over the whole window.
pub fn moment(g: &GridFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "moment order {p} must be >= 0"
        )));
    }
    if p == 0.0 {
        return Ok(integrate(g));
    }
    let spec = g.spec;
    let s: f64 = g
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| norm(&spec.node(i)[..spec.dim]).powf(p) * v)
        .sum();
    Ok(s * spec.cell_volume())
}

/// First moment vector `h^d * sum x_j g(x_j)`.
pub fn mean(g: &GridFunction) -> Vec<f64> {
    let spec = g.spec;
    let mut m = vec![0.0; spec.dim];
    for (i, v) in g.values.iter().enumerate() {
        let x = spec.node(i);
        for a in 0..spec.dim {
            m[a] += x[a] * v;
        }
    }
    m.iter().map(|v| v * spec.cell_volume()).collect()
}

/// Complex samples on the frequency lattice of a [`GridSpec`], centered order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "{} spectrum values for a grid of {} nodes",
                values.len(),
                spec.len()
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite {
                node: spec.frequency(i)[..spec.dim].to_vec(),
                value: values[i].norm(),
            });
        }
        Ok(Self { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at `k = 0`.
    pub fn at_zero(&self) -> Complex64 {
        self.values[self.spec.origin_index()]
    }

    /// Flat index of `-k` for the centered index `c`; the Nyquist row maps to itself.
    pub fn mirror_index(&self, flat: usize) -> usize {
        let n = self.spec.points_per_axis;
        let mut idx = self.spec.multi_index(flat);
        for a in idx.iter_mut().take(self.spec.dim) {
            *a = (n - *a) % n;
        }
        self.spec.flat_index(&idx)
    }

    /// Largest `|S(-k) - conj(S(k))|` relative to `max |S|` (0 for the zero spectrum).
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let defect = (0..self.values.len())
            .map(|i| (self.values[self.mirror_index(i)] - self.values[i].conj()).norm())
            .fold(0.0, f64::max);
        defect / scale
    }
}
