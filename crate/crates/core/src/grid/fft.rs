use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::{GridFunction, GridSpec, Spectrum};
use crate::error::{Error, Result};

/// Imaginary parts above this fraction of the real peak flag a broken transform.
const IMAG_RESIDUE_RATIO: f64 = 1e-9;

/// In-place unnormalized FFT over every axis of a `size^dim` row-major array.
fn fft_nd(buf: &mut [Complex64], size: usize, dim: usize, plan: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    // Last axis is contiguous.
    for chunk in buf.chunks_exact_mut(size) {
        plan.process_with_scratch(chunk, &mut scratch);
    }
    if dim == 1 {
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); size];
    for axis in 0..dim - 1 {
        let stride = size.pow((dim - 1 - axis) as u32);
        let block = stride * size;
        for base in (0..buf.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = buf[start + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    buf[start + j * stride] = *v;
                }
            }
        }
    }
}

fn plan(size: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft(size, direction)
}

/// Place `values` (on an `n^dim` grid) in the low corner of a zeroed `(2n)^dim` buffer.
fn pad_into(buf: &mut [Complex64], values: &[f64], spec: &GridSpec) {
    let n = spec.points_per_axis();
    let wide = 2 * n;
    buf.fill(Complex64::new(0.0, 0.0));
    for (i, &v) in values.iter().enumerate() {
        let idx = spec.multi_index(i);
        let flat = idx[..spec.dim()].iter().fold(0, |acc, &j| acc * wide + j);
        buf[flat] = Complex64::new(v, 0.0);
    }
}

/// Linear convolution with a fixed kernel, reusing the kernel's padded spectrum.
///
/// Inputs are zero-padded to `2N` per axis so nothing wraps around; the output is
/// the full linear convolution restricted to the original window.
pub struct Convolver {
    spec: GridSpec,
    kernel_hat: Vec<Complex64>,
    kernel_l1: f64,
    kernel_max: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
}

impl Convolver {
    pub fn new(kernel: &GridFunction) -> Self {
        let spec = *kernel.spec();
        let wide = 2 * spec.points_per_axis();
        let forward = plan(wide, FftDirection::Forward);
        let inverse = plan(wide, FftDirection::Inverse);
        let mut kernel_hat = vec![Complex64::new(0.0, 0.0); wide.pow(spec.dim() as u32)];
        pad_into(&mut kernel_hat, kernel.values(), &spec);
        fft_nd(&mut kernel_hat, wide, spec.dim(), &forward);
        let buf = vec![Complex64::new(0.0, 0.0); kernel_hat.len()];
        Self {
            spec,
            kernel_hat,
            kernel_l1: kernel.l1_norm(),
            kernel_max: kernel.max_abs(),
            forward,
            inverse,
            buf,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn apply(&mut self, g: &GridFunction) -> Result<GridFunction> {
        if g.spec() != &self.spec {
            return Err(Error::SpecMismatch(format!(
                "{:?} vs kernel {:?}",
                g.spec(),
                self.spec
            )));
        }
        let spec = self.spec;
        let n = spec.points_per_axis();
        let wide = 2 * n;
        let dim = spec.dim();

        pad_into(&mut self.buf, g.values(), &spec);
        fft_nd(&mut self.buf, wide, dim, &self.forward);
        for (b, k) in self.buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        fft_nd(&mut self.buf, wide, dim, &self.inverse);

        let scale = spec.cell_volume() / (wide.pow(dim as u32) as f64);
        let shift = n / 2;
        let mut out = Vec::with_capacity(spec.len());
        let mut max_re = 0.0f64;
        let mut max_im = 0.0f64;
        for i in 0..spec.len() {
            let idx = spec.multi_index(i);
            let flat = idx[..dim].iter().fold(0, |acc, &j| acc * wide + j + shift);
            let v = self.buf[flat] * scale;
            max_re = max_re.max(v.re.abs());
            max_im = max_im.max(v.im.abs());
            out.push(v.re);
        }
        // FFT rounding scales with the product of input sizes, not with the output
        let floor = 1e-12 * g.l1_norm().max(self.kernel_l1) * g.max_abs().max(self.kernel_max);
        let limit = IMAG_RESIDUE_RATIO * max_re + floor;
        if max_im > limit {
            return Err(Error::ImaginaryResidue {
                residue: max_im,
                limit,
            });
        }
        GridFunction::new(spec, out)
    }
}

/// Linear convolution `h^d sum_j g1(x_j) g2(x - x_j)` restricted to the window.
pub fn convolve(g1: &GridFunction, g2: &GridFunction) -> Result<GridFunction> {
    g1.spec().check_same(g2.spec())?;
    Convolver::new(g2).apply(g1)
}

fn parity_sign(idx: &[usize]) -> f64 {
    if idx.iter().sum::<usize>() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Scaled DFT: `S(k_m) = h^d sum_j g(x_j) exp(-i 2 pi k_m . x_j)`.
pub fn dft(g: &GridFunction) -> Spectrum {
    let spec = *g.spec();
    let n = spec.points_per_axis();
    let dim = spec.dim();
    let mut buf: Vec<Complex64> = g.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut buf, n, dim, &plan(n, FftDirection::Forward));

    // x_j = -L + j h contributes exp(i pi m) = (-1)^m on top of the plain DFT.
    let h_d = spec.cell_volume();
    let mut out = vec![Complex64::new(0.0, 0.0); buf.len()];
    for (i, v) in buf.iter().enumerate() {
        let idx = spec.multi_index(i);
        let mut centered = idx;
        for c in centered.iter_mut().take(dim) {
            *c = (*c + n / 2) % n;
        }
        out[spec.flat_index(&centered)] = v * (h_d * parity_sign(&idx[..dim]));
    }
    Spectrum { spec, values: out }
}

/// Inverse of [`dft`] with frequency weight `1/(2L)^d`, keeping complex values.
pub fn idft_complex(s: &Spectrum) -> Vec<Complex64> {
    let spec = *s.spec();
    let n = spec.points_per_axis();
    let dim = spec.dim();
    let mut buf = vec![Complex64::new(0.0, 0.0); spec.len()];
    for (i, slot) in buf.iter_mut().enumerate() {
        let idx = spec.multi_index(i);
        let mut centered = idx;
        for c in centered.iter_mut().take(dim) {
            *c = (*c + n / 2) % n;
        }
        *slot = s.values()[spec.flat_index(&centered)] * parity_sign(&idx[..dim]);
    }
    fft_nd(&mut buf, n, dim, &plan(n, FftDirection::Inverse));
    let w = spec.frequency_spacing().powi(dim as i32);
    buf.iter_mut().for_each(|v| *v *= w);
    buf
}

/// Inverse of [`dft`] for conjugate-symmetric spectra, returning the real function.
pub fn idft(s: &Spectrum) -> Result<GridFunction> {
    let defect = s.conjugate_symmetry_defect();
    if defect > 1e-10 {
        return Err(Error::NotConjugateSymmetric { defect });
    }
    let values = idft_complex(s);
    let max_re = values.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
    let max_im = values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    let limit = IMAG_RESIDUE_RATIO * max_re;
    if max_im > limit {
        return Err(Error::ImaginaryResidue {
            residue: max_im,
            limit,
        });
    }
    GridFunction::new(*s.spec(), values.into_iter().map(|v| v.re).collect())
}

#[cfg(test)]
mod tests {
    use super::super::{integrate, mean, sample};
    use super::*;
    use crate::families;
    use std::f64::consts::PI;

    fn gauss(sigma: f64, mu: f64) -> impl Fn(&[f64]) -> f64 {
        move |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| (v - mu) * (v - mu)).sum();
            let d = x.len() as i32;
            (-r2 / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt()).powi(d)
        }
    }

    /// Brute-force O(N^2) linear convolution on a 1-d grid.
    fn direct_convolution(a: &GridFunction, b: &GridFunction) -> Vec<f64> {
        let n = a.spec().points_per_axis() as isize;
        let h = a.spec().spacing();
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    let k = i - j + n / 2;
                    if (0..n).contains(&k) {
                        s += a.values()[j as usize] * b.values()[k as usize];
                    }
                }
                s * h
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum() {
        let s = GridSpec::new(1, 3.0, 64).unwrap();
        let a = sample(&s, |x| (x[0] * 1.3).sin() + 0.2 * x[0]).unwrap();
        let b = sample(&s, |x| (-x[0] * x[0]).exp() * (1.0 + x[0])).unwrap();
        let fast = convolve(&a, &b).unwrap();
        let slow = direct_convolution(&a, &b);
        for (f, s) in fast.values().iter().zip(&slow) {
            assert!((f - s).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_semigroup() {
        let s = GridSpec::new(1, 16.0, 1 << 12).unwrap();
        let g = sample(&s, gauss(1.0, 0.0)).unwrap();
        let gg = convolve(&g, &g).unwrap();
        let target = sample(&s, gauss(2f64.sqrt(), 0.0)).unwrap();
        let err = gg
            .values()
            .iter()
            .zip(target.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn gaussian_semigroup_in_two_and_three_dims() {
        for (d, n) in [(2usize, 128usize), (3, 32)] {
            let s = GridSpec::new(d, 8.0, n).unwrap();
            let g = sample(&s, gauss(1.0, 0.0)).unwrap();
            let gg = convolve(&g, &g).unwrap();
            let target = sample(&s, gauss(2f64.sqrt(), 0.0)).unwrap();
            let err = gg
                .values()
                .iter()
                .zip(target.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-6, "d={d}: {err}");
        }
    }

    #[test]
    fn delta_column_is_identity() {
        let s = GridSpec::new(1, 16.0, 1 << 10).unwrap();
        let h = s.spacing();
        let mut delta = vec![0.0; s.len()];
        delta[s.origin_index()] = 1.0 / h;
        let delta = GridFunction::new(s, delta).unwrap();
        let g = sample(&s, gauss(1.0, 0.5)).unwrap();
        let out = convolve(&delta, &g).unwrap();
        for (a, b) in out.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn mass_multiplies_and_means_add() {
        let s = GridSpec::new(1, 20.0, 1 << 11).unwrap();
        let a = sample(&s, gauss(1.0, 1.5)).unwrap();
        let b = sample(&s, gauss(0.7, -0.5)).unwrap();
        let ab = convolve(&a, &b).unwrap();
        let rel = (integrate(&ab) - integrate(&a) * integrate(&b)).abs() / integrate(&ab);
        assert!(rel < 1e-6);
        let aa = convolve(&a, &a).unwrap();
        assert!((mean(&aa)[0] - 2.0 * mean(&a)[0]).abs() < 1e-6);
    }

    #[test]
    fn spec_mismatch_rejected() {
        let s1 = GridSpec::new(1, 1.0, 8).unwrap();
        let s2 = GridSpec::new(1, 2.0, 8).unwrap();
        assert!(matches!(
            convolve(&GridFunction::zeros(s1), &GridFunction::zeros(s2)),
            Err(Error::SpecMismatch(_))
        ));
    }

    #[test]
    fn gaussian_transform() {
        let s = GridSpec::new(1, 16.0, 1 << 12).unwrap();
        let g = sample(&s, gauss(1.0, 0.0)).unwrap();
        let sp = dft(&g);
        for (i, v) in sp.values().iter().enumerate() {
            let k = s.frequency(i)[0];
            if k.abs() <= 2.0 {
                let exact = (-2.0 * PI * PI * k * k).exp();
                assert!((v - exact).norm() < 1e-8, "k={k}");
            }
        }
    }

    #[test]
    fn shifted_gaussian_phase() {
        let s = GridSpec::new(1, 16.0, 1 << 10).unwrap();
        let g = sample(&s, gauss(1.0, 1.0)).unwrap();
        let sp = dft(&g);
        for (i, v) in sp.values().iter().enumerate() {
            let k = s.frequency(i)[0];
            if k.abs() <= 1.0 {
                let exact = Complex64::from_polar((-2.0 * PI * PI * k * k).exp(), -2.0 * PI * k);
                assert!((v - exact).norm() < 1e-8, "k={k}");
            }
        }
    }

    #[test]
    fn poisson_transform_is_exponential() {
        let s = GridSpec::new(1, 100.0, 1 << 14).unwrap();
        let p = families::PoissonParams::new(0.5, 1.0, 1).unwrap();
        let sp = dft(&sample(&s, families::poisson(p)).unwrap());
        for (i, v) in sp.values().iter().enumerate() {
            let k = s.frequency(i)[0];
            if (0.025..=1.0).contains(&k.abs()) {
                let exact = 0.5 * (-2.0 * PI * k.abs()).exp();
                assert!((v - exact).norm() < 1e-3, "k={k}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn zero_transforms_to_zero() {
        let s = GridSpec::new(2, 1.0, 8).unwrap();
        let sp = dft(&GridFunction::zeros(s));
        assert!(sp.values().iter().all(|v| v.norm() == 0.0));
        assert_eq!(idft(&sp).unwrap(), GridFunction::zeros(s));
    }

    #[test]
    fn nonsymmetric_spectrum_refused_for_real_output() {
        let s = GridSpec::new(1, 1.0, 8).unwrap();
        let mut vals = vec![Complex64::new(0.0, 0.0); 8];
        vals[5] = Complex64::new(0.0, 1.0);
        let sp = Spectrum::new(s, vals).unwrap();
        assert!(matches!(
            idft(&sp),
            Err(Error::NotConjugateSymmetric { .. })
        ));
        let c = idft_complex(&sp);
        assert!(c.iter().any(|v| v.im.abs() > 0.0));
    }

    #[test]
    fn round_trip_multi_dim() {
        let s = GridSpec::new(3, 2.0, 8).unwrap();
        let g = sample(&s, |x| (x[0] - 0.3 * x[1] + x[2] * x[2]).cos()).unwrap();
        let back = idft(&dft(&g)).unwrap();
        let scale = g.max_abs();
        for (a, b) in back.values().iter().zip(g.values()) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
    }
}
