//! Taylor coefficients of `sqrt(1 - x)`.
//!
//! With `sqrt(1 - x) = 1 - sum_{n>=1} c_n x^n` every `c_n` is positive,
//! `c_n = (2n-3)!! / (2^n n!)` with the convention `(-1)!! = 1`, and
//! `c_n ~ 1 / (2 sqrt(pi) n^{3/2})`. Since `sqrt(1 - 1) = 0` the coefficients sum
//! to one, and the complement of the partial sums has the closed form
//! `1 - S_N = binom(2N, N) / 4^N`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CoeffTable {
    values: Vec<f64>,
    partial_sums: Vec<f64>,
    /// `1 - S_N`, carried by its own recurrence so it never suffers cancellation.
    tails: Vec<f64>,
}

/// Kahan-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Builds `c_1..c_{n_max}` from `c_{n+1} = c_n (2n-1)/(2n+2)`.
pub fn build_coeffs(n_max: usize) -> Result<CoeffTable> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(n_max);
    let mut partial_sums = Vec::with_capacity(n_max);
    let mut tails = Vec::with_capacity(n_max);

    let mut c = 0.5;
    let mut tail = 0.5;
    let mut acc = KahanSum::default();
    for n in 1..=n_max {
        values.push(c);
        acc.add(c);
        partial_sums.push(acc.value());
        tails.push(tail);
        let nf = n as f64;
        c *= (2.0 * nf - 1.0) / (2.0 * nf + 2.0);
        tail *= (2.0 * nf + 1.0) / (2.0 * nf + 2.0);
    }
    Ok(CoeffTable {
        values,
        partial_sums,
        tails,
    })
}

impl CoeffTable {
    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    /// `c_n` for `1 <= n <= n_max`.
    pub fn coeff(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    /// `S_N = c_1 + ... + c_N`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.partial_sums[n - 1]
    }

    /// `1 - S_N`, the exact tail `sum_{n>N} c_n`.
    pub fn complement(&self, n: usize) -> f64 {
        self.tails[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    /// Certified upper bound on `sum_{n>N} c_n q^n`.
    ///
    /// For `q < 1` the coefficients are decreasing, so the tail is dominated by the
    /// geometric series started at `c_{N+1} q^{N+1}`. That bound degrades as
    /// `q -> 1`, where `1 - S_N` (exact at `q = 1`) takes over.
    pub fn tail_bound(&self, n: usize, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!("q = {q} outside [0, 1]")));
        }
        if n == 0 || n >= self.n_max() {
            return Err(Error::InvalidArgument(format!(
                "N = {n} must satisfy 1 <= N < n_max = {}",
                self.n_max()
            )));
        }
        if q == 0.0 {
            return Ok(0.0);
        }
        if q == 1.0 {
            return Ok(self.complement(n));
        }
        let geometric = self.coeff(n + 1) * q.powi((n + 1) as i32) / (1.0 - q);
        Ok(geometric.min(self.complement(n)))
    }

    /// Rows `(n, c_n, S_n)` as CSV.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "c_n", "S_n"])
            .map_err(|e| Error::Parse(e.to_string()))?;
        for (i, (c, s)) in self.values.iter().zip(&self.partial_sums).enumerate() {
            w.write_record([(i + 1).to_string(), c.to_string(), s.to_string()])
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `(2n-3)!! / (2^n n!)` as an exact fraction, for small `n`.
    fn exact_coeff(n: u32) -> (u128, u128) {
        let mut num: u128 = 1;
        let mut k = 2 * n as i64 - 3;
        while k > 1 {
            num *= k as u128;
            k -= 2;
        }
        let mut den: u128 = 1 << n;
        for j in 1..=n as u128 {
            den *= j;
        }
        (num, den)
    }

    fn catalan(n: u32) -> f64 {
        // C_n = binom(2n, n) / (n + 1), exact in u128 for n <= 30
        let mut c: u128 = 1;
        for k in 0..n as u128 {
            c = c * 2 * (2 * k + 1) / (k + 2);
        }
        c as f64
    }

    #[test]
    fn first_four_by_hand() {
        let t = build_coeffs(4).unwrap();
        assert_eq!(t.values(), &[0.5, 0.125, 0.0625, 5.0 / 128.0]);
    }

    #[test]
    fn single_term_table() {
        let t = build_coeffs(1).unwrap();
        assert_eq!(t.values(), &[0.5]);
        assert_eq!(t.partial_sum(1), 0.5);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(build_coeffs(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dyadic_prefix_matches_exact_rationals() {
        let t = build_coeffs(20).unwrap();
        for n in 1..=20u32 {
            let (num, den) = exact_coeff(n);
            let exact = num as f64 / den as f64;
            let got = t.coeff(n as usize);
            let ulp = f64::EPSILON * exact;
            assert!((got - exact).abs() <= 2.0 * ulp, "n={n}: {got} vs {exact}");
        }
    }

    #[test]
    fn catalan_identity() {
        let t = build_coeffs(30).unwrap();
        for n in 1..=30u32 {
            let scaled = t.coeff(n as usize) * 2f64.powi(2 * n as i32 - 1);
            let cat = catalan(n - 1);
            assert!(((scaled - cat) / cat).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn complement_matches_one_minus_partial_sum() {
        let t = build_coeffs(10_000).unwrap();
        for n in [1, 2, 3, 10, 100, 10_000] {
            let direct = 1.0 - t.partial_sum(n);
            assert!((direct - t.complement(n)).abs() < 1e-12, "n={n}");
        }
        assert_eq!(t.complement(1), 0.5);
        assert_eq!(t.complement(2), 0.375);
    }

    #[test]
    fn partial_sums_increase_below_one() {
        let t = build_coeffs(100_000).unwrap();
        let s = t.partial_sums();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(*s.last().unwrap() < 1.0);
    }

    #[test]
    fn tail_bound_edge_cases() {
        let t = build_coeffs(100).unwrap();
        assert_eq!(t.tail_bound(1, 0.0).unwrap(), 0.0);
        assert_eq!(t.tail_bound(10, 1.0).unwrap(), t.complement(10));
        assert!(t.tail_bound(10, 1.5).is_err());
        assert!(t.tail_bound(10, -0.1).is_err());
        assert!(t.tail_bound(100, 0.5).is_err());
        assert!(t.tail_bound(0, 0.5).is_err());
        // continuous as q -> 1 rather than blowing up with 1/(1 - q)
        let near = t.tail_bound(10, 1.0 - 1e-15).unwrap();
        assert!(near <= t.complement(10) && near > 0.9 * t.complement(10));
    }

    #[test]
    fn tail_bound_dominates_direct_sum() {
        let t = build_coeffs(1_000_000).unwrap();
        let direct: f64 = (11..=1_000_000)
            .map(|n| t.coeff(n) * 0.5f64.powi(n as i32))
            .sum();
        let bound = t.tail_bound(10, 0.5).unwrap();
        assert!(bound >= direct);
        assert!(bound < 2.0 * direct);
    }

    #[test]
    fn generating_function_identity() {
        let t = build_coeffs(1_000_000).unwrap();
        for q in [0.1f64, 0.5, 0.9] {
            let mut acc = KahanSum::default();
            let mut qn = 1.0;
            for &c in t.values() {
                qn *= q;
                if qn == 0.0 {
                    break;
                }
                acc.add(c * qn);
            }
            let expected = 1.0 - (1.0 - q).sqrt();
            assert!((acc.value() - expected).abs() < 1e-10, "q={q}");
        }
    }

    #[test]
    fn first_moment_series_diverges() {
        let t = build_coeffs(1_000_000).unwrap();
        let s: f64 = t
            .values()
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c)
            .sum();
        assert!(s > 100.0, "sum n c_n = {s}");
    }

    #[test]
    fn csv_dump_ends_with_last_coefficient() {
        let t = build_coeffs(4).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        assert_eq!(last, "4,0.0390625,0.7265625");
        assert_eq!(text.lines().count(), 5);
    }
}
