use convineq::analyze::{verify, Verdict};
use convineq::coeff::build_coeffs;
use convineq::construct::{build_series, predicted_mass, SeriesOptions};
use convineq::families::poisson_inequality_margin;
use convineq::grid::{convolve, dft, integrate, mean, sample, GridFunction, GridSpec};
use proptest::prelude::*;

fn bump_mixture(spec: &GridSpec, centers: &[f64], widths: &[f64], mass: f64) -> GridFunction {
    let g = sample(spec, |x| {
        centers
            .iter()
            .zip(widths)
            .map(|(c, w)| (-(x[0] - c).powi(2) / (2.0 * w * w)).exp())
            .sum()
    })
    .unwrap();
    let m = integrate(&g);
    g.scaled(mass / m).unwrap()
}

fn spec() -> GridSpec {
    GridSpec::new(1, 32.0, 1 << 10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_commutes(c1 in -4.0..4.0f64, c2 in -4.0..4.0f64, w1 in 0.3..2.0f64, w2 in 0.3..2.0f64) {
        let s = spec();
        let g1 = bump_mixture(&s, &[c1], &[w1], 1.0);
        let g2 = bump_mixture(&s, &[c2, -c2], &[w2, w1], 0.7);
        let a = convolve(&g1, &g2).unwrap();
        let b = convolve(&g2, &g1).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn mass_multiplies_and_means_add(c in -3.0..3.0f64, w in 0.3..2.0f64, m in 0.1..2.0f64) {
        let s = spec();
        let g = bump_mixture(&s, &[c], &[w], m);
        let gg = convolve(&g, &g).unwrap();
        let (a, b) = (integrate(&g), integrate(&gg));
        prop_assert!((b - a * a).abs() <= 1e-6 * a * a);
        // first moments add for probability densities
        let p = g.scaled(1.0 / a).unwrap();
        let pp = convolve(&p, &p).unwrap();
        prop_assert!((mean(&pp)[0] - 2.0 * mean(&p)[0]).abs() <= 1e-6);
    }

    #[test]
    fn parseval(c in -3.0..3.0f64, w in 0.2..3.0f64) {
        let s = spec();
        let g = bump_mixture(&s, &[c, 0.5 * c], &[w, 0.5 * w], 1.0);
        let physical: f64 = g.values().iter().map(|v| v * v).sum::<f64>() * s.cell_volume();
        let spectral: f64 = dft(&g).values().iter().map(|z| z.norm_sqr()).sum::<f64>() / (2.0 * s.extent());
        prop_assert!((physical - spectral).abs() <= 1e-9 * physical);
    }

    #[test]
    fn poisson_margin_nonnegative_up_to_half(a in 0.01..=0.5f64, t in 0.1..10.0f64, x in -1e3..1e3f64, dim in 1usize..=3) {
        let margin = poisson_inequality_margin(a, t, dim).unwrap();
        let mut p = [0.0; 3];
        p[0] = x;
        p[dim - 1] += 0.5 * x;
        prop_assert!(margin(&p[..dim]) >= 0.0);
    }

    #[test]
    fn series_builds_are_nonnegative_solutions(b in 0.005..0.2f64, c in 0.0..4.0f64, w in 0.4..2.0f64) {
        // wide enough that the slowly decaying f is negligible at the scan edge
        let s = GridSpec::new(1, 64.0, 1 << 11).unwrap();
        let u = bump_mixture(&s, &[c, -c], &[w, w], b);
        let build = build_series(&u, &SeriesOptions::with_epsilon(1e-8)).unwrap();
        prop_assert!(build.f.values().iter().all(|&v| v >= 0.0));
        let report = verify(&build.f, 1e-6 * build.f.max_abs()).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Solution);
        prop_assert!((report.a - predicted_mass(b)).abs() <= 1e-3);
        prop_assert!(report.a <= 0.5);
    }

    #[test]
    fn series_is_monotone_in_the_residual(b in 0.01..0.15f64, extra in 0.0..0.1f64, w in 0.4..2.0f64) {
        let s = spec();
        let u1 = bump_mixture(&s, &[0.0], &[w], b);
        let u2 = u1.add_scaled(&bump_mixture(&s, &[1.0], &[0.5], 1.0), extra).unwrap();
        let opts = SeriesOptions { terms: Some(40), ..SeriesOptions::default() };
        let f1 = build_series(&u1, &opts).unwrap().f;
        let f2 = build_series(&u2, &opts).unwrap().f;
        for (x, y) in f1.values().iter().zip(f2.values()) {
            prop_assert!(y - x >= -1e-15);
        }
    }

    #[test]
    fn tail_bound_dominates_partial_tail(n in 1usize..2000, q in 0.0..=1.0f64) {
        let t = build_coeffs(20_000).unwrap();
        let direct: f64 = (n + 1..=20_000).map(|k| t.coeff(k) * q.powi(k as i32)).sum();
        prop_assert!(t.tail_bound(n, q).unwrap() >= direct * (1.0 - 1e-12));
    }
}
