use fourier_head::binning::{mixed_precision_bins, uniform_bins};
use fourier_head::fourier::{autocorrelate, AutocorrInput, FourierBasis, CategoricalDistribution};
use fourier_head::rng::SeededRng;
use fourier_head::smoothness::{gaussian_kernel, smoothness, Discrepancy, SignalHistogram, SmoothnessConfig};
use fourier_head::synth::{quantized_true_conditional, DatasetKind, TrueConditional};
use num_complex::Complex64;
use proptest::prelude::*;

fn raw_coeffs(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    (1..=max_n).prop_flat_map(|n| prop::collection::vec(-3.0f64..3.0, 2 * (n + 1)))
}

proptest! {
    #[test]
    fn density_is_nonnegative_and_integrates_to_one(raw in raw_coeffs(12)) {
        let a = AutocorrInput::from_interleaved(&raw).unwrap();
        let d = autocorrelate(&a);
        prop_assume!(!d.is_degenerate());
        let grid = 4000;
        let mut integral = 0.0;
        for j in 0..grid {
            let z = -1.0 + (j as f64 + 0.5) * 2.0 / grid as f64;
            let p = d.eval(z).unwrap();
            prop_assert!(p >= -1e-9, "p({z}) = {p}");
            integral += p * 2.0 / grid as f64;
        }
        prop_assert!((integral - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unnormalized_bin_sum_is_half_the_bin_count(raw in raw_coeffs(10), extra in 1usize..40) {
        let a = AutocorrInput::from_interleaved(&raw).unwrap();
        let d = autocorrelate(&a);
        prop_assume!(!d.is_degenerate());
        let m = 2 * d.num_frequencies() + extra;
        let bins = uniform_bins(m, -1.0, 1.0).unwrap();
        let (pmf, total) = d.discretize(bins.centers()).unwrap();
        prop_assert!((total - m as f64 / 2.0).abs() < 1e-8 * m as f64);
        prop_assert!((pmf.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_matches_direct_discretization(raw in raw_coeffs(8)) {
        let n = raw.len() / 2 - 1;
        let bins = uniform_bins(50, -1.0, 1.0).unwrap();
        let basis = FourierBasis::new(n, bins.centers());
        let mut fast = vec![0.0; 50];
        basis.pmf_into(&raw, &mut fast);
        let d = autocorrelate(&AutocorrInput::from_interleaved(&raw).unwrap());
        prop_assume!(!d.is_degenerate());
        let (slow, _) = d.discretize(bins.centers()).unwrap();
        for (f, s) in fast.iter().zip(slow.probs()) {
            prop_assert!((f - s).abs() < 1e-10);
        }
    }

    #[test]
    fn normalization_is_idempotent(raw in raw_coeffs(6), scale in 0.1f64..10.0) {
        let d = autocorrelate(&AutocorrInput::from_interleaved(&raw).unwrap());
        prop_assume!(!d.is_degenerate());
        let scaled: Vec<f64> = raw.iter().map(|v| v * scale).collect();
        let e = autocorrelate(&AutocorrInput::from_interleaved(&scaled).unwrap()).normalize();
        let once = d.normalize();
        for (a, b) in once.coeffs().iter().zip(once.normalize().coeffs()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        for (a, b) in once.coeffs().iter().zip(e.coeffs()) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn smoothness_is_bounded_and_shift_invariant(w in prop::collection::vec(0.0f64..1.0, 2..64), shift in 0usize..64, l1 in any::<bool>()) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let cfg = SmoothnessConfig { sigma_max: 200, discrepancy: if l1 { Discrepancy::L1 } else { Discrepancy::L2 } };
        let max = if l1 { 2.0 } else { std::f64::consts::SQRT_2 };
        let y = SignalHistogram::from_weights(&w).unwrap();
        let s = smoothness(&y, &cfg).unwrap().value;
        prop_assert!((0.0..=max).contains(&s));
        let mut rotated = w.clone();
        rotated.rotate_left(shift % w.len());
        let r = smoothness(&SignalHistogram::from_weights(&rotated).unwrap(), &cfg).unwrap().value;
        prop_assert!((s - r).abs() < 1e-9);
    }

    #[test]
    fn kernels_have_unit_mass(m in 2usize..200, sigma in 0.1f64..500.0) {
        let g = gaussian_kernel(m, sigma).unwrap();
        prop_assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(g.weights().iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn quantize_dequantize_roundtrip(m in 2usize..200, v in -1.5f64..1.5) {
        let bins = uniform_bins(m, -1.0, 1.0).unwrap();
        let k = bins.quantize(v);
        prop_assert!(k < m);
        prop_assert_eq!(bins.quantize(bins.dequantize(k)), k);
        if (-1.0..=1.0).contains(&v) {
            prop_assert!((bins.snap(v) - v).abs() <= 1.0 / m as f64 + 1e-12);
        }
    }

    #[test]
    fn mixed_bins_cover_range(samples in prop::collection::vec(-1.0f64..1.0, 2..300), m in 4usize..80, d in 0.0f64..0.95) {
        let spread = samples.iter().cloned().fold(f64::MIN, f64::max) - samples.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(samples.len() > 1 && spread > 1e-3);
        let out = mixed_precision_bins(&samples, m, d, -1.0, 1.0).unwrap();
        let e = out.layout.edges();
        prop_assert_eq!(e.len(), m + 1);
        prop_assert_eq!(e[0], -1.0);
        prop_assert_eq!(e[m], 1.0);
        prop_assert!(e.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn true_conditionals_quantize_to_distributions(kind in 0usize..3, x in -0.8f64..0.8, y in -0.8f64..0.8) {
        let kind = DatasetKind::ALL[kind];
        let tc = TrueConditional::for_point(kind, x, y, 0.1);
        let bins = uniform_bins(50, -1.0, 1.0).unwrap();
        let q: CategoricalDistribution = quantized_true_conditional(&tc, &bins).unwrap();
        prop_assert!((q.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut rng = SeededRng::new(7);
        for _ in 0..20 {
            let z = tc.sample(&mut rng);
            prop_assert!((-1.0..=1.0).contains(&z));
        }
    }
}

#[test]
fn single_coefficient_is_uniform() {
    let d = autocorrelate(&AutocorrInput::new(vec![Complex64::new(0.3, -2.0)]).unwrap());
    assert_eq!(d.eval(0.7).unwrap(), 0.5);
}
