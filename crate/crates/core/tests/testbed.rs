use std::f64::consts::PI;

use srfe::diagnostics::gaussian_target_transform;
use srfe::rng;
use srfe::testbed::{
    best_fit_coefficients, corpus, run_experiment, sample_dataset, sample_points, sample_test_set,
    CorpusOptions, ExperimentConfig, NoiseSpec, SincConvention, TestSet,
};
use srfe::{
    draw_weights, evaluate_expansion, fit_srfe, fit_srfe_s, relative_error, ActivationKind,
    FitConfig, PointSet, Provenance, SamplingConfig, Scheme, C64,
};

#[test]
fn term_sums_match_closed_forms() {
    for sinc in [SincConvention::Normalized, SincConvention::Unnormalized] {
        let reg = corpus(CorpusOptions { sinc }).unwrap();
        for t in reg.iter() {
            let pts = sample_points(t.domain(), t.dim(), 10_000, 17, rng::POINTS).unwrap();
            for x in pts.iter() {
                let (a, b) = (t.eval(x), t.eval_terms(x));
                assert!(
                    (a - b).abs() <= 1e-12 * (1.0 + a.abs()),
                    "{}: {a} vs {b}",
                    t.name()
                );
            }
        }
    }
}

#[test]
fn mixture_variance() {
    let law = Provenance::Mixture {
        gamma: 0.1,
        lo: vec![-PI; 3],
        hi: vec![PI; 3],
    };
    let p = sample_points(&law, 3, 200_000, 4, rng::POINTS).unwrap();
    let expect = PI * PI / 3.0 + 0.01;
    for k in 0..3 {
        let col: Vec<f64> = p.iter().map(|x| x[k]).collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
        assert!(
            (var / expect - 1.0).abs() < 0.02,
            "coordinate {k}: {var} vs {expect}"
        );
        assert!(mean.abs() < 0.02);
    }
}

/// `f(x) = exp(−x²/2)` with `ρ = N(0, 1)`: the Monte Carlo expansion
/// `Σ c*_j e^{iω_j x}` is unbiased, and the residual shrinks like `1/√N`.
#[test]
fn best_fit_expansion_is_unbiased() {
    let x0 = [0.0, 0.7, -1.5];
    let pts = PointSet::from_rows(1, &x0.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap();
    let trials = 400;
    let n = 50;
    let mut sums = [0.0; 3];
    let mut sq = [0.0; 3];
    for seed in 0..trials {
        let w = draw_weights::<f64>(&SamplingConfig::dense(1, n, 1.0, seed)).unwrap();
        let c = best_fit_coefficients::<C64, _, _>(
            |om| C64::new(gaussian_target_transform(1.0, om[0]), 0.0),
            |om| (-0.5 * om[0] * om[0]).exp() / (2.0 * PI).sqrt(),
            &w,
        )
        .unwrap();
        let v =
            evaluate_expansion(&w, ActivationKind::ComplexExponential, c.values(), &pts).unwrap();
        for k in 0..3 {
            sums[k] += v[k].re;
            sq[k] += v[k].re * v[k].re;
        }
    }
    for k in 0..3 {
        let mean = sums[k] / trials as f64;
        let se = ((sq[k] / trials as f64 - mean * mean).max(0.0) / trials as f64).sqrt();
        let truth = (-0.5 * x0[k] * x0[k]).exp();
        assert!(
            (mean - truth).abs() < 3.0 * se + 1e-12,
            "x = {}: {mean} vs {truth} (se {se})",
            x0[k]
        );
    }
}

fn ishigami_config(q: usize, n_per_subset: usize) -> FitConfig {
    let sampling = SamplingConfig {
        n_features: None,
        n_per_subset: Some(n_per_subset),
        ..SamplingConfig::sparse(Scheme::Complete, 3, q, 0, 1.5, 3)
    }
    .with_bias(0.0, 2.0 * PI);
    // Loose enough that an additive model is feasible on 150 points.
    FitConfig::new(sampling, ActivationKind::Sine, 1.5)
}

/// Features of the target's own order beat first-order ones, in median.
#[test]
fn declared_order_beats_first_order() {
    let reg = corpus(CorpusOptions::default()).unwrap();
    let t = reg.get("ishigami").unwrap();
    // On the full box the interaction term is not negligible.
    let law = t.domain().clone();
    let (mut first, mut second) = (vec![], vec![]);
    for seed in 0..5 {
        let (train, y) = sample_dataset(t, &law, 150, &NoiseSpec::none(), seed).unwrap();
        let (test, truth) = sample_test_set(t, &law, 1500, seed).unwrap();
        let err = |q: usize| {
            let base = ishigami_config(q, 300);
            let cfg = FitConfig {
                sampling: SamplingConfig {
                    seed,
                    ..base.sampling.clone()
                },
                ..base
            };
            let model = fit_srfe_s::<f64>(&train, &y, &cfg).unwrap();
            relative_error(&model.predict(&test).unwrap(), &truth).unwrap()
        };
        // Same feature budget per subset for both.
        first.push(err(1));
        second.push(err(2));
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let (e1, e2) = (median(&mut first), median(&mut second));
    assert!(e2 < e1, "q=2 median {e2} vs q=1 median {e1}");
}

#[test]
fn full_order_complete_scheme_equals_dense_fit() {
    let reg = corpus(CorpusOptions::default()).unwrap();
    let t = reg.get("ratio").unwrap();
    let (train, y) = sample_dataset(t, t.domain(), 80, &NoiseSpec::none(), 9).unwrap();
    let dense = FitConfig::new(
        SamplingConfig::dense(5, 120, 1.0, 21).with_bias(0.0, 2.0 * PI),
        ActivationKind::Sine,
        1e-3,
    );
    let complete = FitConfig::new(
        SamplingConfig::sparse(Scheme::Complete, 5, 5, 120, 1.0, 21).with_bias(0.0, 2.0 * PI),
        ActivationKind::Sine,
        1e-3,
    );
    let a = fit_srfe::<f64>(&train, &y, &dense).unwrap();
    let b = fit_srfe_s::<f64>(&train, &y, &complete).unwrap();
    assert_eq!(
        a.weights.weights().collect::<Vec<_>>(),
        b.weights.weights().collect::<Vec<_>>()
    );
    assert_eq!(a.weights.biases(), b.weights.biases());
    assert_eq!(a.coefficients, b.coefficients);
}

#[test]
fn experiment_reports_are_reproducible() {
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"name": "repro", "target": "sinc-product", "m": 60,
            "fit": {"sampling": {"dim": 5, "n_per_subset": 8, "q": 2, "sigma": 1.0, "seed": 0, "scheme": "complete"},
                    "activation": "sine", "eta": 0.01},
            "seeds": [3, 1, 2]}"#,
    )
    .unwrap();
    let a = serde_json::to_string(&run_experiment(&cfg).unwrap().without_timing()).unwrap();
    let b = serde_json::to_string(&run_experiment(&cfg).unwrap().without_timing()).unwrap();
    assert_eq!(a, b);
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(
        r.records.iter().map(|x| x.seed).collect::<Vec<_>>(),
        vec![3, 1, 2]
    );
    assert_eq!(r.diagnostics.n_test, 600);
    assert!(matches!(cfg.test, None | Some(TestSet::Sampled { .. })));
}
