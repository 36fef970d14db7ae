use besov_robust::besov::{besov_ipm, BesovParams};
use besov_robust::coefficients::exact_coeffs;
use besov_robust::contamination::ContaminationSpec;
use besov_robust::density::{Cell, DensityModel};
use besov_robust::estimators::{EstimatorConfig, Regime};
use besov_robust::harness::*;
use besov_robust::wavelet::WaveletFamily;
use besov_robust::Error;
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;

fn gen(s: f64, p: f64, q: f64) -> BesovParams {
    BesovParams::generator(s, p, q, 1.0).unwrap()
}

fn disc(s: f64, p: f64, q: f64) -> BesovParams {
    BesovParams::discriminator(s, p, q, 1.0).unwrap()
}

fn tv() -> BesovParams {
    BesovParams::loss_preset("tv").unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn holder_tv_exponents() {
    for regime in [Regime::DenseUnstructured, Regime::Structured] {
        let e = theoretical_exponents(&gen(1.0, INF, INF), &tv(), 1, regime).unwrap();
        assert!(close(e.dominant_n, 1.0 / 3.0));
        assert!(close(e.dominant_eps, 1.0));
    }
}

#[test]
fn lp_loss_dense_exponent() {
    for (s, p) in [(1.0, 2.0), (0.5, 3.0), (2.0, 1.5), (1.0, INF)] {
        let pd = if p == INF { 1.0 } else { p / (p - 1.0) };
        let d = disc(0.0, pd, pd);
        let e = theoretical_exponents(&gen(s, INF, INF), &d, 1, Regime::DenseUnstructured).unwrap();
        let want = s / (s + 1.0 - 1.0 / p);
        let upper: Vec<f64> = e.eps_exponents.iter().cloned().filter(|&x| x < 1.0).collect();
        if want < 1.0 {
            assert_eq!(upper.len(), 1);
            assert!(close(upper[0], want), "{upper:?} {want}");
            assert!(close(e.dominant_eps, want));
        } else {
            assert!(upper.is_empty());
        }
    }
}

#[test]
fn smooth_discriminator_collapses_dense_eps_set() {
    for (sd, pd) in [(0.5, 2.0), (1.0, 1.0), (2.0, 3.0), (1.0, 2.0)] {
        let e = theoretical_exponents(&gen(1.5, 2.0, 2.0), &disc(sd, pd, pd), 1, Regime::DenseUnstructured);
        if let Ok(e) = e {
            assert!(sd >= 1.0 / pd);
            assert_eq!(e.eps_exponents, vec![1.0]);
        }
    }
    let e = theoretical_exponents(&gen(1.0, INF, INF), &disc(0.2, 2.0, 2.0), 1, Regime::DenseUnstructured).unwrap();
    assert!(e.dominant_eps < 1.0);
}

#[test]
fn regime_mismatch_names_hypothesis() {
    let rough = theoretical_exponents(&gen(0.4, 2.0, 2.0), &tv(), 1, Regime::DenseUnstructured);
    assert!(matches!(&rough, Err(Error::RegimeMismatch(m)) if m.contains("D/p_g")));
    let sparse = theoretical_exponents(&gen(1.0, 2.0, 2.0), &tv(), 1, Regime::SparseUnstructured);
    assert!(matches!(&sparse, Err(Error::RegimeMismatch(m)) if m.contains("p_d' >= p_g")));
    let dense = theoretical_exponents(&gen(1.0, 1.5, 2.0), &disc(0.0, 1.5, 2.0), 1, Regime::DenseUnstructured);
    assert!(matches!(&dense, Err(Error::RegimeMismatch(m)) if m.contains("p_d' <= p_g")));
    assert!(theoretical_exponents(&gen(0.5, 2.0, 2.0), &tv(), 1, Regime::Structured).is_ok());
}

#[test]
fn breakdown_examples() {
    assert!(close(breakdown_point(0.5, 1.0, 1e6), 1e-3));
    let curve = breakdown_curve(&gen(1.0, INF, INF), &tv(), 1, Regime::Structured, &[8.0, 1000.0, 1e6]).unwrap();
    for (n, e) in &curve {
        assert!((e / n.powf(-1.0 / 3.0) - 1.0).abs() < 1e-12);
    }
    assert!(curve.windows(2).all(|w| w[1].1 <= w[0].1));
    let n = 1e4;
    assert!(breakdown_point(0.3, 5.0, n) > breakdown_point(0.3, 1.0, n));
    assert!((breakdown_point(0.3, 1e9, n) - 1.0).abs() < 1e-6);
}

/// Dominant n-exponents of the nonlinear and linear rates, written out directly.
fn oracle_rates(sg: f64, pg: f64, sd: f64, pd: f64) -> (f64, f64) {
    let dpg = 1.0 / pg;
    let dpdc = 1.0 - 1.0 / pd;
    let a = (sg + sd) / (2.0 * sg + 1.0);
    let nl = (sg + sd - dpg + dpdc) / (2.0 * sg + 1.0 - 2.0 * dpg);
    let lin = (sg + sd - dpg + dpdc) / (2.0 * sg + 1.0 - 2.0 * dpg + 2.0 * dpdc);
    (0.5f64.min(a).min(nl), 0.5f64.min(a).min(lin))
}

#[test]
fn nonlinear_and_linear_rates_agree_when_expected() {
    let ps = [1.0, 1.25, 1.5, 2.0, 3.0, 4.0, INF];
    let mut differ = 0;
    for &sg in &[0.8, 1.0, 1.5, 2.0, 3.0] {
        for &pg in &ps {
            for &sd in &[0.0, 0.25, 0.5, 1.0] {
                for &pd in &ps {
                    let (g, d) = (gen(sg, pg, 2.0), disc(sd, pd, 2.0));
                    let Ok(e) = theoretical_exponents(&g, &d, 1, Regime::SparseUnstructured) else { continue };
                    let lin = theoretical_exponents(&g, &d, 1, Regime::LinearSparse).unwrap();
                    let (onl, olin) = oracle_rates(sg, pg, sd, pd);
                    assert!(close(e.dominant_n, onl) && close(lin.dominant_n, olin));
                    let pdc = d.p_conj();
                    if sd >= 0.5 || pdc == pg || pdc == INF {
                        assert!(close(e.dominant_n, lin.dominant_n), "{sg} {pg} {sd} {pd}");
                    }
                    if !close(e.dominant_n, lin.dominant_n) {
                        assert!(lin.dominant_n < e.dominant_n);
                        differ += 1;
                    }
                }
            }
        }
    }
    assert!(differ > 0);
    // p_d' = 2 alone does not force agreement.
    let e = theoretical_exponents(&gen(2.0, 1.0, 2.0), &disc(0.0, 2.0, 2.0), 1, Regime::SparseUnstructured).unwrap();
    let l = theoretical_exponents(&gen(2.0, 1.0, 2.0), &disc(0.0, 2.0, 2.0), 1, Regime::LinearSparse).unwrap();
    assert!(close(e.dominant_n, 0.4) && close(l.dominant_n, 0.375));
}

#[test]
fn mixed_term_is_dominated() {
    for &s in &[0.25, 0.5, 1.0, 2.0, 4.0] {
        let a = s / (2.0 * s + 1.0);
        for k in 4..=24 {
            let n = 2f64.powi(k);
            for m in 0..=30 {
                let eps = 2f64.powi(-m);
                let mixed = (eps / n).powf(a);
                assert!(mixed <= n.powf(-a) + eps);
            }
        }
    }
    // the product reading is not dominated once n ε < 1
    let (n, eps, a) = (1e4f64, 1e-6f64, 1.0 / 3.0);
    assert!((n * eps).powf(-a) > n.powf(-a) + eps);
}

proptest! {
    #[test]
    fn structured_eps_exponent_is_one(sg in 0.0f64..4.0, pg in 1.0f64..8.0, sd in 0.0f64..3.0, pd in 1.0f64..8.0, dim in 1usize..4) {
        let g = gen(sg, pg, 2.0);
        let d = disc(sd, pd, 2.0);
        if let Ok(e) = theoretical_exponents(&g, &d, dim, Regime::Structured) {
            prop_assert_eq!(e.dominant_eps, 1.0);
            prop_assert_eq!(e.eps_exponents, vec![1.0]);
        } else {
            prop_assert!(sg < dim as f64 / pg);
        }
    }

    #[test]
    fn exact_power_laws_fit(e in 0.05f64..2.0, c in 0.01f64..10.0) {
        let ns: Vec<f64> = (8..15).map(|k| 2f64.powi(k)).collect();
        let r: Vec<f64> = ns.iter().map(|n| c * n.powf(-e)).collect();
        let f = fit_rate(&ns, &r, Axis::N).unwrap();
        prop_assert!((f.exponent - e).abs() < 1e-10);
        let eps: Vec<f64> = (2..9).map(|k| 2f64.powi(-k)).collect();
        let r: Vec<f64> = eps.iter().map(|x| c * x.powf(e)).collect();
        let f = fit_rate(&eps, &r, Axis::Eps).unwrap();
        prop_assert!((f.exponent - e).abs() < 1e-10);
    }
}

#[test]
fn fit_examples() {
    let ns: Vec<f64> = (8..15).map(|k| 2f64.powi(k)).collect();
    let exact: Vec<f64> = ns.iter().map(|n| 2.0 * n.powf(-1.0 / 3.0)).collect();
    assert!((fit_rate(&ns, &exact, Axis::N).unwrap().exponent - 1.0 / 3.0).abs() < 1e-12);
    let flat: Vec<f64> = ns.iter().map(|n| 2.0 * (n.powf(-1.0 / 3.0) + 0.2)).collect();
    assert!(fit_rate(&ns, &flat, Axis::N).unwrap().exponent < 1.0 / 3.0);
    assert!(matches!(fit_rate(&ns[..3], &exact[..3], Axis::N), Err(Error::DegenerateFit(_))));
    let mut bad = exact.clone();
    bad[2] = 0.0;
    assert!(matches!(fit_rate(&ns, &bad, Axis::N), Err(Error::DegenerateFit(_))));
    let cells: Vec<CellResult> = ns
        .iter()
        .map(|&n| CellResult::from_risks(n as usize, 0.0, 0, 0, vec![0.3 + n.powf(-0.5); 3]).unwrap())
        .collect();
    let refs: Vec<&CellResult> = cells.iter().collect();
    let f = fit_cells(&refs, Axis::N, Some((0.3, 0.0))).unwrap();
    assert!((f.exponent - 0.5).abs() < 1e-9 && f.excluded == 0);
    assert!(mean_stderr(&[1.0]).is_err());
    let (m, s) = mean_stderr(&[1.0, 3.0]).unwrap();
    assert!(close(m, 2.0) && close(s, 1.0));
}

#[test]
fn oracle_estimate_has_zero_risk() {
    let h = WaveletFamily::daubechies(2).unwrap();
    let m = DensityModel::dyadic_histogram(2, &[0.1, 0.4, 0.3, 0.2]).unwrap();
    let t = exact_coeffs(&m, &h, 5).unwrap();
    assert_eq!(besov_ipm(&t, &t, &tv()).unwrap(), 0.0);
}

#[test]
fn haar_histogram_risk_is_small() {
    let h = WaveletFamily::haar();
    let masses = [0.05, 0.2, 0.1, 0.15, 0.05, 0.25, 0.1, 0.1];
    let truth = DensityModel::dyadic_histogram(3, &masses).unwrap();
    let (mean, _) = estimate_risk(&truth, &ContaminationSpec::none(), &EstimatorConfig::linear(3), &tv(), &h, 1 << 16, 4, 99)
        .unwrap();
    assert!(mean < 0.05, "{mean}");
}

#[test]
fn risk_decreases_in_n_and_grows_in_eps() {
    let h = WaveletFamily::haar();
    let tv = tv();
    let truth = DensityModel::uniform(1);
    let mut last = f64::INFINITY;
    for k in [8, 10, 12, 14] {
        let (m, _) = estimate_risk(&truth, &ContaminationSpec::none(), &EstimatorConfig::linear(3), &tv, &h, 1 << k, 20, 5).unwrap();
        assert!(m < last);
        last = m;
    }
    let g = DensityModel::uniform_on(Cell::new(vec![0.0], vec![0.25])).unwrap();
    let spec = ContaminationSpec::structured(0.0, g, 4.0).unwrap();
    let setup = RiskSetup::new(truth, spec, EstimatorConfig::linear(3), tv, h, 4096).unwrap();
    let mut prev: Option<(f64, f64)> = None;
    for eps in [0.0, 1.0 / 256.0, 1.0 / 64.0, 1.0 / 16.0, 1.0 / 4.0] {
        let s = setup.with_eps(eps);
        let risks: Vec<f64> = (0..30).map(|t| s.trial(4096, trial_seed(8, 0, t)).unwrap()).collect();
        let (m, se) = mean_stderr(&risks).unwrap();
        if let Some((pm, pse)) = prev {
            assert!(m >= pm - 2.0 * (se * se + pse * pse).sqrt(), "{eps}: {m} < {pm}");
        }
        prev = Some((m, se));
    }
}

#[test]
fn risk_is_deterministic() {
    let h = WaveletFamily::daubechies(2).unwrap();
    let truth = DensityModel::dyadic_histogram(1, &[0.3, 0.7]).unwrap();
    let g = DensityModel::uniform_on(Cell::new(vec![0.5], vec![1.0])).unwrap();
    let spec = ContaminationSpec::unstructured(0.1, g).unwrap();
    let est = EstimatorConfig::thresholded(1, 4, 1.0);
    let a = estimate_risk(&truth, &spec, &est, &tv(), &h, 500, 5, 42).unwrap();
    let b = estimate_risk(&truth, &spec, &est, &tv(), &h, 500, 5, 42).unwrap();
    assert_eq!(a.0.to_bits(), b.0.to_bits());
    assert_eq!(a.1.to_bits(), b.1.to_bits());
    assert!(estimate_risk(&truth, &spec, &est, &tv(), &h, 500, 1, 42).is_err());
    let setup = RiskSetup::new(truth, spec, est, tv(), h, 500).unwrap();
    assert_eq!(setup.truth_tree.j_max(), 4 + COMPARISON_MARGIN);
    let deep = setup.with_comparison_level(9).unwrap();
    assert_eq!(deep.truth_tree.j_max(), 9);
    assert!(deep.trial(500, 1).unwrap() > 0.0);
}
