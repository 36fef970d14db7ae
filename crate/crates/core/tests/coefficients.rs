use besov_robust::coefficients::{empirical_coeffs, exact_coeffs};
use besov_robust::contamination::ks_one_sample;
use besov_robust::density::{sample, Bump, Cell, DensityModel, Profile};
use besov_robust::estimators::eval_density;
use besov_robust::points::PointSet;
use besov_robust::quadrature::integrate_box;
use besov_robust::rng::{derive_seed, stream};
use besov_robust::tree::{tree_axpy, CoefficientTree, Provenance};
use besov_robust::wavelet::{eval_wavelet, WaveletFamily, WaveletIndex};
use besov_robust::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn mother(j: u32, k: u64) -> WaveletIndex {
    WaveletIndex::new(j, vec![k], 1).unwrap()
}

fn all_indices_1d(j_max: u32) -> Vec<WaveletIndex> {
    (0..=j_max).flat_map(|j| (0..(1u64 << j)).map(move |k| mother(j, k))).collect()
}

/// `∫ p ψ_idx` by adaptive quadrature on the half-cells of a Haar daughter.
fn haar_oracle_1d(m: &DensityModel, idx: &WaveletIndex) -> f64 {
    let f = WaveletFamily::haar();
    let w = 1.0 / (1u64 << idx.level) as f64;
    let a = idx.k[0] as f64 * w;
    let mut s = 0.0;
    for (lo, hi) in [(a, a + w / 2.0), (a + w / 2.0, a + w)] {
        s += integrate_box(|x| m.eval(x) * eval_wavelet(&f, idx, x), &[lo], &[hi], 1e-14, 1 << 14).unwrap();
    }
    s
}

fn histogram_2x(level: u32) -> DensityModel {
    let n = 1u64 << level;
    let masses: Vec<f64> = (0..n).map(|i| ((i + 1) * (i + 1) - i * i) as f64 / (n * n) as f64).collect();
    DensityModel::dyadic_histogram(level, &masses).unwrap()
}

#[test]
fn empirical_examples() {
    let h = WaveletFamily::haar();
    let t = empirical_coeffs(&PointSet::from_1d(&[0.5; 4]), &h, 0, 0).unwrap();
    assert_eq!(t.alpha(), 1.0);
    let t = empirical_coeffs(&PointSet::from_1d(&[0.25, 0.75]), &h, 0, 0).unwrap();
    assert_eq!(t.get(&mother(0, 0)), 0.0);
    assert_eq!(t.provenance(), Provenance::Empirical(2));
    assert!(matches!(empirical_coeffs(&PointSet::new(1), &h, 0, 1), Err(Error::EmptySample)));
    assert!(matches!(
        empirical_coeffs(&PointSet::from_1d(&[0.2, 1.5]), &h, 0, 1),
        Err(Error::OutOfDomain { index: 1 })
    ));
    assert!(empirical_coeffs(&PointSet::from_1d(&[0.2]), &h, 2, 1).is_err());
}

#[test]
fn uniform_empirical_coefficients_are_small() {
    let h = WaveletFamily::haar();
    let u = DensityModel::uniform(1);
    let runs = 100;
    let mut good = 0;
    for r in 0..runs {
        let x = sample(&u, 1000, derive_seed(17, r, 0)).unwrap();
        let t = empirical_coeffs(&x, &h, 3, 3).unwrap();
        let ok = all_indices_1d(3)
            .iter()
            .all(|i| t.get(i).abs() < 5.0 * ((1u64 << i.level) as f64 / 1000.0).sqrt());
        good += ok as usize;
    }
    assert!(good * 100 >= 99 * runs as usize, "{good} of {runs}");
}

#[test]
fn exact_examples() {
    let h = WaveletFamily::haar();
    let t = exact_coeffs(&DensityModel::uniform(1), &h, 6).unwrap();
    assert_eq!(t.alpha(), 1.0);
    assert_eq!(t.nnz(), 1);

    let idx = mother(3, 5);
    let s = DensityModel::spike(DensityModel::uniform(1), &h, idx.clone(), 0.3).unwrap();
    let t = exact_coeffs(&s, &h, 5).unwrap();
    assert_eq!(t.alpha(), 1.0);
    assert_eq!(t.get(&idx), 0.3);
    assert_eq!(t.nnz(), 2);

    // 2x on [0,1]: β_0 = ∫_0^½ 2x − ∫_½^1 2x = ¼ − ¾
    let m = histogram_2x(8);
    let t = exact_coeffs(&m, &h, 3).unwrap();
    assert!((t.get(&mother(0, 0)) + 0.5).abs() < 1e-14);
    assert!((haar_oracle_1d(&m, &mother(0, 0)) + 0.5).abs() < 1e-12);
}

#[test]
fn haar_exact_matches_quadrature_oracle() {
    let models = vec![
        histogram_2x(5),
        DensityModel::smooth_bumps(
            1,
            vec![
                Bump { center: vec![0.3], width: 0.2, weight: 0.6, profile: Profile::Exponential },
                Bump { center: vec![0.7], width: 0.25, weight: 0.4, profile: Profile::Polynomial(1) },
            ],
        )
        .unwrap(),
    ];
    for m in models {
        let t = exact_coeffs(&m, &WaveletFamily::haar(), 5).unwrap();
        for idx in all_indices_1d(5) {
            let o = haar_oracle_1d(&m, &idx);
            assert!((t.get(&idx) - o).abs() < 1e-10, "{idx:?}: {} vs {o}", t.get(&idx));
        }
    }
}

#[test]
fn daubechies_exact_matches_brute_force() {
    let m = DensityModel::smooth_bumps(
        1,
        vec![Bump { center: vec![0.4], width: 0.3, weight: 1.0, profile: Profile::Exponential }],
    )
    .unwrap();
    for name in ["db2", "db4"] {
        let f = WaveletFamily::from_name(name).unwrap();
        let fine = WaveletFamily::from_name_with_depth(name, 16).unwrap();
        let t = exact_coeffs(&m, &f, 4).unwrap();
        assert!((t.alpha() - 1.0).abs() < 1e-12);
        let n = 1usize << 19;
        let px: Vec<f64> = (0..n).map(|i| m.eval(&[(i as f64 + 0.5) / n as f64])).collect();
        for idx in all_indices_1d(4) {
            let s: f64 = px
                .iter()
                .enumerate()
                .map(|(i, p)| p * eval_wavelet(&fine, &idx, &[(i as f64 + 0.5) / n as f64]))
                .sum::<f64>()
                / n as f64;
            assert!((t.get(&idx) - s).abs() < 1e-6, "{name} {idx:?}");
        }
    }
}

#[test]
fn mixture_linearity_against_merged_histogram() {
    let h = WaveletFamily::haar();
    let p = DensityModel::dyadic_histogram(3, &[0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1]).unwrap();
    let g = DensityModel::uniform_on(Cell::new(vec![0.5], vec![0.75])).unwrap();
    let eps = 0.3;
    let lin = tree_axpy(1.0 - eps, &exact_coeffs(&p, &h, 5).unwrap(), &exact_coeffs(&g, &h, 5).unwrap().scale(eps)).unwrap();
    let masses: Vec<f64> = (0..8)
        .map(|i| {
            let pm = [0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1][i];
            (1.0 - eps) * pm + if i == 4 || i == 5 { eps / 2.0 } else { 0.0 }
        })
        .collect();
    let merged = exact_coeffs(&DensityModel::dyadic_histogram(3, &masses).unwrap(), &h, 5).unwrap();
    assert!(lin.max_abs_diff(&merged).unwrap() < 1e-12);
    assert_eq!(lin.provenance(), Provenance::Difference);
}

#[test]
fn tree_axpy_examples() {
    let h = WaveletFamily::haar();
    let t1 = exact_coeffs(&histogram_2x(4), &h, 4).unwrap();
    let neg = t1.scale(-1.0);
    assert!(tree_axpy(1.0, &t1, &neg).unwrap().is_zero());
    let t2 = exact_coeffs(&DensityModel::uniform(1), &h, 4).unwrap();
    assert_eq!(tree_axpy(0.0, &t1, &t2).unwrap().max_abs_diff(&t2).unwrap(), 0.0);
    let other = exact_coeffs(&DensityModel::uniform(2), &h, 2).unwrap();
    assert!(matches!(tree_axpy(1.0, &t1, &other), Err(Error::IncompatibleTrees(_))));
    let db = exact_coeffs(&DensityModel::uniform(1), &WaveletFamily::daubechies(2).unwrap(), 2).unwrap();
    assert!(matches!(tree_axpy(1.0, &t1, &db), Err(Error::IncompatibleTrees(_))));
}

#[test]
fn unbiasedness_over_replications() {
    let h = WaveletFamily::haar();
    let p = DensityModel::dyadic_histogram(2, &[0.4, 0.1, 0.3, 0.2]).unwrap();
    let exact = exact_coeffs(&p, &h, 3).unwrap();
    let reps = 200;
    let trees: Vec<CoefficientTree> = (0..reps)
        .map(|r| empirical_coeffs(&sample(&p, 400, derive_seed(5, r, 0)).unwrap(), &h, 3, 3).unwrap())
        .collect();
    for idx in all_indices_1d(3) {
        let v: Vec<f64> = trees.iter().map(|t| t.get(&idx)).collect();
        let mean = v.iter().sum::<f64>() / reps as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
        let se = sd / (reps as f64).sqrt();
        assert!((mean - exact.get(&idx)).abs() <= 4.0 * se.max(1e-15), "{idx:?}");
    }
}

#[test]
fn parseval_haar() {
    let h = WaveletFamily::haar();
    let level = 4u32;
    let raw: Vec<f64> = (0..16).map(|i| 1.0 + (i * 7 % 5) as f64).collect();
    let total: f64 = raw.iter().sum();
    let masses: Vec<f64> = raw.iter().map(|m| m / total).collect();
    let p = DensityModel::dyadic_histogram(level, &masses).unwrap();
    let l2: f64 = masses.iter().map(|m| m * m * 16.0).sum();
    let t = exact_coeffs(&p, &h, level - 1).unwrap();
    let s = t.alpha().powi(2) + t.levels().iter().flat_map(|l| l.values()).map(|v| v * v).sum::<f64>();
    assert!((s - l2).abs() < 1e-12, "{s} vs {l2}");
}

#[test]
fn haar_reconstruction_is_pointwise_exact() {
    let h = WaveletFamily::haar();
    let p = DensityModel::dyadic_histogram(3, &[0.05, 0.2, 0.1, 0.15, 0.05, 0.25, 0.1, 0.1]).unwrap();
    for j in [2u32, 3, 5] {
        let t = exact_coeffs(&p, &h, j).unwrap();
        for i in 0..256 {
            let x = (i as f64 + 0.5) / 256.0;
            assert!((eval_density(&t, &h, &[x]) - p.eval(&[x])).abs() < 1e-12);
        }
    }
}

#[test]
fn two_dimensional_haar_against_oracle() {
    let h = WaveletFamily::haar();
    let p = DensityModel::piecewise_constant(
        2,
        vec![Cell::new(vec![0.0, 0.0], vec![0.5, 0.75]), Cell::new(vec![0.25, 0.5], vec![1.0, 1.0])],
        vec![0.6, 0.4],
    )
    .unwrap();
    let t = exact_coeffs(&p, &h, 2).unwrap();
    assert!((t.alpha() - 1.0).abs() < 1e-14);
    for j in 0..=2u32 {
        let n = 1u64 << j;
        for e in 1..4u32 {
            for k0 in 0..n {
                for k1 in 0..n {
                    let idx = WaveletIndex::new(j, vec![k0, k1], e).unwrap();
                    let step = 1.0 / (4 * n) as f64;
                    let lo = [k0 as f64 / n as f64, k1 as f64 / n as f64];
                    let mut o = 0.0;
                    for a in 0..4 {
                        for b in 0..4 {
                            let clo = [lo[0] + a as f64 * step, lo[1] + b as f64 * step];
                            let chi = [clo[0] + step, clo[1] + step];
                            o += integrate_box(|x| p.eval(x) * eval_wavelet(&h, &idx, x), &clo, &chi, 1e-15, 1 << 12)
                                .unwrap();
                        }
                    }
                    assert!((t.get(&idx) - o).abs() < 1e-10, "{idx:?}");
                }
            }
        }
    }
}

#[test]
fn sampling_examples() {
    let x = sample(&DensityModel::uniform(2), 100_000, 3).unwrap();
    for i in 0..2 {
        let c = x.coordinate(i);
        assert!((c.iter().sum::<f64>() / c.len() as f64 - 0.5).abs() < 0.01);
    }
    let h = WaveletFamily::haar();
    let s = DensityModel::spike(DensityModel::uniform(1), &h, mother(2, 1), 0.4).unwrap();
    let n = 20_000;
    let x = sample(&s, n, 8).unwrap();
    let ks = ks_one_sample(&x.coordinate(0), |t| s.cdf_1d(t).unwrap());
    assert!(ks < 1.63 / (n as f64).sqrt(), "{ks}");
    let mut big = sample(&DensityModel::uniform(1), 1_000_000, 4).unwrap().coordinate(0);
    big.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(big.windows(2).all(|w| w[0] != w[1]));
    assert_eq!(sample(&s, 50, 1).unwrap(), sample(&s, 50, 1).unwrap());
    assert_ne!(sample(&s, 50, 1).unwrap(), sample(&s, 50, 2).unwrap());
}

#[test]
fn smooth_sampler_matches_quadrature_cdf() {
    let m = DensityModel::smooth_bumps(
        1,
        vec![Bump { center: vec![0.45], width: 0.3, weight: 1.0, profile: Profile::Polynomial(2) }],
    )
    .unwrap();
    let n = 20_000;
    let x = sample(&m, n, 21).unwrap();
    let cdf = |t: f64| if t <= 0.0 { 0.0 } else { integrate_box(|y| m.eval(y), &[0.0], &[t], 1e-12, 1 << 14).unwrap() };
    assert!(ks_one_sample(&x.coordinate(0), cdf) < 1.63 / (n as f64).sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn empirical_matches_direct_definition(
        xs in prop::collection::vec(0.0f64..=1.0, 1..40),
        which in 0usize..3,
    ) {
        let f = [WaveletFamily::haar(), WaveletFamily::daubechies(2).unwrap(), WaveletFamily::daubechies(3).unwrap()][which].clone();
        let t = empirical_coeffs(&PointSet::from_1d(&xs), &f, 0, 3).unwrap();
        for idx in all_indices_1d(3) {
            let direct = xs.iter().map(|&x| eval_wavelet(&f, &idx, &[x])).sum::<f64>() / xs.len() as f64;
            prop_assert!((t.get(&idx) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_is_permutation_invariant(seed in any::<u64>(), n in 2usize..200) {
        let x = sample(&DensityModel::uniform(2), n, seed).unwrap();
        let mut rows: Vec<Vec<f64>> = x.iter().map(|p| p.to_vec()).collect();
        rows.shuffle(&mut stream(seed ^ 1));
        let y = PointSet::from_rows(2, &rows).unwrap();
        let f = WaveletFamily::daubechies(2).unwrap();
        let a = empirical_coeffs(&x, &f, 0, 3).unwrap();
        let b = empirical_coeffs(&y, &f, 0, 3).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-13);
    }
}
