use besov_robust::besov::*;
use besov_robust::estimators::eval_density;
use besov_robust::rng::{stream, StreamRng};
use besov_robust::tree::{CoefficientTree, Provenance};
use besov_robust::wavelet::{FamilyKind, WaveletFamily, WaveletIndex};
use besov_robust::Error;
use proptest::prelude::*;
use rand::Rng;

const INF: f64 = f64::INFINITY;

fn disc(s: f64, p: f64, q: f64) -> BesovParams {
    BesovParams::discriminator(s, p, q, 1.0).unwrap()
}

/// Random sparse tree on at most `levels` levels below `j_max` with at most `nnz` daughters.
fn random_tree(rng: &mut StreamRng, dim: usize, j_max: u32, levels: usize, nnz: usize, with_alpha: bool) -> CoefficientTree {
    let chosen: Vec<u32> = (0..levels).map(|_| rng.random_range(0..=j_max)).collect();
    let mut entries = Vec::new();
    if with_alpha && rng.random_bool(0.7) {
        entries.push((WaveletIndex::father(vec![0; dim]), rng.random_range(-1.0..1.0)));
    }
    for _ in 0..rng.random_range(1..=nnz) {
        let j = chosen[rng.random_range(0..chosen.len())];
        let k = (0..dim).map(|_| rng.random_range(0..(1u64 << j))).collect();
        let e = rng.random_range(1..(1u32 << dim));
        entries.push((WaveletIndex::new(j, k, e).unwrap(), rng.random_range(-1.0..1.0)));
    }
    CoefficientTree::from_entries(FamilyKind::Haar, dim, j_max, Provenance::Difference, entries).unwrap()
}

/// Random element on the boundary of the `disc` ball, supported on `support`'s keys.
fn random_ball_element(rng: &mut StreamRng, support: &CoefficientTree, disc: &BesovParams) -> CoefficientTree {
    let d = support.dim();
    let shape = || {
        support.entries().map(|(i, _)| (i, 0.0)).collect::<Vec<_>>()
    };
    let mut entries = shape();
    for e in entries.iter_mut() {
        let u: f64 = rng.random_range(-1.0..1.0);
        e.1 = u * u * u;
    }
    let t = CoefficientTree::from_entries(support.family(), d, support.j_max(), Provenance::Estimate, entries).unwrap();
    let n = besov_norm(&t, disc);
    if n == 0.0 {
        return t;
    }
    t.scale(disc.l / n)
}

fn params_suite() -> Vec<BesovParams> {
    vec![disc(1.0, 2.0, 2.0), disc(0.0, INF, INF), disc(0.5, 1.0, INF), disc(1.5, 3.0, 1.5), disc(1.0, 1.0, 1.0)]
}

#[test]
fn norm_examples() {
    let h = WaveletFamily::haar();
    let z = CoefficientTree::zero(&h, 1, 4, Provenance::Exact).unwrap();
    let one = CoefficientTree::from_entries(FamilyKind::Haar, 2, 3, Provenance::Exact, [(WaveletIndex::father(vec![0, 0]), 1.0)]).unwrap();
    for p in params_suite() {
        assert_eq!(besov_norm(&z, &p), 0.0);
        assert_eq!(besov_norm(&one, &p), 1.0);
    }
    let p = BesovParams::generator(0.7, 3.0, 2.0, 1.0).unwrap();
    for dim in [1usize, 2] {
        let idx = WaveletIndex::new(3, vec![1; dim], 1).unwrap();
        let t = CoefficientTree::from_entries(FamilyKind::Haar, dim, 3, Provenance::Exact, [(idx, 1.0)]).unwrap();
        let d = dim as f64;
        assert!((besov_norm(&t, &p) - 2f64.powf(3.0 * (0.7 + d / 2.0 - d / 3.0))).abs() < 1e-12);
    }
}

#[test]
fn ipm_examples() {
    let mut rng = stream(1);
    let t = random_tree(&mut rng, 1, 4, 3, 10, true);
    for p in params_suite() {
        assert_eq!(besov_ipm(&t, &t, &p).unwrap(), 0.0);
    }
    let h = WaveletFamily::haar();
    let z = CoefficientTree::zero(&h, 2, 4, Provenance::Exact).unwrap();
    for s in [0.0, 0.5, 2.0] {
        let idx = WaveletIndex::new(3, vec![2, 5], 3).unwrap();
        let t = CoefficientTree::from_entries(FamilyKind::Haar, 2, 4, Provenance::Exact, [(idx, -0.3)]).unwrap();
        let v = besov_ipm(&t, &z, &disc(s, INF, INF)).unwrap();
        assert!((v - 2f64.powf(-3.0 * (s + 1.0)) * 0.3).abs() < 1e-15);
    }
    let other = CoefficientTree::zero(&h, 1, 4, Provenance::Exact).unwrap();
    assert!(matches!(besov_ipm(&z, &other, &disc(0.0, 2.0, 2.0)), Err(Error::IncompatibleTrees(_))));
}

#[test]
fn witness_single_coefficient() {
    let p = disc(0.5, 3.0, 2.0);
    let delta = CoefficientTree::from_entries(
        FamilyKind::Haar,
        1,
        4,
        Provenance::Difference,
        [(WaveletIndex::new(2, vec![1], 1).unwrap(), -0.8)],
    )
    .unwrap();
    let w = ipm_witness(&delta, &p.with_radius(2.0)).unwrap();
    assert_eq!(w.nnz(), 1);
    let expect = -2.0 * 2f64.powf(-2.0 * (0.5 + 0.5 - 1.0 / 3.0));
    assert!((w.get(&WaveletIndex::new(2, vec![1], 1).unwrap()) - expect).abs() < 1e-14);
    let h = WaveletFamily::haar();
    assert!(matches!(ipm_witness(&CoefficientTree::zero(&h, 1, 2, Provenance::Exact).unwrap(), &p), Err(Error::ZeroDelta)));
}

#[test]
fn duality_against_random_ball_elements() {
    let mut rng = stream(2024);
    for p in params_suite() {
        for _ in 0..20 {
            let delta = random_tree(&mut rng, 1, 6, 3, 20, true);
            let ipm = dual_norm(&delta, &p);
            let w = ipm_witness(&delta, &p).unwrap();
            assert!((pairing(&w, &delta).unwrap() - ipm).abs() <= 1e-9 * ipm);
            for _ in 0..2000 {
                let f = random_ball_element(&mut rng, &delta, &p);
                assert!(pairing(&f, &delta).unwrap() <= ipm * (1.0 + 1e-9));
            }
        }
    }
}

#[test]
fn sum_bound_brackets_ipm() {
    let mut rng = stream(9);
    for p in params_suite() {
        for _ in 0..50 {
            let a = random_tree(&mut rng, 2, 3, 3, 15, true);
            let b = random_tree(&mut rng, 2, 3, 3, 15, true);
            let max = besov_ipm(&a, &b, &p).unwrap();
            let sum = ipm_sum_bound(&a, &b, &p).unwrap();
            assert!(sum >= max && max >= sum / 2.0 - 1e-15);
        }
    }
}

#[test]
fn sup_norm_bound_examples() {
    let h = WaveletFamily::haar();
    assert!(matches!(sup_norm_bound(&disc(1.0, 1.0, 2.0), &h, 1), Err(Error::NotSupBounded { .. })));
    assert!(matches!(sup_norm_bound(&disc(0.5, 2.0, 2.0), &h, 1), Err(Error::NotSupBounded { .. })));
    assert!(sup_norm_bound(&disc(1.0, 2.0, 2.0), &h, 2).is_err());
    let p = disc(1.0, INF, INF);
    let b1 = sup_norm_bound(&p, &h, 1).unwrap();
    let b2 = sup_norm_bound(&p.with_radius(2.0), &h, 1).unwrap();
    assert_eq!(b2, 2.0 * b1);
}

#[test]
fn sup_norm_bound_holds_on_random_trees() {
    let h = WaveletFamily::haar();
    let mut rng = stream(77);
    for p in [disc(1.0, INF, INF), disc(1.5, 2.0, 2.0), disc(2.0, 1.5, 1.0)] {
        let bound = sup_norm_bound(&p, &h, 1).unwrap();
        for _ in 0..100 {
            let t = random_tree(&mut rng, 1, 4, 5, 31, true);
            let t = t.scale(p.l / besov_norm(&t, &p));
            let sup = (0..256)
                .map(|i| eval_density(&t, &h, &[(i as f64 + 0.5) / 256.0]).abs())
                .fold(0.0, f64::max);
            assert!(sup <= bound, "{sup} > {bound}");
        }
    }
}

#[test]
fn nesting_check_examples() {
    let mut rng = stream(31);
    let t = random_tree(&mut rng, 1, 5, 3, 10, true);
    let p = disc(0.5, 4.0, 2.0);
    assert_eq!(ipm_nesting_check(&t, &t, &p, 2.0).unwrap(), (0.0, 0.0));
    let same = disc(0.5, 2.0, 2.0);
    let u = random_tree(&mut rng, 1, 5, 3, 10, true);
    let (a, b) = ipm_nesting_check(&t, &u, &same, 2.0).unwrap();
    assert_eq!(a, b);
    assert!(matches!(ipm_nesting_check(&t, &u, &disc(0.5, 1.5, 2.0), 2.0), Err(Error::RegimeMismatch(_))));
    let t2 = random_tree(&mut rng, 2, 3, 2, 5, true);
    assert!(ipm_nesting_check(&t2, &t2, &p, 2.0).is_err());
    for _ in 0..100 {
        let a = random_tree(&mut rng, 1, 6, 3, 20, true);
        let b = random_tree(&mut rng, 1, 6, 3, 20, true);
        let (x, y) = ipm_nesting_check(&a, &b, &p, 2.0).unwrap();
        assert!(x <= y * (1.0 + 1e-12));
    }
}

#[test]
fn presets() {
    let tv = BesovParams::loss_preset("tv").unwrap();
    assert_eq!((tv.sigma, tv.p, tv.q), (0.0, INF, INF));
    let w = BesovParams::loss_preset("wasserstein1").unwrap();
    assert_eq!((w.sigma, w.p, w.q), (1.0, INF, INF));
    let l2 = BesovParams::loss_preset("l2").unwrap();
    assert_eq!((l2.sigma, l2.p, l2.q), (0.0, 2.0, 2.0));
    let ks = BesovParams::loss_preset("ks").unwrap();
    assert_eq!((ks.sigma, ks.p, ks.q), (1.0, 1.0, INF));
    assert!(BesovParams::loss_preset("mmd").is_err());
    assert_eq!(tv.p_conj(), 1.0);
    assert_eq!(BesovParams::loss_preset("ks").unwrap().p_conj(), INF);
    assert!((disc(0.0, 3.0, 1.0).p_conj() - 1.5).abs() < 1e-15);
    assert!(BesovParams::generator(1.0, 0.5, 2.0, 1.0).is_err());
    assert!(BesovParams::generator(-1.0, 2.0, 2.0, 1.0).is_err());
    assert!(BesovParams::generator(1.0, 2.0, 2.0, 0.0).is_err());
    let db2 = WaveletFamily::daubechies(2).unwrap();
    assert!(disc(0.5, 2.0, 2.0).check_family(&db2).is_ok());
    assert!(disc(1.0, 2.0, 2.0).check_family(&db2).is_err());
}

fn arb_params() -> impl Strategy<Value = BesovParams> {
    let idx = prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), Just(INF)];
    (0.0f64..2.0, idx.clone(), idx).prop_map(|(s, p, q)| disc(s, p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn witness_attains_and_has_radius(seed in any::<u64>(), p in arb_params(), l in 0.1f64..5.0, dim in 1usize..3) {
        let mut rng = stream(seed);
        let delta = random_tree(&mut rng, dim, 4, 3, 20, true);
        let p = p.with_radius(l);
        let w = ipm_witness(&delta, &p).unwrap();
        let ipm = dual_norm(&delta, &p);
        prop_assert!((besov_norm(&w, &p) - l).abs() <= 1e-12 * l.max(1.0));
        prop_assert!((pairing(&w, &delta).unwrap() - ipm).abs() <= 1e-12 * ipm.max(1.0));
    }

    #[test]
    fn norm_axioms(seed in any::<u64>(), p in arb_params(), c in -3.0f64..3.0) {
        let mut rng = stream(seed);
        let a = random_tree(&mut rng, 1, 5, 3, 15, true);
        let b = random_tree(&mut rng, 1, 5, 3, 15, true);
        let na = besov_norm(&a, &p);
        prop_assert!((besov_norm(&a.scale(c), &p) - c.abs() * na).abs() <= 1e-12 * na.max(1.0));
        let s = a.axpy(1.0, &b).unwrap();
        prop_assert!(besov_norm(&s, &p) <= na + besov_norm(&b, &p) + 1e-12);
        prop_assert!(besov_norm(&a.truncate(2), &p) <= na + 1e-15);
    }

    #[test]
    fn ipm_metric_properties(seed in any::<u64>(), p in arb_params()) {
        let mut rng = stream(seed);
        let a = random_tree(&mut rng, 2, 3, 2, 12, true);
        let b = random_tree(&mut rng, 2, 3, 2, 12, true);
        let c = random_tree(&mut rng, 2, 3, 2, 12, true);
        let ab = besov_ipm(&a, &b, &p).unwrap();
        prop_assert_eq!(ab, besov_ipm(&b, &a, &p).unwrap());
        prop_assert!(ab <= besov_ipm(&a, &c, &p).unwrap() + besov_ipm(&c, &b, &p).unwrap() + 1e-12);
        let doubled = besov_ipm(&a, &b, &p.with_radius(2.0 * p.l)).unwrap();
        prop_assert_eq!(doubled, 2.0 * ab);
        let smoother = besov_ipm(&a, &b, &p.with_sigma(p.sigma + 0.5)).unwrap();
        prop_assert!(smoother <= ab + 1e-15);
    }
}
