//! Library results against the brute-force references in `common`.

mod common;

use caviarpd::cli::dataset::{ingest, IngestOptions};
use caviarpd::{
    average_silhouette, binder_between, Distribution, caviarpd_estimate, epa_log_pmf, estimate_at_mass, euclidean_distances,
    expected_loss, hierarchical, mass_for_cluster_count, minimize_expected_loss, pam, select_mass, standardize,
    vi_between, DistanceMatrix, EpaParams, Linkage, LossKind, MassSearchConfig, Partition, Permutation,
    SearchConfig, SimilarityMatrix,
};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn labels(max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    (2..=max_n).prop_flat_map(|n| prop::collection::vec(0..n, n))
}

fn canonical(raw: &[usize]) -> Partition {
    Partition::canonicalize(raw).unwrap()
}


type ExpectedLossOracle = fn(&[usize], &caviarpd::PairwiseSimilarityMatrix) -> f64;
proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn epa_pmf_matches_step_by_step_product(seed in any::<u64>(), n in 1usize..=6, mass in 0.05f64..20.0) {
        let mut rng = rng(seed);
        let sim_rows = random_symmetric(n, &mut rng, |r| r.random_range(0.01..3.0));
        let sim = SimilarityMatrix::from_rows(&sim_rows).unwrap();
        let perm = Permutation::random(n, &mut rng);
        let p = random_partition(n, n, &mut rng);
        let got = epa_log_pmf(&p, &EpaParams::new(mass), &sim, &perm).unwrap().exp();
        let want = epa_pmf_oracle(p.labels(), mass, &sim_rows, perm.order());
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-300).max(1.0), "{got} vs {want}");
    }

    #[test]
    fn between_losses_match_pair_counting_and_contingency(a in labels(9), seed in any::<u64>()) {
        let mut rng = rng(seed);
        let b = random_partition(a.len(), a.len(), &mut rng);
        let a = canonical(&a);
        let binder = binder_between(&a, &b).unwrap();
        let vi = vi_between(&a, &b).unwrap();
        prop_assert!((binder - binder_oracle(a.labels(), b.labels())).abs() < 1e-12);
        prop_assert!((vi - vi_oracle(a.labels(), b.labels())).abs() < 1e-12);
    }

    #[test]
    fn expected_losses_match_definitions(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = rng(seed);
        let psm = random_psm(n, 10, &mut rng);
        let p = random_partition(n, n, &mut rng);
        let binder = expected_loss(LossKind::Binder, &p, &psm).unwrap();
        let vi = expected_loss(LossKind::Vi, &p, &psm).unwrap();
        prop_assert!((binder - expected_binder_oracle(p.labels(), &psm)).abs() < 1e-10);
        prop_assert!((vi - expected_vi_lb_oracle(p.labels(), &psm)).abs() < 1e-10);
    }

    #[test]
    fn search_never_beats_enumeration(seed in any::<u64>(), n in 2usize..=6, vi in any::<bool>()) {
        let mut rng = rng(seed);
        let psm = random_psm(n, 12, &mut rng);
        let (kind, oracle): (LossKind, ExpectedLossOracle) = if vi {
            (LossKind::Vi, expected_vi_lb_oracle)
        } else {
            (LossKind::Binder, expected_binder_oracle)
        };
        let r = minimize_expected_loss(&psm, &SearchConfig { loss: kind, seed, ..Default::default() }).unwrap();
        let best = brute_force_min(n, |l| oracle(l, &psm));
        let recomputed = oracle(r.partition.labels(), &psm);
        prop_assert!((r.loss - recomputed).abs() < 1e-10);
        prop_assert!(recomputed >= best - 1e-10);
    }

    #[test]
    fn silhouette_matches_definition(seed in any::<u64>(), n in 3usize..=20) {
        let mut rng = rng(seed);
        let d = random_distances(n, &mut rng);
        let k = rng.random_range(2..n);
        let p = random_partition(n, k, &mut rng);
        prop_assume!((2..n).contains(&p.n_clusters()));
        let got = average_silhouette(&p, &d).unwrap();
        prop_assert!((got - silhouette_oracle(p.labels(), &d)).abs() < 1e-9);
    }

    #[test]
    fn pam_cost_is_attainable_and_never_below_exhaustive(seed in any::<u64>(), n in 2usize..=9, k in 1usize..=3) {
        prop_assume!(k <= n);
        let mut rng = rng(seed);
        let d = random_distances(n, &mut rng);
        let r = pam(&d, k, 100).unwrap();
        let recomputed: f64 = (0..n)
            .map(|i| r.medoids.iter().map(|&m| d.get(i, m)).fold(f64::INFINITY, f64::min))
            .sum();
        prop_assert!((r.cost - recomputed).abs() < 1e-9);
        prop_assert!(r.cost >= exhaustive_medoid_cost(&d, k) - 1e-9);
        prop_assert!(r.cost_trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn single_linkage_heights_are_mst_weights(seed in any::<u64>(), n in 2usize..=15) {
        let mut rng = rng(seed);
        let d = random_distances(n, &mut rng);
        let mut heights: Vec<f64> = hierarchical(&d, Linkage::Single).unwrap().merges().iter().map(|m| m.height).collect();
        heights.sort_by(f64::total_cmp);
        prop_assert_eq!(heights, mst_weights(&d));
    }
}

#[test]
fn enumeration_sizes() {
    let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
    for n in 1..=8 {
        assert_eq!(set_partitions(n).len(), bell[n]);
    }
    assert_eq!(permutations(5).len(), 120);
}

fn two_blobs() -> DistanceMatrix {
    DistanceMatrix::from_points_1d(&[0.0, 0.15, 0.3, 0.45, 0.6, 10.0, 10.15, 10.3, 10.45, 10.6])
}

#[test]
fn two_blobs_boundary_mass_gives_two_clusters() {
    let d = two_blobs();
    let params = EpaParams::new(1.0);
    let msc = MassSearchConfig {
        samples_per_eval: 200,
        ..Default::default()
    };
    let search = SearchConfig::default();
    let (b, flags) = mass_for_cluster_count(2, &d, &params, &search, &msc).unwrap();
    assert_eq!(b.k, 2);
    assert!(flags.is_empty(), "{flags:?}");
    let r = estimate_at_mass(&d, &params.with_mass(b.alpha), Distribution::Epa, msc.samples_per_eval, msc.seed, &search).unwrap();
    assert_eq!(r.estimate.n_clusters(), 2);
    assert_eq!(r.estimate.labels(), &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
}

#[test]
fn two_blobs_selection_picks_the_best_split() {
    let d = two_blobs();
    let msc = MassSearchConfig {
        k_min: 2,
        k_max: 4,
        samples_per_eval: 200,
        ..Default::default()
    };
    let r = select_mass(&d, &EpaParams::new(1.0), &msc, &SearchConfig::default()).unwrap();
    assert_eq!(r.estimate.n_clusters(), 2);
    assert!(r.silhouette > 0.8);
    // the points are sorted, so every 2-split worth considering is a cut
    let best_cut = (1..10)
        .map(|c| {
            let labels: Vec<usize> = (0..10).map(|i| usize::from(i >= c)).collect();
            silhouette_oracle(&labels, &d)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((r.silhouette - best_cut).abs() < 1e-12);
    assert!(r.diagnostics.windows(2).all(|w| w[0].alpha <= w[1].alpha));
    for g in &r.diagnostics {
        if let Some(s) = g.avg_silhouette {
            assert!((-1.0..=1.0).contains(&s));
        }
    }
}

#[test]
fn wine_mass_lands_near_point_nine() {
    let ds = ingest(
        &data_dir().join("wine.csv"),
        &IngestOptions {
            label_column: Some("cultivar".into()),
            ..Default::default()
        },
    )
    .unwrap();
    let d = euclidean_distances(&standardize(&ds.data).unwrap().data).unwrap();
    let truth = ds.truth.unwrap();
    for seed in [1, 2] {
        let msc = MassSearchConfig {
            seed,
            ..Default::default()
        };
        let r = caviarpd_estimate(&d, &EpaParams::new(1.0), &msc, &SearchConfig::default()).unwrap();
        assert!((r.mass - 0.9).abs() <= 0.3, "seed {seed}: mass {}", r.mass);
        assert_eq!(r.estimate.n_clusters(), 3);
        assert!(binder_between(&r.estimate, &truth).unwrap() < 0.12);
    }
}
