use ggm_core::classifier::{chip_activation, softmax, tanh_activation};
use ggm_core::graph::{build_graph, build_graph_with_witness, recompute_after_removal};
use ggm_core::harness::stratified_kfold;
use ggm_core::numeric::{auc_binary, roc_auc_ovo};
use ggm_core::regularization::{filter_samples, memberships};
use ggm_core::{Dataset, FilterModel, FilterPolicy, MembershipKind, Standardizer};
use ndarray::Array2;
use proptest::prelude::*;

/// Points on a coarse integer lattice, deduplicated, so ties and
/// boundary cases (points exactly on a sphere) come up often.
fn lattice_dataset(max_m: usize) -> impl Strategy<Value = Dataset> {
    (
        2usize..=3,
        prop::collection::vec((0i32..6, 0i32..6, 0i32..6, 0usize..3), 3..max_m),
    )
        .prop_filter_map(
            "need distinct points and at least two classes",
            |(n, raw)| {
                let mut seen = std::collections::HashSet::new();
                let mut rows = Vec::new();
                let mut labels = Vec::new();
                for (a, b, c, l) in raw {
                    let p = [a, b, c];
                    if seen.insert(p[..n].to_vec()) {
                        rows.extend(p[..n].iter().map(|&v| v as f64));
                        labels.push(l % 2);
                    }
                }
                let m = labels.len();
                if m < 3 || !labels.contains(&0) || !labels.contains(&1) {
                    return None;
                }
                Dataset::new(Array2::from_shape_vec((m, n), rows).ok()?, labels).ok()
            },
        )
}

fn removal(m: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(0..m, 0..=m.saturating_sub(2)).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn graph_is_symmetric_connected_and_matches_witness_counts(d in lattice_dataset(40)) {
        let g = build_graph(&d).unwrap();
        let w = build_graph_with_witness(&d).unwrap();
        prop_assert!(g.same_adjacency(&w));
        prop_assert!(g.is_connected());
        let dense = g.to_dense();
        for j in 0..d.len() {
            prop_assert!(!dense[j][j]);
            for k in 0..d.len() {
                prop_assert_eq!(dense[j][k], dense[k][j]);
                if j < k {
                    prop_assert_eq!(dense[j][k], w.witness_count(j, k) == Some(0));
                }
            }
        }
    }

    #[test]
    fn recompute_matches_fresh_build((d, removed) in lattice_dataset(40).prop_flat_map(|d| {
        let m = d.len();
        (Just(d), removal(m))
    })) {
        let full = build_graph_with_witness(&d).unwrap();
        let survivors: Vec<usize> = (0..d.len()).filter(|i| !removed.contains(i)).collect();
        let fresh = build_graph(&d.subset(&survivors)).unwrap();
        let incremental = recompute_after_removal(&full, &d, &removed).unwrap();
        prop_assert!(incremental.same_adjacency(&fresh));
        prop_assert_eq!(incremental.sample_ids(), &survivors[..]);
    }

    #[test]
    fn memberships_lie_in_unit_interval(d in lattice_dataset(30), sigma in 1e-3f64..1e3) {
        let g = build_graph(&d).unwrap();
        for kind in [MembershipKind::Cardinality, MembershipKind::Distance] {
            let q = memberships(&g, &d, kind, sigma).unwrap();
            prop_assert!(q.iter().all(|v| (0.0..=1.0).contains(v)), "{:?}", q);
        }
    }

    #[test]
    fn filter_partitions_and_keeps_every_class(d in lattice_dataset(30), sigma in 0.1f64..10.0, r in 0usize..4) {
        let g = build_graph(&d).unwrap();
        let sizes = d.class_sizes();
        let counts: Vec<usize> = sizes.iter().map(|&s| r.min(s - 1)).collect();
        for policy in [FilterPolicy::None, FilterPolicy::Threshold, FilterPolicy::PerClassCount { counts: counts.clone() }] {
            let model = FilterModel::fit(&g, &d, MembershipKind::Distance, sigma, policy.clone()).unwrap();
            let out = filter_samples(&d, &model).unwrap();
            let mut all: Vec<usize> = out.kept.iter().chain(&out.removed).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..d.len()).collect::<Vec<_>>());
            for c in 0..d.class_count() {
                prop_assert!(out.kept.iter().any(|&i| d.label(i) == c));
            }
            match policy {
                FilterPolicy::None => prop_assert!(out.removed.is_empty()),
                FilterPolicy::PerClassCount { .. } => {
                    prop_assert_eq!(out.removed.len(), counts.iter().sum::<usize>());
                }
                FilterPolicy::Threshold => {
                    for &i in &out.removed {
                        prop_assert!(model.memberships[i] < model.thresholds[d.label(i)]);
                    }
                }
            }
        }
    }

    #[test]
    fn activations_are_distributions(
        x in prop::collection::vec(-50.0f64..50.0, 3),
        centers in prop::collection::vec(-50.0f64..50.0, 3..30),
    ) {
        let h = centers.len() / 3;
        let c = Array2::from_shape_vec((h, 3), centers[..h * 3].to_vec()).unwrap();
        for values in [chip_activation(&x, c.view()).unwrap().values, tanh_activation(&x, c.view()).unwrap().values] {
            prop_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!((values.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn softmax_sums_to_one(z in prop::collection::vec(-1e3f64..1e3, 1..10)) {
        let p = softmax(&z);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn auc_reverses_and_ignores_monotone_maps(
        rows in prop::collection::vec((-10i32..10, any::<bool>()), 2..60),
    ) {
        prop_assume!(rows.iter().any(|r| r.1) && rows.iter().any(|r| !r.1));
        let scores: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
        let positive: Vec<bool> = rows.iter().map(|r| r.1).collect();
        let auc = auc_binary(&scores, &positive).unwrap();
        prop_assert!((0.0..=1.0).contains(&auc));
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((auc + auc_binary(&negated, &positive).unwrap() - 1.0).abs() < 1e-12);
        let squashed: Vec<f64> = scores.iter().map(|s| s.exp() / (1.0 + s.exp())).collect();
        prop_assert!((auc - auc_binary(&squashed, &positive).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ovo_auc_of_perfect_probabilities_is_one(labels in prop::collection::vec(0usize..3, 6..40)) {
        prop_assume!((0..3).all(|c| labels.contains(&c)));
        let p = Array2::from_shape_fn((labels.len(), 3), |(i, k)| if labels[i] == k { 0.8 } else { 0.1 });
        prop_assert_eq!(roc_auc_ovo(p.view(), &labels).unwrap(), 1.0);
    }

    #[test]
    fn stratified_folds_partition_and_balance(
        labels in prop::collection::vec(0usize..3, 15..80),
        k in 2usize..5,
        seed in any::<u64>(),
    ) {
        let sizes: Vec<usize> = (0..3).map(|c| labels.iter().filter(|&&l| l == c).count()).collect();
        prop_assume!(sizes.iter().all(|&s| s >= k));
        let folds = stratified_kfold(&labels, 3, k, seed).unwrap();
        prop_assert_eq!(&folds, &stratified_kfold(&labels, 3, k, seed).unwrap());
        let mut seen: Vec<usize> = folds.iter().flat_map(|f| f.test.iter().copied()).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..labels.len()).collect::<Vec<_>>());
        for c in 0..3 {
            let per: Vec<usize> = folds.iter().map(|f| f.test.iter().filter(|&&i| labels[i] == c).count()).collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        for f in &folds {
            prop_assert!(f.train.iter().all(|i| !f.test.contains(i)));
            prop_assert_eq!(f.train.len() + f.test.len(), labels.len());
        }
    }

    #[test]
    fn standardized_training_columns_have_zero_mean_unit_std(d in lattice_dataset(30)) {
        let s = match Standardizer::fit(&d) {
            Ok(s) => s,
            Err(_) => return Ok(()),
        };
        let z = s.transform(&d).unwrap();
        let m = z.len() as f64;
        for col in z.features().columns() {
            let mean = col.sum() / m;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
            prop_assert!(mean.abs() < 1e-10);
            prop_assert!((var.sqrt() - 1.0).abs() < 1e-10);
        }
    }
}
