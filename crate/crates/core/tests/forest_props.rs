use ndarray::Array2;
use pawforest::cart::TreeModel;
use pawforest::data::Dataset;
use pawforest::forest::{sqrt_features, uniform_proba, ForestConfig, ForestModel};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset> {
    (6usize..50, 1usize..5).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(prop::sample::select(vec![-1.0, 0.0, 0.5, 1.0, 2.0, 3.5]), n * p),
            prop::collection::vec(0u8..2, n),
        )
            .prop_filter_map("both classes", move |(x, mut y)| {
                y[0] = 0;
                y[1] = 1;
                Dataset::new("prop", Array2::from_shape_vec((n, p), x).ok()?, y).ok()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_counts_are_conserved(ds in dataset(), seed in 0u64..1000) {
        let tree = TreeModel::fit(ds.features(), ds.labels(), ds.n_features(), seed).unwrap();
        let root = tree.node(0).counts;
        prop_assert_eq!(root, [ds.class_counts()[0] as u32, ds.class_counts()[1] as u32]);
        for node in tree.nodes() {
            if let Some(s) = &node.split {
                let (l, r) = (tree.node(s.left).counts, tree.node(s.right).counts);
                prop_assert_eq!([l[0] + r[0], l[1] + r[1]], node.counts);
                prop_assert!(l[0] + l[1] > 0 && r[0] + r[1] > 0);
            }
            let p = node.probability();
            prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
        }
        // Every training row lands in a leaf whose path labels end in the leaf majority.
        for i in 0..ds.n_samples() {
            let leaf = tree.apply(ds.row(i)).unwrap();
            prop_assert!(tree.node(leaf).is_leaf());
            let seq = tree.path_label_sequence(leaf).unwrap();
            prop_assert_eq!(seq.len(), tree.node(leaf).depth as usize + 1);
            prop_assert_eq!(*seq.last().unwrap(), tree.node(leaf).majority());
        }
    }

    #[test]
    fn forest_invariants(ds in dataset(), seed in 0u64..1000, t in 1usize..12) {
        let f = ForestModel::fit(&ds, &ForestConfig::new(t, seed)).unwrap();
        prop_assert_eq!(f.max_features(), sqrt_features(ds.n_features()));
        for k in 0..t {
            let bag = f.in_bag_counts(k);
            prop_assert_eq!(bag.iter().map(|&c| c as usize).sum::<usize>(), ds.n_samples());
            let mut root = [0u32; 2];
            for (i, &c) in bag.iter().enumerate() {
                root[ds.label(i) as usize] += c;
            }
            prop_assert_eq!(f.trees()[k].node(0).counts, root);
        }
        let oob = f.oob_votes(&ds).unwrap();
        let dec = f.oob_decision_function(&ds).unwrap();
        for i in 0..ds.n_samples() {
            let expect: Vec<usize> = (0..t).filter(|&k| !f.is_in_bag(k, i)).collect();
            let got: Vec<usize> = oob[i].iter().map(|v| v.tree).collect();
            prop_assert_eq!(&expect, &got);
            prop_assert_eq!(dec[i].is_some(), !expect.is_empty());
            if let Some(p) = dec[i] {
                prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
            }
            let votes = f.per_tree_votes(ds.row(i)).unwrap();
            let p = f.predict_proba(ds.row(i)).unwrap();
            prop_assert_eq!(p, uniform_proba(&votes));
            prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
        }
        prop_assert_eq!(&ForestModel::fit(&ds, &ForestConfig::new(t, seed)).unwrap(), &f);
        prop_assert_eq!(&ForestModel::from_json(&f.to_json().unwrap()).unwrap(), &f);
    }
}

#[test]
fn fixed_seed_forest_is_reproducible() {
    let ds = pawforest::data::gen_synthetic(pawforest::SyntheticKind::Moons, 200, 0.25, 7).unwrap();
    let a = ForestModel::fit(&ds, &ForestConfig::new(30, 11)).unwrap();
    let b = ForestModel::fit(&ds, &ForestConfig::new(30, 11)).unwrap();
    let c = ForestModel::fit(&ds, &ForestConfig::new(30, 12)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let ds = pawforest::data::gen_synthetic(pawforest::SyntheticKind::Circles, 40, 0.1, 1).unwrap();
    let f = ForestModel::fit(&ds, &ForestConfig::new(3, 1)).unwrap();
    assert!(f.predict_proba(&[0.0]).is_err());
    assert!(f.predict_proba(&[f64::NAN, 0.0]).is_err());
    assert!(f.oob_votes(&ds.subset(&[0, 1, 2]).unwrap()).is_err());
}
