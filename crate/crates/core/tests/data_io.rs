use ndarray::Array2;
use pawforest::data::{read_csv, stratified_kfold, stratified_split, write_csv, CsvOptions, LabelColumn};
use pawforest::Dataset;
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset> {
    (4usize..80, 1usize..6).prop_flat_map(|(n, p)| {
        (prop::collection::vec(-1e6f64..1e6, n * p), prop::collection::vec(0u8..2, n)).prop_map(move |(x, mut y)| {
            y[0] = 0;
            y[1] = 1;
            Dataset::new("d", Array2::from_shape_vec((n, p), x).unwrap(), y).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn csv_round_trip(ds in dataset()) {
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), "d", &CsvOptions::default()).unwrap();
        prop_assert_eq!(back.features(), ds.features());
        prop_assert_eq!(back.labels(), ds.labels());
    }

    #[test]
    fn split_is_a_stratified_partition(ds in dataset(), seed in 0u64..100) {
        prop_assume!(ds.class_counts().iter().all(|&c| c >= 2));
        let plan = stratified_split(&ds, 0.3, seed).unwrap();
        let mut all: Vec<usize> = plan.train_indices.iter().chain(&plan.test_indices).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..ds.n_samples()).collect::<Vec<_>>());
        for c in 0..2u8 {
            prop_assert!(plan.test_indices.iter().any(|&i| ds.label(i) == c));
            prop_assert!(plan.train_indices.iter().any(|&i| ds.label(i) == c));
        }
        prop_assert_eq!(&stratified_split(&ds, 0.3, seed).unwrap(), &plan);
    }

    #[test]
    fn kfold_covers_every_row_once(ds in dataset(), k in 2usize..5, seed in 0u64..100) {
        prop_assume!(ds.class_counts().iter().all(|&c| c >= k));
        let folds = stratified_kfold(&ds, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0; ds.n_samples()];
        for f in &folds {
            for &i in &f.val_indices {
                seen[i] += 1;
            }
            prop_assert_eq!(f.val_indices.len() + f.train_indices.len(), ds.n_samples());
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
    }
}

#[test]
fn named_label_column_and_positive_label() {
    let text = "a,cls,b\n1,yes,2\n3,no,4\n5,yes,6\n";
    let opts = CsvOptions {
        label_column: LabelColumn::Name("cls".into()),
        positive_label: Some("no".into()),
    };
    let ds = read_csv(text.as_bytes(), "t", &opts).unwrap();
    assert_eq!(ds.labels(), &[0, 1, 0]);
    assert_eq!(ds.row(1), &[3.0, 4.0]);
    assert_eq!(ds.feature_names().unwrap(), &["a".to_string(), "b".to_string()]);
}

#[test]
fn malformed_input_is_rejected() {
    let opts = CsvOptions::default();
    assert!(read_csv("a,y\n1,x\n2,y\n3,z\n".as_bytes(), "t", &opts).is_err());
    assert!(read_csv("a,y\n1,x\n2,x\n".as_bytes(), "t", &opts).is_err());
    assert!(read_csv("a,y\nfoo,x\n2,z\n".as_bytes(), "t", &opts).is_err());
    assert!(read_csv("a,y\n".as_bytes(), "t", &opts).is_err());
}
