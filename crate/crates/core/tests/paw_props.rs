use pawforest::data::gen_synthetic;
use pawforest::forest::{argmax, uniform_proba, ForestConfig, ForestModel, VoteRecord};
use pawforest::paw::{
    alpha_for, bucket, estimate_weight_table_cv, estimate_weight_table_oob, predict_weighted_votes, Cell, CellCounts,
    Indicators, OobView, PawConfig, WeightTable, MIN_N, N_BUCKETS, N_CELLS, N_PATTERNS, WEIGHT_FLOOR,
};
use pawforest::pattern::FlipPattern;
use pawforest::SyntheticKind;
use proptest::prelude::*;

fn counts() -> impl Strategy<Value = CellCounts> {
    prop::collection::vec((0u64..200, 0.0f64..=1.0), N_CELLS).prop_map(|cells| {
        let mut c = CellCounts::default();
        for (i, (n, acc)) in cells.into_iter().enumerate() {
            let correct = (n as f64 * acc).floor() as u64;
            c.add_many(Cell::from_flat(i), n, correct);
        }
        c
    })
}

fn votes() -> impl Strategy<Value = Vec<VoteRecord>> {
    prop::collection::vec((0.0f64..=1.0, 0usize..6, 0.0f64..=1.0), 1..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(tree, (p0, pat, rate))| VoteRecord {
                tree,
                leaf: 0,
                class: u8::from(p0 < 0.5),
                pattern: FlipPattern::from_index(pat).unwrap(),
                flip_rate: rate,
                leaf_prob: [p0, 1.0 - p0],
            })
            .collect()
    })
}

fn weights() -> impl Strategy<Value = [[[f64; 2]; 6]; 10]> {
    prop::collection::vec(0.01f64..5.0, N_CELLS).prop_map(|v| {
        let mut w = [[[0.0; 2]; 6]; 10];
        for (i, x) in v.into_iter().enumerate() {
            let c = Cell::from_flat(i);
            w[c.bucket][c.pattern.index()][c.class as usize] = x;
        }
        w
    })
}

proptest! {
    #[test]
    fn slice_normalisation(c in counts()) {
        let t = WeightTable::from_counts(c.clone(), MIN_N);
        let raw = t.raw_weights();
        for b in 0..N_BUCKETS {
            for k in 0..2 {
                let (mut num, mut den, mut correct) = (0.0, 0.0, 0);
                for p in 0..N_PATTERNS {
                    correct += c.correct[b][p][k];
                    if let Some(w) = raw[b][p][k] {
                        num += w * c.count[b][p][k] as f64;
                        den += c.count[b][p][k] as f64;
                    }
                }
                if den > 0.0 && correct > 0 {
                    prop_assert!((num / den - 1.0).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn sparse_cells_fall_back(c in counts()) {
        let t = WeightTable::from_counts(c.clone(), MIN_N);
        for i in 0..N_CELLS {
            let cell = Cell::from_flat(i);
            let n = c.count[cell.bucket][cell.pattern.index()][cell.class as usize];
            let w = t.weight(cell);
            prop_assert!(w.is_finite() && w >= 0.0);
            if n < MIN_N {
                prop_assert_eq!(w, 1.0);
            }
        }
    }

    #[test]
    fn amplification_shape(w in weights(), a in 1.0f64..50.0, b in 1.0f64..50.0) {
        let t = WeightTable::from_weights(w).unwrap();
        prop_assert_eq!(&t.amplify(1.0), &t);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (tl, th) = (t.amplify(lo), t.amplify(hi));
        for i in 0..N_CELLS {
            let c = Cell::from_flat(i);
            let (wl, wh, w0) = (tl.weight(c), th.weight(c), t.weight(c));
            prop_assert!(wl >= WEIGHT_FLOOR && wh >= WEIGHT_FLOOR);
            // Same side of one, deviation grows until the floor binds.
            if w0 >= 1.0 {
                prop_assert!(wh >= wl - 1e-12);
            } else {
                prop_assert!(wh <= wl + 1e-12);
                prop_assert!((wh - 1.0).abs() >= (wl - 1.0).abs() - 1e-12 || wh == WEIGHT_FLOOR);
            }
        }
    }

    #[test]
    fn uniform_table_is_rf(v in votes()) {
        let rf = uniform_proba(&v);
        prop_assert_eq!(predict_weighted_votes(&v, &rf, &WeightTable::uniform()).unwrap(), rf);
    }

    #[test]
    fn argmax_scale_invariant(v in votes(), w in weights(), scale in 0.001f64..1000.0) {
        let rf = uniform_proba(&v);
        let mut s = w;
        for x in s.iter_mut().flatten().flatten() {
            *x *= scale;
        }
        let a = predict_weighted_votes(&v, &rf, &WeightTable::from_weights(w).unwrap()).unwrap();
        let b = predict_weighted_votes(&v, &rf, &WeightTable::from_weights(s).unwrap()).unwrap();
        prop_assert!((a[0] - b[0]).abs() <= 1e-9);
        if (a[0] - a[1]).abs() > 1e-9 {
            prop_assert_eq!(argmax(&a), argmax(&b));
        }
        prop_assert!((a[0] + a[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bucket_matches_floor(fp in 0.0f64..=1.0) {
        let b = bucket(fp).unwrap();
        prop_assert!(b < N_BUCKETS);
        if fp < 1.0 {
            prop_assert_eq!(b, (fp * 10.0).floor() as usize);
        }
    }
}

#[test]
fn cv_estimation_end_to_end() {
    let ds = gen_synthetic(SyntheticKind::Overlap, 300, 1.0, 3).unwrap();
    let cfg = PawConfig { n_trees: 40, ..PawConfig::default() };
    let (table, records) = estimate_weight_table_cv(&ds, &cfg, 9).unwrap();
    // Every training row is validated once, by every inner tree.
    assert_eq!(records.len(), ds.n_samples());
    assert_eq!(records.n_votes(), (ds.n_samples() * 40) as u64);
    assert_eq!(table.counts(), records.cell_counts());
    assert_eq!(table.counts().total(), records.n_votes());
    let again = estimate_weight_table_cv(&ds, &cfg, 9).unwrap();
    assert_eq!(again.0, table);
    assert!(table.weights.iter().flatten().flatten().any(|w| *w != 1.0));
    let json = table.to_json().unwrap();
    assert_eq!(WeightTable::from_json(&json).unwrap(), table);
}

#[test]
fn oob_estimation_and_indicators() {
    let ds = gen_synthetic(SyntheticKind::Moons, 300, 0.3, 5).unwrap();
    let forest = ForestModel::fit(&ds, &ForestConfig::new(60, 2)).unwrap();
    let (table, records) = estimate_weight_table_oob(&forest, &ds).unwrap();
    let view = OobView::new(&forest, &ds).unwrap();
    assert_eq!(records.len(), view.n_defined());
    let oob_pairs: u64 = view.votes.iter().map(|v| v.len() as u64).sum();
    assert_eq!(table.counts().total(), oob_pairs);
    let ind = Indicators::from_view(&view, ds.labels()).unwrap();
    assert!((0.0..=1.0).contains(&ind.mass));
    assert!((0.0..=1.0).contains(&ind.spread));
    assert_eq!(ind.product, ind.mass * ind.spread);
    assert_eq!(alpha_for(0, &ind), 1.0);
    assert_eq!(alpha_for(10, &ind), 1.0 + 10.0 * ind.product);
}

#[test]
fn separable_data_has_no_boundary() {
    let ds = gen_synthetic(SyntheticKind::Diagonal, 200, 0.0, 1).unwrap();
    let shifted = {
        let mut x = ds.features().clone();
        for (i, mut row) in x.rows_mut().into_iter().enumerate() {
            if ds.label(i) == 1 {
                row += 5.0;
            }
        }
        pawforest::Dataset::new("far", x, ds.labels().to_vec()).unwrap()
    };
    let forest = ForestModel::fit(&shifted, &ForestConfig::new(50, 1)).unwrap();
    let ind = pawforest::paw::indicators(&forest, &shifted).unwrap();
    assert_eq!(ind.mass, 0.0);
    assert_eq!(ind.spread, 0.0);
}
