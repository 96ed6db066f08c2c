use pawforest::stats::{average_ranks, pearson, quintile_sizes, quintile_table, spearman, wilcoxon_exact, wilcoxon_normal, wilcoxon_signed_rank};
use proptest::prelude::*;

fn enumerated_p(deltas: &[f64]) -> f64 {
    let nz: Vec<f64> = deltas.iter().copied().filter(|d| *d != 0.0).collect();
    let ranks = average_ranks(&nz.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w: f64 = nz.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let n = nz.len();
    let (mut lo, mut hi) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        lo += u64::from(s <= w + 1e-9);
        hi += u64::from(s >= w - 1e-9);
    }
    (2.0 * lo.min(hi) as f64 / (1u64 << n) as f64).min(1.0)
}

fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

proptest! {
    #[test]
    fn exact_matches_enumeration(d in prop::collection::vec(-5i32..6, 1..=15)) {
        let d: Vec<f64> = d.into_iter().map(|v| v as f64 * 0.25).collect();
        prop_assume!(d.iter().any(|v| *v != 0.0));
        let r = wilcoxon_exact(&d).unwrap();
        prop_assert!((r.p_value - enumerated_p(&d)).abs() < 1e-12);
        prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    }

    #[test]
    fn sign_flip_keeps_p(d in prop::collection::vec(-50i32..50, 5..30)) {
        let d: Vec<f64> = d.into_iter().map(f64::from).collect();
        prop_assume!(d.iter().any(|v| *v != 0.0));
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        let a = wilcoxon_signed_rank(&d).unwrap();
        let b = wilcoxon_signed_rank(&neg).unwrap();
        prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
    }

    #[test]
    fn pearson_matches_closed_form(v in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30)) {
        let (x, y): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        if let Ok(r) = pearson(&x, &y) {
            prop_assert!((r - brute_pearson(&x, &y)).abs() < 1e-8);
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((pearson(&y, &x).unwrap() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn spearman_is_rank_invariant(v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30)) {
        let (x, y): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        let warped: Vec<f64> = x.iter().map(|a| a.powi(3) + 2.0 * a).collect();
        if let Ok(r) = spearman(&x, &y) {
            prop_assert!((spearman(&warped, &y).unwrap() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn quintiles_partition(n in 5usize..200) {
        let s = quintile_sizes(n).unwrap();
        prop_assert_eq!(s.iter().sum::<usize>(), n);
        prop_assert!(s[1..].iter().all(|&k| k == n / 5));
        prop_assert_eq!(s[0], n / 5 + n % 5);
        let ms: Vec<f64> = (0..n).map(|i| ((i * 37) % n) as f64).collect();
        let d: Vec<f64> = (0..n).map(|i| i as f64 - 5.0).collect();
        let t = quintile_table(&ms, &d).unwrap();
        prop_assert!(t.windows(2).all(|w| w[0].ms_max <= w[1].ms_min));
        prop_assert_eq!(t.iter().map(|r| r.wtl.total()).sum::<usize>(), n);
    }
}

#[test]
fn fixtures() {
    let r = wilcoxon_signed_rank(&[1.0; 6]).unwrap();
    assert_eq!((r.statistic, r.p_value), (21.0, 0.03125));
    assert_eq!(wilcoxon_signed_rank(&[1.0, -1.0, 2.0, -2.0]).unwrap().p_value, 1.0);
    let x: Vec<f64> = (1..=10).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|v| -2.0 * v + 3.0).collect();
    assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
    assert!((spearman(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(quintile_sizes(36).unwrap(), [8, 7, 7, 7, 7]);
    assert_eq!(quintile_sizes(10).unwrap(), [2, 2, 2, 2, 2]);
    assert_eq!(quintile_sizes(7).unwrap(), [3, 1, 1, 1, 1]);
}

#[test]
fn normal_tail_close_to_exact_at_fifteen() {
    let shifted: Vec<f64> = (0..15).map(|i| 0.3 + (i as f64 * 0.731).sin()).collect();
    let exact = wilcoxon_exact(&shifted).unwrap();
    let approx = wilcoxon_normal(&shifted).unwrap();
    assert!((exact.p_value - approx.p_value).abs() < 1e-2, "{} vs {}", exact.p_value, approx.p_value);
    let long: Vec<f64> = (0..36).map(|i| 0.3 + (i as f64 * 0.731).sin()).collect();
    let r = wilcoxon_signed_rank(&long).unwrap();
    assert!(!r.exact);
    assert!(r.p_value > 0.0 && r.p_value < 1.0);
}
