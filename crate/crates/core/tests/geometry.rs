use baryclust::CorrespondenceView;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<f64> {
    (0..rows * cols).map(|_| rng.gen_range(0.05..3.0)).collect()
}

fn all_pairs(v: &CorrespondenceView) -> Vec<f64> {
    let n = v.rows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push(v.chi2_distance_sq(i, j));
        }
    }
    out
}

#[test]
fn merging_proportional_columns_keeps_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let rows = rng.gen_range(3..12);
        let cols = rng.gen_range(2..8);
        let mut z = random_matrix(&mut rng, rows, cols);
        // append a column proportional to column `src`
        let src = rng.gen_range(0..cols);
        let factor = rng.gen_range(0.1..5.0);
        let mut widened = Vec::with_capacity(rows * (cols + 1));
        for i in 0..rows {
            widened.extend_from_slice(&z[i * cols..(i + 1) * cols]);
            widened.push(factor * z[i * cols + src]);
        }
        let before = all_pairs(&CorrespondenceView::new(rows, cols + 1, &widened).unwrap());
        for i in 0..rows {
            z[i * cols + src] *= 1.0 + factor;
        }
        let after = all_pairs(&CorrespondenceView::new(rows, cols, &z).unwrap());
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() <= 1e-10 * a.max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn equal_column_masses_give_scaled_euclidean() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let rows = rng.gen_range(3..12);
        let cols = rng.gen_range(2..8);
        let mut z = random_matrix(&mut rng, rows, cols);
        for j in 0..cols {
            let s: f64 = (0..rows).map(|i| z[i * cols + j]).sum();
            for i in 0..rows {
                z[i * cols + j] /= s;
            }
        }
        let v = CorrespondenceView::new(rows, cols, &z).unwrap();
        for i in 0..rows {
            for k in i + 1..rows {
                let euclid: f64 = v
                    .profile(i)
                    .iter()
                    .zip(v.profile(k))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                let chi2 = v.chi2_distance_sq(i, k);
                assert!((chi2 - cols as f64 * euclid).abs() <= 1e-10 * chi2.max(1.0));
            }
        }
    }
}

#[test]
fn inertia_two_ways() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let (rows, cols) = (rng.gen_range(2..15), rng.gen_range(2..9));
        let v = CorrespondenceView::new(rows, cols, &random_matrix(&mut rng, rows, cols)).unwrap();
        let a = v.total_inertia();
        let b = v.total_inertia_from_profiles();
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

proptest! {
    #[test]
    fn chi2_is_a_metric(seed in any::<u64>(), rows in 3usize..10, cols in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = CorrespondenceView::new(rows, cols, &random_matrix(&mut rng, rows, cols)).unwrap();
        for i in 0..rows {
            prop_assert_eq!(v.chi2_distance(i, i), 0.0);
            for j in 0..rows {
                prop_assert_eq!(v.chi2_distance(i, j), v.chi2_distance(j, i));
                for k in 0..rows {
                    prop_assert!(v.chi2_distance(i, k) <= v.chi2_distance(i, j) + v.chi2_distance(j, k) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn rescaling_the_table_changes_nothing(seed in any::<u64>(), factor in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_matrix(&mut rng, 6, 4);
        let scaled: Vec<f64> = z.iter().map(|x| x * factor).collect();
        let a = all_pairs(&CorrespondenceView::new(6, 4, &z).unwrap());
        let b = all_pairs(&CorrespondenceView::new(6, 4, &scaled).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }
}
