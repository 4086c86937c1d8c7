mod common;

use approx::assert_abs_diff_eq;
use ndarray::Array2;
use proptest::prelude::*;
use semaxis::decomposition::{normalize_rows, sem_decompose, top_p_indices, top_p_sum};
use semaxis::transform::{Space, TransformedEmbeddings};

fn space(rows: Vec<Vec<f64>>) -> TransformedEmbeddings {
    let (n, d) = (rows.len(), rows[0].len());
    let data = Array2::from_shape_vec((n, d), rows.concat()).unwrap();
    TransformedEmbeddings::new(Space::Ica, data, common::numbered_vocab(n), Default::default()).unwrap()
}

fn rows(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    let entry = prop_oneof![(-3i32..=3).prop_map(f64::from), -5.0f64..5.0];
    prop::collection::vec(prop::collection::vec(entry, d), n)
        .prop_filter("nonzero rows", |r| r.iter().all(|v| v.iter().any(|x| *x != 0.0)))
}

proptest! {
    #[test]
    fn rescaling_rows_changes_nothing(r in rows(4, 6), scale in prop::collection::vec(0.01f64..100.0, 4)) {
        let a = normalize_rows(&space(r.clone())).unwrap();
        let scaled = r.iter().zip(&scale).map(|(v, s)| v.iter().map(|x| x * s).collect()).collect();
        let b = normalize_rows(&space(scaled)).unwrap();
        let (da, db) = (sem_decompose(&a, 0, 1).unwrap(), sem_decompose(&b, 0, 1).unwrap());
        for (x, y) in da.products.iter().zip(&db.products) {
            prop_assert!((x - y).abs() <= 1e-14);
        }
    }

    #[test]
    fn top_p_sets_are_nested(r in rows(2, 8)) {
        let n = normalize_rows(&space(r)).unwrap();
        let dec = sem_decompose(&n, 0, 1).unwrap();
        for p in 1..8 {
            let small = top_p_indices(&dec, p).unwrap();
            let big = top_p_indices(&dec, p + 1).unwrap();
            prop_assert_eq!(&small[..], &big[..p]);
        }
    }

    #[test]
    fn consecutive_sums_differ_by_the_next_product(r in rows(2, 8)) {
        let n = normalize_rows(&space(r)).unwrap();
        let dec = sem_decompose(&n, 0, 1).unwrap();
        let order = top_p_indices(&dec, 8).unwrap();
        for p in 1..8 {
            let diff = top_p_sum(&dec, p + 1).unwrap() - top_p_sum(&dec, p).unwrap();
            prop_assert!((diff - dec.products[order[p]]).abs() <= 1e-14);
        }
    }

    #[test]
    fn full_sum_is_the_cosine(r in rows(2, 8)) {
        let n = normalize_rows(&space(r)).unwrap();
        let dec = sem_decompose(&n, 0, 1).unwrap();
        prop_assert_eq!(top_p_sum(&dec, 8).unwrap(), dec.total);
        let sums: Vec<f64> = (1..=8).map(|p| top_p_sum(&dec, p).unwrap()).collect();
        // top-p sums rise to a maximum and then fall once products turn negative
        let peak = sums.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert!(dec.products.iter().filter(|v| **v > 0.0).sum::<f64>() - peak <= 1e-14);
    }
}

#[test]
fn hand_computed_pair() {
    let n = normalize_rows(&space(vec![vec![3.0, 4.0, 0.0], vec![0.0, 4.0, 3.0]])).unwrap();
    let dec = sem_decompose(&n, 0, 1).unwrap();
    assert_abs_diff_eq!(dec.products[0], 0.0);
    assert_abs_diff_eq!(dec.products[1], 0.64, epsilon = 1e-15);
    assert_abs_diff_eq!(dec.products[2], 0.0);
    assert_abs_diff_eq!(dec.total, 0.64, epsilon = 1e-15);
    assert_eq!(top_p_indices(&dec, 3).unwrap(), vec![1, 0, 2]);
    assert!(top_p_sum(&dec, 0).is_err());
    assert!(top_p_sum(&dec, 4).is_err());
}

#[test]
fn zero_row_is_rejected() {
    let err = normalize_rows(&space(vec![vec![1.0, 0.0], vec![0.0, 0.0]])).unwrap_err();
    assert!(err.to_string().contains("w1"), "{err}");
}
