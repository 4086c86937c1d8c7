//! Deterministic descending selection: larger value first, then lower index.

use std::cmp::Ordering;

#[inline]
pub(crate) fn desc_then_index(values: &[f64], a: usize, b: usize) -> Ordering {
    // adding +0.0 maps -0.0 to +0.0 so signed zeros tie
    (values[b] + 0.0).total_cmp(&(values[a] + 0.0)).then(a.cmp(&b))
}

/// All indices ordered by descending value.
pub fn order_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_unstable_by(|&a, &b| desc_then_index(values, a, b));
    idx
}

/// The `k` largest indices (clamped to `values.len()`), ordered.
pub fn top_k_desc(values: &[f64], k: usize) -> Vec<usize> {
    top_k_among(values, (0..values.len()).collect(), k)
}

/// Like [`top_k_desc`] restricted to `candidates`.
pub(crate) fn top_k_among(values: &[f64], mut candidates: Vec<usize>, k: usize) -> Vec<usize> {
    let k = k.min(candidates.len());
    if k == 0 {
        return Vec::new();
    }
    if k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, |&a, &b| desc_then_index(values, a, b));
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(|&a, &b| desc_then_index(values, a, b));
    candidates
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_prefer_lower_index() {
        assert_eq!(order_desc(&[1.0, 2.0, 2.0, 0.5]), vec![1, 2, 0, 3]);
        assert_eq!(top_k_desc(&[3.0, 3.0, 3.0], 2), vec![0, 1]);
        assert_eq!(order_desc(&[-0.0, 0.0, -1.0]), vec![0, 1, 2]);
        assert_eq!(order_desc(&[0.0, -0.0]), vec![0, 1]);
    }

    proptest! {
        #[test]
        fn top_k_is_prefix_of_full_order(
            values in prop::collection::vec(prop_oneof![(-3i32..3).prop_map(f64::from), -1.0f64..1.0], 1..40),
            k in 0usize..45,
        ) {
            let full = order_desc(&values);
            let top = top_k_desc(&values, k);
            prop_assert_eq!(&top[..], &full[..k.min(values.len())]);
        }
    }
}
