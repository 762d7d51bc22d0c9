use proptest::prelude::*;
use verscale_core::{derive_weights, SmoothRouter, VersionId};

fn router(weights: &[u32]) -> SmoothRouter {
    let scores: Vec<(VersionId, f64)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            (
                VersionId::new(format!("v{i}")).unwrap(),
                f64::from(w) / 100.0,
            )
        })
        .collect();
    let table = derive_weights(&scores);
    assert_eq!(table.weights(), weights);
    SmoothRouter::new(table)
}

proptest! {
    #[test]
    fn prefixes_never_burst(weights in prop::collection::vec(1u32..=100, 1..=6)) {
        let total: u64 = weights.iter().map(|&w| u64::from(w)).sum();
        let mut r = router(&weights);
        let mut counts = vec![0u64; weights.len()];
        for k in 1..=total {
            counts[r.next_index()] += 1;
            for (c, &w) in counts.iter().zip(&weights) {
                // count <= ceil(k * w / total)
                prop_assert!(*c * total < k * u64::from(w) + total);
            }
        }
    }

    #[test]
    fn sequence_repeats_every_cycle(weights in prop::collection::vec(1u32..=100, 1..=6)) {
        let total: usize = weights.iter().map(|&w| w as usize).sum();
        let mut r = router(&weights);
        let first: Vec<usize> = (0..total).map(|_| r.next_index()).collect();
        let second: Vec<usize> = (0..total).map(|_| r.next_index()).collect();
        prop_assert_eq!(first, second);
    }
}

#[test]
fn highest_weight_goes_first_and_ties_go_low() {
    assert_eq!(router(&[10, 30, 30]).next_index(), 1);
    assert_eq!(router(&[5, 5, 5]).next_index(), 0);
}
