use impactrank_core::correlation::{rho_min, top_k, TopKRanking};
use impactrank_core::measures::{Measure, MeasureParams, ScoreVector};
use impactrank_testkit::dense;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sv(scores: Vec<f64>) -> ScoreVector {
    ScoreVector {
        measure: Measure::Cc,
        scores,
        params: MeasureParams::with_current_year(2021),
        iterations_run: 0,
        converged: true,
        future_dated: 0,
    }
}

fn full_sort_top(scores: &[f64], k: usize) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    idx.into_iter().take(k).map(|i| i as u32).collect()
}

#[test]
fn top_k_matches_full_sort_on_thousand_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // coarse values so ties occur at the cut
    let scores: Vec<f64> = (0..1000)
        .map(|_| rng.random_range(0..200) as f64 / 7.0)
        .collect();
    let r = top_k(&sv(scores.clone()), 100).unwrap();
    assert_eq!(r.entries, full_sort_top(&scores, 100));
}

#[test]
fn reversed_disjoint_lists_match_hand_value() {
    let a = TopKRanking {
        measure: Measure::Cc,
        k: 3,
        entries: vec![0, 1, 2],
    };
    let b = TopKRanking {
        measure: Measure::Ram,
        k: 3,
        entries: vec![5, 4, 3],
    };
    let got = rho_min(&a, &b).unwrap().value;
    assert_eq!(got, -0.75);
    assert!((dense::rho_min(&[0, 1, 2], &[5, 4, 3], 3) - got).abs() < 1e-15);
}

fn rankings() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize)> {
    (2usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec(0u32..50, n),
            prop::collection::vec(0u32..50, n),
            1usize..=n,
        )
            .prop_map(|(a, b, k)| {
                (
                    a.into_iter().map(f64::from).collect(),
                    b.into_iter().map(f64::from).collect(),
                    k,
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rho_min_properties((a, b, k) in rankings()) {
        let ra = top_k(&sv(a.clone()), k).unwrap();
        let rb = top_k(&sv(b.clone()), k).unwrap();
        prop_assert_eq!(rho_min(&ra, &ra).unwrap().value, 1.0);
        let ab = rho_min(&ra, &rb).unwrap();
        let ba = rho_min(&rb, &ra).unwrap();
        prop_assert_eq!(ab.value.to_bits(), ba.value.to_bits());
        prop_assert!((-1.0..=1.0).contains(&ab.value));
        if !ab.degenerate && ra.entries != rb.entries {
            let ea: Vec<usize> = ra.entries.iter().map(|&x| x as usize).collect();
            let eb: Vec<usize> = rb.entries.iter().map(|&x| x as usize).collect();
            prop_assert!((dense::rho_min(&ea, &eb, k) - ab.value).abs() < 1e-12);
        }
        // x -> x^3 + 7x is strictly increasing and exact on these small integers
        let f = |v: &Vec<f64>| v.iter().map(|x| x * x * x + 7.0 * x).collect::<Vec<_>>();
        let ta = top_k(&sv(f(&a)), k).unwrap();
        let tb = top_k(&sv(f(&b)), k).unwrap();
        prop_assert_eq!(&ta.entries, &ra.entries);
        prop_assert_eq!(rho_min(&ta, &tb).unwrap().value.to_bits(), ab.value.to_bits());
    }
}
