mod common;

use std::path::Path;

use common::*;
use proptest::prelude::*;
use rand::Rng;

use senmap::frames::FrameSet;
use senmap::mapping::{
    accumulate_confusion, apply_map, phone_map, senone_map, ConfusionCounts, LabelInventory, LabelMap, Provenance,
};
use senmap::nnet::init_network;

fn inv(task: usize, size: usize) -> LabelInventory {
    LabelInventory::senones(task, size).unwrap()
}

fn pairs_strategy() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize)>)> {
    (1usize..=10, 1usize..=10).prop_flat_map(|(ns, nt)| {
        (Just(ns), Just(nt), prop::collection::vec((0..ns, 0..nt), 0..=1000))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn senone_map_equals_counting_oracle((ns, nt, pairs) in pairs_strategy()) {
        let counts = ConfusionCounts::from_pairs(inv(1, ns), inv(0, nt), pairs.iter().copied()).unwrap();
        prop_assert_eq!(senone_map(&counts).table().to_vec(), oracle_map(&pairs, ns, nt));
    }

    #[test]
    fn phone_map_equals_counting_oracle((ns, nt, pairs) in pairs_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let gs = random_table(&mut r, 1, ns);
        let gt = random_table(&mut r, 0, nt);
        let counts = ConfusionCounts::from_pairs(inv(1, ns), inv(0, nt), pairs.iter().copied()).unwrap();
        let map = phone_map(&counts, &gs, &gt).unwrap();
        let expected = oracle_phone_map(&pairs, gs.table(), gt.table(), gs.phone_count(), gt.phone_count());
        prop_assert_eq!(map.table(), &expected[..]);
    }

    #[test]
    fn maps_ignore_count_scale((ns, nt, pairs) in pairs_strategy(), k in 1u64..50) {
        let counts = ConfusionCounts::from_pairs(inv(1, ns), inv(0, nt), pairs.iter().copied()).unwrap();
        let scaled: Vec<u64> = counts.matrix().iter().map(|c| c * k).collect();
        let scaled = ConfusionCounts::from_matrix(inv(1, ns), inv(0, nt), scaled).unwrap();
        prop_assert_eq!(senone_map(&counts), senone_map(&scaled));
    }

    #[test]
    fn maps_are_total((ns, nt, pairs) in pairs_strategy()) {
        let counts = ConfusionCounts::from_pairs(inv(1, ns), inv(0, nt), pairs.iter().copied()).unwrap();
        let map = senone_map(&counts);
        prop_assert_eq!(map.table().len(), ns);
        prop_assert!(map.table().iter().all(|&t| t < nt));
    }

    #[test]
    fn apply_map_composes(na in 1usize..8, nb in 1usize..8, nc in 1usize..8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let ab = LabelMap::new(inv(0, na), inv(1, nb), (0..na).map(|_| r.random_range(0..nb)).collect(), Provenance::Manual).unwrap();
        let bc = LabelMap::new(inv(1, nb), inv(2, nc), (0..nb).map(|_| r.random_range(0..nc)).collect(), Provenance::Manual).unwrap();
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..40).map(|_| r.random_range(0..na)).collect();
        let frames = FrameSet::from_rows(&rows, &labels, 0).unwrap();
        let twice = apply_map(&apply_map(&frames, &ab).unwrap(), &bc).unwrap();
        let once = apply_map(&frames, &ab.then(&bc).unwrap()).unwrap();
        prop_assert_eq!(twice.labels(), once.labels());
        prop_assert_eq!(twice.feature_buffer(), frames.feature_buffer());
    }

    #[test]
    fn map_text_round_trips(ns in 1usize..12, nt in 1usize..12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let map = LabelMap::new(inv(3, ns), inv(5, nt), (0..ns).map(|_| r.random_range(0..nt)).collect(), Provenance::DataDrivenPhone).unwrap();
        let back = LabelMap::parse(&map.to_text(), Path::new("mem"), inv(3, ns), inv(5, nt), Provenance::Manual).unwrap();
        prop_assert_eq!(back, map);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Counting through the network matches a serial per-frame oracle, and
    /// splitting the frames in two and merging the counts changes nothing.
    #[test]
    fn confusion_counts_are_shard_independent(seed in any::<u64>(), n in 1usize..3000, cut in 0usize..3000) {
        let mut r = rng(seed);
        let net = init_network(&[3, 5, 4], seed).unwrap();
        let rows: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut r, 3, 2.0)).collect();
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..6)).collect();
        let frames = FrameSet::from_rows(&rows, &labels, 1).unwrap();
        let counts = accumulate_confusion(&net, &frames, inv(0, 4), inv(1, 6)).unwrap();

        let pairs: Vec<(usize, usize)> = rows.iter().zip(&labels).map(|(x, &l)| (l, net.predict(x).unwrap())).collect();
        let serial = ConfusionCounts::from_pairs(inv(1, 6), inv(0, 4), pairs.iter().copied()).unwrap();
        prop_assert_eq!(&counts, &serial);

        let cut = cut.min(n);
        let head = FrameSet::from_rows(&rows[..cut], &labels[..cut], 1).unwrap();
        let tail = FrameSet::from_rows(&rows[cut..], &labels[cut..], 1).unwrap();
        let mut merged = accumulate_confusion(&net, &head, inv(0, 4), inv(1, 6)).unwrap();
        merged.merge(&accumulate_confusion(&net, &tail, inv(0, 4), inv(1, 6)).unwrap()).unwrap();
        prop_assert_eq!(&merged, &counts);
        prop_assert_eq!(senone_map(&counts).table().to_vec(), oracle_map(&pairs, 6, 4));
    }
}

#[test]
fn map_file_errors() {
    let p = Path::new("m.txt");
    let incomplete = LabelMap::parse("0 1\n", p, inv(0, 2), inv(1, 2), Provenance::Manual);
    assert!(matches!(incomplete, Err(senmap::Error::IncompleteMap { label: 1 })));
    let dup = LabelMap::parse("0 1\n0 0\n1 1\n", p, inv(0, 2), inv(1, 2), Provenance::Manual);
    assert!(matches!(dup, Err(senmap::Error::DuplicateEntry { label: 0, line: 2 })));
    let range = LabelMap::parse("0 5\n1 1\n", p, inv(0, 2), inv(1, 2), Provenance::Manual);
    assert!(matches!(range, Err(senmap::Error::LabelRange { label: 5, size: 2 })));
    let junk = LabelMap::parse("0 x\n", p, inv(0, 2), inv(1, 2), Provenance::Manual);
    assert!(matches!(junk, Err(senmap::Error::Parse { line: 1, .. })));
}
