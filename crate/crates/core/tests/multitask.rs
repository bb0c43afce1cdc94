mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;

use senmap::frames::FrameSet;
use senmap::mapping::{LabelInventory, LabelMap, MapSet, Provenance};
use senmap::multitask::{
    finetune, init_mtdnn, prune, train_mtdnn, FinetuneConfig, LossMode, MtTrainConfig, MultiHeadNetwork,
};
use senmap::nnet::{init_network, lr_at_epoch, train, TrainConfig};
use senmap::Error;

fn frames_for(languages: &[(usize, usize)], dim: usize, per_lang: usize, seed: u64) -> FrameSet {
    let mut r = rng(seed);
    let mut f = FrameSet::new(dim);
    for (u, &(lang, size)) in languages.iter().enumerate() {
        for _ in 0..per_lang {
            let x = random_vec(&mut r, dim, 1.0);
            f.push(&x, lang, r.random_range(0..size), u as u32).unwrap();
        }
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pruned_network_reproduces_its_head(seed in any::<u64>(), width in 1usize..10, depth in 0usize..3) {
        let mut r = rng(seed);
        let mut shared = vec![4];
        shared.extend(std::iter::repeat_n(width, depth));
        let net = init_mtdnn(&shared, &[3, 5, 2], seed).unwrap().with_languages(vec![2, 0, 9]).unwrap();
        for (head, lang) in [(0usize, 2usize), (1, 0), (2, 9)] {
            let single = prune(&net, lang).unwrap();
            for _ in 0..20 {
                let x = random_vec(&mut r, 4, 3.0);
                prop_assert_eq!(single.forward(&x).unwrap().probs, net.forward_head(&x, head).unwrap().probs);
            }
        }
    }
}

#[test]
fn prune_rejects_missing_language() {
    let net = init_mtdnn(&[2, 3], &[2, 2], 0).unwrap();
    assert!(matches!(prune(&net, 5), Err(Error::Range { .. })));
}

#[test]
fn masked_training_leaves_absent_heads_alone() {
    let net0 = init_mtdnn(&[3, 6], &[4, 4, 4], 3).unwrap();
    let frames = frames_for(&[(0, 4), (1, 4)], 3, 50, 1);
    let mut net = net0.clone();
    let cfg = MtTrainConfig {
        epochs: 3,
        ..MtTrainConfig::default()
    };
    train_mtdnn(&mut net, &frames, &cfg, None).unwrap();
    assert_eq!(net.heads()[2], net0.heads()[2]);
    assert_ne!(net.heads()[0], net0.heads()[0]);
    assert_ne!(net.shared_layers(), net0.shared_layers());
}

fn swap_maps() -> MapSet {
    let mut set = MapSet::new(vec![0, 1]);
    let a = LabelInventory::senones(0, 3).unwrap();
    let b = LabelInventory::senones(1, 3).unwrap();
    set.insert(0, 0, LabelMap::identity(a)).unwrap();
    set.insert(1, 1, LabelMap::identity(b)).unwrap();
    set.insert(1, 0, LabelMap::new(a, b, vec![2, 1, 0], Provenance::DataDrivenSenone).unwrap()).unwrap();
    set.insert(0, 1, LabelMap::new(b, a, vec![2, 1, 0], Provenance::DataDrivenSenone).unwrap()).unwrap();
    set
}

#[test]
fn mapped_training_reaches_every_head() {
    let net0 = init_mtdnn(&[3, 6], &[3, 3], 3).unwrap();
    let frames = frames_for(&[(0, 3)], 3, 50, 2);
    let cfg = MtTrainConfig {
        epochs: 2,
        loss_mode: LossMode::Mapped,
        ..MtTrainConfig::default()
    };
    let mut net = net0.clone();
    train_mtdnn(&mut net, &frames, &cfg, Some(&swap_maps())).unwrap();
    assert_ne!(net.heads()[1], net0.heads()[1]);

    let mut again = net0.clone();
    assert!(matches!(train_mtdnn(&mut again, &frames, &cfg, None), Err(Error::Config(_))));
}

#[test]
fn multitask_log_reports_languages() {
    let mut net = init_mtdnn(&[3, 6], &[3, 3], 1).unwrap().with_languages(vec![4, 7]).unwrap();
    let frames = frames_for(&[(4, 3), (7, 3)], 3, 40, 3);
    let log = train_mtdnn(&mut net, &frames, &MtTrainConfig::default(), None).unwrap();
    assert_eq!(log.epochs.len(), 16);
    assert_eq!(log.epochs[0].per_language.iter().map(|p| p.0).collect::<Vec<_>>(), vec![4, 7]);
    assert_eq!(log.lrs()[3], 0.001);
}

#[test]
fn multihead_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let net = init_mtdnn(&[5, 7, 3], &[4, 2], 12).unwrap().with_languages(vec![1, 0]).unwrap();
    let path = dir.path().join("mt.json");
    net.save(&path).unwrap();
    let back = MultiHeadNetwork::load(&path).unwrap();
    assert_eq!(back, net);
}

#[test]
fn schedules() {
    let cfg = TrainConfig::default();
    for e in 0..16 {
        assert_eq!(lr_at_epoch(&cfg, e).unwrap(), 0.08 / 2f64.powi(e as i32));
    }
    assert!(lr_at_epoch(&cfg, 16).is_err());
    let flat = TrainConfig {
        halve_every_epoch: false,
        ..cfg
    };
    assert_eq!(lr_at_epoch(&flat, 9).unwrap(), 0.08);

    let frames = frames_for(&[(0, 3)], 2, 20, 4);
    let mut net = init_network(&[2, 3], 0).unwrap();
    let log = train(&mut net, &frames, &TrainConfig { epochs: 4, ..TrainConfig::default() }).unwrap();
    assert_eq!(log.lrs(), vec![0.08, 0.04, 0.02, 0.01]);

    let ft = finetune(&mut net, &frames, &FinetuneConfig::default()).unwrap();
    assert_eq!(ft.lrs(), vec![0.0008; 5]);
    let before = net.clone();
    let none = finetune(&mut net, &frames, &FinetuneConfig { epochs: 0, ..FinetuneConfig::default() }).unwrap();
    assert!(none.epochs.is_empty());
    assert_eq!(net, before);
}
