//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use senmap::mapping::SenoneToPhoneTable;
use senmap::multitask::{mt_loss, MultiHeadNetwork, TargetAssignment};
use senmap::nnet::{cross_entropy, Dense, Network};

pub const FD_STEP: f64 = 1e-5;

/// Numeric (weights, biases) gradients, one entry per layer.
pub type LayerFd = Vec<(Vec<f64>, Vec<f64>)>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// |a − n| / max(|a|, |n|, 1e-6).
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Central differences of `loss` with respect to every weight and bias of
/// `layer`, returned as (weights, biases).
pub fn fd_layer<N>(
    net: &mut N,
    layer: impl Fn(&mut N) -> &mut Dense,
    loss: impl Fn(&N) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let nw = layer(net).weights().len();
    let nb = layer(net).biases().len();
    let mut gw = Vec::with_capacity(nw);
    for i in 0..nw {
        let orig = layer(net).weights()[i];
        layer(net).weights_mut()[i] = orig + FD_STEP;
        let up = loss(net);
        layer(net).weights_mut()[i] = orig - FD_STEP;
        let down = loss(net);
        layer(net).weights_mut()[i] = orig;
        gw.push((up - down) / (2.0 * FD_STEP));
    }
    let mut gb = Vec::with_capacity(nb);
    for i in 0..nb {
        let orig = layer(net).biases()[i];
        layer(net).biases_mut()[i] = orig + FD_STEP;
        let up = loss(net);
        layer(net).biases_mut()[i] = orig - FD_STEP;
        let down = loss(net);
        layer(net).biases_mut()[i] = orig;
        gb.push((up - down) / (2.0 * FD_STEP));
    }
    (gw, gb)
}

/// Numeric gradients of the single-task cross-entropy, layer by layer.
pub fn fd_network(net: &Network, x: &[f64], label: usize) -> LayerFd {
    let mut work = net.clone();
    let n = work.layers().len();
    (0..n)
        .map(|l| {
            fd_layer(
                &mut work,
                |w: &mut Network| &mut w.layers_mut()[l],
                |w: &Network| cross_entropy(&w.forward(x).unwrap().probs, label),
            )
        })
        .collect()
}

/// Numeric gradients of the multi-head loss: shared layers, then heads.
pub fn fd_multihead(
    net: &MultiHeadNetwork,
    x: &[f64],
    targets: &TargetAssignment,
) -> (LayerFd, LayerFd) {
    let mut work = net.clone();
    let loss = |w: &MultiHeadNetwork| mt_loss(&w.forward(x).unwrap(), targets).unwrap();
    let shared = (0..work.shared_layers().len())
        .map(|l| fd_layer(&mut work, |w: &mut MultiHeadNetwork| &mut w.shared_layers_mut()[l], loss))
        .collect();
    let heads = (0..work.num_heads())
        .map(|h| fd_layer(&mut work, |w: &mut MultiHeadNetwork| &mut w.heads_mut()[h], loss))
        .collect();
    (shared, heads)
}

/// Largest relative error between analytic and numeric values.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| rel_err(a, n))
        .fold(0.0, f64::max)
}

/// For every source label, scans all (source, target) pairs, counts target
/// labels, and picks the most frequent one, scanning targets upward so the
/// lowest wins ties. Labels never seen map to 0.
pub fn oracle_map(pairs: &[(usize, usize)], n_source: usize, n_target: usize) -> Vec<usize> {
    (0..n_source)
        .map(|s| {
            let mut counts = vec![0u64; n_target];
            for &(a, b) in pairs {
                if a == s {
                    counts[b] += 1;
                }
            }
            let mut best = 0;
            for t in 1..n_target {
                if counts[t] > counts[best] {
                    best = t;
                }
            }
            best
        })
        .collect()
}

/// Phone-level oracle: every frame pair is first rewritten to phones.
pub fn oracle_phone_map(pairs: &[(usize, usize)], g_source: &[usize], g_target: &[usize], source_phones: usize, target_phones: usize) -> Vec<usize> {
    let phone_pairs: Vec<(usize, usize)> = pairs.iter().map(|&(s, t)| (g_source[s], g_target[t])).collect();
    oracle_map(&phone_pairs, source_phones, target_phones)
}

/// A senone-to-phone table in which every phone owns at least one senone.
pub fn random_table(rng: &mut ChaCha8Rng, task: usize, senones: usize) -> SenoneToPhoneTable {
    let phones = rng.random_range(1..=senones);
    let mut table: Vec<usize> = (0..senones)
        .map(|s| if s < phones { s } else { rng.random_range(0..phones) })
        .collect();
    // shuffle so phone ids are not aligned with senone ids
    for i in (1..table.len()).rev() {
        let j = rng.random_range(0..=i);
        table.swap(i, j);
    }
    SenoneToPhoneTable::new(task, phones, table).unwrap()
}

/// Smallest |pre-activation| over the ReLU layers of `layers` at input `x`,
/// computed by hand from the row-major weights. The last layer is linear.
pub fn min_relu_margin(layers: &[Dense], x: &[f64]) -> f64 {
    let mut h = x.to_vec();
    let mut margin = f64::INFINITY;
    for (i, layer) in layers.iter().enumerate() {
        let z: Vec<f64> = (0..layer.out_dim())
            .map(|o| {
                let row = &layer.weights()[o * layer.in_dim()..(o + 1) * layer.in_dim()];
                row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>() + layer.biases()[o]
            })
            .collect();
        if i + 1 < layers.len() {
            margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
            h = z.iter().map(|v| v.max(0.0)).collect();
        }
    }
    margin
}

/// Gives every layer random biases so no unit sits exactly on a kink.
pub fn randomize_biases(layers: &mut [Dense], rng: &mut ChaCha8Rng) {
    for layer in layers {
        for b in layer.biases_mut() {
            *b = rng.random_range(-0.5..0.5);
        }
    }
}

/// Margin below which finite differences straddle a ReLU kink.
pub const KINK_MARGIN: f64 = 1e-4;
