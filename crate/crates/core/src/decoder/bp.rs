//! Flooding normalized min-sum belief propagation.

use super::{DecodeConfig, TannerGraph};
use crate::gf2::BitVector;

/// Magnitude cap for check messages; a degree-one check would otherwise send
/// an infinite message.
const MESSAGE_CAP: f32 = 1e3;

#[derive(Clone, Debug, PartialEq)]
pub struct BpOutput {
    /// Posterior log-likelihood ratios; negative means flipped.
    pub posterior: Vec<f64>,
    pub hard: BitVector,
    pub converged: bool,
    pub iterations: usize,
}

/// Runs at most `config.max_iterations` flooding iterations, stopping as
/// soon as the hard decision reproduces `syndrome`.
pub fn bp_minsum(graph: &TannerGraph, syndrome: &BitVector, config: &DecodeConfig) -> BpOutput {
    let n_vars = graph.n_vars();
    // messages in single precision; posteriors are reported in f64
    let prior: Vec<f32> = graph.weights.iter().map(|&w| w as f32).collect();
    let flipped: Vec<bool> = (0..graph.n_checks).map(|c| syndrome.get(c)).collect();
    let mut to_check: Vec<f32> = graph.edge_var.iter().map(|&v| prior[v]).collect();
    let mut to_var = vec![0.0f32; to_check.len()];
    let mut posterior = vec![0.0f32; n_vars];
    let mut hard = vec![false; n_vars];
    let scale = config.min_sum_scale as f32;

    for it in 1..=config.max_iterations {
        for c in 0..graph.n_checks {
            let (lo, hi) = (graph.check_ptr[c], graph.check_ptr[c + 1]);
            let msgs = &to_check[lo..hi];
            let mut negative = flipped[c];
            let (mut min1, mut min2, mut arg) = (f32::INFINITY, f32::INFINITY, 0);
            for (i, &m) in msgs.iter().enumerate() {
                negative ^= m.is_sign_negative();
                let a = m.abs();
                if a < min2 {
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        arg = i;
                    } else {
                        min2 = a;
                    }
                }
            }
            let (m1, m2) = ((min1 * scale).min(MESSAGE_CAP), (min2 * scale).min(MESSAGE_CAP));
            for (i, (out, &m)) in to_var[lo..hi].iter_mut().zip(msgs).enumerate() {
                let mag = if i == arg { m2 } else { m1 };
                *out = if negative ^ m.is_sign_negative() { -mag } else { mag };
            }
        }
        for v in 0..n_vars {
            let edges = &graph.var_edges[graph.var_ptr[v]..graph.var_ptr[v + 1]];
            let mut total = prior[v];
            for &e in edges {
                total += to_var[e];
            }
            posterior[v] = total;
            hard[v] = total < 0.0;
            for &e in edges {
                to_check[e] = total - to_var[e];
            }
        }
        let satisfied = (0..graph.n_checks).all(|c| {
            graph.edge_var[graph.check_ptr[c]..graph.check_ptr[c + 1]].iter().fold(false, |a, &v| a ^ hard[v]) == flipped[c]
        });
        if satisfied {
            return BpOutput {
                posterior: posterior.iter().map(|&l| l as f64).collect(),
                hard: BitVector::from_bools(&hard),
                converged: true,
                iterations: it,
            };
        }
    }
    BpOutput {
        posterior: posterior.iter().map(|&l| l as f64).collect(),
        hard: BitVector::from_bools(&hard),
        converged: false,
        iterations: config.max_iterations,
    }
}
