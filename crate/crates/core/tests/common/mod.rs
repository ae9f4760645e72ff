//! Exhaustive minimum-score decoding oracle for small detector error models.
#![allow(dead_code)]

use std::collections::HashMap;

use lacross::decoder::{DecodeResult, TannerGraph};
use lacross::gf2::BitVector;
use lacross::sim::DetectorErrorModel;

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push(*x);
                i += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                i += 1;
            }
            (_, Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

pub struct Oracle<'a> {
    dem: &'a DetectorErrorModel,
    weights: Vec<f64>,
    /// lightest mechanism per detector signature
    by_signature: HashMap<Vec<usize>, usize>,
    by_detector: Vec<Vec<usize>>,
    min_weight: f64,
}

#[derive(Clone, Debug)]
pub struct OracleSolution {
    pub score: f64,
    pub mechanisms: Vec<usize>,
    pub observables: BitVector,
}

impl<'a> Oracle<'a> {
    pub fn new(dem: &'a DetectorErrorModel) -> Self {
        let weights: Vec<f64> = dem.mechanisms.iter().map(|m| ((1.0 - m.probability) / m.probability).ln()).collect();
        let mut by_signature: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut by_detector = vec![Vec::new(); dem.n_detectors];
        for (i, m) in dem.mechanisms.iter().enumerate() {
            let e = by_signature.entry(m.detectors.clone()).or_insert(i);
            if weights[i] < weights[*e] {
                *e = i;
            }
            for &d in &m.detectors {
                by_detector[d].push(i);
            }
        }
        let min_weight = weights.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            dem,
            weights,
            by_signature,
            by_detector,
            min_weight,
        }
    }

    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }

    /// Lightest set of at most two mechanisms with syndrome `s`.
    fn best_upto_two(&self, s: &[usize]) -> Option<(f64, Vec<usize>)> {
        if s.is_empty() {
            return Some((0.0, vec![]));
        }
        let mut best: Option<(f64, Vec<usize>)> = self.by_signature.get(s).map(|&m| (self.weights[m], vec![m]));
        // exactly one of the pair meets the first detector
        for &a in &self.by_detector[s[0]] {
            let rest = sym_diff(s, &self.dem.mechanisms[a].detectors);
            if rest.is_empty() {
                continue;
            }
            if let Some(&b) = self.by_signature.get(&rest) {
                let score = self.weights[a] + self.weights[b];
                if best.as_ref().is_none_or(|(w, _)| score < *w) {
                    best = Some((score, vec![a, b]));
                }
            }
        }
        best
    }

    /// Minimum-score mechanism set with syndrome `s`. Searches up to three
    /// mechanisms and proves optimality from the lightest prior weight.
    pub fn solve(&self, s: &[usize]) -> OracleSolution {
        let mut best = self.best_upto_two(s);
        let bound3 = 3.0 * self.min_weight;
        if best.as_ref().is_none_or(|(w, _)| *w > bound3) {
            // any set of three has one member on the first detector
            for &a in &self.by_detector[s[0]] {
                let rest = sym_diff(s, &self.dem.mechanisms[a].detectors);
                if rest.is_empty() {
                    continue;
                }
                if let Some((w, mut set)) = self.best_upto_two(&rest) {
                    let score = w + self.weights[a];
                    if set.len() == 2 && best.as_ref().is_none_or(|(bw, _)| score < *bw) {
                        set.push(a);
                        best = Some((score, set));
                    }
                }
            }
        }
        let (score, mechanisms) = best.expect("syndrome reachable by at most three mechanisms");
        assert!(score <= 4.0 * self.min_weight, "oracle optimality bound not met for {s:?}");
        let mut observables = BitVector::zeros(self.dem.n_observables);
        for &m in &mechanisms {
            for &o in &self.dem.mechanisms[m].observables {
                observables.toggle(o);
            }
        }
        OracleSolution {
            score,
            mechanisms,
            observables,
        }
    }

    pub fn syndrome(&self, set: &[usize]) -> Vec<usize> {
        set.iter().fold(Vec::new(), |s, &m| sym_diff(&s, &self.dem.mechanisms[m].detectors))
    }

    pub fn observables(&self, set: &[usize]) -> BitVector {
        let mut o = BitVector::zeros(self.dem.n_observables);
        for &m in set {
            for &l in &self.dem.mechanisms[m].observables {
                o.toggle(l);
            }
        }
        o
    }
}

/// The decoder agrees with the oracle when it predicts the same observables,
/// or when its correction ties the optimal score (degenerate optimum).
pub fn agrees(graph: &TannerGraph, result: &DecodeResult, oracle: &OracleSolution) -> bool {
    let score = graph.score(&result.correction);
    assert!(score >= oracle.score - 1e-9 * oracle.score.max(1.0), "decoder beat the oracle: {score} < {}", oracle.score);
    result.observables == oracle.observables || (score - oracle.score).abs() <= 1e-9 * oracle.score.max(1.0)
}
