//! Ordered-statistics post-processing.
//!
//! Columns are visited from most to least likely flipped according to the BP
//! posterior. A fully reduced (Gauss-Jordan) column basis is grown until it
//! spans the column space, so the representation of any column or syndrome
//! in the chosen information set is the XOR of the basis combinations at its
//! pivot rows.

use super::{DecodeConfig, TannerGraph};
use crate::error::{Error, Result};
use crate::gf2::BitVector;

struct Basis {
    words: usize,
    comb_words: usize,
    /// pivot slot per detector row, `NONE` if the row has no pivot
    slot_of_row: Vec<u32>,
    /// reduced column per slot, dense over detectors, `words` per slot
    vectors: Vec<u64>,
    /// pivot slots whose columns XOR to the reduced vector, `comb_words` per slot
    combs: Vec<u64>,
    pivot_var: Vec<usize>,
}

const NONE: u32 = u32::MAX;

fn xor_into(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

impl Basis {
    fn new(n_checks: usize, rank: usize) -> Self {
        let words = n_checks.div_ceil(64).max(1);
        let comb_words = rank.div_ceil(64).max(1);
        Self {
            words,
            comb_words,
            slot_of_row: vec![NONE; n_checks],
            vectors: Vec::with_capacity(rank * words),
            combs: Vec::with_capacity(rank * comb_words),
            pivot_var: Vec::with_capacity(rank),
        }
    }

    fn rank(&self) -> usize {
        self.pivot_var.len()
    }

    fn comb(&self, k: usize) -> &[u64] {
        &self.combs[k * self.comb_words..(k + 1) * self.comb_words]
    }

    /// Reduces a sparse vector; returns the residue and the slot combination.
    fn reduce(&self, rows: &[usize]) -> (Vec<u64>, Vec<u64>) {
        let mut v = vec![0u64; self.words];
        for &r in rows {
            v[r / 64] ^= 1 << (r % 64);
        }
        let mut comb = vec![0u64; self.comb_words];
        for &r in rows {
            let k = self.slot_of_row[r];
            if k != NONE {
                let k = k as usize;
                xor_into(&mut v, &self.vectors[k * self.words..(k + 1) * self.words]);
                xor_into(&mut comb, self.comb(k));
            }
        }
        (v, comb)
    }

    /// Slot combination only, for a vector known to lie in the span.
    fn represent_into(&self, rows: &[usize], comb: &mut [u64]) {
        comb.fill(0);
        for &r in rows {
            let k = self.slot_of_row[r];
            if k != NONE {
                xor_into(comb, self.comb(k as usize));
            }
        }
    }

    /// Adds column `var` if independent. Returns whether it became a pivot.
    fn insert(&mut self, var: usize, rows: &[usize], scratch: &mut Vec<u64>) -> bool {
        // residue first; the combination is only needed for a new pivot
        let w = self.words;
        scratch.clear();
        scratch.resize(w, 0);
        for &r in rows {
            scratch[r / 64] ^= 1 << (r % 64);
        }
        for &r in rows {
            let k = self.slot_of_row[r];
            if k != NONE {
                let k = k as usize;
                xor_into(scratch, &self.vectors[k * w..(k + 1) * w]);
            }
        }
        let Some(wi) = scratch.iter().position(|&x| x != 0) else {
            return false;
        };
        let v = std::mem::take(scratch);
        let mut comb = vec![0u64; self.comb_words];
        self.represent_into(rows, &mut comb);
        let pivot = wi * 64 + v[wi].trailing_zeros() as usize;
        let k = self.rank();
        comb[k / 64] ^= 1 << (k % 64);
        let cw = self.comb_words;
        for j in 0..k {
            if self.vectors[j * w + pivot / 64] >> (pivot % 64) & 1 == 1 {
                xor_into(&mut self.vectors[j * w..(j + 1) * w], &v);
                xor_into(&mut self.combs[j * cw..(j + 1) * cw], &comb);
            }
        }
        self.slot_of_row[pivot] = k as u32;
        self.vectors.extend_from_slice(&v);
        self.combs.extend_from_slice(&comb);
        self.pivot_var.push(var);
        *scratch = v;
        true
    }
}

fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            }
        })
    })
}

/// OSD-0 on the most likely information set, plus the order-1 sweep of every
/// single non-pivot flip when `config.osd_order == 1`.
pub fn osd_postprocess(graph: &TannerGraph, posterior: &[f64], syndrome: &BitVector, config: &DecodeConfig) -> Result<BitVector> {
    let n_vars = graph.n_vars();
    // ascending posterior, ties by index; the key maps f64 total order to u64
    let key_of = |i: usize| {
        let b = posterior[i].to_bits();
        let key = if b >> 63 == 1 { !b } else { b | 1 << 63 };
        (key, i as u32)
    };
    let mut keyed: Vec<(u64, u32)> = (0..n_vars).map(key_of).collect();
    // only the head of the order is needed to fill the basis; the tail is
    // ordered chunk by chunk on demand
    let chunk = (4 * graph.rank()).max(64);
    let mut sorted = 0;
    let order_more = |keyed: &mut [(u64, u32)], sorted: &mut usize| {
        let tail = &mut keyed[*sorted..];
        let take = chunk.min(tail.len());
        if take < tail.len() {
            tail.select_nth_unstable(take);
        }
        tail[..take].sort_unstable();
        *sorted += take;
    };

    let mut basis = Basis::new(graph.n_checks(), graph.rank());
    let mut is_pivot = vec![false; n_vars];
    let mut next = 0;
    let mut scratch = Vec::new();
    while basis.rank() < graph.rank() && next < n_vars {
        if next == sorted {
            order_more(&mut keyed, &mut sorted);
        }
        let v = keyed[next].1 as usize;
        if basis.insert(v, graph.column(v), &mut scratch) {
            is_pivot[v] = true;
        }
        next += 1;
    }

    let s_rows: Vec<usize> = syndrome.ones().collect();
    let (residue, x0) = basis.reduce(&s_rows);
    if residue.iter().any(|&w| w != 0) {
        return Err(Error::SingularSyndrome);
    }

    // flipping non-pivot j changes the score by w_j + Σ_{k ∈ rep(j)} ±w_k,
    // negative only where rep(j) meets the current solution
    let mut best: Option<(f64, (u64, u32), Vec<u64>)> = None;
    if config.osd_order >= 1 {
        let pivot_w: Vec<f64> = basis.pivot_var.iter().map(|&v| graph.weights[v]).collect();
        let min_outside = (0..basis.rank())
            .filter(|&k| x0[k / 64] >> (k % 64) & 1 == 0)
            .map(|k| pivot_w[k])
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        let bit_sum = |words: &[u64]| -> f64 {
            let mut acc = 0.0;
            for (i, &w) in words.iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    acc += pivot_w[i * 64 + w.trailing_zeros() as usize];
                    w &= w - 1;
                }
            }
            acc
        };
        let mut r = vec![0u64; basis.comb_words];
        let mut inside = vec![0u64; basis.comb_words];
        let mut outside = vec![0u64; basis.comb_words];
        // gain of column j = weight of rep(j) ∩ x0; with x0 packed into one
        // word per row it is an XOR over the column's rows
        let support: Vec<usize> = ones(&x0).collect();
        let row_masks: Option<Vec<u64>> = (support.len() <= 64).then(|| {
            basis
                .slot_of_row
                .iter()
                .map(|&k| {
                    if k == NONE {
                        return 0;
                    }
                    let comb = basis.comb(k as usize);
                    support.iter().enumerate().fold(0u64, |m, (i, &s)| m | (comb[s / 64] >> (s % 64) & 1) << i)
                })
                .collect()
        });
        let support_w: Vec<f64> = support.iter().map(|&k| pivot_w[k]).collect();
        for j in (0..n_vars).filter(|&v| !is_pivot[v]) {
            let rows = graph.column(j);
            if let Some(masks) = &row_masks {
                let mut m = rows.iter().fold(0u64, |m, &row| m ^ masks[row]);
                let mut gain = 0.0;
                while m != 0 {
                    gain += support_w[m.trailing_zeros() as usize];
                    m &= m - 1;
                }
                // outside weights are nonnegative
                if graph.weights[j] - gain >= 0.0 {
                    continue;
                }
            }
            basis.represent_into(rows, &mut r);
            let mut n_out = 0;
            for i in 0..r.len() {
                inside[i] = r[i] & x0[i];
                outside[i] = r[i] & !x0[i];
                n_out += outside[i].count_ones();
            }
            let gain = bit_sum(&inside);
            let base = graph.weights[j] - gain;
            if base + n_out as f64 * min_outside >= 0.0 {
                continue;
            }
            let delta = base + bit_sum(&outside);
            let key = key_of(j);
            if delta < 0.0 && best.as_ref().is_none_or(|(d, k, _)| (delta, key) < (*d, *k)) {
                best = Some((delta, key, r.clone()));
            }
        }
    }

    let mut correction = BitVector::zeros(n_vars);
    let mut slots = x0;
    if let Some((_, j, r)) = best {
        correction.set(j.1 as usize, true);
        for (a, b) in slots.iter_mut().zip(&r) {
            *a ^= b;
        }
    }
    for k in ones(&slots) {
        correction.toggle(basis.pivot_var[k]);
    }
    Ok(correction)
}
