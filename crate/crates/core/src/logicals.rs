//! Logical operators of La-cross codes and the disjoint representative
//! partitions that make teleported gates addressable.
//!
//! X logicals live on a single main-lattice row with a column pattern drawn
//! from `ker H`; Z logicals live on a single column with a row pattern from
//! `ker H`. Equivalent representatives are produced by adding macro
//! stabilizers, each of which moves the support of one row onto two others.

use serde::{Deserialize, Serialize};

use crate::codes::{circulant_parity_matrix, kernel_codewords, CssCode, LaCrossLayout};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, RowSpace};

/// Largest lattice side handled by the subset enumeration (masks are `u64`).
const MAX_SIDE: usize = 64;
/// Largest check count for which all `2^r` macro combinations are enumerated.
const MAX_ENUMERATED_CHECKS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn as_char(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Z => 'Z',
        }
    }
}

/// A canonical X/Z pair for one logical qubit.
///
/// `x_op` is X on main row `x_line` over columns `x_pattern`; `z_op` is Z on
/// main column `z_line` over rows `z_pattern`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalPair {
    pub index: usize,
    pub x_op: BitVector,
    pub z_op: BitVector,
    pub x_line: usize,
    pub x_pattern: Vec<usize>,
    pub z_line: usize,
    pub z_pattern: Vec<usize>,
}

impl LogicalPair {
    pub fn op(&self, basis: Basis) -> &BitVector {
        match basis {
            Basis::X => &self.x_op,
            Basis::Z => &self.z_op,
        }
    }

    fn line_and_pattern(&self, basis: Basis) -> (usize, &[usize]) {
        match basis {
            Basis::X => (self.x_line, &self.x_pattern),
            Basis::Z => (self.z_line, &self.z_pattern),
        }
    }
}

/// Picks a basis of `ker H` of minimum total weight in which every element
/// owns a "unit" position where it alone is nonzero. Among those, prefers unit
/// positions whose lines admit disjoint representative partitions. Returns
/// the basis and the chosen positions.
fn unit_kernel_basis(h: &BitMatrix, layout: &LaCrossLayout) -> (Vec<BitVector>, Vec<usize>) {
    let n = h.num_cols();
    let dim = n - h.rank();
    let mut words: Vec<BitVector> = kernel_codewords(h).into_iter().filter(|c| !c.is_zero()).collect();
    words.sort_by(|a, b| a.weight().cmp(&b.weight()).then_with(|| a.support().cmp(&b.support())));

    let unit_choices = |basis: &[&BitVector]| -> Vec<Vec<usize>> {
        basis
            .iter()
            .enumerate()
            .map(|(t, c)| {
                (0..n)
                    .filter(|&u| c.get(u) && basis.iter().enumerate().all(|(s, o)| s == t || !o.get(u)))
                    .collect()
            })
            .collect()
    };

    if binomial(words.len(), dim) <= 200_000 {
        let mut best_weight = usize::MAX;
        let mut minimal: Vec<(Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
        for combo in combinations(words.len(), dim) {
            let total: usize = combo.iter().map(|&i| words[i].weight()).sum();
            if total > best_weight {
                continue;
            }
            let chosen: Vec<&BitVector> = combo.iter().map(|&i| &words[i]).collect();
            if BitMatrix::from_rows(chosen.iter().map(|c| (*c).clone()).collect(), n).rank() != dim {
                continue;
            }
            let choices = unit_choices(&chosen);
            if choices.iter().any(Vec::is_empty) {
                continue;
            }
            if total < best_weight {
                best_weight = total;
                minimal.clear();
            }
            minimal.push((combo, choices));
        }

        let mut memo = std::collections::HashMap::new();
        let mut partitionable = |line: usize, count: usize| -> bool {
            *memo.entry((line, count)).or_insert_with(|| {
                equivalent_line_sets(layout, line)
                    .ok()
                    .and_then(|c| (1..=n).find_map(|span| choose_disjoint(&c, line, count, span)))
                    .is_some()
            })
        };
        let mut best: Option<(usize, Vec<usize>, Vec<usize>)> = None;
        'outer: for (combo, choices) in &minimal {
            let weights: Vec<usize> = combo.iter().map(|&i| words[i].weight()).collect();
            for units in cartesian(choices, 4096) {
                // X of pair (s,t) sits on line u_s with |c_t| reps; Z is symmetric
                let failures = (0..dim)
                    .flat_map(|s| (0..dim).map(move |t| (s, t)))
                    .filter(|&(s, t)| !partitionable(units[s], weights[t]))
                    .count()
                    * 2;
                if best.as_ref().map_or(true, |(f, _, _)| failures < *f) {
                    best = Some((failures, combo.clone(), units));
                    if failures == 0 {
                        break 'outer;
                    }
                }
            }
        }
        if let Some((_, combo, units)) = best {
            return (combo.into_iter().map(|i| words[i].clone()).collect(), units);
        }
    }
    // systematic fallback: reduced kernel basis, pivots are unit positions
    let (reduced, pivots) = h.kernel_basis().row_reduce();
    (reduced.into_rows(), pivots)
}

/// Cartesian product of the choice lists, truncated after `limit` items.
fn cartesian(choices: &[Vec<usize>], limit: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for options in choices {
        out = out
            .iter()
            .flat_map(|prefix| {
                options.iter().map(move |&o| {
                    let mut v = prefix.clone();
                    v.push(o);
                    v
                })
            })
            .take(limit)
            .collect();
    }
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Lexicographic k-subsets of `0..n`.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let c = current.as_mut().unwrap();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

/// Canonical logical basis: `K = k²` pairs with `x_i · z_j = δ_ij`.
///
/// Pair `s·k + t` has X on row `u_s` with pattern `c_t` and Z on column `u_t`
/// with row pattern `c_s`, where `{c_t}` is a unit basis of `ker H` and `u_t`
/// its unit positions.
pub fn logical_basis(code: &CssCode, layout: &LaCrossLayout) -> Vec<LogicalPair> {
    let h = circulant_parity_matrix(layout.spec());
    let (basis, units) = unit_kernel_basis(&h, layout);
    let k = basis.len();
    debug_assert_eq!(k * k, code.k_logical);
    let mut pairs = Vec::with_capacity(k * k);
    for s in 0..k {
        for t in 0..k {
            let x_pattern = basis[t].support();
            let z_pattern = basis[s].support();
            pairs.push(LogicalPair {
                index: s * k + t,
                x_op: layout.main_block(&[units[s]], &x_pattern),
                z_op: layout.main_block(&z_pattern, &[units[t]]),
                x_line: units[s],
                x_pattern,
                z_line: units[t],
                z_pattern,
            });
        }
    }
    pairs
}

/// `Σ_{p∈P} h^X_{(i,p)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacroStabilizer {
    pub row: usize,
    pub pattern: Vec<usize>,
    pub vector: BitVector,
}

pub fn macro_stabilizer(code: &CssCode, layout: &LaCrossLayout, i: usize, pattern: &[usize]) -> Result<MacroStabilizer> {
    if i >= layout.r {
        return Err(Error::OutOfRange(format!("macro-stabilizer row {i} >= {}", layout.r)));
    }
    let mut vector = BitVector::zeros(code.n_qubits);
    for &p in pattern {
        if p >= layout.n {
            return Err(Error::OutOfRange(format!("pattern column {p} >= {}", layout.n)));
        }
        vector.xor_assign(code.h_x.row(layout.x_check(i, p)));
    }
    Ok(MacroStabilizer {
        row: i,
        pattern: pattern.to_vec(),
        vector,
    })
}

/// Z-type analogue: `Σ_{a∈P} h^Z_{(a,j)}`, translating a column pattern.
pub fn macro_stabilizer_z(code: &CssCode, layout: &LaCrossLayout, j: usize, pattern: &[usize]) -> Result<MacroStabilizer> {
    if j >= layout.r {
        return Err(Error::OutOfRange(format!("macro-stabilizer column {j} >= {}", layout.r)));
    }
    let mut vector = BitVector::zeros(code.n_qubits);
    for &a in pattern {
        if a >= layout.n {
            return Err(Error::OutOfRange(format!("pattern row {a} >= {}", layout.n)));
        }
        vector.xor_assign(code.h_z.row(layout.z_check(a, j)));
    }
    Ok(MacroStabilizer {
        row: j,
        pattern: pattern.to_vec(),
        vector,
    })
}

pub fn translate_representative(x: &BitVector, m: &MacroStabilizer) -> BitVector {
    x.xor(&m.vector)
}

/// `d` (or more) disjoint, equivalent copies of one logical operator.
///
/// For the X basis, rep `i` is X on rows `lines[i]` times columns `pattern`;
/// for Z it is Z on columns `lines[i]` times rows `pattern`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentativePartition {
    pub logical_index: usize,
    pub basis: Basis,
    pub canonical: BitVector,
    pub pattern: Vec<usize>,
    pub lines: Vec<Vec<usize>>,
    pub reps: Vec<BitVector>,
    pub rows_spanned: Vec<usize>,
}

impl RepresentativePartition {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn max_rows_spanned(&self) -> usize {
        self.rows_spanned.iter().copied().max().unwrap_or(0)
    }

    /// Data qubit coupled to pattern position `j` in sub-step `l` of rep `i`.
    pub fn qubit(&self, layout: &LaCrossLayout, rep: usize, step: usize, j: usize) -> Option<usize> {
        let line = *self.lines.get(rep)?.get(step)?;
        let p = *self.pattern.get(j)?;
        Some(match self.basis {
            Basis::X => layout.main(line, p),
            Basis::Z => layout.main(p, line),
        })
    }

    pub fn to_document(&self) -> PartitionDocument {
        PartitionDocument {
            logical_index: self.logical_index,
            basis: self.basis,
            reps: self.reps.iter().map(BitVector::support).collect(),
        }
    }
}

/// Serializable summary of a partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDocument {
    pub logical_index: usize,
    pub basis: Basis,
    pub reps: Vec<Vec<usize>>,
}

/// Largest row span accepted without flagging: `max(2, k - 1)`.
pub fn row_span_bound(layout: &LaCrossLayout) -> usize {
    layout.k.saturating_sub(1).max(2)
}

/// Line sets (bit masks over `0..n`) equivalent to the single line `start`:
/// `e_start + Σ_{i∈S} H_i` for every subset `S` of seed rows.
fn equivalent_line_sets(layout: &LaCrossLayout, start: usize) -> Result<Vec<u64>> {
    if layout.n > MAX_SIDE || layout.r > MAX_ENUMERATED_CHECKS {
        return Err(Error::InvalidConfig(format!(
            "representative search supports n <= {MAX_SIDE} and n - k <= {MAX_ENUMERATED_CHECKS}"
        )));
    }
    let seed: Vec<u64> = (0..layout.r).map(|i| (1u64 << i) | (1 << (i + 1)) | (1 << (i + layout.k))).collect();
    // Gray-code walk over all 2^r subsets
    let mut sets = Vec::with_capacity(1 << layout.r);
    let mut cur = 1u64 << start;
    sets.push(cur);
    for g in 1u64..(1 << layout.r) {
        cur ^= seed[g.trailing_zeros() as usize];
        sets.push(cur);
    }
    sets.sort_by_key(|&m| (m.count_ones(), m.trailing_zeros(), m));
    sets.dedup();
    Ok(sets)
}

/// Finds `count` pairwise disjoint line sets including `{start}`, minimizing
/// the largest set and then the total size. Candidates must be sorted.
fn choose_disjoint(cands: &[u64], start: usize, count: usize, max_span: usize) -> Option<Vec<u64>> {
    let canonical = 1u64 << start;
    let pool: Vec<u64> = cands
        .iter()
        .copied()
        .filter(|&m| m != canonical && (m.count_ones() as usize) <= max_span)
        .collect();
    let mut best: Option<(u32, Vec<u64>)> = None;
    let mut chosen = vec![canonical];

    fn dfs(pool: &[u64], from: usize, used: u64, total: u32, count: usize, chosen: &mut Vec<u64>, best: &mut Option<(u32, Vec<u64>)>) {
        if chosen.len() == count {
            if best.as_ref().map_or(true, |(b, _)| total < *b) {
                *best = Some((total, chosen.clone()));
            }
            return;
        }
        let remaining = (count - chosen.len()) as u32;
        for idx in from..pool.len() {
            let m = pool[idx];
            // pool is sorted by size, so this is a valid lower bound
            if let Some((b, _)) = best {
                if total + remaining * m.count_ones() >= *b {
                    return;
                }
            }
            if m & used != 0 {
                continue;
            }
            chosen.push(m);
            dfs(pool, idx + 1, used | m, total + m.count_ones(), count, chosen, best);
            chosen.pop();
        }
    }

    dfs(&pool, 0, canonical, 1, count, &mut chosen, &mut best);
    best.map(|(_, sets)| sets)
}

/// Disjoint representatives of one logical, as many as the canonical
/// operator is long.
pub fn representative_partition(
    code: &CssCode,
    layout: &LaCrossLayout,
    logical: &LogicalPair,
    basis: Basis,
) -> Result<RepresentativePartition> {
    let (_, pattern) = logical.line_and_pattern(basis);
    representative_partition_with_count(code, layout, logical, basis, pattern.len())
}

/// As [`representative_partition`] but with an explicit representative count.
pub fn representative_partition_with_count(
    code: &CssCode,
    layout: &LaCrossLayout,
    logical: &LogicalPair,
    basis: Basis,
    count: usize,
) -> Result<RepresentativePartition> {
    let (start, pattern) = logical.line_and_pattern(basis);
    let fail = |reason: String| Error::PartitionNotFound {
        logical: logical.index,
        basis: basis.as_char(),
        reason,
    };
    if count == 0 {
        return Err(fail("representative count must be positive".into()));
    }
    let cands = equivalent_line_sets(layout, start)?;
    let sets = (1..=layout.n)
        .find_map(|span| choose_disjoint(&cands, start, count, span))
        .ok_or_else(|| fail(format!("no {count} pairwise disjoint line sets among {} candidates", cands.len())))?;

    let mut lines: Vec<Vec<usize>> = sets
        .iter()
        .map(|&m| (0..layout.n).filter(|&b| m >> b & 1 == 1).collect())
        .collect();
    lines.sort();
    let reps: Vec<BitVector> = lines
        .iter()
        .map(|ls| match basis {
            Basis::X => layout.main_block(ls, pattern),
            Basis::Z => layout.main_block(pattern, ls),
        })
        .collect();
    let partition = RepresentativePartition {
        logical_index: logical.index,
        basis,
        canonical: logical.op(basis).clone(),
        pattern: pattern.to_vec(),
        rows_spanned: lines.iter().map(Vec::len).collect(),
        lines,
        reps,
    };
    if !verify_partition_with_count(&partition, code, count) {
        return Err(fail("search produced an inconsistent partition".into()));
    }
    Ok(partition)
}

/// Coset equality and pairwise disjointness, with the standard count.
pub fn verify_partition(partition: &RepresentativePartition, code: &CssCode) -> bool {
    verify_partition_with_count(partition, code, partition.canonical.weight())
}

pub fn verify_partition_with_count(partition: &RepresentativePartition, code: &CssCode, count: usize) -> bool {
    if partition.reps.len() != count {
        return false;
    }
    let stabs = match partition.basis {
        Basis::X => RowSpace::new(&code.h_x),
        Basis::Z => RowSpace::new(&code.h_z),
    };
    let mut seen = BitVector::zeros(code.n_qubits);
    for rep in &partition.reps {
        if rep.len() != code.n_qubits || !rep.is_disjoint(&seen) {
            return false;
        }
        if !stabs.contains(&rep.xor(&partition.canonical)) {
            return false;
        }
        seen.xor_assign(rep);
    }
    true
}
