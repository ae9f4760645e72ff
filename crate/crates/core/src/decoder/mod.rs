//! BP+OSD decoding of detector error models.
//!
//! Checks are detectors and variables are mechanisms. Normalized min-sum BP
//! runs first; when its hard decision misses the syndrome, ordered-statistics
//! post-processing returns a syndrome-consistent correction.

mod bp;
mod osd;

use serde::{Deserialize, Serialize};

pub use bp::{bp_minsum, BpOutput};
pub use osd::osd_postprocess;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::sim::DetectorErrorModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub max_iterations: usize,
    pub min_sum_scale: f64,
    /// 0 keeps the information-set solution, 1 adds the single-flip sweep.
    pub osd_order: usize,
    /// Run OSD even when BP converges.
    pub always_osd: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            max_iterations: 4,
            min_sum_scale: 0.3,
            osd_order: 1,
            always_osd: false,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_sum_scale > 0.0 && self.min_sum_scale <= 1.0) {
            return Err(Error::InvalidConfig(format!("min-sum scale {} outside (0, 1]", self.min_sum_scale)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("BP needs at least one iteration".into()));
        }
        if self.osd_order > 1 {
            return Err(Error::InvalidConfig(format!("OSD order {} not supported (0 or 1)", self.osd_order)));
        }
        Ok(())
    }
}

/// Sparse check/variable incidence of a DEM with priors.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n_checks: usize,
    n_observables: usize,
    /// Detectors flipped by mechanism `v`: `col_rows[col_ptr[v]..col_ptr[v + 1]]`.
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    observables: Vec<Vec<usize>>,
    priors: Vec<f64>,
    /// `ln((1 - p) / p)` per mechanism.
    weights: Vec<f64>,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
    rank: usize,
    /// Mechanisms sharing a detector column, as `(class, representative)`: the
    /// representative is the most likely member. Singletons are omitted.
    twins: Vec<(usize, usize)>,
    twin_class: Vec<usize>,
}

const NO_CLASS: usize = usize::MAX;

impl TannerGraph {
    pub fn from_dem(dem: &DetectorErrorModel) -> Result<Self> {
        let mut by_check: Vec<Vec<usize>> = vec![Vec::new(); dem.n_detectors];
        for (v, m) in dem.mechanisms.iter().enumerate() {
            if !(m.probability > 0.0 && m.probability <= 0.5) {
                return Err(Error::InvalidConfig(format!("mechanism {v} has probability {} outside (0, 0.5]", m.probability)));
            }
            for &d in &m.detectors {
                if d >= dem.n_detectors {
                    return Err(Error::OutOfRange(format!("detector {d} of {}", dem.n_detectors)));
                }
                by_check[d].push(v);
            }
        }
        let n_vars = dem.mechanisms.len();
        let mut check_ptr = vec![0];
        let mut edge_var = Vec::new();
        let mut var_edge_lists: Vec<Vec<usize>> = vec![Vec::new(); n_vars];
        for vars in &by_check {
            for &v in vars {
                var_edge_lists[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_ptr.push(edge_var.len());
        }
        let mut var_ptr = vec![0];
        let mut var_edges = Vec::with_capacity(edge_var.len());
        for list in &var_edge_lists {
            var_edges.extend_from_slice(list);
            var_ptr.push(var_edges.len());
        }
        let mut col_ptr = vec![0];
        let mut col_rows = Vec::with_capacity(edge_var.len());
        for m in &dem.mechanisms {
            col_rows.extend_from_slice(&m.detectors);
            col_ptr.push(col_rows.len());
        }
        let h = BitMatrix::from_row_indices(n_vars, &by_check);
        let weights: Vec<f64> = dem.mechanisms.iter().map(|m| ((1.0 - m.probability) / m.probability).ln()).collect();
        let mut classes: std::collections::HashMap<&[usize], Vec<usize>> = std::collections::HashMap::new();
        for (v, m) in dem.mechanisms.iter().enumerate() {
            classes.entry(&m.detectors).or_default().push(v);
        }
        let mut groups: Vec<Vec<usize>> = classes.into_values().filter(|g| g.len() > 1).collect();
        groups.sort_unstable();
        let mut twin_class = vec![NO_CLASS; n_vars];
        let mut twins = Vec::with_capacity(groups.len());
        for (c, g) in groups.iter().enumerate() {
            for &v in g {
                twin_class[v] = c;
            }
            let rep = *g.iter().min_by(|&&a, &&b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b))).expect("non-empty class");
            twins.push((c, rep));
        }
        Ok(Self {
            n_checks: dem.n_detectors,
            n_observables: dem.n_observables,
            observables: dem.mechanisms.iter().map(|m| m.observables.clone()).collect(),
            priors: dem.mechanisms.iter().map(|m| m.probability).collect(),
            weights,
            col_ptr,
            col_rows,
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
            rank: h.rank(),
            twins,
            twin_class,
        })
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_vars(&self) -> usize {
        self.priors.len()
    }

    pub fn n_observables(&self) -> usize {
        self.n_observables
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn column(&self, v: usize) -> &[usize] {
        &self.col_rows[self.col_ptr[v]..self.col_ptr[v + 1]]
    }

    pub fn observables_of(&self, v: usize) -> &[usize] {
        &self.observables[v]
    }

    /// Sum of `ln((1 - p) / p)` over the flipped mechanisms.
    pub fn score(&self, correction: &BitVector) -> f64 {
        correction.ones().map(|v| self.weights[v]).sum()
    }

    pub fn syndrome(&self, correction: &BitVector) -> BitVector {
        let mut s = BitVector::zeros(self.n_checks);
        for v in correction.ones() {
            for &d in self.column(v) {
                s.toggle(d);
            }
        }
        s
    }

    /// Replaces flipped mechanisms with identical columns by their parity:
    /// the most likely member when odd, nothing when even. The syndrome is
    /// unchanged and the score can only drop.
    pub fn reduce_twins(&self, correction: &mut BitVector) {
        if self.twins.is_empty() {
            return;
        }
        let mut parity: Vec<Option<bool>> = vec![None; self.twins.len()];
        let flipped: Vec<usize> = correction.ones().filter(|&v| self.twin_class[v] != NO_CLASS).collect();
        for v in flipped {
            let p = &mut parity[self.twin_class[v]];
            *p = Some(!p.unwrap_or(false));
            correction.set(v, false);
        }
        for (c, p) in parity.into_iter().enumerate() {
            if p == Some(true) {
                correction.set(self.twins[c].1, true);
            }
        }
    }

    pub fn predicted_observables(&self, correction: &BitVector) -> BitVector {
        let mut o = BitVector::zeros(self.n_observables);
        for v in correction.ones() {
            for &l in &self.observables[v] {
                o.toggle(l);
            }
        }
        o
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub correction: BitVector,
    pub observables: BitVector,
    pub converged: bool,
    pub used_osd: bool,
    /// BP posterior log-likelihood ratios.
    pub posterior: Vec<f64>,
}

/// BP, then OSD when BP misses the syndrome (or always, per config).
pub fn decode(graph: &TannerGraph, syndrome: &BitVector, config: &DecodeConfig) -> Result<DecodeResult> {
    config.validate()?;
    if syndrome.len() != graph.n_checks {
        return Err(Error::InvalidConfig(format!("syndrome has {} bits, graph has {} checks", syndrome.len(), graph.n_checks)));
    }
    let bp = bp_minsum(graph, syndrome, config);
    let (mut correction, used_osd) = if bp.converged && !config.always_osd {
        (bp.hard, false)
    } else {
        (osd_postprocess(graph, &bp.posterior, syndrome, config)?, true)
    };
    // identical columns get identical BP messages and flip together
    graph.reduce_twins(&mut correction);
    Ok(DecodeResult {
        observables: graph.predicted_observables(&correction),
        correction,
        converged: bp.converged,
        used_osd,
        posterior: bp.posterior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ErrorMechanism;

    /// Repetition code over three bits with two checks.
    pub(super) fn repetition_dem() -> DetectorErrorModel {
        let m = |p: f64, d: Vec<usize>, o: Vec<usize>| ErrorMechanism {
            probability: p,
            detectors: d,
            observables: o,
        };
        DetectorErrorModel {
            n_detectors: 2,
            n_observables: 1,
            mechanisms: vec![m(0.1, vec![0], vec![0]), m(0.1, vec![0, 1], vec![]), m(0.1, vec![1], vec![])],
        }
    }

    #[test]
    fn graph_shape() {
        let g = TannerGraph::from_dem(&repetition_dem()).unwrap();
        assert_eq!((g.n_checks(), g.n_vars(), g.rank()), (2, 3, 2));
        assert_eq!(g.syndrome(&BitVector::from_indices(3, [1])), BitVector::from_indices(2, [0, 1]));
    }

    #[test]
    fn config_validation() {
        assert!(DecodeConfig::default().validate().is_ok());
        for bad in [
            DecodeConfig { min_sum_scale: 0.0, ..Default::default() },
            DecodeConfig { min_sum_scale: 1.5, ..Default::default() },
            DecodeConfig { max_iterations: 0, ..Default::default() },
            DecodeConfig { osd_order: 2, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn zero_syndrome_decodes_to_nothing() {
        let g = TannerGraph::from_dem(&repetition_dem()).unwrap();
        let r = decode(&g, &BitVector::zeros(2), &DecodeConfig::default()).unwrap();
        assert!(r.correction.is_zero() && r.observables.is_zero() && r.converged && !r.used_osd);
    }

    #[test]
    fn each_single_error_is_recovered() {
        let dem = repetition_dem();
        let g = TannerGraph::from_dem(&dem).unwrap();
        for (v, m) in dem.mechanisms.iter().enumerate() {
            let s = BitVector::from_indices(2, m.detectors.iter().copied());
            let r = decode(&g, &s, &DecodeConfig::default()).unwrap();
            assert_eq!(r.correction, BitVector::from_indices(3, [v]));
            let forced = decode(&g, &s, &DecodeConfig { always_osd: true, ..Default::default() }).unwrap();
            assert_eq!(forced.correction, r.correction);
        }
    }

    #[test]
    fn twin_columns_reduce_to_parity() {
        let mut dem = repetition_dem();
        dem.mechanisms.push(crate::sim::ErrorMechanism {
            probability: 0.2,
            detectors: vec![0],
            observables: vec![],
        });
        let g = TannerGraph::from_dem(&dem).unwrap();
        let mut c = BitVector::from_indices(4, [0, 1, 3]);
        g.reduce_twins(&mut c);
        assert_eq!(c, BitVector::from_indices(4, [1]));
        let mut c = BitVector::from_indices(4, [0]);
        g.reduce_twins(&mut c);
        // mechanism 3 is the more likely member of the class
        assert_eq!(c, BitVector::from_indices(4, [3]));
    }

    #[test]
    fn wrong_syndrome_length_is_rejected() {
        let g = TannerGraph::from_dem(&repetition_dem()).unwrap();
        assert!(decode(&g, &BitVector::zeros(3), &DecodeConfig::default()).is_err());
    }
}
