//! Circuit builders: syndrome rounds, memory experiments, transversal
//! controlled logicals and Bacon-Shor teleportation gadgets.
//!
//! Detectors are derived by a [`KnownGroup`] that follows the data qubits
//! through every reset, transversal gate and stabilizer measurement. Each
//! measured stabilizer whose value was already fixed by earlier outcomes
//! becomes a detector over exactly those outcomes.

use serde::{Deserialize, Serialize};

use super::tracker::{KnownGroup, MeasurementSet};
use super::{Circuit, Gate, Instruction, NoiseChannel, NoiseModel};
use crate::codes::{BaconShorCode, CssCode, LaCrossLayout};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::logicals::{logical_basis, representative_partition, Basis, RepresentativePartition};
use crate::pauli::PauliString;

/// Largest number of block logicals combined in the observable search.
const MAX_OBSERVABLE_SEARCH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlKind {
    /// Bacon-Shor qubit controls a CX onto an X representative.
    Cnot,
    /// CZ between a Bacon-Shor qubit and a Z representative.
    Cz,
}

impl ControlKind {
    fn gate(self) -> Gate {
        match self {
            ControlKind::Cnot => Gate::Cx,
            ControlKind::Cz => Gate::Cz,
        }
    }

    fn basis(self) -> Basis {
        match self {
            ControlKind::Cnot => Basis::X,
            ControlKind::Cz => Basis::Z,
        }
    }
}

/// One stabilizer measured through its own ancilla.
#[derive(Clone, Debug)]
struct Check {
    ancilla: usize,
    support: Vec<usize>,
    basis: Basis,
}

/// Qubit offsets of one code block inside a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockQubits {
    pub data: usize,
    pub n_data: usize,
    pub x_ancillas: usize,
    pub n_x: usize,
    pub z_ancillas: usize,
    pub n_z: usize,
}

impl BlockQubits {
    fn allocate(next: &mut usize, code: &CssCode) -> Self {
        let b = Self {
            data: *next,
            n_data: code.n_qubits,
            x_ancillas: *next + code.n_qubits,
            n_x: code.h_x.num_rows(),
            z_ancillas: *next + code.n_qubits + code.h_x.num_rows(),
            n_z: code.h_z.num_rows(),
        };
        *next = b.z_ancillas + b.n_z;
        b
    }

    pub fn data_qubits(&self) -> Vec<usize> {
        (self.data..self.data + self.n_data).collect()
    }

    fn checks(&self, code: &CssCode) -> Vec<Check> {
        let mut out = Vec::with_capacity(self.n_x + self.n_z);
        for (i, row) in code.h_x.rows().iter().enumerate() {
            out.push(Check {
                ancilla: self.x_ancillas + i,
                support: row.ones().map(|q| self.data + q).collect(),
                basis: Basis::X,
            });
        }
        for (i, row) in code.h_z.rows().iter().enumerate() {
            out.push(Check {
                ancilla: self.z_ancillas + i,
                support: row.ones().map(|q| self.data + q).collect(),
                basis: Basis::Z,
            });
        }
        out
    }
}

/// Qubit offsets of the Bacon-Shor auxiliary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaconShorQubits {
    pub data: usize,
    pub d: usize,
    pub gauge_ancillas: usize,
}

impl BaconShorQubits {
    fn allocate(next: &mut usize, bs: &BaconShorCode) -> Self {
        let b = Self {
            data: *next,
            d: bs.d,
            gauge_ancillas: *next + bs.n_qubits(),
        };
        *next = b.gauge_ancillas + bs.gauge_z.num_rows();
        b
    }

    pub fn data_qubits(&self) -> Vec<usize> {
        (self.data..self.data + self.d * self.d).collect()
    }

    fn checks(&self, bs: &BaconShorCode) -> Vec<Check> {
        bs.gauge_z
            .rows()
            .iter()
            .enumerate()
            .map(|(g, row)| Check {
                ancilla: self.gauge_ancillas + g,
                support: row.ones().map(|q| self.data + q).collect(),
                basis: Basis::Z,
            })
            .collect()
    }
}

/// Writes instructions and keeps the detector tracker in sync.
struct Emitter {
    circuit: Circuit,
    tracker: KnownGroup,
    /// circuit qubit -> tracked index (ancillas are not tracked)
    tracked: Vec<Option<usize>>,
    noise: NoiseModel,
}

impl Emitter {
    fn new(n_qubits: usize, tracked_qubits: &[usize], noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        let mut tracked = vec![None; n_qubits];
        for (i, &q) in tracked_qubits.iter().enumerate() {
            tracked[q] = Some(i);
        }
        Ok(Self {
            circuit: Circuit::new(n_qubits),
            tracker: KnownGroup::new(tracked_qubits.len()),
            tracked,
            noise,
        })
    }

    fn t(&self, q: usize) -> usize {
        self.tracked[q].expect("qubit is tracked")
    }

    fn pauli(&self, qubits: &[usize], basis: Basis) -> PauliString {
        let v = BitVector::from_indices(self.tracker.n_qubits(), qubits.iter().map(|&q| self.t(q)));
        match basis {
            Basis::X => PauliString::x_type(v),
            Basis::Z => PauliString::z_type(v),
        }
    }

    fn single(&self, q: usize, basis: Basis) -> PauliString {
        self.pauli(&[q], basis)
    }

    fn reset(&mut self, qubits: Vec<usize>, basis: Basis) -> Result<()> {
        let tracked: Vec<usize> = qubits.iter().copied().filter(|&q| self.tracked[q].is_some()).collect();
        match basis {
            Basis::Z => {
                self.circuit.gate(Gate::ResetZ, qubits)?;
            }
            Basis::X => {
                self.circuit.gate(Gate::ResetX, qubits.clone())?;
                if let Some(p) = self.noise.meas_reset() {
                    self.circuit.noise(NoiseChannel::ZError, p, qubits)?;
                }
            }
        }
        for q in tracked {
            let p = self.single(q, basis);
            self.tracker.reset(&p);
        }
        Ok(())
    }

    fn two_qubit(&mut self, gate: Gate, pairs: &[(usize, usize)]) -> Result<()> {
        for &(a, b) in pairs {
            self.circuit.gate(gate, vec![a, b])?;
            if let Some(p) = self.noise.two_qubit() {
                self.circuit.noise(NoiseChannel::Depolarize2, p, vec![a, b])?;
            }
            if let (Some(ta), Some(tb)) = (self.tracked[a], self.tracked[b]) {
                match gate {
                    Gate::Cx => self.tracker.apply_cx(ta, tb),
                    Gate::Cz => self.tracker.apply_cz(ta, tb),
                    _ => unreachable!("two-qubit gate"),
                }
            }
        }
        Ok(())
    }

    /// One round over `checks`: X-type layer first, then Z-type, each check
    /// coupling its support in ascending order.
    fn round(&mut self, checks: &[Check]) -> Result<Vec<usize>> {
        let ancillas: Vec<usize> = checks.iter().map(|c| c.ancilla).collect();
        self.circuit.gate(Gate::ResetX, ancillas.clone())?;
        if let Some(p) = self.noise.meas_reset() {
            self.circuit.noise(NoiseChannel::ZError, p, ancillas.clone())?;
        }
        for layer in [Basis::X, Basis::Z] {
            for c in checks.iter().filter(|c| c.basis == layer) {
                for &q in &c.support {
                    let gate = if layer == Basis::X { Gate::Cx } else { Gate::Cz };
                    self.circuit.gate(gate, vec![c.ancilla, q])?;
                    if let Some(p) = self.noise.two_qubit() {
                        self.circuit.noise(NoiseChannel::Depolarize2, p, vec![c.ancilla, q])?;
                    }
                }
            }
        }
        if let Some(p) = self.noise.meas_reset() {
            self.circuit.noise(NoiseChannel::ZError, p, ancillas.clone())?;
        }
        let ms: Vec<usize> = self.circuit.gate(Gate::MeasureX, ancillas)?.collect();

        let paulis: Vec<PauliString> = checks.iter().map(|c| self.pauli(&c.support, c.basis)).collect();
        let known: Vec<Option<MeasurementSet>> = paulis.iter().map(|p| self.tracker.decompose(p)).collect();
        self.tracker.begin_batch();
        for (p, &m) in paulis.iter().zip(&ms) {
            self.tracker.measure(p, m);
        }
        for (set, &m) in known.into_iter().zip(&ms) {
            if let Some(mut set) = set {
                set.toggle(m);
                self.circuit.detector(set.into_vec())?;
            }
        }
        Ok(ms)
    }

    /// Transversal readout of `qubits`. Each operator in `checks` (a subset of
    /// the measured qubits) becomes a detector against its prior value.
    fn measure_all(&mut self, qubits: Vec<usize>, basis: Basis, checks: &[Vec<usize>]) -> Result<Vec<usize>> {
        let gate = match basis {
            Basis::Z => Gate::MeasureZ,
            Basis::X => {
                if let Some(p) = self.noise.meas_reset() {
                    self.circuit.noise(NoiseChannel::ZError, p, qubits.clone())?;
                }
                Gate::MeasureX
            }
        };
        let known: Vec<Option<MeasurementSet>> = checks
            .iter()
            .map(|support| self.tracker.decompose(&self.pauli(support, basis)))
            .collect();
        let ms: Vec<usize> = self.circuit.gate(gate, qubits.clone())?.collect();
        self.tracker.begin_batch();
        for (&q, &m) in qubits.iter().zip(&ms) {
            let p = self.single(q, basis);
            self.tracker.measure(&p, m);
        }
        let index_of = |q: usize| ms[qubits.iter().position(|&x| x == q).expect("check inside measured set")];
        for (support, set) in checks.iter().zip(known) {
            if let Some(mut set) = set {
                for &q in support {
                    set.toggle(index_of(q));
                }
                self.circuit.detector(set.into_vec())?;
            }
        }
        Ok(ms)
    }
}

fn stabilizer_supports(m: &BitMatrix, offset: usize) -> Vec<Vec<usize>> {
    m.rows().iter().map(|r| r.ones().map(|q| q + offset).collect()).collect()
}

/// A single syndrome-extraction round on a fresh register: data `0..N`, then
/// one ancilla per X check and per Z check. No detectors are attached.
pub fn build_syndrome_round(code: &CssCode, _layout: &LaCrossLayout, noise: NoiseModel) -> Result<Circuit> {
    noise.validate()?;
    let mut next = 0;
    let block = BlockQubits::allocate(&mut next, code);
    let mut em = Emitter::new(next, &block.data_qubits(), noise)?;
    let checks = block.checks(code);
    em.round(&checks)?;
    // a fragment carries no annotations
    let mut out = Circuit::new(next);
    for inst in em.circuit.instructions() {
        if !matches!(inst, Instruction::Detector(_)) {
            out.push(inst.clone())?;
        }
    }
    Ok(out)
}

/// Z-basis memory: reset, `rounds` syndrome rounds, transversal readout, with
/// logical `0` as the observable.
pub fn build_memory_experiment(code: &CssCode, layout: &LaCrossLayout, rounds: usize, noise: NoiseModel) -> Result<Circuit> {
    build_memory_experiment_for(code, layout, rounds, noise, 0)
}

pub fn build_memory_experiment_for(
    code: &CssCode,
    layout: &LaCrossLayout,
    rounds: usize,
    noise: NoiseModel,
    logical_index: usize,
) -> Result<Circuit> {
    if rounds == 0 {
        return Err(Error::InvalidConfig("memory experiment needs at least one round".into()));
    }
    let logicals = logical_basis(code, layout);
    let logical = logicals
        .get(logical_index)
        .ok_or_else(|| Error::OutOfRange(format!("logical {logical_index} of {}", logicals.len())))?;
    let mut next = 0;
    let block = BlockQubits::allocate(&mut next, code);
    let mut em = Emitter::new(next, &block.data_qubits(), noise)?;
    let checks = block.checks(code);

    em.reset(block.data_qubits(), Basis::Z)?;
    for _ in 0..rounds {
        em.round(&checks)?;
    }
    let obs_support: Vec<usize> = logical.z_op.ones().map(|q| block.data + q).collect();
    let obs_prior = em
        .tracker
        .decompose(&em.pauli(&obs_support, Basis::Z))
        .ok_or(Error::NonDeterministicObservable(0))?;
    let ms = em.measure_all(block.data_qubits(), Basis::Z, &stabilizer_supports(&code.h_z, block.data))?;
    let mut obs = obs_prior;
    for &q in &obs_support {
        obs.toggle(ms[q - block.data]);
    }
    em.circuit.observable(0, obs.into_vec())?;
    Ok(em.circuit)
}

/// Sub-steps of a transversal controlled logical: entry `l` lists
/// `(bacon_shor_qubit, data_qubit)` pairs, local to each code.
pub fn controlled_pairing(bs: &BaconShorCode, layout: &LaCrossLayout, partition: &RepresentativePartition) -> Result<Vec<Vec<(usize, usize)>>> {
    if partition.len() != bs.d || partition.pattern.len() != bs.d {
        return Err(Error::InvalidPartition(format!(
            "partition has {} reps of length {}, Bacon-Shor side is {}",
            partition.len(),
            partition.pattern.len(),
            bs.d
        )));
    }
    let steps = partition.max_rows_spanned();
    let mut out = vec![Vec::new(); steps];
    for (l, sub) in out.iter_mut().enumerate() {
        for i in 0..partition.len() {
            if l >= partition.lines[i].len() {
                continue;
            }
            for j in 0..bs.d {
                let data = partition.qubit(layout, i, l, j).expect("indices within partition");
                sub.push((bs.qubit(i, j), data));
            }
        }
    }
    Ok(out)
}

/// Transversal controlled gate between a Bacon-Shor block and one partition.
/// Qubits: LDPC data `0..N`, Bacon-Shor `N..N+d²`.
pub fn build_controlled_logical(
    bs: &BaconShorCode,
    layout: &LaCrossLayout,
    partition: &RepresentativePartition,
    kind: ControlKind,
    noise: NoiseModel,
) -> Result<Circuit> {
    noise.validate()?;
    if partition.basis != kind.basis() {
        return Err(Error::InvalidPartition(format!("{kind:?} needs a {:?}-basis partition", kind.basis())));
    }
    let pairing = controlled_pairing(bs, layout, partition)?;
    let n = layout.n_qubits();
    let mut em = Emitter::new(n + bs.n_qubits(), &[], noise)?;
    emit_controlled(&mut em, kind, &pairing, n, 0)?;
    Ok(em.circuit)
}

fn emit_controlled(em: &mut Emitter, kind: ControlKind, pairing: &[Vec<(usize, usize)>], bs_offset: usize, data_offset: usize) -> Result<()> {
    for (l, sub) in pairing.iter().enumerate() {
        if l > 0 {
            em.circuit.tick();
        }
        let pairs: Vec<(usize, usize)> = sub.iter().map(|&(b, q)| (bs_offset + b, data_offset + q)).collect();
        em.two_qubit(kind.gate(), &pairs)?;
    }
    Ok(())
}

/// Conjugates `pauli` through every CX, CZ and H of `circuit`, ignoring
/// resets, measurements and noise.
pub fn propagate_through_gates(circuit: &Circuit, pauli: &mut PauliString) {
    for inst in circuit.instructions() {
        if let Instruction::Gate { gate, targets } = inst {
            match gate {
                Gate::Cx => targets.chunks(2).for_each(|c| pauli.apply_cx(c[0], c[1])),
                Gate::Cz => targets.chunks(2).for_each(|c| pauli.apply_cz(c[0], c[1])),
                Gate::H => targets.iter().for_each(|&q| pauli.apply_h(q)),
                _ => {}
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct GadgetBlock {
    pub code: CssCode,
    pub layout: LaCrossLayout,
}

#[derive(Clone, Debug)]
pub struct GadgetStep {
    pub kind: ControlKind,
    pub block: usize,
    pub partition: RepresentativePartition,
    pub pairing: Vec<Vec<(usize, usize)>>,
}

/// A teleported-gate protocol: Bacon-Shor `|+⟩` prep, controlled steps with
/// error-correction rounds between them, and transversal readout.
#[derive(Clone, Debug)]
pub struct GadgetPlan {
    pub bs_code: BaconShorCode,
    pub blocks: Vec<GadgetBlock>,
    pub steps: Vec<GadgetStep>,
    /// LDPC rounds after `|0⟩` preparation, before the Bacon-Shor prep.
    pub rounds_before: usize,
    /// Joint LDPC + Bacon-Shor rounds between consecutive steps.
    pub rounds_between: usize,
    /// LDPC rounds after the last step.
    pub rounds_after: usize,
    pub final_basis: Basis,
}

impl GadgetPlan {
    pub fn new(bs_code: BaconShorCode, blocks: Vec<GadgetBlock>) -> Self {
        Self {
            bs_code,
            blocks,
            steps: Vec::new(),
            rounds_before: 1,
            rounds_between: 1,
            rounds_after: 0,
            final_basis: Basis::X,
        }
    }

    pub fn add_step(&mut self, kind: ControlKind, block: usize, partition: RepresentativePartition) -> Result<()> {
        let b = self
            .blocks
            .get(block)
            .ok_or_else(|| Error::OutOfRange(format!("block {block} of {}", self.blocks.len())))?;
        if partition.basis != kind.basis() {
            return Err(Error::InvalidPartition(format!("{kind:?} needs a {:?}-basis partition", kind.basis())));
        }
        let pairing = controlled_pairing(&self.bs_code, &b.layout, &partition)?;
        self.steps.push(GadgetStep {
            kind,
            block,
            partition,
            pairing,
        });
        Ok(())
    }

    /// Hadamard-type rotation of one logical: tCNOT onto its X partition,
    /// then tCZ onto its Z partition (reversed for the inverse rotation).
    pub fn hadamard(code: &CssCode, layout: &LaCrossLayout, logical_index: usize, reverse: bool) -> Result<Self> {
        let logicals = logical_basis(code, layout);
        let logical = logicals
            .get(logical_index)
            .ok_or_else(|| Error::OutOfRange(format!("logical {logical_index} of {}", logicals.len())))?;
        let px = representative_partition(code, layout, logical, Basis::X)?;
        let pz = representative_partition(code, layout, logical, Basis::Z)?;
        if px.len() != pz.len() {
            return Err(Error::InvalidPartition(format!(
                "X and Z partitions of logical {logical_index} have {} and {} reps; a square Bacon-Shor block needs equal counts",
                px.len(),
                pz.len()
            )));
        }
        let d = code.distance.unwrap_or(px.len());
        let bs = crate::codes::build_bacon_shor(px.len())?;
        let mut plan = GadgetPlan::new(
            bs,
            vec![GadgetBlock {
                code: code.clone(),
                layout: *layout,
            }],
        );
        plan.rounds_after = d.saturating_sub(2);
        let mut steps = vec![(ControlKind::Cnot, px), (ControlKind::Cz, pz)];
        if reverse {
            steps.reverse();
        }
        for (kind, part) in steps {
            plan.add_step(kind, 0, part)?;
        }
        Ok(plan)
    }
}

/// A built gadget circuit with its qubit map.
#[derive(Clone, Debug)]
pub struct GadgetCircuit {
    pub circuit: Circuit,
    pub blocks: Vec<BlockQubits>,
    pub bacon_shor: BaconShorQubits,
    /// Block logicals multiplied into the Bacon-Shor X logical to form the
    /// observable, as `(block, logical index)`.
    pub observable_logicals: Vec<(usize, usize)>,
}

pub fn build_generic_gadget(plan: &GadgetPlan, noise: NoiseModel) -> Result<Circuit> {
    Ok(build_gadget_detailed(plan, noise)?.circuit)
}

pub fn build_hadamard_gadget(code: &CssCode, layout: &LaCrossLayout, logical_index: usize, noise: NoiseModel) -> Result<Circuit> {
    build_generic_gadget(&GadgetPlan::hadamard(code, layout, logical_index, false)?, noise)
}

pub fn build_gadget_detailed(plan: &GadgetPlan, noise: NoiseModel) -> Result<GadgetCircuit> {
    if plan.steps.is_empty() {
        return Err(Error::InvalidConfig("gadget plan has no steps".into()));
    }
    let bs = &plan.bs_code;
    let mut next = 0;
    let blocks: Vec<BlockQubits> = plan.blocks.iter().map(|b| BlockQubits::allocate(&mut next, &b.code)).collect();
    let bsq = BaconShorQubits::allocate(&mut next, bs);
    let mut tracked: Vec<usize> = blocks.iter().flat_map(BlockQubits::data_qubits).collect();
    tracked.extend(bsq.data_qubits());
    let mut em = Emitter::new(next, &tracked, noise)?;

    let block_checks: Vec<Check> = blocks
        .iter()
        .zip(&plan.blocks)
        .flat_map(|(q, b)| q.checks(&b.code))
        .collect();
    let bs_checks = bsq.checks(bs);
    let mut joint = block_checks.clone();
    joint.extend(bs_checks.iter().cloned());

    for b in &blocks {
        em.reset(b.data_qubits(), Basis::Z)?;
    }
    for _ in 0..plan.rounds_before {
        em.round(&block_checks)?;
    }
    em.reset(bsq.data_qubits(), Basis::X)?;
    em.round(&bs_checks)?;
    for (s, step) in plan.steps.iter().enumerate() {
        if s > 0 {
            for _ in 0..plan.rounds_between {
                em.round(&joint)?;
            }
        }
        emit_controlled(&mut em, step.kind, &step.pairing, bsq.data, blocks[step.block].data)?;
    }
    for _ in 0..plan.rounds_after {
        em.round(&block_checks)?;
    }

    // observable: Bacon-Shor X logical times the lightest deterministic
    // product of block logicals in the readout basis
    let bs_top: Vec<usize> = bs.logical_x.ones().map(|q| bsq.data + q).collect();
    let mut candidates: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (bi, (bq, b)) in blocks.iter().zip(&plan.blocks).enumerate() {
        for pair in logical_basis(&b.code, &b.layout) {
            let support = pair.op(plan.final_basis).ones().map(|q| bq.data + q).collect();
            candidates.push((bi, pair.index, support));
        }
    }
    if candidates.len() > MAX_OBSERVABLE_SEARCH {
        return Err(Error::InvalidConfig(format!(
            "observable search over {} block logicals exceeds {MAX_OBSERVABLE_SEARCH}",
            candidates.len()
        )));
    }
    let combo_pauli = |mask: u32, em: &Emitter| -> PauliString {
        let mut p = em.pauli(&bs_top, Basis::X);
        for (i, (_, _, support)) in candidates.iter().enumerate() {
            if mask >> i & 1 == 1 {
                p.mul_assign(&em.pauli(support, plan.final_basis));
            }
        }
        p
    };
    let mut masks: Vec<u32> = (0..1u32 << candidates.len()).collect();
    masks.sort_by_key(|&m| (combo_pauli(m, &em).weight(), m));
    let (mask, prior) = masks
        .iter()
        .find_map(|&m| em.tracker.decompose(&combo_pauli(m, &em)).map(|set| (m, set)))
        .ok_or(Error::NonDeterministicObservable(0))?;
    let observable_pauli = combo_pauli(mask, &em);

    let bs_stabs = stabilizer_supports(&bs.stabilizers_x, bsq.data);
    let bs_ms = em.measure_all(bsq.data_qubits(), Basis::X, &bs_stabs)?;
    let mut block_ms = Vec::new();
    for (bq, b) in blocks.iter().zip(&plan.blocks) {
        let stabs = match plan.final_basis {
            Basis::X => stabilizer_supports(&b.code.h_x, bq.data),
            Basis::Z => stabilizer_supports(&b.code.h_z, bq.data),
        };
        block_ms.push(em.measure_all(bq.data_qubits(), plan.final_basis, &stabs)?);
    }

    let mut obs = prior;
    let support: Vec<usize> = observable_pauli.x.ones().chain(observable_pauli.z.ones()).collect();
    for t in support {
        let q = tracked[t];
        let m = if q >= bsq.data {
            bs_ms[q - bsq.data]
        } else {
            let bi = blocks.iter().position(|b| q >= b.data && q < b.data + b.n_data).unwrap();
            block_ms[bi][q - blocks[bi].data]
        };
        obs.toggle(m);
    }
    em.circuit.observable(0, obs.into_vec())?;

    Ok(GadgetCircuit {
        circuit: em.circuit,
        blocks,
        bacon_shor: bsq,
        observable_logicals: candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, (b, l, _))| (*b, *l))
            .collect(),
    })
}
