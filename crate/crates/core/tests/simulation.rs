use lacross::circuit::{build_controlled_logical, build_hadamard_gadget, build_memory_experiment, Circuit, ControlKind, Instruction, NoiseChannel, NoiseModel};
use lacross::codes::{build_bacon_shor, build_lacross};
use lacross::logicals::{logical_basis, representative_partition, Basis};
use lacross::pauli::PauliString;
use lacross::sim::{
    check_determinism, enumerate_mechanisms, extract_dem, noise_locations, propagate_frame, replay_single_error, sample_shots, tableau_simulate,
};

fn small_memory(p: f64) -> Circuit {
    let (code, layout) = build_lacross(4, 2).unwrap();
    build_memory_experiment(&code, &layout, 2, NoiseModel::uniform(p).unwrap()).unwrap()
}

fn small_hadamard(p: f64) -> Circuit {
    let (code, layout) = build_lacross(4, 2).unwrap();
    build_hadamard_gadget(&code, &layout, 0, NoiseModel::uniform(p).unwrap()).unwrap()
}

fn assert_matches_replay(c: &Circuit) {
    let raw = enumerate_mechanisms(c);
    assert!(!raw.is_empty());
    for m in &raw {
        let (d, o) = replay_single_error(c, m.location, &m.pauli).unwrap();
        assert_eq!((d, o), (m.detectors.clone(), m.observables.clone()), "location {} pauli {:?}", m.location, m.pauli);
    }
}

#[test]
fn dem_matches_replay_on_small_memory() {
    assert_matches_replay(&small_memory(0.001));
}

#[test]
fn dem_matches_replay_on_small_hadamard() {
    assert_matches_replay(&small_hadamard(0.001));
}

#[test]
fn gadget_circuits_are_deterministic() {
    let (code, layout) = build_lacross(6, 2).unwrap();
    let mem = build_memory_experiment(&code, &layout, 4, NoiseModel::noiseless()).unwrap();
    let had = build_hadamard_gadget(&code, &layout, 0, NoiseModel::noiseless()).unwrap();
    for c in [&mem, &had] {
        let (dets, obs) = check_determinism(c).unwrap();
        assert!(dets.iter().all(|&d| !d));
        assert_eq!(obs.len(), 1);
    }
}

#[test]
fn tableau_shots_of_noiseless_gadget() {
    let c = small_hadamard(0.0);
    let det_sets: Vec<Vec<usize>> = c
        .instructions()
        .iter()
        .filter_map(|i| match i {
            Instruction::Detector(ms) => Some(ms.clone()),
            _ => None,
        })
        .collect();
    let obs: Vec<usize> = c
        .instructions()
        .iter()
        .find_map(|i| match i {
            Instruction::Observable { measurements, .. } => Some(measurements.clone()),
            _ => None,
        })
        .unwrap();
    // the Bacon-Shor top-row X measurements
    let (code, _) = build_lacross(4, 2).unwrap();
    let bs_start = c.n_measurements() - code.n_qubits - 4;
    let top = [bs_start, bs_start + 1];
    let mut ones = 0;
    let mut first_obs = None;
    let shots = 400;
    for seed in 0..shots {
        let rec = tableau_simulate(&c, seed);
        for d in &det_sets {
            assert!(!d.iter().fold(false, |a, &m| a ^ rec[m]));
        }
        let o = obs.iter().fold(false, |a, &m| a ^ rec[m]);
        assert_eq!(*first_obs.get_or_insert(o), o);
        ones += (rec[top[0]] ^ rec[top[1]]) as usize;
    }
    let frac = ones as f64 / shots as f64;
    assert!((frac - 0.5).abs() < 0.1, "Bacon-Shor X marginal {frac}");
}

#[test]
fn frame_and_tableau_rates_agree() {
    let c = small_memory(0.01);
    let n_det = c.n_detectors();
    let shots = 2000usize;
    let frame = sample_shots(&c, shots, 5).unwrap();
    let frame_rate: f64 = frame.detectors.iter().map(|d| d.weight() as f64).sum::<f64>() / (shots * n_det) as f64;
    let det_sets: Vec<Vec<usize>> = c
        .instructions()
        .iter()
        .filter_map(|i| match i {
            Instruction::Detector(ms) => Some(ms.clone()),
            _ => None,
        })
        .collect();
    let mut fired = 0usize;
    for seed in 0..shots as u64 {
        let rec = tableau_simulate(&c, 1000 + seed);
        fired += det_sets.iter().filter(|d| d.iter().fold(false, |a, &m| a ^ rec[m])).count();
    }
    let tab_rate = fired as f64 / (shots * n_det) as f64;
    let sigma = (frame_rate * (1.0 - frame_rate) / (shots * n_det) as f64).sqrt() * 2f64.sqrt();
    // detector events are correlated within a shot; allow a wider band
    assert!((frame_rate - tab_rate).abs() < 6.0 * sigma + 1e-3, "frame {frame_rate} tableau {tab_rate}");
}

#[test]
fn dem_probabilities_match_sampled_frequencies() {
    // isolated mechanisms of a single Z_ERROR give the detector rate directly
    let c = small_memory(0.02);
    let dem = extract_dem(&c).unwrap();
    let data = sample_shots(&c, 20_000, 9).unwrap();
    let mut expected = vec![0.0f64; c.n_detectors()];
    for m in &dem.mechanisms {
        for &d in &m.detectors {
            // P(odd number of flips) accumulated by the XOR rule
            expected[d] = expected[d] * (1.0 - m.probability) + m.probability * (1.0 - expected[d]);
        }
    }
    for (d, &e) in expected.iter().enumerate() {
        let observed = data.detectors.iter().filter(|v| v.get(d)).count() as f64 / 20_000.0;
        let sigma = (e * (1.0 - e) / 20_000.0).sqrt();
        assert!((observed - e).abs() < 4.0 * sigma + 2e-3, "detector {d}: {observed} vs {e}");
    }
}

fn fragment_with_error(kind: ControlKind, error: NoiseChannel, bs_qubit: usize) -> (Circuit, usize, lacross::logicals::RepresentativePartition) {
    let (code, layout) = build_lacross(6, 2).unwrap();
    let pairs = logical_basis(&code, &layout);
    let bs = build_bacon_shor(4).unwrap();
    let basis = if kind == ControlKind::Cnot { Basis::X } else { Basis::Z };
    let part = representative_partition(&code, &layout, &pairs[0], basis).unwrap();
    let frag = build_controlled_logical(&bs, &layout, &part, kind, NoiseModel::noiseless()).unwrap();
    let n = code.n_qubits;
    let mut c = Circuit::new(frag.n_qubits());
    c.noise(error, 0.1, vec![n + bs_qubit]).unwrap();
    c.append(&frag).unwrap();
    (c, n, part)
}

#[test]
fn phase_flip_on_control_stays_in_bacon_shor() {
    let (c, n, _) = fragment_with_error(ControlKind::Cnot, NoiseChannel::ZError, 0);
    let f = propagate_frame(&c, 0, &PauliString::single_z(1, 0)).unwrap();
    assert!(f.slice(0, n).is_identity());
}

#[test]
fn bit_flip_on_control_spreads_to_a_vertical_pair() {
    let (c, n, part) = fragment_with_error(ControlKind::Cnot, NoiseChannel::XError, 0);
    let f = propagate_frame(&c, 0, &PauliString::single_x(1, 0)).unwrap();
    let data = f.slice(0, n);
    assert!(data.z.is_zero());
    assert_eq!(data.x.weight(), part.rows_spanned[0]);
    assert_eq!(part.rows_spanned[0], 2);
    let (_, layout) = build_lacross(6, 2).unwrap();
    let cols: Vec<usize> = data.x.ones().map(|q| layout.locate(q).2).collect();
    assert!(cols.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn noiseless_locations_listing() {
    let c = small_memory(0.001);
    let locs = noise_locations(&c);
    assert_eq!(locs.len(), c.count_noise(NoiseChannel::Depolarize2) + c.count_noise(NoiseChannel::ZError));
    let quiet = small_memory(0.0);
    assert!(noise_locations(&quiet).is_empty());
    assert!(extract_dem(&quiet).unwrap().is_empty());
}
