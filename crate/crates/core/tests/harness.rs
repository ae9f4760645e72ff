use lacross::circuit::ControlKind;
use lacross::harness::{
    build_plan, count_failures, run_experiment, threshold_scan, write_outputs, Crossing, Curve, Experiment, ExperimentConfig, ExperimentSetup, PlanSpec,
    PlanStep, ResultRow, RunManifest,
};
use lacross::codes::build_lacross;
use lacross::sim::check_determinism;

fn small(experiment: Experiment, ps: Vec<f64>, shots: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(4, 2, experiment, ps, shots);
    c.seed = 11;
    c
}

#[test]
fn runs_are_reproducible() {
    let c = small(Experiment::Memory { logical: 0 }, vec![0.01, 0.02], 640);
    let a = run_experiment(&c).unwrap();
    let b = run_experiment(&c).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 2);
    assert!(a.iter().all(|r| r.shots == 640 && r.rounds == 2));
    let other = run_experiment(&ExperimentConfig { seed: 12, ..c }).unwrap();
    assert_ne!(a.iter().map(|r| r.seed).collect::<Vec<_>>(), other.iter().map(|r| r.seed).collect::<Vec<_>>());
}

#[test]
fn reproducible_across_thread_pools() {
    let c = small(Experiment::Memory { logical: 0 }, vec![0.02], 1000);
    let setup = ExperimentSetup::new(&c).unwrap();
    let circuit = setup.circuit(0.02).unwrap();
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = serial.install(|| count_failures(&circuit, 1000, 3, &c.decoder).unwrap());
    let b = wide.install(|| count_failures(&circuit, 1000, 3, &c.decoder).unwrap());
    assert_eq!(a, b);
}

#[test]
fn failures_grow_with_noise() {
    let c = small(Experiment::Memory { logical: 0 }, vec![0.002, 0.05], 2000);
    let rows = run_experiment(&c).unwrap();
    assert!(rows[0].failures < rows[1].failures, "{rows:?}");
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run_experiment(&small(Experiment::Memory { logical: 0 }, vec![0.01], 0)).is_err());
    assert!(run_experiment(&small(Experiment::Memory { logical: 9 }, vec![0.01], 10)).is_err());
    let mut c = small(Experiment::Hadamard { logical: 0, reverse: false }, vec![0.01], 10);
    c.rounds = Some(1);
    assert!(run_experiment(&c).is_err());
}

#[test]
fn hadamard_rounds_match_distance() {
    let c = small(Experiment::Hadamard { logical: 0, reverse: false }, vec![0.01], 64);
    let rows = run_experiment(&c).unwrap();
    assert_eq!(rows[0].rounds, 2);
    let rev = small(Experiment::Hadamard { logical: 0, reverse: true }, vec![0.01], 64);
    assert!(check_determinism(&ExperimentSetup::new(&rev).unwrap().circuit(0.0).unwrap()).is_ok());
}

#[test]
fn generic_plan_two_blocks() {
    // an entangling gate between two blocks: tCNOT, tCNOT, tCZ
    let spec = PlanSpec {
        blocks: 2,
        steps: vec![
            PlanStep { kind: ControlKind::Cnot, logical: 0, block: 0 },
            PlanStep { kind: ControlKind::Cnot, logical: 0, block: 1 },
            PlanStep { kind: ControlKind::Cz, logical: 0, block: 0 },
        ],
    };
    let json = serde_json::to_string(&Experiment::Gadget(spec.clone())).unwrap();
    assert_eq!(serde_json::from_str::<Experiment>(&json).unwrap(), Experiment::Gadget(spec.clone()));
    let (code, layout) = build_lacross(6, 2).unwrap();
    let plan = build_plan(&code, &layout, &spec).unwrap();
    assert_eq!(plan.steps.len(), 3);
    let mut c = ExperimentConfig::new(6, 2, Experiment::Gadget(spec), vec![0.001], 64);
    c.rounds = Some(4);
    let setup = ExperimentSetup::new(&c).unwrap();
    let circuit = setup.circuit(0.0).unwrap();
    let (_, obs) = check_determinism(&circuit).unwrap();
    assert_eq!(obs.len(), 1);
    assert!(run_experiment(&c).is_ok());
}

#[test]
fn outputs_are_written() {
    let c = small(Experiment::Memory { logical: 0 }, vec![0.01], 128);
    let rows = run_experiment(&c).unwrap();
    let manifest = RunManifest::new(&c, rows).unwrap();
    let dir = std::env::temp_dir().join(format!("lacross-harness-{}", std::process::id()));
    write_outputs(&dir, &manifest).unwrap();
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(csv.starts_with("p,shots,failures,p_L,P_L,stderr\n"));
    assert_eq!(csv.lines().count(), 2);
    let back: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(back, manifest);
    assert_eq!(back.circuit_hashes[0].len(), 64);
    std::fs::remove_dir_all(dir).unwrap();
}

fn curve(label: &str, distance: usize, rates: &[(f64, usize)]) -> Curve {
    Curve {
        label: label.into(),
        distance,
        rows: rates.iter().map(|&(p, f)| ResultRow::new(p, 100_000, f, 1, 0).unwrap()).collect(),
    }
}

#[test]
fn threshold_scan_reports_crossings() {
    let ps = [3e-3, 4e-3, 5e-3, 6e-3, 7e-3];
    let lo = curve("small", 4, &ps.map(|p| (p, (p * p * 2.0e8 / 4.0) as usize)));
    let hi = curve("large", 5, &ps.map(|p| (p, (p * p * p * 5.0e10 / 5.0) as usize)));
    let est = threshold_scan(&[hi.clone(), lo.clone()], 200, 1).unwrap();
    assert_eq!(est.len(), 1);
    assert_eq!(est[0].lower_label, "small");
    let p = est[0].crossing.value().unwrap();
    assert!(p > 4e-3 && p < 6e-3, "{p}");
    let (a, b) = est[0].interval.unwrap();
    assert!(a <= p && p <= b);

    let same = threshold_scan(&[lo.clone(), Curve { distance: 5, ..lo.clone() }], 10, 1).unwrap();
    assert_eq!(same[0].crossing, Crossing::Degenerate);
    let never = curve("never", 5, &ps.map(|p| (p, (p * p * 1.0e7 / 4.0) as usize)));
    let none = threshold_scan(&[lo.clone(), never], 10, 1).unwrap();
    assert_eq!(none[0].crossing, Crossing::Unbounded);
    assert!(threshold_scan(&[lo], 10, 1).is_err());
}
