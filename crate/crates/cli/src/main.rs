use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lacross::codes::{build_lacross, CodeDocument};
use lacross::decoder::DecodeConfig;
use lacross::harness::{
    run_experiment, threshold_scan, write_outputs, Curve, Experiment, ExperimentConfig, ExperimentSetup, PlanSpec, RunManifest,
};
use lacross::logicals::{logical_basis, representative_partition, Basis};
use lacross::sim::extract_dem;

#[derive(Parser)]
#[command(name = "lacross-sim", version, about = "La-cross code construction, gadget circuits and BP+OSD Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the parity-check matrices and parameters as JSON.
    BuildCode(CodeArgs),
    /// List the canonical logical operators.
    ShowLogicals(CodeArgs),
    /// Disjoint representatives of one logical.
    Partition {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 0)]
        logical: usize,
        #[arg(long, value_enum, default_value_t = BasisArg::X)]
        basis: BasisArg,
    },
    /// Print the noisy circuit in text form.
    EmitCircuit(CircuitArgs),
    /// Print the detector error model.
    EmitDem(CircuitArgs),
    /// Monte Carlo logical error rates over a list of p values.
    Run(RunArgs),
    /// Crossing of per-round curves for several code sizes.
    Threshold {
        #[command(flatten)]
        run: RunArgs,
        /// Code sizes `n` of the family, smallest distance first.
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
    },
}

#[derive(Args, Clone)]
struct CodeArgs {
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    X,
    Z,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Memory,
    Hadamard,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    #[arg(long, value_enum, default_value_t = ExperimentArg::Memory)]
    experiment: ExperimentArg,
    /// JSON gadget plan file; overrides `--experiment`.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    logical: usize,
    /// Defaults to the code distance.
    #[arg(long)]
    rounds: Option<usize>,
}

impl ExperimentArgs {
    fn experiment(&self) -> Result<Experiment> {
        if let Some(path) = &self.plan {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
            let spec: PlanSpec = serde_json::from_str(&text).context("parsing plan")?;
            return Ok(Experiment::Gadget(spec));
        }
        Ok(match self.experiment {
            ExperimentArg::Memory => Experiment::Memory { logical: self.logical },
            ExperimentArg::Hadamard => Experiment::Hadamard {
                logical: self.logical,
                reverse: false,
            },
        })
    }
}

#[derive(Args, Clone)]
struct CircuitArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, default_value_t = 0.001)]
    p: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON experiment configuration; only `--out` is honoured alongside it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.002,0.003")]
    p: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    bp_iters: usize,
    /// Min-sum scale; 0.3 for memory and 0.2 for gadgets when absent.
    #[arg(long)]
    ms_scale: Option<f64>,
    #[arg(long, default_value_t = 1)]
    osd_order: usize,
    /// Directory for results.csv and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            let mut c = ExperimentConfig::from_json(&text)?;
            if self.out.is_some() {
                c.out = self.out.clone();
            }
            return Ok(c);
        }
        let mut c = ExperimentConfig::new(self.code.n, self.code.k, self.experiment.experiment()?, self.p.clone(), self.shots);
        c.rounds = self.experiment.rounds;
        c.seed = self.seed;
        c.decoder = DecodeConfig {
            max_iterations: self.bp_iters,
            min_sum_scale: self.ms_scale.unwrap_or(c.decoder.min_sum_scale),
            osd_order: self.osd_order,
            always_osd: false,
        };
        c.out = self.out.clone();
        c.validate()?;
        Ok(c)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn circuit_for(args: &CircuitArgs) -> Result<lacross::circuit::Circuit> {
    if !(0.0..=0.1).contains(&args.p) {
        bail!("p = {} outside [0, 0.1]", args.p);
    }
    // the setup only needs a valid p list; the circuit is built at args.p
    let mut config = ExperimentConfig::new(args.code.n, args.code.k, args.experiment.experiment()?, vec![0.1], 1);
    config.rounds = args.experiment.rounds;
    let setup = ExperimentSetup::new(&config)?;
    Ok(setup.circuit(args.p)?)
}

fn run(config: &ExperimentConfig) -> Result<RunManifest> {
    let rows = run_experiment(config)?;
    let manifest = RunManifest::new(config, rows)?;
    if let Some(dir) = &config.out {
        write_outputs(dir, &manifest)?;
    }
    Ok(manifest)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::BuildCode(c) => {
            let (code, layout) = build_lacross(c.n, c.k)?;
            println!("{}", CodeDocument::from_code(&code, &layout).to_json()?);
        }
        Command::ShowLogicals(c) => {
            let (code, layout) = build_lacross(c.n, c.k)?;
            println!("[[{},{},{}]]", code.n_qubits, code.k_logical, code.distance.unwrap_or(0));
            for l in logical_basis(&code, &layout) {
                println!(
                    "L{}: X on main row {} cols {:?} (weight {}); Z on main col {} rows {:?} (weight {})",
                    l.index,
                    l.x_line,
                    l.x_pattern,
                    l.x_op.weight(),
                    l.z_line,
                    l.z_pattern,
                    l.z_op.weight()
                );
            }
        }
        Command::Partition { code: c, logical, basis } => {
            let (code, layout) = build_lacross(c.n, c.k)?;
            let logicals = logical_basis(&code, &layout);
            let pair = logicals.get(logical).with_context(|| format!("logical {logical} of {}", logicals.len()))?;
            let basis = match basis {
                BasisArg::X => Basis::X,
                BasisArg::Z => Basis::Z,
            };
            let part = representative_partition(&code, &layout, pair, basis)?;
            println!("{}", serde_json::to_string_pretty(&part.to_document())?);
        }
        Command::EmitCircuit(args) => emit(&args.out, &circuit_for(&args)?.to_text())?,
        Command::EmitDem(args) => emit(&args.out, &extract_dem(&circuit_for(&args)?)?.to_text())?,
        Command::Run(args) => {
            let manifest = run(&args.config()?)?;
            print!("{}", lacross::harness::rows_to_csv(&manifest.rows));
        }
        Command::Threshold { run: args, ns, bootstrap } => {
            if ns.len() < 2 {
                bail!("threshold needs at least two code sizes");
            }
            let base = args.config()?;
            let mut curves = Vec::new();
            for &n in &ns {
                let mut config = ExperimentConfig { n, ..base.clone() };
                config.out = base.out.as_ref().map(|d| d.join(format!("n{n}")));
                let manifest = run(&config)?;
                let setup = ExperimentSetup::new(&config)?;
                curves.push(Curve {
                    label: format!("[[{},{},{}]]", setup.code.n_qubits, setup.code.k_logical, setup.code.distance.unwrap_or(0)),
                    distance: setup.code.distance.unwrap_or(0),
                    rows: manifest.rows,
                });
            }
            let estimates = threshold_scan(&curves, bootstrap, base.seed)?;
            let report = serde_json::to_string_pretty(&serde_json::json!({ "curves": curves, "crossings": estimates }))?;
            if let Some(dir) = &base.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("threshold.json"), &report)?;
            }
            println!("{report}");
        }
    }
    Ok(())
}
