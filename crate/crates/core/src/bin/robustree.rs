use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use robustree::bench::{self, ExperimentConfig, SweepResult};
use robustree::bounds::{self, BoundCriterion, BoundQuery, MonteCarloOutcome};
use robustree::criteria::{noisy_gain_closed_form, noisy_split_stats, SplitFractions};
use robustree::data::{load_table, Synthetic, TableOptions};
use robustree::forest::{fit_forest, fit_forest_serial};
use robustree::noise::inject_noise;
use robustree::tree::fit_tree;
use robustree::{
    Classifier, Criterion, DecisionTree, Error, ForestMode, ForestParams, NoiseModel, RandomForest, TreeParams,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ASSERTION: u8 = 3;

/// Decision trees and random forests under label noise.
#[derive(Parser)]
#[command(name = "robustree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    Generate {
        /// cb2, cb4, linear3 or linear4.
        #[arg(long)]
        dataset: Synthetic,
        /// Sample count (defaults to the dataset's benchmark size).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Flip the labels of a dataset under a noise model.
    Noise {
        #[command(flatten)]
        input: InputArgs,
        /// sym:<eta>, cc:<eta_pos>,<eta_neg> or nu:affine:<a>,<b>.
        #[arg(long)]
        model: NoiseModel,
        #[arg(long)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write the flip mask, one 0/1 per line.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Fit a tree or forest and write it in the text model format.
    Train {
        #[command(flatten)]
        input: InputArgs,
        /// tree, forest (or greedy) or prf (or purely-random).
        #[arg(long, default_value = "tree")]
        learner: String,
        /// gini, entropy, mc or twoing.
        #[arg(long, default_value = "gini")]
        criterion: Criterion,
        #[arg(long, default_value_t = 1)]
        min_leaf: usize,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        /// Splits per tree of a purely random forest.
        #[arg(long, default_value_t = 32)]
        k_splits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Report the accuracy of a saved model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Accuracy of each learner under each noise model.
    Sweep(SweepArgs),
    /// The noise sweep repeated over minimum leaf sizes.
    LeafSweep(SweepArgs),
    /// The noise sweep repeated over training-set sizes.
    SizeSweep(SweepArgs),
    /// Sample-size bounds checked by simulation.
    Bounds {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Entropy gain changing its preference under symmetric noise.
    Counterexample {
        #[arg(long, default_value_t = 0.4)]
        eta: f64,
    },
    /// Fast internal consistency checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Delimited table; labels are mapped so the numerically (or else
    /// lexicographically) larger value becomes +1.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The file has no header row.
    #[arg(long)]
    no_header: bool,
    /// Zero-based label column (default: last).
    #[arg(long)]
    label_column: Option<usize>,
}

impl InputArgs {
    fn options(&self) -> TableOptions {
        TableOptions {
            delimiter: self.delimiter,
            has_header: !self.no_header,
            label_column: self.label_column,
        }
    }
}

/// Every config key has a flag; flags override the config file.
#[derive(Args)]
struct SweepArgs {
    /// key = value file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// cb2, cb4, linear3, linear4 or file:<path>; repeatable.
    #[arg(long)]
    dataset: Vec<String>,
    #[arg(long)]
    n: Option<String>,
    /// Train, validation and test fractions, e.g. 0.6,0.2,0.2.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    test_size: Option<String>,
    /// Noise model; repeatable.
    #[arg(long)]
    noise: Vec<String>,
    /// tree:<criterion>, forest:<criterion> or prf:<k>; repeatable.
    #[arg(long)]
    learner: Vec<String>,
    #[arg(long)]
    min_leaf: Option<String>,
    #[arg(long)]
    min_leaf_fraction: Option<String>,
    #[arg(long)]
    max_depth: Option<String>,
    #[arg(long)]
    trees: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    test_on_train: Option<String>,
    #[arg(long)]
    leaf_sizes: Option<String>,
    #[arg(long)]
    sizes: Option<String>,
    /// Result table CSV; stdout when omitted.
    #[arg(long, short)]
    output: Option<String>,
    /// Per-run accuracy log CSV.
    #[arg(long)]
    runs_output: Option<String>,
}

impl SweepArgs {
    fn config(&self) -> robustree::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let lists = [
            ("dataset", &self.dataset),
            ("noise", &self.noise),
            ("learners", &self.learner),
        ];
        for (key, values) in lists {
            if !values.is_empty() {
                cfg.set(key, &values.join(";"))?;
            }
        }
        let scalars = [
            ("n", &self.n),
            ("split", &self.split),
            ("test_size", &self.test_size),
            ("min_leaf", &self.min_leaf),
            ("min_leaf_fraction", &self.min_leaf_fraction),
            ("max_depth", &self.max_depth),
            ("trees", &self.trees),
            ("repeats", &self.repeats),
            ("seed", &self.seed),
            ("test_on_train", &self.test_on_train),
            ("leaf_sizes", &self.leaf_sizes),
            ("sizes", &self.sizes),
            ("output", &self.output),
            ("runs_output", &self.runs_output),
        ];
        for (key, value) in scalars {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        cfg.require_seed()?;
        Ok(cfg)
    }
}

enum Failure {
    Config(Error),
    Runtime(Error),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Parse { .. } => Failure::Config(e),
            other => Failure::Runtime(other),
        }
    }
}

type CliResult = Result<(), Failure>;

fn write_out(path: Option<&Path>, text: &str) -> robustree::Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
    }
}

fn load_model(path: &Path, n_features: usize) -> robustree::Result<Box<dyn Classifier>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    if text.trim_start().starts_with("FOREST") {
        Ok(Box::new(RandomForest::from_text(&text, n_features)?))
    } else {
        Ok(Box::new(DecisionTree::from_text(&text, n_features)?))
    }
}

fn sweep(args: &SweepArgs, run: impl FnOnce(&ExperimentConfig) -> robustree::Result<SweepResult>) -> CliResult {
    let cfg = args.config().map_err(Failure::Config)?;
    let result = run(&cfg)?;
    result.write_outputs(&cfg)?;
    if cfg.output.is_none() {
        write_out(None, &result.table.to_csv())?;
    }
    Ok(())
}

fn run_bounds(trials: u64, seed: u64) -> CliResult {
    let mut rows: Vec<(BoundQuery, MonteCarloOutcome)> = Vec::new();
    for (i, q) in bounds::leaf_grid().iter().enumerate() {
        rows.push((*q, bounds::validate_leaf_bound(q, trials, rng_seed(seed, i))?));
    }
    let criteria = [
        BoundCriterion::Gini,
        BoundCriterion::Misclassification,
        BoundCriterion::Twoing,
    ];
    for (c, criterion) in criteria.into_iter().enumerate() {
        for (i, (&(better, worse), &(eta, delta))) in
            bounds::SPLIT_PAIRS.iter().zip(&bounds::SPLIT_SETTINGS).enumerate()
        {
            let (q, a, b) = bounds::split_pair_at_bound(criterion, eta, delta, better, worse)?;
            let out = bounds::validate_split_bound(&q, &a, &b, trials, rng_seed(seed, 100 + 10 * c + i))?;
            rows.push((q, out));
        }
    }
    let (better, worse) = bounds::COUNTEREXAMPLE_PAIR;
    let (q, a, b) = bounds::split_pair_at_bound(BoundCriterion::Gini, 0.2, 0.05, better, worse)?;
    rows.push((
        q,
        bounds::validate_split_bound(&q, &a, &b, trials, rng_seed(seed, 200))?,
    ));

    println!("criterion,rho,eta,delta,n,failure_rate,limit,pass");
    let mut failed = 0;
    for (q, out) in &rows {
        let pass = out.dominated_by(q.delta);
        failed += usize::from(!pass);
        println!(
            "{},{:.6},{},{},{},{:.4},{},{}",
            q.criterion,
            q.rho,
            q.eta,
            q.delta,
            out.n,
            out.rate(),
            bounds::dominance_limit(out.trials, q.delta),
            if pass { "pass" } else { "FAIL" }
        );
    }
    if failed > 0 {
        return Err(Failure::Assertion(format!(
            "{failed} bound checks exceeded their failure probability"
        )));
    }
    Ok(())
}

fn rng_seed(seed: u64, index: usize) -> u64 {
    robustree::rng::derive_seed(seed, index as u64)
}

fn run_counterexample(eta: f64) -> CliResult {
    if !(0.0..1.0).contains(&eta) || eta == 0.5 {
        return Err(Failure::Config(Error::InvalidArgument(format!(
            "eta {eta} must lie in [0, 1) and differ from 0.5"
        ))));
    }
    let r = bounds::counterexample_at(eta);
    println!("split,entropy_clean,entropy_noisy,gini_clean,gini_noisy");
    for i in 0..2 {
        println!(
            "f{},{:.6},{:.6},{:.6},{:.6}",
            i + 1,
            r.entropy_clean[i],
            r.entropy_noisy[i],
            r.gini_clean[i],
            r.gini_noisy[i]
        );
    }
    println!("eta = {eta}");
    println!("clean entropy prefers f2: {}", r.clean_prefers_f2());
    println!("noisy entropy prefers f1: {}", r.noisy_prefers_f1());
    println!("gini order kept: {}", r.gini_order_kept());
    if !r.holds() {
        return Err(Failure::Assertion(format!(
            "entropy keeps its preference at eta = {eta}"
        )));
    }
    Ok(())
}

fn check(name: &str, ok: bool, failures: &mut Vec<String>) {
    println!("{} {name}", if ok { "pass" } else { "FAIL" });
    if !ok {
        failures.push(name.to_string());
    }
}

fn run_selftest(seed: u64) -> CliResult {
    let mut failures = Vec::new();
    let mut rng = robustree::rng::seeded(seed);

    let mut scaling_ok = true;
    for _ in 0..200 {
        let f = SplitFractions::new(rng.gen_range(1..500), rng.gen_range(1..500), rng.gen(), rng.gen())?;
        let eta: f64 = rng.gen_range(0.0..0.49);
        for c in Criterion::NOISE_TOLERANT {
            let expected = noisy_gain_closed_form(c, c.evaluate(&f), eta)?;
            scaling_ok &= (c.evaluate(&noisy_split_stats(&f, eta)) - expected).abs() < 1e-10;
        }
    }
    check("noisy criteria scale in closed form", scaling_ok, &mut failures);
    check(
        "entropy counterexample",
        bounds::entropy_counterexample().holds(),
        &mut failures,
    );

    let q = BoundQuery::new(0.5, 0.25, 0.05, BoundCriterion::Leaf)?;
    let out = bounds::validate_leaf_bound(&q, 2000, seed)?;
    check(
        "leaf bound dominates at (0.5, 0.25, 0.05)",
        out.dominated_by(q.delta),
        &mut failures,
    );

    let ds = Synthetic::Checkerboard2.generate(3000, seed)?;
    let noisy = inject_noise(&ds, NoiseModel::Symmetric(0.2), seed)?.into_data();
    let params = TreeParams::new(Criterion::Gini, 50);
    let tree = fit_tree(&noisy, &params)?;
    check(
        "tree fit is deterministic",
        tree == fit_tree(&noisy, &params)?,
        &mut failures,
    );
    let text_ok = DecisionTree::from_text(&tree.to_text(), 2)
        .map(|t| t == tree)
        .unwrap_or(false);
    check("tree text round trip", text_ok, &mut failures);
    let fp = ForestParams::greedy(8, params, seed);
    let par = fit_forest(&noisy, &fp)?;
    check(
        "parallel forest equals serial forest",
        par.to_text() == fit_forest_serial(&noisy, &fp)?.to_text(),
        &mut failures,
    );
    check(
        "noisy tree accuracy on clean data above 0.9",
        tree.accuracy(&ds)? > 0.9,
        &mut failures,
    );

    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!(
            "{} self-test checks failed",
            failures.len()
        )))
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Generate {
            dataset,
            n,
            seed,
            output,
        } => {
            let ds = dataset.generate(n.unwrap_or_else(|| dataset.default_size()), seed)?;
            write_out(output.as_deref(), &ds.to_csv())?;
        }
        Command::Noise {
            input,
            model,
            seed,
            output,
            mask,
        } => {
            let ds = load_table(&input.input, &input.options())?;
            let noisy = inject_noise(&ds, model, seed)?;
            if let Some(p) = mask {
                let text: String = noisy
                    .flip_mask()
                    .iter()
                    .map(|&f| if f { "1\n" } else { "0\n" })
                    .collect();
                write_out(Some(&p), &text)?;
            }
            eprintln!("flipped {} of {} labels", noisy.flip_count(), ds.n());
            write_out(output.as_deref(), &noisy.data().to_csv())?;
        }
        Command::Train {
            input,
            learner,
            criterion,
            min_leaf,
            max_depth,
            trees,
            k_splits,
            seed,
            output,
        } => {
            let ds = load_table(&input.input, &input.options())?;
            let tree = TreeParams {
                max_depth,
                seed,
                ..TreeParams::new(criterion, min_leaf)
            };
            let mode = match learner.as_str() {
                "tree" => None,
                "forest" => Some(ForestMode::Greedy),
                "prf" => Some(ForestMode::PurelyRandom),
                other => Some(other.parse::<ForestMode>()?),
            };
            let text = match mode {
                None => fit_tree(&ds, &tree)?.to_text(),
                Some(ForestMode::Greedy) => fit_forest(&ds, &ForestParams::greedy(trees, tree, seed))?.to_text(),
                Some(ForestMode::PurelyRandom) => {
                    fit_forest(&ds, &ForestParams::purely_random(trees, k_splits, seed))?.to_text()
                }
            };
            write_out(output.as_deref(), &text)?;
        }
        Command::Eval { model, input } => {
            let ds = load_table(&input.input, &input.options())?;
            let model = load_model(&model, ds.d())?;
            println!("accuracy {:.4}", 100.0 * model.accuracy(&ds)?);
        }
        Command::Sweep(args) => sweep(&args, bench::run_noise_sweep)?,
        Command::LeafSweep(args) => sweep(&args, |cfg| bench::run_leaf_size_sweep(cfg, &cfg.leaf_sizes))?,
        Command::SizeSweep(args) => sweep(&args, |cfg| bench::run_training_size_sweep(cfg, &cfg.sizes))?,
        Command::Bounds { trials, seed } => {
            if trials == 0 {
                return Err(Failure::Config(Error::InvalidArgument(
                    "trials must be positive".into(),
                )));
            }
            run_bounds(trials, seed)?
        }
        Command::Counterexample { eta } => run_counterexample(eta)?,
        Command::Selftest { seed } => run_selftest(seed)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(EXIT_ASSERTION)
        }
    }
}
