use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use secord::cooc::{read_matrix, write_matrix};
use secord::corpus::extract_pairs;
use secord::embedding::DenseEmbedding;
use secord::eval::{
    bonferroni, bootstrap_two_sample, eval_wordsim, group_mean_cd, SimilarityDataset, SparseSpace, VectorSpace,
};
use secord::experiment::{
    run_experiment1, run_experiment2, train_ppmi, train_svd, BaseInput, Exp1Config, Exp2Config, ModelConfig,
};
use secord::pairs::PairCorpus;
use secord::report::{fmt_value, Report};
use secord::second_order::{merge_base_and_second, propagate, PropagationConfig};
use secord::sgns::{train_sgns, SgnsConfig};
use secord::simgen::{generate_experiment1, GroupKind, GroupManifest, SimConfig};

mod config;

#[derive(Parser, Debug)]
#[command(name = "secord", version, about = "First- and second-order co-occurrence experiments")]
#[command(args_override_self = true)]
struct Cli {
    /// `key=value` file with defaults for the subcommand's flags; flags on
    /// the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the simulated pair file and group manifest.
    Simulate(SimulateArgs),
    /// Extract window pairs from a tokenized corpus.
    Extract(ExtractArgs),
    /// Sample second-order pairs for low-frequency words.
    Propagate(PropagateArgs),
    /// Write the PPMI matrix of a pair file.
    TrainPpmi(TrainPpmiArgs),
    /// Train a truncated-SVD embedding on the PPMI matrix of a pair file.
    TrainSvd(TrainSvdArgs),
    /// Train skip-gram with negative sampling on a pair file.
    TrainSgns(TrainSgnsArgs),
    /// Mean pairwise cosine distance of each target group.
    EvalGroups(EvalGroupsArgs),
    /// Spearman correlation with a word-similarity dataset.
    EvalWordsim(EvalWordsimArgs),
    /// Two-sample bootstrap test on two files of numbers.
    Bootstrap(BootstrapArgs),
    /// Full simulated-overlap experiment.
    Exp1(Exp1Args),
    /// Full propagation experiment.
    Exp2(Exp2Args),
}

impl Command {
    fn stage(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Extract(_) => "extract",
            Command::Propagate(_) => "propagate",
            Command::TrainPpmi(_) => "train-ppmi",
            Command::TrainSvd(_) => "train-svd",
            Command::TrainSgns(_) => "train-sgns",
            Command::EvalGroups(_) => "eval-groups",
            Command::EvalWordsim(_) => "eval-wordsim",
            Command::Bootstrap(_) => "bootstrap",
            Command::Exp1(_) => "exp1",
            Command::Exp2(_) => "exp2",
        }
    }
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value_t = 10)]
    targets: usize,
    #[arg(long, default_value_t = 1000)]
    context_types: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Comma-separated group kinds: 1st, 2nd, none, both.
    #[arg(long, value_delimiter = ',', default_value = "1st,2nd,none")]
    groups: Vec<GroupKind>,
}

impl SimArgs {
    fn config(&self, seed: u64) -> SimConfig {
        SimConfig {
            n_targets: self.targets,
            n_context_types: self.context_types,
            n_samples: self.samples,
            seed,
            groups: self.groups.clone(),
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PropagateArgs {
    #[arg(long)]
    pairs: PathBuf,
    /// Words with co-occurrence frequency below this value are propagated.
    #[arg(long)]
    threshold: u64,
    #[arg(long, default_value_t = 2.0)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Second-order pairs.
    #[arg(long)]
    out: PathBuf,
    /// Also write base and second-order pairs shuffled together.
    #[arg(long)]
    merged: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PpmiArgs {
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    #[arg(long, default_value_t = 5.0)]
    k: f64,
}

#[derive(Args, Debug)]
struct TrainPpmiArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[command(flatten)]
    ppmi: PpmiArgs,
    /// Matrix triples; the vocabularies go to `<out>.vocab`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SvdArgs {
    /// Eigenvalue weight p in `U · S^p`.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    oversample: usize,
    #[arg(long, default_value_t = 7)]
    power_iters: usize,
}

#[derive(Args, Debug)]
struct TrainSvdArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 300)]
    dim: usize,
    #[command(flatten)]
    ppmi: PpmiArgs,
    #[command(flatten)]
    svd: SvdArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SgnsArgs {
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    lr0: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_exponent: f64,
    /// More than one thread trains with unsynchronized updates and is not
    /// reproducible.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args, Debug)]
struct TrainSgnsArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 300)]
    dim: usize,
    #[command(flatten)]
    sgns: SgnsArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target vectors.
    #[arg(long)]
    out: PathBuf,
    /// Context vectors.
    #[arg(long)]
    context_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, default_value_t = 300)]
    dim: usize,
    #[command(flatten)]
    ppmi: PpmiArgs,
    #[command(flatten)]
    svd: SvdArgs,
    #[command(flatten)]
    sgns: SgnsArgs,
}

impl ModelArgs {
    fn config(&self, seed: u64) -> ModelConfig {
        ModelConfig {
            dim: self.dim,
            alpha: self.ppmi.alpha,
            k: self.ppmi.k,
            p: self.svd.p,
            negatives: self.sgns.negatives,
            epochs: self.sgns.epochs,
            lr0: self.sgns.lr0,
            noise_exponent: self.sgns.noise_exponent,
            oversample: self.svd.oversample,
            power_iters: self.svd.power_iters,
            threads: self.sgns.threads,
            seed,
        }
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ModelInput {
    /// Dense embedding in text format.
    #[arg(long)]
    embedding: Option<PathBuf>,
    /// Sparse matrix written by `train-ppmi`.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

impl ModelInput {
    fn load(&self) -> Result<Box<dyn VectorSpace>> {
        if let Some(path) = &self.embedding {
            return Ok(Box::new(DenseEmbedding::read(path)?));
        }
        let path = self.matrix.as_ref().expect("clap enforces one input");
        let (matrix, targets, _) = read_matrix(path)?;
        Ok(Box::new(SparseSpace::new(targets, matrix)?))
    }
}

#[derive(Args, Debug)]
struct EvalGroupsArgs {
    #[command(flatten)]
    model: ModelInput,
    #[arg(long)]
    manifest: PathBuf,
    /// `key=value` report with per-group means.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalWordsimArgs {
    #[command(flatten)]
    model: ModelInput,
    /// `<word1>\t<word2>\t<score>` lines, or comma-separated with a `.csv` name.
    #[arg(long)]
    dataset: PathBuf,
}

#[derive(Args, Debug)]
struct BootstrapArgs {
    /// One number per line.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Number of tests for the Bonferroni correction.
    #[arg(long, default_value_t = 1)]
    tests: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct Exp1Args {
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 10_000)]
    bootstrap_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct Exp2Args {
    /// Tokenized text, one sentence per line.
    #[arg(long, conflicts_with = "pairs", required_unless_present = "pairs")]
    corpus: Option<PathBuf>,
    /// Ready base pair file instead of a corpus.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, value_delimiter = ',', default_value = "2000,20000,200000")]
    thresholds: Vec<u64>,
    #[arg(long, default_value_t = 2.0)]
    ratio: f64,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .with_context(|| format!("{}:{}: not a number", path.display(), i + 1))
        })
        .collect()
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => {
            let (manifest, n) = generate_experiment1(&a.sim.config(a.seed), &a.out, &a.manifest)?;
            println!("wrote {n} pairs for {} groups", manifest.groups().count());
        }
        Command::Extract(a) => {
            let n = extract_pairs(&a.corpus, a.window, &a.out)?;
            println!("wrote {n} pairs");
        }
        Command::Propagate(a) => {
            let cfg = PropagationConfig { freq_threshold: a.threshold, ratio: a.ratio, seed: a.seed };
            let stats = propagate(&a.pairs, &cfg, &a.out)?;
            println!(
                "propagated {} words: {} draws, {} self-draws dropped, {} lines",
                stats.words, stats.draws, stats.self_draws, stats.lines
            );
            if let Some(merged) = &a.merged {
                let n = merge_base_and_second(&a.pairs, &a.out, merged, a.seed)?;
                println!("wrote {n} merged pairs");
            }
        }
        Command::TrainPpmi(a) => {
            let corpus = PairCorpus::read(&a.pairs)?;
            let model = ModelConfig { alpha: a.ppmi.alpha, k: a.ppmi.k, ..ModelConfig::default() };
            let space = train_ppmi(&corpus, &model)?;
            write_matrix(&a.out, space.matrix(), &corpus.targets, &corpus.contexts)?;
            println!("wrote {} nonzero cells", space.matrix().nnz());
        }
        Command::TrainSvd(a) => {
            let corpus = PairCorpus::read(&a.pairs)?;
            let model = ModelConfig {
                dim: a.dim,
                alpha: a.ppmi.alpha,
                k: a.ppmi.k,
                p: a.svd.p,
                oversample: a.svd.oversample,
                power_iters: a.svd.power_iters,
                seed: a.seed,
                ..ModelConfig::default()
            };
            let space = train_ppmi(&corpus, &model)?;
            let emb = train_svd(&space, &model)?;
            emb.write(&a.out)?;
            println!("wrote {} vectors of dimension {}", emb.vocab().len(), emb.dim());
        }
        Command::TrainSgns(a) => {
            let corpus = PairCorpus::read(&a.pairs)?;
            let cfg = SgnsConfig {
                dim: a.dim,
                negatives: a.sgns.negatives,
                epochs: a.sgns.epochs,
                lr0: a.sgns.lr0,
                seed: a.seed,
                noise_exponent: a.sgns.noise_exponent,
                threads: a.sgns.threads,
            };
            let model = train_sgns(&corpus, &cfg)?;
            if let Some(ctx) = &a.context_out {
                let meta = a.out.with_extension("meta");
                model.write(&corpus.targets, &corpus.contexts, &a.out, ctx, &meta)?;
            } else {
                model.embedding(&corpus.targets)?.write(&a.out)?;
            }
            println!("wrote {} target vectors", corpus.targets.len());
        }
        Command::EvalGroups(a) => {
            let space = a.model.load()?;
            let manifest = GroupManifest::read(&a.manifest)?;
            let mut report = Report::new();
            for g in manifest.groups() {
                let s = group_mean_cd(space.as_ref(), &manifest, g)?;
                println!("{:<6} {}", g.label(), fmt_value(Some(s.mean)));
                report.push(format!("cd.{g}"), s.mean);
            }
            if let Some(path) = &a.report {
                report.write(path)?;
            }
        }
        Command::EvalWordsim(a) => {
            let space = a.model.load()?;
            let dataset = if a.dataset.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                SimilarityDataset::read_csv(&a.dataset)?
            } else {
                SimilarityDataset::read(&a.dataset)?
            };
            let r = eval_wordsim(space.as_ref(), &dataset)?;
            println!("rho={}", fmt_value(r.rho));
            println!("coverage={}/{}", r.evaluated, r.total);
        }
        Command::Bootstrap(a) => {
            if a.tests == 0 {
                bail!("--tests must be at least 1");
            }
            let r = bootstrap_two_sample(&read_numbers(&a.a)?, &read_numbers(&a.b)?, a.samples, a.seed)?;
            println!("observed={}", r.observed);
            println!("p={}", r.p);
            println!("p_adjusted={}", bonferroni(r.p, a.tests));
            println!("degenerate={}", r.degenerate);
        }
        Command::Exp1(a) => {
            let cfg = Exp1Config {
                sim: a.sim.config(a.seed),
                model: a.model.config(a.seed),
                bootstrap_samples: a.bootstrap_samples,
            };
            let r = run_experiment1(&cfg, &a.out_dir)?;
            print!("{}", r.table());
        }
        Command::Exp2(a) => {
            let base = match (a.corpus, a.pairs) {
                (Some(c), None) => BaseInput::Corpus(c),
                (None, Some(p)) => BaseInput::Pairs(p),
                _ => bail!("give exactly one of --corpus and --pairs"),
            };
            let mut cfg = Exp2Config::new(base, a.dataset);
            cfg.window = a.window;
            cfg.thresholds = a.thresholds;
            cfg.ratio = a.ratio;
            cfg.model = a.model.config(a.seed);
            cfg.seed = a.seed;
            let r = run_experiment2(&cfg, &a.out_dir)?;
            print!("{}", r.table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("secord [config]: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let stage = cli.command.stage();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("secord [{stage}]: {e:#}");
            ExitCode::FAILURE
        }
    }
}
