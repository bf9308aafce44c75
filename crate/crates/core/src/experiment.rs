//! End-to-end recipes: the simulated overlap experiment and the
//! propagation experiment, with their report files.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cooc::ppmi_transform;
use crate::embedding::{shortest, DenseEmbedding};
use crate::error::{Error, Result, StageContext};
use crate::eval::{
    bonferroni, bootstrap_two_sample, eval_wordsim, group_mean_cd, GroupScore, SimilarityDataset, SparseSpace,
    VectorSpace, DEFAULT_BOOTSTRAP_SAMPLES,
};
use crate::factorization::{embed_svd, truncated_svd, SvdParams};
use crate::pairs::{PairCorpus, PairWriter};
use crate::report::{file_digest, fmt_value, Report};
use crate::rng::derive_seed;
use crate::second_order::{merge_base_and_second, propagate_corpus, PropagationConfig};
use crate::sgns::{train_sgns, SgnsConfig};
use crate::simgen::{generate_experiment1, GroupKind, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Ppmi,
    Svd,
    Sgns,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Ppmi, ModelKind::Svd, ModelKind::Sgns];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Ppmi => "PPMI",
            ModelKind::Svd => "SVD",
            ModelKind::Sgns => "SGNS",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Hyperparameters of all three models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub dim: usize,
    pub alpha: f64,
    pub k: f64,
    pub p: f64,
    pub negatives: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub noise_exponent: f64,
    pub oversample: usize,
    pub power_iters: usize,
    pub threads: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let sgns = SgnsConfig::default();
        let svd = SvdParams::default();
        ModelConfig {
            dim: 300,
            alpha: 0.75,
            k: 5.0,
            p: 0.0,
            negatives: sgns.negatives,
            epochs: sgns.epochs,
            lr0: sgns.lr0,
            noise_exponent: sgns.noise_exponent,
            oversample: svd.oversample,
            power_iters: svd.power_iters,
            threads: 1,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn sgns(&self) -> SgnsConfig {
        SgnsConfig {
            dim: self.dim,
            negatives: self.negatives,
            epochs: self.epochs,
            lr0: self.lr0,
            seed: self.seed,
            noise_exponent: self.noise_exponent,
            threads: self.threads,
        }
    }

    pub fn svd(&self) -> SvdParams {
        SvdParams {
            rank: self.dim,
            oversample: self.oversample,
            power_iters: self.power_iters,
            seed: self.seed,
        }
    }

    fn echo(&self, r: &mut Report) {
        r.push("model.dim", self.dim);
        r.push("model.alpha", self.alpha);
        r.push("model.k", self.k);
        r.push("model.p", self.p);
        r.push("model.negatives", self.negatives);
        r.push("model.epochs", self.epochs);
        r.push("model.lr0", self.lr0);
        r.push("model.noise_exponent", self.noise_exponent);
        r.push("model.oversample", self.oversample);
        r.push("model.power_iters", self.power_iters);
        r.push("model.threads", self.threads);
        r.push("model.seed", self.seed);
    }
}

pub fn train_ppmi(corpus: &PairCorpus, cfg: &ModelConfig) -> Result<SparseSpace> {
    let ppmi = ppmi_transform(&corpus.cooccurrence_counts(), cfg.alpha, cfg.k)?;
    SparseSpace::new(corpus.targets.clone(), ppmi)
}

pub fn train_svd(ppmi: &SparseSpace, cfg: &ModelConfig) -> Result<DenseEmbedding> {
    let f = truncated_svd(ppmi.matrix(), &cfg.svd())?;
    embed_svd(&f, cfg.p, ppmi.vocab())
}

/// Trains PPMI, SVD and SGNS on `corpus` one after another and hands each
/// to `visit`. Every model is dropped before the next one is built.
pub fn for_each_model<F>(corpus: &PairCorpus, cfg: &ModelConfig, mut visit: F) -> Result<()>
where
    F: FnMut(ModelKind, &dyn VectorSpace) -> Result<()>,
{
    {
        let ppmi = train_ppmi(corpus, cfg).stage("train-ppmi")?;
        visit(ModelKind::Ppmi, &ppmi)?;
        let svd = train_svd(&ppmi, cfg).stage("train-svd")?;
        drop(ppmi);
        visit(ModelKind::Svd, &svd)?;
    }
    let sgns = train_sgns(corpus, &cfg.sgns())
        .and_then(|m| m.into_embedding(&corpus.targets))
        .stage("train-sgns")?;
    visit(ModelKind::Sgns, &sgns)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp1Config {
    pub sim: SimConfig,
    pub model: ModelConfig,
    pub bootstrap_samples: usize,
}

impl Default for Exp1Config {
    fn default() -> Self {
        Exp1Config {
            sim: SimConfig::default(),
            model: ModelConfig::default(),
            bootstrap_samples: DEFAULT_BOOTSTRAP_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub model: ModelKind,
    pub a: GroupKind,
    pub b: GroupKind,
    pub p: f64,
    pub p_adjusted: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp1Result {
    pub groups: Vec<GroupKind>,
    pub scores: Vec<(ModelKind, Vec<GroupScore>)>,
    pub comparisons: Vec<Comparison>,
    pub n_pairs: usize,
    pub pairs_digest: String,
}

impl Exp1Result {
    pub fn score(&self, model: ModelKind, group: GroupKind) -> Option<&GroupScore> {
        let (_, scores) = self.scores.iter().find(|(m, _)| *m == model)?;
        scores.iter().find(|s| s.label == group.label())
    }

    pub fn mean(&self, model: ModelKind, group: GroupKind) -> Option<f64> {
        self.score(model, group).map(|s| s.mean)
    }

    pub fn comparison(&self, model: ModelKind, a: GroupKind, b: GroupKind) -> Option<&Comparison> {
        self.comparisons
            .iter()
            .find(|c| c.model == model && ((c.a, c.b) == (a, b) || (c.a, c.b) == (b, a)))
    }

    pub fn table(&self) -> String {
        let mut t = String::new();
        let _ = write!(t, "{:<6}", "model");
        for g in &self.groups {
            let _ = write!(t, " {:>10}", g.label());
        }
        t.push('\n');
        for (model, scores) in &self.scores {
            let _ = write!(t, "{:<6}", model.label());
            for s in scores {
                let _ = write!(t, " {:>10}", fmt_value(Some(s.mean)));
            }
            t.push('\n');
        }
        t.push('\n');
        let _ = writeln!(t, "{:<6} {:<12} {:>10} {:>10}", "model", "comparison", "p", "p_adj");
        for c in &self.comparisons {
            let pair = format!("{}-{}", c.a, c.b);
            let flag = if c.degenerate { " degenerate" } else { "" };
            let _ = writeln!(t, "{:<6} {:<12} {:>10.6} {:>10.6}{flag}", c.model.label(), pair, c.p, c.p_adjusted);
        }
        t
    }
}

/// Simulates the pair file, trains the three models on it, scores every
/// group and tests all within-model group differences with Bonferroni
/// correction over the full set of comparisons. Writes `pairs.txt`,
/// `groups.tsv`, `exp1_table.txt` and `exp1_report.txt` into `out_dir`.
pub fn run_experiment1(cfg: &Exp1Config, out_dir: &Path) -> Result<Exp1Result> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e)).stage("setup")?;
    let pairs_path = out_dir.join("pairs.txt");
    let (manifest, n_pairs) =
        generate_experiment1(&cfg.sim, &pairs_path, &out_dir.join("groups.tsv")).stage("simulate")?;
    let groups: Vec<GroupKind> = manifest.groups().collect();
    let corpus = PairCorpus::read(&pairs_path).stage("load-pairs")?;

    let mut scores = Vec::new();
    for_each_model(&corpus, &cfg.model, |model, space| {
        let s = groups
            .iter()
            .map(|&g| group_mean_cd(space, &manifest, g))
            .collect::<Result<Vec<_>>>()
            .stage("eval-groups")?;
        scores.push((model, s));
        Ok(())
    })?;
    drop(corpus);

    let mut raw = Vec::new();
    for (model, s) in &scores {
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                raw.push((*model, i, j, &s[i].distances, &s[j].distances));
            }
        }
    }
    let m = raw.len();
    let mut comparisons = Vec::with_capacity(m);
    for (idx, (model, i, j, a, b)) in raw.into_iter().enumerate() {
        let r = bootstrap_two_sample(a, b, cfg.bootstrap_samples, derive_seed(cfg.sim.seed, 1000 + idx as u64))
            .stage("bootstrap")?;
        comparisons.push(Comparison {
            model,
            a: groups[i],
            b: groups[j],
            p: r.p,
            p_adjusted: bonferroni(r.p, m),
            degenerate: r.degenerate,
        });
    }

    let result = Exp1Result {
        groups,
        scores,
        comparisons,
        n_pairs,
        pairs_digest: file_digest(&pairs_path).stage("report")?,
    };

    let mut r = Report::new();
    r.push("experiment", 1);
    r.push("sim.n_targets", cfg.sim.n_targets);
    r.push("sim.n_context_types", cfg.sim.n_context_types);
    r.push("sim.n_samples", cfg.sim.n_samples);
    r.push("sim.seed", cfg.sim.seed);
    r.push("sim.groups", result.groups.iter().map(|g| g.label()).collect::<Vec<_>>().join(","));
    cfg.model.echo(&mut r);
    r.push("bootstrap.samples", cfg.bootstrap_samples);
    r.push("bootstrap.tests", m);
    r.push("pairs.count", n_pairs);
    r.push("pairs.sha256", &result.pairs_digest);
    for (model, s) in &result.scores {
        for g in s {
            r.push(format!("cd.{model}.{}", g.label), shortest(g.mean));
        }
    }
    for c in &result.comparisons {
        let key = format!("{}.{}_vs_{}", c.model, c.a, c.b);
        r.push(format!("p.{key}"), shortest(c.p));
        r.push(format!("p_adj.{key}"), shortest(c.p_adjusted));
        r.push(format!("degenerate.{key}"), c.degenerate);
    }
    r.write(&out_dir.join("exp1_report.txt")).stage("report")?;
    std::fs::write(out_dir.join("exp1_table.txt"), result.table())
        .map_err(|e| Error::io(out_dir.join("exp1_table.txt"), e))
        .stage("report")?;
    Ok(result)
}

/// Where the base pairs of the propagation experiment come from.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseInput {
    /// Tokenized text, one sentence per line.
    Corpus(PathBuf),
    /// A ready pair file.
    Pairs(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp2Config {
    pub base: BaseInput,
    pub dataset: PathBuf,
    pub window: usize,
    pub thresholds: Vec<u64>,
    pub ratio: f64,
    pub model: ModelConfig,
    pub seed: u64,
}

impl Exp2Config {
    pub fn new(base: BaseInput, dataset: PathBuf) -> Self {
        Exp2Config {
            base,
            dataset,
            window: 5,
            thresholds: vec![2_000, 20_000, 200_000],
            ratio: 2.0,
            model: ModelConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::param("window must be at least 1"));
        }
        for &f in &self.thresholds {
            PropagationConfig { freq_threshold: f, ratio: self.ratio, seed: self.seed }.validate()?;
        }
        Ok(())
    }
}

/// Column label for a threshold: `2k` for 2000, the plain number otherwise.
pub fn threshold_label(f: u64) -> String {
    if f >= 1000 && f.is_multiple_of(1000) {
        format!("{}k", f / 1000)
    } else {
        f.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub threshold: Option<u64>,
    pub pairs: usize,
    pub second_order_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp2Cell {
    pub model: ModelKind,
    pub variant: String,
    pub rho: Option<f64>,
    pub evaluated: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp2Result {
    pub variants: Vec<Variant>,
    pub cells: Vec<Exp2Cell>,
}

impl Exp2Result {
    pub fn cell(&self, model: ModelKind, variant: &str) -> Option<&Exp2Cell> {
        self.cells.iter().find(|c| c.model == model && c.variant == variant)
    }

    pub fn table(&self) -> String {
        let mut t = String::new();
        let _ = write!(t, "{:<6}", "model");
        for v in &self.variants {
            let _ = write!(t, " {:>10}", v.label);
        }
        t.push('\n');
        for model in ModelKind::ALL {
            let _ = write!(t, "{:<6}", model.label());
            for v in &self.variants {
                let rho = self.cell(model, &v.label).and_then(|c| c.rho);
                let _ = write!(t, " {:>10}", fmt_value(rho));
            }
            t.push('\n');
        }
        t.push('\n');
        let _ = writeln!(t, "{:<8} {:>12} {:>12}", "variant", "pairs", "second");
        for v in &self.variants {
            let _ = writeln!(t, "{:<8} {:>12} {:>12}", v.label, v.pairs, v.second_order_pairs);
        }
        t
    }
}

fn read_dataset(path: &Path) -> Result<SimilarityDataset> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        SimilarityDataset::read_csv(path)
    } else {
        SimilarityDataset::read(path)
    }
}

/// Builds base pairs, one propagated and shuffled variant per threshold,
/// trains all models on every variant and scores them on the similarity
/// dataset. Writes pair files, `exp2_table.txt` and `exp2_report.txt` into
/// `out_dir`.
pub fn run_experiment2(cfg: &Exp2Config, out_dir: &Path) -> Result<Exp2Result> {
    cfg.validate().stage("setup")?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e)).stage("setup")?;
    let dataset = read_dataset(&cfg.dataset).stage("load-dataset")?;
    let base_path = match &cfg.base {
        BaseInput::Corpus(corpus) => {
            let out = out_dir.join("base.pairs");
            crate::corpus::extract_pairs(corpus, cfg.window, &out).stage("extract")?;
            out
        }
        BaseInput::Pairs(p) => p.clone(),
    };
    let base = PairCorpus::read(&base_path).stage("load-pairs")?;
    if base.is_empty() {
        return Err(Error::Empty("no base pairs".into())).stage("load-pairs");
    }

    let mut variants = vec![Variant { label: "base".into(), threshold: None, pairs: base.len(), second_order_pairs: 0 }];
    let mut cells = Vec::new();
    let mut evaluate = |label: &str, corpus: &PairCorpus| {
        for_each_model(corpus, &cfg.model, |model, space| {
            let r = eval_wordsim(space, &dataset).stage("eval-wordsim")?;
            cells.push(Exp2Cell { model, variant: label.to_string(), rho: r.rho, evaluated: r.evaluated, total: r.total });
            Ok(())
        })
    };
    evaluate("base", &base)?;

    for (i, &f) in cfg.thresholds.iter().enumerate() {
        let label = threshold_label(f);
        let prop = PropagationConfig { freq_threshold: f, ratio: cfg.ratio, seed: cfg.seed };
        let second_path = out_dir.join(format!("second_{label}.pairs"));
        let mut writer = PairWriter::create(&second_path).stage("propagate")?;
        let stats = propagate_corpus(&base, &prop, &mut writer).stage("propagate")?;
        writer.finish().stage("propagate")?;
        let merged_path = out_dir.join(format!("merged_{label}.pairs"));
        let n = merge_base_and_second(&base_path, &second_path, &merged_path, derive_seed(cfg.seed, 200 + i as u64))
            .stage("merge")?;
        let merged = PairCorpus::read(&merged_path).stage("load-pairs")?;
        evaluate(&label, &merged)?;
        variants.push(Variant { label, threshold: Some(f), pairs: n, second_order_pairs: stats.lines });
    }

    let result = Exp2Result { variants, cells };
    let mut r = Report::new();
    r.push("experiment", 2);
    match &cfg.base {
        BaseInput::Corpus(p) => {
            r.push("input.corpus", p.display());
            r.push("input.corpus.sha256", file_digest(p).stage("report")?);
        }
        BaseInput::Pairs(p) => {
            r.push("input.pairs", p.display());
            r.push("input.pairs.sha256", file_digest(p).stage("report")?);
        }
    }
    r.push("input.dataset", cfg.dataset.display());
    r.push("input.dataset.sha256", file_digest(&cfg.dataset).stage("report")?);
    r.push("window", cfg.window);
    r.push("thresholds", cfg.thresholds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
    r.push("ratio", cfg.ratio);
    r.push("seed", cfg.seed);
    cfg.model.echo(&mut r);
    for v in &result.variants {
        r.push(format!("pairs.{}", v.label), v.pairs);
        r.push(format!("second_order_pairs.{}", v.label), v.second_order_pairs);
    }
    for c in &result.cells {
        let key = format!("{}.{}", c.model, c.variant);
        r.push(format!("rho.{key}"), c.rho.map_or_else(|| "undefined".to_string(), shortest));
        r.push(format!("coverage.{key}"), format!("{}/{}", c.evaluated, c.total));
    }
    r.write(&out_dir.join("exp2_report.txt")).stage("report")?;
    std::fs::write(out_dir.join("exp2_table.txt"), result.table())
        .map_err(|e| Error::io(out_dir.join("exp2_table.txt"), e))
        .stage("report")?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_labels() {
        assert_eq!(threshold_label(2000), "2k");
        assert_eq!(threshold_label(200_000), "200k");
        assert_eq!(threshold_label(150), "150");
        assert_eq!(threshold_label(2500), "2500");
    }

    #[test]
    fn zero_ratio_is_rejected() {
        let mut cfg = Exp2Config::new(BaseInput::Pairs("x".into()), "y".into());
        cfg.ratio = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::Parameter(_))));
    }

    #[test]
    fn default_hyperparameters() {
        let m = ModelConfig::default();
        assert_eq!((m.dim, m.alpha, m.k, m.p, m.negatives, m.epochs), (300, 0.75, 5.0, 0.0, 5, 5));
        let e = Exp2Config::new(BaseInput::Pairs("x".into()), "y".into());
        assert_eq!((e.window, e.ratio), (5, 2.0));
        assert_eq!(e.thresholds, vec![2000, 20_000, 200_000]);
    }

    #[test]
    fn small_simulation_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = Exp1Config {
            sim: SimConfig { n_targets: 3, n_context_types: 8, n_samples: 20, seed: 1, ..SimConfig::default() },
            model: ModelConfig { dim: 4, epochs: 1, ..ModelConfig::default() },
            bootstrap_samples: 1000,
        };
        let r = run_experiment1(&cfg, dir.path()).unwrap();
        assert_eq!(r.comparisons.len(), 9);
        assert_eq!(r.n_pairs, 3 * 2 * 3 * 20 * 9);
        assert_eq!(r.mean(ModelKind::Ppmi, GroupKind::None), Some(1.0));
        let report = Report::read(&dir.path().join("exp1_report.txt")).unwrap();
        assert_eq!(report.get("bootstrap.tests"), Some("9"));
        assert!(report.get("pairs.sha256").is_some_and(|d| d.len() == 64));
    }
}
