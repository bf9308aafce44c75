//! Artificial target-context pair sets with controlled context overlap.
//!
//! Each group has `n_targets` target words. Per target, `n_samples` first-order
//! contexts are drawn from a set of `n_context_types` candidate types (C1),
//! and for every C1 type `n_samples` second-order contexts are drawn from
//! another set of `n_context_types` types (C2). Which sets are shared decides
//! the kind of overlap:
//!
//! | kind   | C1 set                | C2 set                  |
//! |--------|-----------------------|-------------------------|
//! | `1st`  | shared by all targets | private per C1 type     |
//! | `2nd`  | private per target    | shared by the group     |
//! | `none` | private per target    | private per C1 type     |
//! | `both` | shared by all targets | shared by the group     |
//!
//! Every emitted pair is followed by its reverse, so a group holds exactly
//! `2 · n_targets · n_samples · (1 + n_context_types)` pairs. Type frequencies
//! inside each set follow a normalized standard-lognormal profile. All token
//! strings start with the group label, so groups never share a word.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::pairs::{PairRecord, PairWriter};
use crate::rng::{self, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKind {
    First,
    Second,
    None,
    Both,
}

impl GroupKind {
    pub const ALL: [GroupKind; 4] = [GroupKind::First, GroupKind::Second, GroupKind::None, GroupKind::Both];

    pub fn label(self) -> &'static str {
        match self {
            GroupKind::First => "1st",
            GroupKind::Second => "2nd",
            GroupKind::None => "none",
            GroupKind::Both => "both",
        }
    }

    fn shares_first_order(self) -> bool {
        matches!(self, GroupKind::First | GroupKind::Both)
    }

    fn shares_second_order(self) -> bool {
        matches!(self, GroupKind::Second | GroupKind::Both)
    }

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GroupKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::param(format!("unknown group `{s}` (expected 1st, 2nd, none or both)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_targets: usize,
    pub n_context_types: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub groups: Vec<GroupKind>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_targets: 10,
            n_context_types: 1000,
            n_samples: 1000,
            seed: 0,
            groups: vec![GroupKind::First, GroupKind::Second, GroupKind::None],
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_targets == 0 || self.n_context_types == 0 || self.n_samples == 0 {
            return Err(Error::param("n_targets, n_context_types and n_samples must be at least 1"));
        }
        if self.groups.is_empty() {
            return Err(Error::param("at least one group is required"));
        }
        Ok(())
    }

    /// Pairs generated per group.
    pub fn pairs_per_group(&self) -> usize {
        2 * self.n_targets * self.n_samples * (1 + self.n_context_types)
    }

    fn unique_groups(&self) -> Vec<GroupKind> {
        let mut seen = Vec::new();
        for &g in &self.groups {
            if !seen.contains(&g) {
                seen.push(g);
            }
        }
        seen
    }
}

fn lognormal_draws<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    (0..m)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z.exp()
        })
        .collect()
}

/// `m` standard-lognormal draws normalized to a probability vector.
pub fn lognormal_probs(m: usize, seed: u64) -> Vec<f64> {
    normalize(lognormal_draws(m, &mut rng::seeded(seed)))
}

/// Raw (unnormalized) draws behind [`lognormal_probs`].
pub fn lognormal_raw(m: usize, seed: u64) -> Vec<f64> {
    lognormal_draws(m, &mut rng::seeded(seed))
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// One group's pairs over a group-local token table.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPairs {
    pub kind: GroupKind,
    pub tokens: Vec<String>,
    pub pairs: Vec<(u32, u32)>,
    /// Token ids of the targets; always `0..n_targets`.
    pub targets: Vec<u32>,
}

impl GroupPairs {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = PairRecord> + '_ {
        self.pairs.iter().map(|&(a, b)| PairRecord {
            target: self.tokens[a as usize].clone(),
            context: self.tokens[b as usize].clone(),
        })
    }

    pub fn target_words(&self) -> Vec<String> {
        self.targets.iter().map(|&t| self.tokens[t as usize].clone()).collect()
    }
}

struct TypeSet {
    id: u32,
    sampler: WeightedIndex<f64>,
}

struct Builder {
    kind: GroupKind,
    n_types: usize,
    tokens: Vec<String>,
    token_of: HashMap<(u32, u32), u32>,
    next_set: u32,
    pairs: Vec<(u32, u32)>,
}

impl Builder {
    fn new_set(&mut self, rng: &mut SeededRng) -> TypeSet {
        let probs = normalize(lognormal_draws(self.n_types, rng));
        let id = self.next_set;
        self.next_set += 1;
        TypeSet {
            id,
            sampler: WeightedIndex::new(probs).expect("lognormal weights are positive"),
        }
    }

    fn token(&mut self, set: u32, j: usize) -> u32 {
        let next = self.tokens.len() as u32;
        let kind = self.kind;
        let tokens = &mut self.tokens;
        *self.token_of.entry((set, j as u32)).or_insert_with(|| {
            tokens.push(format!("{}_c{}_{}", kind.label(), set, j));
            next
        })
    }

    fn emit_samples(&mut self, from: u32, set: &TypeSet, n: usize, rng: &mut SeededRng) {
        for _ in 0..n {
            let j = set.sampler.sample(rng);
            let to = self.token(set.id, j);
            self.pairs.push((from, to));
            self.pairs.push((to, from));
        }
    }
}

/// Generates one group. The group's random stream depends only on
/// `(cfg.seed, kind)`, so a group comes out the same alone or among others.
pub fn generate_group(kind: GroupKind, cfg: &SimConfig) -> Result<GroupPairs> {
    cfg.validate()?;
    let mut rng = rng::seeded(rng::derive_seed(cfg.seed, kind.stream()));
    let mut b = Builder {
        kind,
        n_types: cfg.n_context_types,
        tokens: (0..cfg.n_targets).map(|i| format!("{}_t{}", kind.label(), i)).collect(),
        token_of: HashMap::new(),
        next_set: 0,
        pairs: Vec::with_capacity(cfg.pairs_per_group()),
    };

    let shared_first = kind.shares_first_order().then(|| b.new_set(&mut rng));
    let shared_second = kind.shares_second_order().then(|| b.new_set(&mut rng));
    // C2 sets of a shared C1 set belong to its types, not to the target.
    let mut second_by_type: Vec<Option<TypeSet>> = Vec::new();

    for t in 0..cfg.n_targets as u32 {
        let private_first;
        let first = match &shared_first {
            Some(set) => set,
            None => {
                private_first = b.new_set(&mut rng);
                &private_first
            }
        };
        b.emit_samples(t, first, cfg.n_samples, &mut rng);

        for j in 0..cfg.n_context_types {
            let c = b.token(first.id, j);
            if let Some(second) = &shared_second {
                b.emit_samples(c, second, cfg.n_samples, &mut rng);
            } else if shared_first.is_some() {
                if second_by_type.len() <= j {
                    second_by_type.resize_with(j + 1, || None);
                }
                if second_by_type[j].is_none() {
                    second_by_type[j] = Some(b.new_set(&mut rng));
                }
                let set = second_by_type[j].as_ref().unwrap();
                b.emit_samples(c, set, cfg.n_samples, &mut rng);
            } else {
                let set = b.new_set(&mut rng);
                b.emit_samples(c, &set, cfg.n_samples, &mut rng);
            }
        }
    }

    Ok(GroupPairs {
        kind,
        tokens: b.tokens,
        pairs: b.pairs,
        targets: (0..cfg.n_targets as u32).collect(),
    })
}

/// Which targets belong to which group.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupManifest {
    entries: Vec<(GroupKind, Vec<String>)>,
}

impl GroupManifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, kind: GroupKind, targets: Vec<String>) -> Result<()> {
        if self.targets(kind).is_some() {
            return Err(Error::param(format!("group {kind} listed twice")));
        }
        for t in &targets {
            if self.entries.iter().any(|(_, ts)| ts.contains(t)) {
                return Err(Error::param(format!("target `{t}` appears in two groups")));
            }
        }
        self.entries.push((kind, targets));
        Ok(())
    }

    pub fn groups(&self) -> impl Iterator<Item = GroupKind> + '_ {
        self.entries.iter().map(|(k, _)| *k)
    }

    pub fn targets(&self, kind: GroupKind) -> Option<&[String]> {
        self.entries.iter().find(|(k, _)| *k == kind).map(|(_, t)| t.as_slice())
    }

    /// Token prefix shared by every string generated for `kind`.
    pub fn prefix(kind: GroupKind) -> String {
        format!("{}_", kind.label())
    }

    /// `<group>\t<target_word>` per line.
    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        for (kind, targets) in &self.entries {
            for t in targets {
                writeln!(w, "{kind}\t{t}").map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
        let mut entries: Vec<(GroupKind, Vec<String>)> = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let parse = |message: String| Error::Parse { path: path.to_path_buf(), line: i + 1, message };
            let (group, target) = line
                .split_once('\t')
                .ok_or_else(|| parse("expected `<group>\\t<target>`".into()))?;
            let kind: GroupKind = group.parse().map_err(|e: Error| parse(e.to_string()))?;
            match entries.iter_mut().find(|(k, _)| *k == kind) {
                Some((_, ts)) => ts.push(target.to_string()),
                None => entries.push((kind, vec![target.to_string()])),
            }
        }
        let mut manifest = GroupManifest::new();
        for (kind, targets) in entries {
            manifest.insert(kind, targets)?;
        }
        Ok(manifest)
    }
}

/// Generates every requested group, shuffles the union with `cfg.seed` and
/// writes the pair file and manifest. Returns the manifest and pair count.
pub fn generate_experiment1(cfg: &SimConfig, pairs_path: &Path, manifest_path: &Path) -> Result<(GroupManifest, usize)> {
    cfg.validate()?;
    let mut tokens: Vec<String> = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut manifest = GroupManifest::new();
    for kind in cfg.unique_groups() {
        let group = generate_group(kind, cfg)?;
        let offset = tokens.len() as u32;
        manifest.insert(kind, group.target_words())?;
        pairs.extend(group.pairs.iter().map(|&(a, b)| (a + offset, b + offset)));
        tokens.extend(group.tokens);
    }
    pairs.shuffle(&mut rng::seeded(cfg.seed));

    let mut writer = PairWriter::create(pairs_path)?;
    for &(a, b) in &pairs {
        writer.write(&tokens[a as usize], &tokens[b as usize])?;
    }
    let n = writer.finish()?;
    manifest.write(manifest_path)?;
    Ok((manifest, n))
}
