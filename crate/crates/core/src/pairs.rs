//! Word-context pair files, vocabularies and marginal counts.
//!
//! A pair file holds one `(target, context)` observation per line, the two
//! words separated by a single tab:
//!
//! ```text
//! <target>\t<context>\n
//! ```
//!
//! Files are UTF-8 without a header. A missing newline after the last record
//! is accepted on read; writers always terminate every line.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// One `(target, context)` observation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairRecord {
    pub target: String,
    pub context: String,
}

impl PairRecord {
    pub fn new(target: impl Into<String>, context: impl Into<String>) -> Result<Self> {
        let target = target.into();
        let context = context.into();
        check_word(&target)?;
        check_word(&context)?;
        Ok(PairRecord { target, context })
    }
}

impl fmt::Display for PairRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.target, self.context)
    }
}

fn word_problem(word: &str) -> Option<&'static str> {
    if word.is_empty() {
        Some("empty word")
    } else if word.contains(['\t', '\n', '\r']) {
        Some("word contains a tab or line break")
    } else {
        None
    }
}

fn check_word(word: &str) -> Result<()> {
    match word_problem(word) {
        Some(problem) => Err(Error::param(format!("{problem}: {word:?}"))),
        None => Ok(()),
    }
}

/// Splits one line (terminator already removed) into its two fields.
pub(crate) fn split_line(line: &str) -> std::result::Result<(&str, &str), String> {
    let mut fields = line.split('\t');
    let (Some(target), Some(context), None) = (fields.next(), fields.next(), fields.next()) else {
        let n = line.split('\t').count();
        return Err(format!("expected 2 tab-separated fields, found {n}"));
    };
    if let Some(problem) = word_problem(target).or_else(|| word_problem(context)) {
        return Err(problem.to_string());
    }
    Ok((target, context))
}

fn trim_terminator(line: &mut String) {
    if line.ends_with('\n') {
        line.pop();
        if line.ends_with('\r') {
            line.pop();
        }
    }
}

/// Line-by-line reader over a pair file.
pub struct PairReader<R> {
    inner: R,
    path: PathBuf,
    line_no: usize,
    buf: String,
}

impl PairReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(PairReader::new(BufReader::with_capacity(1 << 16, file), path))
    }
}

impl<R: BufRead> PairReader<R> {
    pub fn new(inner: R, path: impl Into<PathBuf>) -> Self {
        PairReader {
            inner,
            path: path.into(),
            line_no: 0,
            buf: String::new(),
        }
    }

    /// Advances to the next line and hands its two fields to `f`, avoiding an
    /// allocation per record. Returns `Ok(false)` at end of input.
    fn next_fields<F>(&mut self, f: F) -> Result<bool>
    where
        F: FnOnce(&str, &str),
    {
        self.buf.clear();
        let n = self
            .inner
            .read_line(&mut self.buf)
            .map_err(|e| Error::io(&self.path, e))?;
        if n == 0 {
            return Ok(false);
        }
        self.line_no += 1;
        trim_terminator(&mut self.buf);
        match split_line(&self.buf) {
            Ok((t, c)) => {
                f(t, c);
                Ok(true)
            }
            Err(message) => Err(Error::Parse {
                path: self.path.clone(),
                line: self.line_no,
                message,
            }),
        }
    }
}

impl<R: BufRead> Iterator for PairReader<R> {
    type Item = Result<PairRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut record = None;
        match self.next_fields(|t, c| {
            record = Some(PairRecord {
                target: t.to_string(),
                context: c.to_string(),
            })
        }) {
            Ok(true) => record.map(Ok),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<PairRecord>> {
    PairReader::open(path)?.collect()
}

/// Writes `pairs` to `path`, returning the number of records written.
pub fn write_pairs<'a, I>(path: impl AsRef<Path>, pairs: I) -> Result<usize>
where
    I: IntoIterator<Item = &'a PairRecord>,
{
    let path = path.as_ref();
    let mut writer = PairWriter::create(path)?;
    for pair in pairs {
        writer.write(&pair.target, &pair.context)?;
    }
    writer.finish()
}

/// Buffered pair-file writer that does not require owned records.
pub struct PairWriter {
    inner: BufWriter<File>,
    path: PathBuf,
    written: usize,
}

impl PairWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(PairWriter {
            inner: BufWriter::with_capacity(1 << 16, file),
            path: path.to_path_buf(),
            written: 0,
        })
    }

    pub fn write(&mut self, target: &str, context: &str) -> Result<()> {
        debug_assert!(word_problem(target).is_none() && word_problem(context).is_none());
        writeln!(self.inner, "{target}\t{context}").map_err(|e| Error::io(&self.path, e))?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<usize> {
        self.inner.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.written)
    }
}

/// Bidirectional word/id mapping with per-word occurrence counts.
///
/// Ids are dense and assigned in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, u32>,
    counts: Vec<u64>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from `(word, count)` entries in id order.
    pub fn from_counts<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::new();
        for (word, count) in entries {
            let word = word.into();
            check_word(&word)?;
            if vocab.ids.contains_key(&word) {
                return Err(Error::param(format!("duplicate vocabulary entry `{word}`")));
            }
            let id = vocab.push(word);
            vocab.counts[id as usize] = count;
        }
        Ok(vocab)
    }

    fn push(&mut self, word: String) -> u32 {
        let id = u32::try_from(self.words.len()).expect("vocabulary exceeds u32 ids");
        self.ids.insert(word.clone(), id);
        self.words.push(word);
        self.counts.push(0);
        id
    }

    /// Records one occurrence of `word` and returns its id.
    pub fn observe(&mut self, word: &str) -> u32 {
        let id = match self.ids.get(word) {
            Some(&id) => id,
            None => self.push(word.to_string()),
        };
        self.counts[id as usize] += 1;
        id
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn count(&self, id: u32) -> Option<u64> {
        self.counts.get(id as usize).copied()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Sum of all counts, i.e. the number of observations in this role.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub(crate) fn require(&self, word: &str) -> Result<u32> {
        self.id(word).ok_or_else(|| Error::UnknownWord(word.to_string()))
    }
}

/// Counts target and context marginals over a pair stream.
pub fn build_vocab<I>(pairs: I) -> Result<(Vocabulary, Vocabulary)>
where
    I: IntoIterator<Item = Result<PairRecord>>,
{
    let mut targets = Vocabulary::new();
    let mut contexts = Vocabulary::new();
    for pair in pairs {
        let pair = pair?;
        targets.observe(&pair.target);
        contexts.observe(&pair.context);
    }
    Ok((targets, contexts))
}

/// A pair file loaded into memory as id pairs, with both vocabularies.
#[derive(Debug, Clone, Default)]
pub struct PairCorpus {
    pub targets: Vocabulary,
    pub contexts: Vocabulary,
    pub pairs: Vec<(u32, u32)>,
}

impl PairCorpus {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = PairReader::open(path)?;
        let mut corpus = PairCorpus::default();
        loop {
            let PairCorpus {
                targets,
                contexts,
                pairs,
            } = &mut corpus;
            let more = reader.next_fields(|t, c| {
                let t = targets.observe(t);
                let c = contexts.observe(c);
                pairs.push((t, c));
            })?;
            if !more {
                break;
            }
        }
        Ok(corpus)
    }

    pub fn from_records<'a, I>(records: I) -> Self
    where
        I: IntoIterator<Item = &'a PairRecord>,
    {
        let mut corpus = PairCorpus::default();
        for r in records {
            let t = corpus.targets.observe(&r.target);
            let c = corpus.contexts.observe(&r.context);
            corpus.pairs.push((t, c));
        }
        corpus
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn record(&self, index: usize) -> Option<PairRecord> {
        let &(t, c) = self.pairs.get(index)?;
        Some(PairRecord {
            target: self.targets.word(t)?.to_string(),
            context: self.contexts.word(c)?.to_string(),
        })
    }
}

fn read_lines(path: &Path, lines: &mut Vec<String>) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::with_capacity(1 << 16, file);
    let mut line_no = lines.len();
    loop {
        let mut buf = String::new();
        let n = reader.read_line(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Ok(());
        }
        line_no += 1;
        trim_terminator(&mut buf);
        if let Err(message) = split_line(&buf) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message,
            });
        }
        lines.push(buf);
    }
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::with_capacity(1 << 16, file);
    for line in lines {
        writeln!(writer, "{line}").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Concatenates the pair files in `inputs`, applies a seeded Fisher–Yates
/// shuffle and writes the result to `output`. Returns the number of lines.
pub fn shuffle_concat(inputs: &[&Path], output: &Path, seed: u64) -> Result<usize> {
    let mut lines = Vec::new();
    for input in inputs {
        read_lines(input, &mut lines)?;
    }
    lines.shuffle(&mut rng::seeded(seed));
    write_lines(output, &lines)?;
    Ok(lines.len())
}

/// Writes a uniformly random permutation of the lines of `input` to `output`.
/// `input` and `output` may name the same file.
pub fn shuffle_pairs(input: &Path, output: &Path, seed: u64) -> Result<usize> {
    shuffle_concat(&[input], output, seed)
}
