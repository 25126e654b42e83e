//! Tokenized corpora and the frequency/rank tables behind every termhood
//! score.
//!
//! Input is a column file: one token per line (`token POS [BIO]`), blank
//! line between sentences. Tokens are NFC-normalized on load and compared
//! byte-exact afterwards; no case folding.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Result, TermError};

/// BIO chunk tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BioTag {
    B,
    I,
    O,
}

impl BioTag {
    pub fn parse(s: &str) -> Option<BioTag> {
        match s {
            "B" => Some(BioTag::B),
            "I" => Some(BioTag::I),
            "O" => Some(BioTag::O),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BioTag::B => "B",
            BioTag::I => "I",
            BioTag::O => "O",
        }
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One word type occurrence: surface form plus POS label (may be empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub pos: String,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: impl Into<String>) -> Token {
        let surface: String = surface.into().nfc().collect();
        Token {
            surface,
            pos: pos.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    /// Present iff the source file carried a third column on every line.
    pub labels: Option<Vec<BioTag>>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusRole {
    Domain,
    Background,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub role: CorpusRole,
}

impl Corpus {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// True iff every sentence carries labels.
    pub fn is_labeled(&self) -> bool {
        !self.sentences.is_empty() && self.sentences.iter().all(|s| s.labels.is_some())
    }
}

/// Absolute word-type counts of one corpus.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    pub counts: HashMap<String, u64>,
    pub total: u64,
}

impl FrequencyTable {
    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }
}

/// Normalized reversed frequency ranks: the most frequent word type gets
/// the largest rank, the whole range lies in (0, 1]. Tied counts share the
/// mean of their occupied positions.
#[derive(Debug, Clone)]
pub struct RankTable {
    pub ranks: HashMap<String, f64>,
    pub vocab_size: usize,
}

impl RankTable {
    /// Rank of `word`, 0.0 for out-of-vocabulary words.
    pub fn rank(&self, word: &str) -> f64 {
        self.ranks.get(word).copied().unwrap_or(0.0)
    }
}

/// One line of a sentence-aligned parallel corpus.
#[derive(Debug, Clone)]
pub struct SentencePair {
    pub source: Sentence,
    pub target: Sentence,
}

/// Result of loading a parallel corpus: the usable pairs plus a count of
/// skipped (blank-on-either-side) lines.
#[derive(Debug, Clone)]
pub struct ParallelCorpus {
    pub pairs: Vec<SentencePair>,
    pub skipped: usize,
}

/// Parse a column corpus file: 2 or 3 whitespace-separated columns per
/// line, blank line between sentences. A third column must be a BIO tag
/// and must be present on every line or on none.
pub fn load_column_corpus(path: &Path, role: CorpusRole) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|source| TermError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_column_corpus(&text, role, path)
}

pub fn parse_column_corpus(text: &str, role: CorpusRole, path: &Path) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut labels: Vec<BioTag> = Vec::new();
    // None until the first data line fixes the column count.
    let mut labeled: Option<bool> = None;
    let mut seen_data = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            if !tokens.is_empty() {
                sentences.push(finish_sentence(&mut tokens, &mut labels, labeled == Some(true)));
            }
            continue;
        }
        // Leading comment header written by our own tools.
        if !seen_data && line.starts_with('#') {
            continue;
        }
        seen_data = true;
        let cols: Vec<&str> = line.split_whitespace().collect();
        let has_label = match cols.len() {
            2 => false,
            3 => true,
            n => {
                return Err(TermError::Format {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("expected 2 or 3 columns, found {n}"),
                })
            }
        };
        match labeled {
            None => labeled = Some(has_label),
            Some(expected) if expected != has_label => {
                return Err(TermError::Format {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: "mixed 2- and 3-column lines".to_string(),
                })
            }
            _ => {}
        }
        tokens.push(Token::new(cols[0], cols[1]));
        if has_label {
            let tag = BioTag::parse(cols[2]).ok_or_else(|| TermError::Label {
                path: path.to_path_buf(),
                line: line_no,
                tag: cols[2].to_string(),
            })?;
            labels.push(tag);
        }
    }
    if !tokens.is_empty() {
        sentences.push(finish_sentence(&mut tokens, &mut labels, labeled == Some(true)));
    }
    if sentences.is_empty() {
        return Err(TermError::EmptyCorpus {
            path: path.to_path_buf(),
        });
    }
    Ok(Corpus { sentences, role })
}

fn finish_sentence(tokens: &mut Vec<Token>, labels: &mut Vec<BioTag>, labeled: bool) -> Sentence {
    Sentence {
        tokens: std::mem::take(tokens),
        labels: if labeled {
            Some(std::mem::take(labels))
        } else {
            labels.clear();
            None
        },
    }
}

/// Write a corpus back to column format. Inverse of `load_column_corpus`
/// on token/POS/label content.
pub fn write_column_corpus<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for sentence in &corpus.sentences {
        for (i, token) in sentence.tokens.iter().enumerate() {
            match &sentence.labels {
                Some(labels) => writeln!(out, "{}\t{}\t{}", token.surface, token.pos, labels[i])?,
                None => writeln!(out, "{}\t{}", token.surface, token.pos)?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn build_frequency_table(corpus: &Corpus) -> FrequencyTable {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for sentence in &corpus.sentences {
        for token in &sentence.tokens {
            *counts.entry(token.surface.clone()).or_insert(0) += 1;
            total += 1;
        }
    }
    FrequencyTable { counts, total }
}

/// Fractional reversed ranks normalized by vocabulary size.
///
/// Word types sorted by ascending count occupy positions 1..|V|; tied
/// counts take the mean of their positions; rank = position / |V|.
pub fn build_rank_table(freq: &FrequencyTable) -> RankTable {
    let vocab_size = freq.counts.len();
    let mut by_count: Vec<(&String, u64)> = freq.counts.iter().map(|(w, &c)| (w, c)).collect();
    by_count.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));

    let mut ranks = HashMap::with_capacity(vocab_size);
    let n = vocab_size as f64;
    let mut i = 0;
    while i < by_count.len() {
        let mut j = i;
        while j < by_count.len() && by_count[j].1 == by_count[i].1 {
            j += 1;
        }
        // positions are 1-based; mean of i+1 ..= j
        let mean_pos = ((i + 1 + j) as f64) / 2.0;
        let rank = mean_pos / n;
        for entry in &by_count[i..j] {
            ranks.insert(entry.0.clone(), rank);
        }
        i = j;
    }
    RankTable { ranks, vocab_size }
}

/// Load two line-aligned files; lines are space-separated tokens with an
/// optional `token/POS` suffix. Blank lines on either side are skipped and
/// counted.
pub fn load_parallel_corpus(src_path: &Path, tgt_path: &Path) -> Result<ParallelCorpus> {
    let read = |p: &Path| -> Result<Vec<String>> {
        let text = fs::read_to_string(p).map_err(|source| TermError::Io {
            path: p.to_path_buf(),
            source,
        })?;
        Ok(text.lines().map(str::to_string).collect())
    };
    let src_lines = read(src_path)?;
    let tgt_lines = read(tgt_path)?;
    if src_lines.len() != tgt_lines.len() {
        return Err(TermError::AlignmentLength {
            src_path: src_path.to_path_buf(),
            src_lines: src_lines.len(),
            tgt_path: tgt_path.to_path_buf(),
            tgt_lines: tgt_lines.len(),
        });
    }
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for (src, tgt) in src_lines.iter().zip(&tgt_lines) {
        let src = src.trim();
        let tgt = tgt.trim();
        if src.is_empty() || tgt.is_empty() {
            skipped += 1;
            continue;
        }
        pairs.push(SentencePair {
            source: parse_plain_sentence(src),
            target: parse_plain_sentence(tgt),
        });
    }
    Ok(ParallelCorpus { pairs, skipped })
}

fn parse_plain_sentence(line: &str) -> Sentence {
    let tokens = line
        .split_whitespace()
        .map(|tok| match tok.rsplit_once('/') {
            Some((surface, pos)) if !surface.is_empty() => Token::new(surface, pos),
            _ => Token::new(tok, ""),
        })
        .collect();
    Sentence {
        tokens,
        labels: None,
    }
}

/// Convenience for tests and synthetic corpora.
pub fn corpus_from_tokens(sentences: &[&[&str]], role: CorpusRole) -> Corpus {
    Corpus {
        sentences: sentences
            .iter()
            .map(|s| Sentence {
                tokens: s.iter().map(|w| Token::new(*w, "")).collect(),
                labels: None,
            })
            .collect(),
        role,
    }
}

#[allow(unused)]
pub(crate) fn path_for_tests(name: &str) -> PathBuf {
    PathBuf::from(name)
}
