//! Bilingual term-pair alignment over a sentence-aligned corpus:
//! presence-based co-occurrence contingencies, Dunning's log-likelihood
//! ratio, termhood-weighted association, ranking, and P@N.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::{Corpus, SentencePair};
use crate::error::{Result, TermError};
use crate::ngram::unit_delta_f;

/// Smallest termhood fed into the association ratio; non-positive scores
/// are clamped up to this.
pub const TERMHOOD_EPSILON: f64 = 1e-9;

/// Per-pair 2x2 contingency over sentence pairs (presence, not
/// multiplicity).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairContingency {
    pub k11: u64,
    pub k12: u64,
    pub k21: u64,
    pub k22: u64,
}

impl PairContingency {
    pub fn n(&self) -> u64 {
        self.k11 + self.k12 + self.k21 + self.k22
    }
}

#[derive(Debug, Clone)]
pub struct AlignmentCandidate {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub contingency: PairContingency,
    pub logl: f64,
    pub termhood_source: f64,
    pub termhood_target: f64,
    pub association: f64,
}

impl AlignmentCandidate {
    pub fn source_joined(&self) -> String {
        self.source.join(" ")
    }

    pub fn target_joined(&self) -> String {
        self.target.join(" ")
    }
}

fn contains_contiguous(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || haystack.len() < needle.len() {
        return false;
    }
    (0..=haystack.len() - needle.len())
        .any(|start| haystack[start..start + needle.len()] == *needle)
}

/// Count, per candidate pair, in how many sentence pairs the source term
/// and the target term (co-)occur. Pairs with k11 below `min_cooc` are
/// dropped. Keys are (source index, target index) into the candidate sets.
pub fn cooccurrence_counts(
    pairs: &[SentencePair],
    src_terms: &[Vec<String>],
    tgt_terms: &[Vec<String>],
    min_cooc: u64,
) -> BTreeMap<(usize, usize), PairContingency> {
    let n = pairs.len() as u64;
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut src_totals = vec![0u64; src_terms.len()];
    let mut tgt_totals = vec![0u64; tgt_terms.len()];

    for pair in pairs {
        let src_tokens: Vec<String> = pair.source.tokens.iter().map(|t| t.surface.clone()).collect();
        let tgt_tokens: Vec<String> = pair.target.tokens.iter().map(|t| t.surface.clone()).collect();
        let src_hits: Vec<usize> = src_terms
            .iter()
            .enumerate()
            .filter(|(_, term)| contains_contiguous(&src_tokens, term))
            .map(|(i, _)| i)
            .collect();
        let tgt_hits: Vec<usize> = tgt_terms
            .iter()
            .enumerate()
            .filter(|(_, term)| contains_contiguous(&tgt_tokens, term))
            .map(|(i, _)| i)
            .collect();
        for &i in &src_hits {
            src_totals[i] += 1;
        }
        for &j in &tgt_hits {
            tgt_totals[j] += 1;
        }
        for &i in &src_hits {
            for &j in &tgt_hits {
                *joint.entry((i, j)).or_insert(0) += 1;
            }
        }
    }

    joint
        .into_iter()
        .filter(|(_, k11)| *k11 >= min_cooc)
        .map(|((i, j), k11)| {
            let k12 = src_totals[i] - k11;
            let k21 = tgt_totals[j] - k11;
            let k22 = n - k11 - k12 - k21;
            ((i, j), PairContingency { k11, k12, k21, k22 })
        })
        .collect()
}

/// Dunning's G² over a 2x2 table; zero-count cells contribute nothing.
pub fn log_likelihood_ratio(t: &PairContingency) -> f64 {
    let n = t.n() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let row1 = (t.k11 + t.k12) as f64;
    let row2 = (t.k21 + t.k22) as f64;
    let col1 = (t.k11 + t.k21) as f64;
    let col2 = (t.k12 + t.k22) as f64;
    let cell = |k: u64, row: f64, col: f64| -> f64 {
        if k == 0 {
            return 0.0;
        }
        let expected = row * col / n;
        k as f64 * (k as f64 / expected).ln()
    };
    let g2 = 2.0
        * (cell(t.k11, row1, col1)
            + cell(t.k12, row1, col2)
            + cell(t.k21, row2, col1)
            + cell(t.k22, row2, col2));
    // rounding can push an independent table a hair below zero
    g2.max(0.0)
}

pub fn clamp_termhood(t: f64) -> f64 {
    t.max(TERMHOOD_EPSILON)
}

/// Weight a raw association by both termhoods, penalizing imbalance via
/// the max-ratio divisor. Algebraically equal to raw * min(Tc, Te)^2.
pub fn termhood_weighted_association(raw: f64, termhood_c: f64, termhood_e: f64) -> f64 {
    let ratio = (termhood_e / termhood_c).max(termhood_c / termhood_e);
    raw / ratio * termhood_c * termhood_e
}

/// Truncation mode for ranked candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankMode {
    /// Keep candidates with association >= theta.
    Threshold(f64),
    /// Keep the first k.
    TopK(usize),
    All,
}

/// Sort descending by association, ties by raw LogL then by (source,
/// target) text, then truncate per mode.
pub fn rank_candidates(
    mut candidates: Vec<AlignmentCandidate>,
    mode: RankMode,
) -> Vec<AlignmentCandidate> {
    candidates.sort_by(|a, b| {
        b.association
            .partial_cmp(&a.association)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                b.logl
                    .partial_cmp(&a.logl)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .then_with(|| a.source.cmp(&b.source))
            .then_with(|| a.target.cmp(&b.target))
    });
    match mode {
        RankMode::Threshold(theta) => candidates
            .into_iter()
            .take_while(|c| c.association >= theta)
            .collect(),
        RankMode::TopK(k) => {
            candidates.truncate(k);
            candidates
        }
        RankMode::All => candidates,
    }
}

/// Fraction of correct pairs among the first n; pairs absent from the gold
/// set count as incorrect.
pub fn precision_at_n(
    ranked: &[AlignmentCandidate],
    gold: &HashMap<(String, String), bool>,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(TermError::Evaluation("P@N needs n >= 1".to_string()));
    }
    if n > ranked.len() {
        return Err(TermError::Evaluation(format!(
            "P@{n} requested but only {} candidates ranked",
            ranked.len()
        )));
    }
    let correct = ranked[..n]
        .iter()
        .filter(|c| {
            gold.get(&(c.source_joined(), c.target_joined()))
                .copied()
                .unwrap_or(false)
        })
        .count();
    Ok(correct as f64 / n as f64)
}

/// Options for the end-to-end candidate builder.
#[derive(Debug, Clone)]
pub struct AlignOptions {
    pub min_cooc: u64,
    /// Optional post-filter: drop pairs whose termhood ratio
    /// max(Tc,Te)/min(Tc,Te) exceeds this cap.
    pub ratio_cap: Option<f64>,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            min_cooc: 2,
            ratio_cap: None,
        }
    }
}

/// Score every surviving (source, target) candidate pair: contingency,
/// raw G², unit-Δf termhood per side (clamped), and the weighted
/// association.
#[allow(clippy::too_many_arguments)]
pub fn build_candidates(
    pairs: &[SentencePair],
    src_terms: &[Vec<String>],
    tgt_terms: &[Vec<String>],
    src_domain: &Corpus,
    src_background: &Corpus,
    tgt_domain: &Corpus,
    tgt_background: &Corpus,
    options: &AlignOptions,
) -> Vec<AlignmentCandidate> {
    let tables = cooccurrence_counts(pairs, src_terms, tgt_terms, options.min_cooc);
    let src_termhood: Vec<f64> = src_terms
        .iter()
        .map(|term| clamp_termhood(unit_delta_f(term, src_domain, src_background)))
        .collect();
    let tgt_termhood: Vec<f64> = tgt_terms
        .iter()
        .map(|term| clamp_termhood(unit_delta_f(term, tgt_domain, tgt_background)))
        .collect();

    tables
        .into_iter()
        .filter_map(|((i, j), contingency)| {
            let tc = src_termhood[i];
            let te = tgt_termhood[j];
            if let Some(cap) = options.ratio_cap {
                if (tc / te).max(te / tc) > cap {
                    return None;
                }
            }
            let logl = log_likelihood_ratio(&contingency);
            Some(AlignmentCandidate {
                source: src_terms[i].clone(),
                target: tgt_terms[j].clone(),
                contingency,
                logl,
                termhood_source: tc,
                termhood_target: te,
                association: termhood_weighted_association(logl, tc, te),
            })
        })
        .collect()
}
