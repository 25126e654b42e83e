//! N-gram baseline term candidate extraction: contiguous in-sentence
//! n-grams filtered by boundary stopwords and an optional noun-final POS
//! rule, ranked by the frequency difference of the candidate treated as a
//! single unit.

use std::collections::{HashMap, HashSet};

use crate::corpus::Corpus;

#[derive(Debug, Clone, PartialEq)]
pub struct NGramCandidate {
    pub tokens: Vec<String>,
    pub count_domain: u64,
    pub count_background: u64,
    /// Frequency difference of the joined candidate, counted as a unit in
    /// both corpora over their token totals.
    pub score: f64,
}

impl NGramCandidate {
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Candidate filters. Both are on by default; the noun-final rule only
/// applies when POS labels exist.
#[derive(Debug, Clone)]
pub struct NGramFilters {
    pub stopwords: HashSet<String>,
    pub noun_final: bool,
}

impl Default for NGramFilters {
    fn default() -> Self {
        NGramFilters {
            stopwords: HashSet::new(),
            noun_final: true,
        }
    }
}

/// Count contiguous occurrences of `tokens` inside the sentences of
/// `corpus` (never across a sentence boundary).
pub fn count_ngram(corpus: &Corpus, tokens: &[String]) -> u64 {
    if tokens.is_empty() {
        return 0;
    }
    let mut count = 0;
    for sentence in &corpus.sentences {
        if sentence.tokens.len() < tokens.len() {
            continue;
        }
        for start in 0..=sentence.tokens.len() - tokens.len() {
            if sentence.tokens[start..start + tokens.len()]
                .iter()
                .zip(tokens)
                .all(|(t, w)| t.surface == *w)
            {
                count += 1;
            }
        }
    }
    count
}

/// Unit-level frequency difference of a candidate: contiguous counts over
/// token totals in each corpus.
pub fn unit_delta_f(tokens: &[String], domain: &Corpus, background: &Corpus) -> f64 {
    let f_d = match domain.token_count() {
        0 => 0.0,
        total => count_ngram(domain, tokens) as f64 / total as f64,
    };
    let f_b = match background.token_count() {
        0 => 0.0,
        total => count_ngram(background, tokens) as f64 / total as f64,
    };
    f_d - f_b
}

/// Extract all surviving n-gram candidates, ranked by unit Δf descending,
/// ties by domain count descending, candidate length descending, then
/// candidate text.
pub fn extract_ngrams(
    corpus: &Corpus,
    background: &Corpus,
    max_n: usize,
    min_count: u64,
    filters: &NGramFilters,
) -> Vec<NGramCandidate> {
    let max_n = max_n.max(1);
    let mut counts: HashMap<Vec<String>, u64> = HashMap::new();
    for sentence in &corpus.sentences {
        let n = sentence.tokens.len();
        for len in 1..=max_n.min(n) {
            for start in 0..=n - len {
                let window = &sentence.tokens[start..start + len];
                if filters.stopwords.contains(&window[0].surface)
                    || filters.stopwords.contains(&window[len - 1].surface)
                {
                    continue;
                }
                if filters.noun_final {
                    let final_pos = &window[len - 1].pos;
                    if !final_pos.is_empty()
                        && !final_pos.starts_with('N')
                        && !final_pos.starts_with('n')
                    {
                        continue;
                    }
                }
                let key: Vec<String> = window.iter().map(|t| t.surface.clone()).collect();
                *counts.entry(key).or_insert(0) += 1;
            }
        }
    }

    let domain_total = corpus.token_count() as f64;
    let background_total = background.token_count() as f64;
    let mut candidates: Vec<NGramCandidate> = counts
        .into_iter()
        .filter(|(_, count)| *count >= min_count)
        .map(|(tokens, count)| {
            let count_background = count_ngram(background, &tokens);
            let f_d = count as f64 / domain_total;
            let f_b = if background_total > 0.0 {
                count_background as f64 / background_total
            } else {
                0.0
            };
            NGramCandidate {
                tokens,
                count_domain: count,
                count_background,
                score: f_d - f_b,
            }
        })
        .collect();
    candidates.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| b.count_domain.cmp(&a.count_domain))
            // prefer the longer candidate when a sub-gram ties with its
            // containing gram (same score, same count)
            .then_with(|| b.tokens.len().cmp(&a.tokens.len()))
            .then_with(|| a.tokens.cmp(&b.tokens))
    });
    candidates
}
