//! Corpus-comparison termhood: relative frequency, frequency difference,
//! rank difference, number-intensified rank difference, and the
//! sentence-level sums built from them.
//!
//! All scores contrast a domain corpus against a general (background)
//! corpus. Out-of-vocabulary words contribute zero frequency and zero
//! rank, so a word seen only in the domain corpus gets strictly positive
//! difference scores.

use std::collections::BTreeMap;

use crate::corpus::{
    build_frequency_table, build_rank_table, Corpus, FrequencyTable, RankTable, Sentence,
};

/// Per-word-type termhood scores over a (domain, background) corpus pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TermhoodRecord {
    pub word: String,
    pub c_d: u64,
    pub c_b: u64,
    pub f_d: f64,
    pub f_b: f64,
    pub r_d: f64,
    pub r_b: f64,
    pub delta_f: f64,
    pub delta_r: f64,
    /// Rank difference scaled by the domain count.
    pub delta_r_c: f64,
}

/// Termhood records for the union of domain and background vocabularies.
///
/// Kept in a BTreeMap so iteration order (and therefore every report) is
/// deterministic.
#[derive(Debug, Clone)]
pub struct TermhoodTable {
    pub records: BTreeMap<String, TermhoodRecord>,
    zero: TermhoodRecord,
}

/// Sentence-level termhood aggregates: per-feature sums plus the mean used
/// by the corpus comparison report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentenceTermhood {
    pub freq_sen_d: f64,
    pub freq_sen_b: f64,
    pub rank_sen_d: f64,
    pub rank_sen_b: f64,
    pub delta_freq_sen: f64,
    pub delta_rank_sen: f64,
    pub mean_delta_f: f64,
}

/// One row of the corpus comparison report.
#[derive(Debug, Clone)]
pub struct CorpusReportRow {
    pub name: String,
    pub sentence_count: usize,
    /// Mean over sentences of the per-sentence domain frequency sum.
    pub mean_freq_sen_d: f64,
    /// Mean over sentences of the per-sentence background frequency sum.
    pub mean_freq_sen_b: f64,
    /// Mean over sentences of the per-sentence mean frequency difference.
    pub mean_termhood: f64,
}

/// Relative frequency of a word in its corpus; 0 for out-of-vocabulary
/// words.
pub fn relative_frequency(freq: &FrequencyTable, word: &str) -> f64 {
    if freq.total == 0 {
        return 0.0;
    }
    freq.count(word) as f64 / freq.total as f64
}

impl TermhoodTable {
    pub fn build(domain: &Corpus, background: &Corpus) -> TermhoodTable {
        let freq_d = build_frequency_table(domain);
        let freq_b = build_frequency_table(background);
        TermhoodTable::from_tables(&freq_d, &freq_b)
    }

    pub fn from_tables(freq_d: &FrequencyTable, freq_b: &FrequencyTable) -> TermhoodTable {
        let rank_d = build_rank_table(freq_d);
        let rank_b = build_rank_table(freq_b);
        let mut records = BTreeMap::new();
        let vocab = freq_d.counts.keys().chain(freq_b.counts.keys());
        for word in vocab {
            if records.contains_key(word) {
                continue;
            }
            records.insert(
                word.clone(),
                make_record(word, freq_d, freq_b, &rank_d, &rank_b),
            );
        }
        TermhoodTable {
            records,
            zero: zero_record(),
        }
    }

    /// Record for `word`; all-zero scores if the word is in neither corpus.
    pub fn record(&self, word: &str) -> &TermhoodRecord {
        self.records.get(word).unwrap_or(&self.zero)
    }

    pub fn freq_difference(&self, word: &str) -> f64 {
        self.record(word).delta_f
    }

    pub fn rank_difference(&self, word: &str) -> f64 {
        self.record(word).delta_r
    }

    pub fn intensified_rank_difference(&self, word: &str) -> f64 {
        self.record(word).delta_r_c
    }
}

fn make_record(
    word: &str,
    freq_d: &FrequencyTable,
    freq_b: &FrequencyTable,
    rank_d: &RankTable,
    rank_b: &RankTable,
) -> TermhoodRecord {
    let c_d = freq_d.count(word);
    let c_b = freq_b.count(word);
    let f_d = relative_frequency(freq_d, word);
    let f_b = relative_frequency(freq_b, word);
    let r_d = rank_d.rank(word);
    let r_b = rank_b.rank(word);
    TermhoodRecord {
        word: word.to_string(),
        c_d,
        c_b,
        f_d,
        f_b,
        r_d,
        r_b,
        delta_f: f_d - f_b,
        delta_r: r_d - r_b,
        delta_r_c: c_d as f64 * (r_d - r_b),
    }
}

fn zero_record() -> TermhoodRecord {
    TermhoodRecord {
        word: String::new(),
        c_d: 0,
        c_b: 0,
        f_d: 0.0,
        f_b: 0.0,
        r_d: 0.0,
        r_b: 0.0,
        delta_f: 0.0,
        delta_r: 0.0,
        delta_r_c: 0.0,
    }
}

/// Sums over every token of the sentence, duplicates included.
pub fn sentence_termhood(sentence: &Sentence, table: &TermhoodTable) -> SentenceTermhood {
    let mut acc = SentenceTermhood {
        freq_sen_d: 0.0,
        freq_sen_b: 0.0,
        rank_sen_d: 0.0,
        rank_sen_b: 0.0,
        delta_freq_sen: 0.0,
        delta_rank_sen: 0.0,
        mean_delta_f: 0.0,
    };
    for token in &sentence.tokens {
        let rec = table.record(&token.surface);
        acc.freq_sen_d += rec.f_d;
        acc.freq_sen_b += rec.f_b;
        acc.rank_sen_d += rec.r_d;
        acc.rank_sen_b += rec.r_b;
        acc.delta_freq_sen += rec.delta_f;
        acc.delta_rank_sen += rec.delta_r;
    }
    if !sentence.tokens.is_empty() {
        acc.mean_delta_f = acc.delta_freq_sen / sentence.tokens.len() as f64;
    }
    acc
}

/// Compare several named corpora against one background corpus. Rows come
/// back sorted descending by mean termhood, ties by name.
pub fn corpus_termhood_report(
    corpora: &[(String, &Corpus)],
    background: &Corpus,
) -> Vec<CorpusReportRow> {
    let mut rows: Vec<CorpusReportRow> = corpora
        .iter()
        .map(|(name, corpus)| {
            let table = TermhoodTable::build(corpus, background);
            let n = corpus.sentences.len();
            let mut freq_d = 0.0;
            let mut freq_b = 0.0;
            let mut termhood = 0.0;
            for sentence in &corpus.sentences {
                let st = sentence_termhood(sentence, &table);
                freq_d += st.freq_sen_d;
                freq_b += st.freq_sen_b;
                termhood += st.mean_delta_f;
            }
            let n_f = n as f64;
            CorpusReportRow {
                name: name.clone(),
                sentence_count: n,
                mean_freq_sen_d: freq_d / n_f,
                mean_freq_sen_b: freq_b / n_f,
                mean_termhood: termhood / n_f,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.mean_termhood
            .partial_cmp(&a.mean_termhood)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.name.cmp(&b.name))
    });
    rows
}
