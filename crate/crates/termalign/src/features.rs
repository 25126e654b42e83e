//! Per-token feature emission: the word/POS basics, the word-level and
//! sentence-level termhood scores, and quantile binning that turns the
//! real-valued scores into categorical observations a log-linear sequence
//! model can consume.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{BioTag, Corpus};
use crate::error::{Result, TermError};
use crate::termhood::{sentence_termhood, TermhoodTable};

/// The full feature inventory, in fixed column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureName {
    Word,
    Len,
    Pos,
    Count,
    FreqD,
    FreqB,
    RankD,
    RankB,
    FreqSenD,
    FreqSenB,
    RankSenD,
    RankSenB,
    DeltaFreq,
    DeltaRank,
    DeltaFreqSen,
    DeltaRankSen,
}

pub const ALL_FEATURES: [FeatureName; 16] = [
    FeatureName::Word,
    FeatureName::Len,
    FeatureName::Pos,
    FeatureName::Count,
    FeatureName::FreqD,
    FeatureName::FreqB,
    FeatureName::RankD,
    FeatureName::RankB,
    FeatureName::FreqSenD,
    FeatureName::FreqSenB,
    FeatureName::RankSenD,
    FeatureName::RankSenB,
    FeatureName::DeltaFreq,
    FeatureName::DeltaRank,
    FeatureName::DeltaFreqSen,
    FeatureName::DeltaRankSen,
];

impl FeatureName {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureName::Word => "word",
            FeatureName::Len => "len",
            FeatureName::Pos => "pos",
            FeatureName::Count => "count",
            FeatureName::FreqD => "freq_d",
            FeatureName::FreqB => "freq_b",
            FeatureName::RankD => "rank_d",
            FeatureName::RankB => "rank_b",
            FeatureName::FreqSenD => "freq_sen_d",
            FeatureName::FreqSenB => "freq_sen_b",
            FeatureName::RankSenD => "rank_sen_d",
            FeatureName::RankSenB => "rank_sen_b",
            FeatureName::DeltaFreq => "delta_freq",
            FeatureName::DeltaRank => "delta_rank",
            FeatureName::DeltaFreqSen => "delta_freq_sen",
            FeatureName::DeltaRankSen => "delta_rank_sen",
        }
    }

    /// Parse a name; accepts the canonical snake_case form and the
    /// `Freq_D` / `ΔFreq_Sen` style spellings.
    pub fn parse(s: &str) -> Result<FeatureName> {
        let norm: String = s
            .trim()
            .replace(['Δ', 'δ'], "delta_")
            .to_lowercase();
        let norm = norm.replace("delta__", "delta_");
        for f in ALL_FEATURES {
            if f.as_str() == norm {
                return Ok(f);
            }
        }
        // `ΔFreq` normalizes to `delta_freq` already; also accept the
        // underscore-free `deltafreq` etc.
        let squashed: String = norm.chars().filter(|c| *c != '_').collect();
        for f in ALL_FEATURES {
            let target: String = f.as_str().chars().filter(|c| *c != '_').collect();
            if target == squashed {
                return Ok(f);
            }
        }
        Err(TermError::Config(format!("unknown feature name: {s:?}")))
    }

    /// True for the real-valued features that go through the binner.
    pub fn is_continuous(&self) -> bool {
        !matches!(
            self,
            FeatureName::Word | FeatureName::Pos | FeatureName::Len | FeatureName::Count
        )
    }
}

/// Which features to emit, with binning and window parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub features: Vec<FeatureName>,
    pub bin_count: usize,
    /// Template window for word/POS observations.
    pub word_window: Vec<i32>,
    /// Template window for binned numeric observations.
    pub numeric_window: Vec<i32>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            features: ALL_FEATURES.to_vec(),
            bin_count: 16,
            word_window: vec![-2, -1, 0, 1, 2],
            numeric_window: vec![-1, 0, 1],
        }
    }
}

impl FeatureConfig {
    /// Parse a feature-group spec: a preset name or a comma-separated
    /// feature list.
    pub fn parse_group(spec: &str) -> Result<FeatureConfig> {
        let features = match spec.trim().to_lowercase().as_str() {
            "word" => vec![FeatureName::Word],
            "word-pos" => vec![FeatureName::Word, FeatureName::Pos],
            "freq" => vec![
                FeatureName::Word,
                FeatureName::Pos,
                FeatureName::FreqD,
                FeatureName::FreqB,
            ],
            "rank" => vec![
                FeatureName::Word,
                FeatureName::Pos,
                FeatureName::RankD,
                FeatureName::RankB,
            ],
            "freq-rank" => vec![
                FeatureName::Word,
                FeatureName::Pos,
                FeatureName::FreqD,
                FeatureName::FreqB,
                FeatureName::RankD,
                FeatureName::RankB,
            ],
            "dfreq" => vec![FeatureName::Word, FeatureName::Pos, FeatureName::DeltaFreq],
            "drank" => vec![FeatureName::Word, FeatureName::Pos, FeatureName::DeltaRank],
            "dfreq-dfreqsen" => vec![
                FeatureName::Word,
                FeatureName::Pos,
                FeatureName::DeltaFreq,
                FeatureName::DeltaFreqSen,
            ],
            "drank-dranksen" => vec![
                FeatureName::Word,
                FeatureName::Pos,
                FeatureName::DeltaRank,
                FeatureName::DeltaRankSen,
            ],
            "diffs" => vec![
                FeatureName::Word,
                FeatureName::Pos,
                FeatureName::DeltaFreq,
                FeatureName::DeltaRank,
                FeatureName::DeltaFreqSen,
                FeatureName::DeltaRankSen,
            ],
            "all" => ALL_FEATURES.to_vec(),
            list => {
                let mut features = Vec::new();
                for name in list.split(',') {
                    if name.trim().is_empty() {
                        continue;
                    }
                    let f = FeatureName::parse(name)?;
                    if !features.contains(&f) {
                        features.push(f);
                    }
                }
                if features.is_empty() {
                    return Err(TermError::Config(format!("empty feature group: {spec:?}")));
                }
                features
            }
        };
        let mut ordered: Vec<FeatureName> = ALL_FEATURES
            .iter()
            .filter(|f| features.contains(f))
            .copied()
            .collect();
        // keep the canonical column order regardless of how the list was
        // written
        debug_assert_eq!(ordered.len(), features.len());
        ordered.dedup();
        Ok(FeatureConfig {
            features: ordered,
            ..FeatureConfig::default()
        })
    }
}

/// One token's feature values. Every field is populated; column selection
/// happens at emission time.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub word: String,
    pub len: usize,
    pub pos: String,
    pub count: usize,
    pub freq_d: f64,
    pub freq_b: f64,
    pub rank_d: f64,
    pub rank_b: f64,
    pub freq_sen_d: f64,
    pub freq_sen_b: f64,
    pub rank_sen_d: f64,
    pub rank_sen_b: f64,
    pub delta_freq: f64,
    pub delta_rank: f64,
    pub delta_freq_sen: f64,
    pub delta_rank_sen: f64,
    pub label: Option<BioTag>,
}

impl FeatureRow {
    pub fn continuous_value(&self, f: FeatureName) -> f64 {
        match f {
            FeatureName::FreqD => self.freq_d,
            FeatureName::FreqB => self.freq_b,
            FeatureName::RankD => self.rank_d,
            FeatureName::RankB => self.rank_b,
            FeatureName::FreqSenD => self.freq_sen_d,
            FeatureName::FreqSenB => self.freq_sen_b,
            FeatureName::RankSenD => self.rank_sen_d,
            FeatureName::RankSenB => self.rank_sen_b,
            FeatureName::DeltaFreq => self.delta_freq,
            FeatureName::DeltaRank => self.delta_rank,
            FeatureName::DeltaFreqSen => self.delta_freq_sen,
            FeatureName::DeltaRankSen => self.delta_rank_sen,
            _ => panic!("{:?} is not a continuous feature", f),
        }
    }

    /// Raw column value as written to the matrix file.
    pub fn column_value(&self, f: FeatureName) -> String {
        match f {
            FeatureName::Word => self.word.clone(),
            FeatureName::Pos => {
                if self.pos.is_empty() {
                    "_".to_string()
                } else {
                    self.pos.clone()
                }
            }
            FeatureName::Len => self.len.to_string(),
            FeatureName::Count => self.count.to_string(),
            _ => format_float(self.continuous_value(f)),
        }
    }
}

/// Shortest round-trip decimal; deterministic across runs.
fn format_float(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v}").unwrap();
    s
}

/// Feature rows grouped by sentence, plus the column selection they were
/// extracted under.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub config: FeatureConfig,
    pub sentences: Vec<Vec<FeatureRow>>,
}

impl FeatureMatrix {
    pub fn is_labeled(&self) -> bool {
        !self.sentences.is_empty()
            && self
                .sentences
                .iter()
                .all(|s| s.iter().all(|r| r.label.is_some()))
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

/// Compute one FeatureRow per token of `corpus`. Sentence-level fields are
/// identical across all rows of a sentence.
pub fn extract_features(
    corpus: &Corpus,
    table: &TermhoodTable,
    config: &FeatureConfig,
) -> FeatureMatrix {
    let sentences = corpus
        .sentences
        .iter()
        .map(|sentence| {
            let st = sentence_termhood(sentence, table);
            sentence
                .tokens
                .iter()
                .enumerate()
                .map(|(i, token)| {
                    let rec = table.record(&token.surface);
                    FeatureRow {
                        word: token.surface.clone(),
                        len: token.surface.chars().count(),
                        pos: token.pos.clone(),
                        count: sentence.tokens.len(),
                        freq_d: rec.f_d,
                        freq_b: rec.f_b,
                        rank_d: rec.r_d,
                        rank_b: rec.r_b,
                        freq_sen_d: st.freq_sen_d,
                        freq_sen_b: st.freq_sen_b,
                        rank_sen_d: st.rank_sen_d,
                        rank_sen_b: st.rank_sen_b,
                        delta_freq: rec.delta_f,
                        delta_rank: rec.delta_r,
                        delta_freq_sen: st.delta_freq_sen,
                        delta_rank_sen: st.delta_rank_sen,
                        label: sentence.labels.as_ref().map(|l| l[i]),
                    }
                })
                .collect()
        })
        .collect();
    FeatureMatrix {
        config: config.clone(),
        sentences,
    }
}

/// Quantile bin boundaries per continuous feature, fitted on training
/// data. Immutable after fit; values outside the fitted range clamp to the
/// edge bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binner {
    pub boundaries: BTreeMap<FeatureName, Vec<f64>>,
    pub bin_count: usize,
}

impl Binner {
    /// Fit boundaries at the empirical quantiles of each selected
    /// continuous feature. Duplicate cut points are merged, so degenerate
    /// distributions collapse to a single bin.
    pub fn fit(matrix: &FeatureMatrix, bin_count: usize) -> Result<Binner> {
        if bin_count < 2 {
            return Err(TermError::Config(format!(
                "bin_count must be >= 2, got {bin_count}"
            )));
        }
        let mut boundaries = BTreeMap::new();
        for &f in &matrix.config.features {
            if !f.is_continuous() {
                continue;
            }
            let mut values: Vec<f64> = matrix
                .sentences
                .iter()
                .flatten()
                .map(|row| row.continuous_value(f))
                .collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            boundaries.insert(f, cut_points(&values, bin_count));
        }
        Ok(Binner {
            boundaries,
            bin_count,
        })
    }

    /// Bin id of the half-open interval `[b_i, b_{i+1})` containing
    /// `value`; values below every boundary land in bin 0.
    pub fn bin(&self, feature: FeatureName, value: f64) -> Result<usize> {
        let bounds = self.boundaries.get(&feature).ok_or_else(|| {
            TermError::Config(format!("binner not fitted for feature {feature:?}"))
        })?;
        Ok(bounds.partition_point(|b| value >= *b))
    }
}

fn cut_points(sorted: &[f64], bin_count: usize) -> Vec<f64> {
    if sorted.is_empty() {
        return Vec::new();
    }
    let min = sorted[0];
    let mut cuts = Vec::new();
    for i in 1..bin_count {
        let q = quantile(sorted, i as f64 / bin_count as f64);
        if q > min && cuts.last().map_or(true, |&last| q > last) {
            cuts.push(q);
        }
    }
    cuts
}

/// Linear-interpolation quantile over a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Write the matrix in column format: selected columns in fixed order,
/// label last when present, blank line between sentences. A `# columns=`
/// header makes the file self-describing.
pub fn write_feature_matrix<W: std::io::Write>(
    matrix: &FeatureMatrix,
    mut out: W,
) -> std::io::Result<()> {
    let names: Vec<&str> = matrix.config.features.iter().map(|f| f.as_str()).collect();
    writeln!(out, "# columns={}", names.join(","))?;
    writeln!(out, "# bin_count={}", matrix.config.bin_count)?;
    let labeled = matrix.is_labeled();
    for sentence in &matrix.sentences {
        for row in sentence {
            let mut cols: Vec<String> = matrix
                .config
                .features
                .iter()
                .map(|&f| row.column_value(f))
                .collect();
            if labeled {
                cols.push(row.label.unwrap().as_str().to_string());
            }
            writeln!(out, "{}", cols.join("\t"))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parse a matrix file produced by `write_feature_matrix`.
pub fn read_feature_matrix(text: &str, path: &Path) -> Result<FeatureMatrix> {
    let mut features: Option<Vec<FeatureName>> = None;
    let mut bin_count = FeatureConfig::default().bin_count;
    let mut sentences = Vec::new();
    let mut rows: Vec<FeatureRow> = Vec::new();
    let mut labeled: Option<bool> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if let Some(spec) = line.strip_prefix("# columns=") {
            let mut parsed = Vec::new();
            for name in spec.split(',') {
                parsed.push(FeatureName::parse(name)?);
            }
            features = Some(parsed);
            continue;
        }
        if let Some(spec) = line.strip_prefix("# bin_count=") {
            bin_count = spec
                .trim()
                .parse()
                .map_err(|_| TermError::Config(format!("bad bin_count header: {spec:?}")))?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !rows.is_empty() {
                finish_matrix_sentence(&mut rows, &mut sentences);
            }
            continue;
        }
        let features = features.as_ref().ok_or_else(|| TermError::Format {
            path: path.to_path_buf(),
            line: line_no,
            message: "data before `# columns=` header".to_string(),
        })?;
        let cols: Vec<&str> = line.split('\t').collect();
        let has_label = match cols.len() {
            n if n == features.len() => false,
            n if n == features.len() + 1 => true,
            n => {
                return Err(TermError::Format {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("expected {} columns, found {n}", features.len()),
                })
            }
        };
        match labeled {
            None => labeled = Some(has_label),
            Some(expected) if expected != has_label => {
                return Err(TermError::Format {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: "mixed labeled and unlabeled rows".to_string(),
                })
            }
            _ => {}
        }
        let mut row = empty_row();
        for (i, &f) in features.iter().enumerate() {
            set_column(&mut row, f, cols[i], path, line_no)?;
        }
        if has_label {
            let tag_col = cols[features.len()];
            row.label = Some(BioTag::parse(tag_col).ok_or_else(|| TermError::Label {
                path: path.to_path_buf(),
                line: line_no,
                tag: tag_col.to_string(),
            })?);
        }
        rows.push(row);
    }
    if !rows.is_empty() {
        finish_matrix_sentence(&mut rows, &mut sentences);
    }
    let features = features.ok_or_else(|| TermError::Format {
        path: path.to_path_buf(),
        line: 0,
        message: "missing `# columns=` header".to_string(),
    })?;
    Ok(FeatureMatrix {
        config: FeatureConfig {
            features,
            bin_count,
            ..FeatureConfig::default()
        },
        sentences,
    })
}

fn finish_matrix_sentence(rows: &mut Vec<FeatureRow>, sentences: &mut Vec<Vec<FeatureRow>>) {
    let count = rows.len();
    for row in rows.iter_mut() {
        row.count = count.max(row.count);
    }
    sentences.push(std::mem::take(rows));
}

fn empty_row() -> FeatureRow {
    FeatureRow {
        word: String::new(),
        len: 0,
        pos: String::new(),
        count: 0,
        freq_d: 0.0,
        freq_b: 0.0,
        rank_d: 0.0,
        rank_b: 0.0,
        freq_sen_d: 0.0,
        freq_sen_b: 0.0,
        rank_sen_d: 0.0,
        rank_sen_b: 0.0,
        delta_freq: 0.0,
        delta_rank: 0.0,
        delta_freq_sen: 0.0,
        delta_rank_sen: 0.0,
        label: None,
    }
}

fn set_column(
    row: &mut FeatureRow,
    f: FeatureName,
    value: &str,
    path: &Path,
    line_no: usize,
) -> Result<()> {
    let parse_f64 = |v: &str| -> Result<f64> {
        v.parse().map_err(|_| TermError::Format {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("bad numeric value {v:?} for {f:?}"),
        })
    };
    match f {
        FeatureName::Word => row.word = value.to_string(),
        FeatureName::Pos => row.pos = if value == "_" { String::new() } else { value.to_string() },
        FeatureName::Len => {
            row.len = value.parse().map_err(|_| TermError::Format {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("bad integer {value:?} for len"),
            })?
        }
        FeatureName::Count => {
            row.count = value.parse().map_err(|_| TermError::Format {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("bad integer {value:?} for count"),
            })?
        }
        FeatureName::FreqD => row.freq_d = parse_f64(value)?,
        FeatureName::FreqB => row.freq_b = parse_f64(value)?,
        FeatureName::RankD => row.rank_d = parse_f64(value)?,
        FeatureName::RankB => row.rank_b = parse_f64(value)?,
        FeatureName::FreqSenD => row.freq_sen_d = parse_f64(value)?,
        FeatureName::FreqSenB => row.freq_sen_b = parse_f64(value)?,
        FeatureName::RankSenD => row.rank_sen_d = parse_f64(value)?,
        FeatureName::RankSenB => row.rank_sen_b = parse_f64(value)?,
        FeatureName::DeltaFreq => row.delta_freq = parse_f64(value)?,
        FeatureName::DeltaRank => row.delta_rank = parse_f64(value)?,
        FeatureName::DeltaFreqSen => row.delta_freq_sen = parse_f64(value)?,
        FeatureName::DeltaRankSen => row.delta_rank_sen = parse_f64(value)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{corpus_from_tokens, CorpusRole};
    use std::path::PathBuf;

    const EPS: f64 = 1e-12;

    fn toy_matrix(config: &FeatureConfig) -> FeatureMatrix {
        let domain = corpus_from_tokens(&[&["a", "b", "a", "c"]], CorpusRole::Domain);
        let background = corpus_from_tokens(&[&["b", "b", "c", "d"]], CorpusRole::Background);
        let table = TermhoodTable::build(&domain, &background);
        extract_features(&domain, &table, config)
    }

    #[test]
    fn toy_sentence_rows_share_sentence_sums() {
        let matrix = toy_matrix(&FeatureConfig::default());
        assert_eq!(matrix.sentences.len(), 1);
        let rows = &matrix.sentences[0];
        assert_eq!(rows.len(), 4);
        for row in rows {
            assert!((row.delta_freq_sen - 0.75).abs() < EPS);
            assert_eq!(row.count, 4);
        }
    }

    #[test]
    fn token_a_word_level_scores() {
        let matrix = toy_matrix(&FeatureConfig::default());
        let row = &matrix.sentences[0][0];
        assert_eq!(row.word, "a");
        assert!((row.delta_freq - 0.5).abs() < EPS);
        assert!((row.delta_rank - 1.0).abs() < EPS);
    }

    #[test]
    fn combined_feature_identities() {
        let matrix = toy_matrix(&FeatureConfig::default());
        for row in matrix.sentences.iter().flatten() {
            assert!((row.delta_freq - (row.freq_d - row.freq_b)).abs() < EPS);
            assert!((row.delta_rank - (row.rank_d - row.rank_b)).abs() < EPS);
            assert!((row.delta_freq_sen - (row.freq_sen_d - row.freq_sen_b)).abs() < EPS);
            assert!((row.delta_rank_sen - (row.rank_sen_d - row.rank_sen_b)).abs() < EPS);
        }
    }

    #[test]
    fn word_only_config_emits_one_column() {
        let config = FeatureConfig::parse_group("word").unwrap();
        let matrix = toy_matrix(&config);
        let mut buf = Vec::new();
        write_feature_matrix(&matrix, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data_line = text.lines().find(|l| !l.starts_with('#') && !l.is_empty()).unwrap();
        assert_eq!(data_line, "a");
    }

    #[test]
    fn unknown_feature_name_is_config_error() {
        let err = FeatureConfig::parse_group("word,bogus").unwrap_err();
        assert!(matches!(err, TermError::Config(_)));
    }

    #[test]
    fn group_aliases_parse() {
        let config = FeatureConfig::parse_group("ΔFreq,ΔFreq_Sen").unwrap();
        assert_eq!(
            config.features,
            vec![FeatureName::DeltaFreq, FeatureName::DeltaFreqSen]
        );
        let config = FeatureConfig::parse_group("Word,Freq_D,Freq_B,POS").unwrap();
        assert_eq!(
            config.features,
            vec![
                FeatureName::Word,
                FeatureName::Pos,
                FeatureName::FreqD,
                FeatureName::FreqB
            ]
        );
    }

    #[test]
    fn binner_all_equal_values_single_bin() {
        let mut matrix = toy_matrix(&FeatureConfig::parse_group("word,delta_freq").unwrap());
        for row in matrix.sentences.iter_mut().flatten() {
            row.delta_freq = 0.7;
        }
        let binner = Binner::fit(&matrix, 16).unwrap();
        assert!(binner.boundaries[&FeatureName::DeltaFreq].is_empty());
        assert_eq!(binner.bin(FeatureName::DeltaFreq, 0.7).unwrap(), 0);
        assert_eq!(binner.bin(FeatureName::DeltaFreq, 99.0).unwrap(), 0);
    }

    #[test]
    fn binner_quartiles_of_1_to_100() {
        let values: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cuts = cut_points(&sorted, 4);
        assert_eq!(cuts.len(), 3);
        assert!((cuts[0] - 25.75).abs() < 1e-9);
        assert!((cuts[1] - 50.5).abs() < 1e-9);
        assert!((cuts[2] - 75.25).abs() < 1e-9);
    }

    #[test]
    fn bin_value_edges() {
        let binner = Binner {
            boundaries: BTreeMap::from([(FeatureName::DeltaFreq, vec![0.0])]),
            bin_count: 2,
        };
        assert_eq!(binner.bin(FeatureName::DeltaFreq, -5.0).unwrap(), 0);
        assert_eq!(binner.bin(FeatureName::DeltaFreq, 5.0).unwrap(), 1);
        let err = binner.bin(FeatureName::RankD, 0.0).unwrap_err();
        assert!(matches!(err, TermError::Config(_)));
    }

    #[test]
    fn bin_count_too_small_rejected() {
        let matrix = toy_matrix(&FeatureConfig::default());
        assert!(matches!(
            Binner::fit(&matrix, 1),
            Err(TermError::Config(_))
        ));
    }

    #[test]
    fn matrix_file_round_trip() {
        let matrix = toy_matrix(&FeatureConfig::parse_group("all").unwrap());
        let mut buf = Vec::new();
        write_feature_matrix(&matrix, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let reread = read_feature_matrix(&text, &PathBuf::from("m.tsv")).unwrap();
        assert_eq!(matrix.sentences, reread.sentences);
        assert_eq!(matrix.config.features, reread.config.features);
    }

    #[test]
    fn emission_is_deterministic() {
        let config = FeatureConfig::parse_group("all").unwrap();
        let a = {
            let mut buf = Vec::new();
            write_feature_matrix(&toy_matrix(&config), &mut buf).unwrap();
            buf
        };
        let b = {
            let mut buf = Vec::new();
            write_feature_matrix(&toy_matrix(&config), &mut buf).unwrap();
            buf
        };
        assert_eq!(a, b);
    }
}
