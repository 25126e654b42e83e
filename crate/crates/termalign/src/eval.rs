//! Span-level precision/recall/F1 over BIO sequences, plus the k-fold
//! cross-validation harness.
//!
//! Matching is exact-span: a system span counts only if its boundaries
//! coincide with a gold span. Repeated terms count per occurrence.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::BioTag;
use crate::crf::{train, TrainConfig};
use crate::error::{Result, TermError};
use crate::features::FeatureMatrix;

/// Half-open token span inside one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermSpan {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

/// 2x2 contingency over spans: a = both, b = system only, c = gold only.
/// d is unused by span evaluation but kept for report fidelity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Contingency {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Contingency {
    pub fn precision(&self) -> f64 {
        if self.a + self.b == 0 {
            0.0
        } else {
            self.a as f64 / (self.a + self.b) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.a + self.c == 0 {
            0.0
        } else {
            self.a as f64 / (self.a + self.c) as f64
        }
    }

    pub fn f1(&self) -> f64 {
        f1_score(self.precision(), self.recall())
    }
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FoldScore {
    pub fold: usize,
    pub contingency: Contingency,
    pub p: f64,
    pub r: f64,
    pub f1: f64,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub folds: Vec<FoldScore>,
    pub macro_p: f64,
    pub macro_r: f64,
    /// Mean of per-fold F1 values.
    pub macro_f1: f64,
    /// F1 recomputed from the macro-averaged P and R (the two disagree in
    /// general; both are reported).
    pub f1_of_macro: f64,
    pub totals: Contingency,
}

/// Decode maximal B(I)* runs into spans. An I at sequence start or after
/// an O is repaired to B.
pub fn decode_spans(sentence: usize, labels: &[BioTag]) -> Vec<TermSpan> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &tag) in labels.iter().enumerate() {
        match tag {
            BioTag::B => {
                if let Some(s) = start {
                    spans.push(TermSpan {
                        sentence,
                        start: s,
                        end: i,
                    });
                }
                start = Some(i);
            }
            BioTag::I => {
                if start.is_none() {
                    // repair: treat as span start
                    start = Some(i);
                }
            }
            BioTag::O => {
                if let Some(s) = start.take() {
                    spans.push(TermSpan {
                        sentence,
                        start: s,
                        end: i,
                    });
                }
            }
        }
    }
    if let Some(s) = start {
        spans.push(TermSpan {
            sentence,
            start: s,
            end: labels.len(),
        });
    }
    spans
}

/// Inverse of `decode_spans` for non-overlapping spans sorted by start.
pub fn encode_spans(len: usize, spans: &[TermSpan]) -> Vec<BioTag> {
    let mut labels = vec![BioTag::O; len];
    for span in spans {
        labels[span.start] = BioTag::B;
        for slot in labels.iter_mut().take(span.end).skip(span.start + 1) {
            *slot = BioTag::I;
        }
    }
    labels
}

/// Exact-span score of system labels against gold labels.
pub fn score(system: &[Vec<BioTag>], gold: &[Vec<BioTag>]) -> Result<(Contingency, f64, f64, f64)> {
    if system.len() != gold.len() {
        return Err(TermError::Evaluation(format!(
            "sentence count mismatch: system {} vs gold {}",
            system.len(),
            gold.len()
        )));
    }
    let mut contingency = Contingency::default();
    for (idx, (sys, gld)) in system.iter().zip(gold).enumerate() {
        if sys.len() != gld.len() {
            return Err(TermError::Evaluation(format!(
                "token count mismatch in sentence {idx}: system {} vs gold {}",
                sys.len(),
                gld.len()
            )));
        }
        let sys_spans = decode_spans(idx, sys);
        let gold_spans = decode_spans(idx, gld);
        let gold_set: std::collections::HashSet<TermSpan> = gold_spans.iter().copied().collect();
        let matched = sys_spans.iter().filter(|s| gold_set.contains(s)).count() as u64;
        contingency.a += matched;
        contingency.b += sys_spans.len() as u64 - matched;
        contingency.c += gold_spans.len() as u64 - matched;
    }
    Ok((
        contingency,
        contingency.precision(),
        contingency.recall(),
        contingency.f1(),
    ))
}

fn gold_labels(matrix: &FeatureMatrix) -> Vec<Vec<BioTag>> {
    matrix
        .sentences
        .iter()
        .map(|rows| rows.iter().map(|r| r.label.unwrap()).collect())
        .collect()
}

fn parse_tags(tags: &[Vec<String>]) -> Vec<Vec<BioTag>> {
    tags.iter()
        .map(|s| s.iter().map(|t| BioTag::parse(t).unwrap_or(BioTag::O)).collect())
        .collect()
}

/// Seeded k-fold cross-validation: shuffle sentences, split into k
/// near-equal folds, and for each fold train on the rest (binner refit per
/// fold inside `train`) and score the held-out part.
pub fn kfold(
    matrix: &FeatureMatrix,
    k: usize,
    seed: u64,
    config: &TrainConfig,
) -> Result<EvalReport> {
    if k < 2 {
        return Err(TermError::Config(format!("k must be >= 2, got {k}")));
    }
    let n = matrix.sentences.len();
    if n < k {
        return Err(TermError::Config(format!(
            "{n} sentences cannot be split into {k} folds"
        )));
    }
    if !matrix.is_labeled() {
        return Err(TermError::TrainingData(
            "cross-validation needs a labeled matrix".to_string(),
        ));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut folds = Vec::with_capacity(k);
    let mut totals = Contingency::default();
    for fold in 0..k {
        let test_idx: Vec<usize> = order
            .iter()
            .copied()
            .skip(fold)
            .step_by(k)
            .collect();
        let test_set: std::collections::HashSet<usize> = test_idx.iter().copied().collect();

        let train_matrix = FeatureMatrix {
            config: matrix.config.clone(),
            sentences: (0..n)
                .filter(|i| !test_set.contains(i))
                .map(|i| matrix.sentences[i].clone())
                .collect(),
        };
        let mut test_matrix = FeatureMatrix {
            config: matrix.config.clone(),
            sentences: test_idx
                .iter()
                .map(|&i| matrix.sentences[i].clone())
                .collect(),
        };
        let gold = gold_labels(&test_matrix);
        for rows in test_matrix.sentences.iter_mut() {
            for r in rows.iter_mut() {
                r.label = None;
            }
        }

        let model = train(&train_matrix, config)?;
        let tags = model.tag(&test_matrix)?;
        let system = parse_tags(&tags);
        let (contingency, p, r, f1) = score(&system, &gold)?;
        totals.a += contingency.a;
        totals.b += contingency.b;
        totals.c += contingency.c;
        folds.push(FoldScore {
            fold,
            contingency,
            p,
            r,
            f1,
        });
    }

    let kf = k as f64;
    let macro_p = folds.iter().map(|f| f.p).sum::<f64>() / kf;
    let macro_r = folds.iter().map(|f| f.r).sum::<f64>() / kf;
    let macro_f1 = folds.iter().map(|f| f.f1).sum::<f64>() / kf;
    Ok(EvalReport {
        folds,
        macro_p,
        macro_r,
        macro_f1,
        f1_of_macro: f1_score(macro_p, macro_r),
        totals,
    })
}
