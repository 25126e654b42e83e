//! Linear-chain CRF: feature-template expansion over matrix columns,
//! log-domain forward-backward and Viterbi, penalized log-likelihood with
//! analytic gradient, and an L-BFGS batch trainer.
//!
//! Inference works on explicit per-position potentials (`Potentials`), so
//! it can be exercised directly against brute-force path enumeration
//! without going through feature extraction.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TermError};
use crate::features::{Binner, FeatureConfig, FeatureMatrix, FeatureName, FeatureRow};

pub const MODEL_FORMAT_VERSION: &str = "termalign-crf/1";

/// Ordered tag inventory. Fixed to B/I/O for term extraction but nothing
/// below depends on that.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet {
    pub tags: Vec<String>,
}

impl TagSet {
    pub fn bio() -> TagSet {
        TagSet {
            tags: vec!["B".into(), "I".into(), "O".into()],
        }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn index_of(&self, tag: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemplateKind {
    Unigram,
    Bigram,
}

/// One observation template: a column read at a relative offset, combined
/// with the tag (unigram) or the tag pair (bigram). A bigram template with
/// no column is the plain tag-transition feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub kind: TemplateKind,
    pub column: Option<FeatureName>,
    pub offset: i32,
}

/// Default template set: word/POS observations over the word window,
/// binned numeric observations over the numeric window, plus one
/// observation-free tag-bigram template.
pub fn default_templates(config: &FeatureConfig) -> Vec<Template> {
    let mut templates = Vec::new();
    for &f in &config.features {
        let window = match f {
            FeatureName::Word | FeatureName::Pos => &config.word_window,
            _ => &config.numeric_window,
        };
        for &offset in window {
            templates.push(Template {
                kind: TemplateKind::Unigram,
                column: Some(f),
                offset,
            });
        }
    }
    templates.push(Template {
        kind: TemplateKind::Bigram,
        column: None,
        offset: 0,
    });
    templates
}

/// Node and edge log-potentials of one sentence.
/// `node[i][y]`, `edge[i][y_prev * t + y]` for the edge into position i+1.
#[derive(Debug, Clone)]
pub struct Potentials {
    pub t: usize,
    pub node: Vec<Vec<f64>>,
    pub edge: Vec<Vec<f64>>,
}

impl Potentials {
    pub fn len(&self) -> usize {
        self.node.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node.is_empty()
    }

    pub fn path_score(&self, tags: &[usize]) -> f64 {
        let mut score = 0.0;
        for (i, &y) in tags.iter().enumerate() {
            score += self.node[i][y];
            if i > 0 {
                score += self.edge[i - 1][tags[i - 1] * self.t + y];
            }
        }
        score
    }
}

/// Forward-backward tables in the log domain.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub t: usize,
    pub log_alpha: Vec<Vec<f64>>,
    pub log_beta: Vec<Vec<f64>>,
    pub log_z: f64,
}

impl Lattice {
    /// Per-position tag marginals; each row sums to 1.
    pub fn node_marginals(&self) -> Vec<Vec<f64>> {
        self.log_alpha
            .iter()
            .zip(&self.log_beta)
            .map(|(a, b)| {
                (0..self.t)
                    .map(|y| (a[y] + b[y] - self.log_z).exp())
                    .collect()
            })
            .collect()
    }

    /// Marginal of the edge (i, i+1) with tags (y_prev, y).
    pub fn edge_marginal(&self, potentials: &Potentials, i: usize, y_prev: usize, y: usize) -> f64 {
        (self.log_alpha[i][y_prev]
            + potentials.edge[i][y_prev * self.t + y]
            + potentials.node[i + 1][y]
            + self.log_beta[i + 1][y]
            - self.log_z)
            .exp()
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Log-domain forward-backward over explicit potentials.
pub fn forward_backward(potentials: &Potentials) -> Lattice {
    let t = potentials.t;
    let n = potentials.len();
    assert!(n > 0, "empty sentence");

    let mut log_alpha = vec![vec![0.0; t]; n];
    log_alpha[0].clone_from_slice(&potentials.node[0]);
    let mut scratch = vec![0.0; t];
    for i in 1..n {
        for y in 0..t {
            for (y_prev, slot) in scratch.iter_mut().enumerate() {
                *slot = log_alpha[i - 1][y_prev] + potentials.edge[i - 1][y_prev * t + y];
            }
            log_alpha[i][y] = potentials.node[i][y] + log_sum_exp(&scratch);
        }
    }

    let mut log_beta = vec![vec![0.0; t]; n];
    for i in (0..n - 1).rev() {
        for y in 0..t {
            for (y_next, slot) in scratch.iter_mut().enumerate() {
                *slot = potentials.edge[i][y * t + y_next]
                    + potentials.node[i + 1][y_next]
                    + log_beta[i + 1][y_next];
            }
            log_beta[i][y] = log_sum_exp(&scratch);
        }
    }

    let log_z = log_sum_exp(&log_alpha[n - 1]);
    Lattice {
        t,
        log_alpha,
        log_beta,
        log_z,
    }
}

/// Max-scoring tag path. Ties break toward the lowest tag index at every
/// backtrack step.
pub fn viterbi(potentials: &Potentials) -> (Vec<usize>, f64) {
    let t = potentials.t;
    let n = potentials.len();
    assert!(n > 0, "empty sentence");

    let mut best = vec![vec![f64::NEG_INFINITY; t]; n];
    let mut back = vec![vec![0usize; t]; n];
    best[0].clone_from_slice(&potentials.node[0]);
    for i in 1..n {
        for y in 0..t {
            let mut arg = 0;
            let mut max = f64::NEG_INFINITY;
            for y_prev in 0..t {
                let s = best[i - 1][y_prev] + potentials.edge[i - 1][y_prev * t + y];
                if s > max {
                    max = s;
                    arg = y_prev;
                }
            }
            best[i][y] = potentials.node[i][y] + max;
            back[i][y] = arg;
        }
    }
    let mut last = 0;
    let mut score = f64::NEG_INFINITY;
    for y in 0..t {
        if best[n - 1][y] > score {
            score = best[n - 1][y];
            last = y;
        }
    }
    let mut tags = vec![0usize; n];
    tags[n - 1] = last;
    for i in (1..n).rev() {
        tags[i - 1] = back[i][tags[i]];
    }
    (tags, score)
}

/// Active feature blocks of one sentence after template expansion.
/// `unigram[i]` holds unigram block ids active at position i; `bigram[i]`
/// holds bigram block ids active on the edge (i, i+1).
#[derive(Debug, Clone)]
pub struct SentenceFeatures {
    pub n: usize,
    pub unigram: Vec<Vec<u32>>,
    pub bigram: Vec<Vec<u32>>,
}

/// Weight vector layout: unigram blocks of `t` weights first, then bigram
/// blocks of `t * t` weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightLayout {
    pub t: usize,
    pub unigram_blocks: usize,
    pub bigram_blocks: usize,
}

impl WeightLayout {
    pub fn len(&self) -> usize {
        self.unigram_blocks * self.t + self.bigram_blocks * self.t * self.t
    }

    #[inline]
    pub fn uni(&self, block: u32, tag: usize) -> usize {
        block as usize * self.t + tag
    }

    #[inline]
    pub fn bi(&self, block: u32, y_prev: usize, y: usize) -> usize {
        self.unigram_blocks * self.t + block as usize * self.t * self.t + y_prev * self.t + y
    }
}

/// Build potentials for one sentence from active blocks and weights.
pub fn potentials_from_features(
    sf: &SentenceFeatures,
    weights: &[f64],
    layout: &WeightLayout,
) -> Potentials {
    let t = layout.t;
    let node = (0..sf.n)
        .map(|i| {
            (0..t)
                .map(|y| {
                    sf.unigram[i]
                        .iter()
                        .map(|&b| weights[layout.uni(b, y)])
                        .sum()
                })
                .collect()
        })
        .collect();
    let edge = (0..sf.n.saturating_sub(1))
        .map(|i| {
            let mut scores = vec![0.0; t * t];
            for &b in &sf.bigram[i] {
                for y_prev in 0..t {
                    for y in 0..t {
                        scores[y_prev * t + y] += weights[layout.bi(b, y_prev, y)];
                    }
                }
            }
            scores
        })
        .collect();
    Potentials { t, node, edge }
}

/// One training/tagging unit: expanded features plus gold tag indices
/// when labeled.
#[derive(Debug, Clone)]
pub struct CompiledSentence {
    pub features: SentenceFeatures,
    pub labels: Option<Vec<usize>>,
}

/// Penalized conditional log-likelihood and its gradient over a batch.
///
/// objective = Σ (gold path score − logZ) − ‖w‖² / (2σ²)
/// gradient  = empirical counts − expected counts − w / σ²
pub fn log_likelihood_and_gradient(
    weights: &[f64],
    layout: &WeightLayout,
    batch: &[CompiledSentence],
    sigma2: f64,
) -> Result<(f64, Vec<f64>)> {
    let t = layout.t;
    let mut objective = 0.0;
    let mut gradient = vec![0.0; weights.len()];

    for sentence in batch {
        let labels = sentence.labels.as_ref().ok_or_else(|| {
            TermError::TrainingData("unlabeled sentence in training batch".to_string())
        })?;
        let sf = &sentence.features;
        let potentials = potentials_from_features(sf, weights, layout);
        let lattice = forward_backward(&potentials);
        objective += potentials.path_score(labels) - lattice.log_z;

        // empirical counts
        for (i, &y) in labels.iter().enumerate() {
            for &b in &sf.unigram[i] {
                gradient[layout.uni(b, y)] += 1.0;
            }
            if i > 0 {
                for &b in &sf.bigram[i - 1] {
                    gradient[layout.bi(b, labels[i - 1], y)] += 1.0;
                }
            }
        }

        // expected counts
        let node_marginals = lattice.node_marginals();
        for i in 0..sf.n {
            for &b in &sf.unigram[i] {
                for y in 0..t {
                    gradient[layout.uni(b, y)] -= node_marginals[i][y];
                }
            }
        }
        for i in 0..sf.n.saturating_sub(1) {
            if sf.bigram[i].is_empty() {
                continue;
            }
            for y_prev in 0..t {
                for y in 0..t {
                    let m = lattice.edge_marginal(&potentials, i, y_prev, y);
                    for &b in &sf.bigram[i] {
                        gradient[layout.bi(b, y_prev, y)] -= m;
                    }
                }
            }
        }
    }

    if sigma2.is_finite() && sigma2 > 0.0 {
        for (g, &w) in gradient.iter_mut().zip(weights) {
            *g -= w / sigma2;
        }
        objective -= weights.iter().map(|w| w * w).sum::<f64>() / (2.0 * sigma2);
    }
    if !objective.is_finite() {
        return Err(TermError::Numerical(format!(
            "non-finite objective: {objective}"
        )));
    }
    Ok((objective, gradient))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// L2 scale σ²; infinite disables the penalty.
    pub l2_sigma2: f64,
    pub max_iterations: usize,
    /// Stop when ‖gradient‖₂ / feature-count falls below this.
    pub gradient_tolerance: f64,
    pub lbfgs_memory: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_sigma2: 10.0,
            max_iterations: 200,
            gradient_tolerance: 1e-4,
            lbfgs_memory: 10,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainMeta {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
}

/// A trained model: everything needed to expand, score, and decode new
/// sentences, including the binner fitted on the training split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrfModel {
    pub version: String,
    pub tagset: TagSet,
    pub templates: Vec<Template>,
    pub feature_config: FeatureConfig,
    pub binner: Binner,
    pub unigram_index: BTreeMap<String, u32>,
    pub bigram_index: BTreeMap<String, u32>,
    pub weights: Vec<f64>,
    pub l2_sigma2: f64,
    pub config_hash: String,
    pub meta: TrainMeta,
}

impl CrfModel {
    pub fn layout(&self) -> WeightLayout {
        WeightLayout {
            t: self.tagset.len(),
            unigram_blocks: self.unigram_index.len(),
            bigram_blocks: self.bigram_index.len(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)
            .map_err(|e| TermError::ModelFile(format!("serialize failed: {e}")))?;
        std::fs::write(path, json).map_err(|source| TermError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<CrfModel> {
        let text = std::fs::read_to_string(path).map_err(|source| TermError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let model: CrfModel = serde_json::from_str(&text)
            .map_err(|e| TermError::ModelFile(format!("parse failed: {e}")))?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(TermError::ModelFile(format!(
                "unsupported model version {:?}, expected {MODEL_FORMAT_VERSION:?}",
                model.version
            )));
        }
        Ok(model)
    }

    /// Expand a matrix against this model's index (lookup-only; unseen
    /// observations are dropped).
    pub fn compile(&self, matrix: &FeatureMatrix) -> Result<Vec<CompiledSentence>> {
        check_columns(&self.templates, &matrix.config)?;
        matrix
            .sentences
            .iter()
            .map(|rows| {
                let features = expand_features(
                    rows,
                    &self.templates,
                    &self.binner,
                    Indexer::Frozen(&self.unigram_index, &self.bigram_index),
                )?;
                let labels = rows
                    .iter()
                    .map(|r| {
                        r.label
                            .and_then(|tag| self.tagset.index_of(tag.as_str()))
                    })
                    .collect::<Option<Vec<usize>>>();
                Ok(CompiledSentence { features, labels })
            })
            .collect()
    }

    /// Viterbi-tag every sentence of the matrix.
    pub fn tag(&self, matrix: &FeatureMatrix) -> Result<Vec<Vec<String>>> {
        let layout = self.layout();
        let compiled = self.compile(matrix)?;
        Ok(compiled
            .iter()
            .map(|s| {
                if s.features.n == 0 {
                    return Vec::new();
                }
                let potentials = potentials_from_features(&s.features, &self.weights, &layout);
                let (tags, _) = viterbi(&potentials);
                tags.iter()
                    .map(|&y| self.tagset.tags[y].clone())
                    .collect()
            })
            .collect())
    }
}

fn check_columns(templates: &[Template], config: &FeatureConfig) -> Result<()> {
    for template in templates {
        if let Some(col) = template.column {
            if !config.features.contains(&col) {
                return Err(TermError::Config(format!(
                    "template references column {:?} not emitted by the matrix",
                    col.as_str()
                )));
            }
        }
    }
    Ok(())
}

enum Indexer<'a> {
    Growing(
        &'a mut BTreeMap<String, u32>,
        &'a mut BTreeMap<String, u32>,
    ),
    Frozen(&'a BTreeMap<String, u32>, &'a BTreeMap<String, u32>),
}

impl Indexer<'_> {
    fn unigram_id(&mut self, key: String) -> Option<u32> {
        match self {
            Indexer::Growing(uni, _) => {
                let next = uni.len() as u32;
                Some(*uni.entry(key).or_insert(next))
            }
            Indexer::Frozen(uni, _) => uni.get(&key).copied(),
        }
    }

    fn bigram_id(&mut self, key: String) -> Option<u32> {
        match self {
            Indexer::Growing(_, bi) => {
                let next = bi.len() as u32;
                Some(*bi.entry(key).or_insert(next))
            }
            Indexer::Frozen(_, bi) => bi.get(&key).copied(),
        }
    }
}

/// Observation value of a column at a (possibly out-of-range) position.
fn observation(rows: &[FeatureRow], pos: i64, column: FeatureName, binner: &Binner) -> Result<String> {
    if pos < 0 {
        return Ok(format!("_B{pos}_"));
    }
    let n = rows.len() as i64;
    if pos >= n {
        return Ok(format!("_E+{}_", pos - n + 1));
    }
    let row = &rows[pos as usize];
    Ok(match column {
        FeatureName::Word => row.word.clone(),
        FeatureName::Pos => {
            if row.pos.is_empty() {
                "_".to_string()
            } else {
                row.pos.clone()
            }
        }
        FeatureName::Len => row.len.to_string(),
        FeatureName::Count => row.count.to_string(),
        _ => format!("b{}", binner.bin(column, row.continuous_value(column))?),
    })
}

fn expand_features(
    rows: &[FeatureRow],
    templates: &[Template],
    binner: &Binner,
    mut indexer: Indexer,
) -> Result<SentenceFeatures> {
    let n = rows.len();
    let mut unigram = vec![Vec::new(); n];
    let mut bigram = vec![Vec::new(); n.saturating_sub(1)];
    for template in templates {
        match template.kind {
            TemplateKind::Unigram => {
                let column = template.column.ok_or_else(|| {
                    TermError::Config("unigram template without a column".to_string())
                })?;
                for i in 0..n {
                    let val =
                        observation(rows, i as i64 + template.offset as i64, column, binner)?;
                    let key = format!("U:{}@{}={}", column.as_str(), template.offset, val);
                    if let Some(id) = indexer.unigram_id(key) {
                        unigram[i].push(id);
                    }
                }
            }
            TemplateKind::Bigram => {
                for i in 0..n.saturating_sub(1) {
                    let key = match template.column {
                        None => "B:_".to_string(),
                        Some(column) => {
                            let val = observation(
                                rows,
                                (i + 1) as i64 + template.offset as i64,
                                column,
                                binner,
                            )?;
                            format!("B:{}@{}={}", column.as_str(), template.offset, val)
                        }
                    };
                    if let Some(id) = indexer.bigram_id(key) {
                        bigram[i].push(id);
                    }
                }
            }
        }
    }
    Ok(SentenceFeatures { n, unigram, bigram })
}

/// Train a model on a fully labeled matrix. The binner is fitted on this
/// matrix, so callers doing cross-validation pass the training fold only.
pub fn train(matrix: &FeatureMatrix, config: &TrainConfig) -> Result<CrfModel> {
    if matrix.sentences.is_empty() {
        return Err(TermError::TrainingData("no sentences".to_string()));
    }
    if !matrix.is_labeled() {
        return Err(TermError::TrainingData(
            "training matrix must be fully labeled".to_string(),
        ));
    }
    let tagset = TagSet::bio();
    let templates = default_templates(&matrix.config);
    let binner = Binner::fit(matrix, matrix.config.bin_count)?;

    let mut unigram_index = BTreeMap::new();
    let mut bigram_index = BTreeMap::new();
    let mut compiled = Vec::with_capacity(matrix.sentences.len());
    for rows in &matrix.sentences {
        let features = expand_features(
            rows,
            &templates,
            &binner,
            Indexer::Growing(&mut unigram_index, &mut bigram_index),
        )?;
        let labels = rows
            .iter()
            .map(|r| {
                let tag = r.label.expect("matrix checked labeled");
                tagset
                    .index_of(tag.as_str())
                    .ok_or_else(|| TermError::TrainingData(format!("tag {tag} not in tagset")))
            })
            .collect::<Result<Vec<usize>>>()?;
        compiled.push(CompiledSentence {
            features,
            labels: Some(labels),
        });
    }

    let layout = WeightLayout {
        t: tagset.len(),
        unigram_blocks: unigram_index.len(),
        bigram_blocks: bigram_index.len(),
    };
    let n_params = layout.len();
    let mut objective_calls = |w: &[f64], grad: &mut [f64]| -> Result<f64> {
        let (obj, g) = log_likelihood_and_gradient(w, &layout, &compiled, config.l2_sigma2)?;
        // minimize the negative
        for (slot, gi) in grad.iter_mut().zip(&g) {
            *slot = -gi;
        }
        Ok(-obj)
    };
    let result = lbfgs_minimize(
        &mut objective_calls,
        vec![0.0; n_params],
        config.lbfgs_memory,
        config.max_iterations,
        config.gradient_tolerance,
    )?;

    Ok(CrfModel {
        version: MODEL_FORMAT_VERSION.to_string(),
        tagset,
        templates,
        feature_config: matrix.config.clone(),
        binner,
        unigram_index,
        bigram_index,
        weights: result.x,
        l2_sigma2: config.l2_sigma2,
        config_hash: String::new(),
        meta: TrainMeta {
            iterations: result.iterations,
            final_objective: -result.fx,
            converged: result.converged,
        },
    })
}

struct MinimizeResult {
    x: Vec<f64>,
    fx: f64,
    iterations: usize,
    converged: bool,
}

/// L-BFGS with two-loop recursion and Armijo backtracking. Deterministic:
/// no randomness, fixed evaluation order.
fn lbfgs_minimize<F>(
    objective: &mut F,
    mut x: Vec<f64>,
    memory: usize,
    max_iterations: usize,
    tolerance: f64,
) -> Result<MinimizeResult>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    let n = x.len();
    let mut grad = vec![0.0; n];
    let mut fx = objective(&x, &mut grad)?;
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..max_iterations {
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm / n as f64 <= tolerance {
            converged = true;
            break;
        }

        // two-loop recursion
        let mut direction: Vec<f64> = grad.iter().map(|g| -g).collect();
        let k = s_hist.len();
        let mut alphas = vec![0.0; k];
        for j in (0..k).rev() {
            let alpha = rho_hist[j] * dot(&s_hist[j], &direction);
            alphas[j] = alpha;
            axpy(&mut direction, -alpha, &y_hist[j]);
        }
        if k > 0 {
            let last = k - 1;
            let gamma = dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]);
            for d in direction.iter_mut() {
                *d *= gamma;
            }
        }
        for j in 0..k {
            let beta = rho_hist[j] * dot(&y_hist[j], &direction);
            axpy(&mut direction, alphas[j] - beta, &s_hist[j]);
        }

        let dir_deriv = dot(&grad, &direction);
        if dir_deriv >= 0.0 {
            // not a descent direction; fall back to steepest descent
            direction = grad.iter().map(|g| -g).collect();
        }
        let dir_deriv = dot(&grad, &direction);

        // backtracking line search (Armijo)
        let mut step = if iter == 0 {
            (1.0 / (1.0 + grad_norm)).min(1.0)
        } else {
            1.0
        };
        let c1 = 1e-4;
        let mut new_x = vec![0.0; n];
        let mut new_grad = vec![0.0; n];
        let mut accepted = false;
        for _ in 0..50 {
            for i in 0..n {
                new_x[i] = x[i] + step * direction[i];
            }
            let new_fx = objective(&new_x, &mut new_grad)?;
            if new_fx.is_finite() && new_fx <= fx + c1 * step * dir_deriv {
                let s: Vec<f64> = (0..n).map(|i| new_x[i] - x[i]).collect();
                let y: Vec<f64> = (0..n).map(|i| new_grad[i] - grad[i]).collect();
                let sy = dot(&s, &y);
                if sy > 1e-10 {
                    if s_hist.len() == memory {
                        s_hist.remove(0);
                        y_hist.remove(0);
                        rho_hist.remove(0);
                    }
                    rho_hist.push(1.0 / sy);
                    s_hist.push(s);
                    y_hist.push(y);
                }
                x.clone_from(&new_x);
                grad.clone_from(&new_grad);
                fx = new_fx;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations = iter + 1;
        if !accepted {
            // line search stalled; treat as converged
            converged = true;
            break;
        }
    }
    if !fx.is_finite() {
        return Err(TermError::Numerical(format!("non-finite objective {fx}")));
    }
    Ok(MinimizeResult {
        x,
        fx,
        iterations,
        converged,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(target: &mut [f64], alpha: f64, v: &[f64]) {
    for (t, &x) in target.iter_mut().zip(v) {
        *t += alpha * x;
    }
}
