//! Acceptance gate for the whole pipeline: exact small-instance oracles,
//! algebraic properties, synthetic trend reproductions, and byte-level
//! rerun determinism of the command-line stages. Each criterion prints a
//! single PASS/FAIL line.

use std::collections::HashMap;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use termalign::align::{
    build_candidates, log_likelihood_ratio, precision_at_n, rank_candidates,
    termhood_weighted_association, AlignOptions, AlignmentCandidate, PairContingency, RankMode,
};
use termalign::corpus::{build_frequency_table, corpus_from_tokens, Corpus, CorpusRole};
use termalign::crf::{
    forward_backward, log_likelihood_and_gradient, viterbi, CompiledSentence, Potentials,
    SentenceFeatures, TrainConfig, WeightLayout,
};
use termalign::eval::{f1_score, kfold};
use termalign::features::{extract_features, FeatureConfig};
use termalign::synth::{alignment_fixture, extraction_corpus};
use termalign::termhood::{relative_frequency, sentence_termhood, TermhoodTable};

fn criterion(id: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("criterion {id}: PASS"),
        Err(cause) => {
            println!("criterion {id}: FAIL");
            resume_unwind(cause);
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn criterion_01_termhood_oracle() {
    criterion("01 termhood-oracle", || {
        let domain = corpus_from_tokens(&[&["a", "b", "a", "c"]], CorpusRole::Domain);
        let background = corpus_from_tokens(&[&["b", "b", "c", "d"]], CorpusRole::Background);

        let freq_d = build_frequency_table(&domain);
        assert_eq!(freq_d.count("a"), 2);
        assert_eq!(freq_d.count("b"), 1);
        assert_eq!(freq_d.count("c"), 1);
        assert_eq!(freq_d.total, 4);
        assert_eq!(freq_d.vocab_size(), 3);
        assert!(close(relative_frequency(&freq_d, "a"), 0.5, 0.0));

        let freq_b = build_frequency_table(&background);
        for freq in [&freq_d, &freq_b] {
            let total: f64 = freq
                .counts
                .keys()
                .map(|w| relative_frequency(freq, w))
                .sum();
            assert!(close(total, 1.0, 1e-12), "relative frequencies sum to {total}");
        }

        let table = TermhoodTable::build(&domain, &background);
        assert!(close(table.freq_difference("a"), 0.5, 1e-12));
        assert!(close(table.freq_difference("b"), -0.25, 1e-12));
        assert!(close(table.rank_difference("a"), 1.0, 1e-12));
        assert!(close(table.rank_difference("c"), 0.0, 1e-12));
        assert!(close(table.intensified_rank_difference("a"), 2.0, 1e-12));
        assert!(close(table.intensified_rank_difference("b"), -0.5, 1e-12));

        let st = sentence_termhood(&domain.sentences[0], &table);
        assert!(close(st.delta_freq_sen, 0.75, 1e-12));
        assert!(close(st.mean_delta_f, 0.1875, 1e-12));
    });
}

fn random_potentials(rng: &mut ChaCha8Rng) -> Potentials {
    let t = rng.gen_range(1..=4);
    let n = rng.gen_range(1..=6);
    Potentials {
        t,
        node: (0..n)
            .map(|_| (0..t).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect(),
        edge: (0..n - 1)
            .map(|_| (0..t * t).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect(),
    }
}

fn all_paths(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut paths = vec![vec![]];
    for _ in 0..n {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                (0..t).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    paths
}

#[test]
fn criterion_02_crf_inference_oracle() {
    criterion("02 crf-inference-oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1202);
        for _ in 0..100 {
            let potentials = random_potentials(&mut rng);
            let scores: Vec<f64> = all_paths(potentials.len(), potentials.t)
                .iter()
                .map(|p| potentials.path_score(p))
                .collect();
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let brute_log_z = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();

            let lattice = forward_backward(&potentials);
            let rel = (lattice.log_z - brute_log_z).abs() / brute_log_z.abs().max(1.0);
            assert!(rel <= 1e-10, "logZ off by relative {rel}");

            // first path in tag-index order reaching the max == the
            // documented lowest-index tie rule
            let (vit_path, vit_score) = viterbi(&potentials);
            let mut best: Option<Vec<usize>> = None;
            let mut best_score = f64::NEG_INFINITY;
            for p in all_paths(potentials.len(), potentials.t) {
                let s = potentials.path_score(&p);
                if s > best_score {
                    best_score = s;
                    best = Some(p);
                }
            }
            assert_eq!(vit_path, best.unwrap(), "Viterbi tie rule mismatch");
            // identical paths rescored the same way are bit-identical; the
            // DP score itself may differ by summation order
            assert_eq!(
                potentials.path_score(&vit_path),
                best_score,
                "decoded path does not score the exact brute-force max"
            );
            assert!((vit_score - best_score).abs() <= 1e-9 * best_score.abs().max(1.0));
        }
    });
}

fn random_batch(rng: &mut ChaCha8Rng) -> (WeightLayout, Vec<CompiledSentence>) {
    let layout = WeightLayout {
        t: 3,
        unigram_blocks: rng.gen_range(2..=4),
        bigram_blocks: rng.gen_range(1..=2),
    };
    let sentences = (0..rng.gen_range(1..=3))
        .map(|_| {
            let n: usize = rng.gen_range(1..=4);
            let unigram = (0..n)
                .map(|_| {
                    (0..layout.unigram_blocks as u32)
                        .filter(|_| rng.gen_bool(0.6))
                        .collect()
                })
                .collect();
            let bigram = (0..n.saturating_sub(1))
                .map(|_| {
                    (0..layout.bigram_blocks as u32)
                        .filter(|_| rng.gen_bool(0.6))
                        .collect()
                })
                .collect();
            let labels = (0..n).map(|_| rng.gen_range(0..layout.t)).collect();
            CompiledSentence {
                features: SentenceFeatures { n, unigram, bigram },
                labels: Some(labels),
            }
        })
        .collect();
    (layout, sentences)
}

#[test]
fn criterion_03_gradient_check() {
    criterion("03 gradient-check", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1203);
        for _ in 0..5 {
            let (layout, batch) = random_batch(&mut rng);
            let weights: Vec<f64> = (0..layout.len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let sigma2 = 10.0;
            let (_, grad) =
                log_likelihood_and_gradient(&weights, &layout, &batch, sigma2).unwrap();

            let step = 1e-5;
            for i in 0..weights.len() {
                let mut plus = weights.clone();
                plus[i] += step;
                let mut minus = weights.clone();
                minus[i] -= step;
                let (f_plus, _) =
                    log_likelihood_and_gradient(&plus, &layout, &batch, sigma2).unwrap();
                let (f_minus, _) =
                    log_likelihood_and_gradient(&minus, &layout, &batch, sigma2).unwrap();
                let fd = (f_plus - f_minus) / (2.0 * step);
                let rel = (grad[i] - fd).abs() / fd.abs().max(1.0);
                assert!(rel <= 1e-4, "component {i}: analytic {} vs fd {fd}", grad[i]);
            }
        }
    });
}

#[test]
fn criterion_04_extraction_trend() {
    criterion("04 extraction-trend", || {
        let (domain, background) = extraction_corpus(1204, 1000);
        let table = TermhoodTable::build(&domain, &background);
        let config = TrainConfig::default();

        let word_matrix = extract_features(
            &domain,
            &table,
            &FeatureConfig::parse_group("word").unwrap(),
        );
        let word_report = kfold(&word_matrix, 10, 1204, &config).unwrap();

        let diff_matrix = extract_features(
            &domain,
            &table,
            &FeatureConfig::parse_group("ΔFreq,ΔFreq_Sen").unwrap(),
        );
        let diff_report = kfold(&diff_matrix, 10, 1204, &config).unwrap();

        println!(
            "  word-only macro F1 = {:.4}, termhood-difference macro F1 = {:.4}",
            word_report.macro_f1, diff_report.macro_f1
        );
        assert!(
            word_report.macro_f1 >= 0.6,
            "word-only F1 {} < 0.6",
            word_report.macro_f1
        );
        assert!(
            diff_report.macro_f1 >= 0.9,
            "termhood-difference F1 {} < 0.9",
            diff_report.macro_f1
        );
        assert!(
            diff_report.macro_f1 >= word_report.macro_f1,
            "adding termhood differences did not help: {} < {}",
            diff_report.macro_f1,
            word_report.macro_f1
        );
    });
}

#[test]
fn criterion_05_f1_arithmetic() {
    criterion("05 f1-arithmetic", || {
        let f1 = f1_score(0.80098, 0.7422);
        assert!(close(f1, 0.7705, 5e-4), "F1(0.80098, 0.7422) = {f1}");
        // documented, not asserted: the value 0.76851 sometimes reported
        // for this P/R pair is not the direct harmonic mean
        println!("  direct F1 = {f1:.5}; reported value 0.76851 differs by {:.5}", (f1 - 0.76851).abs());
    });
}

#[test]
fn criterion_06_logl_oracle() {
    criterion("06 logl-oracle", || {
        let independent = PairContingency { k11: 2, k12: 8, k21: 18, k22: 72 };
        assert!(log_likelihood_ratio(&independent).abs() <= 1e-9);

        let diagonal = PairContingency { k11: 10, k12: 0, k21: 0, k22: 10 };
        assert!(close(log_likelihood_ratio(&diagonal), 40.0 * 2f64.ln(), 1e-9));

        let mut rng = ChaCha8Rng::seed_from_u64(1206);
        for _ in 0..1000 {
            let t = PairContingency {
                k11: rng.gen_range(0..50),
                k12: rng.gen_range(0..50),
                k21: rng.gen_range(0..50),
                k22: rng.gen_range(0..200),
            };
            let transposed = PairContingency { k11: t.k11, k12: t.k21, k21: t.k12, k22: t.k22 };
            assert!(close(
                log_likelihood_ratio(&t),
                log_likelihood_ratio(&transposed),
                1e-9
            ));
        }
    });
}

#[test]
fn criterion_07_association_algebra() {
    criterion("07 association-algebra", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1207);
        for _ in 0..10_000 {
            let raw: f64 = rng.gen_range(0.0..100.0);
            let tc: f64 = rng.gen_range(1e-6..2.0);
            let te: f64 = rng.gen_range(1e-6..2.0);
            let got = termhood_weighted_association(raw, tc, te);
            let identity = raw * tc.min(te) * tc.min(te);
            assert!((got - identity).abs() <= 1e-12 * identity.abs().max(1.0));
        }

        // with all termhoods equal, the weighted ranking is the raw ranking
        let candidates: Vec<AlignmentCandidate> = (0..60)
            .map(|i| {
                let logl = rng.gen_range(0.0..100.0);
                AlignmentCandidate {
                    source: vec![format!("s{i:02}")],
                    target: vec![format!("t{i:02}")],
                    contingency: PairContingency::default(),
                    logl,
                    termhood_source: 0.4,
                    termhood_target: 0.4,
                    association: termhood_weighted_association(logl, 0.4, 0.4),
                }
            })
            .collect();
        let weighted = rank_candidates(candidates.clone(), RankMode::All);
        let mut raw = candidates;
        raw.sort_by(|a, b| {
            b.logl
                .partial_cmp(&a.logl)
                .unwrap()
                .then_with(|| a.source.cmp(&b.source))
        });
        let w: Vec<&str> = weighted.iter().map(|c| c.source[0].as_str()).collect();
        let r: Vec<&str> = raw.iter().map(|c| c.source[0].as_str()).collect();
        assert_eq!(w, r);
    });
}

#[test]
fn criterion_08_alignment_trend() {
    criterion("08 alignment-trend", || {
        let fx = alignment_fixture(1208, 2000);
        let candidates = build_candidates(
            &fx.pairs,
            &fx.src_terms,
            &fx.tgt_terms,
            &fx.src_domain,
            &fx.src_background,
            &fx.tgt_domain,
            &fx.tgt_background,
            &AlignOptions::default(),
        );

        let weighted = rank_candidates(candidates.clone(), RankMode::All);
        let mut raw = candidates;
        raw.sort_by(|a, b| {
            b.logl
                .partial_cmp(&a.logl)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.source.cmp(&b.source))
                .then_with(|| a.target.cmp(&b.target))
        });

        let p_weighted = precision_at_n(&weighted, &fx.gold, 50).unwrap();
        let p_raw = precision_at_n(&raw, &fx.gold, 50).unwrap();
        println!("  P@50 weighted = {p_weighted:.4}, raw LogL = {p_raw:.4}");
        assert!(p_weighted >= p_raw, "weighting hurt P@50: {p_weighted} < {p_raw}");
        assert!(p_weighted >= 0.9, "weighted P@50 {p_weighted} < 0.9");
    });
}

#[test]
fn criterion_09_precision_at_n_arithmetic() {
    criterion("09 p-at-n-arithmetic", || {
        let mut gold = HashMap::new();
        let ranked: Vec<AlignmentCandidate> = (0..500)
            .map(|i| {
                let c = AlignmentCandidate {
                    source: vec![format!("s{i:03}")],
                    target: vec![format!("t{i:03}")],
                    contingency: PairContingency::default(),
                    logl: 1.0,
                    termhood_source: 1.0,
                    termhood_target: 1.0,
                    association: 1.0,
                };
                gold.insert((c.source_joined(), c.target_joined()), i < 342);
                c
            })
            .collect();
        let p = precision_at_n(&ranked, &gold, 500).unwrap();
        assert_eq!(p, 0.6840);
    });
}

// ---- criterion 10: byte-identical stage reruns through the binary ----

struct Runner {
    dir: PathBuf,
}

impl Runner {
    fn run(&self, args: &[&str]) {
        let status = Command::new(env!("CARGO_BIN_EXE_termalign"))
            .current_dir(&self.dir)
            .args(args)
            .output()
            .expect("binary runs");
        assert!(
            status.status.success(),
            "termalign {:?} failed: {}",
            args,
            String::from_utf8_lossy(&status.stderr)
        );
    }

    /// Run the stage twice and demand byte-identical output (and manifest
    /// when one is written).
    fn rerun_identical(&self, args: &[&str], outputs: &[&str]) {
        self.run(args);
        let first: Vec<Vec<u8>> = outputs
            .iter()
            .map(|name| std::fs::read(self.dir.join(name)).expect("output exists"))
            .collect();
        self.run(args);
        for (name, before) in outputs.iter().zip(first) {
            let after = std::fs::read(self.dir.join(name)).unwrap();
            assert_eq!(before, after, "{name} differs between reruns");
        }
    }
}

fn write_corpus(path: &Path, corpus: &Corpus) {
    let mut buf = Vec::new();
    termalign::corpus::write_column_corpus(corpus, &mut buf).unwrap();
    std::fs::write(path, buf).unwrap();
}

#[test]
fn criterion_10_stage_rerun_determinism() {
    criterion("10 stage-determinism", || {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().to_path_buf();

        let (domain, background) = extraction_corpus(1210, 80);
        write_corpus(&dir.join("domain.tsv"), &domain);
        write_corpus(&dir.join("background.tsv"), &background);

        let fx = alignment_fixture(1210, 150);
        let plain = |s: &termalign::corpus::Sentence| {
            s.tokens
                .iter()
                .map(|t| t.surface.clone())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let src_lines: Vec<String> = fx.pairs.iter().map(|p| plain(&p.source)).collect();
        let tgt_lines: Vec<String> = fx.pairs.iter().map(|p| plain(&p.target)).collect();
        std::fs::write(dir.join("src.txt"), src_lines.join("\n") + "\n").unwrap();
        std::fs::write(dir.join("tgt.txt"), tgt_lines.join("\n") + "\n").unwrap();
        let terms = |terms: &[Vec<String>]| {
            terms.iter().map(|t| t.join(" ")).collect::<Vec<_>>().join("\n") + "\n"
        };
        std::fs::write(dir.join("src_terms.txt"), terms(&fx.src_terms)).unwrap();
        std::fs::write(dir.join("tgt_terms.txt"), terms(&fx.tgt_terms)).unwrap();
        // backgrounds with a placeholder POS column to fit the 2-column format
        let bg_column = |corpus: &Corpus| {
            let mut out = String::new();
            for s in &corpus.sentences {
                for t in &s.tokens {
                    out.push_str(&format!("{}\tg\n", t.surface));
                }
                out.push('\n');
            }
            out
        };
        std::fs::write(dir.join("src_bg.tsv"), bg_column(&fx.src_background)).unwrap();
        std::fs::write(dir.join("tgt_bg.tsv"), bg_column(&fx.tgt_background)).unwrap();
        let mut gold_lines: Vec<String> = fx
            .gold
            .keys()
            .map(|(c, e)| format!("{c}\t{e}\t1"))
            .collect();
        gold_lines.sort();
        std::fs::write(dir.join("gold.tsv"), gold_lines.join("\n") + "\n").unwrap();

        let runner = Runner { dir };
        runner.rerun_identical(
            &["stats", "--domain", "domain.tsv", "--background", "background.tsv", "-o", "stats.tsv"],
            &["stats.tsv"],
        );
        runner.rerun_identical(
            &["termhood", "--domain", "domain.tsv", "--background", "background.tsv", "-o", "termhood.tsv"],
            &["termhood.tsv"],
        );
        runner.rerun_identical(
            &[
                "features", "--domain", "domain.tsv", "--background", "background.tsv",
                "--group", "dfreq-dfreqsen", "-o", "matrix.tsv",
            ],
            &["matrix.tsv", "matrix.tsv.manifest"],
        );
        runner.rerun_identical(
            &["train", "--features", "matrix.tsv", "--model", "model.json"],
            &["model.json", "model.json.manifest"],
        );
        runner.rerun_identical(
            &["tag", "--features", "matrix.tsv", "--model", "model.json", "-o", "tags.tsv"],
            &["tags.tsv", "tags.tsv.manifest"],
        );
        runner.rerun_identical(
            &["eval", "--features", "matrix.tsv", "--model", "model.json", "-o", "eval.txt"],
            &["eval.txt", "eval.txt.manifest"],
        );
        runner.rerun_identical(
            &[
                "xval", "--features", "matrix.tsv", "--folds", "3", "--seed", "17",
                "-o", "xval.tsv",
            ],
            &["xval.tsv", "xval.tsv.manifest"],
        );
        runner.rerun_identical(
            &[
                "ngram", "--domain", "domain.tsv", "--background", "background.tsv",
                "--max-n", "2", "--min-count", "2", "-o", "ngram.tsv",
            ],
            &["ngram.tsv", "ngram.tsv.manifest"],
        );
        runner.rerun_identical(
            &[
                "align", "--source", "src.txt", "--target", "tgt.txt",
                "--source-terms", "src_terms.txt", "--target-terms", "tgt_terms.txt",
                "--src-background", "src_bg.tsv", "--tgt-background", "tgt_bg.tsv",
                "-o", "candidates.tsv",
            ],
            &["candidates.tsv", "candidates.tsv.manifest"],
        );
        runner.rerun_identical(
            &[
                "eval-align", "--candidates", "candidates.tsv", "--gold", "gold.tsv",
                "--at-n", "50", "-o", "p_at_n.txt",
            ],
            &["p_at_n.txt", "p_at_n.txt.manifest"],
        );
    });
}
