//! Seeded synthetic corpora with planted terms, used by the acceptance
//! suite and handy for benchmarking: termhood separates planted terms from
//! distractors by construction, so trend assertions are well-defined.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{BioTag, Corpus, CorpusRole, Sentence, SentencePair, Token};

/// A labeled domain corpus plus a matching background corpus.
///
/// Term spans come in two flavors: a small set of frequent fixed spans a
/// word-memorizing model can learn, and one-off spans whose tokens never
/// repeat. Filler mixes frequent distractors with a long tail of rare
/// words that are well attested in the background, so an unseen word is
/// not by itself evidence of a term — but its frequency difference still
/// is (rare filler is background-heavy, term tokens are domain-only).
pub fn extraction_corpus(seed: u64, n_sentences: usize) -> (Corpus, Corpus) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let distractors: Vec<String> = (0..30).map(|i| format!("w{i:02}")).collect();
    let rare: Vec<String> = (0..(n_sentences * 3 / 2).max(1))
        .map(|i| format!("r{i:04}"))
        .collect();
    let frequent_spans: Vec<Vec<String>> = (0..10)
        .map(|i| {
            if i % 2 == 0 {
                vec![format!("term{i:02}")]
            } else {
                vec![format!("term{i:02}a"), format!("term{i:02}b")]
            }
        })
        .collect();
    let mut singleton_counter = 0usize;

    let mut sentences = Vec::with_capacity(n_sentences);
    for _ in 0..n_sentences {
        let mut tokens: Vec<Token> = Vec::new();
        let mut labels: Vec<BioTag> = Vec::new();
        let filler = |rng: &mut ChaCha8Rng, tokens: &mut Vec<Token>, labels: &mut Vec<BioTag>, k: usize| {
            for _ in 0..k {
                let w = if rng.gen_bool(0.15) {
                    rare.choose(rng).unwrap()
                } else {
                    distractors.choose(rng).unwrap()
                };
                tokens.push(Token::new(w.clone(), "u"));
                labels.push(BioTag::O);
            }
        };
        let k = rng.gen_range(2..=4);
        filler(&mut rng, &mut tokens, &mut labels, k);
        if rng.gen_bool(0.8) {
            let span: Vec<String> = if rng.gen_bool(0.5) {
                frequent_spans.choose(&mut rng).unwrap().clone()
            } else {
                let len = rng.gen_range(1..=2);
                (0..len)
                    .map(|_| {
                        singleton_counter += 1;
                        format!("uniq{singleton_counter:05}")
                    })
                    .collect()
            };
            for (i, w) in span.iter().enumerate() {
                tokens.push(Token::new(w.clone(), "N"));
                labels.push(if i == 0 { BioTag::B } else { BioTag::I });
            }
            let k = rng.gen_range(2..=4);
            filler(&mut rng, &mut tokens, &mut labels, k);
        } else {
            let k = rng.gen_range(1..=3);
            filler(&mut rng, &mut tokens, &mut labels, k);
        }
        sentences.push(Sentence {
            tokens,
            labels: Some(labels),
        });
    }
    let domain = Corpus {
        sentences,
        role: CorpusRole::Domain,
    };

    // every rare type gets three background occurrences, so its frequency
    // difference stays negative even when it shows up once or twice in the
    // domain filler; distractors pad the rest
    let mut bg_tokens: Vec<String> = rare
        .iter()
        .flat_map(|w| std::iter::repeat(w.clone()).take(3))
        .collect();
    let pad = (n_sentences * 7).saturating_sub(bg_tokens.len());
    for _ in 0..pad {
        bg_tokens.push(distractors.choose(&mut rng).unwrap().clone());
    }
    bg_tokens.shuffle(&mut rng);
    let mut background_sentences = Vec::new();
    let mut pool = bg_tokens.into_iter().peekable();
    while pool.peek().is_some() {
        let k = rng.gen_range(5..=9);
        let tokens: Vec<Token> = pool.by_ref().take(k).map(|w| Token::new(w, "u")).collect();
        background_sentences.push(Sentence {
            tokens,
            labels: None,
        });
    }
    let background = Corpus {
        sentences: background_sentences,
        role: CorpusRole::Background,
    };
    (domain, background)
}

/// Synthetic parallel corpus with planted bilingual term pairs and planted
/// high-co-occurrence general-word pairs.
pub struct AlignmentFixture {
    pub pairs: Vec<SentencePair>,
    pub src_terms: Vec<Vec<String>>,
    pub tgt_terms: Vec<Vec<String>>,
    pub src_domain: Corpus,
    pub src_background: Corpus,
    pub tgt_domain: Corpus,
    pub tgt_background: Corpus,
    /// The planted correct pairs, as (source, target) joined strings.
    pub gold: std::collections::HashMap<(String, String), bool>,
}

/// Every sentence pair carries one term pair (zt_i, et_i) and one general
/// pair (zg_g, eg_g) with g shared across the two sides, so general pairs
/// co-occur as strongly as term pairs but are frequent in the background.
pub fn alignment_fixture(seed: u64, n_pairs: usize) -> AlignmentFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_term_pairs = 60;
    let n_general = 10;

    let src_term_words: Vec<String> = (0..n_term_pairs).map(|i| format!("zt{i:02}")).collect();
    let tgt_term_words: Vec<String> = (0..n_term_pairs).map(|i| format!("et{i:02}")).collect();
    let src_general: Vec<String> = (0..n_general).map(|i| format!("zg{i}")).collect();
    let tgt_general: Vec<String> = (0..n_general).map(|i| format!("eg{i}")).collect();

    let mut pairs = Vec::with_capacity(n_pairs);
    for idx in 0..n_pairs {
        let t = idx % n_term_pairs;
        let g = rng.gen_range(0..n_general);
        let src = Sentence {
            tokens: vec![
                Token::new(src_general[g].clone(), ""),
                Token::new(src_term_words[t].clone(), ""),
                Token::new(src_general[rng.gen_range(0..n_general)].clone(), ""),
            ],
            labels: None,
        };
        let tgt = Sentence {
            tokens: vec![
                Token::new(tgt_general[g].clone(), ""),
                Token::new(tgt_term_words[t].clone(), ""),
                Token::new(tgt_general[rng.gen_range(0..n_general)].clone(), ""),
            ],
            labels: None,
        };
        pairs.push(SentencePair {
            source: src,
            target: tgt,
        });
    }

    let side_corpus = |take_source: bool, pairs: &[SentencePair]| Corpus {
        sentences: pairs
            .iter()
            .map(|p| if take_source { p.source.clone() } else { p.target.clone() })
            .collect(),
        role: CorpusRole::Domain,
    };
    let background = |words: &[String], rng: &mut ChaCha8Rng| Corpus {
        sentences: (0..n_pairs)
            .map(|_| Sentence {
                tokens: (0..3)
                    .map(|_| Token::new(words.choose(rng).unwrap().clone(), ""))
                    .collect(),
                labels: None,
            })
            .collect(),
        role: CorpusRole::Background,
    };

    let src_domain = side_corpus(true, &pairs);
    let tgt_domain = side_corpus(false, &pairs);
    let src_background = background(&src_general, &mut rng);
    let tgt_background = background(&tgt_general, &mut rng);

    let mut gold = std::collections::HashMap::new();
    for i in 0..n_term_pairs {
        gold.insert((src_term_words[i].clone(), tgt_term_words[i].clone()), true);
    }

    let src_terms: Vec<Vec<String>> = src_term_words
        .iter()
        .chain(&src_general)
        .map(|w| vec![w.clone()])
        .collect();
    let tgt_terms: Vec<Vec<String>> = tgt_term_words
        .iter()
        .chain(&tgt_general)
        .map(|w| vec![w.clone()])
        .collect();

    AlignmentFixture {
        pairs,
        src_terms,
        tgt_terms,
        src_domain,
        src_background,
        tgt_domain,
        tgt_background,
        gold,
    }
}
