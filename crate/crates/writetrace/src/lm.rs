//! Word-level n-gram language model and perplexity scoring.
//!
//! [`NGramModel`] is an additively smoothed n-gram model with recursive
//! backoff to shorter contexts. Any scorer implementing [`TokenScorer`] can
//! back the perplexity operations, so the n-gram model is a replaceable
//! default rather than a hard dependency of the detectors.
//!
//! Perplexity is `exp(-(1/N) * sum(ln p(w_i | context)))` over the padded
//! token sequence including the end marker; natural logs throughout. Lower
//! perplexity means the model finds the text more likely.
//!
//! [`prefix_perplexity_curve`] scores the first N whitespace-delimited words
//! of a text for N on a configurable grid (default 10..=400 step 10), and
//! [`aggregate_prefix_curves`] reduces a corpus of curves to per-N mean and
//! standard deviation.

use std::collections::HashMap;
use std::io::{Read, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

/// Vocabulary index; 0 = `<unk>`, 1 = `<s>`, 2 = `</s>`.
pub type TokenId = u32;

pub const UNK_ID: TokenId = 0;
pub const BOS_ID: TokenId = 1;
pub const EOS_ID: TokenId = 2;

const MODEL_VERSION: u32 = 1;

/// Anything that can assign conditional token log-probabilities.
pub trait TokenScorer {
    /// N-gram order; contexts passed to [`TokenScorer::log_prob`] have
    /// length `order() - 1`.
    fn order(&self) -> usize;
    /// Map a raw token into the scorer's vocabulary (out-of-vocabulary
    /// tokens map to `<unk>`).
    fn lookup(&self, raw: &str) -> TokenId;
    /// Natural-log conditional probability of `token` given `context`.
    fn log_prob(&self, context: &[TokenId], token: TokenId) -> f64;
}

/// Lowercased maximal runs of word characters; punctuation dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            for lc in c.to_lowercase() {
                current.push(lc);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Split after '.', '!' or '?' followed by whitespace or end of text.
/// Segments are trimmed; empty segments are dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    for i in 0..chars.len() {
        let c = chars[i];
        if (c == '.' || c == '!' || c == '?')
            && (i + 1 == chars.len() || chars[i + 1].is_whitespace())
        {
            let seg: String = chars[start..=i].iter().collect();
            let seg = seg.trim();
            if !seg.is_empty() {
                sentences.push(seg.to_string());
            }
            start = i + 1;
        }
    }
    if start < chars.len() {
        let seg: String = chars[start..].iter().collect();
        let seg = seg.trim();
        if !seg.is_empty() {
            sentences.push(seg.to_string());
        }
    }
    sentences
}

/// Perplexity of one scored sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityReport {
    pub ppl: f64,
    pub n_tokens: usize,
    /// Natural-log units.
    pub log_prob_sum: f64,
}

impl PerplexityReport {
    pub fn new(log_prob_sum: f64, n_tokens: usize) -> Self {
        Self {
            ppl: (-log_prob_sum / n_tokens as f64).exp(),
            n_tokens,
            log_prob_sum,
        }
    }
}

/// Observed continuations of one context, sorted by token id.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ContextCounts {
    total: u64,
    counts: Vec<(TokenId, u64)>,
}

impl ContextCounts {
    fn count(&self, token: TokenId) -> u64 {
        self.counts
            .binary_search_by_key(&token, |(t, _)| *t)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }
}

/// Additively smoothed n-gram model with backoff.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    smoothing_alpha: f64,
    min_count: u64,
    /// `[<unk>, <s>, </s>, sorted real tokens...]`.
    vocab: Vec<String>,
    token_ids: HashMap<String, TokenId>,
    /// Indexed by context length 0..order; each maps context to counts.
    counts: Vec<HashMap<Box<[TokenId]>, ContextCounts>>,
    trained_on: String,
}

/// One persisted context: (context ids, total, [(token id, count)]).
type ContextEntry = (Vec<TokenId>, u64, Vec<(TokenId, u64)>);

/// Serialized form of [`NGramModel`]; a single self-describing file.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    order: usize,
    smoothing_alpha: f64,
    min_count: u64,
    trained_on: String,
    vocab: Vec<String>,
    /// Sorted by (context length, context ids).
    contexts: Vec<ContextEntry>,
}

/// Train an n-gram model.
///
/// Tokens occurring fewer than `min_count` times in the corpus map to
/// `<unk>`. Every text is padded with `order - 1` start markers and one end
/// marker; counts are kept for all context lengths so scoring can back off
/// to shorter contexts when the full context was never seen.
pub fn train_ngram(
    corpus: &[String],
    order: usize,
    smoothing_alpha: f64,
    min_count: u64,
) -> Result<NGramModel> {
    if order < 1 {
        return Err(Error::InvalidInput("order must be >= 1".into()));
    }
    if smoothing_alpha <= 0.0 {
        return Err(Error::InvalidInput("smoothing alpha must be > 0".into()));
    }
    let tokenized: Vec<Vec<String>> = corpus.iter().map(|t| tokenize(t)).collect();
    let total_tokens: usize = tokenized.iter().map(|t| t.len()).sum();
    if corpus.is_empty() || total_tokens == 0 {
        return Err(Error::InvalidInput("empty corpus".into()));
    }

    let mut freq: HashMap<&str, u64> = HashMap::new();
    for toks in &tokenized {
        for t in toks {
            *freq.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<&str> = freq
        .iter()
        .filter(|(_, &c)| c >= min_count)
        .map(|(t, _)| *t)
        .collect();
    kept.sort_unstable();

    let mut vocab: Vec<String> = vec![UNK.into(), BOS.into(), EOS.into()];
    vocab.extend(kept.iter().map(|t| t.to_string()));
    let token_ids: HashMap<String, TokenId> = vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as TokenId))
        .collect();

    type RawCounts = HashMap<Box<[TokenId]>, HashMap<TokenId, u64>>;
    let mut counts: Vec<RawCounts> = vec![HashMap::new(); order];
    for toks in &tokenized {
        let mut seq: Vec<TokenId> = vec![BOS_ID; order - 1];
        seq.extend(
            toks.iter()
                .map(|t| token_ids.get(t.as_str()).copied().unwrap_or(UNK_ID)),
        );
        seq.push(EOS_ID);
        for p in (order - 1)..seq.len() {
            let token = seq[p];
            for ctx_len in 0..order {
                let ctx = &seq[p - ctx_len..p];
                *counts[ctx_len]
                    .entry(ctx.into())
                    .or_default()
                    .entry(token)
                    .or_insert(0) += 1;
            }
        }
    }

    let counts: Vec<HashMap<Box<[TokenId]>, ContextCounts>> = counts
        .into_iter()
        .map(|m| {
            m.into_iter()
                .map(|(ctx, by_token)| {
                    let mut items: Vec<(TokenId, u64)> = by_token.into_iter().collect();
                    items.sort_unstable_by_key(|(t, _)| *t);
                    let total = items.iter().map(|(_, c)| c).sum();
                    (
                        ctx,
                        ContextCounts {
                            total,
                            counts: items,
                        },
                    )
                })
                .collect()
        })
        .collect();

    let mut hasher = Sha256::new();
    hasher.update(order.to_le_bytes());
    hasher.update(smoothing_alpha.to_le_bytes());
    hasher.update(min_count.to_le_bytes());
    for text in corpus {
        hasher.update(text.as_bytes());
        hasher.update([0u8]);
    }
    let trained_on = format!("sha256:{:x}", hasher.finalize());

    Ok(NGramModel {
        order,
        smoothing_alpha,
        min_count,
        vocab,
        token_ids,
        counts,
        trained_on,
    })
}

impl NGramModel {
    pub fn smoothing_alpha(&self) -> f64 {
        self.smoothing_alpha
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Corpus fingerprint recorded at training time.
    pub fn fingerprint(&self) -> &str {
        &self.trained_on
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// Size of the smoothed output distribution: every vocabulary token that
    /// can be emitted (everything except the start marker).
    pub fn vocab_out_size(&self) -> usize {
        self.vocab.len() - 1
    }

    /// Longest stored context that has been observed, shortening from the
    /// back; the empty (unigram) context always exists.
    fn effective_context<'a>(&self, mut ctx: &'a [TokenId]) -> &'a [TokenId] {
        let max = self.order - 1;
        if ctx.len() > max {
            ctx = &ctx[ctx.len() - max..];
        }
        while !ctx.is_empty() && !self.counts[ctx.len()].contains_key(ctx) {
            ctx = &ctx[1..];
        }
        ctx
    }

    fn prob(&self, ctx: &[TokenId], token: TokenId) -> f64 {
        let ctx = self.effective_context(ctx);
        let v_out = self.vocab_out_size() as f64;
        match self.counts[ctx.len()].get(ctx) {
            Some(cc) => {
                (cc.count(token) as f64 + self.smoothing_alpha)
                    / (cc.total as f64 + self.smoothing_alpha * v_out)
            }
            // Untrained edge: uniform over the output vocabulary.
            None => 1.0 / v_out,
        }
    }

    /// Full smoothed distribution over emittable tokens for a context.
    /// Probabilities are listed in token-id order and sum to 1.
    pub fn conditional_distribution(&self, ctx: &[TokenId]) -> Vec<(TokenId, f64)> {
        (0..self.vocab.len() as TokenId)
            .filter(|&t| t != BOS_ID)
            .map(|t| (t, self.prob(ctx, t)))
            .collect()
    }

    /// Draw `n_words` of ancestral samples, deterministic per seed.
    ///
    /// Draws follow the observed continuation counts at the longest seen
    /// context, backing off to shorter contexts when a context has no
    /// real-token continuation. End and unknown markers are never emitted
    /// (the draw renormalizes over real words), so sampled text stays
    /// typical for the model: its perplexity is low by construction.
    /// Sampling from the alpha-smoothed conditionals instead would mix in
    /// uniform vocabulary noise at every sparse context and lose exactly
    /// that property.
    pub fn sample_text(&self, n_words: usize, seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ctx: Vec<TokenId> = vec![BOS_ID; self.order - 1];
        let mut words: Vec<&str> = Vec::with_capacity(n_words);
        while words.len() < n_words {
            let token = self.sample_token(&ctx, &mut rng);
            if token == UNK_ID && self.vocab.len() > 3 {
                continue; // degenerate draw, retry
            }
            words.push(&self.vocab[token as usize]);
            if self.order > 1 {
                ctx.push(token);
                ctx.remove(0);
            }
        }
        words.join(" ")
    }

    /// One draw over real-word continuations (ids above the reserved
    /// markers), weighted by observed counts at the longest context that
    /// has any. Returns `<unk>` only when the vocabulary has no real words.
    fn sample_token(&self, ctx: &[TokenId], rng: &mut ChaCha8Rng) -> TokenId {
        let mut ctx = self.effective_context(ctx);
        loop {
            if let Some(cc) = self.counts[ctx.len()].get(ctx) {
                let real_total: u64 = cc
                    .counts
                    .iter()
                    .filter(|(t, _)| *t > EOS_ID)
                    .map(|(_, c)| c)
                    .sum();
                if real_total > 0 {
                    let mut pick = rng.gen_range(0..real_total);
                    for &(t, c) in &cc.counts {
                        if t <= EOS_ID {
                            continue;
                        }
                        if pick < c {
                            return t;
                        }
                        pick -= c;
                    }
                }
            }
            if ctx.is_empty() {
                return UNK_ID;
            }
            ctx = &ctx[1..];
        }
    }

    /// Persist as a single self-describing file.
    pub fn save(&self, mut w: impl Write) -> Result<()> {
        let mut contexts = Vec::new();
        for by_len in &self.counts {
            let mut keys: Vec<&Box<[TokenId]>> = by_len.keys().collect();
            keys.sort();
            for k in keys {
                let cc = &by_len[k];
                contexts.push((k.to_vec(), cc.total, cc.counts.clone()));
            }
        }
        let file = ModelFile {
            version: MODEL_VERSION,
            order: self.order,
            smoothing_alpha: self.smoothing_alpha,
            min_count: self.min_count,
            trained_on: self.trained_on.clone(),
            vocab: self.vocab.clone(),
            contexts,
        };
        serde_json::to_writer(&mut w, &file).map_err(|e| Error::ModelFormat(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn load(r: impl Read) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_reader(r).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if file.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                file.version
            )));
        }
        if file.vocab.len() < 3
            || file.vocab[UNK_ID as usize] != UNK
            || file.vocab[BOS_ID as usize] != BOS
            || file.vocab[EOS_ID as usize] != EOS
        {
            return Err(Error::ModelFormat("missing reserved vocabulary".into()));
        }
        let token_ids = file
            .vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        let mut counts: Vec<HashMap<Box<[TokenId]>, ContextCounts>> =
            vec![HashMap::new(); file.order];
        for (ctx, total, items) in file.contexts {
            if ctx.len() >= file.order {
                return Err(Error::ModelFormat("context longer than order".into()));
            }
            counts[ctx.len()].insert(
                ctx.into_boxed_slice(),
                ContextCounts {
                    total,
                    counts: items,
                },
            );
        }
        Ok(NGramModel {
            order: file.order,
            smoothing_alpha: file.smoothing_alpha,
            min_count: file.min_count,
            vocab: file.vocab,
            token_ids,
            counts,
            trained_on: file.trained_on,
        })
    }
}

impl TokenScorer for NGramModel {
    fn order(&self) -> usize {
        self.order
    }

    fn lookup(&self, raw: &str) -> TokenId {
        self.token_ids.get(raw).copied().unwrap_or(UNK_ID)
    }

    fn log_prob(&self, context: &[TokenId], token: TokenId) -> f64 {
        self.prob(context, token).ln()
    }
}

/// Perplexity of a token sequence under a scorer.
///
/// The sequence is padded with start markers and scored through the end
/// marker; `n_tokens` counts the scored positions (`tokens.len() + 1`).
pub fn perplexity<S: TokenScorer + ?Sized>(model: &S, tokens: &[String]) -> Result<PerplexityReport> {
    if tokens.is_empty() {
        return Err(Error::InvalidInput(
            "cannot score an empty token sequence".into(),
        ));
    }
    let order = model.order();
    let mut seq: Vec<TokenId> = vec![BOS_ID; order - 1];
    seq.extend(tokens.iter().map(|t| model.lookup(t)));
    seq.push(EOS_ID);

    let mut log_prob_sum = 0.0;
    for p in (order - 1)..seq.len() {
        log_prob_sum += model.log_prob(&seq[p - (order - 1)..p], seq[p]);
    }
    Ok(PerplexityReport::new(log_prob_sum, tokens.len() + 1))
}

/// Perplexity of a whole text.
pub fn essay_perplexity<S: TokenScorer + ?Sized>(model: &S, text: &str) -> Result<PerplexityReport> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::InvalidInput("essay has no tokens".into()));
    }
    perplexity(model, &tokens)
}

/// Per-sentence perplexities; sentences without tokens are skipped.
pub fn sentence_perplexities<S: TokenScorer + ?Sized>(
    model: &S,
    text: &str,
) -> Vec<PerplexityReport> {
    split_sentences(text)
        .iter()
        .filter_map(|s| {
            let tokens = tokenize(s);
            if tokens.is_empty() {
                None
            } else {
                perplexity(model, &tokens).ok()
            }
        })
        .collect()
}

/// One text's perplexity as a function of prefix length in words.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixCurve {
    /// (number of leading words, perplexity), in increasing word count.
    pub points: Vec<(usize, f64)>,
}

/// Per-N mean/std of perplexity across a corpus of prefix curves.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedPrefixCurve {
    /// (n_words, mean ppl, population std of ppl, texts contributing).
    pub points: Vec<(usize, f64, f64, usize)>,
}

/// Score the first N whitespace-delimited words of `text` for N on the grid
/// `n_start..=n_end` step `step`; grid points beyond the text length are
/// omitted.
pub fn prefix_perplexity_curve<S: TokenScorer + ?Sized>(
    model: &S,
    text: &str,
    n_start: usize,
    n_end: usize,
    step: usize,
) -> PrefixCurve {
    let words: Vec<&str> = text.split_whitespace().collect();
    let mut points = Vec::new();
    let mut n = n_start;
    while n <= n_end && n <= words.len() {
        let prefix = words[..n].join(" ");
        if let Ok(report) = essay_perplexity(model, &prefix) {
            points.push((n, report.ppl));
        }
        n += step;
    }
    PrefixCurve { points }
}

/// Mean and population standard deviation of perplexity at each N, over the
/// curves that reach that N.
pub fn aggregate_prefix_curves(curves: &[PrefixCurve]) -> AggregatedPrefixCurve {
    let mut by_n: Vec<(usize, Vec<f64>)> = Vec::new();
    for curve in curves {
        for &(n, ppl) in &curve.points {
            match by_n.binary_search_by_key(&n, |(k, _)| *k) {
                Ok(i) => by_n[i].1.push(ppl),
                Err(i) => by_n.insert(i, (n, vec![ppl])),
            }
        }
    }
    let points = by_n
        .into_iter()
        .map(|(n, ppls)| {
            let count = ppls.len();
            let mean = ppls.iter().sum::<f64>() / count as f64;
            let var = ppls.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / count as f64;
            (n, mean, var.sqrt(), count)
        })
        .collect();
    AggregatedPrefixCurve { points }
}
