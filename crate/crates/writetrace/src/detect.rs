//! The three anomaly detectors, assembled from the lower modules.
//!
//! All detectors share one orientation: higher score means more suspicious /
//! positive. Decisions are never baked in; a threshold is attached
//! explicitly (typically chosen from a ROC operating point in [`crate::eval`]).
//!
//! - [`ai_text_score`]: essay perplexity under a language model, negated so
//!   that suspiciously fluent (low-perplexity) text scores high;
//! - [`fit_biometric_verifier`] / [`score_pair`]: same-writer verification
//!   from per-feature distances between two sessions' keystroke features
//!   (positive class = same writer; flip the sign for impostor reporting);
//! - [`fit_copy_typing_detector`] / [`score_session`]: transcription vs
//!   drafting from raw writing-process features (positive = transcription).

use std::collections::HashMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_log::Session;
use crate::features::{extract_features, pair_distance, FeatureVector, FEATURE_NAMES};
use crate::gbm::{fit_gbm, GbmModel, TrainConfig};
use crate::lm::{essay_perplexity, TokenScorer};

/// Which detector produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectorKind {
    PerplexityAiText,
    BiometricPair,
    CopyTyping,
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DetectorKind::PerplexityAiText => "aitext",
            DetectorKind::BiometricPair => "pairs",
            DetectorKind::CopyTyping => "copytype",
        };
        write!(f, "{s}")
    }
}

/// One scored subject. `decision` is present exactly when `threshold` is,
/// and equals `score >= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub subject_id: String,
    pub detector: DetectorKind,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decision: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold: Option<f64>,
}

impl DetectionResult {
    fn new(subject_id: String, detector: DetectorKind, score: f64, threshold: Option<f64>) -> Self {
        Self {
            subject_id,
            detector,
            score,
            decision: threshold.map(|t| score >= t),
            threshold,
        }
    }
}

/// Write detection results as line-delimited JSON records.
pub fn write_detections(results: &[DetectionResult], mut w: impl Write) -> Result<()> {
    for r in results {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::InvalidInput(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Score one essay for AI generation: the negated essay perplexity.
///
/// Model-typical text has low perplexity, so it scores high (suspicious);
/// any strictly monotone rescaling of perplexity leaves the detector's ROC
/// unchanged.
pub fn ai_text_score<S: TokenScorer + ?Sized>(
    model: &S,
    subject_id: &str,
    text: &str,
    threshold: Option<f64>,
) -> Result<DetectionResult> {
    let report = essay_perplexity(model, text)?;
    Ok(DetectionResult::new(
        subject_id.to_string(),
        DetectorKind::PerplexityAiText,
        -report.ppl,
        threshold,
    ))
}

/// One labeled pair row: the per-feature distance vector between two
/// sessions' feature vectors.
#[derive(Debug, Clone)]
pub struct PairRow {
    pub id_a: String,
    pub id_b: String,
    pub distance: FeatureVector,
    /// 1 = same writer, 0 = different writers.
    pub label: u8,
}

/// Labeled same-writer / different-writer pairs.
#[derive(Debug, Clone)]
pub struct PairDataset {
    pub rows: Vec<PairRow>,
}

impl PairDataset {
    /// (same-writer rows, different-writer rows).
    pub fn class_sizes(&self) -> (usize, usize) {
        let same = self.rows.iter().filter(|r| r.label == 1).count();
        (same, self.rows.len() - same)
    }
}

/// Sample a pair dataset from sessions.
///
/// Same-writer pairs come from two distinct sessions of one writer
/// (repeaters); different-writer pairs from sessions of two distinct
/// writers. Sampling is without replacement and seeded; asking for more
/// pairs than exist is an error naming the shortfall.
pub fn build_pair_dataset(
    sessions: &[Session],
    n_same: usize,
    n_diff: usize,
    seed: u64,
) -> Result<PairDataset> {
    let mut by_writer: Vec<(&str, Vec<usize>)> = Vec::new();
    let mut writer_index: HashMap<&str, usize> = HashMap::new();
    for (i, s) in sessions.iter().enumerate() {
        match writer_index.get(s.writer_id.as_str()) {
            Some(&w) => by_writer[w].1.push(i),
            None => {
                writer_index.insert(&s.writer_id, by_writer.len());
                by_writer.push((&s.writer_id, vec![i]));
            }
        }
    }
    if by_writer.len() < 2 {
        return Err(Error::InvalidInput(
            "pair dataset needs sessions from at least two writers".into(),
        ));
    }

    let mut same_pairs: Vec<(usize, usize)> = Vec::new();
    for (_, idxs) in &by_writer {
        for a in 0..idxs.len() {
            for b in (a + 1)..idxs.len() {
                same_pairs.push((idxs[a], idxs[b]));
            }
        }
    }
    if same_pairs.len() < n_same {
        return Err(Error::InvalidInput(format!(
            "insufficient repeaters: need {n_same} same-writer pairs, only {} available ({} short)",
            same_pairs.len(),
            n_same - same_pairs.len()
        )));
    }
    let mut diff_pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..sessions.len() {
        for b in (a + 1)..sessions.len() {
            if sessions[a].writer_id != sessions[b].writer_id {
                diff_pairs.push((a, b));
            }
        }
    }
    if diff_pairs.len() < n_diff {
        return Err(Error::InvalidInput(format!(
            "need {n_diff} different-writer pairs, only {} available",
            diff_pairs.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen_same = rand::seq::index::sample(&mut rng, same_pairs.len(), n_same).into_vec();
    chosen_same.sort_unstable();
    let mut chosen_diff = rand::seq::index::sample(&mut rng, diff_pairs.len(), n_diff).into_vec();
    chosen_diff.sort_unstable();

    // Extract each involved session's features once.
    let mut feature_cache: HashMap<usize, FeatureVector> = HashMap::new();
    let mut features_of = |i: usize| -> FeatureVector {
        *feature_cache
            .entry(i)
            .or_insert_with(|| extract_features(&sessions[i]))
    };

    let mut rows = Vec::with_capacity(n_same + n_diff);
    for (label, chosen, pool) in [
        (1u8, &chosen_same, &same_pairs),
        (0u8, &chosen_diff, &diff_pairs),
    ] {
        for &k in chosen {
            let (a, b) = pool[k];
            let fa = features_of(a);
            let fb = features_of(b);
            rows.push(PairRow {
                id_a: sessions[a].session_id.clone(),
                id_b: sessions[b].session_id.clone(),
                distance: pair_distance(&fa, &fb),
                label,
            });
        }
    }
    Ok(PairDataset { rows })
}

fn feature_name_strings() -> Vec<String> {
    FEATURE_NAMES.iter().map(|n| n.to_string()).collect()
}

/// Fit the same-writer verifier on a pair dataset (positive = same writer).
pub fn fit_biometric_verifier(pairs: &PairDataset, config: &TrainConfig) -> Result<GbmModel> {
    let rows: Vec<Vec<Option<f64>>> = pairs.rows.iter().map(|r| r.distance.to_row()).collect();
    let labels: Vec<u8> = pairs.rows.iter().map(|r| r.label).collect();
    fit_gbm(&rows, &labels, &feature_name_strings(), config)
}

/// Score a session pair: log-odds that both sessions share a writer.
///
/// Symmetric in its arguments, since per-feature distances are.
pub fn score_pair(
    model: &GbmModel,
    a: &Session,
    b: &Session,
    threshold: Option<f64>,
) -> Result<DetectionResult> {
    let d = pair_distance(&extract_features(a), &extract_features(b));
    let score = model.predict_score(&d.to_row())?;
    Ok(DetectionResult::new(
        format!("{}+{}", a.session_id, b.session_id),
        DetectorKind::BiometricPair,
        score,
        threshold,
    ))
}

/// Writing mode label for copy-typing training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WritingLabel {
    Draft,
    Transcribe,
}

impl std::str::FromStr for WritingLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "draft" => Ok(WritingLabel::Draft),
            "transcribe" => Ok(WritingLabel::Transcribe),
            other => Err(Error::InvalidInput(format!(
                "unknown writing label {other:?} (expected draft|transcribe)"
            ))),
        }
    }
}

impl std::fmt::Display for WritingLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WritingLabel::Draft => write!(f, "draft"),
            WritingLabel::Transcribe => write!(f, "transcribe"),
        }
    }
}

/// Fit the copy-typing detector on labeled sessions (positive = transcribe).
pub fn fit_copy_typing_detector(
    sessions: &[(Session, WritingLabel)],
    config: &TrainConfig,
) -> Result<GbmModel> {
    let rows: Vec<Vec<Option<f64>>> = sessions
        .iter()
        .map(|(s, _)| extract_features(s).to_row())
        .collect();
    let labels: Vec<u8> = sessions
        .iter()
        .map(|(_, l)| u8::from(*l == WritingLabel::Transcribe))
        .collect();
    fit_gbm(&rows, &labels, &feature_name_strings(), config)
}

/// Score one session's suspicion of being copy-typed.
pub fn score_session(
    model: &GbmModel,
    session: &Session,
    threshold: Option<f64>,
) -> Result<DetectionResult> {
    let fv = extract_features(session);
    let score = model.predict_score(&fv.to_row())?;
    Ok(DetectionResult::new(
        session.session_id.clone(),
        DetectorKind::CopyTyping,
        score,
        threshold,
    ))
}
