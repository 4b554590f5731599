//! Binary-classifier evaluation: confusion matrices, error rates, ROC
//! curves, AUC, and equal error rate.
//!
//! Conventions: higher score means more positive; a decision at threshold
//! `t` is `score >= t`. The ROC sweeps one step per unique score, which
//! makes the trapezoid AUC equal the pair-counting AUC (ties counted half)
//! exactly. The EER is found by linear interpolation between the two curve
//! points bracketing the first crossing of FPR = FNR, since an empirical
//! curve rarely hits the crossing exactly.
//!
//! Reference operating points for established biometrics, for reading EER
//! values in context (documentation constants, not computed values):
//!
//! | biometric | typical EER |
//! |---|---|
//! | fingerprint | ~0.2% ([`REFERENCE_FINGERPRINT_EER`]) |
//! | iris | ~0.01% ([`REFERENCE_IRIS_EER`]) |

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Typical fingerprint equal error rate, as a reference anchor.
pub const REFERENCE_FINGERPRINT_EER: f64 = 0.002;
/// Typical iris equal error rate, as a reference anchor.
pub const REFERENCE_IRIS_EER: f64 = 0.0001;

/// Counts of decision outcomes against actual labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionMatrix {
    /// Actual positives.
    pub fn positives(&self) -> u64 {
        self.true_pos + self.false_neg
    }

    /// Actual negatives.
    pub fn negatives(&self) -> u64 {
        self.false_pos + self.true_neg
    }

    pub fn total(&self) -> u64 {
        self.positives() + self.negatives()
    }
}

/// Error/hit rates; `None` when the denominator class is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
    pub accuracy: f64,
}

/// Count decision outcomes. Sequences must be equal-length and non-empty.
pub fn confusion(labels: &[bool], decisions: &[bool]) -> Result<ConfusionMatrix> {
    if labels.is_empty() || labels.len() != decisions.len() {
        return Err(Error::InvalidInput(format!(
            "labels ({}) and decisions ({}) must be non-empty and equal-length",
            labels.len(),
            decisions.len()
        )));
    }
    let mut m = ConfusionMatrix {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&y, &d) in labels.iter().zip(decisions) {
        match (y, d) {
            (true, true) => m.true_pos += 1,
            (true, false) => m.false_neg += 1,
            (false, true) => m.false_pos += 1,
            (false, false) => m.true_neg += 1,
        }
    }
    Ok(m)
}

/// FPR = FP/N, FNR = FN/P, TPR = 1 - FNR, TNR = 1 - FPR.
pub fn rates(m: &ConfusionMatrix) -> Rates {
    let p = m.positives();
    let n = m.negatives();
    let fpr = (n > 0).then(|| m.false_pos as f64 / n as f64);
    let fnr = (p > 0).then(|| m.false_neg as f64 / p as f64);
    Rates {
        fpr,
        fnr,
        tpr: fnr.map(|v| 1.0 - v),
        tnr: fpr.map(|v| 1.0 - v),
        accuracy: (m.true_pos + m.true_neg) as f64 / m.total() as f64,
    }
}

/// One operating point of the ROC sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve with its summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Points in descending threshold order, from (0,0) to (1,1).
    pub points: Vec<RocPoint>,
    /// Trapezoid area under the curve.
    pub auc: f64,
    /// Interpolated rate at the first crossing of FPR = FNR.
    pub eer: f64,
    /// Threshold at the interpolated crossing.
    pub eer_threshold: f64,
}

/// Sweep thresholds over the unique scores (descending) and build the ROC.
///
/// Both classes must be present and scores finite. Tied scores form a
/// single step. The virtual starting point (0,0) carries an infinite
/// threshold; the final unique score always yields (1,1).
pub fn roc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::InvalidInput(
            "scores and labels must be non-empty and equal-length".into(),
        ));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("scores must be finite".into()));
    }
    let p = labels.iter().filter(|&&y| y).count() as f64;
    let n = labels.len() as f64 - p;
    if p == 0.0 || n == 0.0 {
        return Err(Error::InvalidInput(
            "ROC needs both classes present".into(),
        ));
    }

    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut i = 0;
    while i < pairs.len() {
        let t = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == t {
            if pairs[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: t,
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
        });
    }

    let mut auc = 0.0;
    for w in points.windows(2) {
        auc += (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0;
    }

    let (eer, eer_threshold) = interpolate_eer(&points);
    Ok(RocCurve {
        points,
        auc,
        eer,
        eer_threshold,
    })
}

/// First crossing of FPR = FNR along the curve, linearly interpolated
/// between the bracketing points.
fn interpolate_eer(points: &[RocPoint]) -> (f64, f64) {
    // d = fpr - fnr = fpr + tpr - 1; d starts at -1 and ends at +1.
    let d = |p: &RocPoint| p.fpr + p.tpr - 1.0;
    for i in 1..points.len() {
        let di = d(&points[i]);
        if di >= 0.0 {
            let prev = &points[i - 1];
            let dprev = d(prev);
            if di == 0.0 {
                return (points[i].fpr, points[i].threshold);
            }
            let lambda = dprev / (dprev - di); // dprev < 0 <= di
            let eer = prev.fpr + lambda * (points[i].fpr - prev.fpr);
            let threshold = if prev.threshold.is_finite() {
                prev.threshold + lambda * (points[i].threshold - prev.threshold)
            } else {
                points[i].threshold
            };
            return (eer, threshold);
        }
    }
    (1.0, f64::NEG_INFINITY) // unreachable for well-formed curves
}

/// Brute-force pair-counting AUC: P(score_pos > score_neg) + half the ties.
///
/// Counted in integer arithmetic and divided once at the end; the
/// independent check for the trapezoid AUC.
pub fn auc_oracle(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::InvalidInput(
            "scores and labels must be non-empty and equal-length".into(),
        ));
    }
    let pos: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &y)| y)
        .map(|(&s, _)| s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &y)| !y)
        .map(|(&s, _)| s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InvalidInput(
            "AUC needs both classes present".into(),
        ));
    }
    let mut wins: u64 = 0;
    let mut ties: u64 = 0;
    for &sp in &pos {
        for &sn in &neg {
            if sp > sn {
                wins += 1;
            } else if sp == sn {
                ties += 1;
            }
        }
    }
    let denom = (pos.len() as u64) * (neg.len() as u64);
    Ok((2 * wins + ties) as f64 / (2 * denom) as f64)
}

/// Classifier quality bands by AUC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AucQuality {
    Outstanding,
    ExcellentGood,
    Acceptable,
    Poor,
    Random,
}

impl std::fmt::Display for AucQuality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AucQuality::Outstanding => "outstanding",
            AucQuality::ExcellentGood => "excellent_good",
            AucQuality::Acceptable => "acceptable",
            AucQuality::Poor => "poor",
            AucQuality::Random => "random",
        };
        write!(f, "{s}")
    }
}

/// Band an AUC value: >= 0.9 outstanding, [0.8, 0.9) excellent/good,
/// [0.7, 0.8) acceptable, (0.5, 0.7) poor, <= 0.5 random.
pub fn auc_quality(auc: f64) -> Result<AucQuality> {
    if !(0.0..=1.0).contains(&auc) {
        return Err(Error::InvalidInput(format!("AUC {auc} outside [0, 1]")));
    }
    Ok(if auc >= 0.9 {
        AucQuality::Outstanding
    } else if auc >= 0.8 {
        AucQuality::ExcellentGood
    } else if auc >= 0.7 {
        AucQuality::Acceptable
    } else if auc > 0.5 {
        AucQuality::Poor
    } else {
        AucQuality::Random
    })
}

/// How to pick a decision threshold from a ROC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatingPoint {
    /// Threshold at the interpolated equal-error-rate crossing.
    Eer,
    /// Largest TPR whose FPR does not exceed the given bound.
    FixedFpr(f64),
}

/// Threshold realizing an operating point on the curve.
pub fn operating_threshold(curve: &RocCurve, point: OperatingPoint) -> f64 {
    match point {
        OperatingPoint::Eer => curve.eer_threshold,
        OperatingPoint::FixedFpr(bound) => curve
            .points
            .iter()
            .rev()
            .find(|p| p.fpr <= bound)
            .map(|p| p.threshold)
            .unwrap_or(f64::INFINITY),
    }
}

/// Apply `score >= threshold`.
pub fn apply_threshold(scores: &[f64], threshold: f64) -> Vec<bool> {
    scores.iter().map(|&s| s >= threshold).collect()
}

/// Export the curve as `threshold,fpr,tpr` rows followed by a `#`-prefixed
/// summary record (skipped by comment-aware CSV readers).
pub fn write_roc_csv(curve: &RocCurve, mut w: impl Write) -> Result<()> {
    writeln!(w, "threshold,fpr,tpr")?;
    for p in &curve.points {
        writeln!(w, "{},{},{}", p.threshold, p.fpr, p.tpr)?;
    }
    let quality = auc_quality(curve.auc).map(|q| q.to_string()).unwrap_or_default();
    writeln!(
        w,
        "# summary auc={} eer={} eer_threshold={} auc_quality={}",
        curve.auc, curve.eer, curve.eer_threshold, quality
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn confusion_hand_count() {
        let m = confusion(&[true, true, false, false], &[true, false, true, false]).unwrap();
        assert_eq!(m.true_pos, 1);
        assert_eq!(m.false_neg, 1);
        assert_eq!(m.false_pos, 1);
        assert_eq!(m.true_neg, 1);
        let r = rates(&m);
        assert_eq!(r.fpr, Some(0.5));
        assert_eq!(r.fnr, Some(0.5));
        assert_eq!(r.accuracy, 0.5);
    }

    #[test]
    fn perfect_decisions() {
        let labels = [true, false, true, false];
        let m = confusion(&labels, &labels).unwrap();
        let r = rates(&m);
        assert_eq!(r.fpr, Some(0.0));
        assert_eq!(r.tpr, Some(1.0));
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn empty_denominator_class_gives_missing_rate() {
        let m = confusion(&[true, true], &[true, false]).unwrap();
        let r = rates(&m);
        assert_eq!(r.fpr, None);
        assert_eq!(r.tnr, None);
        assert_eq!(r.fnr, Some(0.5));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(confusion(&[true], &[true, false]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn perfectly_separated_scores() {
        // All 4 positive > negative pairs win.
        let scores = [0.9, 0.8, 0.7, 0.1];
        let labels = [true, true, false, false];
        let curve = roc(&scores, &labels).unwrap();
        assert!((curve.auc - 1.0).abs() < 1e-12);
        assert!(curve.eer.abs() < 1e-12);
        assert_eq!(auc_oracle(&scores, &labels).unwrap(), 1.0);
    }

    #[test]
    fn three_quarters_auc_case() {
        // Pair count: (0.8 beats 0.5), (0.8 beats 0.1), (0.3 beats 0.1) = 3/4.
        let scores = [0.8, 0.3, 0.5, 0.1];
        let labels = [true, true, false, false];
        let curve = roc(&scores, &labels).unwrap();
        assert!((curve.auc - 0.75).abs() < 1e-12);
        assert_eq!(auc_oracle(&scores, &labels).unwrap(), 0.75);
    }

    #[test]
    fn eer_one_third_case() {
        // At thresholds in (0.4, 0.6], fpr = fnr = 1/3.
        let scores = [0.9, 0.6, 0.4, 0.7, 0.3, 0.1];
        let labels = [true, true, true, false, false, false];
        let curve = roc(&scores, &labels).unwrap();
        assert!((curve.eer - 1.0 / 3.0).abs() < 1e-12, "eer = {}", curve.eer);
        assert_eq!(curve.eer_threshold, 0.6);
    }

    #[test]
    fn curve_shape_invariants() {
        let scores = [0.9, 0.6, 0.4, 0.7, 0.3, 0.1];
        let labels = [true, true, true, false, false, false];
        let curve = roc(&scores, &labels).unwrap();
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in curve.points.windows(2) {
            assert!(w[1].threshold < w[0].threshold);
            assert!(w[1].fpr >= w[0].fpr);
            assert!(w[1].tpr >= w[0].tpr);
        }
    }

    #[test]
    fn all_ties_give_half() {
        let scores = [0.5, 0.5, 0.5, 0.5];
        let labels = [true, true, false, false];
        assert_eq!(auc_oracle(&scores, &labels).unwrap(), 0.5);
        let curve = roc(&scores, &labels).unwrap();
        assert!((curve.auc - 0.5).abs() < 1e-12);
    }

    #[test]
    fn label_swap_complements_auc() {
        let scores = [0.8, 0.3, 0.5, 0.1];
        let labels = [true, true, false, false];
        let swapped: Vec<bool> = labels.iter().map(|y| !y).collect();
        let a = auc_oracle(&scores, &labels).unwrap();
        let b = auc_oracle(&scores, &swapped).unwrap();
        assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirrored_problem_keeps_eer() {
        // Swapping labels AND negating scores yields the mirror classifier
        // with the same error geometry.
        let scores = [0.9, 0.6, 0.4, 0.7, 0.3, 0.1];
        let labels = [true, true, true, false, false, false];
        let eer = roc(&scores, &labels).unwrap().eer;
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let swapped: Vec<bool> = labels.iter().map(|y| !y).collect();
        let mirrored = roc(&neg, &swapped).unwrap().eer;
        assert!((eer - mirrored).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_matches_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let n = rng.gen_range(2..=50);
            // Quantized scores inject plenty of ties.
            let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..10) as f64 / 10.0).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            labels[0] = true;
            labels[1] = false;
            let curve = roc(&scores, &labels).unwrap();
            let oracle = auc_oracle(&scores, &labels).unwrap();
            assert!(
                (curve.auc - oracle).abs() < 1e-9,
                "trapezoid {} vs oracle {}",
                curve.auc,
                oracle
            );
        }
    }

    #[test]
    fn roc_invariant_under_monotone_transform() {
        let scores = [0.8, 0.3, 0.5, 0.1, 0.45, 0.72];
        let labels = [true, true, false, false, true, false];
        let a = roc(&scores, &labels).unwrap();
        let transformed: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
        let b = roc(&transformed, &labels).unwrap();
        assert!((a.auc - b.auc).abs() < 1e-12);
        assert!((a.eer - b.eer).abs() < 1e-12);
    }

    #[test]
    fn eer_below_half_when_auc_above_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(4..=40);
            let mut scores = Vec::with_capacity(n);
            let mut labels = Vec::with_capacity(n);
            for i in 0..n {
                let y = i % 2 == 0;
                // Positives shifted upward: auc > 0.5 on average.
                let s = rng.gen::<f64>() + if y { 0.5 } else { 0.0 };
                scores.push(s);
                labels.push(y);
            }
            let curve = roc(&scores, &labels).unwrap();
            if curve.auc >= 0.5 {
                assert!(curve.eer <= 0.5 + 1e-12, "eer = {}", curve.eer);
            }
        }
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(roc(&[0.1, 0.2], &[true, true]).is_err());
        assert!(auc_oracle(&[0.1, 0.2], &[false, false]).is_err());
    }

    #[test]
    fn quality_bands() {
        assert_eq!(auc_quality(0.95).unwrap(), AucQuality::Outstanding);
        assert_eq!(auc_quality(0.85).unwrap(), AucQuality::ExcellentGood);
        assert_eq!(auc_quality(0.75).unwrap(), AucQuality::Acceptable);
        assert_eq!(auc_quality(0.6).unwrap(), AucQuality::Poor);
        assert_eq!(auc_quality(0.5).unwrap(), AucQuality::Random);
        assert_eq!(auc_quality(0.3).unwrap(), AucQuality::Random);
        assert!(auc_quality(1.2).is_err());
        assert!(auc_quality(-0.1).is_err());
    }

    #[test]
    fn operating_points() {
        let scores = [0.9, 0.6, 0.4, 0.7, 0.3, 0.1];
        let labels = [true, true, true, false, false, false];
        let curve = roc(&scores, &labels).unwrap();
        let t = operating_threshold(&curve, OperatingPoint::Eer);
        assert_eq!(t, curve.eer_threshold);
        // fpr <= 0 keeps only the virtual start and the fpr=0 steps.
        let t0 = operating_threshold(&curve, OperatingPoint::FixedFpr(0.0));
        let decisions = apply_threshold(&scores, t0);
        let m = confusion(&labels, &decisions).unwrap();
        assert_eq!(m.false_pos, 0);
    }

    #[test]
    fn roc_csv_has_points_and_summary() {
        let scores = [0.8, 0.3, 0.5, 0.1];
        let labels = [true, true, false, false];
        let curve = roc(&scores, &labels).unwrap();
        let mut buf = Vec::new();
        write_roc_csv(&curve, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("threshold,fpr,tpr\n"));
        assert!(text.contains("# summary auc=0.75"));
        assert!(text.contains("auc_quality=acceptable"));
    }
}
