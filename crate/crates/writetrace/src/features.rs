//! Keystroke classification and writing-process feature extraction.
//!
//! Events are classified by their linguistic/editing context (word-initial,
//! in-word, inter-word space, initial/repeated backspace) and aggregated into
//! a fixed catalog of per-session features:
//!
//! | feature | definition |
//! |---|---|
//! | `inword_logIKI_median` | median log inter-key interval of in-word keystrokes |
//! | `inword_logIKI_mean` | mean log IKI of in-word keystrokes |
//! | `wordinitial_logIKI_median` | median log IKI of word-initial keystrokes |
//! | `append_interword_interval_logIKIs_mean` | mean log IKI of keystrokes adding whitespace between words |
//! | `wordinitial_logIKI_mean` | mean log IKI of word-initial keystrokes |
//! | `append_interword_interval_logIKIs_median` | median log IKI of inter-word whitespace keystrokes |
//! | `append_interword_interval_speed_median` | median speed (chars/sec) of inter-word whitespace keystrokes |
//! | `wordinitial_char_per_sec_median` | median speed (chars/sec) of word-initial keystrokes |
//! | `iki400_AppendBurst_len_mean` | mean length (chars) of append bursts, 400 ms pause threshold |
//! | `iki400_AllActionBurst_len_mean` | mean length (chars) of all-action bursts, 400 ms threshold |
//! | `initial_backspace_char_per_sec_median` | median speed of the first backspace in a run |
//! | `iki200_AppendBurst_len_mean` | mean length (chars) of append bursts, 200 ms threshold |
//! | `initial_backspace_logIKI_median` | median log IKI of initial backspaces |
//!
//! plus auxiliary counts (`n_events`, `n_backspaces`, `n_pastes`,
//! `n_jump_edits`, `initial_pause_ms`, `total_time_ms`).
//!
//! Log IKIs are natural logs of milliseconds; IKIs are floored at 1 ms.
//! Features whose context never occurs in a session (e.g. no backspaces) are
//! explicitly missing, never zero. Word characters are Unicode alphanumerics.

use std::io::Write;

use crate::error::{Error, Result};
use crate::event_log::{EventKind, Session};

/// Catalog feature names followed by auxiliary count names. Column order of
/// the feature table.
pub const FEATURE_NAMES: [&str; 19] = [
    "inword_logIKI_median",
    "inword_logIKI_mean",
    "wordinitial_logIKI_median",
    "append_interword_interval_logIKIs_mean",
    "wordinitial_logIKI_mean",
    "append_interword_interval_logIKIs_median",
    "append_interword_interval_speed_median",
    "wordinitial_char_per_sec_median",
    "iki400_AppendBurst_len_mean",
    "iki400_AllActionBurst_len_mean",
    "initial_backspace_char_per_sec_median",
    "iki200_AppendBurst_len_mean",
    "initial_backspace_logIKI_median",
    "n_events",
    "n_backspaces",
    "n_pastes",
    "n_jump_edits",
    "initial_pause_ms",
    "total_time_ms",
];

/// Number of catalog (non-auxiliary) features at the front of [`FEATURE_NAMES`].
pub const CATALOG_LEN: usize = 13;

/// Linguistic/editing context of one event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    /// Word character appended at the document end after whitespace (or on
    /// an empty document).
    WordInitial,
    /// Word character appended after another word character.
    InWord,
    /// Whitespace appended right after a word character.
    InterwordSpace,
    /// First backspace in a run of backspaces.
    InitialBackspace,
    /// Backspace directly preceded by another backspace.
    RepeatBackspace,
    /// Everything else: pastes, cuts, jumps, mid-document inserts,
    /// punctuation, repeated whitespace.
    Other,
}

/// One event with its context and inter-key interval.
///
/// `iki_ms` is the time since the previous event, floored to 1 ms; the
/// session's first event has none.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnotatedEvent {
    pub index: usize,
    pub context: Context,
    pub iki_ms: Option<u64>,
}

/// Burst segmentation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurstMode {
    /// Only single-character inserts appending at the document end qualify;
    /// any other event breaks the run.
    AppendOnly,
    /// Every event qualifies; runs end only on pauses.
    AllAction,
}

/// A maximal run of events with no internal pause above `threshold_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Burst {
    pub start_index: usize,
    pub end_index: usize,
    /// Characters in the burst: one per keystroke action, except pastes,
    /// which count their payload length.
    pub length_chars: usize,
    pub mode: BurstMode,
    pub threshold_ms: u64,
}

/// Named per-session feature values; `None` marks a missing context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    values: [Option<f64>; FEATURE_NAMES.len()],
}

impl FeatureVector {
    pub fn from_values(values: [Option<f64>; FEATURE_NAMES.len()]) -> Self {
        Self { values }
    }

    /// Value by catalog name; `None` either for unknown names or missing values.
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .and_then(|i| self.values[i])
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn to_row(&self) -> Vec<Option<f64>> {
        self.values.to_vec()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Classify every event of a validated session by context and IKI.
pub fn classify_keystrokes(session: &Session) -> Vec<AnnotatedEvent> {
    let mut annotated = Vec::with_capacity(session.events.len());
    let mut doc: Vec<char> = Vec::new();
    let mut prev_t: Option<u64> = None;
    let mut prev_kind: Option<EventKind> = None;

    for (i, e) in session.events.iter().enumerate() {
        let iki_ms = prev_t.map(|pt| (e.t_ms.saturating_sub(pt)).max(1));
        let context = match e.kind {
            EventKind::Insert if e.pos == doc.len() => {
                let ch = e.payload.chars().next();
                let prev_ch = doc.last().copied();
                match ch {
                    Some(c) if is_word_char(c) => match prev_ch {
                        None => Context::WordInitial,
                        Some(p) if p.is_whitespace() => Context::WordInitial,
                        Some(p) if is_word_char(p) => Context::InWord,
                        Some(_) => Context::Other,
                    },
                    Some(c) if c.is_whitespace() => match prev_ch {
                        Some(p) if is_word_char(p) => Context::InterwordSpace,
                        _ => Context::Other,
                    },
                    _ => Context::Other,
                }
            }
            EventKind::Backspace => {
                if prev_kind == Some(EventKind::Backspace) {
                    Context::RepeatBackspace
                } else {
                    Context::InitialBackspace
                }
            }
            _ => Context::Other,
        };
        annotated.push(AnnotatedEvent {
            index: i,
            context,
            iki_ms,
        });

        apply_event(&mut doc, e);
        prev_t = Some(e.t_ms);
        prev_kind = Some(e.kind);
    }
    annotated
}

/// Advance the tracked document, skipping events whose positions are out of
/// range (mirrors how validation skips violating events, so force-included
/// invalid sessions still get well-defined features).
fn apply_event(doc: &mut Vec<char>, e: &crate::event_log::KeystrokeEvent) {
    match e.kind {
        EventKind::Insert | EventKind::JumpInsert | EventKind::Paste => {
            if e.pos <= doc.len() {
                for (k, ch) in e.payload.chars().enumerate() {
                    doc.insert(e.pos + k, ch);
                }
            }
        }
        EventKind::Backspace => {
            if e.pos >= 1 && e.pos <= doc.len() {
                doc.remove(e.pos - 1);
            }
        }
        EventKind::Cut => {
            if e.pos + e.cut_len <= doc.len() {
                doc.drain(e.pos..e.pos + e.cut_len);
            }
        }
    }
}

/// Document length after an event, with the same skip-on-violation rule as
/// [`apply_event`].
fn advance_len(len: usize, e: &crate::event_log::KeystrokeEvent) -> usize {
    match e.kind {
        EventKind::Insert | EventKind::JumpInsert | EventKind::Paste => {
            if e.pos <= len {
                len + e.payload.chars().count()
            } else {
                len
            }
        }
        EventKind::Backspace => {
            if e.pos >= 1 && e.pos <= len {
                len - 1
            } else {
                len
            }
        }
        EventKind::Cut => {
            if e.pos + e.cut_len <= len {
                len - e.cut_len
            } else {
                len
            }
        }
    }
}

fn burst_char_len(kind: EventKind, payload: &str) -> usize {
    match kind {
        EventKind::Paste => payload.chars().count(),
        _ => 1,
    }
}

/// Segment a validated session into maximal bursts.
///
/// A qualifying event joins the current burst when its IKI is at most
/// `threshold_ms`; a longer pause, or (in [`BurstMode::AppendOnly`]) any
/// non-qualifying event, closes the burst. Singleton bursts count with
/// length 1.
pub fn detect_bursts(session: &Session, threshold_ms: u64, mode: BurstMode) -> Vec<Burst> {
    let mut bursts = Vec::new();
    let mut doc_len = 0usize;
    let mut prev_t: Option<u64> = None;
    let mut current: Option<(usize, usize, usize)> = None; // (start, end, chars)

    for (i, e) in session.events.iter().enumerate() {
        let qualifies = match mode {
            BurstMode::AllAction => true,
            BurstMode::AppendOnly => e.kind == EventKind::Insert && e.pos == doc_len,
        };
        let iki = prev_t.map(|pt| (e.t_ms.saturating_sub(pt)).max(1));

        if qualifies {
            let chars = burst_char_len(e.kind, &e.payload);
            match (&mut current, iki) {
                (Some((_, end, total)), Some(gap)) if gap <= threshold_ms => {
                    *end = i;
                    *total += chars;
                }
                _ => {
                    if let Some((start, end, total)) = current.take() {
                        bursts.push(Burst {
                            start_index: start,
                            end_index: end,
                            length_chars: total,
                            mode,
                            threshold_ms,
                        });
                    }
                    current = Some((i, i, chars));
                }
            }
        } else if let Some((start, end, total)) = current.take() {
            bursts.push(Burst {
                start_index: start,
                end_index: end,
                length_chars: total,
                mode,
                threshold_ms,
            });
        }

        doc_len = advance_len(doc_len, e);
        prev_t = Some(e.t_ms);
    }
    if let Some((start, end, total)) = current {
        bursts.push(Burst {
            start_index: start,
            end_index: end,
            length_chars: total,
            mode,
            threshold_ms,
        });
    }
    bursts
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        Some(sorted[n / 2])
    } else {
        Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0)
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Compute the full feature catalog for a validated session.
pub fn extract_features(session: &Session) -> FeatureVector {
    let annotated = classify_keystrokes(session);

    let ikis_for = |ctx: Context| -> Vec<f64> {
        annotated
            .iter()
            .filter(|a| a.context == ctx)
            .filter_map(|a| a.iki_ms)
            .map(|iki| iki as f64)
            .collect()
    };
    let logs = |ikis: &[f64]| -> Vec<f64> { ikis.iter().map(|x| x.ln()).collect() };
    let speeds = |ikis: &[f64]| -> Vec<f64> { ikis.iter().map(|x| 1000.0 / x).collect() };

    let inword = ikis_for(Context::InWord);
    let wordinitial = ikis_for(Context::WordInitial);
    let interword = ikis_for(Context::InterwordSpace);
    let initial_bs = ikis_for(Context::InitialBackspace);

    let burst_mean = |threshold: u64, mode: BurstMode| -> Option<f64> {
        let lens: Vec<f64> = detect_bursts(session, threshold, mode)
            .iter()
            .map(|b| b.length_chars as f64)
            .collect();
        mean(&lens)
    };

    let n_backspaces = session
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Backspace)
        .count();
    let n_pastes = session
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Paste)
        .count();
    // Jump edits: explicit JumpInsert events plus plain inserts that landed
    // away from the document end.
    let mut n_jump_edits = 0usize;
    let mut doc_len = 0usize;
    for e in &session.events {
        if e.kind == EventKind::JumpInsert || (e.kind == EventKind::Insert && e.pos != doc_len) {
            n_jump_edits += 1;
        }
        doc_len = advance_len(doc_len, e);
    }

    let values: [Option<f64>; FEATURE_NAMES.len()] = [
        median(&logs(&inword)),
        mean(&logs(&inword)),
        median(&logs(&wordinitial)),
        mean(&logs(&interword)),
        mean(&logs(&wordinitial)),
        median(&logs(&interword)),
        median(&speeds(&interword)),
        median(&speeds(&wordinitial)),
        burst_mean(400, BurstMode::AppendOnly),
        burst_mean(400, BurstMode::AllAction),
        median(&speeds(&initial_bs)),
        burst_mean(200, BurstMode::AppendOnly),
        median(&logs(&initial_bs)),
        Some(session.events.len() as f64),
        Some(n_backspaces as f64),
        Some(n_pastes as f64),
        Some(n_jump_edits as f64),
        session.events.first().map(|e| e.t_ms as f64),
        session.events.last().map(|e| e.t_ms as f64),
    ];
    FeatureVector::from_values(values)
}

/// Per-feature absolute difference |a − b|; missing on either side stays
/// missing. This is the distance vector fed to the pair verifier.
pub fn pair_distance(a: &FeatureVector, b: &FeatureVector) -> FeatureVector {
    let mut values = [None; FEATURE_NAMES.len()];
    for (i, v) in values.iter_mut().enumerate() {
        *v = match (a.values[i], b.values[i]) {
            (Some(x), Some(y)) => Some((x - y).abs()),
            _ => None,
        };
    }
    FeatureVector::from_values(values)
}

/// Scalar Euclidean norm over features present on both sides; `None` when no
/// feature is shared. Alternative to the per-feature distance vector.
pub fn pair_distance_norm(a: &FeatureVector, b: &FeatureVector) -> Option<f64> {
    let mut sum = 0.0;
    let mut any = false;
    for i in 0..FEATURE_NAMES.len() {
        if let (Some(x), Some(y)) = (a.values[i], b.values[i]) {
            sum += (x - y) * (x - y);
            any = true;
        }
    }
    any.then(|| sum.sqrt())
}

/// Write the feature table: `session_id,writer_id` then the catalog columns;
/// missing values serialize as empty fields.
pub fn write_features_csv(rows: &[(String, String, FeatureVector)], w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["session_id", "writer_id"];
    header.extend(FEATURE_NAMES);
    wtr.write_record(&header)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    for (session_id, writer_id, fv) in rows {
        let mut rec = vec![session_id.clone(), writer_id.clone()];
        for v in fv.values() {
            rec.push(match v {
                Some(x) => format!("{x}"),
                None => String::new(),
            });
        }
        wtr.write_record(&rec)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Read a feature table written by [`write_features_csv`].
pub fn read_features_csv(r: impl std::io::Read) -> Result<Vec<(String, String, FeatureVector)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .clone();
    let expected: Vec<&str> = ["session_id", "writer_id"]
        .into_iter()
        .chain(FEATURE_NAMES)
        .collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::SchemaMismatch(
            "feature table header does not match the catalog".into(),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: i + 2,
            msg: e.to_string(),
        })?;
        let mut values = [None; FEATURE_NAMES.len()];
        for (j, v) in values.iter_mut().enumerate() {
            let field = rec.get(j + 2).unwrap_or("");
            if !field.is_empty() {
                *v = Some(field.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 2,
                    msg: format!("bad float {field:?}: {e}"),
                })?);
            }
        }
        out.push((
            rec.get(0).unwrap_or("").to_string(),
            rec.get(1).unwrap_or("").to_string(),
            FeatureVector::from_values(values),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::KeystrokeEvent;

    fn ev(t_ms: u64, kind: EventKind, payload: &str, pos: usize) -> KeystrokeEvent {
        KeystrokeEvent {
            t_ms,
            kind,
            payload: payload.to_string(),
            pos,
            cut_len: 0,
        }
    }

    fn session(events: Vec<KeystrokeEvent>) -> Session {
        Session {
            session_id: "s1".into(),
            writer_id: "w1".into(),
            task_id: "t1".into(),
            events,
        }
    }

    /// Appends typed end-to-end at the given timestamps.
    fn typed(text: &str, times: &[u64]) -> Session {
        assert_eq!(text.chars().count(), times.len());
        let events = text
            .chars()
            .zip(times)
            .enumerate()
            .map(|(i, (c, &t))| ev(t, EventKind::Insert, &c.to_string(), i))
            .collect();
        session(events)
    }

    #[test]
    fn classifies_hand_example() {
        // "h"(0) "i"(150) " "(400) "t"(600)
        let s = typed("hi t", &[0, 150, 400, 600]);
        let ann = classify_keystrokes(&s);
        let contexts: Vec<Context> = ann.iter().map(|a| a.context).collect();
        assert_eq!(
            contexts,
            vec![
                Context::WordInitial,
                Context::InWord,
                Context::InterwordSpace,
                Context::WordInitial
            ]
        );
        let ikis: Vec<Option<u64>> = ann.iter().map(|a| a.iki_ms).collect();
        assert_eq!(ikis, vec![None, Some(150), Some(250), Some(200)]);
    }

    #[test]
    fn classifies_backspace_runs() {
        let s = session(vec![
            ev(0, EventKind::Insert, "a", 0),
            ev(100, EventKind::Backspace, "", 1),
        ]);
        let ann = classify_keystrokes(&s);
        assert_eq!(ann[1].context, Context::InitialBackspace);

        let s = session(vec![
            ev(0, EventKind::Insert, "a", 0),
            ev(50, EventKind::Insert, "b", 1),
            ev(100, EventKind::Backspace, "", 2),
            ev(150, EventKind::Backspace, "", 1),
        ]);
        let ann = classify_keystrokes(&s);
        assert_eq!(ann[2].context, Context::InitialBackspace);
        assert_eq!(ann[3].context, Context::RepeatBackspace);
    }

    #[test]
    fn iki_of_zero_is_floored_to_one() {
        let s = typed("ab", &[10, 10]);
        let ann = classify_keystrokes(&s);
        assert_eq!(ann[1].iki_ms, Some(1));
    }

    #[test]
    fn bursts_hand_segmentation() {
        // Appends at t = 0,100,200,700,800; threshold 400; AppendOnly.
        let s = typed("abcde", &[0, 100, 200, 700, 800]);
        let bursts = detect_bursts(&s, 400, BurstMode::AppendOnly);
        let lens: Vec<usize> = bursts.iter().map(|b| b.length_chars).collect();
        assert_eq!(lens, vec![3, 2]);
        let m = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
        assert!((m - 2.5).abs() < 1e-12);
    }

    #[test]
    fn single_event_is_a_singleton_burst() {
        let s = typed("a", &[0]);
        let bursts = detect_bursts(&s, 400, BurstMode::AppendOnly);
        assert_eq!(bursts.len(), 1);
        assert_eq!(bursts[0].length_chars, 1);
    }

    #[test]
    fn gap_above_threshold_splits_bursts() {
        let s = typed("ab", &[0, 500]);
        let bursts = detect_bursts(&s, 400, BurstMode::AppendOnly);
        let lens: Vec<usize> = bursts.iter().map(|b| b.length_chars).collect();
        assert_eq!(lens, vec![1, 1]);
    }

    #[test]
    fn paste_breaks_append_bursts_but_counts_in_all_action() {
        let s = session(vec![
            ev(0, EventKind::Insert, "a", 0),
            ev(100, EventKind::Insert, "b", 1),
            ev(200, EventKind::Paste, "xyz", 2),
            ev(300, EventKind::Insert, "c", 5),
        ]);
        let append = detect_bursts(&s, 400, BurstMode::AppendOnly);
        let lens: Vec<usize> = append.iter().map(|b| b.length_chars).collect();
        assert_eq!(lens, vec![2, 1]);
        let all = detect_bursts(&s, 400, BurstMode::AllAction);
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].length_chars, 1 + 1 + 3 + 1);
    }

    #[test]
    fn shorter_threshold_never_reduces_append_burst_count() {
        let s = typed("abcdefg", &[0, 150, 250, 600, 780, 1400, 1450]);
        let b200 = detect_bursts(&s, 200, BurstMode::AppendOnly);
        let b400 = detect_bursts(&s, 400, BurstMode::AppendOnly);
        assert!(b200.len() >= b400.len());
    }

    #[test]
    fn features_hand_example() {
        let s = typed("hi t", &[0, 150, 400, 600]);
        let fv = extract_features(&s);
        let inword_median = fv.get("inword_logIKI_median").unwrap();
        assert!((inword_median - (150f64).ln()).abs() < 1e-12);
        // Only "t" has a word-initial IKI; "h" is the first event.
        let wi_median = fv.get("wordinitial_logIKI_median").unwrap();
        assert!((wi_median - (200f64).ln()).abs() < 1e-12);
        assert_eq!(fv.get("initial_pause_ms"), Some(0.0));
        assert_eq!(fv.get("total_time_ms"), Some(600.0));
        assert_eq!(fv.get("n_events"), Some(4.0));
    }

    #[test]
    fn no_backspaces_means_missing_backspace_features() {
        let s = typed("hi t", &[0, 150, 400, 600]);
        let fv = extract_features(&s);
        assert_eq!(fv.get("initial_backspace_logIKI_median"), None);
        assert_eq!(fv.get("initial_backspace_char_per_sec_median"), None);
        assert_eq!(fv.get("n_backspaces"), Some(0.0));
    }

    #[test]
    fn uniform_time_shift_changes_only_pause_features() {
        let s1 = typed("hi t", &[0, 150, 400, 600]);
        let s2 = typed("hi t", &[50, 200, 450, 650]);
        let f1 = extract_features(&s1);
        let f2 = extract_features(&s2);
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            match *name {
                "initial_pause_ms" | "total_time_ms" => {
                    assert!(
                        (f2.values()[i].unwrap() - f1.values()[i].unwrap() - 50.0).abs() < 1e-12
                    );
                }
                _ => assert_eq!(f1.values()[i], f2.values()[i], "feature {name}"),
            }
        }
    }

    #[test]
    fn pair_distance_rules() {
        let s = typed("hi t", &[0, 150, 400, 600]);
        let a = extract_features(&s);
        let zero = pair_distance(&a, &a);
        for (i, v) in zero.values().iter().enumerate() {
            match a.values()[i] {
                Some(_) => assert_eq!(*v, Some(0.0)),
                None => assert_eq!(*v, None),
            }
        }
        // A feature missing on one side stays missing in the distance.
        let s_nobs = typed("ab", &[0, 100]);
        let b = extract_features(&s_nobs);
        let d = pair_distance(&a, &b);
        assert_eq!(d.get("initial_backspace_logIKI_median"), None);
        assert!(pair_distance_norm(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn simple_absolute_difference() {
        let mut va = [None; FEATURE_NAMES.len()];
        let mut vb = [None; FEATURE_NAMES.len()];
        va[0] = Some(2.0);
        vb[0] = Some(5.0);
        let d = pair_distance(
            &FeatureVector::from_values(va),
            &FeatureVector::from_values(vb),
        );
        assert_eq!(d.values()[0], Some(3.0));
    }

    #[test]
    fn feature_csv_round_trip() {
        let s = typed("hi t", &[0, 150, 400, 600]);
        let fv = extract_features(&s);
        let rows = vec![("s1".to_string(), "w1".to_string(), fv)];
        let mut buf = Vec::new();
        write_features_csv(&rows, &mut buf).unwrap();
        let parsed = read_features_csv(buf.as_slice()).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].0, "s1");
        assert_eq!(parsed[0].2, rows[0].2);
    }

    #[test]
    fn mid_document_insert_is_other_and_counts_as_jump() {
        let s = session(vec![
            ev(0, EventKind::Insert, "a", 0),
            ev(100, EventKind::Insert, "b", 1),
            ev(200, EventKind::Insert, "x", 0),
        ]);
        let ann = classify_keystrokes(&s);
        assert_eq!(ann[2].context, Context::Other);
        let fv = extract_features(&s);
        assert_eq!(fv.get("n_jump_edits"), Some(1.0));
    }
}
