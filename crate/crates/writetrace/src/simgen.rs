//! Seeded synthetic-data generation: writer typing profiles, drafting and
//! transcription sessions, repeater datasets, and essay corpora.
//!
//! Everything here is a pure function of its parameters and a seed; repeated
//! calls are bit-identical. Generated sessions always pass
//! [`Session::validate`] and replay to exactly the requested text.
//!
//! The population and mode constants live in [`SimConfig`]; they are
//! calibration values chosen to give plausible magnitudes, not measurements,
//! and can be overridden from a TOML file.
//!
//! The bundled text ([`bundled_corpus`]) is an original prose corpus shipped
//! with the crate so that tests and examples need no downloads. It serves as
//! the human-proxy essay pool and as language-model training material;
//! [`seed_corpus_split`] keeps those two uses disjoint.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::detect::WritingLabel;
use crate::error::{Error, Result};
use crate::event_log::{EventKind, KeystrokeEvent, Session};
use crate::lm::NGramModel;

/// Population and mode constants for the generator. Serialized as TOML so a
/// run's constants can be inspected and overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Person-level mean of log-IKI (log-ms): Normal(mean, sd) across writers.
    pub mu_log_iki_mean: f64,
    pub mu_log_iki_sd: f64,
    /// Within-person log-IKI spread: |Normal(mean, sd)|.
    pub sigma_log_iki_mean: f64,
    pub sigma_log_iki_sd: f64,
    /// Additive log-ms slowdown at word starts: |Normal(mean, sd)|.
    pub wordinitial_slowdown_mean: f64,
    pub wordinitial_slowdown_sd: f64,
    /// Per-character typo probability: Uniform(min, max) across writers.
    pub backspace_rate_min: f64,
    pub backspace_rate_max: f64,
    /// Per-keystroke long-pause probability: Uniform(min, max).
    pub pause_rate_min: f64,
    pub pause_rate_max: f64,
    /// Mean of the exponential pause added on a long pause: Uniform(min, max).
    pub pause_scale_ms_min: f64,
    pub pause_scale_ms_max: f64,
    /// Transcription starts almost immediately.
    pub transcribe_initial_pause_ms_min: f64,
    pub transcribe_initial_pause_ms_max: f64,
    /// Drafting starts after a long planning pause.
    pub draft_initial_pause_ms_min: f64,
    pub draft_initial_pause_ms_max: f64,
    /// Transcription scales down corrections and pauses.
    pub transcribe_backspace_factor: f64,
    pub transcribe_pause_factor: f64,
    /// Drafting revisits earlier positions this many times.
    pub draft_jump_episodes_min: u32,
    pub draft_jump_episodes_max: u32,
    /// Share of typos typed two characters deep before correction.
    pub double_typo_rate: f64,
    /// Character perturbation rate for the human-proxy corpus.
    pub perturbation_rate: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mu_log_iki_mean: 5.0,
            mu_log_iki_sd: 0.3,
            sigma_log_iki_mean: 0.3,
            sigma_log_iki_sd: 0.1,
            wordinitial_slowdown_mean: 0.4,
            wordinitial_slowdown_sd: 0.15,
            backspace_rate_min: 0.02,
            backspace_rate_max: 0.12,
            pause_rate_min: 0.01,
            pause_rate_max: 0.06,
            pause_scale_ms_min: 1000.0,
            pause_scale_ms_max: 4000.0,
            transcribe_initial_pause_ms_min: 200.0,
            transcribe_initial_pause_ms_max: 1500.0,
            draft_initial_pause_ms_min: 5000.0,
            draft_initial_pause_ms_max: 60000.0,
            transcribe_backspace_factor: 0.2,
            transcribe_pause_factor: 0.2,
            draft_jump_episodes_min: 1,
            draft_jump_episodes_max: 5,
            double_typo_rate: 0.25,
            perturbation_rate: 0.01,
        }
    }
}

impl SimConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("bad generator config: {e}")))
    }
}

/// One writer's stable typing parameters. Two sessions drawn from the same
/// profile share these exactly; within-person stability is by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WriterProfile {
    pub writer_id: String,
    pub mu_log_iki: f64,
    pub sigma_log_iki: f64,
    pub wordinitial_slowdown: f64,
    pub backspace_rate: f64,
    pub pause_rate: f64,
    pub pause_scale_ms: f64,
    pub seed: u64,
}

/// Session generation mode.
pub type SessionMode = WritingLabel;

/// Everything needed to generate one session.
#[derive(Debug, Clone)]
pub struct SessionSpec<'a> {
    pub mode: SessionMode,
    pub text: &'a str,
    pub profile: &'a WriterProfile,
    pub seed: u64,
}

/// Mix a base seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw one writer profile from the population distributions.
pub fn gen_writer_profile(seed: u64, config: &SimConfig) -> WriterProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng, mean: f64, sd: f64| -> f64 {
        Normal::new(mean, sd).expect("valid normal").sample(rng)
    };
    WriterProfile {
        writer_id: format!("w{seed:016x}"),
        mu_log_iki: normal(&mut rng, config.mu_log_iki_mean, config.mu_log_iki_sd),
        sigma_log_iki: normal(&mut rng, config.sigma_log_iki_mean, config.sigma_log_iki_sd).abs(),
        wordinitial_slowdown: normal(
            &mut rng,
            config.wordinitial_slowdown_mean,
            config.wordinitial_slowdown_sd,
        )
        .abs(),
        backspace_rate: rng.gen_range(config.backspace_rate_min..config.backspace_rate_max),
        pause_rate: rng.gen_range(config.pause_rate_min..config.pause_rate_max),
        pause_scale_ms: rng.gen_range(config.pause_scale_ms_min..config.pause_scale_ms_max),
        seed,
    }
}

struct SessionBuilder<'a> {
    rng: ChaCha8Rng,
    profile: &'a WriterProfile,
    pause_rate: f64,
    events: Vec<KeystrokeEvent>,
    t: u64,
    len: usize,
    next_is_jump: bool,
}

impl<'a> SessionBuilder<'a> {
    fn iki(&mut self, word_initial: bool) -> u64 {
        let mu = self.profile.mu_log_iki
            + if word_initial {
                self.profile.wordinitial_slowdown
            } else {
                0.0
            };
        let normal = Normal::new(mu, self.profile.sigma_log_iki).expect("valid normal");
        let mut ms = normal.sample(&mut self.rng).exp();
        if self.rng.gen::<f64>() < self.pause_rate {
            let pause: f64 = Exp1.sample(&mut self.rng);
            ms += pause * self.profile.pause_scale_ms;
        }
        (ms.round() as u64).max(1)
    }

    fn push(&mut self, kind: EventKind, payload: String, pos: usize) {
        self.events.push(KeystrokeEvent {
            t_ms: self.t,
            kind,
            payload,
            pos,
            cut_len: 0,
        });
    }

    /// Append one character at the document end.
    fn type_char(&mut self, c: char, word_initial: bool) {
        self.t += self.iki(word_initial);
        let kind = if self.next_is_jump {
            self.next_is_jump = false;
            EventKind::JumpInsert
        } else {
            EventKind::Insert
        };
        self.push(kind, c.to_string(), self.len);
        self.len += 1;
    }

    /// Delete the last character.
    fn backspace(&mut self) {
        self.t += self.iki(false);
        self.push(EventKind::Backspace, String::new(), self.len);
        self.len -= 1;
    }

    /// Revisit an earlier position: insert a stray character there and
    /// remove it again, leaving the document unchanged and the caret away
    /// from the end.
    fn jump_episode(&mut self) {
        if self.len == 0 {
            return;
        }
        let pos = self.rng.gen_range(0..self.len);
        let c = self.random_letter();
        self.t += self.iki(false) + self.profile.pause_scale_ms.round() as u64;
        self.push(EventKind::JumpInsert, c.to_string(), pos);
        self.len += 1;
        self.t += self.iki(false);
        self.push(EventKind::Backspace, String::new(), pos + 1);
        self.len -= 1;
        self.next_is_jump = true; // the return to the end is itself a jump
    }

    fn random_letter(&mut self) -> char {
        (b'a' + self.rng.gen_range(0..26u8)) as char
    }
}

/// Generate one session whose replay reproduces `spec.text` exactly.
///
/// Typos are injected and corrected at the writer's backspace rate; Draft
/// mode adds a long initial pause and mid-session jump edits, Transcribe
/// mode starts quickly and corrects little.
pub fn gen_session(spec: &SessionSpec, config: &SimConfig) -> Result<Session> {
    if spec.text.is_empty() {
        return Err(Error::InvalidInput(
            "cannot generate an empty session".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (bs_factor, pause_factor, pause_range, n_jumps) = match spec.mode {
        SessionMode::Transcribe => (
            config.transcribe_backspace_factor,
            config.transcribe_pause_factor,
            config.transcribe_initial_pause_ms_min..config.transcribe_initial_pause_ms_max,
            0u32,
        ),
        SessionMode::Draft => (
            1.0,
            1.0,
            config.draft_initial_pause_ms_min..config.draft_initial_pause_ms_max,
            rng.gen_range(config.draft_jump_episodes_min..=config.draft_jump_episodes_max),
        ),
    };
    let initial_pause = rng.gen_range(pause_range).round() as u64;
    let chars: Vec<char> = spec.text.chars().collect();

    // Character indices at which a jump episode fires (before typing them).
    let mut jump_at: Vec<usize> = (0..n_jumps)
        .map(|_| rng.gen_range(1..chars.len().max(2)))
        .collect();
    jump_at.sort_unstable();
    jump_at.dedup();

    let typo_rate = spec.profile.backspace_rate * bs_factor;
    let mut b = SessionBuilder {
        rng,
        profile: spec.profile,
        pause_rate: spec.profile.pause_rate * pause_factor,
        events: Vec::with_capacity(chars.len() * 2),
        t: initial_pause,
        len: 0,
        next_is_jump: false,
    };

    for (ci, &c) in chars.iter().enumerate() {
        if jump_at.binary_search(&ci).is_ok() {
            b.jump_episode();
        }
        let word_initial = c.is_alphanumeric() && (ci == 0 || chars[ci - 1].is_whitespace());
        if b.rng.gen::<f64>() < typo_rate {
            let depth = if b.rng.gen::<f64>() < config.double_typo_rate {
                2
            } else {
                1
            };
            for _ in 0..depth {
                let wrong = b.random_letter();
                b.type_char(wrong, word_initial);
            }
            for _ in 0..depth {
                b.backspace();
            }
        }
        b.type_char(c, word_initial);
    }

    // First event should carry exactly the initial pause: the builder adds
    // an IKI before the first keystroke, so shift everything back.
    let shift = b.events.first().map(|e| e.t_ms - initial_pause).unwrap_or(0);
    for e in &mut b.events {
        e.t_ms -= shift;
    }

    Ok(Session {
        session_id: format!("s{:016x}", spec.seed),
        writer_id: spec.profile.writer_id.clone(),
        task_id: format!("{}", spec.mode),
        events: b.events,
    })
}

/// Generate `n_writers` profiles with `sessions_per_writer` Draft sessions
/// each, every writer typing distinct texts from the pool.
pub fn gen_repeater_dataset(
    n_writers: usize,
    sessions_per_writer: usize,
    text_pool: &[String],
    seed: u64,
    config: &SimConfig,
) -> Result<Vec<Session>> {
    if n_writers < 2 || sessions_per_writer < 2 {
        return Err(Error::InvalidInput(
            "repeater dataset needs >= 2 writers and >= 2 sessions per writer".into(),
        ));
    }
    if text_pool.len() < sessions_per_writer {
        return Err(Error::InvalidInput(format!(
            "text pool has {} texts but each writer needs {sessions_per_writer} distinct texts",
            text_pool.len()
        )));
    }
    let mut sessions = Vec::with_capacity(n_writers * sessions_per_writer);
    for w in 0..n_writers {
        let profile = gen_writer_profile(derive_seed(seed, w as u64), config);
        for j in 0..sessions_per_writer {
            let text = &text_pool[(w * sessions_per_writer + j) % text_pool.len()];
            let spec = SessionSpec {
                mode: SessionMode::Draft,
                text,
                profile: &profile,
                seed: derive_seed(seed, ((w as u64) << 20) | (j as u64) | (1 << 40)),
            };
            let mut s = gen_session(&spec, config)?;
            s.session_id = format!("{}-{}", profile.writer_id, j);
            sessions.push(s);
        }
    }
    Ok(sessions)
}

/// Generate a labeled drafting-vs-transcription dataset, one fresh writer
/// per session.
pub fn gen_copy_task_dataset(
    n_draft: usize,
    n_transcribe: usize,
    text_pool: &[String],
    seed: u64,
    config: &SimConfig,
) -> Result<Vec<(Session, WritingLabel)>> {
    if text_pool.is_empty() {
        return Err(Error::InvalidInput("text pool is empty".into()));
    }
    let mut out = Vec::with_capacity(n_draft + n_transcribe);
    for i in 0..(n_draft + n_transcribe) {
        let mode = if i < n_draft {
            WritingLabel::Draft
        } else {
            WritingLabel::Transcribe
        };
        let profile = gen_writer_profile(derive_seed(seed, 0xC0_0000 + i as u64), config);
        let text = &text_pool[i % text_pool.len()];
        let spec = SessionSpec {
            mode,
            text,
            profile: &profile,
            seed: derive_seed(seed, 0xD0_0000 + i as u64),
        };
        let mut s = gen_session(&spec, config)?;
        s.session_id = format!("{}-{}", mode, i);
        out.push((s, mode));
    }
    Ok(out)
}

/// What kind of essay corpus to generate.
pub enum CorpusSpec<'a> {
    /// Essays sampled from a language model: low perplexity under that
    /// model by construction. Sentence punctuation is inserted at seeded
    /// intervals; the tokenizer drops it, so scored perplexity is
    /// unaffected, while sentence-level analyses get real sentence units.
    LmSampled { lm: &'a NGramModel },
    /// Essay-length windows of a held-out human text pool with seeded
    /// character substitutions at `perturbation_rate` (typos).
    PerturbedHuman {
        pool: &'a str,
        perturbation_rate: f64,
    },
}

/// Generate `n_essays` essays of `min_words..=max_words` words each.
pub fn gen_corpora(
    spec: &CorpusSpec,
    n_essays: usize,
    min_words: usize,
    max_words: usize,
    seed: u64,
) -> Result<Vec<String>> {
    if n_essays < 1 {
        return Err(Error::InvalidInput("need at least one essay".into()));
    }
    if min_words < 1 || min_words > max_words {
        return Err(Error::InvalidInput(format!(
            "bad word range {min_words}..={max_words}"
        )));
    }
    let mut essays = Vec::with_capacity(n_essays);
    for i in 0..n_essays {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        let n_words = rng.gen_range(min_words..=max_words);
        let essay = match spec {
            CorpusSpec::LmSampled { lm } => {
                let raw = lm.sample_text(n_words, derive_seed(seed, 0xA0_0000 + i as u64));
                punctuate(&raw, &mut rng)
            }
            CorpusSpec::PerturbedHuman {
                pool,
                perturbation_rate,
            } => {
                let words: Vec<&str> = pool.split_whitespace().collect();
                if words.len() < max_words {
                    return Err(Error::InvalidInput(format!(
                        "held-out pool has {} words, need at least {max_words}",
                        words.len()
                    )));
                }
                let start = rng.gen_range(0..=words.len() - n_words);
                let chunk = words[start..start + n_words].join(" ");
                perturb(&chunk, *perturbation_rate, &mut rng)
            }
        };
        essays.push(essay);
    }
    Ok(essays)
}

/// Insert sentence punctuation into a stream of words: a period every 6-18
/// words, with the following word capitalized. Word count is preserved.
fn punctuate(raw: &str, rng: &mut ChaCha8Rng) -> String {
    let words: Vec<&str> = raw.split_whitespace().collect();
    let mut out = String::with_capacity(raw.len() + raw.len() / 8);
    let mut until_period = rng.gen_range(6..=18usize);
    let mut capitalize = true;
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        if capitalize {
            let mut chars = w.chars();
            if let Some(c) = chars.next() {
                out.extend(c.to_uppercase());
                out.push_str(chars.as_str());
            }
            capitalize = false;
        } else {
            out.push_str(w);
        }
        until_period -= 1;
        if until_period == 0 || i + 1 == words.len() {
            out.push('.');
            until_period = rng.gen_range(6..=18usize);
            capitalize = true;
        }
    }
    out
}

/// Replace alphabetic characters with random lowercase letters at `rate`.
/// Whitespace and punctuation are untouched, so word and sentence structure
/// survive. Rate 0 returns the text verbatim.
fn perturb(text: &str, rate: f64, rng: &mut ChaCha8Rng) -> String {
    if rate <= 0.0 {
        return text.to_string();
    }
    text.chars()
        .map(|c| {
            if c.is_alphabetic() && rng.gen::<f64>() < rate {
                (b'a' + rng.gen_range(0..26u8)) as char
            } else {
                c
            }
        })
        .collect()
}

/// The bundled prose corpus, one paragraph per line. Original text shipped
/// with the crate and dedicated to the public domain.
pub fn bundled_corpus() -> &'static str {
    include_str!("../data/corpus.txt")
}

/// Bundled corpus paragraphs (non-empty lines).
pub fn corpus_paragraphs() -> Vec<&'static str> {
    bundled_corpus()
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
}

/// Split the bundled corpus into disjoint training and held-out slices by
/// interleaving paragraphs, so both slices span the whole document and the
/// held-out pool never overlaps the training material.
pub fn seed_corpus_split() -> (Vec<String>, Vec<String>) {
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for (i, p) in corpus_paragraphs().into_iter().enumerate() {
        if i % 2 == 0 {
            train.push(p.to_string());
        } else {
            holdout.push(p.to_string());
        }
    }
    (train, holdout)
}

/// Slice running text into consecutive chunks of about `words_per_slice`
/// words, for use as typing-task texts.
pub fn slice_text_pool(text: &str, words_per_slice: usize) -> Vec<String> {
    let words: Vec<&str> = text.split_whitespace().collect();
    words
        .chunks(words_per_slice)
        .filter(|c| c.len() >= words_per_slice / 2)
        .map(|c| c.join(" "))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extract_features;
    use crate::lm::{essay_perplexity, train_ngram};

    fn config() -> SimConfig {
        SimConfig::default()
    }

    fn profile(seed: u64) -> WriterProfile {
        gen_writer_profile(seed, &config())
    }

    #[test]
    fn profiles_are_deterministic_and_distinct() {
        assert_eq!(profile(7), profile(7));
        assert_ne!(profile(7).writer_id, profile(8).writer_id);
    }

    #[test]
    fn profile_parameters_stay_in_range() {
        let cfg = config();
        for seed in 0..1000 {
            let p = profile(seed);
            assert!(p.sigma_log_iki > 0.0);
            assert!(p.wordinitial_slowdown >= 0.0);
            assert!(p.backspace_rate >= cfg.backspace_rate_min);
            assert!(p.backspace_rate < cfg.backspace_rate_max);
            assert!(p.pause_rate < cfg.pause_rate_max);
            assert!(p.pause_scale_ms >= cfg.pause_scale_ms_min);
        }
    }

    #[test]
    fn transcription_replays_exactly() {
        let p = profile(1);
        let spec = SessionSpec {
            mode: SessionMode::Transcribe,
            text: "hi",
            profile: &p,
            seed: 2,
        };
        let s = gen_session(&spec, &config()).unwrap();
        assert_eq!(s.replay_final_text().unwrap(), "hi");
    }

    #[test]
    fn generated_sessions_always_validate() {
        let cfg = config();
        let text = "the quick brown fox jumps over the lazy dog near the river bank today";
        for seed in 0..30 {
            let p = profile(seed);
            for mode in [SessionMode::Draft, SessionMode::Transcribe] {
                let spec = SessionSpec {
                    mode,
                    text,
                    profile: &p,
                    seed: derive_seed(seed, 99),
                };
                let s = gen_session(&spec, &cfg).unwrap();
                assert!(s.validate().is_empty(), "violations for seed {seed}");
                assert_eq!(s.replay_final_text().unwrap(), text);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = profile(3);
        let spec = SessionSpec {
            mode: SessionMode::Draft,
            text: "some words to type out",
            profile: &p,
            seed: 17,
        };
        let a = gen_session(&spec, &config()).unwrap();
        let b = gen_session(&spec, &config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_text_is_an_error() {
        let p = profile(1);
        let spec = SessionSpec {
            mode: SessionMode::Draft,
            text: "",
            profile: &p,
            seed: 1,
        };
        assert!(gen_session(&spec, &config()).is_err());
    }

    #[test]
    fn draft_pauses_exceed_transcribe_pauses() {
        let cfg = config();
        let text = "a few words typed for the pause comparison test here";
        let mean_pause = |mode: SessionMode| -> f64 {
            (0..100)
                .map(|i| {
                    let p = profile(derive_seed(500, i));
                    let spec = SessionSpec {
                        mode,
                        text,
                        profile: &p,
                        seed: derive_seed(600, i),
                    };
                    let s = gen_session(&spec, &cfg).unwrap();
                    s.events[0].t_ms as f64
                })
                .sum::<f64>()
                / 100.0
        };
        let draft = mean_pause(SessionMode::Draft);
        let transcribe = mean_pause(SessionMode::Transcribe);
        assert!(
            draft > transcribe,
            "draft {draft} should exceed transcribe {transcribe}"
        );
    }

    #[test]
    fn draft_mode_produces_jump_edits_and_more_backspaces() {
        let cfg = config();
        let text =
            "the quick brown fox jumps over the lazy dog and keeps going for a while longer";
        let mut draft_jumps = 0.0;
        let mut draft_bs = 0.0;
        let mut trans_jumps = 0.0;
        let mut trans_bs = 0.0;
        for i in 0..50 {
            let p = profile(derive_seed(800, i));
            for (mode, jumps, bs) in [
                (SessionMode::Draft, &mut draft_jumps, &mut draft_bs),
                (SessionMode::Transcribe, &mut trans_jumps, &mut trans_bs),
            ] {
                let spec = SessionSpec {
                    mode,
                    text,
                    profile: &p,
                    seed: derive_seed(900, i),
                };
                let s = gen_session(&spec, &cfg).unwrap();
                let fv = extract_features(&s);
                *jumps += fv.get("n_jump_edits").unwrap();
                *bs += fv.get("n_backspaces").unwrap();
            }
        }
        assert!(draft_jumps > 0.0);
        assert_eq!(trans_jumps, 0.0);
        assert!(draft_bs > trans_bs);
    }

    #[test]
    fn repeater_dataset_counts_and_determinism() {
        let cfg = config();
        let pool: Vec<String> = slice_text_pool(bundled_corpus(), 40)
            .into_iter()
            .take(8)
            .collect();
        let d1 = gen_repeater_dataset(5, 2, &pool, 42, &cfg).unwrap();
        assert_eq!(d1.len(), 10);
        let writers: std::collections::HashSet<&str> =
            d1.iter().map(|s| s.writer_id.as_str()).collect();
        assert_eq!(writers.len(), 5);
        let d2 = gen_repeater_dataset(5, 2, &pool, 42, &cfg).unwrap();
        assert_eq!(d1, d2);
        // Pool smaller than sessions_per_writer is an error.
        assert_eq!(gen_repeater_dataset(2, 3, &pool[..3], 1, &cfg).unwrap().len(), 6);
        assert!(gen_repeater_dataset(2, 9, &pool[..2], 1, &cfg).is_err());
    }

    #[test]
    fn corpora_generation_rules() {
        let (train, holdout) = seed_corpus_split();
        assert!(!train.is_empty() && !holdout.is_empty());
        let lm = train_ngram(&train, 3, 0.1, 2).unwrap();

        let ai = gen_corpora(&CorpusSpec::LmSampled { lm: &lm }, 5, 50, 80, 7).unwrap();
        assert_eq!(ai.len(), 5);
        for essay in &ai {
            let n = essay.split_whitespace().count();
            assert!((50..=80).contains(&n), "essay has {n} words");
            assert!(essay.contains('.'));
        }
        let again = gen_corpora(&CorpusSpec::LmSampled { lm: &lm }, 5, 50, 80, 7).unwrap();
        assert_eq!(ai, again);

        let pool = holdout.join(" ");
        let human = gen_corpora(
            &CorpusSpec::PerturbedHuman {
                pool: &pool,
                perturbation_rate: 0.0,
            },
            3,
            50,
            80,
            9,
        )
        .unwrap();
        // Rate 0 returns held-out text verbatim.
        for essay in &human {
            assert!(pool.contains(essay), "verbatim window expected");
        }
        let perturbed = gen_corpora(
            &CorpusSpec::PerturbedHuman {
                pool: &pool,
                perturbation_rate: 0.05,
            },
            3,
            50,
            80,
            9,
        )
        .unwrap();
        assert_ne!(human, perturbed);
        // Perturbation preserves word counts.
        for (a, b) in human.iter().zip(&perturbed) {
            assert_eq!(a.split_whitespace().count(), b.split_whitespace().count());
        }
    }

    #[test]
    fn lm_sampled_essays_score_below_human_proxy() {
        let (train, holdout) = seed_corpus_split();
        let lm = train_ngram(&train, 3, 0.01, 2).unwrap();
        let pool = holdout.join(" ");
        let ai = gen_corpora(&CorpusSpec::LmSampled { lm: &lm }, 10, 80, 120, 21).unwrap();
        let human = gen_corpora(
            &CorpusSpec::PerturbedHuman {
                pool: &pool,
                perturbation_rate: 0.01,
            },
            10,
            80,
            120,
            22,
        )
        .unwrap();
        let mut human_ppls: Vec<f64> = human
            .iter()
            .map(|e| essay_perplexity(&lm, e).unwrap().ppl)
            .collect();
        human_ppls.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let human_median = human_ppls[human_ppls.len() / 2];
        for essay in &ai {
            let ppl = essay_perplexity(&lm, essay).unwrap().ppl;
            assert!(
                ppl < human_median,
                "sampled essay ppl {ppl} not below human median {human_median}"
            );
        }
    }

    #[test]
    fn config_toml_round_trip() {
        let cfg = config();
        let text = cfg.to_toml();
        let parsed = SimConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, parsed);
        // Partial files fall back to defaults.
        let partial = SimConfig::from_toml("mu_log_iki_mean = 5.5\n").unwrap();
        assert_eq!(partial.mu_log_iki_mean, 5.5);
        assert_eq!(partial.pause_rate_max, cfg.pause_rate_max);
    }

    #[test]
    fn copy_task_dataset_is_balanced_and_labeled() {
        let pool = vec!["a few words for the tiny typing task".to_string()];
        let ds = gen_copy_task_dataset(3, 3, &pool, 5, &config()).unwrap();
        assert_eq!(ds.len(), 6);
        let drafts = ds.iter().filter(|(_, l)| *l == WritingLabel::Draft).count();
        assert_eq!(drafts, 3);
        let ids: std::collections::HashSet<&str> =
            ds.iter().map(|(s, _)| s.session_id.as_str()).collect();
        assert_eq!(ids.len(), 6);
    }
}
