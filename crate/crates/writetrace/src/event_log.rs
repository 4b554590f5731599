//! Keystroke/clickstream event data model: parsing, validation, replay.
//!
//! A [`Session`] is the ordered, timestamped event stream of one test taker
//! on one writing task. Session logs are UTF-8 line-delimited JSON, one event
//! per line, with fields `session_id`, `writer_id`, `task_id`, `t_ms`,
//! `kind`, `payload`, `pos`, `cut_len`. Unknown fields are ignored;
//! `task_id`, `payload`, and `cut_len` may be omitted.
//!
//! Positions are character indices (caret position) into the document at
//! event time. [`Session::replay_final_text`] reconstructs the document a
//! validated session produced; [`Session::validate`] reports every invariant
//! breach as a [`Violation`] without failing.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a single logged event did to the document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    /// One character typed at the caret.
    Insert,
    /// Delete the character before the caret.
    Backspace,
    /// Remove `cut_len` characters starting at `pos`.
    Cut,
    /// Insert a (possibly multi-character) payload at `pos`.
    Paste,
    /// An insert whose position differs from the previous event's post-event
    /// caret position (an edit that jumped to another location).
    JumpInsert,
}

/// One timestamped editing event.
///
/// `t_ms` counts milliseconds from session start. Events within a session
/// are sorted by `t_ms`; duplicate timestamps are legal and keep their input
/// order (downstream inter-key intervals are floored to 1 ms).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeystrokeEvent {
    pub t_ms: u64,
    pub kind: EventKind,
    #[serde(default)]
    pub payload: String,
    pub pos: usize,
    #[serde(default)]
    pub cut_len: usize,
}

impl KeystrokeEvent {
    /// Number of characters this event adds to the document.
    pub fn inserted_chars(&self) -> usize {
        match self.kind {
            EventKind::Insert | EventKind::JumpInsert | EventKind::Paste => {
                self.payload.chars().count()
            }
            EventKind::Backspace | EventKind::Cut => 0,
        }
    }

    /// Number of characters this event removes from the document.
    pub fn deleted_chars(&self) -> usize {
        match self.kind {
            EventKind::Backspace => 1,
            EventKind::Cut => self.cut_len,
            _ => 0,
        }
    }

    /// Caret position after this event is applied.
    pub fn caret_after(&self) -> usize {
        match self.kind {
            EventKind::Insert | EventKind::JumpInsert | EventKind::Paste => {
                self.pos + self.payload.chars().count()
            }
            EventKind::Backspace => self.pos.saturating_sub(1),
            EventKind::Cut => self.pos,
        }
    }
}

/// All events of one test taker on one writing task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub writer_id: String,
    pub task_id: String,
    pub events: Vec<KeystrokeEvent>,
}

/// Invariant breached by an event, found by [`Session::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationRule {
    /// Timestamp decreased relative to the previous event.
    TimestampOrder,
    /// Insert/JumpInsert payload is not exactly one character.
    InsertPayloadLength,
    /// Backspace/Cut carried a non-empty payload.
    PayloadNotEmpty,
    /// `cut_len` is non-zero on a non-Cut event.
    CutLenOutsideCut,
    /// Insert/paste position beyond the end of the document.
    PositionPastEnd { pos: usize, len: usize },
    /// Backspace with nothing before the caret.
    BackspaceOnEmpty,
    /// Cut range extends past the end of the document.
    CutRange { pos: usize, cut_len: usize, len: usize },
}

impl std::fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ViolationRule::TimestampOrder => write!(f, "timestamp out of order"),
            ViolationRule::InsertPayloadLength => {
                write!(f, "insert payload must be exactly one character")
            }
            ViolationRule::PayloadNotEmpty => write!(f, "payload must be empty for this kind"),
            ViolationRule::CutLenOutsideCut => write!(f, "cut_len must be 0 outside Cut events"),
            ViolationRule::PositionPastEnd { pos, len } => {
                write!(f, "position {pos} past end of document (length {len})")
            }
            ViolationRule::BackspaceOnEmpty => write!(f, "backspace on empty document prefix"),
            ViolationRule::CutRange { pos, cut_len, len } => write!(
                f,
                "cut of {cut_len} at {pos} past end of document (length {len})"
            ),
        }
    }
}

/// A rule breach at a specific event index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub event_index: usize,
    pub rule: ViolationRule,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "event {}: {}", self.event_index, self.rule)
    }
}

/// Parser behavior switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Re-kind plain Inserts whose position differs from the previous
    /// event's post-event caret position as [`EventKind::JumpInsert`].
    /// Explicit JumpInsert records are always accepted.
    pub derive_jumps: bool,
}

/// Wire format of one session-log line. Field names are part of the format.
#[derive(Debug, Serialize, Deserialize)]
struct EventRecord {
    session_id: String,
    writer_id: String,
    #[serde(default)]
    task_id: String,
    t_ms: u64,
    kind: EventKind,
    #[serde(default)]
    payload: String,
    pos: usize,
    #[serde(default)]
    cut_len: usize,
}

/// Parse a line-delimited session log into sessions.
///
/// Events are grouped by `session_id` (sessions keep the order of their
/// first appearance) and sorted by timestamp, preserving input order for
/// ties. Blank lines are skipped. Errors name the offending 1-based line.
pub fn parse_session_log(reader: impl BufRead, opts: ParseOptions) -> Result<Vec<Session>> {
    let mut sessions: Vec<Session> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EventRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;

        let event = KeystrokeEvent {
            t_ms: rec.t_ms,
            kind: rec.kind,
            payload: rec.payload,
            pos: rec.pos,
            cut_len: rec.cut_len,
        };
        match index.get(&rec.session_id) {
            Some(&i) => {
                let s = &mut sessions[i];
                if s.writer_id != rec.writer_id {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!(
                            "session {} has conflicting writer_id ({} vs {})",
                            rec.session_id, s.writer_id, rec.writer_id
                        ),
                    });
                }
                s.events.push(event);
            }
            None => {
                index.insert(rec.session_id.clone(), sessions.len());
                sessions.push(Session {
                    session_id: rec.session_id,
                    writer_id: rec.writer_id,
                    task_id: rec.task_id,
                    events: vec![event],
                });
            }
        }
    }

    for s in &mut sessions {
        s.events.sort_by_key(|e| e.t_ms); // stable: ties keep input order
        if opts.derive_jumps {
            derive_jump_inserts(&mut s.events);
        }
    }
    Ok(sessions)
}

fn derive_jump_inserts(events: &mut [KeystrokeEvent]) {
    let mut caret = 0usize;
    for e in events.iter_mut() {
        if e.kind == EventKind::Insert && e.pos != caret {
            e.kind = EventKind::JumpInsert;
        }
        caret = e.caret_after();
    }
}

/// Serialize sessions back to the line-delimited log format.
///
/// `parse_session_log` of the output reproduces the input sessions.
pub fn write_session_log(sessions: &[Session], mut w: impl Write) -> Result<()> {
    for s in sessions {
        for e in &s.events {
            let rec = EventRecord {
                session_id: s.session_id.clone(),
                writer_id: s.writer_id.clone(),
                task_id: s.task_id.clone(),
                t_ms: e.t_ms,
                kind: e.kind,
                payload: e.payload.clone(),
                pos: e.pos,
                cut_len: e.cut_len,
            };
            serde_json::to_writer(&mut w, &rec).map_err(|e| Error::InvalidInput(e.to_string()))?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

impl Session {
    /// Check every event against the replay invariants.
    ///
    /// Returns one [`Violation`] per breach (empty means the session replays
    /// cleanly). Events that breach a positional rule are skipped during the
    /// simulated replay so later events are still checked.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut len = 0usize; // simulated document length
        let mut prev_t: Option<u64> = None;

        for (i, e) in self.events.iter().enumerate() {
            let mut bad = |rule: ViolationRule| {
                violations.push(Violation {
                    event_index: i,
                    rule,
                });
            };

            if let Some(pt) = prev_t {
                if e.t_ms < pt {
                    bad(ViolationRule::TimestampOrder);
                }
            }
            prev_t = Some(e.t_ms);

            if e.cut_len != 0 && e.kind != EventKind::Cut {
                bad(ViolationRule::CutLenOutsideCut);
            }

            match e.kind {
                EventKind::Insert | EventKind::JumpInsert => {
                    let n = e.payload.chars().count();
                    if n != 1 {
                        bad(ViolationRule::InsertPayloadLength);
                        continue;
                    }
                    if e.pos > len {
                        bad(ViolationRule::PositionPastEnd { pos: e.pos, len });
                        continue;
                    }
                    len += 1;
                }
                EventKind::Paste => {
                    if e.pos > len {
                        bad(ViolationRule::PositionPastEnd { pos: e.pos, len });
                        continue;
                    }
                    len += e.payload.chars().count();
                }
                EventKind::Backspace => {
                    if !e.payload.is_empty() {
                        bad(ViolationRule::PayloadNotEmpty);
                    }
                    if e.pos == 0 {
                        bad(ViolationRule::BackspaceOnEmpty);
                        continue;
                    }
                    if e.pos > len {
                        bad(ViolationRule::PositionPastEnd { pos: e.pos, len });
                        continue;
                    }
                    len -= 1;
                }
                EventKind::Cut => {
                    if !e.payload.is_empty() {
                        bad(ViolationRule::PayloadNotEmpty);
                    }
                    if e.pos + e.cut_len > len {
                        bad(ViolationRule::CutRange {
                            pos: e.pos,
                            cut_len: e.cut_len,
                            len,
                        });
                        continue;
                    }
                    len -= e.cut_len;
                }
            }
        }
        violations
    }

    /// Replay all events and return the final document.
    ///
    /// Errors with the first violation if the session does not validate.
    pub fn replay_final_text(&self) -> Result<String> {
        let violations = self.validate();
        if let Some(v) = violations.first() {
            return Err(Error::InvalidSession {
                session_id: self.session_id.clone(),
                event_index: v.event_index,
                rule: v.rule.to_string(),
            });
        }

        let mut doc: Vec<char> = Vec::new();
        for e in &self.events {
            match e.kind {
                EventKind::Insert | EventKind::JumpInsert | EventKind::Paste => {
                    for (k, ch) in e.payload.chars().enumerate() {
                        doc.insert(e.pos + k, ch);
                    }
                }
                EventKind::Backspace => {
                    doc.remove(e.pos - 1);
                }
                EventKind::Cut => {
                    doc.drain(e.pos..e.pos + e.cut_len);
                }
            }
        }
        Ok(doc.into_iter().collect())
    }
}
