//! Parse a session log, validate it, and replay the final text.
//!
//! ```bash
//! cargo run --example parse_and_replay
//! ```

use writetrace::event_log::{parse_session_log, ParseOptions};

fn main() -> writetrace::Result<()> {
    // One event per line; a second session is interleaved with the first.
    let log = r#"
{"session_id":"s1","writer_id":"alice","task_id":"essay-1","t_ms":0,"kind":"Insert","payload":"h","pos":0}
{"session_id":"s2","writer_id":"bob","task_id":"essay-1","t_ms":5,"kind":"Insert","payload":"o","pos":0}
{"session_id":"s1","writer_id":"alice","task_id":"essay-1","t_ms":140,"kind":"Insert","payload":"i","pos":1}
{"session_id":"s2","writer_id":"bob","task_id":"essay-1","t_ms":150,"kind":"Insert","payload":"k","pos":1}
{"session_id":"s1","writer_id":"alice","task_id":"essay-1","t_ms":600,"kind":"Insert","payload":"!","pos":2}
{"session_id":"s1","writer_id":"alice","task_id":"essay-1","t_ms":900,"kind":"Backspace","payload":"","pos":3}
{"session_id":"s1","writer_id":"alice","task_id":"essay-1","t_ms":1400,"kind":"Paste","payload":" there","pos":2}
"#;

    let sessions = parse_session_log(log.trim().as_bytes(), ParseOptions::default())?;
    println!("parsed {} sessions", sessions.len());

    for session in &sessions {
        let violations = session.validate();
        println!(
            "\nsession {} by {} ({} events, {} violations)",
            session.session_id,
            session.writer_id,
            session.events.len(),
            violations.len()
        );
        for v in &violations {
            println!("  violation: {v}");
        }
        if violations.is_empty() {
            println!("  final text: {:?}", session.replay_final_text()?);
        }
    }

    // A backspace on an empty document is reported, not panicked on.
    let bad = r#"{"session_id":"s3","writer_id":"eve","t_ms":0,"kind":"Backspace","payload":"","pos":0}"#;
    let sessions = parse_session_log(bad.as_bytes(), ParseOptions::default())?;
    println!("\nbad session violations: {:?}", sessions[0].validate());
    Ok(())
}
