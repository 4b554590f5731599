//! Classify keystrokes, detect bursts, and extract the feature catalog.
//!
//! ```bash
//! cargo run --example extract_features
//! ```

use writetrace::features::{
    classify_keystrokes, detect_bursts, extract_features, BurstMode, FEATURE_NAMES,
};
use writetrace::simgen::{gen_session, gen_writer_profile, SessionMode, SessionSpec, SimConfig};

fn main() -> writetrace::Result<()> {
    let config = SimConfig::default();
    let profile = gen_writer_profile(7, &config);
    let spec = SessionSpec {
        mode: SessionMode::Draft,
        text: "The river enters the valley from the north, sliding between low banks.",
        profile: &profile,
        seed: 42,
    };
    let session = gen_session(&spec, &config)?;

    let annotated = classify_keystrokes(&session);
    println!("first ten events:");
    for a in annotated.iter().take(10) {
        let e = &session.events[a.index];
        println!(
            "  t={:6} ms  {:?}  {:?}  iki={:?}  context={:?}",
            e.t_ms, e.kind, e.payload, a.iki_ms, a.context
        );
    }

    let bursts = detect_bursts(&session, 400, BurstMode::AppendOnly);
    let lens: Vec<usize> = bursts.iter().map(|b| b.length_chars).collect();
    println!("\nappend bursts at 400 ms: {} bursts, lengths {lens:?}", bursts.len());

    let fv = extract_features(&session);
    println!("\nfeature vector:");
    for name in FEATURE_NAMES {
        match fv.get(name) {
            Some(v) => println!("  {name:42} {v:.4}"),
            None => println!("  {name:42} (missing)"),
        }
    }
    Ok(())
}
