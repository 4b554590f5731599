//! Train the n-gram model on the bundled corpus slice and score essays at
//! essay and sentence granularity.
//!
//! ```bash
//! cargo run --example train_and_score_lm
//! ```

use writetrace::lm::{essay_perplexity, sentence_perplexities, train_ngram};
use writetrace::simgen::seed_corpus_split;

fn main() -> writetrace::Result<()> {
    let (train, holdout) = seed_corpus_split();
    let model = train_ngram(&train, 3, 0.1, 2)?;
    println!(
        "trained order-3 model: {} vocabulary entries, fingerprint {}",
        model.vocab().len(),
        &model.fingerprint()[..23]
    );

    // A held-out paragraph the model never saw, and a sample from the model.
    let unseen = &holdout[0];
    let sampled = model.sample_text(60, 99);

    for (label, text) in [("held-out human text", unseen.as_str()), ("model sample", &sampled)] {
        let report = essay_perplexity(&model, text)?;
        println!(
            "\n{label}: {} tokens, perplexity {:.2}",
            report.n_tokens, report.ppl
        );
        println!("  {:.70}...", text);
    }

    println!("\nper-sentence perplexity of the held-out paragraph:");
    for (i, report) in sentence_perplexities(&model, unseen).iter().enumerate().take(6) {
        println!("  sentence {i}: {:6.1} over {} tokens", report.ppl, report.n_tokens);
    }
    Ok(())
}
