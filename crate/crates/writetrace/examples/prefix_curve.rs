//! Perplexity as a function of text length: score the first N words of each
//! essay for N = 10..400 and aggregate per class.
//!
//! Short prefixes separate the two classes poorly; the gap widens with
//! length.
//!
//! ```bash
//! cargo run --example prefix_curve
//! ```

use writetrace::lm::{aggregate_prefix_curves, prefix_perplexity_curve, train_ngram};
use writetrace::simgen::{gen_corpora, seed_corpus_split, CorpusSpec};

fn main() -> writetrace::Result<()> {
    let (train, holdout) = seed_corpus_split();
    let model = train_ngram(&train, 3, 0.01, 2)?;
    let pool = holdout.join(" ");

    let sampled = gen_corpora(&CorpusSpec::LmSampled { lm: &model }, 30, 400, 450, 1)?;
    let human = gen_corpora(
        &CorpusSpec::PerturbedHuman {
            pool: &pool,
            perturbation_rate: 0.01,
        },
        30,
        400,
        450,
        2,
    )?;

    let aggregate = |texts: &[String]| {
        let curves: Vec<_> = texts
            .iter()
            .map(|t| prefix_perplexity_curve(&model, t, 10, 400, 10))
            .collect();
        aggregate_prefix_curves(&curves)
    };
    let sampled_curve = aggregate(&sampled);
    let human_curve = aggregate(&human);

    println!("{:>7} {:>18} {:>18}", "N words", "sampled mean±std", "human mean±std");
    for ((n, m_s, s_s, _), (_, m_h, s_h, _)) in sampled_curve
        .points
        .iter()
        .zip(human_curve.points.iter())
        .step_by(4)
    {
        println!("{n:>7} {m_s:>11.1} ±{s_s:>5.1} {m_h:>11.1} ±{s_h:>5.1}");
    }
    Ok(())
}
