//! Generates a seeded synthetic paired corpus and runs the full ranking
//! evaluation for every measure in every mode.
//!
//! Usage: cargo run --release --example synthetic_benchmark -- \
//!            [users] [vocab] [concentration] [shift] [sharpness] [seed]

use stylo_core::corpus::{build_accounts, Window};
use stylo_core::evaluator::{evaluate, Direction};
use stylo_core::similarity::{Measure, Mode, ScoreParams};
use stylo_core::synth::{generate, GeneratorSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| -> f64 {
        args.get(i).map(|s| s.parse().expect("numeric arg")).unwrap_or(default)
    };
    let spec = GeneratorSpec {
        user_count: arg(0, 200.0) as usize,
        vocabulary_size: arg(1, 2000.0) as usize,
        signature_concentration: arg(2, 0.05),
        platform_shift: arg(3, 0.3),
        temporal_sharpness: arg(4, 6.0),
        seed: arg(5, 7.0) as u64,
        ..GeneratorSpec::example(7)
    };
    println!(
        "users={} vocab={} concentration={} shift={} sharpness={} seed={}",
        spec.user_count,
        spec.vocabulary_size,
        spec.signature_concentration,
        spec.platform_shift,
        spec.temporal_sharpness,
        spec.seed
    );

    let corpus = generate(&spec).expect("valid spec");
    let window = Window::new(spec.window_start, spec.window_end).unwrap();
    let accounts = build_accounts(corpus.posts, window, 20).unwrap();
    println!("accounts: {}  pairs: {}", accounts.len(), corpus.pairs.len());
    println!();
    println!("{:<10} {:<11} {:>9} {:>13} {:>9}", "measure", "mode", "accuracy", "average_rank", "secs");

    for mode in Mode::ALL {
        for measure in Measure::ALL {
            let started = std::time::Instant::now();
            let report = evaluate(
                &corpus.pairs,
                &accounts,
                measure,
                mode,
                ScoreParams::default(),
                Direction::AToB,
            )
            .expect("evaluation");
            println!(
                "{:<10} {:<11} {:>9.4} {:>13.2} {:>9.2}",
                measure.as_str(),
                mode.as_str(),
                report.accuracy,
                report.average_rank,
                started.elapsed().as_secs_f64()
            );
        }
        println!();
    }
}
