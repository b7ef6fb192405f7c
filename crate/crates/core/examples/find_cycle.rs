//! Searches for three hypotheses with a cyclic pairwise rejection pattern and
//! prints the fixture JSON.
//!
//! Usage: cargo run -p trust-inference --example find_cycle -- [alpha] [seed] [attempts]

use trust_inference::formats::CyclicRejectionFile;
use trust_inference::harness::find_cyclic_rejection;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().map_or(0.05, |a| a.parse().expect("alpha"));
    let seed: u64 = args.get(1).map_or(20_240_611, |a| a.parse().expect("seed"));
    let attempts: u64 = args
        .get(2)
        .map_or(100_000, |a| a.parse().expect("attempts"));

    match find_cyclic_rejection(alpha, seed, attempts) {
        Some(cycle) => {
            let file = CyclicRejectionFile::from_cycle(&cycle, Some(seed));
            println!("{}", serde_json::to_string_pretty(&file).unwrap());
        }
        None => {
            eprintln!("no cycle found in {attempts} attempts");
            std::process::exit(1);
        }
    }
}
