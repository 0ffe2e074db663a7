//! Writes the 50×50 rank-2 completion fixture used by the CLI tests.
//!
//! ```text
//! cargo run -p svtprox --example make_completion_fixture -- crates/cli/tests/fixtures
//! ```
//!
//! Produces `completion_observed.csv` (60% of entries as `row,col,value`) and
//! `completion_truth.csv` (the full ground-truth matrix).

use std::path::PathBuf;

use svtprox::io::{write_matrix, write_observed};
use svtprox::synthetic::{low_rank_completion, seeded};

const SEED: u64 = 2024;
const SIZE: usize = 50;
const RANK: usize = 2;
const FRACTION: f64 = 0.6;

fn main() -> svtprox::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    let (truth, observed) = low_rank_completion(&mut seeded(SEED), SIZE, SIZE, RANK, FRACTION);
    write_observed(dir.join("completion_observed.csv"), &observed)?;
    write_matrix(dir.join("completion_truth.csv"), &truth)?;
    println!("wrote {} observed entries to {}", observed.len(), dir.display());
    Ok(())
}
