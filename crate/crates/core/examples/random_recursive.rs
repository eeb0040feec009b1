//! Random recursive gasket on T = {2, 3}: Monte Carlo frequency of the
//! coverage event against its exact probability (2 * 1/2 * 1/2)^9 = 1/512.
//!
//! ```text
//! cargo run --release --example random_recursive -- 1000000
//! ```

use gasket::rsg::{estimate_event_probability, format_estimate, star_frequency, LevelDistribution};
use gasket::{LevelSet, WeightSystem};

fn main() -> gasket::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200_000);
    let rho = LevelDistribution::uniform(&LevelSet::new([2, 3])?);
    let q = WeightSystem::uniform(rho.levels());

    let est = estimate_event_probability(&rho, &q, 1, 1, 0, trials, 2024)?;
    print!("{}", format_estimate(&est));

    println!("k\tfrequency");
    for row in star_frequency(&rho, &q, 1, 1, 2, 20, 5, trials / 4, 7)? {
        println!("{}\t{:.6}", row.k, row.frequency);
    }
    Ok(())
}
