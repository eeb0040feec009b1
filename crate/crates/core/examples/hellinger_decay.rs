//! Hellinger affinity between the energy measure of the normalized harmonic
//! function (1,0,0) and the uniform reference measure on SG(2).
//!
//! ```text
//! cargo run --release --example hellinger_decay -- 12
//! ```

use gasket::numerics::{int, rat};
use gasket::singularity::hellinger_affinity;
use gasket::words::DEFAULT_ENUM_CEILING;
use gasket::{BoundaryVector, LabelRule, WeightSystem};

fn main() -> gasket::Result<()> {
    let depth = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    let rule = LabelRule::constant(2)?;
    let q = WeightSystem::uniform(rule.levels());
    let x = BoundaryVector::new([rat(1, 2), int(0), int(0)]);

    let series = hellinger_affinity(&rule, &q, &x, depth, DEFAULT_ENUM_CEILING)?;
    for (m, h) in series.h.iter().enumerate() {
        println!("H_{m:<2} = {h:.15}  ({} cylinders)", series.counts[m]);
    }
    println!("nonincreasing: {}", series.is_nonincreasing());
    Ok(())
}
