//! Constants entering the singularity argument for T = {2, 3} with uniform
//! weights on each level.

use gasket::renorm::constants_table;
use gasket::{LevelSet, WeightSystem};

fn main() -> gasket::Result<()> {
    let levels = LevelSet::new([2, 3])?;
    let q = WeightSystem::uniform(&levels);
    let c = constants_table(&levels, &q)?;
    println!("beta1       = {}", c.beta1);
    println!(
        "beta2       = {:.12} (ratio {:?})",
        c.beta2,
        c.beta2_ratio.map(|r| r.to_string())
    );
    println!("beta3       = {}", c.beta3);
    println!("beta4       = {}", c.beta4);
    println!("beta5       = {}", c.beta5);
    println!("beta6       = {}", c.beta6);
    println!("delta0      = {}", c.delta0);
    println!("delta_prime = {}", c.delta_prime);
    println!("theta       = {}", c.theta);
    for (i, row) in c.pairings.iter().enumerate() {
        let row: Vec<String> = row.iter().map(ToString::to_string).collect();
        println!("(u_{}, v_j) = {}", i + 1, row.join("  "));
    }
    Ok(())
}
