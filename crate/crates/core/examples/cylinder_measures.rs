//! Cylinder values of the reference and energy measures on the alternating
//! gasket (levels 2, 3, 2, 3, ...), with both totals checked exactly.

use gasket::measures::{cylinder_reports, write_tsv};
use gasket::numerics::{rat, ExactRational};
use gasket::words::DEFAULT_ENUM_CEILING;
use gasket::{BoundaryVector, LabelRule, WeightSystem};

fn main() -> gasket::Result<()> {
    let rule = LabelRule::periodic(vec![2, 3])?;
    let q = WeightSystem::uniform(rule.levels());
    let x = BoundaryVector::new([rat(1, 2), rat(0, 1), rat(0, 1)]);

    let rows = cylinder_reports(&rule, &q, &x, 2, DEFAULT_ENUM_CEILING)?;
    write_tsv(&rows, &mut std::io::stdout()).expect("stdout");

    for depth in 0..=4 {
        let rows = cylinder_reports(&rule, &q, &x, depth, DEFAULT_ENUM_CEILING)?;
        let lq: ExactRational = rows.iter().map(|r| &r.lambda_q).sum();
        let le: ExactRational = rows.iter().map(|r| &r.lambda_energy).sum();
        println!(
            "depth {depth}: {} cylinders, sum lambda_q = {lq}, sum lambda_x = {le}",
            rows.len()
        );
    }
    Ok(())
}
