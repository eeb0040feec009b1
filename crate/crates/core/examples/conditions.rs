//! Condition checkers: corner weights against resistance constants, and
//! finite-horizon evidence for coverage along level sequences.

use std::collections::BTreeMap;

use gasket::numerics::rat;
use gasket::words::{
    check_condition_a, check_condition_b_sufficient, check_star_event, sample_path, LevelSequence,
    SequenceTail,
};
use gasket::{LabelRule, LevelSet, WeightSystem};

fn main() -> gasket::Result<()> {
    let t2 = LevelSet::new([2])?;
    let uniform = WeightSystem::uniform(&t2);
    println!("uniform on SG(2): {:?}", check_condition_a(&t2, &uniform)?);
    let tuned = WeightSystem::from_levels([(2, vec![rat(3, 5), rat(1, 5), rat(1, 5)])])?;
    println!("q = (3/5,1/5,1/5): {:?}", check_condition_a(&t2, &tuned)?);

    let alt = LabelRule::periodic(vec![2, 3])?;
    println!(
        "alternating: {:?}",
        check_condition_b_sufficient(&alt, 1, 1, 100)?
    );

    // run lengths 1, 2, 3, ... of alternating levels
    let mut terms = Vec::new();
    for run in 1..=12 {
        terms.extend(std::iter::repeat_n(if run % 2 == 1 { 2 } else { 3 }, run));
    }
    let growing = LabelRule::sequence(
        LevelSet::new([2, 3])?,
        LevelSequence {
            terms,
            tail: SequenceTail::Constant(2),
        },
    )?;
    println!(
        "growing runs: {:?}",
        check_condition_b_sufficient(&growing, 1, 1, 60)?
    );

    let sg3 = LabelRule::constant(3)?;
    let q = WeightSystem::uniform(sg3.levels());
    let path = sample_path(&sg3, &q, 8, 1)?;
    let all = (0..=8).all(|k| check_star_event(&sg3, &path, k, 2, 2, 1).unwrap_or(false));
    println!("constant rule, path {path}: star event at every k = {all}");

    let mut table = BTreeMap::new();
    table.insert("1^2".parse()?, 2);
    let explicit = LabelRule::explicit(table, LabelRule::periodic(vec![2, 3])?)?;
    println!(
        "explicit override admissible children of 1^2: {}",
        explicit.admissible_children(&"1^2".parse()?)?.len()
    );
    Ok(())
}
