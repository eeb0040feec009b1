//! Piecewise harmonic functions: the harmonic extension keeps the discrete
//! energy fixed, any other choice of interior values raises it, and energy
//! measures of piecewise data agree with the harmonic formula.

use gasket::measures::{
    energy_cylinder, finite_level_energy, piecewise_energy_cylinder, PiecewiseHarmonicSpec,
};
use gasket::numerics::{int, rat};
use gasket::{BoundaryVector, LabelRule};

fn main() -> gasket::Result<()> {
    let sg2 = LabelRule::constant(2)?;
    let x = BoundaryVector::new([int(1), int(0), rat(1, 2)]);
    for m in 0..=3 {
        let f = PiecewiseHarmonicSpec::harmonic(&sg2, &x, m)?;
        println!(
            "E^({m}) of the harmonic extension = {}",
            finite_level_energy(&f)?
        );
    }

    // p1 -> 1, everything else 0: not harmonic at level 1
    let spike = PiecewiseHarmonicSpec::from_vertex_values(&sg2, 1, |p| {
        if p.reduced().coords() == [1, 0, 0] {
            int(1)
        } else {
            int(0)
        }
    })?;
    println!(
        "E^(1) of the corner spike = {}",
        finite_level_energy(&spike)?
    );
    println!(
        "E^(0) of its boundary data = {}",
        BoundaryVector::from_i64(1, 0, 0).energy()
    );

    let alt = LabelRule::periodic(vec![3, 2])?;
    let f = PiecewiseHarmonicSpec::harmonic(&alt, &x, 1)?;
    let w = "4^3.2^2".parse()?;
    println!(
        "cylinder {w}: piecewise {} / harmonic {}",
        piecewise_energy_cylinder(&alt, &f, &w)?,
        energy_cylinder(&alt, &x, &w)?
    );
    Ok(())
}
