//! Draws the depth-3 alternating gasket colored by the log density ratio of
//! the harmonic energy measure against the uniform reference measure.
//!
//! ```text
//! cargo run --example render_svg -- gasket.svg
//! ```

use gasket::cli::render::{render_svg, Coloring};
use gasket::numerics::{int, rat};
use gasket::words::DEFAULT_ENUM_CEILING;
use gasket::{BoundaryVector, LabelRule, WeightSystem};

fn main() -> gasket::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "gasket.svg".into());
    let rule = LabelRule::periodic(vec![2, 3])?;
    let q = WeightSystem::uniform(rule.levels());
    let x = BoundaryVector::new([rat(1, 2), int(0), int(0)]);
    let svg = render_svg(
        &rule,
        &q,
        Some(&x),
        3,
        Coloring::Ratio,
        DEFAULT_ENUM_CEILING,
    )?;
    std::fs::write(&out, &svg).map_err(|source| gasket::GasketError::Io {
        path: out.clone().into(),
        source,
    })?;
    println!(
        "wrote {out} ({} triangles)",
        svg.matches("<polygon").count()
    );
    Ok(())
}
