//! The level-1 network of SG(3): its vertices, Laplacian and the trace on
//! the three corners, which equals r(3) times the corner form.

use gasket::geometry::build_level_one_network;
use gasket::numerics::schur_decomposition;
use gasket::renorm::{corner_operator, renormalization_constant};

fn main() -> gasket::Result<()> {
    let net = build_level_one_network(3)?;
    println!(
        "{} vertices, {} cells",
        net.vertices.len(),
        net.cell_vertices.len()
    );
    for (k, p) in net.vertices.iter().enumerate() {
        println!("  v{k} = {p}");
    }
    println!("Laplacian:\n{}", net.laplacian);

    let parts = schur_decomposition(&net.laplacian, &net.boundary_indices)?;
    println!("trace on corners:\n{}", parts.trace);
    let r = renormalization_constant(3)?;
    let expected = corner_operator().scale(&-&r);
    println!(
        "equals -r(3) D with r(3) = {r}: {}",
        parts.trace == expected
    );
    Ok(())
}
