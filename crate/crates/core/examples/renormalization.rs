//! Exact renormalization constants and the spectrum of the corner-cell
//! extension matrices for the first few levels.
//!
//! ```text
//! cargo run --example renormalization
//! ```

use gasket::renorm::{spectral_data, verify_r_bounds};

fn main() -> gasket::Result<()> {
    println!("nu\tr\ts\t1/nu < r < N/nu^2");
    for nu in 2..=8 {
        let b = verify_r_bounds(nu)?;
        let s = spectral_data(nu)?.s;
        println!("{nu}\t{}\t{s}\t{}", b.r, if b.pass { "ok" } else { "FAIL" });
    }
    Ok(())
}
