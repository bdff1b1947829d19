//! Gamma, beta and the incomplete beta function used by the quadrature weights.
//!
//! `cargo run --example special_functions`

use ekpme::special::{beta, gamma, incomplete_beta, SpecialFnConfig};

fn main() -> ekpme::Result<()> {
    for x in [0.25, 0.5, 1.0, 1.5, 2.5] {
        println!("Gamma({x}) = {:.15}", gamma(x)?);
    }
    println!("B(0.75, 0.5) = {:.15}", beta(0.75, 0.5)?);

    // the weights need the unregularized B(z; a, b) with a = 1 - B, b = 1 - alpha
    let (a, b) = (0.75, 0.5);
    for z in [0.1, 0.5, 0.9, 0.999, 1.0] {
        println!("B({z}; {a}, {b}) = {:.15}", incomplete_beta(z, a, b)?);
    }

    // a looser tolerance trades digits for fewer continued-fraction terms
    let fast = SpecialFnConfig::new(1e-7, 60)?;
    let exact = incomplete_beta(0.4, 0.8, 0.3)?;
    let rough = fast.incomplete_beta(0.4, 0.8, 0.3)?;
    println!("tolerance 1e-7: {rough:.15} (relative difference {:.1e})", (rough - exact).abs() / exact);

    if let Err(e) = gamma(-1.0) {
        println!("gamma(-1): {e}");
    }
    Ok(())
}
