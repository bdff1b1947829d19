//! Product quadrature weights for the Erdelyi-Kober operator and their
//! action on a function with a closed-form operator value.
//!
//! `cargo run --example ek_weights`

use ekpme::ek::{analytic_test_pair, apply_ek, ek_weights, optimal_truncation, EkParams, EkWeightTable, RowStorage};
use ekpme::Rule;

fn main() -> ekpme::Result<()> {
    let alpha = 0.5;
    for rule in [Rule::Rectangle, Rule::Trapezoid] {
        let p = EkParams::new(alpha, rule)?;
        let row = ek_weights(4, 10, &p)?;
        let shown: Vec<String> = row.weights().iter().map(|w| format!("{w:.5}")).collect();
        println!("{} row 4 of 10: [{}]  sum {:.6}", rule.label(), shown.join(", "), row.sum());
    }

    // U(eta) = min(1, eta^2) at eta = 0.5, truncating at N = gamma n
    let pair = analytic_test_pair(2.0, alpha)?;
    let eta = 0.5;
    println!("\nexact F U({eta}) = {:.10}", pair.f(eta)?);
    for rule in [Rule::Rectangle, Rule::Trapezoid] {
        let p = EkParams::new(alpha, rule)?;
        for k in [3, 5, 7] {
            let h = 2f64.powi(-k);
            let n = (eta / h).round() as usize;
            let big_n = optimal_truncation(h, p.b, rule)? * n;
            let row = ek_weights(n, big_n, &p)?;
            let samples: Vec<f64> = (n..=big_n).map(|i| pair.u(i as f64 * h)).collect();
            let approx = apply_ek(&samples, &row)?;
            println!("{} h = 2^-{k}: {approx:.10}  error {:.2e}", rule.label(), (approx - pair.f(eta)?).abs());
        }
    }

    // a full table, cached in memory or regenerated row by row
    let table = EkWeightTable::new(256, EkParams::new(alpha, Rule::Trapezoid)?, RowStorage::Auto)?;
    println!("\n256-cell table cached: {}, row 100 length {}", table.is_cached(), table.row(100)?.len());
    Ok(())
}
