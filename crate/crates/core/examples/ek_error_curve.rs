//! Maximal operator error against the step size for both rules, with fitted
//! log-log slopes. Writes `h,error` CSV files for plotting.
//!
//! `cargo run --release --example ek_error_curve [out_dir]`

use std::path::PathBuf;

use ekpme::analysis::{ek_error_curve, rectangle_error_bound};
use ekpme::{output, Rule};

fn main() -> ekpme::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));
    let hs: Vec<f64> = (4..=9).map(|k| 2f64.powi(-k)).collect();
    for &alpha in &[0.25, 0.5, 0.75] {
        for rule in [Rule::Rectangle, Rule::Trapezoid] {
            let curve = ek_error_curve(alpha, 2.0, &hs, rule)?;
            let slope = curve.slope.map_or("NA".into(), |s| format!("{s:.3}"));
            println!("alpha {alpha} {}: slope {slope}", rule.label());
            if rule == Rule::Rectangle {
                for &(h, e) in &curve.points {
                    println!("    h = {h:<12} error {e:.3e}  bound {:.3e}", rectangle_error_bound(alpha, 2.0, h));
                }
            }
            let path = dir.join(format!("ek_error_a{alpha}_{}.csv", rule.label()));
            output::write_error_curve(output::create_file(&path)?, &curve)?;
        }
    }
    println!("CSV files in {}", dir.display());
    Ok(())
}
