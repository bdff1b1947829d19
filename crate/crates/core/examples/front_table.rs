//! Front errors in the classical limit `alpha = 1`, `D(u) = u`, against a
//! Richardson-extrapolated reference.
//!
//! `cargo run --release --example front_table [out_dir]`

use std::path::PathBuf;

use ekpme::analysis::{front_error_table, Reference};
use ekpme::{output, DiffusivityModel};

fn main() -> ekpme::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));
    let model = DiffusivityModel::power_law(1.0)?;
    let table = front_error_table(&[10, 50, 100, 200, 500, 1000], 1.0, &model, 1.0, Reference::default(), 4)?;
    println!("reference eta* = {:.12}", table.reference);
    let mut prev: Option<f64> = None;
    for row in &table.rows {
        let ratio = prev.map_or(String::new(), |p| format!("  ratio {:.2}", p / row.error));
        println!("N = {:<5} eta* = {:.12}  error {:.3e}{ratio}", row.n, row.eta_star, row.error);
        prev = Some(row.error);
    }
    output::write_front_table(output::create_file(&dir.join("front.csv"))?, &table)?;
    Ok(())
}
