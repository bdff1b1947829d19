//! Compares plain runs with runs on the floor-regularized diffusivity
//! `max(D, eps(h))`.
//!
//! `cargo run --release --example regularized_solve`

use ekpme::{DiffusivityModel, Regularization, Rule, Solver, SolverConfig};

fn main() -> ekpme::Result<()> {
    let model = DiffusivityModel::power_law(1.0)?;
    let plain = Solver::new(SolverConfig::new(0.5, 128, Rule::Rectangle)?)?.shoot(1.0, &model)?;
    println!("plain            eta* = {:.8}", plain.eta_star);
    for c in [0.001, 0.01, 0.05] {
        let config = SolverConfig::new(0.5, 128, Rule::Rectangle)?
            .with_regularization(Some(Regularization { c, delta: 0.5 }))?;
        match Solver::new(config)?.shoot(1.0, &model) {
            Ok(out) => println!("C = {c:<6}       eta* = {:.8}", out.eta_star),
            Err(e) => println!("C = {c:<6}       failed: {e}"),
        }
    }
    Ok(())
}
