//! Shoots for the wetting front, writes the profile and reconstructs the
//! solution of the original equation at a few points.
//!
//! `cargo run --release --example solve_front [out_dir]`

use std::path::PathBuf;

use ekpme::solver::{apriori_bound, reconstruct_pde_solution};
use ekpme::{output, DiffusivityModel, Rule, Solver, SolverConfig};

fn main() -> ekpme::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));
    let model = DiffusivityModel::power_law(2.0)?;
    for rule in [Rule::Rectangle, Rule::Trapezoid] {
        let config = SolverConfig::new(0.5, 256, rule)?;
        let out = Solver::new(config.clone())?.shoot(1.0, &model)?;
        println!(
            "{}: eta* = {:.12}, |U(0) - 1| = {:.1e} after {} profiles",
            rule.label(),
            out.eta_star,
            out.residual,
            out.iterations
        );
        let bound = apriori_bound(out.eta_star, &config, &model)?;
        println!("    max U = {:.6} (a-priori bound {bound:.6})", out.profile.max());
        for &(x, t) in &[(0.5, 1.0), (1.0, 1.0), (1.0, 4.0)] {
            println!("    u({x}, {t}) = {:.6}", reconstruct_pde_solution(&out.profile, x, t)?);
        }
        let path = dir.join(format!("profile_{}.csv", rule.label()));
        output::write_profile(output::create_file(&path)?, &out.profile)?;
    }
    println!("profiles in {}", dir.display());
    Ok(())
}
