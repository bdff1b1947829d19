//! Diffusivity models: evaluation, the integral K and its inverse,
//! admissibility for compact support, and the floor regularization.
//!
//! `cargo run --example diffusivity_models`

use ekpme::{Diffusivity, DiffusivityModel};

fn main() -> ekpme::Result<()> {
    let models: Vec<DiffusivityModel> = vec![
        "power:m=1".parse()?,
        "power:m=2".parse()?,
        "exp".parse()?,
        DiffusivityModel::custom("cubic", |u| u * u * u)?,
    ];

    println!("{:<13} {:>12} {:>12} {:>12}", "model", "D(0.5)", "K(0.5)", "K^-1(K(0.5))");
    for m in &models {
        let k = m.eval_k(0.5)?;
        println!("{:<13} {:>12.6} {:>12.6} {:>12.6}", m.to_string(), m.eval_d(0.5)?, k, m.invert_k(k)?);
    }

    println!();
    for m in &models {
        let adm = m.check_admissible();
        match adm.integral {
            Some(v) if adm.admissible => println!("{m}: admissible, int_0^1 D(s)/s ds = {v:.6}"),
            _ => println!("{m}: not admissible"),
        }
    }
    let slow = DiffusivityModel::custom("log", |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            1.0 / (1.0 + (1.0 / u).ln_1p())
        }
    })?;
    println!("{slow}: admissible = {}", slow.check_admissible().admissible);

    // D_h = max(D, eps(h)) with eps(h) = C eta* / (delta ln(1/h))
    let base = DiffusivityModel::power_law(2.0)?;
    println!();
    for h in [1e-2, 1e-4, 1e-8] {
        let reg = base.regularize(h, 1.0, 0.1, 0.5)?;
        println!(
            "h = {h:e}: floor {:.4e}, D_h(0) = {:.4e}, D_h(1) = {:.4}",
            reg.epsilon(),
            reg.d(0.0),
            reg.d(1.0)
        );
    }
    Ok(())
}
