//! Empirical convergence order of the front position from three grids
//! `N, 2N, 4N`.
//!
//! `cargo run --release --example aitken_order [base_n] [out_dir]`

use std::path::PathBuf;

use ekpme::analysis::aitken_sweep;
use ekpme::{output, DiffusivityModel, Rule};

fn main() -> ekpme::Result<()> {
    let mut args = std::env::args().skip(1);
    let base_n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(300);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let alphas = [0.1, 0.25, 0.5, 0.75, 0.9];
    for (tag, model) in [("power_m_1", DiffusivityModel::power_law(1.0)?), ("exp", DiffusivityModel::exponential())] {
        let orders = aitken_sweep(&alphas, &model, base_n, 1.0, Rule::Rectangle, threads)?;
        println!("{model}");
        for o in &orders {
            println!(
                "    alpha {:<5} eta* {:.10} {:.10} {:.10}  order {:.3}",
                o.alpha, o.values[0], o.values[1], o.values[2], o.order
            );
        }
        output::write_orders(output::create_file(&dir.join(format!("order_{tag}.csv")))?, &orders)?;
    }
    Ok(())
}
