//! Wall-clock ratio of a full trapezoid computation over a rectangle one
//! (best of three runs each).
//!
//! `cargo run --release --example bench [n]`

use ekpme::analysis::time_ratio;
use ekpme::DiffusivityModel;

fn main() -> ekpme::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let model = DiffusivityModel::power_law(2.0)?;
    for alpha in [0.1, 0.5, 0.9] {
        println!("alpha {alpha}: tau = {:.2}", time_ratio(alpha, &model, n)?);
    }
    Ok(())
}
