//! Plot-ready CSV writers.
//!
//! Every writer takes any `io::Write`; the `*_file` helpers create the
//! parent directory first. Floating point values are written in scientific
//! notation with 16 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::analysis::{ErrorCurve, FrontTable, OrderEstimate};
use crate::error::Result;
use crate::solver::{Profile, ShootingOutcome};

fn sci(v: f64) -> String {
    format!("{v:.15e}")
}

/// `eta,U`, one row per node.
pub fn write_profile<W: Write>(out: W, profile: &Profile) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eta", "U"])?;
    for (eta, u) in profile.points() {
        w.write_record([sci(eta), sci(u)])?;
    }
    w.flush()?;
    Ok(())
}

/// `eta_star,residual,iterations`.
pub fn write_summary<W: Write>(out: W, outcome: &ShootingOutcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eta_star", "residual", "iterations"])?;
    w.write_record([sci(outcome.eta_star), sci(outcome.residual), outcome.iterations.to_string()])?;
    w.flush()?;
    Ok(())
}

/// `h,error`.
pub fn write_error_curve<W: Write>(out: W, curve: &ErrorCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "error"])?;
    for &(h, e) in &curve.points {
        w.write_record([sci(h), sci(e)])?;
    }
    w.flush()?;
    Ok(())
}

/// `N,eta_star,error`.
pub fn write_front_table<W: Write>(out: W, table: &FrontTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "eta_star", "error"])?;
    for row in &table.rows {
        w.write_record([row.n.to_string(), sci(row.eta_star), sci(row.error)])?;
    }
    w.flush()?;
    Ok(())
}

/// `alpha,order`.
pub fn write_orders<W: Write>(out: W, orders: &[OrderEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "order"])?;
    for o in orders {
        w.write_record([o.alpha.to_string(), sci(o.order)])?;
    }
    w.flush()?;
    Ok(())
}

/// `alpha,tau`.
pub fn write_time_ratios<W: Write>(out: W, ratios: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "tau"])?;
    for &(a, t) in ratios {
        w.write_record([a.to_string(), sci(t)])?;
    }
    w.flush()?;
    Ok(())
}

/// Opens `path` for writing, creating missing parent directories.
pub fn create_file(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::File::create(path)?)
}
