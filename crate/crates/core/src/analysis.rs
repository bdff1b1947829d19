//! Convergence experiments: operator error curves, Aitken order estimates,
//! wetting-front error tables and the trapezoid/rectangle timing ratio.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::diffusivity::DiffusivityModel;
use crate::ek::{analytic_test_pair, ek_weights, optimal_truncation, EkParams, Rule};
use crate::error::{Error, Result};
use crate::solver::{Solver, SolverConfig};

/// Maximal operator error against `h`, with the fitted log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub rule: Rule,
    pub alpha: f64,
    pub mu: f64,
    /// `(h, max_n |F U(η_n) - F̂ U(η_n)|)`, `h` strictly decreasing.
    pub points: Vec<(f64, f64)>,
    /// `None` with fewer than two points.
    pub slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Maximal error of the discrete operator on the test pair
/// `U(η) = min(1, η^μ)` over the nodes `η_n = n h ∈ [0, 1]`, truncating at
/// `N = γ n` with the optimal factor `γ`.
pub fn ek_max_error(alpha: f64, mu: f64, h: f64, rule: Rule) -> Result<f64> {
    let pair = analytic_test_pair(mu, alpha)?;
    let params = EkParams::new(alpha, rule)?;
    let gamma = optimal_truncation(h, params.b, rule)?;
    let n_max = (1.0 / h).round() as usize;
    let worst = Mutex::new(0.0f64);
    let failure = Mutex::new(None);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| {
                let mut local = 0.0f64;
                loop {
                    let n = next.fetch_add(1, Ordering::Relaxed);
                    if n > n_max {
                        break;
                    }
                    match node_error(&pair, &params, n, gamma * n, h) {
                        Ok(e) => local = local.max(e),
                        Err(e) => {
                            *failure.lock().unwrap() = Some(e);
                            break;
                        }
                    }
                }
                let mut w = worst.lock().unwrap();
                *w = w.max(local);
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(worst.into_inner().unwrap())
}

fn node_error(pair: &crate::ek::AnalyticPair, params: &EkParams, n: usize, big_n: usize, h: f64) -> Result<f64> {
    let row = ek_weights(n, big_n, params)?;
    let approx: f64 = row
        .weights()
        .iter()
        .enumerate()
        .map(|(k, w)| w * pair.u((n + k) as f64 * h))
        .sum();
    Ok((pair.f(n as f64 * h)? - approx).abs())
}

/// Error curve over `h_list` (sorted into decreasing order).
pub fn ek_error_curve(alpha: f64, mu: f64, h_list: &[f64], rule: Rule) -> Result<ErrorCurve> {
    let mut hs = h_list.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    hs.dedup();
    let points = hs
        .iter()
        .map(|&h| Ok((h, ek_max_error(alpha, mu, h, rule)?)))
        .collect::<Result<Vec<_>>>()?;
    let slope = loglog_slope(&points);
    Ok(ErrorCurve {
        rule,
        alpha,
        mu,
        points,
        slope,
    })
}

/// Error bound `(max|U| + max|U'|) h / Γ(2-α)` for the rectangle rule,
/// evaluated for the test pair on `[0, 1]` where `max|U| = 1`, `max|U'| = μ`.
pub fn rectangle_error_bound(alpha: f64, mu: f64, h: f64) -> f64 {
    (1.0 + mu) * h / crate::special::gamma_pos(2.0 - alpha)
}

/// Empirical order `log₂ |v_2N - v_N| / |v_4N - v_2N|`.
pub fn aitken_order(v_n: f64, v_2n: f64, v_4n: f64) -> Result<f64> {
    let (d1, d2) = ((v_2n - v_n).abs(), (v_4n - v_2n).abs());
    if d2 == 0.0 || d1 == 0.0 {
        return Err(Error::DivisionByZero(format!(
            "successive values coincide ({v_n}, {v_2n}, {v_4n})"
        )));
    }
    Ok((d1 / d2).log2())
}

/// Front positions at `N`, `2N`, `4N` and the resulting order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub alpha: f64,
    pub base_n: usize,
    pub values: [f64; 3],
    pub order: f64,
}

/// Maps `f` over `items` on up to `threads` workers (0 or 1: sequential),
/// preserving order.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(items.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= items.len() {
                    break;
                }
                let r = f(&items[k]);
                *slots[k].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every item is mapped"))
        .collect()
}

/// Shoots for `M` at `N`, `2N`, `4N` and estimates the order, for each `α`.
/// The runs are independent and spread over `threads` workers.
pub fn aitken_sweep(
    alphas: &[f64],
    model: &DiffusivityModel,
    base_n: usize,
    mass: f64,
    rule: Rule,
    threads: usize,
) -> Result<Vec<OrderEstimate>> {
    let jobs: Vec<(f64, usize)> = alphas
        .iter()
        .flat_map(|&a| [base_n, 2 * base_n, 4 * base_n].map(|n| (a, n)))
        .collect();
    // largest grids first so the slowest runs start early
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(jobs[k].1));
    let sorted: Vec<(f64, usize)> = order.iter().map(|&k| jobs[k]).collect();
    let fronts = parallel_map(&sorted, threads, |&(alpha, n)| -> Result<f64> {
        let cfg = SolverConfig::new(alpha, n, rule)?;
        Ok(Solver::new(cfg)?.shoot(mass, model)?.eta_star)
    });
    let mut by_job = vec![0.0; jobs.len()];
    for (k, r) in order.into_iter().zip(fronts) {
        by_job[k] = r?;
    }
    alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let values = [by_job[3 * k], by_job[3 * k + 1], by_job[3 * k + 2]];
            Ok(OrderEstimate {
                alpha,
                base_n,
                values,
                order: aitken_order(values[0], values[1], values[2])?,
            })
        })
        .collect()
}

/// Reference front for the error table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// First-order Richardson extrapolation `2 η*_fine - η*_coarse`
    /// with `fine = 2 coarse`.
    Richardson { coarse: usize, fine: usize },
    Value(f64),
}

impl Default for Reference {
    fn default() -> Self {
        Reference::Richardson {
            coarse: 2000,
            fine: 4000,
        }
    }
}

impl std::str::FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Reference::default());
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v > 0.0)
            .map(Reference::Value)
            .ok_or_else(|| Error::Parse {
                pos: 0,
                msg: format!("expected 'auto' or a positive number, got '{s}'"),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontRow {
    pub n: usize,
    pub eta_star: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontTable {
    pub reference: f64,
    pub rows: Vec<FrontRow>,
}

/// Front for one grid size; the rectangle rule is the only one defined at `α = 1`.
pub fn front_at(n: usize, alpha: f64, model: &DiffusivityModel, mass: f64, rule: Rule) -> Result<f64> {
    let cfg = SolverConfig::new(alpha, n, rule)?;
    Ok(Solver::new(cfg)?.shoot(mass, model)?.eta_star)
}

/// `|η*_(N) - reference|` for every `N` in `n_list`.
pub fn front_error_table(
    n_list: &[usize],
    alpha: f64,
    model: &DiffusivityModel,
    mass: f64,
    reference: Reference,
    threads: usize,
) -> Result<FrontTable> {
    let mut all: Vec<usize> = n_list.to_vec();
    if let Reference::Richardson { coarse, fine } = reference {
        if fine <= coarse {
            return Err(Error::domain(format!(
                "Richardson grids must satisfy fine > coarse, got {coarse} and {fine}"
            )));
        }
        all.extend([coarse, fine]);
    }
    all.sort_unstable_by(|a, b| b.cmp(a));
    all.dedup();
    let fronts = parallel_map(&all, threads, |&n| front_at(n, alpha, model, mass, Rule::Rectangle));
    let mut lookup = std::collections::HashMap::new();
    for (n, r) in all.iter().zip(fronts) {
        lookup.insert(*n, r?);
    }
    let reference = match reference {
        Reference::Value(v) => v,
        Reference::Richardson { coarse, fine } => {
            let r = fine as f64 / coarse as f64;
            (r * lookup[&fine] - lookup[&coarse]) / (r - 1.0)
        }
    };
    let rows = n_list
        .iter()
        .map(|n| {
            let eta_star = lookup[n];
            FrontRow {
                n: *n,
                eta_star,
                error: (eta_star - reference).abs(),
            }
        })
        .collect();
    Ok(FrontTable { reference, rows })
}

/// Wall time of one full front computation, weights included.
fn time_front(alpha: f64, model: &DiffusivityModel, n: usize, rule: Rule) -> Result<Duration> {
    let start = Instant::now();
    let cfg = SolverConfig::new(alpha, n, rule)?;
    Solver::new(cfg)?.shoot(1.0, model)?;
    Ok(start.elapsed())
}

/// Best of three timings after one discarded run.
fn best_time(alpha: f64, model: &DiffusivityModel, n: usize, rule: Rule) -> Result<Duration> {
    time_front(alpha, model, n, rule)?;
    let mut best = Duration::MAX;
    for _ in 0..3 {
        best = best.min(time_front(alpha, model, n, rule)?);
    }
    Ok(best)
}

/// `τ = T_trapezoid / T_rectangle` for the full wetting-front computation.
/// Runs sequentially so that the two rules do not compete for cores.
pub fn time_ratio(alpha: f64, model: &DiffusivityModel, n: usize) -> Result<f64> {
    let trap = best_time(alpha, model, n, Rule::Trapezoid)?;
    let rect = best_time(alpha, model, n, Rule::Rectangle)?;
    Ok(trap.as_secs_f64() / rect.as_secs_f64().max(1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn aitken_examples() {
        assert_relative_eq!(aitken_order(1.0, 1.5, 1.75).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(aitken_order(1.0, 1.25, 1.3125).unwrap(), 2.0, epsilon = 1e-14);
        assert!(matches!(aitken_order(1.0, 2.0, 2.0), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn slope_of_power() {
        let pts: Vec<(f64, f64)> = (4..10).map(|k| (2f64.powi(-k), 3.0 * 4f64.powi(-k))).collect();
        assert_relative_eq!(loglog_slope(&pts).unwrap(), 2.0, epsilon = 1e-12);
        assert!(loglog_slope(&pts[..1]).is_none());
    }

    #[test]
    fn reference_parsing() {
        assert_eq!("auto".parse::<Reference>().unwrap(), Reference::default());
        assert_eq!("1.5".parse::<Reference>().unwrap(), Reference::Value(1.5));
        assert!("abc".parse::<Reference>().is_err());
    }

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..50).collect();
        let out = parallel_map(&items, 4, |x| x * x);
        assert_eq!(out, items.iter().map(|x| x * x).collect::<Vec<_>>());
    }
}
