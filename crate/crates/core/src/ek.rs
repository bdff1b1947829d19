//! Product quadratures for the Erdélyi-Kober operator
//!
//! ```text
//! F_α U(η) = 1/Γ(1-α) ∫₀¹ (1-s)^{-α} U(s^{-B} η) ds
//! ```
//!
//! on the uniform grid `η_n = n h`. The operator is forward-nonlocal: its
//! value at `η_n` depends on `U` over `[η_n, ∞)`, which is truncated at
//! `η_N`. With the substitution `z = s^{-B} η_n` the cell `[η_i, η_{i+1}]`
//! maps to `s ∈ [((i+1)/n)^{-1/B}, (i/n)^{-1/B}]`, and the weights are the
//! exact integrals of the kernel against a piecewise constant (rectangle,
//! right endpoint) or piecewise linear (trapezoid) interpolant of `U`.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::special::{gamma_pos, SpecialFnConfig};

/// Product quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Piecewise constant, right endpoint. First order.
    Rectangle,
    /// Piecewise linear. Second order.
    Trapezoid,
}

impl Rule {
    pub fn label(self) -> &'static str {
        match self {
            Rule::Rectangle => "rect",
            Rule::Trapezoid => "trap",
        }
    }
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" | "rectangle" => Ok(Rule::Rectangle),
            "trap" | "trapezoid" => Ok(Rule::Trapezoid),
            _ => Err(Error::Parse {
                pos: 0,
                msg: format!("unknown rule '{s}', expected 'rect' or 'trap'"),
            }),
        }
    }
}

/// Uniform grid `η_n = n h`, `n = 0..=N`, with `h = η*/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    eta_star: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(eta_star: f64, n: usize) -> Result<Self> {
        if !(eta_star > 0.0 && eta_star.is_finite()) {
            return Err(Error::domain(format!("eta_star must be positive, got {eta_star}")));
        }
        if n < 2 {
            return Err(Error::domain(format!("grid needs N >= 2, got {n}")));
        }
        Ok(Self {
            eta_star,
            n,
            h: eta_star / n as f64,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Index of the last node.
    pub fn last(&self) -> usize {
        self.n
    }

    pub fn eta_star(&self) -> f64 {
        self.eta_star
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.eta_star
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|i| self.node(i))
    }
}

/// Order, scaling constants and rule of the operator. `A` does not enter
/// the operator itself but travels with it into the profile equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkParams {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub rule: Rule,
}

impl EkParams {
    /// Defaults `A = 1 - α`, `B = α/2`.
    pub fn new(alpha: f64, rule: Rule) -> Result<Self> {
        Self::with_constants(alpha, 1.0 - alpha, alpha / 2.0, rule)
    }

    pub fn with_constants(alpha: f64, a: f64, b: f64, rule: Rule) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0,1], got {alpha}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::domain(format!("B must be positive, got {b}")));
        }
        if !a.is_finite() {
            return Err(Error::domain(format!("A must be finite, got {a}")));
        }
        if rule == Rule::Trapezoid {
            if alpha >= 1.0 {
                return Err(Error::domain("trapezoid rule requires alpha < 1"));
            }
            if b >= 1.0 {
                return Err(Error::domain(format!("trapezoid rule requires B < 1, got {b}")));
            }
        }
        Ok(Self { alpha, a, b, rule })
    }

    /// `1/Γ(2-α)`, the value of the operator on the constant one.
    pub fn unit_value(&self) -> f64 {
        1.0 / gamma_pos(2.0 - self.alpha)
    }
}

/// One row `a_{in}`, `i = n..=N`, of the discrete operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EkWeightRow {
    n: usize,
    weights: Vec<f64>,
}

impl EkWeightRow {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Index of the truncation node `N`.
    pub fn last(&self) -> usize {
        self.n + self.weights.len() - 1
    }

    /// Weights for `i = n..=N`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `a_{in}`; zero outside `n..=N`.
    pub fn get(&self, i: usize) -> f64 {
        if i < self.n {
            0.0
        } else {
            self.weights.get(i - self.n).copied().unwrap_or(0.0)
        }
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Truncation factor `γ`, so that `N = γ n` balances truncation and
/// interpolation error: `[h^{-B}] + 1` (rectangle), `[h^{-2B}] + 1`
/// (trapezoid).
pub fn optimal_truncation(h: f64, b: f64, rule: Rule) -> Result<usize> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::domain(format!("truncation needs 0 < h < 1, got {h}")));
    }
    if !(b > 0.0) {
        return Err(Error::domain(format!("B must be positive, got {b}")));
    }
    let exponent = match rule {
        Rule::Rectangle => b,
        Rule::Trapezoid => 2.0 * b,
    };
    let x = h.powf(-exponent);
    // values within rounding of an integer (h = 0.01 is not exact in binary) snap to it
    let r = x.round();
    let int_part = if (x - r).abs() <= 1e-9 * r { r } else { x.floor() };
    Ok(int_part as usize + 1)
}

/// `1 - (i/n)^{-1/B}` without cancellation for `i` close to `n`.
fn one_minus_ratio_pow(i: usize, n: usize, inv_b: f64) -> f64 {
    let log_ratio = ((i - n) as f64 / n as f64).ln_1p();
    -(-inv_b * log_ratio).exp_m1()
}

fn check_row_index(n: usize, big_n: usize) -> Result<()> {
    if n > big_n {
        return Err(Error::Index {
            what: "row index n",
            index: n,
            bound: big_n,
        });
    }
    Ok(())
}

/// Row `n` of the rectangle (right endpoint) weights.
///
/// For `n > 0`, `n < i ≤ N`:
/// `a_{in} = [(1-(i/n)^{-1/B})^{1-α} - (1-((i-1)/n)^{-1/B})^{1-α}] / Γ(2-α)`,
/// `a_{nn} = 0`. Row zero is `1/Γ(2-α)` on `U(0)` only. At `α = 1` the
/// limit is taken: the row selects the right neighbour `U_{n+1}`.
pub fn rectangle_weights(n: usize, big_n: usize, params: &EkParams) -> Result<EkWeightRow> {
    check_row_index(n, big_n)?;
    let len = big_n - n + 1;
    let mut weights = vec![0.0; len];
    if n == 0 {
        weights[0] = params.unit_value();
        return Ok(EkWeightRow { n, weights });
    }
    if params.alpha >= 1.0 {
        if len > 1 {
            weights[1] = 1.0;
        }
        return Ok(EkWeightRow { n, weights });
    }
    let inv_b = 1.0 / params.b;
    let expo = 1.0 - params.alpha;
    let scale = params.unit_value();
    let mut prev = 0.0;
    for (k, w) in weights.iter_mut().enumerate().skip(1) {
        let t = one_minus_ratio_pow(n + k, n, inv_b).powf(expo);
        *w = (t - prev) * scale;
        prev = t;
    }
    Ok(EkWeightRow { n, weights })
}

/// Row `n` of the trapezoid (piecewise linear) weights:
///
/// ```text
/// a_{nn} = a^{(r)}_{(n+1)n} - d_{nn}
/// a_{in} = d_{(i-1)n} - d_{in} + a^{(r)}_{(i+1)n},   n < i < N
/// a_{Nn} = d_{(N-1)n}
/// d_{in} = n/Γ(1-α) [β((i/n)^{-1/B}) - β(((i+1)/n)^{-1/B})] - i a^{(r)}_{(i+1)n}
/// ```
///
/// with `β(·) = β(·; 1-B, 1-α)`. `d_{in}` is the weight the linear
/// interpolant on `[η_i, η_{i+1}]` puts on `U_{i+1}`.
pub fn trapezoid_weights(n: usize, big_n: usize, params: &EkParams) -> Result<EkWeightRow> {
    trapezoid_weights_with(n, big_n, params, &SpecialFnConfig::default())
}

pub fn trapezoid_weights_with(
    n: usize,
    big_n: usize,
    params: &EkParams,
    special: &SpecialFnConfig,
) -> Result<EkWeightRow> {
    check_row_index(n, big_n)?;
    if params.alpha >= 1.0 {
        return Err(Error::domain("trapezoid rule requires alpha < 1"));
    }
    if params.b >= 1.0 {
        return Err(Error::domain(format!("trapezoid rule requires B < 1, got {}", params.b)));
    }
    let len = big_n - n + 1;
    let mut weights = vec![0.0; len];
    if n == 0 {
        weights[0] = params.unit_value();
        return Ok(EkWeightRow { n, weights });
    }
    if n == big_n {
        // empty truncated integral
        return Ok(EkWeightRow { n, weights });
    }
    let inv_b = 1.0 / params.b;
    let alpha = params.alpha;
    let expo = 1.0 - alpha;
    let gamma_2 = gamma_pos(2.0 - alpha);
    let gamma_1 = gamma_pos(1.0 - alpha);
    let (pa, pb) = (1.0 - params.b, 1.0 - alpha);

    // t_k = (1 - s_{n+k})^{1-α}, incomplete betas at s_{n+k}, k = 0..len-1
    let mut t = Vec::with_capacity(len);
    let mut betas = Vec::with_capacity(len);
    for k in 0..len {
        let i = n + k;
        let sc = if k == 0 { 0.0 } else { one_minus_ratio_pow(i, n, inv_b) };
        let s = if k == 0 { 1.0 } else { (-inv_b * (k as f64 / n as f64).ln_1p()).exp() };
        t.push(if k == 0 { 0.0 } else { sc.powf(expo) });
        betas.push(special.incomplete_beta_split(s, sc, pa, pb)?);
    }
    // cell k is [η_{n+k}, η_{n+k+1}], k = 0..len-2
    let cells = len - 1;
    let mut rect = Vec::with_capacity(cells);
    let mut d = Vec::with_capacity(cells);
    for k in 0..cells {
        let r = (t[k + 1] - t[k]) / gamma_2;
        let j = n as f64 * (betas[k] - betas[k + 1]) / gamma_1;
        rect.push(r);
        d.push(j - (n + k) as f64 * r);
    }
    weights[0] = rect[0] - d[0];
    for k in 1..cells {
        weights[k] = d[k - 1] - d[k] + rect[k];
    }
    weights[cells] = d[cells - 1];
    // every weight is a sum of non-negative cell integrals; far-tail cells
    // lose their last digits to cancellation, so rounding noise is projected
    // back onto the sign constraint (genuine negatives are left visible)
    let noise = 64.0 * f64::EPSILON * params.unit_value() * len as f64;
    for w in &mut weights {
        if *w < 0.0 && *w > -noise {
            *w = 0.0;
        }
    }
    Ok(EkWeightRow { n, weights })
}

/// Row `n` for whichever rule `params` selects.
pub fn ek_weights(n: usize, big_n: usize, params: &EkParams) -> Result<EkWeightRow> {
    match params.rule {
        Rule::Rectangle => rectangle_weights(n, big_n, params),
        Rule::Trapezoid => trapezoid_weights(n, big_n, params),
    }
}

/// `F̂_{α,N} U(η_n) = Σ_{i=n}^N a_{in} U(η_i)`; `samples` holds `U(η_i)` for `i = n..=N`.
pub fn apply_ek(samples: &[f64], row: &EkWeightRow) -> Result<f64> {
    if samples.len() != row.weights.len() {
        return Err(Error::LengthMismatch {
            expected: row.weights.len(),
            actual: samples.len(),
        });
    }
    Ok(dot(samples, &row.weights))
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Where rows of an [`EkWeightTable`] live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowStorage {
    /// Keep the full triangle in memory.
    Cached,
    /// Regenerate each row on request.
    Streaming,
    /// Cache up to [`EkWeightTable::AUTO_CACHE_LIMIT`] weights, stream beyond.
    #[default]
    Auto,
}

/// All rows `n = 0..=N` of one discrete operator. Rows do not depend on
/// `h`, so a table is reusable across grids with the same `N`.
#[derive(Debug, Clone)]
pub struct EkWeightTable {
    params: EkParams,
    big_n: usize,
    rows: Option<Vec<EkWeightRow>>,
}

impl EkWeightTable {
    pub const AUTO_CACHE_LIMIT: usize = 1 << 24;

    pub fn new(big_n: usize, params: EkParams, storage: RowStorage) -> Result<Self> {
        let entries = (big_n + 1) * (big_n + 2) / 2;
        let cache = match storage {
            RowStorage::Cached => true,
            RowStorage::Streaming => false,
            RowStorage::Auto => entries <= Self::AUTO_CACHE_LIMIT,
        };
        let rows = if cache {
            Some(build_rows(big_n, &params)?)
        } else {
            // validate the parameters once up front
            ek_weights(big_n, big_n, &params)?;
            None
        };
        Ok(Self { params, big_n, rows })
    }

    pub fn params(&self) -> &EkParams {
        &self.params
    }

    pub fn last(&self) -> usize {
        self.big_n
    }

    pub fn is_cached(&self) -> bool {
        self.rows.is_some()
    }

    pub fn row(&self, n: usize) -> Result<Cow<'_, EkWeightRow>> {
        check_row_index(n, self.big_n)?;
        match &self.rows {
            Some(rows) => Ok(Cow::Borrowed(&rows[n])),
            None => Ok(Cow::Owned(ek_weights(n, self.big_n, &self.params)?)),
        }
    }
}

/// Rows are independent; large tables are generated on scoped threads.
fn build_rows(big_n: usize, params: &EkParams) -> Result<Vec<EkWeightRow>> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    if big_n < 512 || threads == 1 {
        return (0..=big_n).map(|n| ek_weights(n, big_n, params)).collect();
    }
    type Slot = Option<Result<EkWeightRow>>;
    let mut slots: Vec<Slot> = vec![None; big_n + 1];
    std::thread::scope(|scope| {
        // interleave rows so that long and short rows are spread evenly
        let mut buckets: Vec<Vec<(usize, &mut Slot)>> =
            (0..threads).map(|_| Vec::new()).collect();
        for (n, slot) in slots.iter_mut().enumerate() {
            buckets[n % threads].push((n, slot));
        }
        for bucket in buckets {
            scope.spawn(move || {
                for (n, slot) in bucket {
                    *slot = Some(ek_weights(n, big_n, params));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every row is generated")).collect()
}

/// `U(η) = min(1, η^μ)` with its closed-form operator value (`B = α/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPair {
    pub mu: f64,
    pub alpha: f64,
    gamma_ratio: f64,
    gamma_2: f64,
    gamma_1: f64,
}

/// Test function with a known operator value, for order verification.
pub fn analytic_test_pair(mu: f64, alpha: f64) -> Result<AnalyticPair> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain(format!("mu must be positive, got {mu}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("analytic pair needs alpha in (0,1), got {alpha}")));
    }
    let g_num = 1.0 - alpha * mu / 2.0;
    let g_den = 2.0 - alpha * (2.0 + mu) / 2.0;
    if g_num <= 0.0 || g_den <= 0.0 {
        return Err(Error::domain(format!(
            "closed form needs alpha*mu/2 < 1 (got alpha = {alpha}, mu = {mu})"
        )));
    }
    Ok(AnalyticPair {
        mu,
        alpha,
        gamma_ratio: gamma_pos(g_num) / gamma_pos(g_den),
        gamma_2: gamma_pos(2.0 - alpha),
        gamma_1: gamma_pos(1.0 - alpha),
    })
}

impl AnalyticPair {
    pub fn b(&self) -> f64 {
        self.alpha / 2.0
    }

    pub fn u(&self, eta: f64) -> f64 {
        if eta >= 1.0 {
            1.0
        } else {
            eta.powf(self.mu)
        }
    }

    /// Closed-form `F_α U(η)`.
    pub fn f(&self, eta: f64) -> Result<f64> {
        if eta < 0.0 {
            return Err(Error::domain(format!("eta must be non-negative, got {eta}")));
        }
        if eta >= 1.0 {
            return Ok(1.0 / self.gamma_2);
        }
        if eta == 0.0 {
            return Ok(0.0);
        }
        let alpha = self.alpha;
        let inv_b = 2.0 / alpha;
        let z = (inv_b * eta.ln()).exp();
        let zc = -(inv_b * eta.ln()).exp_m1();
        let first = (1.0 - zc.powf(1.0 - alpha)) / self.gamma_2;
        let inc = SpecialFnConfig::default().incomplete_beta_split(z, zc, 1.0 - alpha * self.mu / 2.0, 1.0 - alpha)?;
        Ok(first + eta.powf(self.mu) * (self.gamma_ratio - inc / self.gamma_1))
    }
}
