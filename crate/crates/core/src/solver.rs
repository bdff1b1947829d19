//! Backward η-stepping for the self-similar profile equation
//!
//! ```text
//! K(U(η)) = ∫_η^{η*} G(η, z) F_α U(z) dz,   G(η, z) = (A+B)(z-η) + B z
//! ```
//!
//! and shooting on the front position `η*` so that `U(0) = M`.
//!
//! Both integrals are discretized by product quadrature. The outer integral
//! uses kernel weights `b_{jn}`, the operator `F_α` the weights `a_{in}` of
//! [`crate::ek`]. The rectangle scheme evaluates `F̂U` at the left node of
//! each kernel cell, which is known from earlier steps, so every `U_n` with
//! `n > 0` follows from a single inversion of `K`. The trapezoid scheme pairs
//! nodes with themselves and solves a scalar equation per node.

use std::borrow::Cow;

use log::warn;

use crate::diffusivity::{Diffusivity, DiffusivityModel, RegularizedModel};
use crate::ek::{dot, EkParams, EkWeightRow, EkWeightTable, Grid, RowStorage, Rule};
use crate::error::{Error, Result};
use crate::roots::{grow_upper, newton_bisect};
use crate::special::gamma_pos;

/// Kernel weights `b_{jn}`, `j = n..=N`, for the outer integral at `η_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeightRow {
    n: usize,
    rule: Rule,
    weights: Vec<f64>,
}

impl KernelWeightRow {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    /// Weights for `j = n..=N`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `b_{jn}`; zero outside `n..=N`.
    pub fn get(&self, j: usize) -> f64 {
        if j < self.n {
            0.0
        } else {
            self.weights.get(j - self.n).copied().unwrap_or(0.0)
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn check_kernel_args(n: usize, big_n: usize, h: f64) -> Result<()> {
    if n > big_n {
        return Err(Error::Index {
            what: "row index n",
            index: n,
            bound: big_n,
        });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("grid spacing must be positive, got {h}")));
    }
    Ok(())
}

/// Rectangle kernel row: `b_{nn} = 0` and, for `j > n`,
/// `b_{jn} = (h²/2)((A+2B)(2j-1) - 2(A+B)n)`, the exact integral of
/// `G(η_n, ·)` over the cell `[η_{j-1}, η_j]`.
pub fn kernel_weights_rect(n: usize, big_n: usize, h: f64, a: f64, b: f64) -> Result<KernelWeightRow> {
    check_kernel_args(n, big_n, h)?;
    let half_h2 = 0.5 * h * h;
    let (slope, offset) = (a + 2.0 * b, 2.0 * (a + b) * n as f64);
    let weights = (n..=big_n)
        .map(|j| {
            if j == n {
                0.0
            } else {
                half_h2 * (slope * (2 * j - 1) as f64 - offset)
            }
        })
        .collect();
    Ok(KernelWeightRow {
        n,
        rule: Rule::Rectangle,
        weights,
    })
}

/// Rectangle weight for cell `[η_{j-1}, η_j]`, also valid for `j = n + 1`.
fn rect_cell(j: usize, n: usize, h: f64, a: f64, b: f64) -> f64 {
    0.5 * h * h * ((a + 2.0 * b) * (2 * j - 1) as f64 - 2.0 * (a + b) * n as f64)
}

/// Share of cell `[η_j, η_{j+1}]` falling on its right node `F_{j+1}`.
fn trap_right_share(j: usize, n: usize, h: f64, a: f64, b: f64) -> f64 {
    h * h / 6.0 * ((a + 2.0 * b) * (3 * j + 2) as f64 - 3.0 * (a + b) * n as f64)
}

/// Trapezoid kernel row, obtained by integrating `G(η_n, ·)` against the
/// piecewise linear interpolant of `F̂U`:
///
/// ```text
/// b_{nn} = b^{(r)}_{(n+1)n} - d̂_{nn}
/// b_{jn} = d̂_{(j-1)n} - d̂_{jn} + b^{(r)}_{(j+1)n},   n < j < N
/// b_{Nn} = d̂_{(N-1)n}
/// d̂_{jn} = (h²/6)((A+2B)(3j+2) - 3(A+B)n)
/// ```
///
/// All entries are non-negative; `b_{nn} = h²(A + 2B + 3Bn)/6`.
pub fn kernel_weights_trap(n: usize, big_n: usize, h: f64, a: f64, b: f64) -> Result<KernelWeightRow> {
    check_kernel_args(n, big_n, h)?;
    let len = big_n - n + 1;
    let mut weights = vec![0.0; len];
    if n < big_n {
        let cells = len - 1;
        weights[0] = rect_cell(n + 1, n, h, a, b) - trap_right_share(n, n, h, a, b);
        for (k, w) in weights.iter_mut().enumerate().take(cells).skip(1) {
            let j = n + k;
            *w = trap_right_share(j - 1, n, h, a, b) - trap_right_share(j, n, h, a, b)
                + rect_cell(j + 1, n, h, a, b);
        }
        weights[cells] = trap_right_share(big_n - 1, n, h, a, b);
    }
    Ok(KernelWeightRow {
        n,
        rule: Rule::Trapezoid,
        weights,
    })
}

/// Kernel row for whichever rule is requested.
pub fn kernel_weights(rule: Rule, n: usize, big_n: usize, h: f64, a: f64, b: f64) -> Result<KernelWeightRow> {
    match rule {
        Rule::Rectangle => kernel_weights_rect(n, big_n, h, a, b),
        Rule::Trapezoid => kernel_weights_trap(n, big_n, h, a, b),
    }
}

/// Right-hand side of the scalar equation at node `n`, split as
/// `K(U_n) - coefficient·U_n = known`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeRhs {
    pub known: f64,
    pub coefficient: f64,
}

/// Assembles the equation at node `n` by two-stage summation.
///
/// `u` holds `U_i` for `i = n..=N` (the entry for `n` itself is ignored)
/// and `f_hat` the cached `F̂U(η_j)` for `j = n+1..=N`. The rectangle rule
/// evaluates the cell `[η_{j-1}, η_j]` at its left node:
/// `K(U_n) = Σ_{j>n} b_{jn} F̂U(η_{j-1})`, with `F̂U(η_n) = Σ_{i>n} a_{in}U_i`
/// since `a_{nn} = 0` (except at `n = 0`, where `U_0` enters through
/// `a_{00}`). The trapezoid rule uses `K(U_n) = Σ_{j≥n} b_{jn} F̂U(η_j)`.
pub fn scheme_rhs(
    n: usize,
    u: &[f64],
    f_hat: &[f64],
    ek_row: &EkWeightRow,
    kernel: &KernelWeightRow,
) -> Result<SchemeRhs> {
    let len = ek_row.len();
    if ek_row.n() != n || kernel.n() != n {
        return Err(Error::domain(format!(
            "weight rows are for nodes {} and {}, expected {n}",
            ek_row.n(),
            kernel.n()
        )));
    }
    if kernel.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: kernel.len(),
        });
    }
    if u.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: u.len(),
        });
    }
    if f_hat.len() + 1 != len {
        return Err(Error::LengthMismatch {
            expected: len - 1,
            actual: f_hat.len(),
        });
    }
    let a = ek_row.weights();
    let b = kernel.weights();
    // F̂U(η_n) without the U_n term
    let partial = dot(&a[1..], &u[1..]);
    let coupling = a[0];
    match kernel.rule() {
        Rule::Rectangle => {
            if len == 1 {
                return Ok(SchemeRhs {
                    known: 0.0,
                    coefficient: 0.0,
                });
            }
            // cell [η_n, η_{n+1}] sees F̂U(η_n); the others see f_hat shifted by one
            let later = dot(&b[2..], &f_hat[..len - 2]);
            Ok(SchemeRhs {
                known: b[1] * partial + later,
                coefficient: b[1] * coupling,
            })
        }
        Rule::Trapezoid => Ok(SchemeRhs {
            known: b[0] * partial + dot(&b[1..], f_hat),
            coefficient: b[0] * coupling,
        }),
    }
}

/// Optional floor regularization `D_h = max(D, ε(h))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub c: f64,
    pub delta: f64,
}

impl Default for Regularization {
    fn default() -> Self {
        Self { c: 1.0, delta: 0.5 }
    }
}

/// Everything that fixes a discretization and a shooting run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    /// Number of grid cells `N`.
    pub n: usize,
    pub rule: Rule,
    /// Shooting tolerance on `|U_0 - M|`.
    pub eps: f64,
    pub max_iterations: usize,
    /// Relative tolerance for the scalar equation at each node.
    pub scalar_tol: f64,
    pub regularization: Option<Regularization>,
    pub storage: RowStorage,
}

impl SolverConfig {
    /// Defaults: `A = 1-α`, `B = α/2`, `ε = 1e-8`, 100 shooting iterations.
    pub fn new(alpha: f64, n: usize, rule: Rule) -> Result<Self> {
        let cfg = Self {
            alpha,
            a: 1.0 - alpha,
            b: alpha / 2.0,
            n,
            rule,
            eps: 1e-8,
            max_iterations: 100,
            scalar_tol: 1e-12,
            regularization: None,
            storage: RowStorage::Auto,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_constants(mut self, a: f64, b: f64) -> Result<Self> {
        self.a = a;
        self.b = b;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        self.eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_regularization(mut self, reg: Option<Regularization>) -> Result<Self> {
        self.regularization = reg;
        self.validate()?;
        Ok(self)
    }

    pub fn with_storage(mut self, storage: RowStorage) -> Self {
        self.storage = storage;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.ek_params()?;
        if self.n < 4 {
            return Err(Error::domain(format!("N must be at least 4, got {}", self.n)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::domain(format!("eps must lie in (0,1), got {}", self.eps)));
        }
        if self.max_iterations == 0 {
            return Err(Error::domain("max_iterations must be positive"));
        }
        if !(self.scalar_tol > 0.0 && self.scalar_tol < 1e-3) {
            return Err(Error::domain(format!(
                "scalar tolerance must lie in (0, 1e-3), got {}",
                self.scalar_tol
            )));
        }
        if let Some(r) = self.regularization {
            if !(r.c > 0.0 && r.c.is_finite()) {
                return Err(Error::domain(format!("regularization C must be positive, got {}", r.c)));
            }
            if !(r.delta > 0.0 && r.delta < 1.0) {
                return Err(Error::domain(format!(
                    "regularization delta must lie in (0,1), got {}",
                    r.delta
                )));
            }
        }
        Ok(())
    }

    pub fn ek_params(&self) -> Result<EkParams> {
        EkParams::with_constants(self.alpha, self.a, self.b, self.rule)
    }
}

/// Sampled self-similar profile `U_n ≈ U(η_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub rule: Rule,
    pub alpha: f64,
    /// Display name of the diffusivity that produced the profile.
    pub model: String,
    /// Nodes where a negative right-hand side was clamped to zero.
    pub clamped: usize,
}

impl Profile {
    pub fn u0(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `(η_n, U_n)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.nodes().zip(self.values.iter().copied())
    }

    /// True when all values are non-negative and nonincreasing to `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| v >= 0.0) && self.values.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    /// One-sided flux `-D(U_{N-1})(U_N - U_{N-1})/h` at the front.
    pub fn front_flux(&self, model: &DiffusivityModel) -> f64 {
        let big_n = self.grid.last();
        let u = self.values[big_n - 1];
        model.d(u) * (u - self.values[big_n]) / self.grid.h()
    }
}

/// Positive root of `K(x) = q x`; zero (with a warning) when `q ≤ 0`.
///
/// The root exists because `K(0) = 0`, `K'(0) = D(0) = 0` and `K` is
/// convex; it fails only when `K` grows no faster than `q x`.
pub fn positive_fixed_point(model: &dyn Diffusivity, q: f64, tol: f64) -> Result<f64> {
    if !(q > 0.0) {
        warn!("degenerate start: coefficient {q:e} is not positive, using the trivial root");
        return Ok(0.0);
    }
    let g = |x: f64| model.k(x) - q * x;
    let hi = grow_upper(g, 1.0, 1e9)?;
    let mut lo = hi;
    let mut halvings = 0;
    while g(lo) >= 0.0 {
        lo *= 0.5;
        halvings += 1;
        if halvings > 2000 || lo == 0.0 {
            return Err(Error::Convergence(format!(
                "no positive root of K(x) = {q:e} x below {hi:e}"
            )));
        }
    }
    newton_bisect(|x| (g(x), model.d(x) - q), lo, hi, tol)
}

/// Starting value `U_{N-1}` from `K(U_{N-1}) = q U_{N-1}`, where `q` is the
/// product of the corner weights. Power laws use `((m+1)q)^{1/m}`.
pub fn terminal_value(model: &DiffusivityModel, q: f64, tol: f64) -> Result<f64> {
    match model {
        DiffusivityModel::PowerLaw { m } if q > 0.0 => Ok(((m + 1.0) * q).powf(1.0 / m)),
        _ => positive_fixed_point(model, q, tol),
    }
}

/// Corner coefficient `q` of the terminal condition for `N` cells of width `h`.
pub fn terminal_coefficient(params: &EkParams, big_n: usize, h: f64) -> Result<f64> {
    let ek_row = crate::ek::ek_weights(big_n - 1, big_n, params)?;
    Ok(match params.rule {
        Rule::Rectangle => ek_row.get(big_n) * rect_cell(big_n, big_n - 1, h, params.a, params.b),
        Rule::Trapezoid => {
            let kernel = kernel_weights_trap(big_n - 1, big_n, h, params.a, params.b)?;
            ek_row.get(big_n - 1) * kernel.get(big_n - 1)
        }
    })
}

/// A-priori bound `x_λ`: the positive root of `K(x) = λx`,
/// `λ = (A+2B)η*²/Γ(2-α)`. Every solution satisfies `max U ≤ x_λ`.
///
/// When `K` grows no faster than `λx` (the exponential model with `λ ≥ 1`)
/// there is no root and the bound is vacuous: infinity is returned.
pub fn apriori_bound(eta_star: f64, config: &SolverConfig, model: &DiffusivityModel) -> Result<f64> {
    if !(eta_star > 0.0) {
        return Err(Error::domain(format!("eta_star must be positive, got {eta_star}")));
    }
    let lambda = (config.a + 2.0 * config.b) * eta_star * eta_star / gamma_pos(2.0 - config.alpha);
    match terminal_value(model, lambda, config.scalar_tol) {
        Err(Error::Convergence(_)) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Reusable stepping engine: holds the operator weights for one `N`.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    table: EkWeightTable,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let table = EkWeightTable::new(config.n, config.ek_params()?, config.storage)?;
        Ok(Self { config, table })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn table(&self) -> &EkWeightTable {
        &self.table
    }

    /// Marches from the front `η*` down to `η = 0`.
    pub fn profile(&self, eta_star: f64, model: &DiffusivityModel) -> Result<Profile> {
        let grid = Grid::new(eta_star, self.config.n)?;
        match self.config.regularization {
            None => self.march(grid, model, None),
            Some(r) => {
                let reg: RegularizedModel = model.regularize(grid.h(), eta_star, r.c, r.delta)?;
                self.march(grid, model, Some(&reg))
            }
        }
    }

    /// Marches with `K` from `start`, or from `regularized` when given.
    ///
    /// A floored `K_h` is linear near zero, so `K_h(x) = q x` usually has no
    /// positive root. The regularized seed instead keeps the base model's
    /// terminal value of `K` and inverts it with `K_h`.
    fn march(&self, grid: Grid, start: &DiffusivityModel, regularized: Option<&RegularizedModel>) -> Result<Profile> {
        let stepper: &dyn Diffusivity = match regularized {
            Some(reg) => reg,
            None => start,
        };
        let cfg = &self.config;
        let big_n = cfg.n;
        let h = grid.h();
        let params = self.table.params();
        let mut u = vec![0.0; big_n + 1];
        let mut f_hat = vec![0.0; big_n + 1];
        let mut clamped = 0;

        let q = terminal_coefficient(params, big_n, h)?;
        let seed_error = |e: Error| Error::ScalarSolve {
            n: big_n - 1,
            rhs: 0.0,
            reason: e.to_string(),
        };
        let seed = terminal_value(start, q, cfg.scalar_tol).map_err(seed_error)?;
        u[big_n - 1] = match regularized {
            Some(reg) => reg.k_inv(start.k(seed)).map_err(seed_error)?,
            None => seed,
        };
        f_hat[big_n - 1] = self.f_hat_at(big_n - 1, &u)?;

        for n in (0..big_n - 1).rev() {
            let ek_row = self.table.row(n)?;
            let kernel = kernel_weights(cfg.rule, n, big_n, h, cfg.a, cfg.b)?;
            let rhs = scheme_rhs(n, &u[n..], &f_hat[n + 1..], &ek_row, &kernel)?;
            let (value, was_clamped) = solve_node(stepper, rhs, cfg.scalar_tol)
                .map_err(|e| Error::ScalarSolve {
                    n,
                    rhs: rhs.known,
                    reason: e.to_string(),
                })?;
            clamped += usize::from(was_clamped);
            u[n] = value;
            f_hat[n] = dot(ek_row.weights(), &u[n..]);
        }
        if clamped > 0 {
            warn!("{clamped} negative right-hand sides clamped to zero");
        }
        Ok(Profile {
            grid,
            values: u,
            rule: cfg.rule,
            alpha: cfg.alpha,
            model: start.to_string(),
            clamped,
        })
    }

    fn f_hat_at(&self, n: usize, u: &[f64]) -> Result<f64> {
        let row: Cow<'_, EkWeightRow> = self.table.row(n)?;
        Ok(dot(row.weights(), &u[n..]))
    }

    /// Shoots on `η*` until `|U_0 - M| < ε`.
    pub fn shoot(&self, mass: f64, model: &DiffusivityModel) -> Result<ShootingOutcome> {
        shoot_with(self, mass, model)
    }
}

/// Solves `K(x) - c x = known` for the non-negative root, clamping a
/// negative right-hand side to zero.
fn solve_node(model: &dyn Diffusivity, rhs: SchemeRhs, tol: f64) -> Result<(f64, bool)> {
    let SchemeRhs { known, coefficient } = rhs;
    if !known.is_finite() {
        return Err(Error::Convergence("non-finite right-hand side".into()));
    }
    if known <= 0.0 {
        return Ok((0.0, known < 0.0));
    }
    let explicit = model.k_inv(known)?;
    if coefficient == 0.0 {
        return Ok((explicit, false));
    }
    // g(explicit) = -c·explicit < 0, and g is increasing beyond it
    let g = |x: f64| model.k(x) - coefficient * x - known;
    let lo = explicit;
    let mut hi = 2.0 * explicit.max(f64::MIN_POSITIVE);
    let mut doublings = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 || !hi.is_finite() {
            return Err(Error::Convergence(format!(
                "implicit node equation has no root (coefficient {coefficient:e})"
            )));
        }
    }
    if g(lo) >= 0.0 {
        return Ok((lo, false));
    }
    let x = newton_bisect(|x| (g(x), model.d(x) - coefficient), lo, hi, tol)?;
    Ok((x, false))
}

/// Profile for a single front position.
pub fn step_profile(eta_star: f64, config: &SolverConfig, model: &DiffusivityModel) -> Result<Profile> {
    Solver::new(config.clone())?.profile(eta_star, model)
}

/// One evaluation of the shooting map `η* ↦ U_0(η*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingStep {
    pub eta_star: f64,
    pub u0: f64,
}

/// Result of the outer root find.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingOutcome {
    pub eta_star: f64,
    pub profile: Profile,
    /// `|U_0 - M|` at the returned front.
    pub residual: f64,
    /// Number of profile evaluations.
    pub iterations: usize,
    /// Every evaluation, in order.
    pub history: Vec<ShootingStep>,
    /// Bracket `[lo, hi]` after each refinement.
    pub brackets: Vec<(f64, f64)>,
}

impl ShootingOutcome {
    /// Summary record `eta_star,residual,iterations`.
    pub fn summary_line(&self) -> String {
        format!("{:.15e},{:.6e},{}", self.eta_star, self.residual, self.iterations)
    }
}

/// Finds `η*` with `|U_0(η*) - M| < ε` for a fresh solver.
pub fn shoot_front(mass: f64, config: &SolverConfig, model: &DiffusivityModel) -> Result<ShootingOutcome> {
    Solver::new(config.clone())?.shoot(mass, model)
}

const MAX_DOUBLINGS: usize = 200;

fn shoot_with(solver: &Solver, mass: f64, model: &DiffusivityModel) -> Result<ShootingOutcome> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::domain(format!("boundary value M must be positive, got {mass}")));
    }
    let eps = solver.config.eps;
    let max_iter = solver.config.max_iterations;
    let mut history = Vec::new();
    let mut brackets = Vec::new();
    let eval = |eta: f64, history: &mut Vec<ShootingStep>| -> Result<Profile> {
        let p = solver.profile(eta, model)?;
        history.push(ShootingStep { eta_star: eta, u0: p.u0() });
        Ok(p)
    };
    let done = |p: Profile, eta: f64, history: Vec<ShootingStep>, brackets: Vec<(f64, f64)>| ShootingOutcome {
        eta_star: eta,
        residual: (p.u0() - mass).abs(),
        iterations: history.len(),
        profile: p,
        history,
        brackets,
    };

    // geometric bracketing from η* = 1; U_0 is increasing in η*
    let mut eta = 1.0;
    let mut p = eval(eta, &mut history)?;
    if (p.u0() - mass).abs() < eps {
        return Ok(done(p, eta, history, brackets));
    }
    let up = p.u0() < mass;
    let (lo, hi);
    let (f_lo, f_hi);
    let mut steps = 0;
    loop {
        let (prev_eta, prev_u0) = (eta, p.u0());
        eta = if up { eta * 2.0 } else { eta * 0.5 };
        p = eval(eta, &mut history)?;
        if (p.u0() - mass).abs() < eps {
            return Ok(done(p, eta, history, brackets));
        }
        if (p.u0() > mass) == up {
            if up {
                (lo, f_lo, hi, f_hi) = (prev_eta, prev_u0, eta, p.u0());
            } else {
                (lo, f_lo, hi, f_hi) = (eta, p.u0(), prev_eta, prev_u0);
            }
            break;
        }
        steps += 1;
        if steps >= MAX_DOUBLINGS {
            return Err(Error::Bracket(format!(
                "U_0 = {:e} at eta* = {eta:e} after {MAX_DOUBLINGS} {} (target M = {mass})",
                p.u0(),
                if up { "doublings" } else { "halvings" }
            )));
        }
    }
    brackets.push((lo, hi));

    // Illinois regula falsi in log-log coordinates, where power laws are
    // straight lines; bisection in log η* whenever the bracket stalls
    let target = mass.ln();
    let logf = |v: f64| if v > 0.0 { v.ln() - target } else { f64::NEG_INFINITY };
    let (mut x_lo, mut x_hi) = (lo.ln(), hi.ln());
    let (mut g_lo, mut g_hi) = (logf(f_lo), logf(f_hi));
    let mut side = 0i8;
    for _ in 0..max_iter {
        let width = x_hi - x_lo;
        let mut x = if g_lo.is_finite() && g_hi.is_finite() && g_hi > g_lo {
            x_lo - g_lo * width / (g_hi - g_lo)
        } else {
            0.5 * (x_lo + x_hi)
        };
        if !(x > x_lo + 1e-3 * width && x < x_hi - 1e-3 * width) {
            x = 0.5 * (x_lo + x_hi);
        }
        eta = x.exp();
        p = eval(eta, &mut history)?;
        if (p.u0() - mass).abs() < eps {
            return Ok(done(p, eta, history, brackets));
        }
        let g = logf(p.u0());
        if g < 0.0 {
            x_lo = x;
            g_lo = g;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            x_hi = x;
            g_hi = g;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
        brackets.push((x_lo.exp(), x_hi.exp()));
        if x_hi - x_lo <= 4.0 * f64::EPSILON * x_hi.abs().max(1.0) {
            break;
        }
    }
    Err(Error::Convergence(format!(
        "shooting did not reach |U_0 - M| < {eps:e} in {max_iter} iterations (last eta* = {eta:.12e}, U_0 = {:.12e})",
        p.u0()
    )))
}

/// `u(x, t) = U(x t^{-α/2})`, linearly interpolated, zero beyond the front.
pub fn reconstruct_pde_solution(profile: &Profile, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("x must be non-negative, got {x}")));
    }
    let eta = x * t.powf(-profile.alpha / 2.0);
    let grid = &profile.grid;
    if eta >= grid.eta_star() {
        return Ok(0.0);
    }
    let pos = eta / grid.h();
    let k = (pos.floor() as usize).min(grid.last() - 1);
    let w = pos - k as f64;
    Ok((1.0 - w) * profile.values[k] + w * profile.values[k + 1])
}
