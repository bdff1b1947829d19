//! Diffusivity models `D(u)`, their integral `K(u) = ∫₀ᵘ D`, the inverse
//! of `K`, the compact-support admissibility test and the floor
//! regularization `D_h = max(D, ε(h))`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::roots::{grow_upper, newton_bisect};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// What the solver needs from a diffusivity: `D`, `K` and `K⁻¹`.
///
/// Implementors may assume non-negative arguments; the checked entry points
/// live on [`DiffusivityModel`].
pub trait Diffusivity: Send + Sync {
    fn d(&self, u: f64) -> f64;
    fn k(&self, u: f64) -> f64;
    fn k_inv(&self, y: f64) -> Result<f64>;
}

/// A user supplied diffusivity. `K` and `K⁻¹` fall back to quadrature and
/// root finding when no closed form is given.
#[derive(Clone)]
pub struct CustomDiffusivity {
    name: String,
    d: ScalarFn,
    k: Option<ScalarFn>,
    k_inv: Option<ScalarFn>,
}

impl CustomDiffusivity {
    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomDiffusivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDiffusivity")
            .field("name", &self.name)
            .field("closed_form_k", &self.k.is_some())
            .field("closed_form_k_inv", &self.k_inv.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum DiffusivityModel {
    /// Brooks-Corey `D(u) = u^m`.
    PowerLaw { m: f64 },
    /// `D(u) = 1 - e^{-u}`.
    Exponential,
    Custom(CustomDiffusivity),
}

/// Outcome of the compact-support admissibility test `∫₀¹ D(s)/s ds < ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    /// Estimated value of the integral when it converges.
    pub integral: Option<f64>,
    /// Ratios of successive per-decade increments.
    pub ratios: Vec<f64>,
}

/// Sample points used to spot-check the structural conditions on custom models.
const SPOT_GRID: [f64; 9] = [1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
const K_QUAD_TOL: f64 = 1e-10;
const INVERSE_TOL: f64 = 1e-15;
const BRACKET_LIMIT: f64 = 1e9;

impl DiffusivityModel {
    pub fn power_law(m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::domain(format!("power-law exponent must be positive, got {m}")));
        }
        Ok(DiffusivityModel::PowerLaw { m })
    }

    pub fn exponential() -> Self {
        DiffusivityModel::Exponential
    }

    /// Builds a custom model from `D` alone. `D(0) = 0`, `D > 0` and `D' > 0`
    /// are spot-checked on a positive sample grid.
    pub fn custom<F>(name: impl Into<String>, d: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::custom_with(name, d, None, None)
    }

    /// Custom model with optional closed forms for `K` and `K⁻¹`.
    pub fn custom_with<F>(
        name: impl Into<String>,
        d: F,
        k: Option<ScalarFn>,
        k_inv: Option<ScalarFn>,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        if d(0.0) != 0.0 {
            return Err(Error::domain(format!("custom diffusivity '{name}' must satisfy D(0) = 0")));
        }
        let mut prev = 0.0;
        for &u in &SPOT_GRID {
            let v = d(u);
            if !(v > prev) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "custom diffusivity '{name}' must be positive and increasing (failed at u = {u})"
                )));
            }
            prev = v;
        }
        Ok(DiffusivityModel::Custom(CustomDiffusivity {
            name,
            d: Arc::new(d),
            k,
            k_inv,
        }))
    }

    pub fn eval_d(&self, u: f64) -> Result<f64> {
        check_nonneg("u", u)?;
        Ok(self.d(u))
    }

    /// `D'(u)`; closed form for the shipped models, central difference otherwise.
    pub fn eval_d_prime(&self, u: f64) -> Result<f64> {
        check_nonneg("u", u)?;
        Ok(match self {
            DiffusivityModel::PowerLaw { m } => m * u.powf(m - 1.0),
            DiffusivityModel::Exponential => (-u).exp(),
            DiffusivityModel::Custom(c) => {
                let step = 1e-6 * u.max(1e-3);
                let lo = (u - step).max(0.0);
                ((c.d)(u + step) - (c.d)(lo)) / (u + step - lo)
            }
        })
    }

    pub fn eval_k(&self, u: f64) -> Result<f64> {
        check_nonneg("u", u)?;
        match self {
            DiffusivityModel::Custom(c) if c.k.is_none() => {
                quadrature::integrate(|s| (c.d)(s), 0.0, u, K_QUAD_TOL)
            }
            _ => Ok(self.k(u)),
        }
    }

    /// Inverse of `K`, with `|K(u) - y| ≤ 1e-12·max(1, y)`.
    pub fn invert_k(&self, y: f64) -> Result<f64> {
        check_nonneg("y", y)?;
        self.k_inv(y)
    }

    /// Tests convergence of `∫_δ^1 D(s)/s ds` as `δ → 0` over the decades
    /// `δ = 10^{-k}`, `k = 2..10`: the per-decade increments must shrink
    /// with a stable geometric ratio below one.
    pub fn check_admissible(&self) -> Admissibility {
        let integrand = |t: f64| self.d(t.exp());
        let decade = |hi_exp: i32| -> Option<f64> {
            let hi = -(hi_exp as f64) * std::f64::consts::LN_10;
            let lo = hi - std::f64::consts::LN_10;
            quadrature::integrate(integrand, lo, hi, 1e-12).ok()
        };
        let base = match quadrature::integrate(integrand, -2.0 * std::f64::consts::LN_10, 0.0, 1e-12) {
            Ok(v) => v,
            Err(_) => return not_admissible(Vec::new()),
        };
        let mut increments = Vec::with_capacity(8);
        for k in 2..10 {
            match decade(k) {
                Some(v) if v.is_finite() && v >= 0.0 => increments.push(v),
                _ => return not_admissible(Vec::new()),
            }
        }
        let total = base + increments.iter().sum::<f64>();
        if increments.last().is_some_and(|&v| v < 1e-300) {
            return Admissibility {
                admissible: true,
                integral: Some(total),
                ratios: Vec::new(),
            };
        }
        let ratios: Vec<f64> = increments.windows(2).map(|w| w[1] / w[0]).collect();
        let last = *ratios.last().expect("eight increments give seven ratios");
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let stable = last < 1.0 && last - min <= 0.05;
        if !stable {
            return not_admissible(ratios);
        }
        let tail = increments.last().unwrap() * last / (1.0 - last);
        Admissibility {
            admissible: true,
            integral: Some(total + tail),
            ratios,
        }
    }

    /// Regularized model with floor `ε(h) = C·η*/(δ·ln(1/h))`.
    pub fn regularize(&self, h: f64, eta_star: f64, c: f64, delta: f64) -> Result<RegularizedModel> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::domain(format!("regularization needs 0 < h < 1, got h = {h}")));
        }
        if !(c > 0.0 && eta_star > 0.0) {
            return Err(Error::domain("regularization constants C and eta_star must be positive"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("regularization delta must lie in (0, 1), got {delta}")));
        }
        let epsilon = c * eta_star / (delta * (1.0 / h).ln());
        RegularizedModel::with_floor(self.clone(), epsilon)
    }

    /// Point where `D` reaches `level`, or infinity when it never does.
    fn d_level_crossing(&self, level: f64) -> f64 {
        match self {
            DiffusivityModel::PowerLaw { m } => level.powf(1.0 / m),
            DiffusivityModel::Exponential => {
                if level < 1.0 {
                    -(-level).ln_1p()
                } else {
                    f64::INFINITY
                }
            }
            DiffusivityModel::Custom(c) => {
                let g = |u: f64| (c.d)(u) - level;
                match grow_upper(g, 1.0, BRACKET_LIMIT) {
                    Ok(hi) => newton_bisect(
                        |u| (g(u), self.eval_d_prime(u).unwrap_or(0.0)),
                        0.0,
                        hi,
                        INVERSE_TOL,
                    )
                    .unwrap_or(f64::INFINITY),
                    Err(_) => f64::INFINITY,
                }
            }
        }
    }
}

impl Diffusivity for DiffusivityModel {
    fn d(&self, u: f64) -> f64 {
        match self {
            DiffusivityModel::PowerLaw { m } => u.powf(*m),
            DiffusivityModel::Exponential => -(-u).exp_m1(),
            DiffusivityModel::Custom(c) => (c.d)(u),
        }
    }

    fn k(&self, u: f64) -> f64 {
        match self {
            DiffusivityModel::PowerLaw { m } => u.powf(m + 1.0) / (m + 1.0),
            DiffusivityModel::Exponential => exp_k(u),
            DiffusivityModel::Custom(c) => match &c.k {
                Some(k) => k(u),
                None => quadrature::integrate(|s| (c.d)(s), 0.0, u, K_QUAD_TOL).unwrap_or(f64::NAN),
            },
        }
    }

    fn k_inv(&self, y: f64) -> Result<f64> {
        if y == 0.0 {
            return Ok(0.0);
        }
        match self {
            DiffusivityModel::PowerLaw { m } => Ok(((m + 1.0) * y).powf(1.0 / (m + 1.0))),
            DiffusivityModel::Custom(CustomDiffusivity { k_inv: Some(inv), .. }) => Ok(inv(y)),
            _ => invert_monotone(|u| self.k(u), |u| self.d(u), y),
        }
    }
}

/// `K` for the exponential model: `u + e^{-u} - 1`, by series near zero.
fn exp_k(u: f64) -> f64 {
    if u < 0.5 {
        let mut term = u * u / 2.0;
        let mut sum = 0.0f64;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() {
            sum += term;
            k += 1.0;
            term *= -u / k;
        }
        sum
    } else {
        u + (-u).exp_m1()
    }
}

fn invert_monotone<K, D>(k: K, d: D, y: f64) -> Result<f64>
where
    K: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let hi = grow_upper(|u| k(u) - y, 1.0, BRACKET_LIMIT)?;
    newton_bisect(|u| (k(u) - y, d(u)), 0.0, hi, INVERSE_TOL)
}

fn not_admissible(ratios: Vec<f64>) -> Admissibility {
    Admissibility {
        admissible: false,
        integral: None,
        ratios,
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be non-negative, got {v}")))
    }
}

/// `D_h(u) = max(D(u), ε)`, with `K_h` and its inverse in closed form
/// relative to the base model.
#[derive(Debug, Clone)]
pub struct RegularizedModel {
    base: DiffusivityModel,
    epsilon: f64,
    /// Where `D` crosses the floor.
    crossing: f64,
    k_at_crossing: f64,
}

impl RegularizedModel {
    pub fn with_floor(base: DiffusivityModel, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!("regularization floor must be positive, got {epsilon}")));
        }
        let crossing = base.d_level_crossing(epsilon);
        let k_at_crossing = if crossing.is_finite() { base.k(crossing) } else { f64::INFINITY };
        Ok(Self {
            base,
            epsilon,
            crossing,
            k_at_crossing,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn base(&self) -> &DiffusivityModel {
        &self.base
    }
}

impl Diffusivity for RegularizedModel {
    fn d(&self, u: f64) -> f64 {
        self.base.d(u).max(self.epsilon)
    }

    fn k(&self, u: f64) -> f64 {
        if u <= self.crossing {
            self.epsilon * u
        } else {
            self.epsilon * self.crossing + self.base.k(u) - self.k_at_crossing
        }
    }

    fn k_inv(&self, y: f64) -> Result<f64> {
        let knee = self.epsilon * self.crossing;
        if y <= knee {
            Ok(y / self.epsilon)
        } else {
            self.base.k_inv(y - knee + self.k_at_crossing)
        }
    }
}

impl fmt::Display for DiffusivityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffusivityModel::PowerLaw { m } => write!(f, "power:m={m}"),
            DiffusivityModel::Exponential => write!(f, "exp"),
            DiffusivityModel::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

/// Parses `power:m=<float>` or `exp`.
impl FromStr for DiffusivityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const POWER: &str = "power:";
        if s == "exp" {
            return Ok(DiffusivityModel::Exponential);
        }
        let Some(rest) = s.strip_prefix(POWER) else {
            let pos = common_prefix(s, POWER).max(common_prefix(s, "exp"));
            return Err(Error::Parse {
                pos,
                msg: format!("unknown diffusivity '{s}', expected 'power:m=<float>' or 'exp'"),
            });
        };
        let Some(value) = rest.strip_prefix("m=") else {
            return Err(Error::Parse {
                pos: POWER.len() + common_prefix(rest, "m="),
                msg: "expected 'm=' after 'power:'".into(),
            });
        };
        let pos = POWER.len() + 2;
        let m: f64 = value.parse().map_err(|_| Error::Parse {
            pos,
            msg: format!("invalid exponent '{value}'"),
        })?;
        DiffusivityModel::power_law(m).map_err(|_| Error::Parse {
            pos,
            msg: format!("exponent must be positive, got {m}"),
        })
    }
}

fn common_prefix(a: &str, b: &str) -> usize {
    a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count()
}
