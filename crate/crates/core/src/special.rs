//! Gamma and Euler incomplete beta functions.
//!
//! Only the positive real axis is supported; every weight formula in this
//! crate evaluates these functions at arguments in `(0, 2]` or on `[0, 1]`.

use crate::error::{Error, Result};

/// Accuracy controls for the iterative special-function evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnConfig {
    /// Relative accuracy target, in `(0, 1e-6]`.
    pub rel_tolerance: f64,
    /// Iteration cap for the continued fraction, at least 50.
    pub max_iterations: usize,
}

impl Default for SpecialFnConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-12,
            max_iterations: 500,
        }
    }
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const FPMIN: f64 = 1e-300;

impl SpecialFnConfig {
    pub fn new(rel_tolerance: f64, max_iterations: usize) -> Result<Self> {
        let cfg = Self {
            rel_tolerance,
            max_iterations,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance <= 1e-6) {
            return Err(Error::domain(format!(
                "rel_tolerance must lie in (0, 1e-6], got {}",
                self.rel_tolerance
            )));
        }
        if self.max_iterations < 50 {
            return Err(Error::domain(format!(
                "max_iterations must be at least 50, got {}",
                self.max_iterations
            )));
        }
        Ok(())
    }

    /// Non-regularized incomplete beta `∫₀^z t^{a-1} (1-t)^{b-1} dt`.
    pub fn incomplete_beta(&self, z: f64, a: f64, b: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::domain(format!(
                "incomplete beta argument z must lie in [0, 1], got {z}"
            )));
        }
        self.incomplete_beta_split(z, 1.0 - z, a, b)
    }

    /// Same as [`incomplete_beta`](Self::incomplete_beta) but with the
    /// complement `1 - z` supplied by the caller, who can often compute it
    /// without cancellation.
    pub(crate) fn incomplete_beta_split(&self, z: f64, zc: f64, a: f64, b: f64) -> Result<f64> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::domain(format!(
                "incomplete beta parameters must be positive, got a = {a}, b = {b}"
            )));
        }
        if !(0.0..=1.0).contains(&z) || !(0.0..=1.0).contains(&zc) {
            return Err(Error::domain(format!(
                "incomplete beta argument z must lie in [0, 1], got {z}"
            )));
        }
        if z == 0.0 {
            return Ok(0.0);
        }
        if zc == 0.0 {
            return Ok(complete_beta(a, b));
        }
        if z < a / (a + b) {
            let front = (a * z.ln() + b * zc.ln()).exp();
            Ok(front * self.beta_cf(a, b, z)? / a)
        } else {
            let front = (a * z.ln() + b * zc.ln()).exp();
            Ok(complete_beta(a, b) - front * self.beta_cf(b, a, zc)? / b)
        }
    }

    /// Modified Lentz evaluation of the incomplete beta continued fraction.
    fn beta_cf(&self, a: f64, b: f64, x: f64) -> Result<f64> {
        let eps = (self.rel_tolerance * 1e-2).max(f64::EPSILON);
        let qab = a + b;
        let qap = a + 1.0;
        let qam = a - 1.0;
        let mut c = 1.0;
        let mut d = 1.0 - qab * x / qap;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        d = 1.0 / d;
        let mut h = d;
        for m in 1..=self.max_iterations {
            let m = m as f64;
            let m2 = 2.0 * m;
            let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = 1.0 + aa / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            h *= d * c;

            let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = 1.0 + aa / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < eps {
                return Ok(h);
            }
        }
        Err(Error::Convergence(format!(
            "incomplete beta continued fraction did not converge in {} iterations (x = {x}, a = {a}, b = {b})",
            self.max_iterations
        )))
    }
}

/// Gamma function on the positive real axis.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "gamma is only defined here for x > 0, got {x}"
        )));
    }
    Ok(gamma_pos(x))
}

/// Complete beta function `Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!(
            "beta parameters must be positive, got a = {a}, b = {b}"
        )));
    }
    Ok(complete_beta(a, b))
}

/// Incomplete beta with the default [`SpecialFnConfig`].
pub fn incomplete_beta(z: f64, a: f64, b: f64) -> Result<f64> {
    SpecialFnConfig::default().incomplete_beta(z, a, b)
}

pub(crate) fn complete_beta(a: f64, b: f64) -> f64 {
    gamma_pos(a) * gamma_pos(b) / gamma_pos(a + b)
}

pub(crate) fn gamma_pos(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 171.0 {
        // exact factorials, so that Γ(1) = Γ(2) = 1 hold to the bit
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    if x < 0.5 {
        // reflection keeps the series argument above 1/2
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_pos(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}
