//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's own quadrature or root finders.

#![allow(dead_code)]
// dense oracles read closest to the formulas with explicit indices
#![allow(clippy::needless_range_loop)]

use ekpme::ek::{ek_weights, EkParams, Rule};
use ekpme::solver::kernel_weights;

/// Double-exponential (tanh-sinh) quadrature on `(a, b)`. Integrable
/// endpoint singularities are handled by the variable change; the
/// integrand is never evaluated at the endpoints themselves.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let pi2 = std::f64::consts::FRAC_PI_2;
    // distance to the nearest endpoint is computed directly to keep
    // resolution where the nodes cluster
    let eval = |t: f64| -> f64 {
        let u = pi2 * t.sinh();
        let w = pi2 * t.cosh() / u.cosh().powi(2);
        let gap = half * 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        if gap <= 0.0 {
            return 0.0;
        }
        let x = if u < 0.0 { a + gap } else { b - gap };
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let t_max = 6.5;
    let mut step = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * step <= t_max {
        sum += eval(k as f64 * step) + eval(-(k as f64) * step);
        k += 1;
    }
    let mut estimate = sum * step * half;
    for _ in 0..12 {
        step *= 0.5;
        let mut extra = 0.0;
        let mut k = 1;
        while k as f64 * step <= t_max {
            extra += eval(k as f64 * step) + eval(-(k as f64) * step);
            k += 2;
        }
        sum += extra;
        let next = sum * step * half;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Plain bisection for an increasing function on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) <= 0.0 && f(hi) >= 0.0, "bisection bracket does not straddle the root");
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dense operator matrix `a[i][n]` for `N` cells.
pub fn ek_matrix(params: &EkParams, big_n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; big_n + 1]; big_n + 1];
    for n in 0..=big_n {
        let row = ek_weights(n, big_n, params).unwrap();
        for i in n..=big_n {
            a[i][n] = row.get(i);
        }
    }
    a
}

/// Dense kernel matrix `b[j][n]`.
pub fn kernel_matrix(rule: Rule, big_n: usize, h: f64, a_const: f64, b_const: f64) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; big_n + 1]; big_n + 1];
    for n in 0..=big_n {
        let row = kernel_weights(rule, n, big_n, h, a_const, b_const).unwrap();
        for j in n..=big_n {
            b[j][n] = row.get(j);
        }
    }
    b
}

/// Combined coefficients `c_{in}` by direct triple-loop assembly.
///
/// Rectangle: the kernel cell `[η_{j-1}, η_j]` is evaluated at its left
/// node, `c_{in} = Σ_{j=n+1}^{N} b_{jn} a_{i(j-1)}`. Trapezoid:
/// `c_{in} = Σ_{j=n}^{N} b_{jn} a_{ij}`.
pub fn c_matrix(rule: Rule, a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let size = a.len();
    let mut c = vec![vec![0.0; size]; size];
    for n in 0..size {
        for i in n..size {
            let mut acc = 0.0;
            match rule {
                Rule::Rectangle => {
                    for j in n + 1..size {
                        acc += b[j][n] * a[i][j - 1];
                    }
                }
                Rule::Trapezoid => {
                    for j in n..size {
                        acc += b[j][n] * a[i][j];
                    }
                }
            }
            c[i][n] = acc;
        }
    }
    c
}

/// Profile for `D(u) = u` (`K(u) = u²/2`) from the assembled `c_{in}`,
/// seeded with the given `U_{N-1}`. The node equation
/// `U²/2 - c_{nn} U = Σ_{i>n} c_{in} U_i` is solved in closed form.
pub fn linear_diffusivity_profile(c: &[Vec<f64>], seed: f64) -> Vec<f64> {
    let big_n = c.len() - 1;
    let mut u = vec![0.0; big_n + 1];
    u[big_n - 1] = seed;
    for n in (0..big_n - 1).rev() {
        let known: f64 = (n + 1..=big_n).map(|i| c[i][n] * u[i]).sum();
        let cc = c[n][n];
        u[n] = if known <= 0.0 {
            0.0
        } else {
            cc + (cc * cc + 2.0 * known).sqrt()
        };
    }
    u
}

/// Front of the classical problem `(U U')' + (η/2) U' = 0`, `U(0) = 1`.
///
/// Integrates `U' = V/U`, `V' = -(η/2)V/U` backward from a unit front with
/// the local expansion `U = s/2 - s²/8` (`s = 1 - η`), then rescales with
/// the exact invariance `U ↦ λ² U(·/λ)`.
pub fn classical_front() -> f64 {
    let delta = 1e-4;
    let eta0 = 1.0 - delta;
    let u0 = delta / 2.0 - delta * delta / 8.0;
    let du = -(0.5 - delta / 4.0);
    let rhs = |eta: f64, y: [f64; 2]| -> [f64; 2] {
        let up = y[1] / y[0];
        [up, -0.5 * eta * up]
    };
    let steps = 200_000;
    let h = -eta0 / steps as f64;
    let mut y = [u0, u0 * du];
    let mut eta = eta0;
    for _ in 0..steps {
        let k1 = rhs(eta, y);
        let k2 = rhs(eta + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = rhs(eta + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = rhs(eta + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for c in 0..2 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        eta += h;
    }
    1.0 / y[0].sqrt()
}

/// Nonincreasing non-negative samples from arbitrary seeds.
pub fn monotone_samples(seeds: &[f64]) -> Vec<f64> {
    let mut acc: f64 = seeds.iter().map(|s| s.abs()).sum();
    seeds
        .iter()
        .map(|s| {
            let v = acc;
            acc -= s.abs();
            v.max(0.0)
        })
        .collect()
}
