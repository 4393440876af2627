//! The tilted coordinate distribution `P(X_1 = j) ∝ p^j` on `{0, ..., t-1}`
//! with mean `k/n`, its characteristic function, and the density
//! `f(x) = (1/2π) ∫ e^{-ixy} φ(y)^n dy` of the centred sum.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use super::quadrature::{integrate, Integral};
use crate::error::{Error, Result};
use crate::exact;
use crate::grid::GridShape;

const SOLVER_REL_TOL: f64 = 1e-13;
const QUAD_ABS_TOL: f64 = 1e-15;
const QUAD_REL_TOL: f64 = 1e-13;
const QUAD_MAX_PANELS: usize = 20_000;
/// Largest imaginary part tolerated in a density value.
pub const IMAG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct TiltedModel {
    pub t: usize,
    pub n: usize,
    /// Target level; half-integral only for the central model of an odd top.
    pub k: f64,
    /// `(t-1)n/2 - k` as `p/q`.
    pub q: String,
    pub p: f64,
    pub alpha_p: f64,
    pub mu_p: f64,
    #[serde(skip)]
    twice_k: usize,
    #[serde(skip)]
    theta: f64,
    #[serde(skip)]
    ln_alpha: f64,
    /// `P(X_1 = j)`.
    #[serde(skip)]
    weights: Vec<f64>,
}

/// Log-domain moments for `p = e^theta`: `(ln alpha, normalized weights)`.
fn tilt_weights(t: usize, theta: f64) -> (f64, Vec<f64>) {
    if theta == f64::NEG_INFINITY {
        let mut w = vec![0.0; t];
        w[0] = 1.0;
        return (0.0, w);
    }
    let top = if theta > 0.0 { theta * (t - 1) as f64 } else { 0.0 };
    let raw: Vec<f64> = (0..t).map(|j| (j as f64 * theta - top).exp()).collect();
    let sum: f64 = raw.iter().sum();
    (top + sum.ln(), raw.into_iter().map(|r| r / sum).collect())
}

fn mean_var(weights: &[f64]) -> (f64, f64) {
    let mean: f64 = weights.iter().enumerate().map(|(j, w)| j as f64 * w).sum();
    let var: f64 = weights
        .iter()
        .enumerate()
        .map(|(j, w)| (j as f64 - mean).powi(2) * w)
        .sum();
    (mean, var)
}

impl TiltedModel {
    fn from_theta(t: usize, n: usize, twice_k: usize, theta: f64) -> Self {
        let (ln_alpha, weights) = tilt_weights(t, theta);
        let (mu_p, _) = mean_var(&weights);
        let q = BigRational::new(
            BigInt::from((t - 1) * n) - BigInt::from(twice_k),
            BigInt::from(2),
        );
        TiltedModel {
            t,
            n,
            k: twice_k as f64 / 2.0,
            q: exact::ratio_string(&q),
            p: theta.exp(),
            alpha_p: ln_alpha.exp(),
            mu_p,
            twice_k,
            theta,
            ln_alpha,
            weights,
        }
    }

    /// `p = 1`, mean `(t-1)/2`, target level `(t-1)n/2`.
    pub fn central(shape: &GridShape) -> Self {
        let (t, n) = (shape.t(), shape.n());
        TiltedModel::from_theta(t, n, (t - 1) * n, 0.0)
    }

    /// `k/n`, the target mean of one coordinate.
    pub fn target_mean(&self) -> f64 {
        self.twice_k as f64 / (2 * self.n) as f64
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Standard deviation of `X_1`.
    pub fn sigma(&self) -> f64 {
        mean_var(&self.weights).1.sqrt()
    }

    /// `φ(y) = E e^{iy(X_1 - k/n)}`.
    pub fn char_fn(&self, y: f64) -> Complex64 {
        let c = self.target_mean();
        self.weights
            .iter()
            .enumerate()
            .map(|(j, &w)| Complex64::from_polar(w, y * (j as f64 - c)))
            .sum()
    }
}

/// Solves `μ(p) = k/n` for the tilt parameter by bisection on `ln p`
/// followed by safeguarded Newton steps.
pub fn solve_tilt(shape: &GridShape, k: usize) -> Result<TiltedModel> {
    let (t, n) = (shape.t(), shape.n());
    let top = (t - 1) * n;
    if k > top {
        return Err(Error::Precondition(format!("level {k} is above the top {top}")));
    }
    if k == top {
        return Err(Error::Unattainable(format!(
            "mean {} equals the maximum t-1; no finite p reaches it",
            t - 1
        )));
    }
    if k == 0 {
        return Ok(TiltedModel::from_theta(t, n, 0, f64::NEG_INFINITY));
    }
    if 2 * k == top {
        return Ok(TiltedModel::central(shape));
    }
    let target = k as f64 / n as f64;
    let mu = |theta: f64| mean_var(&tilt_weights(t, theta).1);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while mu(lo).0 > target {
        lo *= 2.0;
    }
    while mu(hi).0 < target {
        hi *= 2.0;
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if mu(mid).0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (m, v) = mu(theta);
        if m < target {
            lo = lo.max(theta);
        } else {
            hi = hi.min(theta);
        }
        let mut next = theta - (m - target) / v;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - theta).abs();
        theta = next;
        // relative tolerance on p = e^theta is an absolute one on theta
        if step <= SOLVER_REL_TOL * 0.01 {
            break;
        }
    }
    let model = TiltedModel::from_theta(t, n, 2 * k, theta);
    let residual = (model.mu_p - target).abs();
    if residual >= 1e-12 {
        return Err(Error::Unattainable(format!(
            "solver residual {residual:e} for level {k}"
        )));
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DensityEval {
    pub x: f64,
    pub order: u8,
    pub value: f64,
    pub abs_error_estimate: f64,
    pub imag_residue: f64,
}

fn weight_factor(order: u8, y: f64) -> Complex64 {
    match order {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -y),
        _ => Complex64::new(-y * y, 0.0),
    }
}

/// `(1/2π) ∫_{-π}^{π} (-iy)^order e^{-ixy} φ(y)^n dy` on the real line.
fn real_line(model: &TiltedModel, x: f64, order: u8) -> Result<Integral> {
    let n = model.n as i32;
    let panels = 8 + (model.sigma() * (model.n as f64).sqrt()).ceil() as usize;
    let f = |y: f64| {
        weight_factor(order, y) * Complex64::from_polar(1.0, -x * y) * model.char_fn(y).powi(n) / (2.0 * PI)
    };
    integrate(f, -PI, PI, panels, QUAD_ABS_TOL, QUAD_REL_TOL, QUAD_MAX_PANELS)
}

fn checked(x: f64, order: u8, value: Complex64, abs_error: f64) -> Result<DensityEval> {
    if value.im.abs() > IMAG_TOLERANCE.max(10.0 * abs_error) {
        return Err(Error::Quadrature(format!(
            "imaginary residue {:e} at x = {x}",
            value.im
        )));
    }
    Ok(DensityEval {
        x,
        order,
        value: value.re,
        abs_error_estimate: abs_error,
        imag_residue: value.im.abs(),
    })
}

/// The probability mass at level `s`, integrated along the contour on
/// which the integrand is centred: `P_p(S = s)` equals `P_{p_s}(S = s)`
/// times `(α(p_s)/α(p))^n (p/p_s)^s`, where `p_s` tilts the mean to `s/n`
/// and `P_{p_s}(S = s)` is the non-oscillating integral of `φ_s(y)^n`.
pub struct LatticeIntegral {
    s: usize,
    /// `(ln α(p_s), ln p_s, integral)`, `None` at the two end levels.
    shifted: Option<(f64, f64, Integral)>,
}

impl LatticeIntegral {
    pub fn new(shape: &GridShape, s: usize) -> Result<Self> {
        let top = shape.top();
        if s > top {
            return Err(Error::Precondition(format!("level {s} is above the top {top}")));
        }
        if s == 0 || s == top {
            return Ok(LatticeIntegral { s, shifted: None });
        }
        let model = solve_tilt(shape, s)?;
        let integral = real_line(&model, 0.0, 0)?;
        Ok(LatticeIntegral {
            s,
            shifted: Some((model.ln_alpha, model.theta, integral)),
        })
    }

    /// `f(s - k)` under `model`.
    pub fn eval(&self, model: &TiltedModel) -> Result<DensityEval> {
        let x = self.s as f64 - model.k;
        let n = model.n as f64;
        let s = self.s as f64;
        match &self.shifted {
            None => {
                // all coordinates at their minimum or all at their maximum
                let w = if self.s == 0 { model.weights[0] } else { model.weights[model.t - 1] };
                Ok(DensityEval {
                    x,
                    order: 0,
                    value: w.powi(model.n as i32),
                    abs_error_estimate: 0.0,
                    imag_residue: 0.0,
                })
            }
            Some((ln_alpha_s, theta_s, integral)) => {
                let log_factor = if model.theta == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    n * (ln_alpha_s - model.ln_alpha) + s * (model.theta - theta_s)
                };
                let scale = log_factor.exp();
                checked(x, 0, integral.value * scale, integral.abs_error * scale)
            }
        }
    }
}

/// `f(x)`, `f'(x)` or `f''(x)` (order 0, 1, 2) by adaptive quadrature.
/// Order 0 at a lattice point `x = s - k` integrates along the centred
/// contour, which keeps full relative accuracy far in the tails.
pub fn density(model: &TiltedModel, x: f64, order: u8) -> Result<DensityEval> {
    if order > 2 {
        return Err(Error::Precondition("order must be 0, 1 or 2".into()));
    }
    let s = x + model.k;
    let shape = GridShape::new(model.t, model.n)?;
    if order == 0 && (s - s.round()).abs() < 1e-12 && s.round() >= 0.0 && s.round() <= shape.top() as f64 {
        return LatticeIntegral::new(&shape, s.round() as usize)?.eval(model);
    }
    let integral = real_line(model, x, order)?;
    checked(x, order, integral.value, integral.abs_error)
}

/// `α^{-n} p^s N(s)`, evaluated from the exact level size.
pub fn lattice_mass(model: &TiltedModel, level_size: &num_bigint::BigUint, s: usize) -> f64 {
    if model.theta == f64::NEG_INFINITY {
        return if s == 0 { 1.0 } else { 0.0 };
    }
    (exact::ln_big(level_size) + s as f64 * model.theta - model.n as f64 * model.ln_alpha).exp()
}
