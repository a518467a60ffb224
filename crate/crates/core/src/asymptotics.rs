// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Growth rate of the weighted count of feasible trees.
//!
//! The counts `R_n` satisfy `R_0 = 1` and
//!
//! ```text
//! R_n = Σ_{k≥3} q^{2k-2} Σ_{n_1+…+n_{2k-2} = n-1} R_{n_1}⋯R_{n_{2k-2}}
//! ```
//!
//! with `q = (Δ-1)/K`. Writing `R = 1 + W`, the generating function solves
//! `W = z φ(W)` where `φ(x) = (q(x+1))⁴ / (1 - (q(x+1))²)`. The coefficients
//! grow like `ρ^{-n}` with `ρ = τ/φ(τ)` and `τ` the root in `(0, 1/q - 1)` of
//! `τ φ'(τ) / φ(τ) = 1`.
//!
//! Two independent routes to the same number are provided: the root of the
//! characteristic equation ([`solve_characteristic`]) and extrapolated
//! coefficient ratios of the series ([`series_coefficients`],
//! [`rate_estimate`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AsymptoticsError {
    #[error("q must lie in (0, 1), got {0}")]
    BadQ(f64),
    #[error("pole: q(x+1) = {0} >= 1")]
    Pole(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("characteristic function has no sign change on (0, r)")]
    NoSignChange,
    #[error("series order {order} exceeds the cap {cap}")]
    OrderTooLarge { order: usize, cap: usize },
    #[error("series coefficients diverged at order {0}")]
    Divergence(usize),
    #[error("need at least {need} coefficients, have {have}")]
    TooFewCoefficients { need: usize, have: usize },
    #[error("rho must be positive and finite, got {0}")]
    BadRho(f64),
    #[error("n must be at least 1")]
    BadN,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "snake_case")]
pub enum QProvenance {
    Palette {
        max_degree: usize,
        palette_size: u32,
    },
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QValue {
    pub q: f64,
    pub provenance: QProvenance,
}

impl QValue {
    pub fn explicit(q: f64) -> Result<QValue, AsymptoticsError> {
        check_q(q)?;
        Ok(QValue {
            q,
            provenance: QProvenance::Explicit,
        })
    }

    /// `(Δ - 1) / K`.
    pub fn from_palette(max_degree: usize, palette_size: u32) -> Result<QValue, AsymptoticsError> {
        let q = (max_degree as f64 - 1.0) / palette_size as f64;
        check_q(q)?;
        Ok(QValue {
            q,
            provenance: QProvenance::Palette {
                max_degree,
                palette_size,
            },
        })
    }
}

fn check_q(q: f64) -> Result<(), AsymptoticsError> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(AsymptoticsError::BadQ(q))
    }
}

fn inside(x: f64, q: f64) -> Result<f64, AsymptoticsError> {
    check_q(q)?;
    let u = q * (x + 1.0);
    if u >= 1.0 || u.is_nan() {
        Err(AsymptoticsError::Pole(u))
    } else {
        Ok(u)
    }
}

/// Radius of convergence of φ around 0: `1/q - 1`.
pub fn radius(q: f64) -> f64 {
    1.0 / q - 1.0
}

pub fn phi(x: f64, q: f64) -> Result<f64, AsymptoticsError> {
    let u = inside(x, q)?;
    let u2 = u * u;
    Ok(u2 * u2 / (1.0 - u2))
}

pub fn phi_prime(x: f64, q: f64) -> Result<f64, AsymptoticsError> {
    let u = inside(x, q)?;
    let u2 = u * u;
    let den = 1.0 - u2;
    Ok(q * u2 * u * (4.0 - 2.0 * u2) / (den * den))
}

/// `x φ'(x) / φ(x)`, simplified to avoid forming φ.
pub fn characteristic_ratio(x: f64, q: f64) -> Result<f64, AsymptoticsError> {
    let u = inside(x, q)?;
    Ok(x * q * (4.0 - 2.0 * u * u) / (u * (1.0 - u * u)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharSolution {
    pub q: f64,
    /// `r = 1/q - 1`.
    pub radius: f64,
    pub tau: f64,
    /// `τ / φ(τ)`.
    pub rho: f64,
    /// `1 / φ'(τ)`, equal to `rho` at the root.
    pub rho_via_derivative: f64,
    /// `|τφ'(τ)/φ(τ) - 1|`.
    pub characteristic_residual: f64,
    /// `|ρ - 1/φ'(τ)|`.
    pub identity_residual: f64,
    /// Width of the final bisection bracket.
    pub bracket_width: f64,
    pub iterations: u32,
}

const MAX_BISECTIONS: u32 = 2000;

/// Bisection for `τ` on `(0, r)`. The characteristic ratio is increasing
/// there, tends to 0 at the left end and to infinity at the right end, so
/// the bracket always holds the unique root.
///
/// Bisection continues until the bracket is no wider than `tol` and then on
/// to floating-point resolution, so `tau` is typically far more accurate
/// than `tol`.
pub fn solve_characteristic(q: f64, tol: f64) -> Result<CharSolution, AsymptoticsError> {
    check_q(q)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(AsymptoticsError::BadTolerance(tol));
    }
    let r = radius(q);
    let f = |x: f64| characteristic_ratio(x, q).map(|v| v - 1.0);
    let mut lo = 0.0f64;
    // The largest float strictly below r that is still inside the pole.
    let mut hi = r;
    while inside(hi, q).is_err() {
        hi = f64::from_bits(hi.to_bits() - 1);
    }
    if f(hi)? <= 0.0 {
        return Err(AsymptoticsError::NoSignChange);
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let tau = 0.5 * (lo + hi);
    if hi - lo > tol {
        return Err(AsymptoticsError::NoSignChange);
    }
    let rho = tau / phi(tau, q)?;
    let rho_via_derivative = 1.0 / phi_prime(tau, q)?;
    Ok(CharSolution {
        q,
        radius: r,
        tau,
        rho,
        rho_via_derivative,
        characteristic_residual: f(tau)?.abs(),
        identity_residual: (rho - rho_via_derivative).abs(),
        bracket_width: hi - lo,
        iterations,
    })
}

/// Largest supported truncation order.
pub const MAX_SERIES_ORDER: usize = 250;

/// Coefficients `R_0 .. R_N`, stored rescaled.
///
/// `scaled[n] = R_n · s^n` with `s = 1/φ(0)`; this keeps the values inside
/// the `f64` exponent range for every `q` in `(0, 1/2]` up to order 250,
/// where the raw coefficients would underflow for small `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    pub q: f64,
    pub scale: f64,
    pub scaled: Vec<f64>,
}

impl PowerSeries {
    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.scaled.len() - 1
    }

    pub fn ln_coefficient(&self, n: usize) -> f64 {
        self.scaled[n].ln() - n as f64 * self.scale.ln()
    }

    /// `R_n`; may underflow to zero for large `n`.
    pub fn coefficient(&self, n: usize) -> f64 {
        self.ln_coefficient(n).exp()
    }

    /// `R_{n+1} / R_n`.
    pub fn ratio(&self, n: usize) -> f64 {
        self.scaled[n + 1] / (self.scaled[n] * self.scale)
    }
}

fn mul_trunc(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `1 / a` modulo `y^len`; `a[0]` must be nonzero.
fn inv_trunc(a: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    out[0] = 1.0 / a[0];
    for n in 1..len {
        let mut acc = 0.0;
        for k in 1..=n.min(a.len() - 1) {
            acc += a[k] * out[n - k];
        }
        out[n] = -acc / a[0];
    }
    out
}

/// `(φ(W), φ'(W))` as series modulo `y^len`.
fn phi_series(w: &[f64], q: f64, len: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u: Vec<f64> = w.iter().take(len).map(|&c| q * c).collect();
    u.resize(len, 0.0);
    u[0] += q;
    let u2 = mul_trunc(&u, &u, len);
    let u3 = mul_trunc(&u2, &u, len);
    let u4 = mul_trunc(&u2, &u2, len);
    let u5 = mul_trunc(&u4, &u, len);
    let den: Vec<f64> = u2
        .iter()
        .enumerate()
        .map(|(i, &c)| if i == 0 { 1.0 - c } else { -c })
        .collect();
    let inv = inv_trunc(&den, len);
    let value = mul_trunc(&u4, &inv, len);
    let num: Vec<f64> = u3
        .iter()
        .zip(&u5)
        .map(|(&a, &b)| q * (4.0 * a - 2.0 * b))
        .collect();
    let derivative = mul_trunc(&mul_trunc(&num, &inv, len), &inv, len);
    (value, derivative)
}

/// `R_0 .. R_N` by Newton iteration on `W = s·y·φ(W)` in the rescaled
/// variable, doubling the number of correct coefficients per step.
pub fn series_coefficients(q: f64, order: usize) -> Result<PowerSeries, AsymptoticsError> {
    check_q(q)?;
    if order > MAX_SERIES_ORDER {
        return Err(AsymptoticsError::OrderTooLarge {
            order,
            cap: MAX_SERIES_ORDER,
        });
    }
    let scale = 1.0 / phi(0.0, q)?;
    let target = order + 1;
    let mut w = vec![0.0];
    let mut prec = 1;
    while prec < target {
        prec = (2 * prec).min(target);
        let (value, derivative) = phi_series(&w, q, prec);
        // F = W - s·y·φ(W),  F' = 1 - s·y·φ'(W).
        let mut f = vec![0.0; prec];
        let mut df = vec![0.0; prec];
        df[0] = 1.0;
        for n in 0..prec {
            f[n] = w.get(n).copied().unwrap_or(0.0);
            if n > 0 {
                f[n] -= scale * value[n - 1];
                df[n] -= scale * derivative[n - 1];
            }
        }
        let step = mul_trunc(&f, &inv_trunc(&df, prec), prec);
        w = (0..prec)
            .map(|n| w.get(n).copied().unwrap_or(0.0) - step[n])
            .collect();
    }
    let mut scaled = w;
    scaled.resize(target, 0.0);
    scaled[0] = 1.0;
    for (n, &c) in scaled.iter().enumerate() {
        if !c.is_finite() || c > f64::MAX / 1e6 {
            return Err(AsymptoticsError::Divergence(n));
        }
    }
    // Newton corrections can leave round-off noise of either sign in place
    // of a coefficient that is mathematically positive; a clearly negative
    // value means the iteration broke down.
    for (n, c) in scaled.iter_mut().enumerate().skip(1) {
        if *c <= 0.0 {
            return Err(AsymptoticsError::Divergence(n));
        }
    }
    Ok(PowerSeries { q, scale, scaled })
}

/// Unscaled coefficients from the convolution recurrence itself, summing
/// the inner series over `k` until the remaining terms are provably
/// negligible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceCoefficients {
    pub coefficients: Vec<f64>,
    /// Largest relative bound on the neglected tail over all orders.
    pub relative_tail_bound: f64,
}

const RECURRENCE_TAIL: f64 = 1e-18;
pub const MAX_RECURRENCE_ORDER: usize = 80;

/// Direct evaluation of the recurrence. For order `n` the inner sum
/// `[z^{n-1}] R^{2k-2}` is bounded by `S^{2k-2}` with `S = R_0 + … + R_{n-1}`,
/// so terms beyond `j = 2k-2` add at most `(qS)^j / (1 - (qS)²)`.
pub fn recurrence_coefficients(
    q: f64,
    order: usize,
) -> Result<RecurrenceCoefficients, AsymptoticsError> {
    check_q(q)?;
    if order > MAX_RECURRENCE_ORDER {
        return Err(AsymptoticsError::OrderTooLarge {
            order,
            cap: MAX_RECURRENCE_ORDER,
        });
    }
    let mut r = vec![1.0f64];
    let mut worst_tail = 0.0f64;
    for n in 1..=order {
        let len = n;
        let known = &r[..len];
        let s: f64 = known.iter().sum();
        let x = q * s;
        if x >= 1.0 {
            return Err(AsymptoticsError::Divergence(n));
        }
        let sq = mul_trunc(known, known, len);
        let mut power = mul_trunc(&sq, &sq, len);
        let mut j = 4i32;
        let mut total = 0.0;
        loop {
            total += q.powi(j) * power[n - 1];
            let tail = x.powi(j + 2) / (1.0 - x * x);
            if tail <= RECURRENCE_TAIL * total || tail == 0.0 {
                worst_tail = worst_tail.max(if total > 0.0 { tail / total } else { 0.0 });
                break;
            }
            power = mul_trunc(&power, &sq, len);
            j += 2;
        }
        r.push(total);
    }
    Ok(RecurrenceCoefficients {
        coefficients: r,
        relative_tail_bound: worst_tail,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Extrapolated limit of `R_{n+1}/R_n`, i.e. `1/ρ`.
    pub rate: f64,
    /// Raw ratio at the highest available order.
    pub last_ratio: f64,
    /// Spread of the extrapolated values over the averaging window.
    pub spread: f64,
    pub converged: bool,
}

pub const MIN_RATE_ORDER: usize = 50;
const RATE_WINDOW: usize = 10;

/// Extrapolates the coefficient ratios `r_n = R_{n+1}/R_n`, which behave
/// like `L(1 + a/n + b/n² + …)`, with second-order Richardson steps over
/// the last few orders and averages them.
pub fn rate_estimate(series: &PowerSeries) -> Result<RateEstimate, AsymptoticsError> {
    let order = series.order();
    if order < MIN_RATE_ORDER {
        return Err(AsymptoticsError::TooFewCoefficients {
            need: MIN_RATE_ORDER + 1,
            have: order + 1,
        });
    }
    let last = order - 1;
    let richardson = |n: usize| {
        let nf = n as f64;
        let (a, b, c) = (series.ratio(n), series.ratio(n + 1), series.ratio(n + 2));
        0.5 * nf * nf * a - (nf + 1.0).powi(2) * b + 0.5 * (nf + 2.0).powi(2) * c
    };
    let values: Vec<f64> = (last - 1 - RATE_WINDOW..last - 1).map(richardson).collect();
    let rate = values.iter().sum::<f64>() / values.len() as f64;
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max - min;
    Ok(RateEstimate {
        rate,
        last_ratio: series.ratio(last),
        spread,
        converged: rate.is_finite() && spread <= 1e-6 * rate.abs().max(f64::MIN_POSITIVE),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    /// `n^m ρ^{-n}`; may overflow to infinity.
    pub value: f64,
    pub ln_value: f64,
    /// `ρ ≤ 1`: the bound does not decay.
    pub vacuous: bool,
    /// The bound decreases for `n` beyond `m / ln ρ`.
    pub decreasing_beyond: Option<f64>,
}

pub fn tail_bound(edge_count: usize, rho: f64, n: u64) -> Result<TailBound, AsymptoticsError> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(AsymptoticsError::BadRho(rho));
    }
    if n == 0 {
        return Err(AsymptoticsError::BadN);
    }
    let m = edge_count as f64;
    let ln_value = m * (n as f64).ln() - n as f64 * rho.ln();
    Ok(TailBound {
        value: ln_value.exp(),
        ln_value,
        vacuous: rho <= 1.0,
        decreasing_beyond: (rho > 1.0).then(|| m / rho.ln()),
    })
}

/// One line of the asymptotics table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRow {
    pub q: f64,
    pub r: f64,
    pub tau: f64,
    pub rho: f64,
    pub inverse_rho: f64,
    pub rate_estimate: f64,
    pub rate_error: f64,
    pub characteristic_residual: f64,
    pub identity_residual: f64,
    pub rate_converged: bool,
}

pub fn asymptotics_row(q: f64, order: usize, tol: f64) -> Result<AsymptoticsRow, AsymptoticsError> {
    let sol = solve_characteristic(q, tol)?;
    let series = series_coefficients(q, order)?;
    let est = rate_estimate(&series)?;
    Ok(AsymptoticsRow {
        q,
        r: sol.radius,
        tau: sol.tau,
        rho: sol.rho,
        inverse_rho: 1.0 / sol.rho,
        rate_estimate: est.rate,
        rate_error: (est.rate - 1.0 / sol.rho).abs(),
        characteristic_residual: sol.characteristic_residual,
        identity_residual: sol.identity_residual,
        rate_converged: est.converged,
    })
}
