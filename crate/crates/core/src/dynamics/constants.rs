use serde::{Deserialize, Serialize};

use super::integrate::Rk4;
use super::{DynamicsError, OdeSystem, DEFAULT_DT};
use crate::rules::RuleSpec;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Knobs for [`limit_constants_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    pub dt: f64,
    /// Give up (unconverged) at this time.
    pub t_cap: f64,
    /// Width of the window over which `ext·t + log z_k` must be flat.
    pub window: f64,
    pub tolerance: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            dt: DEFAULT_DT,
            t_cap: 80.0,
            window: 5.0,
            tolerance: 1e-8,
        }
    }
}

/// Limits `c_k = lim (ext·t + log z_k(t))` over the slow sizes and the
/// derived Gumbel weights `d_k = e^{c_k} / k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub rule: String,
    pub ext: u64,
    pub slow: Vec<u32>,
    #[serde(rename = "c_k")]
    pub c: Vec<f64>,
    #[serde(rename = "d_k")]
    pub d: Vec<f64>,
    pub c0: f64,
    pub converged: bool,
    pub convergence_estimate: f64,
    pub dt: f64,
    pub t_final: f64,
}

impl LimitConstants {
    /// Builds constants from given `d_k` values, e.g. for synthetic checks.
    pub fn from_weights(rule: impl Into<String>, ext: u64, slow: Vec<u32>, d: Vec<f64>) -> Self {
        assert_eq!(slow.len(), d.len());
        let c = slow.iter().zip(&d).map(|(&k, &dk)| (k as f64 * dk).ln()).collect();
        let c0 = d.iter().sum::<f64>().ln();
        LimitConstants {
            rule: rule.into(),
            ext,
            slow,
            c,
            d,
            c0,
            converged: true,
            convergence_estimate: 0.0,
            dt: 0.0,
            t_final: 0.0,
        }
    }

    pub fn d_total(&self) -> f64 {
        self.d.iter().sum()
    }

    pub fn c_of(&self, k: u32) -> Option<f64> {
        self.slow.iter().position(|&s| s == k).map(|i| self.c[i])
    }

    pub fn d_of(&self, k: u32) -> Option<f64> {
        self.slow.iter().position(|&s| s == k).map(|i| self.d[i])
    }
}

pub fn limit_constants(rule: &RuleSpec, sys: &OdeSystem) -> Result<LimitConstants, DynamicsError> {
    limit_constants_with(rule, sys, LimitOptions::default())
}

/// Integrates until `w_k(t) = ext·t + log z_k(t)` moves less than the
/// tolerance over the window for every slow `k`, or `t` reaches the cap.
pub fn limit_constants_with(
    rule: &RuleSpec,
    sys: &OdeSystem,
    opts: LimitOptions,
) -> Result<LimitConstants, DynamicsError> {
    let sig = rule.signature();
    if sig.degenerate {
        return Err(DynamicsError::Degenerate);
    }
    if let Some(&needed) = sig.slow.iter().max() {
        if needed > sys.k() {
            return Err(DynamicsError::DimensionMismatch { system: sys.k(), needed });
        }
    }
    if !(opts.dt > 0.0) || !(opts.window > 0.0) || !(opts.t_cap > opts.window) {
        return Err(DynamicsError::InvalidParameter(format!("{opts:?}")));
    }

    let ext = sig.ext as f64;
    let slow = sig.slow.clone();
    let w_of = |z: &[f64], t: f64| -> Result<Vec<f64>, DynamicsError> {
        slow.iter()
            .map(|&k| {
                let zk = z[k as usize - 1];
                if !(zk > 1e-300) || !zk.is_finite() {
                    Err(DynamicsError::Underflow { k, t })
                } else {
                    Ok(ext * t + zk.ln())
                }
            })
            .collect()
    };

    // RK4 drifts w by about (ext·h)^5 / 120 per step, which would swamp the
    // tolerance for fast-decaying rules; keep ext·h <= 4e-3.
    let dt = opts.dt.min(4e-3 / ext);
    // Check the window every quarter time unit.
    let steps_per_check = ((0.25 / dt).round() as usize).max(1);
    let h = 0.25 / steps_per_check as f64;
    let checks_per_window = (opts.window / 0.25).round().max(1.0) as usize;
    let max_checks = (opts.t_cap / 0.25).floor() as usize;

    let mut z = sys.initial_state();
    let mut rk = Rk4::new(z.len());
    let mut history: Vec<Vec<f64>> = Vec::with_capacity(max_checks + 1);
    let mut converged = false;
    let mut estimate = f64::INFINITY;
    let mut t = 0.0;
    let mut w = Vec::new();

    for check in 1..=max_checks {
        for _ in 0..steps_per_check {
            rk.step(sys, &mut z, h);
        }
        t = check as f64 * 0.25;
        w = w_of(&z, t)?;
        history.push(w.clone());
        if check > checks_per_window {
            let old = &history[check - 1 - checks_per_window];
            estimate = w.iter().zip(old).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if estimate < opts.tolerance {
                converged = true;
                break;
            }
        }
    }

    let d: Vec<f64> = slow.iter().zip(&w).map(|(&k, &c)| c.exp() / k as f64).collect();
    let c0 = d.iter().sum::<f64>().ln();
    Ok(LimitConstants {
        rule: rule.name().to_string(),
        ext: sig.ext,
        slow,
        c: w,
        d,
        c0,
        converged,
        convergence_estimate: estimate,
        dt: h,
        t_final: t,
    })
}

/// Limiting `P[ext·T_con/n - log n <= c] = Π_k exp(-d_k e^{-c})`.
pub fn theoretical_cdf(consts: &LimitConstants, c: f64) -> f64 {
    (-consts.d_total() * (-c).exp()).exp()
}

/// `(n log n + γ n + c_0 n) / ext`.
pub fn expected_tcon(consts: &LimitConstants, n: u64) -> f64 {
    let n = n as f64;
    (n * n.ln() + EULER_GAMMA * n + consts.c0 * n) / consts.ext as f64
}

/// Limiting probability that size `k` is the last to vanish, `d_k / Σ d`.
pub fn last_species_probs(consts: &LimitConstants) -> Vec<(u32, f64)> {
    let total = consts.d_total();
    consts.slow.iter().zip(&consts.d).map(|(&k, &d)| (k, d / total)).collect()
}

/// `c_2` of the extended KP rule from its integral representation
/// `log 2 + log ∫_0^1 e^{atan(1-x)} / sqrt(x^2 - 2x + 2) dx`, by composite
/// Simpson with `panels` (even) panels.
pub fn kp_c2_by_quadrature(panels: usize) -> f64 {
    let panels = panels.max(2) + panels % 2;
    let f = |x: f64| (1.0 - x).atan().exp() / (x * x - 2.0 * x + 2.0).sqrt();
    let h = 1.0 / panels as f64;
    let mut sum = f(0.0) + f(1.0);
    for i in 1..panels {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * f(i as f64 * h);
    }
    2f64.ln() + (sum * h / 3.0).ln()
}
