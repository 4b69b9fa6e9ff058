//! Mean-field ODE system of a rule and its long-time limits.
//!
//! The state is `(z_1, ..., z_K, z_ω)`, the fractions of vertices in
//! components of each truncated size. [`build_ode`] synthesizes the right-hand
//! side from the rule by enumerating `S_K^ell`; [`closed_form_ode`] gives the
//! hand-reduced systems of the named families.

mod constants;
mod integrate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::rules::{Builtin, RuleError, RuleSpec, SizeClass};

pub use constants::{
    expected_tcon, kp_c2_by_quadrature, last_species_probs, limit_constants, limit_constants_with,
    theoretical_cdf, LimitConstants, LimitOptions, EULER_GAMMA,
};
pub use integrate::{integrate, Trajectory, DEFAULT_DT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("no closed-form system for `{0}`")]
    UnknownClosedForm(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Richardson check failed: half-step discrepancy {discrepancy:.3e} at dt = {dt:e}")]
    Richardson { discrepancy: f64, dt: f64 },
    #[error("rule is degenerate; limit constants do not exist")]
    Degenerate,
    #[error("z_{k} underflowed at t = {t} before the limit converged")]
    Underflow { k: u32, t: f64 },
    #[error("system has K = {system}, but the rule needs size {needed}")]
    DimensionMismatch { system: u32, needed: u32 },
}

/// Where an [`OdeSystem`] came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    GenericEnumerated,
    ClosedForm(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::GenericEnumerated => f.write_str("generic-enumerated"),
            Provenance::ClosedForm(name) => write!(f, "closed-form:{name}"),
        }
    }
}

type ClosedRhs = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
enum Rhs {
    Polynomial(Arc<Polynomial>),
    Closed(ClosedRhs),
}

/// Polynomial vector field: `f = Σ coeffs_t · Π z_j^{exps_t[j]}`.
#[derive(Debug)]
struct Polynomial {
    dim: usize,
    max_degree: usize,
    exps: Vec<u8>,
    coeffs: Vec<f64>,
}

impl Polynomial {
    fn terms(&self) -> usize {
        self.coeffs.len() / self.dim
    }

    fn eval(&self, z: &[f64], dz: &mut [f64]) {
        let dim = self.dim;
        let stride = self.max_degree + 1;
        let mut powers = vec![1.0; dim * stride];
        for j in 0..dim {
            for e in 1..stride {
                powers[j * stride + e] = powers[j * stride + e - 1] * z[j];
            }
        }
        dz.iter_mut().for_each(|d| *d = 0.0);
        for t in 0..self.terms() {
            let exps = &self.exps[t * dim..(t + 1) * dim];
            let mut m = 1.0;
            for (j, &e) in exps.iter().enumerate() {
                m *= powers[j * stride + e as usize];
            }
            for (d, c) in dz.iter_mut().zip(&self.coeffs[t * dim..(t + 1) * dim]) {
                *d += c * m;
            }
        }
    }
}

/// Right-hand side of the mean-field system over `(z_1, ..., z_K, z_ω)`.
#[derive(Clone)]
pub struct OdeSystem {
    k: u32,
    rhs: Rhs,
    provenance: Provenance,
}

impl fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSystem")
            .field("K", &self.k)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl OdeSystem {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// State length, `K + 1`.
    pub fn dim(&self) -> usize {
        self.k as usize + 1
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Number of distinct monomials for enumerated systems.
    pub fn monomial_count(&self) -> Option<usize> {
        match &self.rhs {
            Rhs::Polynomial(p) => Some(p.terms()),
            Rhs::Closed(_) => None,
        }
    }

    pub fn eval_into(&self, z: &[f64], dz: &mut [f64]) {
        debug_assert_eq!(z.len(), self.dim());
        match &self.rhs {
            Rhs::Polynomial(p) => p.eval(z, dz),
            Rhs::Closed(f) => f(z, dz),
        }
    }

    pub fn eval(&self, z: &[f64]) -> Vec<f64> {
        let mut dz = vec![0.0; self.dim()];
        self.eval_into(z, &mut dz);
        dz
    }

    /// Canonical initial condition: every vertex isolated.
    pub fn initial_state(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        z[0] = 1.0;
        z
    }
}

/// Synthesizes `f_k = f_k^+ - f_k^-` and `f_ω` by enumerating every size
/// vector and crediting its monomial to the coordinates touched by the
/// chosen merge.
pub fn build_ode(rule: &RuleSpec) -> Result<OdeSystem, DynamicsError> {
    let k = rule.k();
    let dim = k as usize + 1;
    let omega = k as usize;
    let mut terms: BTreeMap<Vec<u8>, Vec<i64>> = BTreeMap::new();
    rule.try_for_each_decision(|sizes, edge| {
        let mut delta = vec![0i64; dim];
        match (sizes[2 * edge - 2], sizes[2 * edge - 1]) {
            (SizeClass::Size(a), SizeClass::Size(b)) => {
                let (a, b) = (a as i64, b as i64);
                delta[a as usize - 1] -= a;
                delta[b as usize - 1] -= b;
                let merged = a + b;
                if merged <= k as i64 {
                    delta[merged as usize - 1] += merged;
                } else {
                    delta[omega] += merged;
                }
            }
            (SizeClass::Size(a), SizeClass::Omega) | (SizeClass::Omega, SizeClass::Size(a)) => {
                delta[a as usize - 1] -= a as i64;
                delta[omega] += a as i64;
            }
            (SizeClass::Omega, SizeClass::Omega) => return,
        }
        let mut exps = vec![0u8; dim];
        for s in sizes {
            exps[s.code(k) as usize] += 1;
        }
        let acc = terms.entry(exps).or_insert_with(|| vec![0; dim]);
        for (a, d) in acc.iter_mut().zip(&delta) {
            *a += d;
        }
    })?;

    let mut exps = Vec::new();
    let mut coeffs = Vec::new();
    for (e, c) in terms {
        if c.iter().all(|&v| v == 0) {
            continue;
        }
        exps.extend_from_slice(&e);
        coeffs.extend(c.iter().map(|&v| v as f64));
    }
    Ok(OdeSystem {
        k,
        rhs: Rhs::Polynomial(Arc::new(Polynomial {
            dim,
            max_degree: rule.ell(),
            exps,
            coeffs,
        })),
        provenance: Provenance::GenericEnumerated,
    })
}

/// Hand-reduced systems of the named families.
///
/// * `bohman-frieze`: `K = 1`, `z' = -2z - 2z^2 + 2z^3`.
/// * `kp`: the `K = 2` extension of KP, with `z_1' = -4z_1 + 4z_1^2 - 2z_1^3`.
/// * `lexicographic`: scalar equation `z' = -2 + (1 - z^2)^{ell/2} + (1 - z)^ell`
///   in `z = z_1`; the second coordinate lumps every other size.
pub fn closed_form_ode(name: Builtin, ell: Option<usize>) -> Result<OdeSystem, DynamicsError> {
    let (k, rhs): (u32, ClosedRhs) = match name {
        Builtin::BohmanFrieze => (
            1,
            Arc::new(|z: &[f64], dz: &mut [f64]| {
                let x = z[0];
                let f = -2.0 * x - 2.0 * x * x + 2.0 * x * x * x;
                dz[0] = f;
                dz[1] = -f;
            }),
        ),
        Builtin::Kp => (
            2,
            Arc::new(|z: &[f64], dz: &mut [f64]| {
                let (a, b) = (z[0], z[1]);
                let a2 = a * a;
                dz[0] = -4.0 * a + 4.0 * a2 - 2.0 * a2 * a;
                dz[1] = 2.0 * a2 * a2 - 4.0 * a2 * a - 4.0 * a2 * b + 4.0 * a2 + 4.0 * a * b - 4.0 * b;
                dz[2] = -(dz[0] + dz[1]);
            }),
        ),
        Builtin::Lexicographic => {
            let ell = ell.ok_or_else(|| DynamicsError::InvalidParameter("lexicographic needs ell".into()))?;
            if ell < 2 || ell % 2 != 0 {
                return Err(RuleError::InvalidEll(ell).into());
            }
            let half = (ell / 2) as f64;
            let full = ell as f64;
            (
                1,
                Arc::new(move |z: &[f64], dz: &mut [f64]| {
                    let x = z[0];
                    // (1-x^2)^{ell/2} - 1 + (1-x)^ell - 1, without cancellation near x = 0.
                    let f = (half * (-x * x).ln_1p()).exp_m1() + (full * (-x).ln_1p()).exp_m1();
                    dz[0] = f;
                    dz[1] = -f;
                }),
            )
        }
        other => return Err(DynamicsError::UnknownClosedForm(other.id().to_string())),
    };
    Ok(OdeSystem {
        k,
        rhs: Rhs::Closed(rhs),
        provenance: Provenance::ClosedForm(name.id().to_string()),
    })
}

/// Best available system for a rule: enumerated when feasible, otherwise the
/// scalar closed form for the lexicographic family.
pub fn system_for(rule: &RuleSpec) -> Result<OdeSystem, DynamicsError> {
    match build_ode(rule) {
        Ok(sys) => Ok(sys),
        Err(DynamicsError::Rule(RuleError::EnumerationInfeasible { .. }))
            if rule.kind() == crate::rules::RuleKind::Builtin(Builtin::Lexicographic) =>
        {
            closed_form_ode(Builtin::Lexicographic, Some(rule.ell()))
        }
        Err(e) => Err(e),
    }
}
