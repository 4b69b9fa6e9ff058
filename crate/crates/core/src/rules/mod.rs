//! Bounded-size decision rules.
//!
//! A `(K, ell)`-rule sees the truncated component sizes of `ell` sampled
//! vertices and picks one of the `ell / 2` candidate edges
//! `{v_1, v_2}, {v_3, v_4}, ...`. Sizes above `K` are collapsed into
//! [`SizeClass::Omega`].
//!
//! Rules are stored as functions. A dense lookup table is materialized lazily
//! when `(K + 1)^ell` is small enough, which is what the simulator hot loop
//! uses; larger rules (e.g. `lexicographic(8, 16)`) are evaluated directly.

mod builtin;
mod document;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

pub use builtin::{bohman_frieze, erdos_renyi, kp, lexicographic, omega_avoider, Builtin};
pub use document::{RuleDocument, TableEntry};

/// Largest `(K + 1)^ell` for which vectors are enumerated or tabulated.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("ell must be even and at least 2, got {0}")]
    InvalidEll(usize),
    #[error("K must be at least 1")]
    InvalidK,
    #[error("size vector has length {got}, rule expects {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("size class {class} is not valid for K = {k}")]
    InvalidSizeClass { class: SizeClass, k: u32 },
    #[error("decision {index} is outside [1, {max}]")]
    DecisionOutOfRange { index: usize, max: usize },
    #[error("size {k} is outside [1, {max}]")]
    SizeOutOfRange { k: u32, max: u32 },
    #[error("cannot extend a K = {from} rule to K' = {to}; K' must be larger")]
    ExtendNotLarger { from: u32, to: u32 },
    #[error("lexicographic rule requires K >= ell/2 (K = {k}, ell = {ell})")]
    LexicographicK { k: u32, ell: usize },
    #[error(
        "enumeration infeasible: (K+1)^ell = {vectors} exceeds the budget of {budget} vectors; \
         use a closed-form system instead"
    )]
    EnumerationInfeasible { vectors: u128, budget: u64 },
    #[error("rule is degenerate (ext = 0); the Gumbel connectivity limit does not apply")]
    Degenerate,
    #[error("unknown builtin rule `{0}`")]
    UnknownBuiltin(String),
    #[error("cannot parse size class `{0}`")]
    ParseSizeClass(String),
    #[error("table rule does not cover vector {0}")]
    IncompleteTable(String),
    #[error("invalid rule document: {0}")]
    Document(String),
}

/// Truncated component size: `1..=K` or "larger than K".
///
/// The derived order puts every `Size` below `Omega`, so `1 < 2 < ... < K < ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeClass {
    Size(u32),
    Omega,
}

impl SizeClass {
    #[inline]
    pub fn truncate(size: u64, k: u32) -> SizeClass {
        if size <= k as u64 {
            SizeClass::Size(size as u32)
        } else {
            SizeClass::Omega
        }
    }

    pub fn is_valid_for(self, k: u32) -> bool {
        match self {
            SizeClass::Size(s) => (1..=k).contains(&s),
            SizeClass::Omega => true,
        }
    }

    pub fn is_small(self) -> bool {
        matches!(self, SizeClass::Size(_))
    }

    /// Dense code: `Size(s)` maps to `s - 1`, `Omega` maps to `k`.
    #[inline]
    pub(crate) fn code(self, k: u32) -> u8 {
        match self {
            SizeClass::Size(s) => (s - 1) as u8,
            SizeClass::Omega => k as u8,
        }
    }

    #[inline]
    pub(crate) fn from_code(code: u8, k: u32) -> SizeClass {
        if (code as u32) < k {
            SizeClass::Size(code as u32 + 1)
        } else {
            SizeClass::Omega
        }
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeClass::Size(s) => write!(f, "{s}"),
            SizeClass::Omega => f.write_str("w"),
        }
    }
}

impl FromStr for SizeClass {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "w" | "W" | "ω" | "omega" => Ok(SizeClass::Omega),
            other => other
                .parse::<u32>()
                .ok()
                .filter(|&v| v >= 1)
                .map(SizeClass::Size)
                .ok_or_else(|| RuleError::ParseSizeClass(s.to_string())),
        }
    }
}

/// Formats a size vector as `(1,w,1,1)`.
pub fn format_vector(sizes: &[SizeClass]) -> String {
    let parts: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Decision function: receives exactly `ell` valid size classes and returns a
/// 1-based edge index in `[1, ell/2]`.
pub type DecideFn = Arc<dyn Fn(&[SizeClass]) -> usize + Send + Sync>;

/// How a rule was constructed; drives serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Builtin(Builtin),
    Table,
    Custom,
}

struct Inner {
    name: String,
    k: u32,
    ell: usize,
    kind: RuleKind,
    decide: DecideFn,
    table: OnceLock<Option<Arc<[u8]>>>,
}

/// An immutable `(K, ell)`-rule. Cloning is cheap and clones share the
/// cached decision table.
#[derive(Clone)]
pub struct RuleSpec {
    inner: Arc<Inner>,
}

impl fmt::Debug for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RuleSpec")
            .field("name", &self.inner.name)
            .field("K", &self.inner.k)
            .field("ell", &self.inner.ell)
            .field("kind", &self.inner.kind)
            .finish()
    }
}

/// Number of vectors in `S_K^ell`, saturating in `u128`.
pub fn vector_count(k: u32, ell: usize) -> u128 {
    let base = k as u128 + 1;
    let mut total: u128 = 1;
    for _ in 0..ell {
        total = total.saturating_mul(base);
    }
    total
}

impl RuleSpec {
    /// Wraps an arbitrary decision function. The function must be pure and
    /// return a 1-based edge index.
    pub fn from_fn<F>(name: impl Into<String>, k: u32, ell: usize, decide: F) -> Result<Self, RuleError>
    where
        F: Fn(&[SizeClass]) -> usize + Send + Sync + 'static,
    {
        Self::with_kind(name.into(), k, ell, RuleKind::Custom, Arc::new(decide))
    }

    pub(crate) fn with_kind(
        name: String,
        k: u32,
        ell: usize,
        kind: RuleKind,
        decide: DecideFn,
    ) -> Result<Self, RuleError> {
        if ell < 2 || ell % 2 != 0 {
            return Err(RuleError::InvalidEll(ell));
        }
        if k == 0 || k > 250 {
            return Err(RuleError::InvalidK);
        }
        Ok(RuleSpec {
            inner: Arc::new(Inner {
                name,
                k,
                ell,
                kind,
                decide,
                table: OnceLock::new(),
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    /// Truncation bound `K`.
    pub fn k(&self) -> u32 {
        self.inner.k
    }

    /// Number of sampled vertices per round.
    pub fn ell(&self) -> usize {
        self.inner.ell
    }

    pub fn edges(&self) -> usize {
        self.inner.ell / 2
    }

    pub fn kind(&self) -> RuleKind {
        self.inner.kind
    }

    /// Checked decision: validates the vector and the returned index.
    pub fn decide(&self, sizes: &[SizeClass]) -> Result<usize, RuleError> {
        if sizes.len() != self.ell() {
            return Err(RuleError::WrongLength {
                expected: self.ell(),
                got: sizes.len(),
            });
        }
        if let Some(&bad) = sizes.iter().find(|s| !s.is_valid_for(self.k())) {
            return Err(RuleError::InvalidSizeClass { class: bad, k: self.k() });
        }
        let index = (self.inner.decide)(sizes);
        if index == 0 || index > self.edges() {
            return Err(RuleError::DecisionOutOfRange {
                index,
                max: self.edges(),
            });
        }
        Ok(index)
    }

    /// Unchecked decision used on the simulator hot path.
    #[inline]
    pub(crate) fn decide_raw(&self, sizes: &[SizeClass]) -> usize {
        (self.inner.decide)(sizes)
    }

    /// Whether `S_K^ell` fits inside [`ENUMERATION_BUDGET`].
    pub fn enumerable(&self) -> bool {
        vector_count(self.k(), self.ell()) <= ENUMERATION_BUDGET as u128
    }

    /// Dense table of 0-based edge choices indexed by the little-endian
    /// base-`(K+1)` number formed by the size codes. `None` when the rule is
    /// too large to tabulate.
    pub(crate) fn table(&self) -> Option<&[u8]> {
        self.table_arc().map(|t| &**t)
    }

    pub(crate) fn shared_table(&self) -> Option<Arc<[u8]>> {
        self.table_arc().cloned()
    }

    fn table_arc(&self) -> Option<&Arc<[u8]>> {
        self.inner
            .table
            .get_or_init(|| {
                if !self.enumerable() || self.edges() > u8::MAX as usize + 1 {
                    return None;
                }
                let mut table = Vec::with_capacity(vector_count(self.k(), self.ell()) as usize);
                self.for_each_vector(|sizes| {
                    let i = self.decide_raw(sizes);
                    assert!(
                        (1..=self.edges()).contains(&i),
                        "rule {} returned edge {i} for {}",
                        self.name(),
                        format_vector(sizes)
                    );
                    table.push((i - 1) as u8);
                });
                Some(Arc::from(table))
            })
            .as_ref()
    }

    /// Visits every vector of `S_K^ell` in table order (first coordinate
    /// varies fastest).
    fn for_each_vector(&self, mut f: impl FnMut(&[SizeClass])) {
        let k = self.k();
        let ell = self.ell();
        let mut codes = vec![0u8; ell];
        let mut sizes = vec![SizeClass::from_code(0, k); ell];
        loop {
            f(&sizes);
            let mut pos = 0;
            loop {
                if pos == ell {
                    return;
                }
                if (codes[pos] as u32) < k {
                    codes[pos] += 1;
                    sizes[pos] = SizeClass::from_code(codes[pos], k);
                    break;
                }
                codes[pos] = 0;
                sizes[pos] = SizeClass::from_code(0, k);
                pos += 1;
            }
        }
    }

    /// Visits every vector together with its 1-based decision, after checking
    /// the enumeration budget.
    pub fn try_for_each_decision(
        &self,
        mut f: impl FnMut(&[SizeClass], usize),
    ) -> Result<(), RuleError> {
        self.check_budget()?;
        match self.table() {
            Some(table) => {
                let mut idx = 0usize;
                self.for_each_vector(|sizes| {
                    f(sizes, table[idx] as usize + 1);
                    idx += 1;
                });
            }
            None => self.for_each_vector(|sizes| f(sizes, self.decide_raw(sizes))),
        }
        Ok(())
    }

    fn check_budget(&self) -> Result<(), RuleError> {
        if self.enumerable() {
            Ok(())
        } else {
            Err(RuleError::EnumerationInfeasible {
                vectors: vector_count(self.k(), self.ell()),
                budget: ENUMERATION_BUDGET,
            })
        }
    }

    /// `ext_k`: `k` times the number of positions where a lone `k` among
    /// `ω`'s ends up on the chosen edge. Uses exactly `ell` decisions.
    pub fn extinction_rate(&self, k: u32) -> Result<u64, RuleError> {
        if k == 0 || k > self.k() {
            return Err(RuleError::SizeOutOfRange { k, max: self.k() });
        }
        let mut probe = vec![SizeClass::Omega; self.ell()];
        let mut good = 0u64;
        for p in 0..self.ell() {
            probe[p] = SizeClass::Size(k);
            let edge = self.decide(&probe)?;
            if p / 2 == edge - 1 {
                good += 1;
            }
            probe[p] = SizeClass::Omega;
        }
        Ok(k as u64 * good)
    }

    pub fn signature(&self) -> RuleSignature {
        let ext_per_size: Vec<u64> = (1..=self.k())
            .map(|k| {
                self.extinction_rate(k)
                    .expect("builtin and validated rules decide inside range")
            })
            .collect();
        RuleSignature::from_rates(ext_per_size)
    }

    /// Re-expresses the rule as a `(K', ell)`-rule by truncating sizes above
    /// the original `K` to `ω` before deciding.
    pub fn extend(&self, k_prime: u32) -> Result<RuleSpec, RuleError> {
        if k_prime <= self.k() {
            return Err(RuleError::ExtendNotLarger {
                from: self.k(),
                to: k_prime,
            });
        }
        let base = self.clone();
        let k = self.k();
        let decide: DecideFn = Arc::new(move |sizes: &[SizeClass]| {
            let mut truncated: smallbuf::Buf = smallbuf::Buf::new(sizes.len());
            for (dst, &s) in truncated.as_mut().iter_mut().zip(sizes) {
                *dst = match s {
                    SizeClass::Size(v) if v <= k => s,
                    _ => SizeClass::Omega,
                };
            }
            base.decide_raw(truncated.as_ref())
        });
        let kind = match self.kind() {
            RuleKind::Builtin(b) if !b.is_parametric() => RuleKind::Builtin(b),
            _ => RuleKind::Custom,
        };
        let name = format!("{}[K={}]", self.base_name(), k_prime);
        RuleSpec::with_kind(name, k_prime, self.ell(), kind, decide)
    }

    fn base_name(&self) -> &str {
        match self.name().find("[K=") {
            Some(i) => &self.name()[..i],
            None => self.name(),
        }
    }

    /// Checks `ext < 2K + 2`; otherwise finds the smallest `K'` at which the
    /// extended rule satisfies it.
    pub fn applicability_guard(&self) -> Result<Applicability, RuleError> {
        let sig = self.signature();
        if sig.degenerate {
            return Err(RuleError::Degenerate);
        }
        if sig.ext < 2 * self.k() as u64 + 2 {
            return Ok(Applicability::Applicable);
        }
        let limit = (self.edges() as u32 * self.k()).max(self.k() + 1);
        for k_prime in self.k() + 1..=limit {
            let ext = self.extend(k_prime)?.signature().ext;
            if ext < 2 * k_prime as u64 + 2 {
                return Ok(Applicability::ExtendTo(k_prime));
            }
        }
        // Unreachable: at K' = K * ell / 2 the extension has ext <= ell * K.
        Err(RuleError::Document(format!(
            "no extension up to K' = {limit} satisfies ext < 2K'+2"
        )))
    }

    /// Exact enumeration of `C_{mu,nu}`: vectors whose chosen edge joins a
    /// `mu`-component with a `nu`-component.
    pub fn enumerate_c(&self, mu: SizeClass, nu: SizeClass) -> Result<Vec<Vec<SizeClass>>, RuleError> {
        for class in [mu, nu] {
            if !class.is_valid_for(self.k()) {
                return Err(RuleError::InvalidSizeClass { class, k: self.k() });
            }
        }
        let mut out = Vec::new();
        self.try_for_each_decision(|sizes, edge| {
            let (a, b) = (sizes[2 * edge - 2], sizes[2 * edge - 1]);
            if (a == mu && b == nu) || (a == nu && b == mu) {
                out.push(sizes.to_vec());
            }
        })?;
        Ok(out)
    }

    /// Materializes the rule as an explicit table rule.
    pub fn to_table_rule(&self) -> Result<RuleSpec, RuleError> {
        let mut entries = Vec::new();
        self.try_for_each_decision(|_, edge| entries.push(edge as u8))?;
        builtin::table_rule(self.name().to_string(), self.k(), self.ell(), entries)
    }
}

/// Outcome of the `ext < 2K + 2` check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applicability {
    Applicable,
    /// The rule must be re-expressed with this truncation bound first.
    ExtendTo(u32),
}

/// Extinction rates and the derived slow/fast partition.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RuleSignature {
    /// `ext_k` for `k = 1..=K`, stored at index `k - 1`.
    pub ext_per_size: Vec<u64>,
    pub ext: u64,
    pub slow: Vec<u32>,
    pub fast: Vec<u32>,
    pub degenerate: bool,
}

impl RuleSignature {
    pub fn from_rates(ext_per_size: Vec<u64>) -> Self {
        let ext = ext_per_size.iter().copied().min().unwrap_or(0);
        let (slow, fast): (Vec<u32>, Vec<u32>) =
            (1..=ext_per_size.len() as u32).partition(|&k| ext_per_size[k as usize - 1] == ext);
        RuleSignature {
            ext_per_size,
            ext,
            slow,
            fast,
            degenerate: ext == 0,
        }
    }

    pub fn ext_k(&self, k: u32) -> u64 {
        self.ext_per_size[k as usize - 1]
    }

    pub fn is_slow(&self, k: u32) -> bool {
        self.slow.contains(&k)
    }
}

mod smallbuf {
    use super::SizeClass;

    const INLINE: usize = 32;

    /// Scratch vector that stays on the stack for `ell <= 32`.
    pub(super) enum Buf {
        Inline([SizeClass; INLINE], usize),
        Heap(Vec<SizeClass>),
    }

    impl Buf {
        pub(super) fn new(len: usize) -> Self {
            if len <= INLINE {
                Buf::Inline([SizeClass::Omega; INLINE], len)
            } else {
                Buf::Heap(vec![SizeClass::Omega; len])
            }
        }

        pub(super) fn as_mut(&mut self) -> &mut [SizeClass] {
            match self {
                Buf::Inline(a, n) => &mut a[..*n],
                Buf::Heap(v) => v,
            }
        }

        pub(super) fn as_ref(&self) -> &[SizeClass] {
            match self {
                Buf::Inline(a, n) => &a[..*n],
                Buf::Heap(v) => v,
            }
        }
    }
}
