use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::dsu::Dsu;
use super::record::{RunRecord, RunStatus, Snapshot};
use crate::rules::{RuleSpec, SizeClass};

/// Identity of the per-run generator; part of the reproducibility contract.
pub const RNG_ID: &str = "chacha8/seed_from_u64";

/// Fraction used for `giant_time` when none is configured.
pub const DEFAULT_GIANT_EPSILON: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("the process needs at least one vertex")]
    NoVertices,
    #[error("n = {0} exceeds the supported maximum of 2^32 - 1 vertices")]
    TooManyVertices(u64),
}

/// Result of a single round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    /// Sampled vertices, in order.
    pub vertices: Vec<u32>,
    /// Truncated sizes at the start of the round.
    pub sizes: Vec<SizeClass>,
    /// 1-based index of the chosen edge.
    pub edge: usize,
    /// Component sizes that were merged, or `None` for a loop / internal edge.
    pub merged: Option<(u64, u64)>,
}

/// Per-run limits and observation plan.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Rounds at which to record `(Y_1..Y_K, ω-count)`. Rounds after
    /// connection record the final state.
    pub snapshots: Vec<u64>,
    /// Abort after this many rounds; `None` means `50 n^2`.
    pub round_cap: Option<u64>,
    /// Stop (without connecting) after this round.
    pub stop_after: Option<u64>,
    pub giant_epsilon: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            snapshots: Vec::new(),
            round_cap: None,
            stop_after: None,
            giant_epsilon: DEFAULT_GIANT_EPSILON,
        }
    }
}

impl RunOptions {
    pub fn with_snapshots(snapshots: Vec<u64>) -> Self {
        RunOptions {
            snapshots,
            ..Default::default()
        }
    }
}

pub fn default_round_cap(n: u64) -> u64 {
    50u64.saturating_mul(n).saturating_mul(n)
}

/// The evolving graph of an `R`-process, kept only as component structure.
#[derive(Clone)]
pub struct ProcessState {
    rule: RuleSpec,
    table: Option<Arc<[u8]>>,
    n: u64,
    seed: u64,
    dsu: Dsu,
    /// `Y_k` at index `k - 1`: vertices in components of exactly `k` vertices.
    y: Vec<u64>,
    omega_components: u64,
    components: u64,
    largest: u64,
    round: u64,
    /// Round since which `Y_k` has been zero, if it is zero now.
    zero_since: Vec<Option<u64>>,
    rng: ChaCha8Rng,
    roots: Vec<u32>,
    classes: Vec<SizeClass>,
}

impl ProcessState {
    pub fn new(rule: &RuleSpec, n: u64, seed: u64) -> Result<Self, SimError> {
        if n == 0 {
            return Err(SimError::NoVertices);
        }
        if n > u32::MAX as u64 {
            return Err(SimError::TooManyVertices(n));
        }
        let k = rule.k() as usize;
        let mut y = vec![0u64; k];
        let mut zero_since = vec![Some(0); k];
        y[0] = n;
        zero_since[0] = None;
        Ok(ProcessState {
            rule: rule.clone(),
            table: rule.shared_table(),
            n,
            seed,
            dsu: Dsu::new(n as usize),
            y,
            omega_components: 0,
            components: n,
            largest: 1,
            round: 0,
            zero_since,
            rng: ChaCha8Rng::seed_from_u64(seed),
            roots: vec![0; rule.ell()],
            classes: vec![SizeClass::Omega; rule.ell()],
        })
    }

    pub fn rule(&self) -> &RuleSpec {
        &self.rule
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// `Y_k` for `k = 1..=K` at index `k - 1`.
    pub fn y_counts(&self) -> &[u64] {
        &self.y
    }

    pub fn omega_components(&self) -> u64 {
        self.omega_components
    }

    pub fn components(&self) -> u64 {
        self.components
    }

    pub fn largest(&self) -> u64 {
        self.largest
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    /// Number of isolated vertices, `Y_1`.
    pub fn isolated_count(&self) -> u64 {
        self.y[0]
    }

    /// Size of the component containing `v`.
    pub fn component_size(&mut self, v: u32) -> u64 {
        self.dsu.component_size(v) as u64
    }

    pub fn size_class(&mut self, v: u32) -> SizeClass {
        let s = self.component_size(v);
        SizeClass::truncate(s, self.rule.k())
    }

    /// Plays one round and reports what happened.
    pub fn step(&mut self) -> RoundOutcome {
        let ell = self.rule.ell();
        let mut vertices = Vec::with_capacity(ell);
        for _ in 0..ell {
            vertices.push(self.rng.random_range(0..self.n as u32));
        }
        let edge = self.play(&vertices);
        let sizes = self.classes.clone();
        let (a, b) = (self.roots[2 * edge], self.roots[2 * edge + 1]);
        let merged = if a == b {
            None
        } else {
            Some((self.dsu.root_size(a) as u64, self.dsu.root_size(b) as u64))
        };
        self.apply(edge);
        RoundOutcome {
            vertices,
            sizes,
            edge: edge + 1,
            merged,
        }
    }

    /// Resolves roots and classes of `vertices` and returns the 0-based
    /// edge the rule picks. Leaves `roots` / `classes` filled.
    #[inline]
    fn play(&mut self, vertices: &[u32]) -> usize {
        let k = self.rule.k();
        for (i, &v) in vertices.iter().enumerate() {
            let r = self.dsu.find(v);
            self.roots[i] = r;
            self.classes[i] = SizeClass::truncate(self.dsu.root_size(r) as u64, k);
        }
        self.decide_current()
    }

    #[inline]
    fn decide_current(&self) -> usize {
        match &self.table {
            Some(table) => {
                let k = self.rule.k();
                let base = k as usize + 1;
                let mut idx = 0usize;
                for &c in self.classes.iter().rev() {
                    idx = idx * base + c.code(k) as usize;
                }
                table[idx] as usize
            }
            None => self.rule.decide_raw(&self.classes) - 1,
        }
    }

    /// Fast round used by the run loop: no allocation.
    #[inline]
    fn step_fast(&mut self) {
        let ell = self.rule.ell();
        let k = self.rule.k();
        let n = self.n as u32;
        for i in 0..ell {
            let v = self.rng.random_range(0..n);
            let r = self.dsu.find(v);
            self.roots[i] = r;
            self.classes[i] = SizeClass::truncate(self.dsu.root_size(r) as u64, k);
        }
        let edge = self.decide_current();
        self.apply(edge);
    }

    /// Adds the chosen edge (0-based) using the roots from `play`.
    #[inline]
    fn apply(&mut self, edge: usize) {
        self.round += 1;
        let (a, b) = (self.roots[2 * edge], self.roots[2 * edge + 1]);
        if a == b {
            return;
        }
        let sa = self.dsu.root_size(a) as u64;
        let sb = self.dsu.root_size(b) as u64;
        self.dsu.link(a, b);
        self.remove_component(sa);
        self.remove_component(sb);
        self.add_component(sa + sb);
        self.components -= 1;
        self.largest = self.largest.max(sa + sb);
    }

    #[inline]
    fn remove_component(&mut self, size: u64) {
        if size <= self.rule.k() as u64 {
            let i = size as usize - 1;
            self.y[i] -= size;
            if self.y[i] == 0 {
                self.zero_since[i] = Some(self.round);
            }
        } else {
            self.omega_components -= 1;
        }
    }

    #[inline]
    fn add_component(&mut self, size: u64) {
        if size <= self.rule.k() as u64 {
            let i = size as usize - 1;
            if self.y[i] == 0 {
                self.zero_since[i] = None;
            }
            self.y[i] += size;
        } else {
            self.omega_components += 1;
        }
    }

    fn snapshot(&self, round: u64) -> Snapshot {
        Snapshot {
            round,
            y: self.y.clone(),
            omega_components: self.omega_components,
        }
    }

    /// Plays rounds until the graph is connected, with the default options
    /// and the given snapshot rounds.
    pub fn run_until_connected(&mut self, snapshots: &[u64]) -> RunRecord {
        self.run(&RunOptions::with_snapshots(snapshots.to_vec()))
    }

    /// Plays rounds until connected, the round cap, or `stop_after`.
    pub fn run(&mut self, opts: &RunOptions) -> RunRecord {
        let mut plan = opts.snapshots.clone();
        plan.sort_unstable();
        plan.dedup();
        if let Some(stop) = opts.stop_after {
            plan.retain(|&r| r <= stop);
        }
        let cap = opts.round_cap.unwrap_or_else(|| default_round_cap(self.n));
        let giant_threshold = (1.0 - opts.giant_epsilon) * self.n as f64;
        let mut giant_time = (self.largest as f64 >= giant_threshold).then_some(self.round);
        let mut snaps = Vec::with_capacity(plan.len());
        let mut next = plan.partition_point(|&r| r < self.round);

        let status = loop {
            while next < plan.len() && plan[next] == self.round {
                snaps.push(self.snapshot(self.round));
                next += 1;
            }
            if self.is_connected() {
                break RunStatus::Connected;
            }
            if opts.stop_after.is_some_and(|s| self.round >= s) {
                break RunStatus::Stopped;
            }
            if self.round >= cap {
                break RunStatus::TimedOut;
            }
            // Run straight to the next event boundary.
            let mut until = cap;
            if let Some(&r) = plan.get(next) {
                until = until.min(r);
            }
            if let Some(s) = opts.stop_after {
                until = until.min(s);
            }
            let giant_pending = giant_time.is_none();
            while self.round < until && self.components > 1 {
                self.step_fast();
                if giant_pending && self.largest as f64 >= giant_threshold {
                    giant_time = Some(self.round);
                    break;
                }
            }
        };
        if status == RunStatus::Connected {
            for &r in &plan[next..] {
                snaps.push(self.snapshot(r));
            }
        }

        let t_con = (status == RunStatus::Connected).then_some(self.round);
        let last_size = match t_con {
            Some(t) => (1..=self.rule.k())
                .filter(|&k| self.zero_since[k as usize - 1] == Some(t))
                .collect(),
            None => Vec::new(),
        };
        RunRecord {
            rule: self.rule.name().to_string(),
            k: self.rule.k(),
            n: self.n,
            seed: self.seed,
            status,
            t_con,
            rounds: self.round,
            t_k: self.zero_since.clone(),
            last_size,
            giant_time,
            snapshots: snaps,
            rng: RNG_ID.to_string(),
        }
    }
}
