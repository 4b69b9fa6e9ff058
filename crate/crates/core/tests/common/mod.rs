#![allow(dead_code)]

use std::collections::VecDeque;

use achlioptas_core::rules::{
    bohman_frieze, erdos_renyi, kp, lexicographic, omega_avoider, RuleSpec, SizeClass,
};
use achlioptas_core::simulator::ProcessState;

/// Every built-in family in a few shapes, plus extensions.
pub fn all_rules() -> Vec<RuleSpec> {
    vec![
        erdos_renyi(),
        bohman_frieze(),
        kp(),
        kp().extend(2).unwrap(),
        bohman_frieze().extend(3).unwrap(),
        lexicographic(1, 2).unwrap(),
        lexicographic(2, 4).unwrap(),
        lexicographic(3, 6).unwrap(),
        omega_avoider(1, 4).unwrap(),
        omega_avoider(2, 6).unwrap(),
    ]
}

/// Graph kept as adjacency lists; component sizes by BFS.
pub struct NaiveGraph {
    adj: Vec<Vec<usize>>,
}

impl NaiveGraph {
    pub fn new(n: usize) -> Self {
        NaiveGraph { adj: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
    }

    /// Size of every vertex's component.
    pub fn component_sizes(&self) -> Vec<u64> {
        let n = self.adj.len();
        let mut comp = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut count = 0u64;
            let mut queue = VecDeque::from([s]);
            comp[s] = id;
            while let Some(v) = queue.pop_front() {
                count += 1;
                for &w in &self.adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        queue.push_back(w);
                    }
                }
            }
            sizes.push(count);
        }
        comp.iter().map(|&c| sizes[c]).collect()
    }
}

/// Plays `rounds` rounds and checks every vertex's truncated size, the
/// sampled sizes the rule saw, and the `Y_k` / ω counts against BFS.
pub fn check_against_bfs(rule: &RuleSpec, n: u64, rounds: u64, seed: u64) -> Result<(), String> {
    let k = rule.k();
    let mut state = ProcessState::new(rule, n, seed).map_err(|e| e.to_string())?;
    let mut graph = NaiveGraph::new(n as usize);
    let mut sizes = graph.component_sizes();
    for round in 0..rounds {
        let out = state.step();
        for (i, &v) in out.vertices.iter().enumerate() {
            let expect = SizeClass::truncate(sizes[v as usize], k);
            if out.sizes[i] != expect {
                return Err(format!("round {round}: sampled class {} vs {}", out.sizes[i], expect));
            }
        }
        let want = rule.decide(&out.sizes).map_err(|e| e.to_string())?;
        if out.edge != want {
            return Err(format!("round {round}: edge {} vs decide {}", out.edge, want));
        }
        let (a, b) = (out.vertices[2 * out.edge - 2], out.vertices[2 * out.edge - 1]);
        graph.add_edge(a as usize, b as usize);
        sizes = graph.component_sizes();

        let mut y = vec![0u64; k as usize];
        let mut omega_vertices = 0u64;
        for v in 0..n as usize {
            let s = sizes[v];
            if s <= k as u64 {
                y[s as usize - 1] += 1;
            } else {
                omega_vertices += 1;
            }
            let got = state.size_class(v as u32);
            if got != SizeClass::truncate(s, k) {
                return Err(format!("round {round}: vertex {v} class {got} vs size {s}"));
            }
        }
        if state.y_counts() != y.as_slice() {
            return Err(format!("round {round}: Y {:?} vs {:?}", state.y_counts(), y));
        }
        let omega_components: u64 = sizes
            .iter()
            .filter(|&&s| s > k as u64)
            .map(|&s| 1.0 / s as f64)
            .sum::<f64>()
            .round() as u64;
        if state.omega_components() != omega_components {
            return Err(format!("round {round}: ω-count {} vs {omega_components}", state.omega_components()));
        }
        if y.iter().sum::<u64>() + omega_vertices != n {
            return Err(format!("round {round}: vertex total mismatch"));
        }
        let largest = *sizes.iter().max().unwrap();
        if state.largest() != largest {
            return Err(format!("round {round}: largest {} vs {largest}", state.largest()));
        }
    }
    Ok(())
}
