use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{RuleError, RuleKind, RuleSpec, SizeClass};

/// Named rule families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    ErdosRenyi,
    BohmanFrieze,
    Kp,
    Lexicographic,
    OmegaAvoider,
}

impl Builtin {
    pub fn id(self) -> &'static str {
        match self {
            Builtin::ErdosRenyi => "erdos-renyi",
            Builtin::BohmanFrieze => "bohman-frieze",
            Builtin::Kp => "kp",
            Builtin::Lexicographic => "lexicographic",
            Builtin::OmegaAvoider => "omega-avoider",
        }
    }

    /// Whether `K` and `ell` are free parameters of the family.
    pub fn is_parametric(self) -> bool {
        matches!(self, Builtin::Lexicographic | Builtin::OmegaAvoider)
    }

    /// Builds the rule. For fixed-shape families a `k` above the natural
    /// bound extends the rule; `ell` must match if given.
    pub fn build(self, k: Option<u32>, ell: Option<usize>) -> Result<RuleSpec, RuleError> {
        let base = match self {
            Builtin::ErdosRenyi => erdos_renyi(),
            Builtin::BohmanFrieze => bohman_frieze(),
            Builtin::Kp => kp(),
            Builtin::Lexicographic => {
                let ell = ell.unwrap_or(4);
                return lexicographic(k.unwrap_or(ell as u32 / 2), ell);
            }
            Builtin::OmegaAvoider => return omega_avoider(k.unwrap_or(1), ell.unwrap_or(4)),
        };
        if let Some(ell) = ell {
            if ell != base.ell() {
                return Err(RuleError::Document(format!(
                    "{} has ell = {}, not {ell}",
                    self.id(),
                    base.ell()
                )));
            }
        }
        match k {
            Some(k) if k > base.k() => base.extend(k),
            Some(k) if k < base.k() => Err(RuleError::ExtendNotLarger { from: base.k(), to: k }),
            _ => Ok(base),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Builtin {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "er" | "erdos-renyi" | "erdos_renyi" => Builtin::ErdosRenyi,
            "bf" | "bohman-frieze" | "bohman_frieze" => Builtin::BohmanFrieze,
            "kp" => Builtin::Kp,
            "lex" | "lexicographic" => Builtin::Lexicographic,
            "omega-avoider" | "omega_avoider" | "avoider" => Builtin::OmegaAvoider,
            other => return Err(RuleError::UnknownBuiltin(other.to_string())),
        })
    }
}

fn builtin(b: Builtin, name: &str, k: u32, ell: usize, f: impl Fn(&[SizeClass]) -> usize + Send + Sync + 'static) -> RuleSpec {
    RuleSpec::with_kind(name.to_string(), k, ell, RuleKind::Builtin(b), Arc::new(f))
        .expect("builtin shapes are valid")
}

/// The `(1, 2)`-rule with a single candidate edge.
pub fn erdos_renyi() -> RuleSpec {
    builtin(Builtin::ErdosRenyi, "erdos-renyi", 1, 2, |_| 1)
}

/// `(1, 4)`: take the first edge iff both of its endpoints are isolated.
pub fn bohman_frieze() -> RuleSpec {
    builtin(Builtin::BohmanFrieze, "bohman-frieze", 1, 4, |s| {
        if s[0] == SizeClass::Size(1) && s[1] == SizeClass::Size(1) {
            1
        } else {
            2
        }
    })
}

/// `(1, 4)`: take the first edge iff at least one endpoint is isolated.
pub fn kp() -> RuleSpec {
    builtin(Builtin::Kp, "kp", 1, 4, |s| {
        if s[0] == SizeClass::Size(1) || s[1] == SizeClass::Size(1) {
            1
        } else {
            2
        }
    })
}

/// Greedy smallest-components-first rule. Each candidate edge is ordered as
/// `(min, max)` and the lexicographically smallest pair wins, ties going to
/// the lowest edge index. Requires `K >= ell / 2`.
pub fn lexicographic(k: u32, ell: usize) -> Result<RuleSpec, RuleError> {
    if ell < 2 || ell % 2 != 0 {
        return Err(RuleError::InvalidEll(ell));
    }
    if (k as usize) < ell / 2 {
        return Err(RuleError::LexicographicK { k, ell });
    }
    RuleSpec::with_kind(
        format!("lexicographic({k},{ell})"),
        k,
        ell,
        RuleKind::Builtin(Builtin::Lexicographic),
        Arc::new(lex_decide),
    )
}

fn lex_decide(s: &[SizeClass]) -> usize {
    let key = |i: usize| {
        let (a, b) = (s[2 * i], s[2 * i + 1]);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let mut best = 0;
    let mut best_key = key(0);
    for i in 1..s.len() / 2 {
        let k = key(i);
        if k < best_key {
            best = i;
            best_key = k;
        }
    }
    best + 1
}

/// Degenerate test rule: picks the first `(ω, ω)` edge whenever one is
/// offered. Otherwise it prefers the first edge joining two small
/// components, and falls back to edge 1. For `ell >= 4` a lone small
/// component among `ω`'s is never merged, so `ext = 0`.
pub fn omega_avoider(k: u32, ell: usize) -> Result<RuleSpec, RuleError> {
    RuleSpec::with_kind(
        format!("omega-avoider({k},{ell})"),
        k,
        ell,
        RuleKind::Builtin(Builtin::OmegaAvoider),
        Arc::new(|s: &[SizeClass]| {
            let pairs = || s.chunks_exact(2).enumerate();
            if let Some((i, _)) = pairs().find(|(_, e)| e[0] == SizeClass::Omega && e[1] == SizeClass::Omega) {
                return i + 1;
            }
            if let Some((i, _)) = pairs().find(|(_, e)| e[0].is_small() && e[1].is_small()) {
                return i + 1;
            }
            1
        }),
    )
}

/// Rule backed by a dense table of 1-based decisions in enumeration order.
pub(crate) fn table_rule(name: String, k: u32, ell: usize, entries: Vec<u8>) -> Result<RuleSpec, RuleError> {
    let base = k + 1;
    let table: Arc<[u8]> = entries.into();
    RuleSpec::with_kind(
        name,
        k,
        ell,
        RuleKind::Table,
        Arc::new(move |s: &[SizeClass]| {
            let mut idx = 0usize;
            for &c in s.iter().rev() {
                idx = idx * base as usize + c.code(k) as usize;
            }
            table[idx] as usize
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use SizeClass::{Omega as W, Size};

    #[test]
    fn builtin_names_parse() {
        for b in [
            Builtin::ErdosRenyi,
            Builtin::BohmanFrieze,
            Builtin::Kp,
            Builtin::Lexicographic,
            Builtin::OmegaAvoider,
        ] {
            assert_eq!(b.id().parse::<Builtin>().unwrap(), b);
        }
        assert_eq!("bf".parse::<Builtin>().unwrap(), Builtin::BohmanFrieze);
        assert!("nope".parse::<Builtin>().is_err());
    }

    #[test]
    fn build_extends_fixed_shape_rules() {
        let kp2 = Builtin::Kp.build(Some(2), None).unwrap();
        assert_eq!((kp2.k(), kp2.ell()), (2, 4));
        assert!(Builtin::BohmanFrieze.build(None, Some(6)).is_err());
        let lex = Builtin::Lexicographic.build(None, Some(8)).unwrap();
        assert_eq!((lex.k(), lex.ell()), (4, 8));
    }

    #[test]
    fn lex_ties_go_to_smallest_index() {
        assert_eq!(lex_decide(&[Size(1), W, W, Size(1)]), 1);
        assert_eq!(lex_decide(&[W, W, W, W, W, W]), 1);
        assert_eq!(lex_decide(&[W, Size(2), Size(2), W, Size(1), W]), 3);
    }

    #[test]
    fn lex_takes_second_edge_where_kp_takes_first() {
        let lex = lexicographic(2, 4).unwrap();
        let kp2 = kp().extend(2).unwrap();
        for v in [[Size(1), W, Size(1), Size(1)], [W, Size(1), Size(1), Size(1)]] {
            assert_eq!(lex.decide(&v).unwrap(), 2);
            assert_eq!(kp2.decide(&v).unwrap(), 1);
        }
        // Elsewhere both prefer an edge touching an isolated vertex.
        assert_eq!(lex.decide(&[W, W, Size(1), W]).unwrap(), 2);
        assert_eq!(kp2.decide(&[W, W, Size(1), W]).unwrap(), 2);
    }

    #[test]
    fn avoider_prefers_omega_pairs() {
        let r = omega_avoider(1, 4).unwrap();
        assert_eq!(r.decide(&[Size(1), W, W, W]).unwrap(), 2);
        assert_eq!(r.decide(&[W, W, Size(1), W]).unwrap(), 1);
        assert_eq!(r.decide(&[Size(1), W, Size(1), Size(1)]).unwrap(), 2);
        assert_eq!(r.decide(&[Size(1), W, W, Size(1)]).unwrap(), 1);
    }
}
