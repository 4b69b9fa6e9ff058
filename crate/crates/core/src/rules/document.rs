//! Text serialization of rules.
//!
//! ```json
//! { "name": "bf", "K": 1, "ell": 4, "kind": "builtin:bohman-frieze" }
//! { "name": "t", "K": 1, "ell": 2, "kind": "table",
//!   "entries": [ { "sizes": ["1", "w"], "edge": 1 }, ... ] }
//! ```
//!
//! Table documents must cover every vector of `S_K^ell`, unless a `default`
//! edge is supplied for the missing ones.

use serde::{Deserialize, Serialize};

use super::builtin::table_rule;
use super::{format_vector, vector_count, Builtin, RuleError, RuleKind, RuleSpec, SizeClass, ENUMERATION_BUDGET};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub sizes: Vec<String>,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDocument {
    pub name: String,
    #[serde(rename = "K")]
    pub k: u32,
    pub ell: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<TableEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<usize>,
}

impl RuleDocument {
    pub fn from_rule(rule: &RuleSpec) -> Result<Self, RuleError> {
        let base = RuleDocument {
            name: rule.name().to_string(),
            k: rule.k(),
            ell: rule.ell(),
            kind: String::new(),
            entries: Vec::new(),
            default: None,
        };
        match rule.kind() {
            RuleKind::Builtin(b) => Ok(RuleDocument {
                kind: format!("builtin:{}", b.id()),
                ..base
            }),
            RuleKind::Table | RuleKind::Custom => {
                let mut entries = Vec::new();
                rule.try_for_each_decision(|sizes, edge| {
                    entries.push(TableEntry {
                        sizes: sizes.iter().map(|s| s.to_string()).collect(),
                        edge,
                    })
                })?;
                Ok(RuleDocument {
                    kind: "table".to_string(),
                    entries,
                    ..base
                })
            }
        }
    }

    pub fn into_rule(self) -> Result<RuleSpec, RuleError> {
        if let Some(id) = self.kind.strip_prefix("builtin:") {
            let b: Builtin = id.parse()?;
            return b.build(Some(self.k), Some(self.ell));
        }
        if self.kind != "table" {
            return Err(RuleError::Document(format!("unknown kind `{}`", self.kind)));
        }
        if self.ell < 2 || self.ell % 2 != 0 {
            return Err(RuleError::InvalidEll(self.ell));
        }
        if self.k == 0 {
            return Err(RuleError::InvalidK);
        }
        let total = vector_count(self.k, self.ell);
        if total > ENUMERATION_BUDGET as u128 {
            return Err(RuleError::EnumerationInfeasible {
                vectors: total,
                budget: ENUMERATION_BUDGET,
            });
        }
        let edges = self.ell / 2;
        let check_edge = |e: usize| {
            if e == 0 || e > edges || e > u8::MAX as usize {
                Err(RuleError::DecisionOutOfRange { index: e, max: edges })
            } else {
                Ok(e as u8)
            }
        };
        let fill = match self.default {
            Some(d) => check_edge(d)?,
            None => 0,
        };
        let mut table = vec![fill; total as usize];
        let base = self.k as usize + 1;
        for entry in &self.entries {
            if entry.sizes.len() != self.ell {
                return Err(RuleError::WrongLength {
                    expected: self.ell,
                    got: entry.sizes.len(),
                });
            }
            let mut idx = 0usize;
            for s in entry.sizes.iter().rev() {
                let class: SizeClass = s.parse()?;
                if !class.is_valid_for(self.k) {
                    return Err(RuleError::InvalidSizeClass { class, k: self.k });
                }
                idx = idx * base + class.code(self.k) as usize;
            }
            table[idx] = check_edge(entry.edge)?;
        }
        if let Some(missing) = table.iter().position(|&e| e == 0) {
            let mut sizes = Vec::with_capacity(self.ell);
            let mut rest = missing;
            for _ in 0..self.ell {
                sizes.push(SizeClass::from_code((rest % base) as u8, self.k));
                rest /= base;
            }
            return Err(RuleError::IncompleteTable(format_vector(&sizes)));
        }
        table_rule(self.name, self.k, self.ell, table)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, RuleError> {
        serde_json::from_str(text).map_err(|e| RuleError::Document(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{bohman_frieze, kp, lexicographic};

    #[test]
    fn builtin_documents_round_trip() {
        for rule in [bohman_frieze(), kp().extend(2).unwrap(), lexicographic(3, 6).unwrap()] {
            let doc = RuleDocument::from_rule(&rule).unwrap();
            let back = RuleDocument::from_json(&doc.to_json()).unwrap().into_rule().unwrap();
            assert_eq!((back.k(), back.ell()), (rule.k(), rule.ell()));
            assert_eq!(back.signature(), rule.signature());
        }
    }

    #[test]
    fn table_document_round_trips_losslessly() {
        let table = kp().extend(2).unwrap().to_table_rule().unwrap();
        let doc = RuleDocument::from_rule(&table).unwrap();
        assert_eq!(doc.entries.len(), 81);
        let back = RuleDocument::from_json(&doc.to_json()).unwrap().into_rule().unwrap();
        assert_eq!(RuleDocument::from_rule(&back).unwrap(), doc);
    }

    #[test]
    fn incomplete_table_is_rejected_without_default() {
        let text = r#"{"name":"t","K":1,"ell":2,"kind":"table",
            "entries":[{"sizes":["1","1"],"edge":1}]}"#;
        let err = RuleDocument::from_json(text).unwrap().into_rule().unwrap_err();
        assert!(matches!(err, RuleError::IncompleteTable(_)));

        let with_default = r#"{"name":"t","K":1,"ell":4,"kind":"table","default":2,
            "entries":[{"sizes":["1","1","w","w"],"edge":1}]}"#;
        let rule = RuleDocument::from_json(with_default).unwrap().into_rule().unwrap();
        assert_eq!(rule.signature().ext, 2);
    }

    #[test]
    fn bad_edges_rejected() {
        let text = r#"{"name":"t","K":1,"ell":2,"kind":"table","default":2}"#;
        assert!(matches!(
            RuleDocument::from_json(text).unwrap().into_rule(),
            Err(RuleError::DecisionOutOfRange { .. })
        ));
    }
}
