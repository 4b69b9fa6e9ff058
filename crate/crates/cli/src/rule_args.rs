use std::fs;
use std::path::PathBuf;

use achlioptas_core::rules::{Applicability, Builtin, RuleDocument, RuleError, RuleSpec};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Rule selection shared by every subcommand.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize, PartialEq)]
pub struct RuleArgs {
    /// Built-in rule: er, bf, kp, lex, omega-avoider.
    #[arg(long)]
    #[serde(default)]
    pub rule: Option<String>,
    /// Truncation bound K.
    #[arg(long = "K", value_name = "K")]
    #[serde(default, rename = "K")]
    pub k: Option<u32>,
    /// Number of sampled vertices per round.
    #[arg(long)]
    #[serde(default)]
    pub ell: Option<usize>,
    /// Re-express the rule with a larger K.
    #[arg(long, value_name = "K'")]
    #[serde(default)]
    pub extend: Option<u32>,
    /// JSON rule document (builtin or table).
    #[arg(long, value_name = "PATH", conflicts_with = "rule")]
    #[serde(default)]
    pub rule_file: Option<PathBuf>,
}

impl RuleArgs {
    /// Fills unset fields from `other`.
    pub fn or(self, other: &RuleArgs) -> RuleArgs {
        // A rule given on the command line replaces a rule file from the config and vice versa.
        let from_flags = self.rule.is_some() || self.rule_file.is_some();
        RuleArgs {
            rule: if from_flags { self.rule } else { other.rule.clone() },
            rule_file: if from_flags { self.rule_file } else { other.rule_file.clone() },
            k: self.k.or(other.k),
            ell: self.ell.or(other.ell),
            extend: self.extend.or(other.extend),
        }
    }

    pub fn resolve(&self) -> Result<RuleSpec, CliError> {
        let rule = match (&self.rule, &self.rule_file) {
            (Some(name), None) => {
                let b: Builtin = name.parse().map_err(config)?;
                b.build(self.k, self.ell).map_err(config)?
            }
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
                let rule = RuleDocument::from_json(&text).and_then(RuleDocument::into_rule).map_err(config)?;
                if self.k.is_some_and(|k| k != rule.k()) || self.ell.is_some_and(|l| l != rule.ell()) {
                    return Err(CliError::Config("--K/--ell disagree with the rule file".into()));
                }
                rule
            }
            (None, None) => return Err(CliError::Config("no rule given; use --rule or --rule-file".into())),
            (Some(_), Some(_)) => return Err(CliError::Config("--rule and --rule-file are exclusive".into())),
        };
        match self.extend {
            Some(k) => rule.extend(k).map_err(config),
            None => Ok(rule),
        }
    }
}

fn config(e: RuleError) -> CliError {
    CliError::Config(e.to_string())
}

/// Applies the `ext < 2K + 2` guard, extending the rule when needed.
/// Returns the usable rule and the `K'` it was extended to, if any.
pub fn guarded(rule: RuleSpec) -> Result<(RuleSpec, Option<u32>), CliError> {
    match rule.applicability_guard() {
        Ok(Applicability::Applicable) => Ok((rule, None)),
        Ok(Applicability::ExtendTo(k)) => Ok((rule.extend(k).map_err(config)?, Some(k))),
        Err(RuleError::Degenerate) => Err(CliError::Degenerate(rule.name().to_string())),
        Err(e) => Err(config(e)),
    }
}

/// Summary of a resolved rule embedded in reports.
#[derive(Debug, Clone, Serialize)]
pub struct RuleSummary {
    pub name: String,
    #[serde(rename = "K")]
    pub k: u32,
    pub ell: usize,
    pub kind: String,
}

impl RuleSummary {
    pub fn of(rule: &RuleSpec) -> Self {
        RuleSummary {
            name: rule.name().to_string(),
            k: rule.k(),
            ell: rule.ell(),
            kind: RuleDocument::from_rule(rule).map(|d| d.kind).unwrap_or_else(|_| "custom".into()),
        }
    }
}
