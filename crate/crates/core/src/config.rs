//! Run configuration files (JSON).
//!
//! ```json
//! {
//!   "system": {
//!     "type": "mis",
//!     "multipliers": [2, 3],
//!     "omega": { "kind": "sft", "alphabet_size": 2, "transition": [[1, 1], [1, 0]] }
//!   },
//!   "output": "csv",
//!   "precision": "auto",
//!   "seed": 7
//! }
//! ```
//!
//! Unknown keys are rejected. Budget overrides may be given as numbers or as
//! decimal strings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::count::MisSpec;
use crate::error::{Budgets, MisError, Result};
use crate::lattice::MultiplierVector;
use crate::sft2d::Sft2dSpec;
use crate::subshift::SubshiftSpec;
use crate::surface::PrecisionPolicy;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub output: OutputFormat,
    #[serde(default)]
    pub precision: PrecisionSetting,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<BudgetConfig>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Mis { multipliers: Vec<u64>, omega: OmegaConfig },
    Sft2d { alphabet_size: usize, allowed_2x2: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OmegaConfig {
    Full { alphabet_size: usize },
    Sft { alphabet_size: usize, transition: Vec<Vec<u8>> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// `"auto"` or a bit count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PrecisionRepr", into = "PrecisionRepr")]
pub struct PrecisionSetting(pub Option<u32>);

impl PrecisionSetting {
    pub fn policy(self) -> PrecisionPolicy {
        match self.0 {
            None => PrecisionPolicy::Auto,
            Some(b) => PrecisionPolicy::Bits(b),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PrecisionRepr {
    Bits(u32),
    Word(String),
}

impl TryFrom<PrecisionRepr> for PrecisionSetting {
    type Error = String;
    fn try_from(r: PrecisionRepr) -> std::result::Result<Self, String> {
        match r {
            PrecisionRepr::Bits(0) => Err("precision must be positive".into()),
            PrecisionRepr::Bits(b) => Ok(PrecisionSetting(Some(b))),
            PrecisionRepr::Word(w) if w == "auto" => Ok(PrecisionSetting(None)),
            PrecisionRepr::Word(w) => w
                .parse::<u32>()
                .ok()
                .filter(|&b| b > 0)
                .map(|b| PrecisionSetting(Some(b)))
                .ok_or_else(|| format!("precision must be \"auto\" or a positive bit count, got {w:?}")),
        }
    }
}

impl From<PrecisionSetting> for PrecisionRepr {
    fn from(p: PrecisionSetting) -> Self {
        match p.0 {
            None => PrecisionRepr::Word("auto".into()),
            Some(b) => PrecisionRepr::Bits(b),
        }
    }
}

/// A `u64` written as a JSON number or a decimal string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DecRepr", into = "String")]
pub struct DecU64(pub u64);

#[derive(Deserialize)]
#[serde(untagged)]
enum DecRepr {
    Num(u64),
    Str(String),
}

impl TryFrom<DecRepr> for DecU64 {
    type Error = String;
    fn try_from(r: DecRepr) -> std::result::Result<Self, String> {
        match r {
            DecRepr::Num(n) => Ok(DecU64(n)),
            DecRepr::Str(s) => s
                .parse()
                .map(DecU64)
                .map_err(|_| format!("{s:?} is not a decimal integer below 2^64")),
        }
    }
}

impl From<DecU64> for String {
    fn from(d: DecU64) -> String {
        d.0.to_string()
    }
}

/// Overrides for [`Budgets`]; honoured only when the caller opts in.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configurations: Option<DecU64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_points: Option<DecU64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result_bits: Option<DecU64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<DecU64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_states: Option<DecU64>,
}

impl BudgetConfig {
    pub fn apply(&self, mut b: Budgets) -> Budgets {
        let set = |slot: &mut u64, v: Option<DecU64>| {
            if let Some(v) = v {
                *slot = v.0;
            }
        };
        set(&mut b.configurations, self.configurations);
        set(&mut b.lattice_points, self.lattice_points);
        set(&mut b.result_bits, self.result_bits);
        set(&mut b.precision_bits, self.precision_bits);
        set(&mut b.row_states, self.row_states);
        b
    }
}

/// A validated system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum System {
    Mis(MisSpec),
    Sft2d(Sft2dSpec),
}

impl OmegaConfig {
    pub fn build(&self) -> Result<SubshiftSpec> {
        match self {
            OmegaConfig::Full { alphabet_size } => SubshiftSpec::full_shift(*alphabet_size),
            OmegaConfig::Sft {
                alphabet_size,
                transition,
            } => {
                if transition.len() != *alphabet_size {
                    return Err(MisError::invalid(
                        "omega.transition",
                        format!("{} rows for alphabet size {alphabet_size}", transition.len()),
                    ));
                }
                SubshiftSpec::vertex_sft(transition)
            }
        }
    }
}

impl SystemConfig {
    pub fn build(&self) -> Result<System> {
        match self {
            SystemConfig::Mis { multipliers, omega } => Ok(System::Mis(MisSpec::new(
                MultiplierVector::new(multipliers.clone())?,
                omega.build()?,
            ))),
            SystemConfig::Sft2d {
                alphabet_size,
                allowed_2x2,
            } => Ok(System::Sft2d(Sft2dSpec::from_strings(*alphabet_size, allowed_2x2)?)),
        }
    }
}

impl RunConfig {
    pub fn system(&self) -> Result<System> {
        self.system.build()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a configuration held in memory.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| MisError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.system()?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MisError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = r#"{
  "system": {"type": "mis", "multipliers": [2, 3],
             "omega": {"kind": "sft", "alphabet_size": 2, "transition": [[1, 1], [1, 0]]}},
  "output": "csv", "precision": "auto", "seed": 7
}"#;

    #[test]
    fn parses_golden_mean_instance() {
        let cfg = parse_config_str(GOLDEN).unwrap();
        let System::Mis(mis) = cfg.system().unwrap() else { panic!() };
        assert_eq!(mis.multipliers.as_slice(), &[2, 3]);
        assert_eq!(mis.omega, SubshiftSpec::golden_mean());
        assert_eq!(cfg.precision.policy(), PrecisionPolicy::Auto);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn round_trip() {
        let cfg = parse_config_str(GOLDEN).unwrap();
        assert_eq!(parse_config_str(&cfg.to_json_string()).unwrap(), cfg);
        let with_budget = r#"{"system": {"type": "sft2d", "alphabet_size": 2, "allowed_2x2": ["0110", "1001"]},
            "precision": 256, "budgets": {"configurations": "123456789012", "row_states": 10}}"#;
        let cfg = parse_config_str(with_budget).unwrap();
        assert_eq!(cfg.budgets.as_ref().unwrap().configurations, Some(DecU64(123456789012)));
        assert_eq!(parse_config_str(&cfg.to_json_string()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        let p1 = GOLDEN.replace("[2, 3]", "[1, 3]");
        assert!(matches!(parse_config_str(&p1), Err(MisError::InvalidSpec { .. })));
        let ragged = GOLDEN.replace("[[1, 1], [1, 0]]", "[[1, 1], [1]]");
        assert!(matches!(parse_config_str(&ragged), Err(MisError::InvalidSpec { .. })));
        let extra = GOLDEN.replace("\"seed\": 7", "\"seed\": 7, \"colour\": 1");
        let Err(MisError::Parse { line, .. }) = parse_config_str(&extra) else { panic!() };
        assert_eq!(line, 4);
        let unknown_inner = GOLDEN.replace("\"alphabet_size\": 2,", "\"alphabet_size\": 2, \"x\": 0,");
        assert!(matches!(parse_config_str(&unknown_inner), Err(MisError::Parse { .. })));
        assert!(matches!(parse_config_str("{"), Err(MisError::Parse { .. })));
        let prec = GOLDEN.replace("\"auto\"", "\"fast\"");
        assert!(matches!(parse_config_str(&prec), Err(MisError::Parse { .. })));
    }
}
