use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    encode_auction, encode_dmds, encode_etf, encode_knapsack, encode_mis, ConstrainedProblem,
    EtfSpec,
};
use crate::error::{Error, Result};

/// The five benchmark problem families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Mis,
    Dmds,
    Knapsack,
    Auction,
    Etf,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Mis,
        ProblemKind::Dmds,
        ProblemKind::Knapsack,
        ProblemKind::Auction,
        ProblemKind::Etf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Mis => "mis",
            ProblemKind::Dmds => "dmds",
            ProblemKind::Knapsack => "knapsack",
            ProblemKind::Auction => "auction",
            ProblemKind::Etf => "etf",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::config(format!("unknown problem kind `{s}`")))
    }
}

fn default_scale() -> f64 {
    10.0
}

/// Instance file contents. Serialized as a JSON object tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Instance {
    Mis { n: usize, edges: Vec<[usize; 2]> },
    Dmds { n: usize, edges: Vec<[usize; 2]> },
    Knapsack {
        n: usize,
        values: Vec<i64>,
        weights: Vec<i64>,
        #[serde(rename = "W", alias = "capacity")]
        capacity: i64,
    },
    Auction {
        n: usize,
        payments: Vec<f64>,
        /// `quantities[b][i]`: units of item `i` requested by bid `b`.
        quantities: Vec<Vec<i64>>,
        multiplicities: Vec<i64>,
    },
    Etf {
        n: usize,
        weights: Vec<f64>,
        prices: Vec<f64>,
        sectors: Vec<usize>,
        #[serde(rename = "m", alias = "shares")]
        shares: u32,
        epsilon: f64,
        #[serde(default)]
        enforced_sector: usize,
        #[serde(default = "default_scale")]
        scale: f64,
    },
}

impl Instance {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Instance::Mis { .. } => ProblemKind::Mis,
            Instance::Dmds { .. } => ProblemKind::Dmds,
            Instance::Knapsack { .. } => ProblemKind::Knapsack,
            Instance::Auction { .. } => ProblemKind::Auction,
            Instance::Etf { .. } => ProblemKind::Etf,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Instance::Mis { n, .. }
            | Instance::Dmds { n, .. }
            | Instance::Knapsack { n, .. }
            | Instance::Auction { n, .. }
            | Instance::Etf { n, .. } => n,
        }
    }

    fn check_len(&self, field: &str, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::field(
                field,
                format!("has {len} entries but n = {}", self.n()),
            ));
        }
        Ok(())
    }

    /// Validates field shapes and runs the matching encoder.
    pub fn encode(&self) -> Result<ConstrainedProblem> {
        if self.n() == 0 {
            return Err(Error::field("n", "must be positive"));
        }
        match self {
            Instance::Mis { n, edges } | Instance::Dmds { n, edges } => {
                if let Some(e) = edges.iter().find(|e| e[0] >= *n || e[1] >= *n) {
                    return Err(Error::field(
                        "edges",
                        format!("edge {e:?} references a vertex outside 0..{n}"),
                    ));
                }
                let pairs: Vec<_> = edges.iter().map(|e| (e[0], e[1])).collect();
                if self.kind() == ProblemKind::Mis {
                    encode_mis(*n, &pairs)
                } else {
                    encode_dmds(*n, &pairs)
                }
            }
            Instance::Knapsack {
                values,
                weights,
                capacity,
                ..
            } => {
                self.check_len("values", values.len())?;
                self.check_len("weights", weights.len())?;
                encode_knapsack(values, weights, *capacity)
            }
            Instance::Auction {
                payments,
                quantities,
                multiplicities,
                ..
            } => {
                self.check_len("payments", payments.len())?;
                self.check_len("quantities", quantities.len())?;
                if let Some(row) = quantities.iter().find(|q| q.len() != multiplicities.len()) {
                    return Err(Error::field(
                        "quantities",
                        format!(
                            "row has {} entries but there are {} items",
                            row.len(),
                            multiplicities.len()
                        ),
                    ));
                }
                encode_auction(payments, quantities, multiplicities)
            }
            Instance::Etf {
                weights,
                prices,
                sectors,
                shares,
                epsilon,
                enforced_sector,
                scale,
                ..
            } => {
                self.check_len("weights", weights.len())?;
                self.check_len("prices", prices.len())?;
                self.check_len("sectors", sectors.len())?;
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::field("weights", format!("sum to {total}, not 1")));
                }
                encode_etf(&EtfSpec {
                    weights: weights.clone(),
                    prices: prices.clone(),
                    sectors: sectors.clone(),
                    shares: *shares,
                    epsilon: *epsilon,
                    enforced_sector: *enforced_sector,
                    scale: *scale,
                })
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances always serialize")
    }
}

/// Parses an instance file body and encodes it.
pub fn parse_instance(text: &str) -> Result<ConstrainedProblem> {
    let instance: Instance = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    instance.encode()
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ConstrainedProblem> {
    parse_instance(&std::fs::read_to_string(path)?)
}

/// Writes the instance `p` was encoded from. Problems built by hand, or
/// derived with [`ConstrainedProblem::with_objective`], have no file form.
pub fn save_instance(p: &ConstrainedProblem, path: impl AsRef<Path>) -> Result<()> {
    let source = p
        .source()
        .ok_or_else(|| Error::Precondition("problem has no instance description".into()))?;
    let mut text = source.to_json();
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_mis() {
        let p = parse_instance(r#"{"kind": "mis", "n": 3, "edges": [[0, 1], [1, 2]]}"#).unwrap();
        assert_eq!(p.n_vars(), 3);
        assert_eq!(p.equalities().len(), 2);
    }

    #[test]
    fn unknown_kind_reports_position() {
        let err = parse_instance("{\n  \"kind\": \"tsp\",\n  \"n\": 3\n}").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert!(line >= 2, "line {line}");
                assert!(message.contains("tsp"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let err = parse_instance(r#"{"kind": "mis", "n": 2, "edges": [], "colour": 1}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn length_mismatch_names_the_field() {
        let err = parse_instance(r#"{"kind": "knapsack", "n": 2, "values": [1], "weights": [1, 1], "W": 2}"#)
            .unwrap_err();
        match err {
            Error::Field { field, .. } => assert_eq!(field, "values"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn overweight_item_is_rejected_on_encode() {
        let err = parse_instance(r#"{"kind": "knapsack", "n": 2, "values": [1, 1], "weights": [1, 5], "W": 4}"#)
            .unwrap_err();
        assert!(err.is_rejection(), "{err}");
    }

    #[test]
    fn round_trip_triangle() {
        let p = crate::problems::encode_mis(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k3.json");
        save_instance(&p, &path).unwrap();
        let q = load_instance(&path).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn kind_names() {
        for k in ProblemKind::ALL {
            assert_eq!(k.as_str().parse::<ProblemKind>().unwrap(), k);
        }
        assert!("tsp".parse::<ProblemKind>().is_err());
    }
}
