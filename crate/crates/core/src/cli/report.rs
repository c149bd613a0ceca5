//! Output artifacts: per-run CSV series, the JSON summary and paired
//! comparisons between algorithms.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::RunConfig;
use crate::error::{Error, Result};
use crate::evolve::IntegratorStats;
use crate::experiment::RuntimeSpec;
use crate::hamiltonians::Variant;
use crate::metrics::{Aggregate, Checkpoint, MetricsReport, RunMetadata, RATIO_TIE_TOL};

/// Significant digits of every number written to a CSV file.
pub const CSV_DIGITS: usize = 12;

/// Formats `v` in positional decimal notation with [`CSV_DIGITS`]
/// significant digits.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // "d.ddddddddddde±x" carries exactly the digits we want
    let sci = format!("{:.*e}", CSV_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat(point.unsigned_abs() as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

/// The CSV series `t, r, p_feas, p_opt, p_eps` of one run.
pub fn checkpoints_csv(checkpoints: &[Checkpoint]) -> String {
    let mut out = String::from("t,r,p_feas,p_opt,p_eps\n");
    for c in checkpoints {
        let row = [c.t, c.r, c.p_feas, c.p_opt, c.p_eps].map(format_decimal);
        writeln!(out, "{}", row.join(",")).expect("writing to a string");
    }
    out
}

/// Outcome of one work item as recorded in the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub variant: Variant,
    pub runtime: RuntimeSpec,
    /// CSV file name relative to the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<RunMetadata>,
    #[serde(default, rename = "final", skip_serializing_if = "Option::is_none")]
    pub final_checkpoint: Option<Checkpoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn from_report(report: &MetricsReport, runtime: RuntimeSpec) -> Self {
        RunRecord {
            instance_id: report.metadata.instance_id.clone(),
            variant: report.metadata.variant,
            runtime,
            csv: None,
            metadata: Some(report.metadata.clone()),
            final_checkpoint: Some(*report.final_checkpoint()),
            integrator: Some(report.integrator),
            error: None,
        }
    }

    pub fn failed(instance_id: &str, variant: Variant, runtime: RuntimeSpec, error: &Error) -> Self {
        RunRecord {
            instance_id: instance_id.to_string(),
            variant,
            runtime,
            csv: None,
            metadata: None,
            final_checkpoint: None,
            integrator: None,
            error: Some(error.to_string()),
        }
    }

    pub fn succeeded(&self) -> bool {
        self.final_checkpoint.is_some()
    }
}

/// Win/loss/tie counts of `a` against `b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
}

impl Tally {
    fn count(&mut self, delta: f64) {
        if delta > RATIO_TIE_TOL {
            self.wins += 1;
        } else if delta < -RATIO_TIE_TOL {
            self.losses += 1;
        } else {
            self.ties += 1;
        }
    }
}

/// Final-time differences `a − b` on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedDelta {
    pub instance_id: String,
    pub delta_r: f64,
    pub delta_p_opt: f64,
}

/// Paired comparison of two algorithms over the same instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: Variant,
    pub b: Variant,
    pub deltas: Vec<PairedDelta>,
    pub mean_delta_r: f64,
    pub mean_delta_p_opt: f64,
    pub r: Tally,
    pub p_opt: Tally,
}

/// Pairs the successful runs of `a` and `b` by instance id and reports the
/// final-time deltas `a − b`, in the order of `a`.
///
/// Both sides must cover the same instances, each exactly once.
pub fn compare(a: &[RunRecord], b: &[RunRecord]) -> Result<Comparison> {
    let side = |records: &[RunRecord], name: &str| -> Result<(Variant, Vec<(String, Checkpoint)>)> {
        let mut variant = None;
        let mut finals = Vec::new();
        for r in records.iter().filter(|r| r.succeeded()) {
            if *variant.get_or_insert(r.variant) != r.variant {
                return Err(Error::config(format!("report {name} mixes several algorithms")));
            }
            if finals.iter().any(|(id, _)| id == &r.instance_id) {
                return Err(Error::config(format!(
                    "report {name} holds instance `{}` more than once",
                    r.instance_id
                )));
            }
            finals.push((r.instance_id.clone(), r.final_checkpoint.expect("succeeded")));
        }
        let variant = variant.ok_or_else(|| Error::config(format!("report {name} holds no successful run")))?;
        Ok((variant, finals))
    };
    let (va, fa) = side(a, "A")?;
    let (vb, fb) = side(b, "B")?;
    let fb: BTreeMap<_, _> = fb.into_iter().collect();
    if fa.len() != fb.len() || fa.iter().any(|(id, _)| !fb.contains_key(id)) {
        return Err(Error::config("the two reports cover different instance sets"));
    }
    let mut out = Comparison {
        a: va,
        b: vb,
        deltas: Vec::with_capacity(fa.len()),
        mean_delta_r: 0.0,
        mean_delta_p_opt: 0.0,
        r: Tally::default(),
        p_opt: Tally::default(),
    };
    for (id, ca) in &fa {
        let cb = &fb[id];
        let d = PairedDelta {
            instance_id: id.clone(),
            delta_r: ca.r - cb.r,
            delta_p_opt: ca.p_opt - cb.p_opt,
        };
        out.r.count(d.delta_r);
        out.p_opt.count(d.delta_p_opt);
        out.deltas.push(d);
    }
    let n = out.deltas.len() as f64;
    out.mean_delta_r = out.deltas.iter().map(|d| d.delta_r).sum::<f64>() / n;
    out.mean_delta_p_opt = out.deltas.iter().map(|d| d.delta_p_opt).sum::<f64>() / n;
    Ok(out)
}

/// Comparisons of one runtime, all against the same first algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeComparisons {
    pub runtime: RuntimeSpec,
    pub comparisons: Vec<Comparison>,
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Enough to repeat the run exactly.
    pub config: RunConfig,
    pub runs: Vec<RunRecord>,
    pub failed_runs: usize,
    pub aggregates: Vec<Aggregate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paired: Vec<RuntimeComparisons>,
}

impl Summary {
    /// Successful and failed records of `variant`, optionally restricted to
    /// one runtime.
    pub fn select(&self, variant: Variant, runtime: Option<RuntimeSpec>) -> Vec<RunRecord> {
        self.runs
            .iter()
            .filter(|r| r.variant == variant && runtime.is_none_or(|t| r.runtime == t))
            .cloned()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(0.0), "0");
        assert_eq!(format_decimal(1.0), "1.00000000000");
        assert_eq!(format_decimal(0.5), "0.500000000000");
        assert_eq!(format_decimal(226.19467105846511), "226.194671058");
        assert_eq!(format_decimal(-0.00123), "-0.00123000000000");
        assert_eq!(format_decimal(1.5e12), "1500000000000");
        assert_eq!(format_decimal(3.0e-7), "0.000000300000000000");
    }

    #[test]
    fn decimal_keeps_twelve_significant_digits() {
        for v in [std::f64::consts::PI, 1e-9 / 3.0, 123456.789012345, 0.999999999999] {
            let s = format_decimal(v);
            let back: f64 = s.parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-11, "{v} → {s}");
            let digits = s.trim_start_matches(['-', '0', '.']).chars().filter(char::is_ascii_digit).count();
            assert_eq!(digits, CSV_DIGITS, "{s}");
        }
    }

    fn record(id: &str, variant: Variant, r: f64, p_opt: f64) -> RunRecord {
        RunRecord {
            instance_id: id.into(),
            variant,
            runtime: RuntimeSpec::TwoPiN2,
            csv: None,
            metadata: None,
            final_checkpoint: Some(Checkpoint {
                t: 1.0,
                r,
                p_feas: 1.0,
                p_opt,
                p_eps: p_opt,
            }),
            integrator: None,
            error: None,
        }
    }

    #[test]
    fn identical_reports_compare_to_zero() {
        let a = vec![record("x", Variant::Qchop, 0.9, 0.5), record("y", Variant::Qchop, 0.7, 0.1)];
        let c = compare(&a, &a).unwrap();
        assert!(c.deltas.iter().all(|d| d.delta_r == 0.0 && d.delta_p_opt == 0.0));
        assert_eq!(c.r, Tally { wins: 0, losses: 0, ties: 2 });
    }

    #[test]
    fn paired_deltas_and_tallies() {
        let a = vec![record("x", Variant::Qchop, 0.9, 0.5), record("y", Variant::Qchop, 0.7, 0.1)];
        let b = vec![record("y", Variant::Saa, 0.8, 0.1), record("x", Variant::Saa, 0.6, 0.2)];
        let c = compare(&a, &b).unwrap();
        assert_eq!((c.a, c.b), (Variant::Qchop, Variant::Saa));
        assert_eq!(c.deltas[0].instance_id, "x");
        assert!((c.deltas[0].delta_r - 0.3).abs() < 1e-15);
        assert_eq!(c.r, Tally { wins: 1, losses: 1, ties: 0 });
        assert_eq!(c.p_opt, Tally { wins: 1, losses: 0, ties: 1 });
    }

    #[test]
    fn mismatched_instances_are_rejected() {
        let a = vec![record("x", Variant::Qchop, 0.9, 0.5)];
        let b = vec![record("z", Variant::Saa, 0.9, 0.5)];
        assert!(matches!(compare(&a, &b), Err(Error::Config(_))));
        let dup = vec![record("x", Variant::Saa, 0.9, 0.5), record("x", Variant::Saa, 0.9, 0.5)];
        assert!(compare(&a, &dup).is_err());
    }
}
