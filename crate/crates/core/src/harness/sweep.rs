use serde::Serialize;
use serde_json::Value;

use super::{run_experiment, HarnessError, Report};
use crate::config::ExperimentConfig;

/// Column order of [`SweepTable::to_csv`], fixed for every parameter.
pub const SWEEP_COLUMNS: [&str; 19] = [
    "parameter",
    "value",
    "protocol",
    "n",
    "seed",
    "rounds",
    "case1_rounds",
    "case1_errors",
    "case1_error_rate",
    "detection_probability",
    "holevo_bits",
    "helstrom_success",
    "key_rate_estimate",
    "sifted_length",
    "disclosed_count",
    "final_key_length",
    "eta_raw_over_prepared",
    "eta_final_over_prepared",
    "abort",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: String,
    /// Grid value as JSON text.
    pub value: String,
    pub protocol: String,
    pub n: u64,
    pub seed: u64,
    pub rounds: u64,
    pub case1_rounds: u64,
    pub case1_errors: u64,
    pub case1_error_rate: Option<f64>,
    /// Predicted per-round Case 1 error probability of the attack.
    pub detection_probability: f64,
    pub holevo_bits: Option<f64>,
    pub helstrom_success: Option<f64>,
    pub key_rate_estimate: f64,
    pub sifted_length: u64,
    pub disclosed_count: u64,
    pub final_key_length: u64,
    pub eta_raw_over_prepared: f64,
    pub eta_final_over_prepared: f64,
    pub abort: bool,
}

impl SweepRow {
    fn new(parameter: &str, value: &Value, report: &Report) -> Self {
        Self {
            parameter: parameter.to_string(),
            value: value.to_string(),
            protocol: report.config.protocol.to_string(),
            n: report.config.n,
            seed: report.config.seed,
            rounds: report.rounds,
            case1_rounds: report.case_counts.case1,
            case1_errors: report.case1_errors,
            case1_error_rate: report.case1_error_rate,
            detection_probability: report.predicted_case1_error,
            holevo_bits: report.eve.holevo_bits,
            helstrom_success: report.eve.helstrom_success,
            key_rate_estimate: report.key_rate_estimate,
            sifted_length: report.sifted_length,
            disclosed_count: report.disclosed_count,
            final_key_length: report.final_key_length,
            eta_raw_over_prepared: report.efficiency.raw_over_prepared,
            eta_final_over_prepared: report.efficiency.final_over_prepared,
            abort: report.abort,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// RFC 4180 CSV with a header row, even when there are no rows.
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        writer.write_record(SWEEP_COLUMNS)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        let bytes = writer.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }
}

fn path_error(path: &str, reason: impl Into<String>) -> HarnessError {
    HarnessError::Path {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Replaces the scalar at dotted `path` (object keys or array indices) in
/// `root`. The path must already resolve to a number, string or boolean.
pub fn set_path(root: &mut Value, path: &str, new: Value) -> Result<(), HarnessError> {
    if path.is_empty() {
        return Err(path_error(path, "empty path"));
    }
    let mut node = root;
    for segment in path.split('.') {
        node = match node {
            Value::Object(map) => map
                .get_mut(segment)
                .ok_or_else(|| path_error(path, format!("no key `{segment}`")))?,
            Value::Array(items) => {
                let i: usize = segment
                    .parse()
                    .map_err(|_| path_error(path, format!("`{segment}` is not an array index")))?;
                let len = items.len();
                items
                    .get_mut(i)
                    .ok_or_else(|| path_error(path, format!("index {i} out of range for length {len}")))?
            }
            _ => return Err(path_error(path, format!("cannot descend into a scalar at `{segment}`"))),
        };
    }
    match node {
        Value::Number(_) | Value::String(_) | Value::Bool(_) => {
            *node = new;
            Ok(())
        }
        _ => Err(path_error(path, "does not name a scalar")),
    }
}

/// Runs `base` once per grid value substituted at `path`, in grid order.
pub fn sweep(base: &Value, path: &str, grid: &[Value]) -> Result<SweepTable, HarnessError> {
    // Resolve once so that an empty grid still reports a bad path.
    set_path(&mut base.clone(), path, Value::Null)?;
    let mut rows = Vec::with_capacity(grid.len());
    for value in grid {
        let mut doc = base.clone();
        set_path(&mut doc, path, value.clone())?;
        let config = ExperimentConfig::from_value(doc)?;
        let report = run_experiment(&config)?;
        rows.push(SweepRow::new(path, value, &report));
    }
    Ok(SweepTable {
        parameter: path.to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn s1_base() -> Value {
        json!({
            "protocol": "base", "n": 50, "seed": 4,
            "attack": {"kind": "collective_s1", "location": "tp_to_alice", "params": {"theta": 0.0}}
        })
    }

    #[test]
    fn theta_sweep_detection_column() {
        let grid = [
            json!(0.0),
            json!(std::f64::consts::PI / 8.0),
            json!(std::f64::consts::PI / 4.0),
        ];
        let table = sweep(&s1_base(), "attack.params.theta", &grid).unwrap();
        let expected = [0.0, (std::f64::consts::PI / 8.0).sin().powi(2), 0.5];
        for (row, e) in table.rows.iter().zip(expected) {
            assert!((row.detection_probability - e).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_grid_gives_header_only() {
        let table = sweep(&s1_base(), "n", &[]).unwrap();
        let csv = table.to_csv().unwrap();
        assert_eq!(csv, format!("{}\r\n", SWEEP_COLUMNS.join(",")));
    }

    #[test]
    fn honest_n_sweep_has_zero_error() {
        let base = json!({"protocol": "improved", "n": 1, "seed": 2});
        let table = sweep(&base, "n", &[json!(10), json!(100)]).unwrap();
        assert!(table.rows.iter().all(|r| r.case1_error_rate == Some(0.0)));
    }

    #[test]
    fn bad_paths_are_rejected() {
        let base = s1_base();
        assert!(matches!(
            sweep(&base, "attack.params.phi", &[]),
            Err(HarnessError::Path { .. })
        ));
        assert!(matches!(
            sweep(&base, "attack.params", &[]),
            Err(HarnessError::Path { .. })
        ));
        assert!(matches!(sweep(&base, "n.x", &[]), Err(HarnessError::Path { .. })));
    }

    #[test]
    fn columns_match_row_fields() {
        let table = sweep(&s1_base(), "seed", &[json!(1)]).unwrap();
        let csv = table.to_csv().unwrap();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), SWEEP_COLUMNS.len());
        assert_eq!(lines.next().unwrap().split(',').count(), SWEEP_COLUMNS.len());
    }
}
