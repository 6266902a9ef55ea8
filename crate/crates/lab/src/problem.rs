//! Problem files: a channel `W` and a decoding metric `q` as JSON.
//!
//! ```json
//! { "name": "bsc-mismatch", "input_size": 2, "output_size": 2,
//!   "W": [[0.9, 0.1], [0.1, 0.9]],
//!   "q": [[0.95, 0.05], [0.05, 0.95]] }
//! ```

use std::fs;
use std::path::Path;

use mismatch_core::channel::validate_pair;
use mismatch_core::{ChannelSpec, Matrix, MetricSpec, ProblemPair};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub input_size: usize,
    pub output_size: usize,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub name: Option<String>,
    pub pair: ProblemPair,
}

impl ProblemFile {
    pub fn from_pair(pair: &ProblemPair, name: Option<String>) -> ProblemFile {
        let rows = |m: &Matrix| (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
        ProblemFile {
            name,
            input_size: pair.input_size(),
            output_size: pair.output_size(),
            w: rows(pair.channel().matrix()),
            q: rows(pair.metric().matrix()),
        }
    }

    fn matrix(&self, field: &str, rows: &[Vec<f64>]) -> LabResult<Matrix> {
        if rows.len() != self.input_size || rows.iter().any(|r| r.len() != self.output_size) {
            return Err(LabError::parse(
                "problem",
                format!("{field} must be {} rows of {} entries", self.input_size, self.output_size),
            ));
        }
        Ok(Matrix::new(self.input_size, self.output_size, rows.concat())?)
    }

    /// Validates the channel, then the metric against it.
    pub fn into_problem(self) -> LabResult<Problem> {
        if self.input_size == 0 || self.output_size == 0 {
            return Err(LabError::parse("problem", "alphabet sizes must be positive"));
        }
        let channel = ChannelSpec::new(self.matrix("W", &self.w)?)?;
        let metric = MetricSpec::new(self.matrix("q", &self.q)?)?;
        Ok(Problem {
            name: self.name,
            pair: validate_pair(channel, metric)?,
        })
    }
}

pub fn parse_problem(text: &str) -> LabResult<Problem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| LabError::parse("problem", e))?;
    file.into_problem()
}

pub fn load_problem(path: &Path) -> LabResult<Problem> {
    let text = fs::read_to_string(path).map_err(|source| LabError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::exit;

    const BSC: &str = r#"{"name":"bsc","input_size":2,"output_size":2,
        "W":[[0.9,0.1],[0.1,0.9]],"q":[[0.95,0.05],[0.05,0.95]]}"#;

    #[test]
    fn loads_bsc_pair() {
        let p = parse_problem(BSC).unwrap();
        assert_eq!(p.name.as_deref(), Some("bsc"));
        assert_eq!(p.pair.input_size(), 2);
        assert!((p.pair.raw_q_star() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn error_classes() {
        let bad_row = BSC.replace("[0.9,0.1],[0.1", "[0.89,0.1],[0.1");
        let e = parse_problem(&bad_row).unwrap_err();
        assert_eq!((e.code(), e.exit_code()), ("RowNotStochastic", exit::PARSE));

        let zero_q = BSC.replace("[0.95,0.05],[0.05", "[0.95,0.0],[0.05");
        let e = parse_problem(&zero_q).unwrap_err();
        assert_eq!((e.code(), e.exit_code()), ("MetricZeroOnSupport", exit::VALIDATION));

        let e = parse_problem("{ not json").unwrap_err();
        assert_eq!(e.exit_code(), exit::PARSE);

        let ragged = BSC.replace("[0.1,0.9]]", "[0.1,0.8,0.1]]");
        assert_eq!(parse_problem(&ragged).unwrap_err().code(), "ParseError");
    }

    #[test]
    fn round_trip() {
        let p = parse_problem(BSC).unwrap();
        let file = ProblemFile::from_pair(&p.pair, p.name.clone());
        let again = file.into_problem().unwrap();
        assert_eq!(again.pair.channel(), p.pair.channel());
    }
}
