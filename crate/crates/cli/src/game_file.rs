//! Game files are JSON objects:
//!
//! ```json
//! {"n": 3, "payoff": [[0, -1, 1], [1, 0, -1], [-1, 1, 0]], "labels": ["R", "P", "S"]}
//! ```
//!
//! `labels` is optional.

use std::path::Path;

use evoquant_core::{Error, PayoffMatrix};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    n: usize,
    payoff: Vec<Vec<f64>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

pub fn load_game(path: &Path) -> CliResult<PayoffMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    parse_game(&text).map_err(|e| match e {
        CliError::Json { source, .. } => CliError::Json { path: path.into(), source },
        other => other,
    })
}

/// Parses game JSON from a string. JSON errors carry an empty path.
pub fn parse_game(text: &str) -> CliResult<PayoffMatrix> {
    let file: GameFile =
        serde_json::from_str(text).map_err(|source| CliError::Json { path: Default::default(), source })?;
    if file.payoff.len() != file.n {
        return Err(CliError::Input {
            field: "payoff",
            source: Error::DimensionMismatch { expected: file.n, found: file.payoff.len() },
        });
    }
    let game = PayoffMatrix::from_rows(&file.payoff).map_err(|source| CliError::Input { field: "payoff", source })?;
    match file.labels {
        Some(labels) => game.with_labels(labels).map_err(|source| CliError::Input { field: "labels", source }),
        None => Ok(game),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_and_labelled_games() {
        let pd = parse_game(r#"{"n":2,"payoff":[[3,0],[5,1]]}"#).unwrap();
        assert_eq!(pd.n(), 2);
        assert_eq!(pd.entry(1, 0), 5.0);
        assert!(pd.labels().is_none());

        let rps = parse_game(r#"{"n":3,"payoff":[[0,-1,1],[1,0,-1],[-1,1,0]],"labels":["R","P","S"]}"#).unwrap();
        assert_eq!(rps.labels().unwrap(), &["R", "P", "S"]);
        assert_eq!(rps.entry(0, 1), -1.0);
    }

    #[test]
    fn rejects_bad_games() {
        let err = parse_game(r#"{"n":2,"payoff":[[3,0],[5]]}"#).unwrap_err();
        assert!(matches!(err, CliError::Input { source: Error::RaggedRow { row: 1, .. }, .. }), "{err}");
        assert!(err.to_string().contains("payoff"));

        assert!(matches!(parse_game(r#"{"n":2,"payoff":[[3,0],[5,1]"#), Err(CliError::Json { .. })));
        assert!(matches!(parse_game(r#"{"n":2,"payoff":[[1e999,0],[5,1]]}"#), Err(CliError::Json { .. })));
        assert!(matches!(
            parse_game(r#"{"n":3,"payoff":[[3,0],[5,1]]}"#),
            Err(CliError::Input { source: Error::DimensionMismatch { .. }, .. })
        ));
        assert!(parse_game(r#"{"n":2,"payoff":[[3,0],[5,1]],"labels":["C"]}"#).is_err());
    }
}
