use std::path::PathBuf;

use clap::ValueEnum;
use evoquant_core::{IntegratorSettings, MixedStrategy};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Vector,
    Lax,
    Quantum,
}

/// Validated parameters of one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub game: PathBuf,
    pub x0: MixedStrategy,
    pub t_end: f64,
    pub dt: f64,
    pub form: Form,
    pub hbar: f64,
    pub out: Option<PathBuf>,
    pub stride: usize,
    pub seed: u64,
}

impl RunConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        game: PathBuf,
        x0: &[f64],
        t_end: f64,
        dt: f64,
        form: Form,
        hbar: f64,
        out: Option<PathBuf>,
        stride: usize,
        seed: u64,
    ) -> CliResult<Self> {
        positive("--t-end", t_end)?;
        positive("--dt", dt)?;
        positive("--hbar", hbar)?;
        if stride < 1 {
            return Err(CliError::field("--stride", "must be at least 1"));
        }
        let x0 = MixedStrategy::new(x0.to_vec()).map_err(|source| CliError::Input { field: "--x0", source })?;
        Ok(RunConfig { game, x0, t_end, dt, form, hbar, out, stride, seed })
    }

    pub fn settings(&self) -> CliResult<IntegratorSettings> {
        Ok(IntegratorSettings::new(self.t_end, self.dt)?.with_stride(self.stride)?)
    }
}

fn positive(field: &'static str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::field(field, format!("must be positive and finite, got {v}")))
    }
}

/// Parses `a,b,c` into floats, naming `field` on failure.
pub fn parse_list(field: &'static str, text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::field(field, format!("{s:?} is not a finite number")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(x0: &[f64], t_end: f64, dt: f64, stride: usize) -> CliResult<RunConfig> {
        RunConfig::new("g.json".into(), x0, t_end, dt, Form::Vector, 1.0, None, stride, 0)
    }

    #[test]
    fn validates_fields() {
        assert!(config(&[0.5, 0.5], 1.0, 0.1, 1).is_ok());
        let msg = config(&[0.5, 0.6], 1.0, 0.1, 1).unwrap_err().to_string();
        assert!(msg.contains("--x0") && msg.contains("sum"), "{msg}");
        assert!(config(&[0.5, 0.5], 0.0, 0.1, 1).unwrap_err().to_string().contains("--t-end"));
        assert!(config(&[0.5, 0.5], 1.0, -0.1, 1).unwrap_err().to_string().contains("--dt"));
        assert!(config(&[0.5, 0.5], 1.0, f64::NAN, 1).is_err());
        assert!(config(&[0.5, 0.5], 1.0, 0.1, 0).unwrap_err().to_string().contains("--stride"));
    }

    #[test]
    fn parses_lists() {
        assert_eq!(parse_list("--x0", "0.25, 0.75").unwrap(), vec![0.25, 0.75]);
        assert_eq!(parse_list("--temps", "-1e2,3").unwrap(), vec![-100.0, 3.0]);
        assert!(parse_list("--x0", "0.5,,0.5").unwrap_err().to_string().contains("--x0"));
        assert!(parse_list("--x0", "nan").is_err());
    }
}
