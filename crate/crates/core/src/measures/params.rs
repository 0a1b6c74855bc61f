use chrono::Datelike;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Measure;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("AttRank weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("unknown parameter {0:?}")]
    UnknownKey(String),
    #[error("cannot parse {key} = {value:?}")]
    Unparseable { key: String, value: String },
}

/// Tunables of all five measures.
///
/// `pr_epsilon` and `max_iterations` bound both iterative measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    pub current_year: i32,
    /// iCC counts citations at most this many years after publication.
    pub incubation_window: i32,
    pub pr_alpha: f64,
    /// Convergence threshold on the L1 change between iterations.
    pub pr_epsilon: f64,
    pub ram_gamma: f64,
    pub att_alpha: f64,
    pub att_beta: f64,
    pub att_gamma: f64,
    pub att_rho: f64,
    /// Number of most recent years counted as "recent attention".
    pub att_window: i32,
    pub max_iterations: u32,
}

impl Default for MeasureParams {
    fn default() -> Self {
        MeasureParams::with_current_year(chrono::Utc::now().year())
    }
}

impl MeasureParams {
    pub const KEYS: [&'static str; 11] = [
        "current_year",
        "icc_window",
        "pr_alpha",
        "pr_epsilon",
        "ram_gamma",
        "att_alpha",
        "att_beta",
        "att_gamma",
        "att_rho",
        "att_window",
        "max_iterations",
    ];

    pub fn with_current_year(current_year: i32) -> Self {
        MeasureParams {
            current_year,
            incubation_window: 3,
            pr_alpha: 0.5,
            pr_epsilon: 1e-12,
            ram_gamma: 0.6,
            att_alpha: 0.2,
            att_beta: 0.5,
            att_gamma: 0.3,
            att_rho: 0.16,
            att_window: 3,
            max_iterations: 200,
        }
    }

    /// Sets one parameter by its config key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ParamError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ParamError> {
            value.trim().parse().map_err(|_| ParamError::Unparseable {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        match key {
            "current_year" => self.current_year = parse(key, value)?,
            "icc_window" => self.incubation_window = parse(key, value)?,
            "pr_alpha" => self.pr_alpha = parse(key, value)?,
            "pr_epsilon" => self.pr_epsilon = parse(key, value)?,
            "ram_gamma" => self.ram_gamma = parse(key, value)?,
            "att_alpha" => self.att_alpha = parse(key, value)?,
            "att_beta" => self.att_beta = parse(key, value)?,
            "att_gamma" => self.att_gamma = parse(key, value)?,
            "att_rho" => self.att_rho = parse(key, value)?,
            "att_window" => self.att_window = parse(key, value)?,
            "max_iterations" => self.max_iterations = parse(key, value)?,
            _ => return Err(ParamError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        Measure::ALL.iter().try_for_each(|&m| self.validate_for(m))
    }

    /// Checks only the parameters `measure` depends on.
    pub fn validate_for(&self, measure: Measure) -> Result<(), ParamError> {
        fn check(
            name: &'static str,
            value: f64,
            range: &'static str,
            ok: bool,
        ) -> Result<(), ParamError> {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(ParamError::OutOfRange { name, value, range })
            }
        }
        let iterative = |p: &Self| -> Result<(), ParamError> {
            check("pr_epsilon", p.pr_epsilon, "(0, inf)", p.pr_epsilon > 0.0)?;
            let it = p.max_iterations as f64;
            check("max_iterations", it, "[1, inf)", p.max_iterations >= 1)
        };
        match measure {
            Measure::Cc => Ok(()),
            Measure::Icc => {
                let y = self.incubation_window as f64;
                check("icc_window", y, "[1, inf)", self.incubation_window >= 1)
            }
            Measure::PageRank => {
                let a = self.pr_alpha;
                check("pr_alpha", a, "[0, 1]", (0.0..=1.0).contains(&a))?;
                iterative(self)
            }
            Measure::Ram => {
                let g = self.ram_gamma;
                check("ram_gamma", g, "(0, 1)", g > 0.0 && g < 1.0)
            }
            Measure::AttRank => {
                for (name, w) in [
                    ("att_alpha", self.att_alpha),
                    ("att_beta", self.att_beta),
                    ("att_gamma", self.att_gamma),
                ] {
                    check(name, w, "[0, 1]", (0.0..=1.0).contains(&w))?;
                }
                let total = self.att_alpha + self.att_beta + self.att_gamma;
                if (total - 1.0).abs() > 1e-12 {
                    return Err(ParamError::WeightSum(total));
                }
                check("att_alpha", self.att_alpha, "[0, 1)", self.att_alpha < 1.0)?;
                check("att_rho", self.att_rho, "(0, inf)", self.att_rho > 0.0)?;
                let w = self.att_window as f64;
                check("att_window", w, "[1, inf)", self.att_window >= 1)?;
                iterative(self)
            }
        }
    }
}
