//! Run configuration: a declarative TOML file plus flag overrides, flags win.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use chrono::{DateTime, Utc};
use serde::Deserialize;

use stylo_core::corpus::Window;
use stylo_core::evaluator::Direction;
use stylo_core::similarity::{ConfusionRanking, Measure, Mode, ScoreParams};

use crate::CliError;

/// Everything a run can configure. Every field has a default, so an empty
/// (or absent) config file is valid; resolution order is defaults, then the
/// config file, then command-line flags.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub posts: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Analysis window; timestamps are quoted RFC 3339 strings.
    pub window_start: DateTime<Utc>,
    pub window_end: DateTime<Utc>,
    pub min_posts: usize,
    /// Bin count for the ingest posts-per-account histogram.
    pub stats_bins: usize,
    pub measures: Vec<Measure>,
    pub modes: Vec<Mode>,
    /// Confusion-model Dirichlet prior over users.
    pub alpha: f64,
    /// Confusion-model Dirichlet prior over words.
    pub beta: f64,
    pub confusion_rank_by: ConfusionRanking,
    pub direction: Direction,
    pub seed: u64,
    /// Worker threads for the evaluation fan-out; 0 means all cores.
    pub jobs: usize,
    /// Also write one `scores_<measure>_<mode>.csv` per combination.
    pub dump_scores: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            posts: None,
            ground_truth: None,
            out_dir: PathBuf::from("out"),
            window_start: DateTime::<Utc>::from_timestamp(0, 0).unwrap(),
            window_end: "9999-01-01T00:00:00Z".parse().unwrap(),
            min_posts: 20,
            stats_bins: 500,
            measures: Measure::ALL.to_vec(),
            modes: vec![Mode::Combined],
            alpha: 1.0,
            beta: 0.5,
            confusion_rank_by: ConfusionRanking::SelectionProbability,
            direction: Direction::AToB,
            seed: 42,
            jobs: 0,
            dump_scores: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))
                    .map_err(CliError::Usage)?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config file {}", path.display()))
                    .map_err(CliError::Usage)
            }
        }
    }

    pub fn window(&self) -> Result<Window, CliError> {
        Window::new(self.window_start, self.window_end)
            .context("window_start must precede window_end")
            .map_err(CliError::Usage)
    }

    pub fn score_params(&self) -> Result<ScoreParams, CliError> {
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Usage(anyhow!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(ScoreParams {
            alpha: self.alpha,
            beta: self.beta,
            confusion_ranking: self.confusion_rank_by,
        })
    }

    pub fn posts_path(&self) -> Result<&Path, CliError> {
        self.posts
            .as_deref()
            .ok_or_else(|| CliError::Usage(anyhow!("no posts file given (flag --posts or config `posts`)")))
    }

    pub fn ground_truth_path(&self) -> Result<&Path, CliError> {
        self.ground_truth.as_deref().ok_or_else(|| {
            CliError::Usage(anyhow!(
                "no ground truth file given (flag --ground-truth or config `ground_truth`)"
            ))
        })
    }
}
