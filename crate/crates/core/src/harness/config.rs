use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{Architecture, GradientOptions, TrainingMode};
use crate::error::{Error, Result};
use crate::regularization::{FilterPolicy, MembershipKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaStrategy {
    /// `count` log-spaced values from `low` to `high` inclusive.
    Grid,
    /// `count` log-uniform draws, seeded from the experiment seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigmaSearch {
    pub low: f64,
    pub high: f64,
    pub strategy: SigmaStrategy,
    pub count: usize,
}

impl Default for SigmaSearch {
    fn default() -> Self {
        SigmaSearch {
            low: 0.1,
            high: 10.0,
            strategy: SigmaStrategy::Grid,
            count: 20,
        }
    }
}

impl SigmaSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.low > 0.0 && self.low < self.high && self.high.is_finite()) {
            return Err(Error::Config(format!(
                "sigma bounds need 0 < low < high, got [{}, {}]",
                self.low, self.high
            )));
        }
        if self.count == 0 {
            return Err(Error::Config("sigma count must be positive".into()));
        }
        Ok(())
    }

    /// Candidate bandwidths in ascending order.
    pub fn values(&self, seed: u64) -> Vec<f64> {
        let (lo, hi) = (self.low.ln(), self.high.ln());
        let mut values: Vec<f64> = match self.strategy {
            SigmaStrategy::Grid if self.count == 1 => vec![self.low],
            SigmaStrategy::Grid => (0..self.count)
                .map(|i| (lo + (hi - lo) * i as f64 / (self.count - 1) as f64).exp())
                .collect(),
            SigmaStrategy::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5349_474d_4100_0000);
                (0..self.count)
                    .map(|_| rng.random_range(lo..hi).exp())
                    .collect()
            }
        };
        values.sort_by(f64::total_cmp);
        values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountGrid {
    /// The same requested count for every class.
    Uniform,
    /// Every combination of per-class counts.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FilterSearch {
    None,
    Threshold,
    PerClassCount {
        #[serde(default = "default_count_values")]
        values: Vec<usize>,
        /// Requested counts are capped at this fraction of each class.
        #[serde(default = "default_max_fraction")]
        max_fraction: f64,
        #[serde(default = "default_count_grid")]
        grid: CountGrid,
    },
}

fn default_count_values() -> Vec<usize> {
    vec![0, 1, 2, 5, 10]
}

fn default_max_fraction() -> f64 {
    0.2
}

fn default_count_grid() -> CountGrid {
    CountGrid::Uniform
}

impl Default for FilterSearch {
    fn default() -> Self {
        FilterSearch::PerClassCount {
            values: default_count_values(),
            max_fraction: default_max_fraction(),
            grid: default_count_grid(),
        }
    }
}

/// A filter setting before it is fitted to a training set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FilterChoice {
    None,
    Threshold,
    /// Requested per-class counts, capped per training set.
    Counts(Vec<usize>),
}

impl FilterChoice {
    /// Concrete policy for a training set with the given class sizes.
    pub fn resolve(&self, class_sizes: &[usize], max_fraction: f64) -> FilterPolicy {
        match self {
            FilterChoice::None => FilterPolicy::None,
            FilterChoice::Threshold => FilterPolicy::Threshold,
            FilterChoice::Counts(requested) => FilterPolicy::PerClassCount {
                counts: requested
                    .iter()
                    .zip(class_sizes)
                    .map(|(&r, &size)| {
                        r.min((max_fraction * size as f64).floor() as usize)
                            .min(size - 1)
                    })
                    .collect(),
            },
        }
    }
}

impl FilterSearch {
    pub fn max_fraction(&self) -> f64 {
        match self {
            FilterSearch::PerClassCount { max_fraction, .. } => *max_fraction,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let FilterSearch::PerClassCount {
            values,
            max_fraction,
            ..
        } = self
        {
            if values.is_empty() {
                return Err(Error::Config(
                    "per-class count search needs at least one value".into(),
                ));
            }
            if !(0.0..1.0).contains(max_fraction) {
                return Err(Error::Config(format!(
                    "max_fraction must lie in [0, 1), got {max_fraction}"
                )));
            }
        }
        Ok(())
    }

    /// Distinct choices once capped for `class_sizes`, in search order.
    pub fn choices(&self, class_sizes: &[usize]) -> Vec<FilterChoice> {
        let raw = match self {
            FilterSearch::None => vec![FilterChoice::None],
            FilterSearch::Threshold => vec![FilterChoice::Threshold],
            FilterSearch::PerClassCount {
                values,
                grid: CountGrid::Uniform,
                ..
            } => values
                .iter()
                .map(|&v| FilterChoice::Counts(vec![v; class_sizes.len()]))
                .collect(),
            FilterSearch::PerClassCount {
                values,
                grid: CountGrid::Product,
                ..
            } => {
                let mut combos = vec![Vec::new()];
                for _ in class_sizes {
                    combos = combos
                        .into_iter()
                        .flat_map(|prefix: Vec<usize>| {
                            values.iter().map(move |&v| {
                                let mut next = prefix.clone();
                                next.push(v);
                                next
                            })
                        })
                        .collect();
                }
                combos.into_iter().map(FilterChoice::Counts).collect()
            }
        };
        let cap = self.max_fraction();
        let mut seen = Vec::new();
        let mut out = Vec::new();
        for choice in raw {
            let resolved = choice.resolve(class_sizes, cap);
            if !seen.contains(&resolved) {
                seen.push(resolved);
                out.push(choice);
            }
        }
        out
    }
}

/// Everything that determines a nested cross-validation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Option<PathBuf>,
    pub label_column: String,
    pub architecture: Architecture,
    pub membership: MembershipKind,
    pub sigma: SigmaSearch,
    pub filter: FilterSearch,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub seed: u64,
    pub training_mode: TrainingMode,
    pub gradient: GradientOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: None,
            label_column: "class".into(),
            architecture: Architecture::SsvBinary,
            membership: MembershipKind::Distance,
            sigma: SigmaSearch::default(),
            filter: FilterSearch::default(),
            outer_folds: 5,
            inner_folds: 5,
            seed: 0,
            training_mode: TrainingMode::Pseudoinverse,
            gradient: GradientOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)?;
        // a relative dataset path is taken relative to the config file
        if let (Some(dataset), Some(dir)) = (&config.dataset, path.parent()) {
            if dataset.is_relative() {
                config.dataset = Some(dir.join(dataset));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outer_folds < 2 || self.inner_folds < 2 {
            return Err(Error::Config("fold counts must be at least 2".into()));
        }
        self.sigma.validate()?;
        self.filter.validate()
    }

    /// Whether candidates differ in bandwidth at all.
    pub fn searches_sigma(&self) -> bool {
        self.membership == MembershipKind::Distance && self.filter != FilterSearch::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_log_spaced() {
        let v = SigmaSearch::default().values(0);
        assert_eq!(v.len(), 20);
        assert!((v[0] - 0.1).abs() < 1e-15 && (v[19] - 10.0).abs() < 1e-12);
        let ratio = v[1] / v[0];
        assert!(v.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-12));
    }

    #[test]
    fn counts_are_capped_and_deduplicated() {
        let search = FilterSearch::default();
        // 20% of 12 is 2: values 2, 5 and 10 all collapse onto 2
        let choices = search.choices(&[12, 40]);
        let resolved: Vec<FilterPolicy> =
            choices.iter().map(|c| c.resolve(&[12, 40], 0.2)).collect();
        assert_eq!(
            resolved,
            vec![
                FilterPolicy::PerClassCount { counts: vec![0, 0] },
                FilterPolicy::PerClassCount { counts: vec![1, 1] },
                FilterPolicy::PerClassCount { counts: vec![2, 2] },
                FilterPolicy::PerClassCount { counts: vec![2, 5] },
                FilterPolicy::PerClassCount { counts: vec![2, 8] },
            ]
        );
    }

    #[test]
    fn config_defaults_and_unknown_fields() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"seed": 4}"#).unwrap();
        assert_eq!((c.seed, c.outer_folds, c.inner_folds), (4, 5, 5));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sede": 4}"#).is_err());
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"filter": {"policy": "per-class-count", "grid": "product"}}"#)
                .unwrap();
        assert_eq!(c.filter.choices(&[100, 100]).len(), 25);
    }
}
