//! Graph-neighbourhood membership scores and the sample filters built on
//! them.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::{squared_distance, GabrielGraph};

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSigma(sigma))
    }
}

/// `exp(−‖a−b‖² / 2σ²)`
pub fn gaussian_kernel(a: &[f64], b: &[f64], sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok((-squared_distance(a, b) / (2.0 * sigma * sigma)).exp())
}

fn check_vertex(graph: &GabrielGraph, dataset: &Dataset, i: usize) -> Result<()> {
    if graph.len() != dataset.len() {
        return Err(Error::GraphDatasetMismatch {
            graph: graph.len(),
            dataset: dataset.len(),
        });
    }
    if i >= graph.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: graph.len(),
        });
    }
    if graph.degree(i) == 0 {
        return Err(Error::IsolatedVertex(i));
    }
    Ok(())
}

/// Fraction of `i`'s graph neighbours sharing its label.
pub fn membership_cardinality(graph: &GabrielGraph, dataset: &Dataset, i: usize) -> Result<f64> {
    check_vertex(graph, dataset, i)?;
    let neighbors = graph.neighbors(i);
    let same = neighbors
        .iter()
        .filter(|&&k| dataset.label(k) == dataset.label(i))
        .count();
    Ok(same as f64 / neighbors.len() as f64)
}

/// Kernel-weighted fraction of `i`'s neighbours sharing its label.
///
/// Every kernel value is rescaled by the nearest neighbour's, which
/// leaves the ratio unchanged and keeps it defined when all kernels
/// underflow at small `sigma`.
pub fn membership_distance(
    graph: &GabrielGraph,
    dataset: &Dataset,
    i: usize,
    sigma: f64,
) -> Result<f64> {
    check_sigma(sigma)?;
    check_vertex(graph, dataset, i)?;
    let x = dataset.features();
    let xi = x.row(i);
    let xi = xi.as_slice().expect("dataset rows are contiguous");
    let d: Vec<f64> = graph
        .neighbors(i)
        .iter()
        .map(|&k| {
            squared_distance(
                xi,
                x.row(k).as_slice().expect("dataset rows are contiguous"),
            )
        })
        .collect();
    let nearest = d.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = 2.0 * sigma * sigma;
    let (mut same, mut total) = (0.0, 0.0);
    for (&k, &dk) in graph.neighbors(i).iter().zip(&d) {
        let w = (-(dk - nearest) / scale).exp();
        total += w;
        if dataset.label(k) == dataset.label(i) {
            same += w;
        }
    }
    Ok(same / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MembershipKind {
    Cardinality,
    Distance,
}

/// Membership of every sample, in index order.
pub fn memberships(
    graph: &GabrielGraph,
    dataset: &Dataset,
    kind: MembershipKind,
    sigma: f64,
) -> Result<Vec<f64>> {
    if kind == MembershipKind::Distance {
        check_sigma(sigma)?;
    }
    (0..dataset.len())
        .into_par_iter()
        .map(|i| match kind {
            MembershipKind::Cardinality => membership_cardinality(graph, dataset, i),
            MembershipKind::Distance => membership_distance(graph, dataset, i, sigma),
        })
        .collect()
}

/// Mean membership per class.
pub fn class_thresholds(
    memberships: &[f64],
    labels: &[usize],
    class_count: usize,
) -> Result<Vec<f64>> {
    if memberships.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: memberships.len(),
        });
    }
    let mut sums = vec![0.0; class_count];
    let mut counts = vec![0usize; class_count];
    for (&q, &label) in memberships.iter().zip(labels) {
        if label >= class_count {
            return Err(Error::InvalidLabel { label, class_count });
        }
        sums[label] += q;
        counts[label] += 1;
    }
    if let Some(class) = counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(class));
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| s / n as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FilterPolicy {
    /// Keep every sample.
    None,
    /// Drop samples whose membership is strictly below their class mean.
    Threshold,
    /// Drop the `counts[c]` lowest-membership samples of each class `c`.
    PerClassCount { counts: Vec<usize> },
}

impl std::fmt::Display for FilterPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FilterPolicy::None => write!(f, "none"),
            FilterPolicy::Threshold => write!(f, "threshold"),
            FilterPolicy::PerClassCount { counts } => {
                let parts: Vec<String> = counts.iter().map(usize::to_string).collect();
                write!(f, "count:{}", parts.join("/"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterModel {
    pub kind: MembershipKind,
    /// Only meaningful for [`MembershipKind::Distance`].
    pub sigma: f64,
    pub memberships: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub policy: FilterPolicy,
}

impl FilterModel {
    /// Scores every sample of `dataset` on `graph`, its own Gabriel graph.
    pub fn fit(
        graph: &GabrielGraph,
        dataset: &Dataset,
        kind: MembershipKind,
        sigma: f64,
        policy: FilterPolicy,
    ) -> Result<Self> {
        let memberships = memberships(graph, dataset, kind, sigma)?;
        let thresholds = class_thresholds(&memberships, dataset.labels(), dataset.class_count())?;
        Ok(FilterModel {
            kind,
            sigma,
            memberships,
            thresholds,
            policy,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FilterOutcome {
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    /// Classes the policy would have emptied; their best sample was kept.
    pub rescued_classes: Vec<usize>,
}

pub fn filter_samples(dataset: &Dataset, filter: &FilterModel) -> Result<FilterOutcome> {
    let m = dataset.len();
    let c = dataset.class_count();
    if filter.memberships.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: filter.memberships.len(),
        });
    }
    let q = &filter.memberships;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, &label) in dataset.labels().iter().enumerate() {
        by_class[label].push(i);
    }

    let mut remove = vec![false; m];
    match &filter.policy {
        FilterPolicy::None => {}
        FilterPolicy::Threshold => {
            if filter.thresholds.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    actual: filter.thresholds.len(),
                });
            }
            for i in 0..m {
                remove[i] = q[i] < filter.thresholds[dataset.label(i)];
            }
        }
        FilterPolicy::PerClassCount { counts } => {
            if counts.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    actual: counts.len(),
                });
            }
            for (class, members) in by_class.iter().enumerate() {
                let count = counts[class];
                if count >= members.len() {
                    return Err(Error::FilterCountTooLarge {
                        class,
                        count,
                        size: members.len(),
                    });
                }
                let mut order = members.clone();
                order.sort_by(|&a, &b| q[a].total_cmp(&q[b]).then(a.cmp(&b)));
                for &i in &order[..count] {
                    remove[i] = true;
                }
            }
        }
    }

    let mut rescued_classes = Vec::new();
    for (class, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.iter().all(|&i| remove[i]) {
            let best = members
                .iter()
                .copied()
                .reduce(|a, b| if q[b] > q[a] { b } else { a })
                .expect("non-empty class");
            remove[best] = false;
            log::warn!("filter would empty class {class}; keeping sample {best}");
            rescued_classes.push(class);
        }
    }

    let (removed, kept): (Vec<usize>, Vec<usize>) = (0..m).partition(|&i| remove[i]);
    Ok(FilterOutcome {
        kept,
        removed,
        rescued_classes,
    })
}

/// CSV columns: `sample_index,class,q,q_d,threshold,removed_flag`.
///
/// `threshold` and `removed_flag` come from `filter`; `ids` maps rows to
/// the sample indices printed.
pub fn write_membership_csv<W: Write>(
    dataset: &Dataset,
    ids: &[usize],
    cardinality: &[f64],
    distance: &[f64],
    filter: &FilterModel,
    outcome: &FilterOutcome,
    out: W,
) -> Result<()> {
    let m = dataset.len();
    for len in [ids.len(), cardinality.len(), distance.len()] {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: len,
            });
        }
    }
    let mut removed = vec![false; m];
    for &i in &outcome.removed {
        removed[i] = true;
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "sample_index",
        "class",
        "q",
        "q_d",
        "threshold",
        "removed_flag",
    ])?;
    for i in 0..m {
        let label = dataset.label(i);
        writer.serialize((
            ids[i],
            &dataset.class_names()[label],
            cardinality[i],
            distance[i],
            filter.thresholds[label],
            removed[i],
        ))?;
    }
    writer.flush()?;
    Ok(())
}
