//! Gabriel graph construction and incremental recomputation.
//!
//! Samples `j` and `k` are adjacent when no third sample lies strictly
//! inside the sphere whose diameter is the segment between them:
//!
//! ```text
//! ‖Xj − Xk‖² > ‖Xj − Xi‖² + ‖Xk − Xi‖²   ⇒   i blocks (j, k)
//! ```
//!
//! Samples on the sphere boundary do not block. All tests use squared
//! distances produced by [`squared_distance`], so every builder sees
//! bit-identical operands and the incremental path reproduces a fresh
//! build exactly.

mod export;
mod support;
mod tri;

use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub use export::{write_dot, write_edge_csv, write_witness_csv};
pub use support::{extract_support, Ssv, SupportEdge, SupportStructure};
pub use tri::UpperTriangular;

/// Adjacency of a Gabriel graph, optionally with the witness matrix `W`
/// (`W[j][k]` = number of samples strictly inside the pair's sphere).
#[derive(Debug, Clone)]
pub struct GabrielGraph {
    adjacency: UpperTriangular<bool>,
    neighbors: Vec<Vec<usize>>,
    witness_counts: Option<UpperTriangular<u32>>,
    witness_hints: Option<UpperTriangular<WitnessHint>>,
    sample_ids: Vec<usize>,
}

/// The first witnesses of a pair in index order. Slots past the pair's
/// witness count hold `u32::MAX`.
pub type WitnessHint = [u32; HINTS];

const HINTS: usize = 3;

const NO_WITNESS: u32 = u32::MAX;

impl GabrielGraph {
    fn from_adjacency(
        adjacency: UpperTriangular<bool>,
        witness_counts: Option<UpperTriangular<u32>>,
        sample_ids: Vec<usize>,
    ) -> Self {
        let m = adjacency.size();
        let mut neighbors = vec![Vec::new(); m];
        for j in 0..m.saturating_sub(1) {
            for (offset, &edge) in adjacency.row(j).iter().enumerate() {
                if edge {
                    let k = j + 1 + offset;
                    neighbors[j].push(k);
                    neighbors[k].push(j);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        GabrielGraph {
            adjacency,
            neighbors,
            witness_counts,
            witness_hints: None,
            sample_ids,
        }
    }

    pub fn len(&self) -> usize {
        self.adjacency.size()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `false` on the diagonal.
    pub fn is_edge(&self, j: usize, k: usize) -> bool {
        j != k && self.adjacency.get(j, k)
    }

    /// Sorted neighbour indices of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// All edges as `(j, k)` with `j < k`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(j, list)| list.iter().filter(move |&&k| k > j).map(move |&k| (j, k)))
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn witness_counts(&self) -> Option<&UpperTriangular<u32>> {
        self.witness_counts.as_ref()
    }

    pub fn witness_hints(&self) -> Option<&UpperTriangular<WitnessHint>> {
        self.witness_hints.as_ref()
    }

    pub fn witness_count(&self, j: usize, k: usize) -> Option<u32> {
        self.witness_counts.as_ref().map(|w| w.get(j, k))
    }

    /// Original dataset index of each vertex.
    pub fn sample_ids(&self) -> &[usize] {
        &self.sample_ids
    }

    pub fn adjacency(&self) -> &UpperTriangular<bool> {
        &self.adjacency
    }

    /// Dense symmetric adjacency matrix with a `false` diagonal.
    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        let m = self.len();
        let mut dense = vec![vec![false; m]; m];
        for (j, k) in self.edges() {
            dense[j][k] = true;
            dense[k][j] = true;
        }
        dense
    }

    /// Same vertex count and edge set; ignores witness counts and ids.
    pub fn same_adjacency(&self, other: &GabrielGraph) -> bool {
        self.adjacency == other.adjacency
    }

    pub fn is_connected(&self) -> bool {
        let m = self.len();
        if m == 0 {
            return true;
        }
        let mut seen = vec![false; m];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.neighbors[v] {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    stack.push(u);
                }
            }
        }
        reached == m
    }
}

/// Squared Euclidean distance. Symmetric bit for bit.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Whether `i` lies strictly inside the diametral sphere of `(j, k)`,
/// given the three squared distances.
#[inline]
fn blocks(d_jk: f64, d_ji: f64, d_ki: f64) -> bool {
    d_jk > d_ji + d_ki
}

/// Evaluates the Gabriel condition for one pair straight from the
/// definition, checking every other sample.
pub fn is_gabriel_edge(dataset: &Dataset, j: usize, k: usize) -> Result<bool> {
    let m = dataset.len();
    for index in [j, k] {
        if index >= m {
            return Err(Error::IndexOutOfRange { index, len: m });
        }
    }
    if j == k {
        return Err(Error::SelfPair(j));
    }
    let x = dataset.features();
    let xj = x.row(j);
    let xk = x.row(k);
    let dist = |a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>| {
        a.iter()
            .zip(b.iter())
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
    };
    let d_jk = dist(xj, xk);
    Ok((0..m)
        .filter(|&i| i != j && i != k)
        .all(|i| !blocks(d_jk, dist(xj, x.row(i)), dist(xk, x.row(i)))))
}

/// Dense `m × m` matrix of squared distances, row-major.
struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    fn new(rows: &[&[f64]]) -> Self {
        let size = rows.len();
        let data: Vec<f64> = rows
            .par_iter()
            .flat_map_iter(|a| rows.iter().map(move |b| squared_distance(a, b)))
            .collect();
        DistanceMatrix { size, data }
    }

    #[inline]
    fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.size..(j + 1) * self.size]
    }

    fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for j in 0..self.size {
            for (k, &d) in self.row(j).iter().enumerate().skip(j + 1) {
                if d == 0.0 {
                    pairs.push((j, k));
                }
            }
        }
        pairs
    }
}

fn row_slices<'a>(x: ArrayView2<'a, f64>) -> Vec<&'a [f64]> {
    let n = x.ncols();
    let flat = x.to_slice().expect("standard layout");
    if n == 0 {
        return vec![&[][..]; x.nrows()];
    }
    flat.chunks_exact(n).collect()
}

fn checked_distances(dataset: &Dataset) -> Result<DistanceMatrix> {
    let m = dataset.len();
    if m < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            actual: m,
        });
    }
    let x = dataset.features();
    let x = x.as_standard_layout();
    let distances = DistanceMatrix::new(&row_slices(x.view()));
    let duplicates = distances.duplicates();
    if !duplicates.is_empty() {
        return Err(Error::DuplicateRows(duplicates));
    }
    Ok(distances)
}

/// Classic construction: for each pair, scan all samples and stop at the
/// first one inside the pair's sphere.
pub fn build_graph(dataset: &Dataset) -> Result<GabrielGraph> {
    let distances = checked_distances(dataset)?;
    let m = dataset.len();
    let rows: Vec<Vec<bool>> = (0..m - 1)
        .into_par_iter()
        .map(|j| {
            let dj = distances.row(j);
            (j + 1..m)
                .map(|k| {
                    let dk = distances.row(k);
                    let d_jk = dj[k];
                    // i == j or i == k reduces to d_jk > d_jk and never blocks
                    !dj.iter()
                        .zip(dk)
                        .any(|(&d_ji, &d_ki)| blocks(d_jk, d_ji, d_ki))
                })
                .collect()
        })
        .collect();
    Ok(GabrielGraph::from_adjacency(
        UpperTriangular::from_rows(m, rows),
        None,
        (0..m).collect(),
    ))
}

/// Construction that scans every sample for every pair and records the
/// number of blocking witnesses in `W`.
pub fn build_graph_with_witness(dataset: &Dataset) -> Result<GabrielGraph> {
    if dataset.len() > NO_WITNESS as usize {
        return Err(Error::Config(format!(
            "{} samples exceed the witness index range",
            dataset.len()
        )));
    }
    let distances = checked_distances(dataset)?;
    let m = dataset.len();
    let rows: Vec<(Vec<u32>, Vec<WitnessHint>)> = (0..m - 1)
        .into_par_iter()
        .map(|j| {
            let dj = distances.row(j);
            (j + 1..m)
                .map(|k| {
                    let dk = distances.row(k);
                    let d_jk = dj[k];
                    let count: u32 = dj
                        .iter()
                        .zip(dk)
                        .map(|(&d_ji, &d_ki)| u32::from(blocks(d_jk, d_ji, d_ki)))
                        .sum();
                    let mut hint = [NO_WITNESS; HINTS];
                    if count > 0 {
                        let found = (0..m).filter(|&i| blocks(d_jk, dj[i], dk[i]));
                        for (slot, i) in hint.iter_mut().zip(found) {
                            *slot = i as u32;
                        }
                    }
                    (count, hint)
                })
                .unzip()
        })
        .collect();
    let (count_rows, hint_rows): (Vec<Vec<u32>>, Vec<Vec<WitnessHint>>) = rows.into_iter().unzip();
    let witness = UpperTriangular::from_rows(m, count_rows);
    let adjacency_rows = (0..m.saturating_sub(1))
        .map(|j| witness.row(j).iter().map(|&w| w == 0).collect())
        .collect();
    let mut graph = GabrielGraph::from_adjacency(
        UpperTriangular::from_rows(m, adjacency_rows),
        Some(witness),
        (0..m).collect(),
    );
    graph.witness_hints = Some(UpperTriangular::from_rows(m, hint_rows));
    Ok(graph)
}

/// Gabriel graph of the samples left after deleting `removed`, derived
/// from the witness counts of the full graph.
///
/// A surviving pair is an edge exactly when every one of its `W[j][k]`
/// witnesses was removed; only removed samples are tested. Pairs with
/// `W = 0` are edges without any test, pairs with `W > r` cannot be.
/// When the graph carries witness hints, a pair whose recorded witness
/// survived is rejected without counting, and a pair with `W <= 3` whose
/// recorded witnesses were all removed is accepted.
/// Vertex `a` of the result is the `a`-th surviving index in ascending
/// order; `sample_ids` maps it back to the original dataset.
pub fn recompute_after_removal(
    graph: &GabrielGraph,
    dataset: &Dataset,
    removed: &[usize],
) -> Result<GabrielGraph> {
    recompute(graph, dataset, removed, true)
}

/// [`recompute_after_removal`] without the witness hints: every pair with
/// `0 < W <= r` is settled by counting removed witnesses.
pub fn recompute_after_removal_counting(
    graph: &GabrielGraph,
    dataset: &Dataset,
    removed: &[usize],
) -> Result<GabrielGraph> {
    recompute(graph, dataset, removed, false)
}

fn recompute(
    graph: &GabrielGraph,
    dataset: &Dataset,
    removed: &[usize],
    use_hints: bool,
) -> Result<GabrielGraph> {
    let witness = graph.witness_counts().ok_or(Error::MissingWitnessCounts)?;
    let m = graph.len();
    if dataset.len() != m {
        return Err(Error::GraphDatasetMismatch {
            graph: m,
            dataset: dataset.len(),
        });
    }
    let mut is_removed = vec![false; m];
    for &index in removed {
        if index >= m {
            return Err(Error::IndexOutOfRange { index, len: m });
        }
        is_removed[index] = true;
    }
    let removed: Vec<usize> = (0..m).filter(|&i| is_removed[i]).collect();
    let survivors: Vec<usize> = (0..m).filter(|&i| !is_removed[i]).collect();
    let r = removed.len();
    let kept = survivors.len();
    if kept < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            actual: kept,
        });
    }

    let x = dataset.features();
    let x = x.as_standard_layout();
    let rows = row_slices(x.view());

    // squared distances survivor × removed, row-major by survivor
    let cross: Vec<f64> = survivors
        .par_iter()
        .flat_map_iter(|&s| {
            removed
                .iter()
                .map(|&t| squared_distance(rows[s], rows[t]))
                .collect::<Vec<_>>()
        })
        .collect();
    let cross_row = |a: usize| &cross[a * r..(a + 1) * r];
    let hints = graph.witness_hints.as_ref().filter(|_| use_hints);

    let adjacency_rows: Vec<Vec<bool>> = (0..kept - 1)
        .into_par_iter()
        .map(|a| {
            let j = survivors[a];
            let cj = cross_row(a);
            (a + 1..kept)
                .map(|b| {
                    let k = survivors[b];
                    let w = witness.get(j, k) as usize;
                    if w == 0 {
                        return true;
                    }
                    if w > r {
                        return false;
                    }
                    if let Some(hints) = hints {
                        let hint = hints.get(j, k);
                        let listed = w.min(HINTS);
                        if hint[..listed].iter().any(|&i| !is_removed[i as usize]) {
                            return false;
                        }
                        if w == listed {
                            return true;
                        }
                    }
                    let d_jk = squared_distance(rows[j], rows[k]);
                    let ck = cross_row(b);
                    let mut found = 0;
                    for t in 0..r {
                        if blocks(d_jk, cj[t], ck[t]) {
                            found += 1;
                            if found == w {
                                return true;
                            }
                        }
                        if w - found > r - t - 1 {
                            return false;
                        }
                    }
                    false
                })
                .collect()
        })
        .collect();

    let sample_ids = survivors.iter().map(|&i| graph.sample_ids[i]).collect();
    Ok(GabrielGraph::from_adjacency(
        UpperTriangular::from_rows(kept, adjacency_rows),
        None,
        sample_ids,
    ))
}
