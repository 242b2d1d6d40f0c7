use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::{
    build_graph, build_graph_with_witness, recompute_after_removal,
    recompute_after_removal_counting,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchMethod {
    Fresh,
    Incremental,
    /// Incremental recomputation without witness hints.
    Counting,
}

/// One timed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSample {
    pub dataset: String,
    pub m: usize,
    pub fraction: f64,
    pub rep: usize,
    pub method: BenchMethod,
    pub seconds: f64,
}

/// Timing summary for one removal fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub dataset: String,
    pub m: usize,
    pub fraction: f64,
    pub removed: usize,
    pub repetitions: usize,
    pub fresh_mean: f64,
    pub fresh_std: f64,
    pub incremental_mean: f64,
    pub incremental_std: f64,
    pub counting_mean: f64,
    pub counting_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Times a fresh build on the survivors against recomputation from the
/// full witness matrix, for random removal sets of each size. The
/// witness build is done once and not timed. Every repetition checks the
/// two graphs agree before its timings are kept.
pub fn bench_recompute(
    name: &str,
    dataset: &Dataset,
    fractions: &[f64],
    repetitions: usize,
    seed: u64,
) -> Result<(Vec<BenchmarkRecord>, Vec<BenchSample>)> {
    if repetitions < 3 {
        return Err(Error::Config(format!(
            "need at least 3 repetitions, got {repetitions}"
        )));
    }
    let m = dataset.len();
    if let Some(&bad) = fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(Error::Config(format!(
            "removal fraction {bad} outside (0, 1)"
        )));
    }
    let witness = build_graph_with_witness(dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut samples = Vec::new();
    for &fraction in fractions {
        let r = (fraction * m as f64).round() as usize;
        if m - r < 2 {
            return Err(Error::TooFewSamples {
                required: 2,
                actual: m - r,
            });
        }
        let (mut fresh, mut incremental, mut counting) = (Vec::new(), Vec::new(), Vec::new());
        for rep in 0..repetitions {
            let mut removed = rand::seq::index::sample(&mut rng, m, r).into_vec();
            removed.sort_unstable();
            let survivors: Vec<usize> = {
                let mut gone = vec![false; m];
                removed.iter().for_each(|&i| gone[i] = true);
                (0..m).filter(|&i| !gone[i]).collect()
            };
            let subset = dataset.subset(&survivors);

            let start = Instant::now();
            let fresh_graph = build_graph(&subset)?;
            let t_fresh = start.elapsed().as_secs_f64();

            let start = Instant::now();
            let inc_graph = recompute_after_removal(&witness, dataset, &removed)?;
            let t_inc = start.elapsed().as_secs_f64();

            let start = Instant::now();
            let counted_graph = recompute_after_removal_counting(&witness, dataset, &removed)?;
            let t_count = start.elapsed().as_secs_f64();

            if !fresh_graph.same_adjacency(&inc_graph)
                || !fresh_graph.same_adjacency(&counted_graph)
            {
                return Err(Error::BenchmarkMismatch(format!(
                    "fraction {fraction}, repetition {rep}"
                )));
            }
            fresh.push(t_fresh);
            incremental.push(t_inc);
            counting.push(t_count);
            for (method, seconds) in [
                (BenchMethod::Fresh, t_fresh),
                (BenchMethod::Incremental, t_inc),
                (BenchMethod::Counting, t_count),
            ] {
                samples.push(BenchSample {
                    dataset: name.to_owned(),
                    m,
                    fraction,
                    rep,
                    method,
                    seconds,
                });
            }
        }
        let (fresh_mean, fresh_std) = mean_std(&fresh);
        let (incremental_mean, incremental_std) = mean_std(&incremental);
        let (counting_mean, counting_std) = mean_std(&counting);
        records.push(BenchmarkRecord {
            dataset: name.to_owned(),
            m,
            fraction,
            removed: r,
            repetitions,
            fresh_mean,
            fresh_std,
            incremental_mean,
            incremental_std,
            counting_mean,
            counting_std,
        });
    }
    Ok((records, samples))
}

/// CSV columns: `dataset,m,fraction,rep,method,seconds`.
pub fn write_bench_csv<W: Write>(samples: &[BenchSample], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for s in samples {
        writer.serialize(s)?;
    }
    writer.flush()?;
    Ok(())
}
