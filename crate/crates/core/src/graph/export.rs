use std::io::Write;

use super::GabrielGraph;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

fn check_aligned(graph: &GabrielGraph, dataset: &Dataset) -> Result<()> {
    if graph.len() != dataset.len() {
        return Err(Error::GraphDatasetMismatch {
            graph: graph.len(),
            dataset: dataset.len(),
        });
    }
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Writes the graph in Graphviz DOT. Node ids are original sample
/// indices; edges carry `support=true` when they join different classes.
pub fn write_dot<W: Write>(graph: &GabrielGraph, dataset: &Dataset, mut out: W) -> Result<()> {
    check_aligned(graph, dataset)?;
    let ids = graph.sample_ids();
    writeln!(out, "graph gabriel {{")?;
    for i in 0..graph.len() {
        let class = &dataset.class_names()[dataset.label(i)];
        writeln!(out, "  {} [class=\"{}\"];", ids[i], escape(class))?;
    }
    for (j, k) in graph.edges() {
        let support = dataset.label(j) != dataset.label(k);
        writeln!(out, "  {} -- {} [support={}];", ids[j], ids[k], support)?;
    }
    writeln!(out, "}}")?;
    Ok(())
}

/// One row per edge: `i,j,support`.
pub fn write_edge_csv<W: Write>(graph: &GabrielGraph, dataset: &Dataset, out: W) -> Result<()> {
    check_aligned(graph, dataset)?;
    let ids = graph.sample_ids();
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["i", "j", "support"])?;
    for (j, k) in graph.edges() {
        let support = dataset.label(j) != dataset.label(k);
        writer.serialize((ids[j], ids[k], support))?;
    }
    writer.flush()?;
    Ok(())
}

/// One row per vertex pair: `i,j,witnesses`.
pub fn write_witness_csv<W: Write>(graph: &GabrielGraph, out: W) -> Result<()> {
    let witness = graph.witness_counts().ok_or(Error::MissingWitnessCounts)?;
    let ids = graph.sample_ids();
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["i", "j", "witnesses"])?;
    for j in 0..graph.len() {
        for k in j + 1..graph.len() {
            writer.serialize((ids[j], ids[k], witness.get(j, k)))?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, build_graph_with_witness};
    use ndarray::array;

    #[test]
    fn dot_lists_nodes_and_support_flags() {
        let d = Dataset::new(array![[0.0], [1.0], [2.0]], vec![0, 0, 1]).unwrap();
        let g = build_graph(&d).unwrap();
        let mut buf = Vec::new();
        write_dot(&g, &d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("0 -- 1 [support=false];"));
        assert!(text.contains("1 -- 2 [support=true];"));
        assert_eq!(text.matches("[class=").count(), 3);
    }

    #[test]
    fn witness_csv_has_every_pair() {
        let d = Dataset::new(array![[0.0], [1.0], [2.0]], vec![0, 0, 1]).unwrap();
        let g = build_graph_with_witness(&d).unwrap();
        let mut buf = Vec::new();
        write_witness_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "i,j,witnesses\n0,1,0\n0,2,1\n1,2,0\n");
    }
}
