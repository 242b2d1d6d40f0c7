use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::dataset::{find_duplicate_rows, Dataset};
use crate::error::{Error, Result};

/// Feature columns of a CSV file, with the label column (if any) set aside.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub feature_names: Vec<String>,
    pub features: Array2<f64>,
    pub labels: Option<Vec<String>>,
    /// 1-based file line of each data row.
    pub lines: Vec<usize>,
}

fn csv_error(path: &Path, line: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_owned(),
        line,
        column: column.to_owned(),
        message: message.into(),
    }
}

fn parse_cell(path: &Path, line: usize, column: &str, cell: &str) -> Result<f64> {
    if cell.is_empty() || cell == "?" {
        return Err(csv_error(path, line, column, "missing value"));
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| csv_error(path, line, column, format!("non-numeric value '{cell}'")))?;
    if !v.is_finite() {
        return Err(csv_error(
            path,
            line,
            column,
            format!("non-finite value '{cell}'"),
        ));
    }
    Ok(v)
}

/// Parses a headed CSV of numeric features. `label_column`, when given,
/// must exist and is kept as raw strings.
pub fn read_csv_table(path: &Path, label_column: Option<&str>) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let label_at = match label_column {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            csv_error(
                path,
                1,
                name,
                format!("label column not found (columns: {})", headers.join(", ")),
            )
        })?),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&j| Some(j) != label_at)
        .collect();
    if feature_cols.is_empty() {
        return Err(csv_error(path, 1, "", "no feature columns"));
    }

    let mut values = Vec::new();
    let mut labels = label_at.map(|_| Vec::new());
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for &j in &feature_cols {
            let column = &headers[j];
            values.push(parse_cell(path, line, column, record.get(j).unwrap_or(""))?);
        }
        if let (Some(j), Some(labels)) = (label_at, labels.as_mut()) {
            let cell = record.get(j).unwrap_or("");
            if cell.is_empty() {
                return Err(csv_error(path, line, &headers[j], "missing label"));
            }
            labels.push(cell.to_owned());
        }
        lines.push(line);
    }
    let features = Array2::from_shape_vec((lines.len(), feature_cols.len()), values)
        .expect("one value per feature cell");
    Ok(CsvTable {
        feature_names: feature_cols.iter().map(|&j| headers[j].clone()).collect(),
        features,
        labels,
        lines,
    })
}

/// Reads only the named numeric columns, in the order given. Other
/// columns may hold anything.
pub fn read_csv_columns(path: &Path, columns: &[String]) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let at: Vec<usize> = columns
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| csv_error(path, 1, name, "column not found"))
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (&j, name) in at.iter().zip(columns) {
            values.push(parse_cell(path, line, name, record.get(j).unwrap_or(""))?);
        }
        rows += 1;
    }
    Ok(Array2::from_shape_vec((rows, columns.len()), values).expect("one value per selected cell"))
}

/// Writes one row per query with a `p_<label>` column per class.
pub fn write_probability_csv<W: std::io::Write>(
    probs: ArrayView2<'_, f64>,
    class_labels: &[String],
    out: W,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(class_labels.iter().map(|l| format!("p_{l}")))?;
    for row in probs.outer_iter() {
        writer.write_record(row.iter().map(f64::to_string))?;
    }
    writer.flush()?;
    Ok(())
}

/// Distinct label strings in class-id order: numeric order when every
/// label parses as a number, lexicographic otherwise.
pub fn label_order(labels: &[String]) -> Vec<String> {
    let distinct: BTreeSet<&String> = labels.iter().collect();
    let mut names: Vec<String> = distinct.into_iter().cloned().collect();
    let numeric: Option<Vec<f64>> = names.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(keys) = numeric {
        let mut paired: Vec<(f64, String)> = keys.into_iter().zip(names).collect();
        paired.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        names = paired.into_iter().map(|(_, s)| s).collect();
    }
    names
}

/// Loads a labelled dataset. Rows with identical features are rejected
/// with their file line numbers.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let table = read_csv_table(path, Some(label_column))?;
    if table.features.nrows() == 0 {
        return Err(Error::TooFewSamples {
            required: 1,
            actual: 0,
        });
    }
    let duplicates = find_duplicate_rows(table.features.view());
    if !duplicates.is_empty() {
        let lines = duplicates
            .iter()
            .map(|&(a, b)| (table.lines[a], table.lines[b]))
            .collect();
        return Err(Error::DuplicateCsvRows {
            path: path.to_owned(),
            lines,
        });
    }
    let raw = table.labels.expect("label column requested");
    let names = label_order(&raw);
    let labels = raw
        .iter()
        .map(|l| names.iter().position(|n| n == l).expect("label seen"))
        .collect();
    Dataset::with_class_count(table.features, labels, names.len())?
        .with_class_names(names)?
        .with_feature_names(table.feature_names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_small_file() {
        let f = file("a,b,class\n1,2,yes\n3,4,no\n5,6,yes\n");
        let d = load_csv(f.path(), "class").unwrap();
        assert_eq!((d.len(), d.dim(), d.class_count()), (3, 2, 2));
        assert_eq!(d.class_names(), &["no", "yes"]);
        assert_eq!(d.labels(), &[1, 0, 1]);
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        assert_eq!(
            label_order(&["10".into(), "9".into(), "2".into()]),
            vec!["2", "9", "10"]
        );
    }

    #[test]
    fn missing_cell_names_line_and_column() {
        let f = file("a,b,class\n1,2,0\n3,,1\n");
        match load_csv(f.path(), "class") {
            Err(Error::Csv { line, column, .. }) => assert_eq!((line, column.as_str()), (3, "b")),
            other => panic!("unexpected {other:?}"),
        }
        let f = file("a,class\nx,0\n");
        assert!(matches!(
            load_csv(f.path(), "class"),
            Err(Error::Csv { line: 2, .. })
        ));
        assert!(matches!(
            load_csv(f.path(), "label"),
            Err(Error::Csv { .. })
        ));
    }

    #[test]
    fn duplicate_rows_report_lines() {
        let f = file("a,class\n1,0\n2,1\n1,1\n");
        match load_csv(f.path(), "class") {
            Err(Error::DuplicateCsvRows { lines, .. }) => assert_eq!(lines, vec![(2, 4)]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
