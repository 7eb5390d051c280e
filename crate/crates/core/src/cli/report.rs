//! Table emission: one row per statistic, one column per method.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::experiment::ResultBundle;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            _ => Err(Error::InvalidArgument(format!(
                "unknown table format {s:?} (expected csv or markdown)"
            ))),
        }
    }
}

/// Statistic labels (rows), method labels (columns) and the cell values;
/// `None` marks an infinite value or a failed run.
pub struct Table {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn from_bundle(bundle: &ResultBundle) -> Result<Self> {
        if bundle.runs.is_empty() {
            return Err(Error::InvalidArgument("result bundle has no runs".into()));
        }
        let rows: Vec<String> = std::iter::once("Worst".to_string())
            .chain(bundle.worst_k.iter().map(|k| format!("Worst {k}")))
            .chain(std::iter::once("Mean".to_string()))
            .collect();
        let columns = bundle.runs.iter().map(|r| r.method.label()).collect();
        let cells = rows
            .iter()
            .map(|label| {
                bundle
                    .runs
                    .iter()
                    .map(|run| run.summary.iter().find(|s| &s.label == label).and_then(|s| s.value))
                    .collect()
            })
            .collect();
        Ok(Self { rows, columns, cells })
    }
}

fn csv_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:?}"),
        None => "inf".into(),
    }
}

/// Renders the bundle as CSV (`,` separator, shortest round-trip floats) or
/// as a markdown table with the per-row minimum in bold.
pub fn emit_table(bundle: &ResultBundle, format: TableFormat) -> Result<String> {
    let table = Table::from_bundle(bundle)?;
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            let _ = writeln!(out, "statistic,{}", table.columns.join(","));
            for (label, cells) in table.rows.iter().zip(&table.cells) {
                let values: Vec<String> = cells.iter().map(|&v| csv_cell(v)).collect();
                let _ = writeln!(out, "{label},{}", values.join(","));
            }
        }
        TableFormat::Markdown => {
            let _ = writeln!(out, "| | {} |", table.columns.join(" | "));
            let _ = writeln!(out, "|---|{}", "---:|".repeat(table.columns.len()));
            for (label, cells) in table.rows.iter().zip(&table.cells) {
                let best = cells.iter().flatten().copied().fold(f64::INFINITY, f64::min);
                let values: Vec<String> = cells
                    .iter()
                    .map(|v| match v {
                        Some(x) if *x == best => format!("**{x:.3}**"),
                        Some(x) => format!("{x:.3}"),
                        None => "inf".into(),
                    })
                    .collect();
                let _ = writeln!(out, "| {label} | {} |", values.join(" | "));
            }
        }
    }
    Ok(out)
}

pub fn write_table(bundle: &ResultBundle, format: TableFormat, path: &Path) -> Result<()> {
    std::fs::write(path, emit_table(bundle, format)?)?;
    Ok(())
}

/// Parses CSV produced by [`emit_table`] back into a [`Table`].
pub fn parse_csv_table(text: &str) -> Result<Table> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::Parse {
            line: 1,
            message: "empty table".into(),
        });
    };
    let columns: Vec<String> = header.split(',').skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() + 1 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {} fields, found {}", columns.len() + 1, fields.len()),
            });
        }
        rows.push(fields[0].to_string());
        cells.push(
            fields[1..]
                .iter()
                .map(|f| match *f {
                    "inf" => Ok(None),
                    _ => f.parse::<f64>().map(Some).map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("{f:?}: {e}"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(Table { rows, columns, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::experiment::{Method, RunResult, SummaryRow};
    use crate::convexsolve::SolverOptions;

    fn run(method: Method, values: [f64; 3]) -> RunResult {
        let labels = ["Worst", "Worst 2", "Mean"];
        RunResult {
            method,
            error: None,
            status: None,
            cost: Some(values[0]),
            iterations: 0,
            kkt_residual: None,
            irreducible: true,
            restart: 0,
            stationary: vec![],
            transition: vec![],
            hitting_times: vec![],
            summary: labels
                .iter()
                .zip(values)
                .map(|(l, v)| SummaryRow {
                    label: l.to_string(),
                    value: Some(v),
                })
                .collect(),
            dual: None,
        }
    }

    fn bundle() -> ResultBundle {
        ResultBundle {
            graph_hash: String::new(),
            node_count: 4,
            edge_count: 0,
            graph: String::new(),
            pi: vec![],
            q0: vec![],
            solver: SolverOptions::default(),
            seed: 0,
            restarts: 1,
            worst_k: vec![2],
            runs: vec![
                run(Method::Ddroc { c: 1, d: 3.0 }, [10.0, 9.5, 6.25]),
                run(Method::Ddroc { c: 2, d: 1.0 }, [10.5, 9.0, 6.0]),
                run(Method::Soc, [11.0, 9.75, 1.0 / 3.0]),
            ],
        }
    }

    #[test]
    fn csv_round_trips() {
        let text = emit_table(&bundle(), TableFormat::Csv).unwrap();
        assert!(text.starts_with("statistic,c = 1,c = 2,SOC\nWorst,10.0,10.5,11.0\n"), "{text}");
        let table = parse_csv_table(&text).unwrap();
        let original = Table::from_bundle(&bundle()).unwrap();
        assert_eq!(table.rows, original.rows);
        assert_eq!(table.columns, original.columns);
        assert_eq!(table.cells, original.cells);
    }

    #[test]
    fn markdown_bolds_row_minima() {
        let text = emit_table(&bundle(), TableFormat::Markdown).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "| | c = 1 | c = 2 | SOC |");
        assert_eq!(lines[2], "| Worst | **10.000** | 10.500 | 11.000 |");
        assert_eq!(lines[3], "| Worst 2 | 9.500 | **9.000** | 9.750 |");
        assert_eq!(lines[4], "| Mean | 6.250 | 6.000 | **0.333** |");
    }

    #[test]
    fn empty_bundle_rejected() {
        let mut b = bundle();
        b.runs.clear();
        assert!(emit_table(&b, TableFormat::Csv).is_err());
    }
}
