//! Window export as CSV or JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use reflectpos::group_paths::{pinned_window, window_distribution};
use reflectpos::reconstruction::{window_measure, PathModel};
use reflectpos::window::CylinderWindow;

use crate::scenario::{Block, Scenario};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// JSON form of a window: probabilities in lexicographic order of the state tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFile {
    pub times: Vec<i64>,
    pub states: usize,
    pub probs: Vec<f64>,
}

impl From<&CylinderWindow> for WindowFile {
    fn from(w: &CylinderWindow) -> Self {
        Self {
            times: w.times().to_vec(),
            states: w.states(),
            probs: w.probs().to_vec(),
        }
    }
}

/// The window of a kernel-family or conv-semigroup block at `times`.
/// `pinned` selects the path pinned at the identity for conv-semigroups.
pub fn scenario_window(scenario: &Scenario, block: &str, times: &[i64], pinned: bool) -> Result<CylinderWindow, CliError> {
    let built = scenario.build()?;
    let lib = |e: reflectpos::Error| CliError::Invalid {
        field: format!("structures.{block}"),
        message: e.to_string(),
    };
    match scenario.structures.get(block) {
        Some(Block::KernelFamily(_)) => {
            let (sym, fam) = &built.families[block];
            let model = PathModel::new(sym.clone(), fam.clone()).map_err(lib)?;
            window_measure(&model, times).map_err(lib)
        }
        Some(Block::ConvSemigroup(_)) => {
            let (semi, nu, _) = &built.conv[block];
            if pinned {
                pinned_window(semi, times).map_err(lib)
            } else {
                window_distribution(semi, nu, times).map_err(lib)
            }
        }
        Some(b) => Err(CliError::Invalid {
            field: format!("structures.{block}"),
            message: format!("a {} has no path window", b.kind()),
        }),
        None => Err(CliError::Invalid {
            field: "structures".into(),
            message: format!("unknown structure `{block}`"),
        }),
    }
}

/// One column per time label plus `prob`; rows in lexicographic tuple order,
/// probabilities at 17 significant digits. No times gives a header-only file.
pub fn window_csv(w: &CylinderWindow) -> Result<String, CliError> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    };
    let mut header: Vec<String> = w.times().iter().map(|t| t.to_string()).collect();
    header.push("prob".into());
    out.write_record(&header).map_err(csv_err)?;
    if !w.times().is_empty() {
        for (tuple, p) in w.iter() {
            let mut row: Vec<String> = tuple.iter().map(|x| x.to_string()).collect();
            row.push(format!("{p:.16e}"));
            out.write_record(&row).map_err(csv_err)?;
        }
    }
    let bytes = out.into_inner().map_err(|e| CliError::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

/// Parses a CSV written by [`window_csv`].
pub fn read_window_csv(text: &str, states: usize) -> Result<WindowFile, CliError> {
    let bad = |m: String| CliError::Invalid {
        field: "csv".into(),
        message: m,
    };
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let n = header.len().saturating_sub(1);
    let times = header
        .iter()
        .take(n)
        .map(|t| t.parse::<i64>().map_err(|e| bad(format!("time label `{t}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut probs = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let p = rec.get(n).unwrap_or("").parse::<f64>().map_err(|e| bad(e.to_string()))?;
        probs.push(p);
    }
    Ok(WindowFile { times, states, probs })
}

pub fn window_json(w: &CylinderWindow) -> String {
    let mut s = serde_json::to_string_pretty(&WindowFile::from(w)).expect("windows serialize");
    s.push('\n');
    s
}

pub fn write_window(w: &CylinderWindow, format: Format, path: &Path) -> Result<(), CliError> {
    let text = match format {
        Format::Csv => window_csv(w)?,
        Format::Json => window_json(w),
    };
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
