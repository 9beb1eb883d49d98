use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use marl_core::probe::BiasReport;

use crate::error::{HarnessError, Result};

pub const BIAS_HEADER: &str = "eval_step,agent,mean_estimated,mean_true,bias,ci95,n";

/// `git describe` of the source tree this binary was built from.
pub fn build_id() -> &'static str {
    env!("MARL_BUILD_ID")
}

/// Header lines carried by every output file.
pub fn header(config_hash: &str) -> Vec<String> {
    vec![format!("build: {}", build_id()), format!("config: {config_hash}")]
}

pub fn comment_block(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(HarnessError::io(parent))?;
    }
    std::fs::write(path, contents).map_err(HarnessError::io(path))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(HarnessError::io(path))
}

pub fn bias_csv(reports: &[BiasReport], comments: &[String]) -> String {
    let mut s = comment_block(comments);
    writeln!(s, "{BIAS_HEADER}").unwrap();
    for r in reports {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.eval_step,
            r.agent,
            r.mean_estimated,
            r.mean_true,
            r.bias,
            r.ci95.map(|c| c.to_string()).unwrap_or_default(),
            r.n
        )
        .unwrap();
    }
    s
}

/// Data rows of a CSV with the expected header, skipping `#` comments.
pub fn csv_rows(text: &str, header: &str, path: &Path) -> Result<Vec<Vec<String>>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    match lines.next() {
        Some(h) if h == header => {}
        other => {
            return Err(HarnessError::Parse {
                what: "csv header",
                path: path.to_path_buf(),
                reason: format!("expected '{header}', found {other:?}"),
            })
        }
    }
    let width = header.split(',').count();
    lines
        .enumerate()
        .map(|(k, l)| {
            let cells: Vec<String> = l.split(',').map(str::to_string).collect();
            if cells.len() != width {
                return Err(HarnessError::Parse {
                    what: "csv row",
                    path: path.to_path_buf(),
                    reason: format!("row {} has {} cells, expected {width}", k + 1, cells.len()),
                });
            }
            Ok(cells)
        })
        .collect()
}

pub fn parse_cell<T: std::str::FromStr>(cell: &str, path: &Path) -> Result<T> {
    cell.parse().map_err(|_| HarnessError::Parse {
        what: "csv cell",
        path: path.to_path_buf(),
        reason: format!("cannot parse '{cell}'"),
    })
}

pub fn parse_bias_csv(path: &Path) -> Result<Vec<BiasReport>> {
    let text = read_file(path)?;
    csv_rows(&text, BIAS_HEADER, path)?
        .iter()
        .map(|c| {
            let mean_estimated = parse_cell(&c[2], path)?;
            let mean_true = parse_cell(&c[3], path)?;
            Ok(BiasReport {
                eval_step: parse_cell(&c[0], path)?,
                agent: parse_cell(&c[1], path)?,
                mean_estimated,
                mean_true,
                bias: parse_cell(&c[4], path)?,
                ci95: if c[5].is_empty() { None } else { Some(parse_cell(&c[5], path)?) },
                n: parse_cell(&c[6], path)?,
                true_std_error: f64::NAN,
            })
        })
        .collect()
}

/// `relative` under `root` unless it is absolute or no root is given.
pub fn resolve(relative: &Path, root: Option<&Path>) -> PathBuf {
    match root {
        Some(r) if relative.is_relative() => r.join(relative),
        _ => relative.to_path_buf(),
    }
}

pub fn seed_dir(output: &Path, seed: u64) -> PathBuf {
    output.join(format!("seed_{seed}"))
}
