use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use particle_env::ScenarioRegistry;
use toml::Value;

use crate::artifacts::{comment_block, header, resolve, write_file};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::run::{run, RunSummary};

/// Dotted config path (for example `hyper.lr`) to the values it takes.
pub type Axes = BTreeMap<String, Vec<Value>>;

/// Reads axes from TOML, either as dotted keys or nested tables whose
/// leaves are arrays.
pub fn parse_axes(text: &str) -> Result<Axes> {
    let table: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut axes = Axes::new();
    flatten("", &table, &mut axes)?;
    if axes.is_empty() {
        return Err(HarnessError::Config("no grid axes given".into()));
    }
    Ok(axes)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Axes) -> Result<()> {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&path, t, out)?,
            Value::Array(values) if !values.is_empty() => {
                out.insert(path, values.clone());
            }
            _ => {
                return Err(HarnessError::Config(format!(
                    "axis '{path}' must be a nonempty array of values"
                )))
            }
        }
    }
    Ok(())
}

fn set_path(root: &mut Value, path: &str, value: Value) -> std::result::Result<(), String> {
    let parts: Vec<&str> = path.split('.').collect();
    let (leaf, parents) = parts.split_last().expect("split yields one part");
    let mut node = root;
    for p in parents {
        node = node
            .get_mut(*p)
            .filter(|v| v.is_table())
            .ok_or_else(|| format!("no section '{p}'"))?;
    }
    node.as_table_mut()
        .expect("checked table")
        .insert(leaf.to_string(), value);
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub values: BTreeMap<String, Value>,
    pub config: ExperimentConfig,
}

/// Cartesian product of the axes over `base`, last axis varying fastest
/// (axes in key order). Each point writes under `<output_dir>/grid_<k>`.
/// Every point is parsed and validated before anything runs.
pub fn expand(base: &ExperimentConfig, axes: &Axes) -> Result<Vec<GridPoint>> {
    let registry = ScenarioRegistry::with_builtins();
    let base_value = Value::try_from(base).expect("config serializes");
    let names: Vec<&String> = axes.keys().collect();
    let total: usize = axes.values().map(Vec::len).product();
    let mut points = Vec::with_capacity(total);
    for index in 0..total {
        let mut rem = index;
        let mut values = BTreeMap::new();
        for name in names.iter().rev() {
            let choices = &axes[*name];
            values.insert((*name).clone(), choices[rem % choices.len()].clone());
            rem /= choices.len();
        }
        let mut v = base_value.clone();
        for (name, value) in &values {
            set_path(&mut v, name, value.clone())
                .map_err(|e| HarnessError::Config(format!("invalid axis '{name}': {e}")))?;
        }
        let mut config: ExperimentConfig = v
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(format!("invalid grid point {index}: {e}")))?;
        config.output_dir = base.output_dir.join(format!("grid_{index:03}"));
        config
            .validate(&registry)
            .map_err(|e| HarnessError::Config(format!("grid point {index}: {e}")))?;
        points.push(GridPoint {
            index,
            values,
            config,
        });
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub rank: usize,
    pub point: GridPoint,
    pub summary: RunSummary,
}

/// Points sorted by mean final reward, best first; ties and missing values
/// keep grid order.
pub fn rank(rows: Vec<(GridPoint, RunSummary)>) -> Vec<GridRow> {
    let mut rows = rows;
    rows.sort_by(|a, b| {
        let key = |s: &RunSummary| if s.final_mean.is_nan() { f64::NEG_INFINITY } else { s.final_mean };
        key(&b.1)
            .partial_cmp(&key(&a.1))
            .expect("no NaN keys")
            .then(a.0.index.cmp(&b.0.index))
    });
    rows.into_iter()
        .enumerate()
        .map(|(k, (point, summary))| GridRow {
            rank: k + 1,
            point,
            summary,
        })
        .collect()
}

pub fn grid_table(rows: &[GridRow], base: &ExperimentConfig) -> String {
    let names: Vec<String> = rows
        .first()
        .map(|r| r.point.values.keys().cloned().collect())
        .unwrap_or_default();
    let mut s = comment_block(&header(&base.hash()));
    writeln!(s, "rank,index,{},final_mean,final_ci95,failed_seeds,config_hash", names.join(",")).unwrap();
    for r in rows {
        let vals: Vec<String> = r.point.values.values().map(|v| v.to_string()).collect();
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.rank,
            r.point.index,
            vals.join(","),
            r.summary.final_mean,
            r.summary.final_ci95.map(|c| c.to_string()).unwrap_or_default(),
            r.summary.failures.len(),
            r.summary.config_hash
        )
        .unwrap();
    }
    s
}

/// Runs every grid point and writes the ranked table to
/// `<output_dir>/grid.csv`.
pub fn grid_search(base: &ExperimentConfig, axes: &Axes, root: Option<&Path>) -> Result<Vec<GridRow>> {
    let points = expand(base, axes)?;
    let mut done = Vec::with_capacity(points.len());
    for p in points {
        log::info!("grid point {}: {:?}", p.index, p.values);
        let summary = run(&p.config, root)?;
        done.push((p, summary));
    }
    let rows = rank(done);
    write_file(&resolve(&base.output_dir, root).join("grid.csv"), grid_table(&rows, base))?;
    Ok(rows)
}
