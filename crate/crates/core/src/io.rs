//! File formats: counts JSON, behavior JSON, vertex and results CSV.
//!
//! Counts files use 1-based setting labels and explicit `(x, y)` blocks:
//!
//! ```json
//! {"dims": {"nx": 2, "ny": 2, "na": 3, "nb": 3},
//!  "blocks": [{"x": 1, "y": 1, "counts": [[10, 10, 10], [10, 10, 10], [10, 10, 10]],
//!              "background": [[1.5, 1.5, 1.5], [1.5, 1.5, 1.5], [1.5, 1.5, 1.5]]}, ...]}
//! ```
//!
//! Every `(x, y)` pair appears exactly once; `background` is optional per block.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::behavior::{BehaviorTable, CountsRecord, Dims};
use crate::error::{Error, Result};
use crate::pipeline::SweepRow;
use crate::polytope::LocalVertexSet;
use crate::quantum::QutritModel;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimsJson {
    nx: i64,
    ny: i64,
    na: i64,
    nb: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsBlock {
    x: i64,
    y: i64,
    counts: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    background: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsFile {
    dims: DimsJson,
    blocks: Vec<CountsBlock>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        context: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

fn schema_dims(d: &DimsJson) -> Result<Dims> {
    let conv = |name: &str, v: i64| {
        usize::try_from(v).map_err(|_| Error::Schema(format!("dims.{name} = {v} must be a positive integer")))
    };
    let dims = Dims {
        nx: conv("nx", d.nx)?,
        ny: conv("ny", d.ny)?,
        na: conv("na", d.na)?,
        nb: conv("nb", d.nb)?,
    };
    dims.validate().map_err(|e| Error::Schema(e.to_string()))?;
    Ok(dims)
}

/// Parses and validates a counts document.
pub fn parse_counts(text: &str) -> Result<CountsRecord> {
    let file: CountsFile = serde_json::from_str(text).map_err(parse_error)?;
    let dims = schema_dims(&file.dims)?;
    let mut counts = vec![0u64; dims.len()];
    let mut background = vec![0.0; dims.len()];
    let mut any_background = false;
    let mut seen = vec![false; dims.nx * dims.ny];

    for (k, block) in file.blocks.iter().enumerate() {
        let in_range = |v: i64, n: usize| v >= 1 && (v as usize) <= n;
        if !in_range(block.x, dims.nx) || !in_range(block.y, dims.ny) {
            return Err(Error::Schema(format!(
                "blocks[{k}]: setting pair (x={}, y={}) outside 1..={} x 1..={}",
                block.x, block.y, dims.nx, dims.ny
            )));
        }
        let (x, y) = (block.x as usize - 1, block.y as usize - 1);
        if std::mem::replace(&mut seen[x * dims.ny + y], true) {
            return Err(Error::Schema(format!("blocks[{k}]: duplicate block (x={}, y={})", block.x, block.y)));
        }
        check_shape(&block.counts, dims, k, "counts")?;
        for (a, row) in block.counts.iter().enumerate() {
            for (b, &n) in row.iter().enumerate() {
                if n < 0 {
                    return Err(Error::Schema(format!(
                        "negative count {n} at (x={}, y={}, a={a}, b={b})",
                        block.x, block.y
                    )));
                }
                counts[dims.index(x, y, a, b)] = n as u64;
            }
        }
        if let Some(bg) = &block.background {
            any_background = true;
            check_shape(bg, dims, k, "background")?;
            for (a, row) in bg.iter().enumerate() {
                for (b, &v) in row.iter().enumerate() {
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::Schema(format!(
                            "background {v} at (x={}, y={}, a={a}, b={b}) must be finite and >= 0",
                            block.x, block.y
                        )));
                    }
                    background[dims.index(x, y, a, b)] = v;
                }
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Schema(format!(
            "missing block (x={}, y={})",
            missing / dims.ny + 1,
            missing % dims.ny + 1
        )));
    }
    CountsRecord::new(dims, counts, any_background.then_some(background))
        .map_err(|e| Error::Schema(e.to_string()))
}

fn check_shape<T>(rows: &[Vec<T>], dims: Dims, k: usize, field: &str) -> Result<()> {
    if rows.len() != dims.na || rows.iter().any(|r| r.len() != dims.nb) {
        return Err(Error::Schema(format!(
            "blocks[{k}].{field} must be {} rows x {} columns",
            dims.na, dims.nb
        )));
    }
    Ok(())
}

pub fn load_counts(path: impl AsRef<Path>) -> Result<CountsRecord> {
    let path = path.as_ref();
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    parse_counts(&text).map_err(|e| match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    })
}

fn dims_json(d: Dims) -> DimsJson {
    DimsJson {
        nx: d.nx as i64,
        ny: d.ny as i64,
        na: d.na as i64,
        nb: d.nb as i64,
    }
}

pub fn counts_to_json(c: &CountsRecord) -> String {
    let d = c.dims();
    let blocks = d
        .settings()
        .map(|(x, y)| {
            let grid = |f: &dyn Fn(usize) -> f64| -> Vec<Vec<f64>> {
                (0..d.na).map(|a| (0..d.nb).map(|b| f(d.index(x, y, a, b))).collect()).collect()
            };
            CountsBlock {
                x: x as i64 + 1,
                y: y as i64 + 1,
                counts: (0..d.na)
                    .map(|a| (0..d.nb).map(|b| c.counts()[d.index(x, y, a, b)] as i64).collect())
                    .collect(),
                background: c.background().map(|bg| grid(&|i| bg[i])),
            }
        })
        .collect();
    let file = CountsFile { dims: dims_json(d), blocks };
    serde_json::to_string_pretty(&file).expect("counts serialize")
}

pub fn save_counts(c: &CountsRecord, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(counts_to_json(c).as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BehaviorBlock {
    x: i64,
    y: i64,
    probabilities: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BehaviorFile {
    dims: DimsJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<QutritModel>,
    blocks: Vec<BehaviorBlock>,
}

/// Behavior document in the counts layout, with `probabilities` in place of `counts`.
pub fn behavior_to_json(p: &BehaviorTable, model: Option<&QutritModel>) -> String {
    let d = p.dims();
    let blocks = d
        .settings()
        .map(|(x, y)| BehaviorBlock {
            x: x as i64 + 1,
            y: y as i64 + 1,
            probabilities: p.block(x, y).chunks(d.nb).map(<[f64]>::to_vec).collect(),
        })
        .collect();
    let file = BehaviorFile { dims: dims_json(d), model: model.copied(), blocks };
    serde_json::to_string_pretty(&file).expect("behavior serialize")
}

pub fn parse_behavior(text: &str) -> Result<BehaviorTable> {
    let file: BehaviorFile = serde_json::from_str(text).map_err(parse_error)?;
    let dims = schema_dims(&file.dims)?;
    let mut p = vec![f64::NAN; dims.len()];
    for (k, block) in file.blocks.iter().enumerate() {
        if block.x < 1 || block.y < 1 || block.x as usize > dims.nx || block.y as usize > dims.ny {
            return Err(Error::Schema(format!("blocks[{k}]: setting pair out of range")));
        }
        check_shape(&block.probabilities, dims, k, "probabilities")?;
        let (x, y) = (block.x as usize - 1, block.y as usize - 1);
        for (a, row) in block.probabilities.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                p[dims.index(x, y, a, b)] = v;
            }
        }
    }
    BehaviorTable::new(dims, p).map_err(|e| Error::Schema(e.to_string()))
}

/// One row per vertex: strategy outputs followed by the flattened table.
pub fn write_vertices_csv<W: Write>(set: &LocalVertexSet, out: W) -> Result<()> {
    let d = set.dims();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["vertex".to_string()];
    header.extend((1..=d.nx).map(|x| format!("a_x{x}")));
    header.extend((1..=d.ny).map(|y| format!("b_y{y}")));
    for (x, y) in d.settings() {
        for a in 0..d.na {
            for b in 0..d.nb {
                header.push(format!("p_x{}_y{}_a{a}_b{b}", x + 1, y + 1));
            }
        }
    }
    w.write_record(&header).map_err(csv_err)?;
    for (k, (s, v)) in set.strategies().iter().zip(set.vertices()).enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(s.alice.iter().chain(&s.bob).map(usize::to_string));
        rec.extend(v.as_slice().iter().map(|e| format!("{e}")));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            context: "csv".into(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_results_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    if rows.is_empty() {
        w.write_record(SweepRow::COLUMNS).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(SweepRow::COLUMNS.iter().copied()) {
        return Err(Error::Schema(format!("unexpected results header {headers:?}")));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}
