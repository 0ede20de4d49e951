//! CSV point clouds: header row, one row per point, optional trailing
//! `label` column (1 = signal, 0 = outlier).

use std::io::{Read, Write};
use std::path::Path;

use crate::cloud::{Label, PointCloud};
use crate::error::{Error, Result};

/// Shortest decimal that reads back to the same bits (at most 17
/// significant digits).
fn fmt_coord(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_cloud<W: Write>(out: W, cloud: &PointCloud, labels: Option<&[Label]>) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != cloud.len() {
            return Err(Error::DimensionMismatch {
                expected: cloud.len(),
                found: l.len(),
            });
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..cloud.dim()).map(|k| format!("x{k}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (i, p) in cloud.iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|&x| fmt_coord(x)).collect();
        if let Some(l) = labels {
            row.push(l[i].as_bit().to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cloud<R: Read>(input: R) -> Result<(PointCloud, Option<Vec<Label>>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let has_label = header.iter().next_back().is_some_and(|h| h.trim() == "label");
    let dim = header.len() - usize::from(has_label);
    if dim == 0 {
        return Err(Error::InvalidConfig("point cloud CSV has no coordinate columns".into()));
    }
    let mut cloud = PointCloud::new(dim);
    let mut labels = has_label.then(Vec::new);
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let coords: Vec<f64> = rec
            .iter()
            .take(dim)
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidConfig(format!("row {}: bad coordinate {s:?}", row + 1))
                })
            })
            .collect::<Result<_>>()?;
        cloud.try_push(&coords)?;
        if let Some(ls) = labels.as_mut() {
            let cell = rec.get(dim).unwrap_or("").trim();
            let label = cell
                .parse::<u8>()
                .ok()
                .and_then(Label::from_bit)
                .ok_or_else(|| Error::InvalidConfig(format!("row {}: bad label {cell:?}", row + 1)))?;
            ls.push(label);
        }
    }
    Ok((cloud, labels))
}

pub fn save_cloud(path: &Path, cloud: &PointCloud, labels: Option<&[Label]>) -> Result<()> {
    write_cloud(std::fs::File::create(path)?, cloud, labels)
}

pub fn load_cloud(path: &Path) -> Result<(PointCloud, Option<Vec<Label>>)> {
    read_cloud(std::fs::File::open(path)?)
}

/// Index lists as a one-column CSV.
pub fn save_indices(path: &Path, indices: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index"])?;
    for i in indices {
        w.write_record([i.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_indices(path: &Path) -> Result<Vec<usize>> {
    let mut r = csv::Reader::from_path(path)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            let cell = rec.get(0).unwrap_or("").trim().to_string();
            cell.parse()
                .map_err(|_| Error::InvalidConfig(format!("bad index {cell:?}")))
        })
        .collect()
}
