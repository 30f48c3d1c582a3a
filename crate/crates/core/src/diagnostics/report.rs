use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// One swept parameter. `labels` replaces the numeric values in CSV output
/// for categorical axes (model variants, property names).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Axis {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            values,
            labels: None,
        }
    }

    pub fn categorical(name: impl Into<String>, labels: Vec<String>) -> Self {
        Self {
            name: name.into(),
            unit: String::new(),
            values: (0..labels.len()).map(|i| i as f64).collect(),
            labels: Some(labels),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Per-point results over a 1D or 2D grid, row-major with the first axis
/// slowest.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub model: String,
    pub axes: Vec<Axis>,
    pub columns: Vec<Column>,
    pub summary: BTreeMap<String, f64>,
    pub metadata: BTreeMap<String, Value>,
}

impl SweepReport {
    pub fn new(model: impl Into<String>, axes: Vec<Axis>) -> Self {
        Self {
            model: model.into(),
            axes,
            ..Self::default()
        }
    }

    pub fn grid_size(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Grid coordinates of a flat row index.
    pub fn coords(&self, mut row: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            *slot = row % axis.len();
            row /= axis.len();
        }
        out
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.columns.push(Column {
            name: name.into(),
            values,
        });
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.insert(key.to_string(), value.into());
    }

    /// Column lengths match the grid; NaN only in rows flagged by a nonzero
    /// `degenerate` column.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid_size();
        let flags = self.column("degenerate");
        for c in &self.columns {
            if c.values.len() != n {
                return Err(Error::Dimension(format!(
                    "column `{}` has {} rows, grid has {n}",
                    c.name,
                    c.values.len()
                )));
            }
            for (row, v) in c.values.iter().enumerate() {
                if v.is_nan() && flags.is_none_or(|f| f[row] == 0.0) {
                    return Err(Error::Accuracy(format!(
                        "NaN in column `{}` row {row} without a degenerate flag",
                        c.name
                    )));
                }
            }
        }
        for a in &self.axes {
            if let Some(l) = &a.labels {
                if l.len() != a.values.len() {
                    return Err(Error::Dimension(format!("axis `{}` labels mismatch", a.name)));
                }
            }
        }
        Ok(())
    }

    pub fn header(&self) -> Vec<String> {
        self.axes
            .iter()
            .map(|a| a.name.clone())
            .chain(self.columns.iter().map(|c| c.name.clone()))
            .collect()
    }

    pub fn to_table(&self) -> CsvTable {
        let mut table = CsvTable::new(self.header());
        for row in 0..self.grid_size() {
            let mut cells = Vec::with_capacity(self.axes.len() + self.columns.len());
            for (axis, &i) in self.axes.iter().zip(&self.coords(row)) {
                cells.push(match &axis.labels {
                    Some(l) => Cell::Text(l[i].clone()),
                    None => Cell::Num(axis.values[i]),
                });
            }
            cells.extend(self.columns.iter().map(|c| Cell::Num(c.values[row])));
            table.rows.push(cells);
        }
        table
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.validate()?;
        self.to_table().write(path)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Decomposition(e.to_string()))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let text = self.to_json()?;
        let mut f = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        f.write_all(text.as_bytes())
            .and_then(|_| f.write_all(b"\n"))
            .and_then(|_| f.flush())
            .map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Header plus rows; floats are written in shortest round-trip form.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let err = |e: csv::Error| Error::Decomposition(format!("CSV encoding failed: {e}"));
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            if row.len() != self.header.len() {
                return Err(Error::Dimension(format!(
                    "CSV row has {} cells, header has {}",
                    row.len(),
                    self.header.len()
                )));
            }
            w.serialize(row).map_err(err)?;
        }
        w.into_inner()
            .map_err(|e| Error::Decomposition(format!("CSV flush failed: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepReport {
        let mut r = SweepReport::new(
            "toy",
            vec![
                Axis::new("a", "1/omega", vec![0.0, 0.5]),
                Axis::new("b", "1/omega", vec![1.0, 2.0, 3.0]),
            ],
        );
        r.push_column("v_max_tot", vec![1.0, 2.5, 1e-24, 3.0e10, 0.1, 1.0 / 3.0]);
        r.set_meta("rcond", 1e-24);
        r
    }

    #[test]
    fn coords_are_row_major() {
        let r = sample();
        assert_eq!(r.coords(0), vec![0, 0]);
        assert_eq!(r.coords(2), vec![0, 2]);
        assert_eq!(r.coords(4), vec![1, 1]);
    }

    #[test]
    fn csv_round_trips_floats() {
        let r = sample();
        let bytes = r.to_table().to_bytes().unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "a,b,v_max_tot");
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let vals: Vec<f64> = rdr
            .records()
            .map(|rec| rec.unwrap()[2].parse::<f64>().unwrap())
            .collect();
        assert_eq!(vals, r.column("v_max_tot").unwrap());
        assert!(!text.contains('\r'));
    }

    #[test]
    fn validation() {
        let mut r = sample();
        assert!(r.validate().is_ok());
        r.push_column("short", vec![1.0]);
        assert!(r.validate().is_err());

        let mut r = sample();
        r.push_column("soft_com", vec![1.0, f64::NAN, 1.0, 1.0, 1.0, 1.0]);
        assert!(r.validate().is_err());
        r.push_column("degenerate", vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(r.validate().is_ok());
    }

    #[test]
    fn json_has_nested_metadata() {
        let r = sample();
        let v: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["metadata"]["rcond"], 1e-24);
        assert_eq!(v["columns"][0]["name"], "v_max_tot");
        let back: SweepReport = serde_json::from_value(v).unwrap();
        assert_eq!(back.columns, r.columns);
    }

    #[test]
    fn categorical_axis_writes_labels() {
        let mut r = SweepReport::new("t", vec![Axis::categorical("case", vec!["x".into(), "y".into()])]);
        r.push_column("v", vec![1.0, 2.0]);
        let text = String::from_utf8(r.to_table().to_bytes().unwrap()).unwrap();
        assert_eq!(text, "case,v\nx,1.0\ny,2.0\n");
    }
}
