use std::path::Path;

use nalgebra::DMatrix;

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip decimal; scientific notation outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Row-major entries joined by `;`.
pub fn fmt_matrix(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !s.is_empty() {
                s.push(';');
            }
            s.push_str(&fmt_f64(m[(i, j)]));
        }
    }
    s
}

pub fn fmt_coords(c: &[f64]) -> String {
    c.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";")
}

/// One CSV file. `digest` and `version` columns are appended to every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        CsvTable {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn render(&self, digest: &str) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header = self.header.iter().copied().chain(["digest", "version"]);
        w.write_record(header).expect("in-memory write");
        for r in &self.rows {
            let rec = r.iter().map(String::as_str).chain([digest, VERSION]);
            w.write_record(rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn write(&self, path: &Path, digest: &str) -> Result<()> {
        std::fs::write(path, self.render(digest))?;
        Ok(())
    }
}
