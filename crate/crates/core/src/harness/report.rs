use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Shortest round-trip representation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// An in-memory CSV table written with a trailing `# config-hash=` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// One CSV cell.
pub enum Cell {
    F(f64),
    S(String),
    B(bool),
    U(usize),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v)
    }
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::F(v) => fmt_f64(v),
            Cell::S(s) => s,
            Cell::B(b) => b.to_string(),
            Cell::U(u) => u.to_string(),
        }
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row.into_iter().map(Cell::render).collect());
    }

    pub fn write<W: Write>(&self, out: W, config_hash: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let mut inner = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        writeln!(inner, "# config-hash={config_hash}")?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path, config_hash: &str) -> Result<()> {
        let f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write(std::io::BufWriter::new(f), config_hash)
    }

    /// Reads a table written by [`Table::write_file`]; the metadata line
    /// is skipped.
    pub fn read_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingArtifact(path.display().to_string()));
        }
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
        let header = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingArtifact(format!("column {name}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_hash_line() {
        let mut t = Table::new(&["name", "value", "pass"]);
        t.push(vec!["a".into(), 0.1.into(), true.into()]);
        t.push(vec!["b".into(), 1e-300.into(), false.into()]);
        let mut buf = Vec::new();
        t.write(&mut buf, "abc").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "name,value,pass\na,0.1,true\nb,1e-300,false\n# config-hash=abc\n");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        t.write_file(&path, "abc").unwrap();
        assert_eq!(Table::read_file(&path).unwrap(), t);
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 284.76723176542146, -2.5e-12] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
