use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// `index,x,y` rows. Values use the shortest round-trip representation, so
/// identical layouts give identical bytes.
pub fn write_coordinates_csv(path: &Path, coords: &[[f64; 2]]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "index,x,y").map_err(io)?;
    for (i, p) in coords.iter().enumerate() {
        writeln!(w, "{i},{},{}", p[0], p[1]).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Serialize records as CSV with a header row.
pub fn write_records_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_roundtrip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let coords = [[0.1 + 0.2, -1e-300], [std::f64::consts::PI, 7.0]];
        write_coordinates_csv(&path, &coords).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("index,x,y"));
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[0].parse::<usize>().unwrap(), i);
            assert_eq!(f[1].parse::<f64>().unwrap().to_bits(), coords[i][0].to_bits());
            assert_eq!(f[2].parse::<f64>().unwrap().to_bits(), coords[i][1].to_bits());
        }
    }
}
