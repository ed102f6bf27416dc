//! Minimal CSV emission: header row, LF endings, 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Round-trip exact rendering of a double.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl CsvWriter<BufWriter<File>> {
    pub fn create(path: &Path, header: &[&str]) -> io::Result<Self> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        Self::new(BufWriter::new(File::create(path)?), header)
    }
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &[&str]) -> io::Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            out,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, values: &[f64]) -> io::Result<()> {
        debug_assert_eq!(values.len(), self.columns);
        let mut line = String::with_capacity(values.len() * 24);
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&fmt_num(*v));
        }
        line.push('\n');
        self.out.write_all(line.as_bytes())
    }

    /// Row of preformatted fields, for tables that mix text and numbers.
    pub fn raw_row(&mut self, fields: &[String]) -> io::Result<()> {
        debug_assert_eq!(fields.len(), self.columns);
        writeln!(self.out, "{}", fields.join(","))
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567, 0.0] {
            let s = fmt_num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn writes_header_and_rows() {
        let mut w = CsvWriter::new(Vec::new(), &["t", "x"]).unwrap();
        w.row(&[0.5, -1.0]).unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        assert_eq!(
            text,
            "t,x\n5.0000000000000000e-1,-1.0000000000000000e0\n"
        );
    }
}
