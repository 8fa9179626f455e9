//! Artifact writing: atomic files, CSV tables and small SVG line plots.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub struct Artifacts {
    pub dir: PathBuf,
    /// Hash of the effective config, stamped into SVG comments.
    pub stamp: String,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: PathBuf, effective_config: &str) -> Self {
        let digest = Sha256::digest(effective_config.as_bytes());
        let stamp = digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Artifacts {
            dir,
            stamp,
            written: Vec::new(),
        }
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        self.write(name, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let bad = |e: csv::Error| CliError::Internal(format!("csv {name}: {e}"));
        w.write_record(header).map_err(bad)?;
        for r in rows {
            w.write_record(r).map_err(bad)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Internal(format!("csv {name}: {e}")))?;
        self.write(name, &bytes)
    }

    pub fn plot(&mut self, name: &str, plot: &LinePlot) -> Result<PathBuf, CliError> {
        let svg = plot.render(&self.stamp);
        self.write(name, svg.as_bytes())
    }
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl LinePlot {
    pub fn render(&self, stamp: &str) -> String {
        let (w, h, pad) = (480.0, 320.0, 48.0);
        let xs = self.points.iter().map(|p| p.0);
        let ys = self.points.iter().map(|p| p.1);
        let (x0, x1) = (xs.clone().fold(f64::MAX, f64::min), xs.fold(f64::MIN, f64::max));
        let (y0, y1) = (ys.clone().fold(f64::MAX, f64::min).min(0.0), ys.fold(f64::MIN, f64::max));
        let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
        let px = |x: f64| pad + (x - x0) / span(x0, x1) * (w - 2.0 * pad);
        let py = |y: f64| h - pad - (y - y0) / span(y0, y1) * (h - 2.0 * pad);
        let mut s = String::new();
        let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">");
        let _ = writeln!(s, "<!-- config {stamp} -->");
        let _ = writeln!(s, "<text x=\"{pad}\" y=\"24\" font-size=\"14\">{}</text>", self.title);
        let _ = writeln!(
            s,
            "<line x1=\"{pad}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#000\"/><line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{b}\" stroke=\"#000\"/>",
            b = h - pad,
            r = w - pad
        );
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>", w / 2.0, h - 12.0, self.x_label);
        let _ = writeln!(s, "<text x=\"8\" y=\"{}\" font-size=\"11\">{}</text>", h / 2.0, self.y_label);
        if !self.points.is_empty() {
            let pts: Vec<String> = self.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f5fa8\"/>", pts.join(" "));
            for &(x, y) in &self.points {
                let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#1f5fa8\"/>", px(x), py(y));
            }
            let _ = writeln!(s, "<text x=\"{pad}\" y=\"{}\" font-size=\"10\">{y1}</text>", pad - 4.0);
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }

    #[test]
    fn empty_csv_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new(dir.path().to_path_buf(), "x=1\n");
        let p = a.csv("e.csv", &["r", "size"], &[]).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "r,size\n");
    }

    #[test]
    fn plots_carry_the_stamp() {
        let plot = LinePlot {
            title: "t".into(),
            x_label: "d".into(),
            y_label: "k".into(),
            points: vec![(2.0, 3.0), (4.0, 3.0), (8.0, 2.0), (16.0, 1.0)],
        };
        let s = plot.render("abc");
        assert!(s.contains("<!-- config abc -->"));
        assert_eq!(s.matches("<circle").count(), 4);
    }
}
