//! CSV, JSON and SVG emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// `nbins` equal bins over `[lo, hi]`; the last bin is closed so that `hi`
/// itself lands in it.
pub fn histogram(values: &[f64], lo: f64, hi: f64, nbins: usize) -> Vec<Bin> {
    let width = (hi - lo) / nbins as f64;
    let mut bins: Vec<Bin> = (0..nbins)
        .map(|i| Bin {
            lo: lo + i as f64 * width,
            hi: lo + (i + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for &v in values {
        if v < lo || v > hi || v.is_nan() {
            continue;
        }
        let i = (((v - lo) / width) as usize).min(nbins - 1);
        bins[i].count += 1;
    }
    bins
}

/// One bin per integer value between the smallest and largest observation.
pub fn integer_histogram(values: &[usize]) -> Vec<Bin> {
    let (Some(&lo), Some(&hi)) = (values.iter().min(), values.iter().max()) else {
        return Vec::new();
    };
    let mut bins: Vec<Bin> = (lo..=hi)
        .map(|v| Bin {
            lo: v as f64,
            hi: v as f64 + 1.0,
            count: 0,
        })
        .collect();
    for &v in values {
        bins[v - lo].count += 1;
    }
    bins
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;

fn frame(title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>"#,
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axis_labels(s: &mut String, xlo: f64, xhi: f64, ylo: f64, yhi: f64) {
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" text-anchor="middle">{}</text>"#, H - PAD + 16.0, fmt(xlo));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W - PAD, H - PAD + 16.0, fmt(xhi));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, H - PAD, fmt(ylo));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, PAD + 4.0, fmt(yhi));
}

fn fmt(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

pub fn histogram_svg(bins: &[Bin], title: &str, xlabel: &str) -> String {
    let mut s = frame(title, xlabel, "count");
    if let (Some(first), Some(last)) = (bins.first(), bins.last()) {
        let (xlo, xhi) = (first.lo, last.hi);
        let ymax = bins.iter().map(|b| b.count).max().unwrap_or(0).max(1) as f64;
        let sx = (W - 2.0 * PAD) / (xhi - xlo);
        let sy = (H - 2.0 * PAD) / ymax;
        for b in bins {
            let h = b.count as f64 * sy;
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#4a78b5" stroke="white" stroke-width="0.5"/>"##,
                PAD + (b.lo - xlo) * sx,
                H - PAD - h,
                (b.hi - b.lo) * sx,
                h
            );
        }
        axis_labels(&mut s, xlo, xhi, 0.0, ymax);
    }
    s.push_str("</svg>\n");
    s
}

/// Points with an optional horizontal reference line (a bound).
pub fn scatter_svg(points: &[(f64, f64)], line: Option<(f64, &str)>, title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = frame(title, xlabel, ylabel);
    if !points.is_empty() {
        let xlo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let xhi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).max(xlo + 1.0);
        let ymax = points
            .iter()
            .map(|p| p.1)
            .chain(line.map(|l| l.0))
            .fold(0.0, f64::max)
            .max(1.0)
            * 1.05;
        let sx = (W - 2.0 * PAD) / (xhi - xlo);
        let sy = (H - 2.0 * PAD) / ymax;
        for &(x, y) in points {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#4a78b5"/>"##,
                PAD + (x - xlo) * sx,
                H - PAD - y * sy
            );
        }
        if let Some((y, label)) = line {
            let yy = H - PAD - y * sy;
            let _ = writeln!(
                s,
                r##"<line x1="{PAD}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="#c0392b" stroke-dasharray="6 4"/>"##,
                W - PAD
            );
            let _ = writeln!(
                s,
                r##"<text x="{}" y="{:.2}" text-anchor="end" fill="#c0392b">{}</text>"##,
                W - PAD,
                yy - 4.0,
                escape(label)
            );
        }
        axis_labels(&mut s, xlo, xhi, 0.0, ymax);
    }
    s.push_str("</svg>\n");
    s
}
