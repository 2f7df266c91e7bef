//! CSV and SVG emission. All numbers use 12 significant digits so that
//! identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use qwave::grid::{CellMask, CorrelatorGrid};

/// Half-width of the fixed symmetric colour scale for `v0 * kappa`.
pub const COLOR_LIMIT: f64 = 0.25;
const LEVELS: i32 = 64;

pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Minimal CSV table: header plus rows, comma separated, LF endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line: Vec<&str> = fields.iter().map(AsRef::as_ref).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

pub fn grid_csv(grid: &CorrelatorGrid) -> Csv {
    let smooth = grid.kappa_a.as_ref().zip(grid.kappa_b.as_ref());
    let mut header = vec!["x1", "x2", "v0_kappa", "mask"];
    if smooth.is_some() {
        header.extend(["kappa_A", "kappa_B"]);
    }
    let mut csv = Csv::new(&header);
    let n = grid.resolution();
    for i1 in 0..n {
        for i2 in 0..n {
            let k = grid.index(i1, i2);
            let mut fields = vec![
                num(grid.x1[i1]),
                num(grid.x2[i2]),
                num(grid.values[k]),
                grid.mask[k].label().to_string(),
            ];
            if let Some((a, b)) = smooth {
                fields.push(num(a[k]));
                fields.push(num(b[k]));
            }
            csv.row(&fields);
        }
    }
    csv
}

/// Diverging blue-white-red map, clamped to `[-COLOR_LIMIT, COLOR_LIMIT]` and
/// quantized to `2 * LEVELS + 1` shades.
fn level(value: f64) -> i32 {
    let u = (value / COLOR_LIMIT).clamp(-1.0, 1.0);
    (u * f64::from(LEVELS)).round() as i32
}

fn level_color(level: i32) -> String {
    let u = f64::from(level) / f64::from(LEVELS);
    let fade = |c: f64| (255.0 * (1.0 - u.abs()) + c * u.abs()).round() as u8;
    let (r, g, b) = if u >= 0.0 {
        (fade(178.0), fade(24.0), fade(43.0))
    } else {
        (fade(33.0), fade(102.0), fade(172.0))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Paint {
    Masked,
    Level(i32),
}

/// Self-contained heatmap. Cells of equal shade are merged into one path per
/// shade, with horizontal runs, so the file stays small at high resolution.
pub fn grid_svg(grid: &CorrelatorGrid, title: &str) -> String {
    let n = grid.resolution();
    let paint = |i1: usize, i2: usize| match grid.mask_at(i1, i2) {
        CellMask::Finite => Paint::Level(level(grid.value(i1, i2))),
        CellMask::Singular(_) => Paint::Masked,
    };
    // row r is drawn at y = r and holds x2 index n - 1 - r, so x2 grows upward
    let mut paths: std::collections::BTreeMap<i32, String> = Default::default();
    let mut masked = String::new();
    for r in 0..n {
        let i2 = n - 1 - r;
        let mut i1 = 0;
        while i1 < n {
            let p = paint(i1, i2);
            let start = i1;
            while i1 < n && paint(i1, i2) == p {
                i1 += 1;
            }
            let target = match p {
                Paint::Masked => &mut masked,
                Paint::Level(l) => paths.entry(l).or_default(),
            };
            let _ = write!(target, "M{start} {r}h{}v1h-{}z", i1 - start, i1 - start);
        }
    }

    let size = 640.0;
    let scale = size / n as f64;
    let (left, top, bar) = (80.0, 40.0, 30.0);
    let width = left + size + 40.0 + bar + 70.0;
    let height = top + size + 70.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="14">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle">{}</text>"#, left + size / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<g transform="translate({left} {top}) scale({scale})" shape-rendering="crispEdges">"#
    );
    for (l, d) in &paths {
        let _ = writeln!(svg, r#"<path fill="{}" d="{d}"/>"#, level_color(*l));
    }
    if !masked.is_empty() {
        let _ = writeln!(svg, r#"<path fill="black" d="{masked}"/>"#);
    }
    svg.push_str("</g>\n");
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{size}" height="{size}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let label = format!("{f:.2}");
        let x = left + f * size;
        let y = top + size - f * size;
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{label}</text>"#,
            top + size,
            top + size + 6.0,
            top + size + 22.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{label}</text>"#,
            left - 6.0,
            left - 10.0,
            y + 5.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">x1/D</text>"#,
        left + size / 2.0,
        top + size + 50.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="24" y="{}" text-anchor="middle" transform="rotate(-90 24 {})">x2/D</text>"#,
        top + size / 2.0,
        top + size / 2.0
    );

    // colour bar
    let bx = left + size + 40.0;
    let step = size / f64::from(2 * LEVELS + 1);
    for l in -LEVELS..=LEVELS {
        let y = top + f64::from(LEVELS - l) * step;
        let _ = writeln!(
            svg,
            r#"<rect x="{bx}" y="{y:.3}" width="{bar}" height="{:.3}" fill="{}"/>"#,
            step + 0.5,
            level_color(l)
        );
    }
    for (value, y) in [(COLOR_LIMIT, top), (0.0, top + size / 2.0), (-COLOR_LIMIT, top + size)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{value:+.2}</text>"#,
            bx + bar + 6.0,
            y + 5.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">v0 kappa</text>"#,
        bx + bar / 2.0,
        top + size + 30.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_is_fixed() {
        assert_eq!(num(0.0125), "1.25000000000e-2");
        assert_eq!(num(-1.0), "-1.00000000000e0");
    }

    #[test]
    fn colors_are_symmetric_and_clamped() {
        assert_eq!(level(0.0), 0);
        assert_eq!(level(10.0), LEVELS);
        assert_eq!(level(-10.0), -LEVELS);
        assert_eq!(level_color(0), "#ffffff");
        assert_ne!(level_color(5), level_color(-5));
    }

    #[test]
    fn csv_rows_end_with_lf() {
        let mut csv = Csv::new(&["a", "b"]);
        csv.row(&["1", "2"]);
        assert_eq!(csv.as_str(), "a,b\n1,2\n");
    }
}
