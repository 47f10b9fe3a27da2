//! CSV tables and a small SVG line-plot emitter.

use std::fmt::Write as _;

use crate::Error;

/// A rectangular table of strings with a header row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv of utf-8 fields")
    }

    pub fn from_csv(text: &str) -> Result<Self, Error> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { header, rows })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Parses a table cell as a number; `a/b` fractions are accepted.
fn number(cell: &str) -> Option<f64> {
    match cell.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => cell.trim().parse().ok(),
    }
}

impl Plot {
    /// One series per `y` column against column `x`. Cells that do not parse
    /// as numbers are skipped.
    pub fn from_table(table: &Table, title: &str, x: &str, ys: &[&str], log_y: bool) -> Result<Self, Error> {
        let xi = table.column(x).ok_or_else(|| Error::Config(format!("no column `{x}`")))?;
        let mut series = Vec::new();
        for y in ys {
            let yi = table.column(y).ok_or_else(|| Error::Config(format!("no column `{y}`")))?;
            let points = table
                .rows
                .iter()
                .filter_map(|row| Some((number(&row[xi])?, number(&row[yi])?)))
                .filter(|&(_, v)| !log_y || v > 0.0)
                .collect();
            series.push(Series {
                name: y.to_string(),
                points,
            });
        }
        Ok(Self {
            title: title.to_string(),
            x_label: x.to_string(),
            y_label: ys.join(", "),
            log_y,
            series,
        })
    }

    pub fn render(&self) -> String {
        let ty = |v: f64| if self.log_y { v.log10() } else { v };
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(ty(y));
            y1 = y1.max(ty(y));
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        if y1 == y0 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (ty(y) - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = x0 + t * (x1 - x0);
            let yv = y0 + t * (y1 - y0);
            let yv_label = if self.log_y { 10f64.powf(yv) } else { yv };
            let (px, py) = (left + t * (right - left), bottom - t * (bottom - top));
            let _ = writeln!(
                out,
                r#"<text x="{px:.1}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
                bottom + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{py:.1}" text-anchor="end" font-size="11">{}</text>"#,
                left - 6.0,
                tick(yv_label)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let log_note = if self.log_y { " (log)" } else { "" };
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {})">{}{log_note}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let colour = COLOURS[i % COLOURS.len()];
            let path: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
            if !path.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" stroke="{colour}" stroke-width="2" fill="none"/>"#,
                    path.join(" ")
                );
            }
            for &(x, y) in &s.points {
                let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{colour}"/>"#, sx(x), sy(y));
            }
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" fill="{colour}">{}</text>"#,
                right - 120.0,
                top + 14.0 * i as f64,
                escape(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["r", "size", "ratio"]);
        for r in 1..=3u32 {
            t.push(vec![r.to_string(), ((r + 1) << r).to_string(), format!("1/{}", r + 1)]);
        }
        t
    }

    #[test]
    fn csv_round_trips() {
        let t = sample();
        let text = t.to_csv();
        assert!(text.starts_with("r,size,ratio\n1,4,1/2\n"));
        assert_eq!(Table::from_csv(&text).unwrap(), t);
    }

    #[test]
    fn plots_depend_only_on_the_table() {
        let t = sample();
        let a = Plot::from_table(&t, "sizes", "r", &["size", "ratio"], true).unwrap().render();
        let again = Table::from_csv(&t.to_csv()).unwrap();
        let b = Plot::from_table(&again, "sizes", "r", &["size", "ratio"], true).unwrap().render();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.contains("<polyline"));
        assert!(Plot::from_table(&t, "x", "r", &["missing"], false).is_err());
    }

    #[test]
    fn fractions_parse() {
        assert_eq!(number("3/4"), Some(0.75));
        assert_eq!(number("12"), Some(12.0));
        assert_eq!(number("n/a"), None);
    }
}
