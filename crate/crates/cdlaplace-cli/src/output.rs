use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes a header and rows; floats use the shortest round-trip form so the
/// bytes depend only on the values.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Finite values only; JSON has no NaN or infinity.
pub fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const M: f64 = 56.0;

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn frame(s: &mut String, title: &str, x: (f64, f64), y: (f64, f64), xlabel: &str, ylabel: &str) {
    let _ = write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <rect x=\"{M}\" y=\"{M}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        W / 2.0,
        escape(title),
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(s, "<text x=\"{M}\" y=\"{:.1}\">{:.4e}</text>", H - M + 16.0, x.0);
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.4e}</text>", W - M, H - M + 16.0, x.1);
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.4e}</text>", M - 4.0, H - M, y.0);
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.4e}</text>", M - 4.0, M + 10.0, y.1);
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{}</text>",
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

/// Line plot of `ys` against `xs`.
pub fn line_svg(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64]) -> String {
    let xr = range(xs.iter().copied());
    let yr = range(ys.iter().copied());
    let mut s = String::new();
    frame(&mut s, title, xr, yr, xlabel, ylabel);
    let sx = |x: f64| M + (x - xr.0) / (xr.1 - xr.0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - yr.0) / (yr.1 - yr.0) * (H - 2.0 * M);
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"{}\"/>", pts.join(" "));
    s.push_str("</svg>\n");
    s
}

/// Heatmap of `values[i * ny + j]` at `(xs[i], ys[j])`.
pub fn heatmap_svg(title: &str, xs: &[f64], ys: &[f64], values: &[f64]) -> String {
    let (nx, ny) = (xs.len(), ys.len());
    let xr = range(xs.iter().copied());
    let yr = range(ys.iter().copied());
    let vr = range(values.iter().copied());
    let mut s = String::new();
    frame(&mut s, title, xr, yr, "t_1", "t_2");
    let cw = (W - 2.0 * M) / nx as f64;
    let ch = (H - 2.0 * M) / ny as f64;
    for i in 0..nx {
        for j in 0..ny {
            let v = values[i * ny + j];
            let u = if v.is_finite() { (v - vr.0) / (vr.1 - vr.0) } else { 0.0 };
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                M + i as f64 * cw,
                H - M - (j + 1) as f64 * ch,
                cw + 0.2,
                ch + 0.2,
                color(u)
            );
        }
    }
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">range [{:.4e}, {:.4e}]</text>", W - M, M - 6.0, vr.0, vr.1);
    s.push_str("</svg>\n");
    s
}

/// Blue to yellow through teal.
fn color(u: f64) -> String {
    let stops = [(68.0, 1.0, 84.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let u = u.clamp(0.0, 1.0) * 2.0;
    let k = (u.floor() as usize).min(1);
    let f = u - k as f64;
    let (a, b) = (stops[k], stops[k + 1]);
    let c = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
