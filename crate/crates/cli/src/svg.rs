//! Static line charts of monthly series with changepoint markers.

use std::fmt::Write as _;

use ris_core::index::MonthlySeries;
use ris_core::Month;

use crate::provenance::Provenance;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 320.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 40.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf",
];

pub struct Chart<'a> {
    pub title: String,
    pub series: Vec<&'a MonthlySeries>,
    /// Drawn as dashed vertical lines.
    pub markers: Vec<Month>,
    /// Drawn as a solid highlighted line.
    pub highlight: Option<Month>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|f| f * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

impl Chart<'_> {
    pub fn render(&self, provenance: &Provenance) -> String {
        let months: Vec<Month> = self
            .series
            .iter()
            .flat_map(|s| s.points().iter().map(|p| p.month))
            .chain(self.markers.iter().copied())
            .chain(self.highlight)
            .collect();
        let (m0, m1) = match (months.iter().min(), months.iter().max()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => {
                let now = Month::new(2000, 1).expect("valid month");
                (now, now)
            }
        };
        let span = (m0.months_until(m1)).max(1) as f64;
        let values: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.observed().map(|(_, v)| v))
            .collect();
        let (mut lo, mut hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(*v), b.max(*v))
            });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 1.0;
            hi += 1.0;
        }
        let pad = (hi - lo) * 0.05;
        let (lo, hi) = (lo - pad, hi + pad);

        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let x = |m: Month| LEFT + m0.months_until(m) as f64 / span * plot_w;
        let y = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;

        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        w.push_str(&provenance.svg_comment());
        let _ = writeln!(
            w,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            w,
            r#"<text x="{LEFT}" y="20" font-size="14">{}</text>"#,
            escape(&self.title)
        );

        // axes and grid
        let _ = writeln!(
            w,
            r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
        );
        for t in ticks(lo, hi) {
            let ty = y(t);
            let _ = writeln!(
                w,
                r##"<line x1="{LEFT}" y1="{ty:.2}" x2="{:.2}" y2="{ty:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                WIDTH - RIGHT,
                LEFT - 4.0,
                ty + 4.0,
                format_tick(t)
            );
        }
        let year_step = ((m1.year() - m0.year()) / 12 + 1).max(1);
        for year in (m0.year()..=m1.year()).step_by(year_step as usize) {
            let jan = Month::new(year, 1).expect("valid month");
            if jan < m0 || jan > m1 {
                continue;
            }
            let tx = x(jan);
            let _ = writeln!(
                w,
                r##"<line x1="{tx:.2}" y1="{:.2}" x2="{tx:.2}" y2="{:.2}" stroke="#444"/><text x="{tx:.2}" y="{:.2}" text-anchor="middle">{year}</text>"##,
                HEIGHT - BOTTOM,
                HEIGHT - BOTTOM + 4.0,
                HEIGHT - BOTTOM + 16.0
            );
        }

        for m in &self.markers {
            let mx = x(*m);
            let _ = writeln!(
                w,
                r##"<line x1="{mx:.2}" y1="{TOP}" x2="{mx:.2}" y2="{:.2}" stroke="#d62728" stroke-dasharray="4 3"><title>{m}</title></line>"##,
                HEIGHT - BOTTOM
            );
        }
        if let Some(m) = self.highlight {
            let mx = x(m);
            let _ = writeln!(
                w,
                r##"<line x1="{mx:.2}" y1="{TOP}" x2="{mx:.2}" y2="{:.2}" stroke="#e377c2" stroke-width="3" opacity="0.6"><title>{m}</title></line>"##,
                HEIGHT - BOTTOM
            );
        }

        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut d = String::new();
            let mut pen_down = false;
            for p in s.points() {
                match p.value {
                    Some(v) => {
                        let cmd = if pen_down { 'L' } else { 'M' };
                        let _ = write!(d, "{cmd}{:.2},{:.2} ", x(p.month), y(v));
                        pen_down = true;
                    }
                    None => pen_down = false,
                }
            }
            let _ = writeln!(
                w,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                d.trim_end()
            );
            let ly = TOP + 14.0 * (i as f64 + 1.0);
            let lx = WIDTH - RIGHT - 150.0;
            let _ = writeln!(
                w,
                r#"<line x1="{lx}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
                ly - 4.0,
                lx + 16.0,
                ly - 4.0,
                lx + 20.0,
                escape(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn format_tick(t: f64) -> String {
    let s = format!("{t:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}
