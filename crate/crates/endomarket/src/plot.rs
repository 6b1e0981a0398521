//! SVG scatter plot of participation against price, drawn from a CSV table.

use std::fmt::Write;

use crate::output::CsvRecord;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PARTIAL_COLOR: &str = "#d62728";
const FULL_COLOR: &str = "#1f77b4";
const MIXED_COLOR: &str = "#2ca02c";

pub fn render_svg(rows: &[CsvRecord], title: &str) -> String {
    let mut prices: Vec<f64> = rows.iter().map(|r| r.price).collect();
    prices.sort_by(f64::total_cmp);
    prices.dedup();
    let (mut p_min, mut p_max) = match (prices.first(), prices.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 1.0),
    };
    if p_max <= p_min {
        p_min -= 0.5 * p_min.abs().max(1.0);
        p_max += 0.5 * p_max.abs().max(1.0);
    }
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |p: f64| MARGIN + (p - p_min) / (p_max - p_min) * plot_w;
    let y = |a: f64| HEIGHT - MARGIN - a * plot_h;
    // Width of a mixed band: half the gap to the nearest neighbouring price.
    let half_gap = |p: f64| {
        let i = prices.partition_point(|&q| q < p);
        let left = if i > 0 {
            p - prices[i - 1]
        } else {
            f64::INFINITY
        };
        let right = prices.get(i + 1).map_or(f64::INFINITY, |&q| q - p);
        let gap = left.min(right);
        if gap.is_finite() {
            0.5 * gap
        } else {
            0.01 * (p_max - p_min)
        }
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (px, py) = (MARGIN + t * plot_w, y(t));
        let _ = writeln!(
            s,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN + 16.0,
            tick(p_min + t * (p_max - p_min))
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{t:.1}</text>"#,
            MARGIN - 6.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">price P</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">participation α</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for r in rows {
        let Some((lo, hi)) = r.alpha else { continue };
        match r.regime.as_str() {
            "mixed" => {
                let hw = half_gap(r.price) * plot_w / (p_max - p_min);
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{MIXED_COLOR}" fill-opacity="0.3"/>"#,
                    x(r.price) - hw,
                    y(hi),
                    2.0 * hw,
                    (y(lo) - y(hi)).max(0.5)
                );
            }
            regime => {
                let color = if regime == "full" {
                    FULL_COLOR
                } else {
                    PARTIAL_COLOR
                };
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                    x(r.price),
                    y(lo)
                );
            }
        }
    }

    let legend = [
        ("partial", PARTIAL_COLOR),
        ("full", FULL_COLOR),
        ("mixed", MIXED_COLOR),
    ];
    for (i, (label, color)) in legend.iter().enumerate() {
        let lx = WIDTH - MARGIN - 80.0;
        let ly = MARGIN + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{}" width="10" height="10" fill="{color}"/>"#,
            ly - 9.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{label}</text>"#, lx + 14.0);
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
