//! Minimal self-contained SVG output for the experiment reports.

use std::fmt::Write as _;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Frame {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn map(&self, px: f64, py: f64) -> (f64, f64) {
        let span = |(lo, hi): (f64, f64)| if hi > lo { hi - lo } else { 1.0 };
        let fx = (px - self.x_range.0) / span(self.x_range);
        let fy = (py - self.y_range.0) / span(self.y_range);
        (self.x + fx * self.w, self.y + self.h - fy * self.h)
    }

    fn polyline(
        &self,
        out: &mut String,
        points: impl Iterator<Item = (f64, f64)>,
        color: &str,
        width: f64,
    ) {
        let pts: Vec<String> = points
            .map(|(a, b)| {
                let (x, y) = self.map(a, b);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"#,
            pts.join(" ")
        );
    }

    fn border(&self, out: &mut String) {
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#888"/>"##,
            self.x, self.y, self.w, self.h
        );
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, content: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{content}</text>"#
    );
}

/// One line per method of overall silhouette against k.
pub(crate) fn silhouette_vs_k(series: &[(&str, Vec<(usize, f64)>)]) -> String {
    let (width, height) = (640.0, 400.0);
    let frame = Frame {
        x: 60.0,
        y: 30.0,
        w: 540.0,
        h: 310.0,
        x_range: range(
            series
                .iter()
                .flat_map(|(_, p)| p.iter().map(|&(k, _)| k as f64)),
        ),
        y_range: range(series.iter().flat_map(|(_, p)| p.iter().map(|&(_, s)| s))),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    frame.border(&mut out);
    for (idx, (name, points)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        frame.polyline(
            &mut out,
            points.iter().map(|&(k, s)| (k as f64, s)),
            color,
            2.0,
        );
        for &(k, s) in points {
            let (x, y) = frame.map(k as f64, s);
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#
            );
        }
        let ly = 50.0 + 16.0 * idx as f64;
        let _ = writeln!(
            out,
            r#"<line x1="480" y1="{:.1}" x2="500" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
            ly - 4.0,
            ly - 4.0
        );
        text(&mut out, 505.0, ly, "start", name);
    }
    let (klo, khi) = frame.x_range;
    let (slo, shi) = frame.y_range;
    text(&mut out, frame.x, 360.0, "start", &format!("k = {klo}"));
    text(
        &mut out,
        frame.x + frame.w,
        360.0,
        "end",
        &format!("k = {khi}"),
    );
    text(
        &mut out,
        frame.x - 5.0,
        frame.y + 10.0,
        "end",
        &format!("{shi:.3}"),
    );
    text(
        &mut out,
        frame.x - 5.0,
        frame.y + frame.h,
        "end",
        &format!("{slo:.3}"),
    );
    text(
        &mut out,
        width / 2.0,
        385.0,
        "middle",
        "overall silhouette (raw series) vs k",
    );
    out.push_str("</svg>\n");
    out
}

/// One row per cluster: member representations on the left, the matching raw
/// series on the right.
pub(crate) fn cluster_panels(
    title: &str,
    representation: &[Vec<f64>],
    raw: &[Vec<f64>],
    labels: &[usize],
    k: usize,
) -> String {
    let (panel_w, panel_h, gap, top, left) = (320.0, 90.0, 12.0, 40.0, 90.0);
    let width = left + 2.0 * panel_w + 3.0 * gap;
    let height = top + k as f64 * (panel_h + gap) + gap;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    text(&mut out, width / 2.0, 20.0, "middle", title);
    text(
        &mut out,
        left + panel_w / 2.0,
        35.0,
        "middle",
        "representation",
    );
    text(&mut out, left + gap + 1.5 * panel_w, 35.0, "middle", "raw");

    for cluster in 0..k {
        let members: Vec<usize> = (0..labels.len())
            .filter(|&i| labels[i] == cluster)
            .collect();
        let y = top + cluster as f64 * (panel_h + gap);
        text(
            &mut out,
            left - 8.0,
            y + panel_h / 2.0,
            "end",
            &format!("{} ({})", cluster + 1, members.len()),
        );
        for (col, data) in [representation, raw].into_iter().enumerate() {
            let len = data.first().map_or(1, Vec::len);
            let frame = Frame {
                x: left + col as f64 * (panel_w + gap),
                y,
                w: panel_w,
                h: panel_h,
                x_range: (0.0, (len.max(2) - 1) as f64),
                y_range: range(members.iter().flat_map(|&i| data[i].iter().copied())),
            };
            frame.border(&mut out);
            for (n, &i) in members.iter().enumerate() {
                let color = PALETTE[n % PALETTE.len()];
                frame.polyline(
                    &mut out,
                    data[i].iter().enumerate().map(|(t, &v)| (t as f64, v)),
                    color,
                    1.0,
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let svg = silhouette_vs_k(&[
            ("npfree", vec![(13, 0.4), (15, 0.5)]),
            ("znorm", vec![(13, 0.3), (15, 0.35)]),
        ]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("npfree") && svg.contains("znorm"));
    }

    #[test]
    fn cluster_panels_draw_every_member_twice() {
        let raw = vec![
            vec![0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0],
            vec![1.0, 1.0, 1.0],
        ];
        let svg = cluster_panels("demo", &raw, &raw, &[0, 1, 0], 2);
        assert_eq!(svg.matches("<polyline").count(), 6);
        assert_eq!(svg.matches("<rect").count(), 4);
    }
}
