use std::fmt::Write;

use crate::eval::{ConfusionMatrix, RocPoint};

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const SIZE: f64 = 360.0;
const MARGIN: f64 = 50.0;

fn trapezoid(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// ROC curves on one set of axes with AUC in the legend.
pub fn render_roc_svg(curves: &[(String, Vec<RocPoint>)]) -> String {
    let w = SIZE + 2.0 * MARGIN + 160.0;
    let h = SIZE + 2.0 * MARGIN;
    let x = |fpr: f64| MARGIN + fpr * SIZE;
    let y = |tpr: f64| MARGIN + (1.0 - tpr) * SIZE;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 4"/>"##,
        x(0.0),
        y(0.0),
        x(1.0),
        y(1.0)
    );
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{v:.2}</text>"#,
            x(v),
            y(0.0) + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{v:.2}</text>"#,
            x(0.0) - 6.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">False positive rate</text>"#,
        x(0.5),
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {:.1})">True positive rate</text>"#,
        y(0.5),
        y(0.5)
    );

    for (i, (model, points)) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .map(|p| format!("{:.2},{:.2}", x(p.fpr), y(p.tpr)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            path.join(" ")
        );
        let ly = MARGIN + 16.0 + 18.0 * i as f64;
        let lx = MARGIN + SIZE + 12.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{:.1}" width="12" height="4" fill="{colour}"/>"#,
            ly - 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" font-size="11">{model} (AUC {:.3})</text>"#,
            lx + 18.0,
            trapezoid(points)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// 2x2 grid, actual class by row and predicted class by column, AD first.
pub fn render_confusion_svg(model: &str, cm: &ConfusionMatrix) -> String {
    let cell = 110.0;
    let (ox, oy) = (110.0, 60.0);
    let total = cm.total().max(1) as f64;
    let cells = [
        [(cm.tp, "TP"), (cm.fn_, "FN")],
        [(cm.fp, "FP"), (cm.tn, "TN")],
    ];
    let names = ["AD", "non-AD"];

    let mut s = String::new();
    let (w, h) = (ox + 2.0 * cell + 30.0, oy + 2.0 * cell + 50.0);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" font-size="14" text-anchor="middle">{model}</text>"#,
        ox + cell
    );
    for (r, row) in cells.iter().enumerate() {
        for (c, &(count, tag)) in row.iter().enumerate() {
            let shade = 255.0 - 180.0 * count as f64 / total;
            let (x, y) = (ox + c as f64 * cell, oy + r as f64 * cell);
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({0:.0},{0:.0},255)" stroke="black"/>"#,
                shade
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="20" text-anchor="middle">{count}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{tag}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 18.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{}</text>"#,
            ox - 8.0,
            oy + r as f64 * cell + cell / 2.0,
            names[r]
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            ox + r as f64 * cell + cell / 2.0,
            oy - 8.0,
            names[r]
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">predicted</text>"#,
        ox + cell,
        oy + 2.0 * cell + 24.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_auc_is_half() {
        let pts = vec![
            RocPoint {
                fpr: 0.0,
                tpr: 0.0,
                threshold: f64::INFINITY,
            },
            RocPoint {
                fpr: 1.0,
                tpr: 1.0,
                threshold: 0.5,
            },
        ];
        let svg = render_roc_svg(&[("m".into(), pts)]);
        assert!(svg.contains("m (AUC 0.500)"));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn confusion_counts_appear() {
        let svg = render_confusion_svg("hard_ensemble", &ConfusionMatrix::new(20, 4, 4, 20));
        assert_eq!(svg.matches(">20</text>").count(), 2);
        assert_eq!(svg.matches(">4</text>").count(), 2);
    }
}
