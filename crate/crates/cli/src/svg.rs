//! Hand-rolled SVG renderers for the two report figures: the
//! utility/detectability scatter and the calibration curve. No chart
//! library — the figures are a handful of primitives, and emitting them
//! directly keeps the output deterministic and dependency-free.
//!
//! Each data point carries `data-*` attributes with its source values so
//! the figures are scriptable and testable without a rasterizer.

use attrisk_core::{AuditReport, CalibrationCurve};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 74.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 64.0;

struct Scale {
    lo: f64,
    hi: f64,
    p_lo: f64,
    p_hi: f64,
}

impl Scale {
    /// Linear scale anchored to at least [0, 1] and widened to cover the
    /// data, so figures from different runs stay visually comparable.
    fn anchored(values: impl Iterator<Item = f64>, p_lo: f64, p_hi: f64) -> Self {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for v in values {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let pad = 0.04 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            p_lo,
            p_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (v - self.lo) / (self.hi - self.lo);
        self.p_lo + t * (self.p_hi - self.p_lo)
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open_svg(out: &mut String, title: &str) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    ));
    out.push_str(&format!(
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-size=\"15\" fill=\"#222\">{}</text>\n",
        px(MARGIN_LEFT),
        escape(title)
    ));
}

fn axes(out: &mut String, x: &Scale, y: &Scale, x_label: &str, y_label: &str) {
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#444\"/>\n",
        px(left),
        px(bottom),
        px(right),
        px(bottom)
    ));
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#444\"/>\n",
        px(left),
        px(top),
        px(left),
        px(bottom)
    ));
    for i in 0..=4 {
        let t = f64::from(i) / 4.0;
        let vx = x.lo + t * (x.hi - x.lo);
        let vy = y.lo + t * (y.hi - y.lo);
        let xp = x.map(vx);
        let yp = y.map(vy);
        out.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#444\"/>\n",
            px(xp),
            px(bottom),
            px(bottom + 5.0)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#444\" text-anchor=\"middle\">{}</text>\n",
            px(xp),
            px(bottom + 20.0),
            format_args!("{vx:.2}")
        ));
        out.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#444\"/>\n",
            px(left - 5.0),
            px(left),
            px(yp)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#444\" text-anchor=\"end\">{}</text>\n",
            px(left - 9.0),
            px(yp + 4.0),
            format_args!("{vy:.2}")
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"13\" fill=\"#222\" text-anchor=\"middle\">{}</text>\n",
        px((left + right) / 2.0),
        px(HEIGHT - 18.0),
        escape(x_label)
    ));
    out.push_str(&format!(
        "  <text x=\"20\" y=\"{}\" font-size=\"13\" fill=\"#222\" text-anchor=\"middle\" \
transform=\"rotate(-90 20 {})\">{}</text>\n",
        px((top + bottom) / 2.0),
        px((top + bottom) / 2.0),
        escape(y_label)
    ));
}

/// Scatter of every successfully audited attribute: x = utility
/// (adjusted MI with the label), y = ensemble detectability. Whiskers
/// show the utility bootstrap interval horizontally and the interval of
/// the family achieving the ensemble score vertically. High-and-right
/// points are the risky ones.
pub fn scatter_svg(report: &AuditReport) -> String {
    let rows: Vec<_> = report
        .attributes
        .iter()
        .filter(|a| a.error.is_none())
        .collect();
    let x_values = rows
        .iter()
        .flat_map(|a| [a.utility.ami, a.utility_ci.0, a.utility_ci.1]);
    let best_ci = |a: &attrisk_core::AttributeAudit| {
        a.detectability
            .iter()
            .max_by(|l, r| l.score.ami.total_cmp(&r.score.ami))
            .map(|d| (d.ci_low, d.ci_high))
            .unwrap_or((a.detectability_ensemble, a.detectability_ensemble))
    };
    let y_values = rows.iter().flat_map(|a| {
        let (lo, hi) = best_ci(a);
        [a.detectability_ensemble, lo, hi]
    });
    let x = Scale::anchored(x_values, MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let y = Scale::anchored(y_values, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);

    let mut out = String::new();
    open_svg(&mut out, "Attribute shortcut risk");
    axes(
        &mut out,
        &x,
        &y,
        "utility (adjusted MI with label)",
        "detectability (ensemble adjusted MI)",
    );
    for a in &rows {
        let cx = x.map(a.utility.ami);
        let cy = y.map(a.detectability_ensemble);
        let (d_lo, d_hi) = best_ci(a);
        out.push_str(&format!(
            "  <g data-name=\"{}\" data-utility=\"{:.6}\" data-detectability=\"{:.6}\">\n",
            escape(&a.name),
            a.utility.ami,
            a.detectability_ensemble
        ));
        out.push_str(&format!(
            "    <line x1=\"{}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#9aa4af\" stroke-width=\"1.5\"/>\n",
            px(x.map(a.utility_ci.0)),
            px(x.map(a.utility_ci.1)),
            px(cy)
        ));
        out.push_str(&format!(
            "    <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#9aa4af\" stroke-width=\"1.5\"/>\n",
            px(cx),
            px(y.map(d_lo)),
            px(y.map(d_hi))
        ));
        out.push_str(&format!(
            "    <circle cx=\"{}\" cy=\"{}\" r=\"4.5\" fill=\"#2563eb\"/>\n",
            px(cx),
            px(cy)
        ));
        out.push_str(&format!(
            "    <text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#222\">{}</text>\n",
            px(cx + 7.0),
            px(cy - 7.0),
            escape(&a.name)
        ));
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Calibration curve: worst-case AUC drop against the realized
/// attribute↔label association of the planted artifact, with the drop's
/// t-interval as vertical whiskers. Optional vertical markers show where
/// real attributes from a prior audit sit on the utility axis.
pub fn curve_svg(curve: &CalibrationCurve, markers: &[(String, f64)]) -> String {
    let x_values = curve
        .rows
        .iter()
        .map(|r| r.utility.ami)
        .chain(markers.iter().map(|(_, u)| *u));
    let y_values = curve
        .rows
        .iter()
        .flat_map(|r| [r.auc_drop, r.ci_drop.0, r.ci_drop.1]);
    let x = Scale::anchored(x_values, MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let y = Scale::anchored(y_values, HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);

    let mut out = String::new();
    open_svg(&mut out, "Synthetic-shortcut calibration");
    axes(
        &mut out,
        &x,
        &y,
        "realized utility (adjusted MI)",
        "worst-case AUC drop",
    );
    for (name, utility) in markers {
        let xp = x.map(*utility);
        out.push_str(&format!(
            "  <g data-marker=\"{}\" data-utility=\"{utility:.6}\">\n",
            escape(name)
        ));
        out.push_str(&format!(
            "    <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#dc2626\" \
stroke-dasharray=\"4 3\"/>\n",
            px(xp),
            px(MARGIN_TOP),
            px(HEIGHT - MARGIN_BOTTOM)
        ));
        out.push_str(&format!(
            "    <text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#dc2626\">{}</text>\n",
            px(xp + 3.0),
            px(MARGIN_TOP + 12.0),
            escape(name)
        ));
        out.push_str("  </g>\n");
    }
    // polyline in utility order so the path reads left to right
    let mut ordered: Vec<_> = curve.rows.iter().collect();
    ordered.sort_by(|l, r| l.utility.ami.total_cmp(&r.utility.ami));
    if ordered.len() > 1 {
        let points: Vec<String> = ordered
            .iter()
            .map(|r| format!("{},{}", px(x.map(r.utility.ami)), px(y.map(r.auc_drop))))
            .collect();
        out.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"#2563eb\" stroke-width=\"1.5\"/>\n",
            points.join(" ")
        ));
    }
    for r in &ordered {
        let cx = x.map(r.utility.ami);
        out.push_str(&format!(
            "  <g data-flip-fraction=\"{:.6}\" data-utility=\"{:.6}\" data-drop=\"{:.6}\">\n",
            r.flip_fraction, r.utility.ami, r.auc_drop
        ));
        out.push_str(&format!(
            "    <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#9aa4af\" stroke-width=\"1.5\"/>\n",
            px(cx),
            px(y.map(r.ci_drop.0)),
            px(y.map(r.ci_drop.1))
        ));
        out.push_str(&format!(
            "    <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#2563eb\"/>\n",
            px(cx),
            px(y.map(r.auc_drop))
        ));
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use attrisk_core::info::AmiScore;
    use attrisk_core::{
        ArtifactMode, AttributeAudit, AuditConfig, CalibrationRow, DatasetFingerprint,
        DirectionMode, FamilyDetectability, ModelFamily,
    };

    fn score(ami: f64) -> AmiScore {
        AmiScore {
            mi: ami,
            emi: 0.0,
            h_row: 1.0,
            h_col: 1.0,
            ami,
        }
    }

    fn attr(name: &str, utility: f64, detect: f64) -> AttributeAudit {
        AttributeAudit {
            name: name.into(),
            n_used: 100,
            utility: score(utility),
            utility_ci: (utility - 0.05, utility + 0.05),
            detectability: vec![FamilyDetectability {
                family: ModelFamily::LogisticRegression,
                score: score(detect),
                ci_low: detect - 0.05,
                ci_high: detect + 0.05,
            }],
            detectability_ensemble: detect,
            mode: DirectionMode::CausalXToY,
            warnings: Vec::new(),
            error: None,
        }
    }

    fn fingerprint() -> DatasetFingerprint {
        DatasetFingerprint {
            n_rows: 100,
            n_feature_columns: 3,
            n_attributes: 2,
            content_hash: "x".into(),
        }
    }

    #[test]
    fn scatter_orders_points_by_their_values() {
        let report = attrisk_core::AuditReport {
            fingerprint: fingerprint(),
            config: AuditConfig {
                families: vec![ModelFamily::LogisticRegression],
                ..AuditConfig::default()
            },
            seed: 0,
            attributes: vec![attr("risky & real", 0.8, 0.9), attr("benign", 0.1, 0.2)],
            warnings: Vec::new(),
        };
        let svg = scatter_svg(&report);
        assert!(svg.contains("data-name=\"risky &amp; real\""));
        assert!(svg.contains("data-name=\"benign\""));
        // parse back the circle coordinates via the data attributes' order
        let risky_at = svg.find("risky &amp; real").unwrap();
        let benign_at = svg.find("data-name=\"benign\"").unwrap();
        let cy = |from: usize| -> f64 {
            let rest = &svg[from..];
            let at = rest.find("cy=\"").unwrap() + 4;
            rest[at..rest[at..].find('"').unwrap() + at].parse().unwrap()
        };
        // higher detectability must sit higher on the canvas (smaller y)
        assert!(cy(risky_at) < cy(benign_at));
    }

    #[test]
    fn curve_svg_draws_rows_and_markers() {
        let row = |flip: f64, utility: f64, drop: f64| CalibrationRow {
            flip_fraction: flip,
            utility: score(utility),
            auc_correlated: 0.9,
            auc_counterfactual: 0.9 - drop,
            auc_drop: drop,
            ci_correlated: (0.85, 0.95),
            ci_counterfactual: (0.85 - drop, 0.95 - drop),
            ci_drop: (drop - 0.03, drop + 0.03),
            warnings: Vec::new(),
        };
        let curve = CalibrationCurve {
            fingerprint: fingerprint(),
            task_family: ModelFamily::Mlp,
            folds: 3,
            artifact_mode: ArtifactMode::EncodeValue,
            seed: 0,
            rows: vec![row(0.0, 1.0, 0.8), row(0.4, 0.1, 0.1)],
            failures: Vec::new(),
            warnings: Vec::new(),
        };
        let svg = curve_svg(&curve, &[("site".into(), 0.45)]);
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("data-marker=\"site\""));
        assert!(svg.contains("data-flip-fraction=\"0.400000\""));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
