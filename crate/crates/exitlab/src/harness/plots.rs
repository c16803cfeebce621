//! Deterministic CSV and SVG emitters for study reports.

use crate::chain::SigmaLaw;
use crate::error::Result;
use crate::harness::study::ComparisonReport;
use std::fmt::Write as _;
use std::path::Path;

const COLORS: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

/// Writes `cdf_overlay.csv` and `cdf_overlay.svg` under `dir`. Byte output is
/// deterministic for fixed inputs. An empty report produces a headers-only
/// CSV and an empty-axes SVG.
pub fn emit_plot_data(report: &ComparisonReport, law: &SigmaLaw, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let csv = overlay_csv(report, law);
    std::fs::write(dir.join("cdf_overlay.csv"), csv)?;
    let svg = overlay_svg(report, law);
    std::fs::write(dir.join("cdf_overlay.svg"), svg)?;
    Ok(())
}

/// (lambda, cdf) polyline for the law, with atoms rendered as vertical jumps.
fn law_polyline(law: &SigmaLaw) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    pts.extend(law.cdf_overlay());
    pts
}

fn empirical_cdf(sorted: &[f64], x: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    sorted.partition_point(|&s| s <= x) as f64 / sorted.len() as f64
}

pub fn overlay_csv(report: &ComparisonReport, law: &SigmaLaw) -> String {
    let mut out = String::new();
    out.push_str("lambda,law");
    for eps in &report.eps {
        let _ = write!(out, ",eps_{}", eps.epsilon);
    }
    out.push('\n');
    if report.eps.is_empty() {
        return out;
    }
    let mut pools: Vec<Vec<f64>> = report.pooled_lambda_hat.clone();
    for p in &mut pools {
        p.sort_by(|a, b| a.total_cmp(b));
    }
    for (lambda, f) in law_polyline(law) {
        let _ = write!(out, "{},{}", lambda, f);
        for p in &pools {
            let _ = write!(out, ",{}", empirical_cdf(p, lambda));
        }
        out.push('\n');
    }
    out
}

pub fn overlay_svg(report: &ComparisonReport, law: &SigmaLaw) -> String {
    let (w, h) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (60.0, 20.0, 20.0, 50.0);
    let x_max = law.support.1 * 1.25;
    let to_x = |lambda: f64| ml + (w - ml - mr) * (lambda / x_max).clamp(0.0, 1.0);
    let to_y = |f: f64| h - mb - (h - mt - mb) * f.clamp(0.0, 1.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        ml,
        h - mb,
        w - mr,
        h - mb
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        ml,
        mt,
        ml,
        h - mb
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{:.1}</text>",
            ml - 6.0,
            to_y(f) + 4.0,
            f
        );
        let lambda = x_max * f;
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{:.2}</text>",
            to_x(lambda),
            h - mb + 16.0,
            lambda
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">rescaled exit time</text>",
        0.5 * (ml + w - mr),
        h - 12.0
    );

    if !report.eps.is_empty() {
        let polyline = |pts: &[(f64, f64)], color: &str, svg: &mut String| {
            let mut d = String::new();
            for (lambda, f) in pts {
                let _ = write!(d, "{:.3},{:.3} ", to_x(*lambda), to_y(*f));
            }
            let _ = writeln!(
                svg,
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
                color,
                d.trim_end()
            );
        };
        polyline(&law_polyline(law), "black", &mut svg);
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"black\">law</text>",
            ml + 10.0,
            mt + 14.0
        );
        for (i, (eps, pool)) in report
            .eps
            .iter()
            .zip(&report.pooled_lambda_hat)
            .enumerate()
        {
            let color = COLORS[i % COLORS.len()];
            let mut sorted = pool.clone();
            sorted.sort_by(|a, b| a.total_cmp(b));
            let mut pts = vec![(0.0, 0.0)];
            for (j, &v) in sorted.iter().enumerate() {
                pts.push((v, j as f64 / sorted.len() as f64));
                pts.push((v, (j + 1) as f64 / sorted.len() as f64));
            }
            pts.push((x_max, if sorted.is_empty() { 0.0 } else { 1.0 }));
            polyline(&pts, color, &mut svg);
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"{}\">eps = {}</text>",
                ml + 10.0,
                mt + 14.0 + 14.0 * (i + 1) as f64,
                color,
                eps.epsilon
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::sigma_law;
    use crate::harness::study::{ComparisonReport, Verdict};
    use crate::model::ChainSpec;

    fn empty_report() -> ComparisonReport {
        ComparisonReport {
            eta: 0.2,
            n: 0,
            seed: 0,
            eps: vec![],
            ks_trend: Verdict::Undefined,
            hit_trend: Verdict::Undefined,
            all_pass: false,
            pooled_lambda_hat: vec![],
            exit_rows: vec![],
        }
    }

    #[test]
    fn empty_report_writes_headers_only_csv_and_axes_svg() {
        let law = sigma_law(&ChainSpec::single_state(), &[0.5]).unwrap();
        let csv = overlay_csv(&empty_report(), &law);
        assert_eq!(csv, "lambda,law\n");
        let svg = overlay_svg(&empty_report(), &law);
        assert!(svg.starts_with("<svg"));
        assert!(!svg.contains("polyline"));
    }

    #[test]
    fn emitters_are_byte_deterministic() {
        let law = sigma_law(&ChainSpec::single_state(), &[0.5]).unwrap();
        let mut report = empty_report();
        report.eps = vec![];
        report.pooled_lambda_hat = vec![];
        let a = overlay_svg(&report, &law);
        let b = overlay_svg(&report, &law);
        assert_eq!(a, b);
    }
}
