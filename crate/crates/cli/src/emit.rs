//! Report serialization: TSV and JSON for every table, SVG for the scatter
//! and histogram figures.

use std::fmt::Write as _;

use anyhow::Result;
use biaslens::bias::{BiasLabel, BiasReport};
use biaslens::eval::{CdaOutcome, CorrelationRow, Histogram};
use serde_json::json;

fn config_comment(hash: Option<&str>) -> String {
    match hash {
        Some(h) => format!("#config={h}\n"),
        None => String::new(),
    }
}

pub fn report_json(report: &BiasReport, hash: Option<&str>) -> Result<String> {
    let mut report = report.clone();
    if let Some(h) = hash {
        report.params.insert("config_hash".into(), h.to_string());
    }
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

pub fn report_from_json(text: &str) -> Result<BiasReport> {
    Ok(serde_json::from_str(text)?)
}

fn label_str(label: BiasLabel) -> &'static str {
    match label {
        BiasLabel::ZBiased => "z_biased",
        BiasLabel::ZPrimeBiased => "z_prime_biased",
        BiasLabel::Unbiased => "unbiased",
    }
}

pub fn report_tsv(report: &BiasReport, hash: Option<&str>) -> String {
    let mut out = config_comment(hash);
    let _ = writeln!(
        out,
        "#method={}\trepresentation={}\ttau={}",
        report.method, report.representation, report.tau
    );
    let _ = writeln!(out, "word\tpsi\tassoc_z\tassoc_z_prime\tlabel");
    for r in &report.records {
        let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.word,
            r.psi,
            fmt_opt(r.assoc_z),
            fmt_opt(r.assoc_z_prime),
            label_str(r.label)
        );
    }
    out
}

/// Scatter data mirroring the published figure layout: x is the association
/// to Z', y the association to Z.
pub fn scatter_tsv(report: &BiasReport, hash: Option<&str>) -> String {
    let mut out = config_comment(hash);
    let _ = writeln!(out, "word\tx_assoc_z_prime\ty_assoc_z\tlabel");
    for r in &report.records {
        let (Some(az), Some(azp)) = (r.assoc_z, r.assoc_z_prime) else {
            continue;
        };
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.word, azp, az, label_str(r.label));
    }
    out
}

pub fn correlation_tsv(rows: &[CorrelationRow], hash: Option<&str>) -> String {
    let mut out = config_comment(hash);
    let _ = writeln!(out, "representation\tmeasure\tcollection\tspearman\tpearson\tn");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.representation,
            r.measure.as_str(),
            r.collection,
            r.spearman,
            r.pearson,
            r.n
        );
    }
    out
}

pub fn correlation_json(rows: &[CorrelationRow], hash: Option<&str>) -> Result<String> {
    let value = json!({
        "config_hash": hash,
        "rows": rows,
    });
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

pub fn trajectories_tsv(outcome: &CdaOutcome, hash: Option<&str>) -> String {
    let mut out = config_comment(hash);
    let _ = writeln!(out, "occupation\tmethod\tpsi_original\tpsi_half\tpsi_full");
    for t in &outcome.trajectories {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            t.occupation, t.method, t.psi_original, t.psi_half, t.psi_full
        );
    }
    out
}

pub fn aggregates_tsv(outcome: &CdaOutcome, hash: Option<&str>) -> String {
    let mut out = config_comment(hash);
    let _ = writeln!(out, "method\tfirst_step\tsecond_step");
    for a in &outcome.aggregates {
        let _ = writeln!(out, "{}\t{}\t{}", a.method, a.first_step, a.second_step);
    }
    out
}

pub fn histogram_tsv(hist: &Histogram, hash: Option<&str>) -> String {
    let mut out = config_comment(hash);
    let _ = writeln!(out, "lo\thi\tunbiased\tz_biased\tz_prime_biased");
    for b in &hist.bins {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            b.lo, b.hi, b.unbiased, b.z_biased, b.z_prime_biased
        );
    }
    out
}

const PLOT_SIZE: f64 = 640.0;
const MARGIN: f64 = 60.0;

const COLOR_Z: &str = "#7b3294"; // biased toward Z (purple)
const COLOR_Z_PRIME: &str = "#e66101"; // biased toward Z' (orange)
const COLOR_UNBIASED: &str = "#999999";

fn svg_header(hash: Option<&str>) -> String {
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" \
         viewBox=\"0 0 640 640\">\n",
    );
    if let Some(h) = hash {
        let _ = writeln!(out, "<!-- config={h} -->");
    }
    out
}

/// Scatter with the gray unbiased band: the region within `tau` of the
/// diagonal (measured as |y - x|, matching the classification rule).
pub fn scatter_svg(report: &BiasReport, hash: Option<&str>) -> String {
    let area = PLOT_SIZE - 2.0 * MARGIN;
    // associations are min-max normalized into [0, 1]
    let sx = |v: f64| MARGIN + v.clamp(0.0, 1.0) * area;
    let sy = |v: f64| PLOT_SIZE - MARGIN - v.clamp(0.0, 1.0) * area;

    let mut out = svg_header(hash);
    let _ = writeln!(
        out,
        "<rect x=\"{m}\" y=\"{m}\" width=\"{a}\" height=\"{a}\" fill=\"white\" stroke=\"black\"/>",
        m = MARGIN,
        a = area
    );
    // unbiased band: polygon between y = x - tau and y = x + tau, clipped to the unit square
    let tau = report.tau;
    let band: Vec<(f64, f64)> = vec![
        (0.0, (-tau).clamp(0.0, 1.0)),
        (0.0, tau.clamp(0.0, 1.0)),
        ((1.0 - tau).clamp(0.0, 1.0), 1.0),
        (1.0, 1.0),
        (1.0, (1.0 - tau).clamp(0.0, 1.0)),
        (tau.clamp(0.0, 1.0), 0.0),
        (0.0, 0.0),
    ];
    let points: Vec<String> = band
        .iter()
        .map(|&(x, y)| format!("{},{}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        out,
        "<polygon class=\"unbiased-band\" points=\"{}\" fill=\"#dddddd\"/>",
        points.join(" ")
    );
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-dasharray=\"4 3\"/>",
        sx(0.0),
        sy(0.0),
        sx(1.0),
        sy(1.0)
    );
    for r in &report.records {
        let (Some(az), Some(azp)) = (r.assoc_z, r.assoc_z_prime) else {
            continue;
        };
        let color = match r.label {
            BiasLabel::ZBiased => COLOR_Z,
            BiasLabel::ZPrimeBiased => COLOR_Z_PRIME,
            BiasLabel::Unbiased => COLOR_UNBIASED,
        };
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\" fill-opacity=\"0.8\">\
             <title>{}</title></circle>",
            sx(azp),
            sy(az),
            color,
            r.word
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">association to Z'</text>",
        PLOT_SIZE / 2.0,
        PLOT_SIZE - MARGIN / 3.0
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 {x} {y})\">association to Z</text>",
        MARGIN / 3.0,
        PLOT_SIZE / 2.0,
        x = MARGIN / 3.0,
        y = PLOT_SIZE / 2.0
    );
    out.push_str("</svg>\n");
    out
}

/// Stacked histogram of the bias values, split by label.
pub fn histogram_svg(hist: &Histogram, hash: Option<&str>) -> String {
    let area = PLOT_SIZE - 2.0 * MARGIN;
    let n = hist.bins.len() as f64;
    let max_count = hist
        .bins
        .iter()
        .map(|b| b.unbiased + b.z_biased + b.z_prime_biased)
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let bar_w = area / n;

    let mut out = svg_header(hash);
    let _ = writeln!(
        out,
        "<rect x=\"{m}\" y=\"{m}\" width=\"{a}\" height=\"{a}\" fill=\"white\" stroke=\"black\"/>",
        m = MARGIN,
        a = area
    );
    for (i, b) in hist.bins.iter().enumerate() {
        let x = MARGIN + i as f64 * bar_w;
        let mut y = PLOT_SIZE - MARGIN;
        for (count, color) in [
            (b.z_prime_biased, COLOR_Z_PRIME),
            (b.unbiased, COLOR_UNBIASED),
            (b.z_biased, COLOR_Z),
        ] {
            if count == 0 {
                continue;
            }
            let h = count as f64 / max_count * area;
            y -= h;
            let _ = writeln!(
                out,
                "<rect class=\"hist-bar\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                x + 1.0,
                y,
                bar_w - 2.0,
                h,
                color
            );
        }
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">normalized bias</text>",
        PLOT_SIZE / 2.0,
        PLOT_SIZE - MARGIN / 3.0
    );
    out.push_str("</svg>\n");
    out
}
