//! Static SVG figures and the summary table.
//!
//! Every statistic comes from [`experiment::summarize`] and
//! [`experiment::aggregate`], so figures and tables cannot disagree.
//! Output is a pure function of the inputs: fixed layout, fixed palette and
//! fixed-precision number formatting.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{
    aggregate, curves_by_hd, summarize, Metric, ResultRow, Selection, Traces, Variant,
};
use crate::qsim::CircuitKind;
use crate::stats::{BoxStats, Curve};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    /// Mean best-so-far energy per evaluation with a mean ± variance band.
    ConvergenceCurves,
    /// One box of approximation ratios per variant.
    RatioBoxplot,
    /// Ratio boxes grouped by HD bucket.
    PerHdBoxplot,
    /// One convergence curve per HD bucket for a single variant.
    ConvergenceByHd,
}

/// One figure: a panel per circuit, a series per variant.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub title: String,
    pub circuits: Vec<CircuitKind>,
    pub variants: Vec<Variant>,
    pub metric: Metric,
    pub path: PathBuf,
}

impl FigureSpec {
    fn check(&self) -> Result<()> {
        if self.circuits.is_empty() || self.variants.is_empty() {
            return Err(Error::domain(format!("figure {:?} selects nothing", self.title)));
        }
        if self.kind == FigureKind::ConvergenceByHd && self.variants.len() != 1 {
            return Err(Error::domain("convergence-by-HD figures take exactly one variant"));
        }
        Ok(())
    }
}

/// The variants a figure needs that have no completed row in `rows`.
pub fn missing_variants(rows: &[ResultRow], spec: &FigureSpec) -> Vec<Selection> {
    let present: BTreeSet<Selection> = rows
        .iter()
        .filter(|r| !r.is_failed())
        .map(|r| Selection::new(r.circuit, r.variant))
        .collect();
    spec.circuits
        .iter()
        .flat_map(|&c| spec.variants.iter().map(move |&v| Selection::new(c, v)))
        .filter(|s| !present.contains(s))
        .collect()
}

/// Renders `spec` and writes it to `spec.path`.
pub fn render(rows: &[ResultRow], traces: &Traces, spec: &FigureSpec) -> Result<()> {
    let svg = render_svg(rows, traces, spec)?;
    std::fs::write(&spec.path, svg)?;
    Ok(())
}

pub fn render_svg(rows: &[ResultRow], traces: &Traces, spec: &FigureSpec) -> Result<String> {
    spec.check()?;
    let mut panels = Vec::new();
    for &circuit in &spec.circuits {
        let title = format!("{circuit}-circuit");
        let panel = match spec.kind {
            FigureKind::ConvergenceCurves => {
                let mut series = Vec::new();
                for &v in &spec.variants {
                    let s = summarize(rows, traces, Selection::new(circuit, v), spec.metric)?;
                    if s.curve.runs == 0 {
                        return Err(Error::domain(format!("no traces for {}", s.selection)));
                    }
                    series.push((v.as_str().to_string(), color(v), s.curve));
                }
                Panel::Curves { title, series }
            }
            FigureKind::ConvergenceByHd => {
                let sel = Selection::new(circuit, spec.variants[0]);
                let curves = curves_by_hd(rows, traces, sel);
                if curves.is_empty() {
                    return Err(Error::domain(format!("no traces for {sel}")));
                }
                let n = curves.len();
                let series = curves
                    .into_iter()
                    .enumerate()
                    .map(|(k, (hd, c))| (format!("HD {hd}"), ramp(k, n), c))
                    .collect();
                Panel::Curves {
                    title: format!("{title}, {}", spec.variants[0]),
                    series,
                }
            }
            FigureKind::RatioBoxplot => {
                let mut boxes = Vec::new();
                for &v in &spec.variants {
                    let s = summarize(rows, traces, Selection::new(circuit, v), spec.metric)?;
                    boxes.push(BoxItem {
                        label: v.as_str().to_string(),
                        color: color(v),
                        stats: s.ratio,
                    });
                }
                Panel::Boxes {
                    title,
                    groups: vec![(String::new(), boxes)],
                }
            }
            FigureKind::PerHdBoxplot => {
                let mut per_variant = Vec::new();
                for &v in &spec.variants {
                    per_variant.push((v, summarize(rows, traces, Selection::new(circuit, v), spec.metric)?));
                }
                let hds: BTreeSet<u32> = per_variant.iter().flat_map(|(_, s)| s.per_hd.keys().copied()).collect();
                let groups = hds
                    .into_iter()
                    .map(|hd| {
                        let boxes = per_variant
                            .iter()
                            .filter_map(|(v, s)| {
                                s.per_hd.get(&hd).map(|b| BoxItem {
                                    label: v.as_str().to_string(),
                                    color: color(*v),
                                    stats: b.clone(),
                                })
                            })
                            .collect();
                        (format!("HD {hd}"), boxes)
                    })
                    .collect();
                Panel::Boxes { title, groups }
            }
        };
        panels.push(panel);
    }
    let y_label = match spec.kind {
        FigureKind::ConvergenceCurves | FigureKind::ConvergenceByHd => "energy (best so far)",
        FigureKind::RatioBoxplot | FigureKind::PerHdBoxplot => match spec.metric {
            Metric::Argmax => "approximation ratio (most probable bitstring)",
            Metric::Expect => "approximation ratio (expected cut)",
        },
    };
    Ok(draw(&spec.title, y_label, &panels))
}

struct BoxItem {
    label: String,
    color: &'static str,
    stats: BoxStats,
}

enum Panel {
    Curves {
        title: String,
        series: Vec<(String, &'static str, Curve)>,
    },
    Boxes {
        title: String,
        groups: Vec<(String, Vec<BoxItem>)>,
    },
}

fn color(v: Variant) -> &'static str {
    match v {
        Variant::PretrainSource => "#7f7f7f",
        Variant::PostTl => "#1f77b4",
        Variant::Standard => "#d62728",
        Variant::Random => "#9467bd",
        Variant::AccelPostTl => "#17becf",
        Variant::AccelStandard => "#ff7f0e",
    }
}

const RAMP: [&str; 8] = [
    "#440154", "#46327e", "#365c8d", "#277f8e", "#1fa187", "#4ac16d", "#a0da39", "#fde725",
];

fn ramp(k: usize, n: usize) -> &'static str {
    if n <= 1 {
        return RAMP[0];
    }
    RAMP[k * (RAMP.len() - 1) / (n - 1)]
}

const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 110.0;

/// Ticks at 1, 2 or 5 times a power of ten covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    lo: f64,
    hi: f64,
}

impl Frame {
    fn y(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.lo) / (self.hi - self.lo) * self.h
    }
}

fn draw(title: &str, y_label: &str, panels: &[Panel]) -> String {
    let widths: Vec<f64> = panels.iter().map(panel_width).collect();
    let width: f64 = widths.iter().sum();
    let height = PANEL_H + 30.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" font-size="16" text-anchor="middle">{}</text>"#,
        width / 2.0,
        esc(title)
    );
    let mut ox = 0.0;
    for (panel, w) in panels.iter().zip(&widths) {
        match panel {
            Panel::Curves { title, series } => draw_curves(&mut s, ox, title, y_label, series),
            Panel::Boxes { title, groups } => draw_boxes(&mut s, ox, *w, title, y_label, groups),
        }
        ox += w;
    }
    s.push_str("</svg>\n");
    s
}

fn panel_width(p: &Panel) -> f64 {
    match p {
        Panel::Boxes { groups, .. } if groups.len() > 1 => LEFT + RIGHT + 96.0 * groups.len() as f64,
        _ => PANEL_W,
    }
}

fn axes(s: &mut String, f: &Frame, title: &str, y_label: &str) {
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        f.x0 + f.w / 2.0,
        f.y0 - 12.0,
        esc(title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333"/>"##,
        f.x0, f.y0, f.w, f.h
    );
    for t in nice_ticks(f.lo, f.hi, 6) {
        let y = f.y(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"##,
            f.x0,
            f.x0 + f.w,
            f.x0 - 4.0,
            y + 3.5,
            fmt_tick(t)
        );
    }
    let (lx, ly) = (f.x0 - 48.0, f.y0 + f.h / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{lx:.1}" y="{ly:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {lx:.1} {ly:.1})">{}</text>"#,
        esc(y_label)
    );
}

fn draw_curves(s: &mut String, ox: f64, title: &str, y_label: &str, series: &[(String, &'static str, Curve)]) {
    let len = series.iter().map(|(_, _, c)| c.mean.len()).max().unwrap_or(1).max(2);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, _, c) in series {
        for (m, v) in c.mean.iter().zip(&c.variance) {
            lo = lo.min(m - v);
            hi = hi.max(m + v);
        }
    }
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.04 * (hi - lo);
    let f = Frame {
        x0: ox + LEFT,
        y0: TOP,
        w: PANEL_W - LEFT - RIGHT,
        h: PANEL_H - TOP - BOTTOM,
        lo: lo - pad,
        hi: hi + pad,
    };
    axes(s, &f, title, y_label);
    let x = |k: usize| f.x0 + k as f64 / (len - 1) as f64 * f.w;
    for t in nice_ticks(1.0, len as f64, 5) {
        let xp = x(t as usize - 1);
        let _ = writeln!(
            s,
            r#"<text x="{xp:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
            f.y0 + f.h + 14.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">objective evaluations</text>"#,
        f.x0 + f.w / 2.0,
        f.y0 + f.h + 32.0
    );
    for (name, col, c) in series {
        let mut band = String::new();
        for (k, (m, v)) in c.mean.iter().zip(&c.variance).enumerate() {
            let _ = write!(band, "{:.2},{:.2} ", x(k), f.y(m + v));
        }
        for (k, (m, v)) in c.mean.iter().zip(&c.variance).enumerate().rev() {
            let _ = write!(band, "{:.2},{:.2} ", x(k), f.y(m - v));
        }
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{col}" fill-opacity="0.2" stroke="none"><title>{} mean ± variance</title></polygon>"#,
            band.trim_end(),
            esc(name)
        );
        let line: Vec<String> = c.mean.iter().enumerate().map(|(k, m)| format!("{:.2},{:.2}", x(k), f.y(*m))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="1.5"><title>{}</title></polyline>"#,
            line.join(" "),
            esc(name)
        );
    }
    // Legend below the axis label.
    for (k, (name, col, c)) in series.iter().enumerate() {
        let lx = f.x0 + (k % 3) as f64 * (f.w / 3.0);
        let ly = f.y0 + f.h + 52.0 + (k / 3) as f64 * 16.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.1}" y="{:.1}" width="14" height="8" fill="{col}"/><text x="{:.1}" y="{ly:.1}" font-size="11">{} (n={})</text>"#,
            ly - 8.0,
            lx + 18.0,
            esc(name),
            c.runs
        );
    }
}

fn draw_boxes(s: &mut String, ox: f64, width: f64, title: &str, y_label: &str, groups: &[(String, Vec<BoxItem>)]) {
    let f = Frame {
        x0: ox + LEFT,
        y0: TOP,
        w: width - LEFT - RIGHT,
        h: PANEL_H - TOP - BOTTOM,
        lo: 0.0,
        hi: 1.05,
    };
    axes(s, &f, title, y_label);
    let slot_w = f.w / groups.len().max(1) as f64;
    let grouped = groups.len() > 1;
    for (g, (label, boxes)) in groups.iter().enumerate() {
        let gx = f.x0 + g as f64 * slot_w;
        let bw = slot_w / (boxes.len() as f64 + 1.0);
        if grouped {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
                gx + slot_w / 2.0,
                f.y0 + f.h + 14.0,
                esc(label)
            );
        }
        for (k, b) in boxes.iter().enumerate() {
            let cx = gx + bw * (k as f64 + 1.0);
            let half = bw * 0.35;
            let st = &b.stats;
            let col = b.color;
            let _ = writeln!(
                s,
                r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="{col}"/>"#,
                f.y(st.whisker_low),
                f.y(st.whisker_high)
            );
            for w in [st.whisker_low, st.whisker_high] {
                let _ = writeln!(
                    s,
                    r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{col}"/>"#,
                    cx - half / 2.0,
                    f.y(w),
                    cx + half / 2.0,
                    f.y(w)
                );
            }
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{col}" fill-opacity="0.35" stroke="{col}"><title>{}: median {:.4}, q1 {:.4}, q3 {:.4}</title></rect>"#,
                cx - half,
                f.y(st.q3),
                2.0 * half,
                (f.y(st.q1) - f.y(st.q3)).max(0.5),
                esc(&b.label),
                st.median,
                st.q1,
                st.q3
            );
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#000" stroke-width="2"/>"##,
                cx - half,
                f.y(st.median),
                cx + half,
                f.y(st.median)
            );
            for o in &st.outliers {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{cx:.1}" cy="{:.1}" r="2" fill="none" stroke="{col}"/>"#,
                    f.y(*o)
                );
            }
            // Mean and variance beneath the box; grouped panels stack one
            // row per box under the group label.
            if grouped {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="middle" fill="{col}">{:.3} ({:.4})</text>"#,
                    gx + slot_w / 2.0,
                    f.y0 + f.h + 27.0 + k as f64 * 11.0,
                    st.summary.mean,
                    st.summary.variance
                );
            } else {
                let base = f.y0 + f.h + 16.0;
                let lines = [
                    (b.label.clone(), "#000"),
                    (format!("{:.3}", st.summary.mean), col),
                    (format!("({:.4})", st.summary.variance), col),
                ];
                for (i, (text, fill)) in lines.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        r#"<text x="{cx:.1}" y="{:.1}" font-size="11" text-anchor="middle" fill="{fill}">{}</text>"#,
                        base + i as f64 * 14.0,
                        esc(text)
                    );
                }
            }
        }
    }
    if grouped {
        let names: Vec<(&str, &str)> = groups
            .iter()
            .flat_map(|(_, b)| b.iter().map(|x| (x.label.as_str(), x.color)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for (k, (name, col)) in names.iter().enumerate() {
            let lx = f.x0 + k as f64 * 140.0;
            let ly = f.y0 + f.h + 78.0;
            let _ = writeln!(
                s,
                r#"<rect x="{lx:.1}" y="{:.1}" width="14" height="8" fill="{col}"/><text x="{:.1}" y="{ly:.1}" font-size="11">{}</text>"#,
                ly - 8.0,
                lx + 18.0,
                esc(name)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end">mean (variance) beneath each box</text>"#,
            f.x0 + f.w,
            f.y0 + f.h + 94.0
        );
    } else {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end">mean (variance) beneath each box</text>"#,
            f.x0 + f.w,
            f.y0 + f.h + 70.0
        );
    }
}

/// Figure identifiers accepted by [`standard_figures`] filters.
pub const FIGURE_GROUPS: [&str; 4] = ["convergence", "ratio", "per-hd", "appendix"];

/// The fixed figure list: full and accelerated convergence, ratio and
/// per-HD figures, then the two appendix figures (random baseline boxes
/// and transfer convergence by HD).
pub fn standard_figures(dir: &Path, circuits: &[CircuitKind]) -> Vec<(&'static str, FigureSpec)> {
    let fig = |kind, name: &str, title: &str, variants: Vec<Variant>| FigureSpec {
        kind,
        title: title.to_string(),
        circuits: circuits.to_vec(),
        variants,
        metric: Metric::Argmax,
        path: dir.join(name),
    };
    use FigureKind::*;
    use Variant::*;
    vec![
        ("convergence", fig(ConvergenceCurves, "convergence_full.svg", "Convergence, full budget", vec![PostTl, Standard])),
        ("ratio", fig(RatioBoxplot, "ratio_full.svg", "Approximation ratios, full budget", vec![PostTl, Standard])),
        ("per-hd", fig(PerHdBoxplot, "per_hd_full.svg", "Approximation ratio by HD, full budget", vec![PostTl, Standard])),
        ("convergence", fig(ConvergenceCurves, "convergence_accel.svg", "Convergence, accelerated budget", vec![AccelPostTl, AccelStandard])),
        ("ratio", fig(RatioBoxplot, "ratio_accel.svg", "Approximation ratios, accelerated budget", vec![AccelPostTl, AccelStandard])),
        ("per-hd", fig(PerHdBoxplot, "per_hd_accel.svg", "Approximation ratio by HD, accelerated budget", vec![AccelPostTl, AccelStandard])),
        ("appendix", fig(RatioBoxplot, "appendix_random.svg", "Random initialisation against near-zero and transfer", vec![Random, Standard, PostTl])),
        ("appendix", fig(ConvergenceByHd, "appendix_convergence_by_hd.svg", "Transfer convergence by HD", vec![PostTl])),
    ]
}

/// Text table plus its CSV twin.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryTable {
    pub text: String,
    pub csv: String,
}

/// Per (circuit, variant): ratio mean/variance, mean evaluations, and the
/// instance-level comparison against the variant's baseline. `budgets` is
/// `(maxiter_accel, maxiter_full)` for the nominal reduction line.
pub fn summary_table(rows: &[ResultRow], traces: &Traces, budgets: Option<(usize, usize)>) -> Result<SummaryTable> {
    let present: BTreeSet<Selection> = rows
        .iter()
        .filter(|r| !r.is_failed())
        .map(|r| Selection::new(r.circuit, r.variant))
        .collect();
    if present.is_empty() {
        return Err(Error::domain("no completed runs to summarize"));
    }
    let header = [
        "circuit", "variant", "budget", "n", "mean_ratio", "var_ratio", "mean_ratio_expect", "mean_evals", "baseline",
        "wins", "ties", "losses", "gap_pp",
    ];
    let mut table: Vec<Vec<String>> = Vec::new();
    let mut excluded = 0;
    for sel in &present {
        let s = summarize(rows, traces, *sel, Metric::Argmax)?;
        let expect = summarize(rows, traces, *sel, Metric::Expect)?;
        let mut line = vec![
            sel.circuit.to_string(),
            sel.variant.to_string(),
            if sel.variant.is_accel() { "accel" } else { "full" }.to_string(),
            s.ratio.summary.count.to_string(),
            format!("{:.4}", s.ratio.summary.mean),
            format!("{:.4}", s.ratio.summary.variance),
            format!("{:.4}", expect.ratio.summary.mean),
            format!("{:.1}", s.mean_evals),
        ];
        let base = sel.variant.baseline().map(|v| Selection::new(sel.circuit, v));
        match base.filter(|b| present.contains(b)) {
            Some(b) => {
                let agg = aggregate(rows, traces, *sel, b, Metric::Argmax)?;
                excluded = excluded.max(agg.excluded_incomplete);
                line.push(b.variant.to_string());
                match agg.comparison {
                    Some(w) => line.extend([w.wins.to_string(), w.ties.to_string(), w.losses.to_string()]),
                    None => line.extend(["-".to_string(), "-".to_string(), "-".to_string()]),
                }
                line.push(format!("{:+.2}", 100.0 * agg.mean_gap()));
            }
            None => line.extend(std::iter::repeat("-".to_string()).take(5)),
        }
        table.push(line);
    }

    let mut notes = Vec::new();
    for circuit in CircuitKind::ALL {
        let a = Selection::new(circuit, Variant::AccelPostTl);
        let b = Selection::new(circuit, Variant::Standard);
        if present.contains(&a) && present.contains(&b) {
            let agg = aggregate(rows, traces, a, b, Metric::Argmax)?;
            let mut note = format!(
                "{circuit}: evaluation reduction accel_post_tl vs standard = {:.1}%",
                100.0 * agg.eval_reduction
            );
            if let Some((accel, full)) = budgets {
                let _ = write!(note, " (nominal {:.1}%)", 100.0 * (1.0 - accel as f64 / full as f64));
            }
            notes.push(note);
        }
    }
    if excluded > 0 {
        notes.push(format!("{excluded} incomplete pairs excluded"));
    }

    let mut csv_out = csv::Writer::from_writer(Vec::new());
    csv_out.write_record(header)?;
    for line in &table {
        csv_out.write_record(line)?;
    }
    let csv = String::from_utf8(csv_out.into_inner().map_err(|e| Error::domain(e.to_string()))?)
        .expect("csv output is utf-8");

    let widths: Vec<usize> = (0..header.len())
        .map(|k| table.iter().map(|l| l[k].len()).chain([header[k].len()]).max().unwrap_or(0))
        .collect();
    let fmt_line = |cells: &[&str]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut text = fmt_line(&header);
    text.push('\n');
    for line in &table {
        text.push_str(&fmt_line(&line.iter().map(String::as_str).collect::<Vec<_>>()));
        text.push('\n');
    }
    for note in notes {
        text.push_str(&note);
        text.push('\n');
    }
    Ok(SummaryTable { text, csv })
}
