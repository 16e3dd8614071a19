//! Tables and plots derived from datasets and training reports.
//!
//! Every CSV uses the same dialect as the dataset reader, and every number is
//! printed with its shortest round-trip representation, so identical inputs
//! always give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dataset::{finish_csv, Dataset, Variable, VARIABLE_COUNT};
use crate::network::input_transform;
use crate::trainer::{SweepPoint, TrainReport};
use crate::{Error, Result, Scalar};

/// Marker written instead of an iteration number for districts that never
/// saturated.
pub const UNCONVERGED: &str = "unconverged";

/// Sigmoid value rounded to four decimals, stored as an integer count of 1e-4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bucket(pub i64);

impl Bucket {
    pub fn of(v: f64) -> Self {
        Bucket((v * 1e4).round() as i64)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 1e4
    }

    pub fn label(self) -> String {
        format!("{}.{:04}", self.0 / 10_000, self.0 % 10_000)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucketCounts<T> {
    pub counts: [usize; VARIABLE_COUNT],
    /// Distinct unrounded sigmoid values that fell into this bucket, ascending.
    pub exact_values: Vec<T>,
}

/// Per-variable counts of input sigmoid values, bucketed at four decimals.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTable<T> {
    pub record_count: usize,
    pub buckets: BTreeMap<Bucket, BucketCounts<T>>,
}

impl<T: Scalar> FrequencyTable<T> {
    /// Cells across all six columns whose rounded sigmoid equals `value`.
    pub fn count(&self, value: f64) -> usize {
        self.buckets
            .get(&Bucket::of(value))
            .map_or(0, |b| b.counts.iter().sum())
    }

    pub fn column_count(&self, value: f64, v: Variable) -> usize {
        self.buckets
            .get(&Bucket::of(value))
            .map_or(0, |b| b.counts[v.index()])
    }

    pub fn column_total(&self, v: Variable) -> usize {
        self.buckets.values().map(|b| b.counts[v.index()]).sum()
    }

    pub fn total(&self) -> usize {
        self.buckets
            .values()
            .map(|b| b.counts.iter().sum::<usize>())
            .sum()
    }

    /// Buckets from highest to lowest value, then a `total` row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["sigmoid_value_4dp".to_string(), "exact_values".to_string()];
        header.extend(Variable::ALL.iter().map(|v| v.column().to_string()));
        header.push("total".into());
        w.write_record(&header)?;

        for (bucket, b) in self.buckets.iter().rev() {
            let exact: Vec<String> = b.exact_values.iter().map(|v| v.to_string()).collect();
            let mut row = vec![bucket.label(), exact.join(";")];
            row.extend(b.counts.iter().map(usize::to_string));
            row.push(b.counts.iter().sum::<usize>().to_string());
            w.write_record(&row)?;
        }
        let mut row = vec!["total".to_string(), String::new()];
        row.extend(
            Variable::ALL
                .iter()
                .map(|v| self.column_total(*v).to_string()),
        );
        row.push(self.total().to_string());
        w.write_record(&row)?;
        Ok(finish_csv(w))
    }
}

/// Applies the input transform to every record and tabulates the results.
pub fn sigmoid_frequency<T: Scalar>(d: &Dataset<T>) -> Result<FrequencyTable<T>> {
    d.ensure_preprocessed()?;
    let mut buckets: BTreeMap<Bucket, BucketCounts<T>> = BTreeMap::new();
    for r in &d.records {
        let x = input_transform(r)?;
        for (j, s) in x.into_iter().enumerate() {
            let b = buckets
                .entry(Bucket::of(s.as_f64()))
                .or_insert_with(|| BucketCounts {
                    counts: [0; VARIABLE_COUNT],
                    exact_values: Vec::new(),
                });
            b.counts[j] += 1;
            if let Err(pos) = b
                .exact_values
                .binary_search_by(|probe| probe.partial_cmp(&s).expect("sigmoid is never NaN"))
            {
                b.exact_values.insert(pos, s);
            }
        }
    }
    Ok(FrequencyTable {
        record_count: d.len(),
        buckets,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow<T> {
    pub iteration: usize,
    pub variable: Variable,
    pub mean_error: T,
}

/// One row per (iteration, variable), iterations ascending.
pub fn error_curve<T: Scalar>(r: &TrainReport<T>) -> Result<Vec<ErrorRow<T>>> {
    ensure_iterations(r)?;
    Ok(r.per_iteration
        .iter()
        .flat_map(|it| {
            Variable::ALL.iter().map(move |v| ErrorRow {
                iteration: it.iteration,
                variable: *v,
                mean_error: it.mean_error[v.index()],
            })
        })
        .collect())
}

fn ensure_iterations<T>(r: &TrainReport<T>) -> Result<()> {
    if r.per_iteration.is_empty() {
        return Err(Error::Domain("training report has no iterations".into()));
    }
    Ok(())
}

/// `trace.csv`: the error curve with each district's `zs` for that iteration
/// appended as extra columns.
pub fn trace_csv<T: Scalar>(r: &TrainReport<T>) -> Result<String> {
    let rows = error_curve(r)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "iteration".to_string(),
        "variable".into(),
        "mean_error".into(),
    ];
    header.extend(r.districts.iter().map(|d| format!("zs:{d}")));
    w.write_record(&header)?;
    for row in rows {
        let it = &r.per_iteration[row.iteration - 1];
        let mut rec = vec![
            row.iteration.to_string(),
            row.variable.column().to_string(),
            row.mean_error.to_string(),
        ];
        rec.extend(it.zs.iter().map(|z| z.to_string()));
        w.write_record(&rec)?;
    }
    Ok(finish_csv(w))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow<T> {
    pub district: String,
    pub convergence_iteration: Option<usize>,
    pub final_zs: T,
}

/// First saturating iteration per district. Districts that never saturated
/// carry `None` rather than failing the whole table.
pub fn convergence_table<T: Scalar>(r: &TrainReport<T>) -> Result<Vec<ConvergenceRow<T>>> {
    ensure_iterations(r)?;
    Ok(r.districts
        .iter()
        .zip(&r.convergence_iteration)
        .zip(r.final_zs())
        .map(|((d, c), z)| ConvergenceRow {
            district: d.clone(),
            convergence_iteration: *c,
            final_zs: *z,
        })
        .collect())
}

pub fn convergence_csv<T: Scalar>(r: &TrainReport<T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["district", "convergence_iteration", "final_zs"])?;
    for row in convergence_table(r)? {
        let it = row
            .convergence_iteration
            .map_or_else(|| UNCONVERGED.to_string(), |n| n.to_string());
        w.write_record([row.district, it, row.final_zs.to_string()])?;
    }
    Ok(finish_csv(w))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow<T> {
    pub district: String,
    pub original: [T; VARIABLE_COUNT],
    pub predicted: [T; VARIABLE_COUNT],
    /// True iff all six pairs are bit-equal.
    pub exact_match: bool,
}

pub fn comparison_table<T: Scalar>(
    d: &Dataset<T>,
    outputs: &[[T; VARIABLE_COUNT]],
) -> Result<Vec<ComparisonRow<T>>> {
    if d.len() != outputs.len() {
        return Err(Error::Domain(format!(
            "{} districts but {} output rows",
            d.len(),
            outputs.len()
        )));
    }
    Ok(d.records
        .iter()
        .zip(outputs)
        .map(|(r, out)| ComparisonRow {
            district: r.name.clone(),
            original: r.values,
            predicted: *out,
            exact_match: r.values.iter().zip(out).all(|(a, b)| bit_equal(*a, *b)),
        })
        .collect())
}

// Equal non-NaN values of the same sign share a bit pattern.
fn bit_equal<T: Scalar>(a: T, b: T) -> bool {
    a == b && a.is_sign_negative() == b.is_sign_negative()
}

/// Percentage of rows flagged as exact matches (0 for an empty table).
pub fn match_percentage<T>(rows: &[ComparisonRow<T>]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let hits = rows.iter().filter(|r| r.exact_match).count();
    100.0 * hits as f64 / rows.len() as f64
}

/// Original and predicted columns side by side plus the match flag.
pub fn comparison_csv<T: Scalar>(rows: &[ComparisonRow<T>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["district".to_string()];
    header.extend(
        Variable::ALL
            .iter()
            .map(|v| format!("original_{}", v.column())),
    );
    header.extend(Variable::ALL.iter().map(|v| format!("ann_{}", v.column())));
    header.push("exact_match".into());
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.district.clone()];
        rec.extend(row.original.iter().map(|v| v.to_string()));
        rec.extend(row.predicted.iter().map(|v| v.to_string()));
        rec.push(row.exact_match.to_string());
        w.write_record(&rec)?;
    }
    Ok(finish_csv(w))
}

/// `sweep.csv`: one row per grid point with each district's convergence
/// iteration.
pub fn sweep_csv<T: Scalar>(districts: &[String], points: &[SweepPoint<T>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "initial_weight".to_string(),
        "iterations".into(),
        "stop_reason".into(),
    ];
    header.extend(districts.iter().cloned());
    w.write_record(&header)?;
    for p in points {
        let mut rec = vec![
            p.initial_weight.to_string(),
            p.iterations.to_string(),
            p.stop_reason.to_string(),
        ];
        rec.extend(
            p.convergence_iteration
                .iter()
                .map(|c| c.map_or_else(|| UNCONVERGED.to_string(), |n| n.to_string())),
        );
        w.write_record(&rec)?;
    }
    Ok(finish_csv(w))
}

/// A named polyline for [`render_svg`].
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Mean error per variable against iteration.
pub fn error_series<T: Scalar>(r: &TrainReport<T>) -> Vec<Series> {
    Variable::ALL
        .iter()
        .map(|v| Series {
            name: v.column().to_string(),
            points: r
                .per_iteration
                .iter()
                .map(|it| (it.iteration as f64, it.mean_error[v.index()].as_f64()))
                .collect(),
        })
        .collect()
}

/// Output sigmoid per district against iteration.
pub fn zs_series<T: Scalar>(r: &TrainReport<T>) -> Vec<Series> {
    r.districts
        .iter()
        .enumerate()
        .map(|(d, name)| Series {
            name: name.clone(),
            points: r
                .per_iteration
                .iter()
                .map(|it| (it.iteration as f64, it.zs[d].as_f64()))
                .collect(),
        })
        .collect()
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Data-to-pixel mapping of a chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Frame {
    /// Bounds of all points, widened where a range is degenerate.
    pub fn fit(series: &[Series]) -> Result<Self> {
        let mut pts = series.iter().flat_map(|s| s.points.iter());
        let Some(&(x0, y0)) = pts.next() else {
            return Err(Error::Domain("nothing to plot".into()));
        };
        let mut f = Frame {
            x_min: x0,
            x_max: x0,
            y_min: y0,
            y_max: y0,
        };
        for &(x, y) in pts {
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::Domain(format!("non-finite point ({x}, {y})")));
            }
            f.x_min = f.x_min.min(x);
            f.x_max = f.x_max.max(x);
            f.y_min = f.y_min.min(y);
            f.y_max = f.y_max.max(y);
        }
        if f.x_max == f.x_min {
            f.x_min -= 0.5;
            f.x_max += 0.5;
        }
        if f.y_max == f.y_min {
            let pad = if f.y_max == 0.0 {
                1.0
            } else {
                f.y_max.abs() * 1e-3
            };
            f.y_min -= pad;
            f.y_max += pad;
        }
        Ok(f)
    }

    pub fn x_px(&self, x: f64) -> f64 {
        MARGIN_LEFT
            + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    pub fn y_px(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Static line chart: x on the horizontal axis, one polyline per series.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Domain("render_svg needs at least one point".into()));
    }
    let f = Frame::fit(series)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} V{bottom} H{right}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let yv = f.y_min + (f.y_max - f.y_min) * k as f64 / 4.0;
        let xv = f.x_min + (f.x_max - f.x_min) * k as f64 / 4.0;
        let (py, px) = (f.y_px(yv), f.x_px(xv));
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            left - 6.0,
            py + 4.0,
            tick_label(yv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            px,
            bottom + 18.0,
            tick_label(xv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.3}" text-anchor="middle" transform="rotate(-90 16 {:.3})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(y_label)
    );

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", f.x_px(x), f.y_px(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(&ser.name)
        );
        let ly = top + 14.0 * i as f64;
        if ly < bottom {
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" fill="{color}">{}</text>"#,
                right + 10.0,
                ly + 4.0,
                escape(&ser.name)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.3e}")
    } else {
        let t = format!("{v:.6}");
        t.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}
