//! SVG figures. Every plot reads back the CSV/JSON artifacts of the run.

use std::path::Path;

use morphboat_core::sim::trials::DockingReport;
use morphboat_core::sim::SimLog;
use morphboat_core::sysid::IdentifiedSet;
use morphboat_core::{Error, Result};
use plotters::prelude::*;

use crate::manifest::io_err;

const SIZE: (u32, u32) = (800, 600);
const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

fn draw_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Log(format!("plot: {e}"))
}

fn read_log(path: &Path) -> Result<SimLog> {
    let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    SimLog::read_csv(f)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Log(format!("{}: {e}", path.display())))
}

/// `t,x,y,psi` rows.
pub fn read_reference_csv(path: &Path) -> Result<Vec<[f64; 4]>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize::<[f64; 4]>()
        .map(|row| row.map_err(|e| Error::Log(format!("{}: {e}", path.display()))))
        .collect()
}

/// Square bounds around the points with a 5 % margin.
fn equal_bounds(
    points: impl Iterator<Item = (f64, f64)>,
) -> (std::ops::Range<f64>, std::ops::Range<f64>) {
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (-1.0..1.0, -1.0..1.0);
    }
    let half = 0.5 * (x1 - x0).max(y1 - y0).max(0.1) * 1.05;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    ((cx - half)..(cx + half), (cy - half)..(cy + half))
}

/// Top view of logged paths over an optional reference.
pub fn paths(
    svg: &Path,
    title: &str,
    logs: &[(String, &Path)],
    reference: Option<&Path>,
) -> Result<()> {
    let reference = reference.map(read_reference_csv).transpose()?;
    let logs: Vec<(String, SimLog)> = logs
        .iter()
        .map(|(label, p)| read_log(p).map(|l| (label.clone(), l)))
        .collect::<Result<_>>()?;
    let (xr, yr) = equal_bounds(
        logs.iter()
            .flat_map(|(_, l)| l.samples.iter().map(|s| (s.q[0], s.q[1])))
            .chain(reference.iter().flatten().map(|r| (r[1], r[2]))),
    );

    let root = SVGBackend::new(svg, (SIZE.1, SIZE.1)).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(35)
        .y_label_area_size(45)
        .build_cartesian_2d(xr, yr)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("x [m]")
        .y_desc("y [m]")
        .draw()
        .map_err(draw_err)?;
    if let Some(r) = &reference {
        chart
            .draw_series(LineSeries::new(
                r.iter().map(|p| (p[1], p[2])),
                BLACK.stroke_width(2),
            ))
            .map_err(draw_err)?
            .label("reference")
            .legend(|(x, y)| PathElement::new([(x, y), (x + 16, y)], BLACK));
    }
    for (i, (label, log)) in logs.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(
                log.samples.iter().map(|s| (s.q[0], s.q[1])),
                c,
            ))
            .map_err(draw_err)?
            .label(label.as_str())
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 16, y)], c));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

/// Residual before and after regression at each length, log scale.
pub fn residuals(svg: &Path, report: &Path) -> Result<()> {
    let set: IdentifiedSet = read_json(report)?;
    let floor = 1e-30;
    let lg = |v: f64| v.max(floor).log10();
    let values: Vec<f64> = set
        .entries
        .iter()
        .flat_map(|e| [lg(e.residual_pre), lg(e.residual_post)])
        .collect();
    let lo = values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .min(0.0)
        - 0.5;
    let hi = values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(lo + 1.0)
        + 0.5;

    let root = SVGBackend::new(svg, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("velocity residual per expansion length", ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(35)
        .y_label_area_size(55)
        .build_cartesian_2d(-0.05f64..0.55, lo..hi)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("expansion l [m]")
        .y_desc("log10 residual")
        .draw()
        .map_err(draw_err)?;
    for (k, (label, c)) in [("identified", PALETTE[0]), ("after regression", PALETTE[1])]
        .into_iter()
        .enumerate()
    {
        let pts: Vec<(f64, f64)> = set
            .entries
            .iter()
            .map(|e| {
                (
                    e.l + (k as f64 - 0.5) * 0.01,
                    lg(if k == 0 {
                        e.residual_pre
                    } else {
                        e.residual_post
                    }),
                )
            })
            .collect();
        chart
            .draw_series(pts.iter().map(|&(x, y)| Circle::new((x, y), 5, c.filled())))
            .map_err(draw_err)?
            .label(label)
            .legend(move |(x, y)| Circle::new((x + 8, y), 5, c.filled()));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

/// Identified parameters (markers) and fitted functions (lines), each
/// family normalized by its fitted value at l = 0.
pub fn parameters(svg: &Path, report: &Path) -> Result<()> {
    let set: IdentifiedSet = read_json(report)?;
    let p = &set.polynomials;
    let families = [
        ("m1 = m2", p.m12),
        ("m3", p.m3),
        ("Xu = Yv", p.xuv),
        ("Nr", p.nr),
    ];
    let point = |i: usize, e: &morphboat_core::sysid::LengthResult| match i {
        0 => 0.5 * (e.params.m1 + e.params.m2),
        1 => e.params.m3,
        2 => 0.5 * (e.params.xu + e.params.yv),
        _ => e.params.nr,
    };
    let (mut lo, mut hi): (f64, f64) = (1.0, 1.0);
    for (i, (_, q)) in families.iter().enumerate() {
        let base = q.eval(0.0);
        for v in set
            .entries
            .iter()
            .map(|e| point(i, e) / base)
            .chain([q.eval(0.5) / base])
        {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = 0.05 * (hi - lo).max(0.1);

    let root = SVGBackend::new(svg, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(
            "identified parameters and fitted functions",
            ("sans-serif", 18),
        )
        .margin(12)
        .x_label_area_size(35)
        .y_label_area_size(55)
        .build_cartesian_2d(-0.02f64..0.52, (lo - pad)..(hi + pad))
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("expansion l [m]")
        .y_desc("value / value at l = 0")
        .draw()
        .map_err(draw_err)?;
    for (i, (label, q)) in families.iter().enumerate() {
        let c = PALETTE[i];
        let base = q.eval(0.0);
        chart
            .draw_series(LineSeries::new(
                (0..=50)
                    .map(|k| k as f64 * 0.01)
                    .map(|l| (l, q.eval(l) / base)),
                c,
            ))
            .map_err(draw_err)?
            .label(*label)
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 16, y)], c));
        chart
            .draw_series(
                set.entries
                    .iter()
                    .map(|e| Circle::new((e.l, point(i, e) / base), 4, c.filled())),
            )
            .map_err(draw_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(draw_err)?;
    root.present().map_err(draw_err)
}

/// Time to dock of every captured trial, one column per report, with the
/// median and quartiles marked.
pub fn docking(svg: &Path, reports: &[&Path]) -> Result<()> {
    let reports: Vec<DockingReport> = reports
        .iter()
        .map(|p| read_json(p))
        .collect::<Result<_>>()?;
    let t_max = reports
        .iter()
        .flat_map(|r| r.times.iter().cloned())
        .fold(10.0f64, f64::max);
    let n = reports.len().max(1) as f64;

    let root = SVGBackend::new(svg, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("time to dock", ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(35)
        .y_label_area_size(55)
        .build_cartesian_2d(-0.5f64..n - 0.5, 0.0f64..t_max * 1.1)
        .map_err(draw_err)?;
    let labels: Vec<String> = reports
        .iter()
        .map(|r| format!("{} / {} ({:.0}%)", r.form, r.water, 100.0 * r.success_rate))
        .collect();
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(reports.len().max(1))
        .x_label_formatter(&|x| {
            let i = x.round();
            if (x - i).abs() < 1e-6 && i >= 0.0 {
                labels.get(i as usize).cloned().unwrap_or_default()
            } else {
                String::new()
            }
        })
        .y_desc("time [s]")
        .draw()
        .map_err(draw_err)?;
    for (i, r) in reports.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let x = i as f64;
        let m = r.times.len();
        chart
            .draw_series(r.times.iter().enumerate().map(|(k, &t)| {
                let jitter = if m > 1 {
                    0.2 * (k as f64 / (m - 1) as f64 - 0.5)
                } else {
                    0.0
                };
                Circle::new((x + jitter, t), 3, c.mix(0.6).filled())
            }))
            .map_err(draw_err)?;
        if m > 0 {
            let mut sorted = r.times.clone();
            sorted.sort_by(f64::total_cmp);
            let q = |p: f64| sorted[((m - 1) as f64 * p).round() as usize];
            chart
                .draw_series([Rectangle::new(
                    [(x - 0.2, q(0.25)), (x + 0.2, q(0.75))],
                    c.stroke_width(2),
                )])
                .map_err(draw_err)?;
            chart
                .draw_series([PathElement::new(
                    [(x - 0.2, q(0.5)), (x + 0.2, q(0.5))],
                    c.stroke_width(3),
                )])
                .map_err(draw_err)?;
        }
    }
    root.present().map_err(draw_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_are_square_and_cover_points() {
        let (x, y) = equal_bounds([(0.0, 0.0), (2.0, 1.0)].into_iter());
        assert!((x.end - x.start - (y.end - y.start)).abs() < 1e-12);
        assert!(x.start < 0.0 && x.end > 2.0 && y.start < 0.0 && y.end > 1.0);
        assert_eq!(equal_bounds(std::iter::empty()).0, -1.0..1.0);
    }
}
