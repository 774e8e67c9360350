//! Time series over completed traces and checks of the monotonicity,
//! barrier and area laws they should obey.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::barrier::{BarrierCurve, BarrierKind};
use crate::curve::ProfileGraph;
use crate::error::DiagnosticsError;
use crate::flow::{FlowState, FlowTrace};
use crate::measure::{arcs_above, count_critical_points, count_intersections, default_plateau_tol, enclosed_area_above, total_turning};
use crate::shoot::ShootResult;

/// Tolerance for treating a barrier and a curve as touching.
const CONTACT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub law: String,
    pub magnitude: f64,
}

/// Intersection counts of a trace against one barrier; `None` where the
/// barrier does not exist or the count is not transverse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierSeries {
    pub kind: BarrierKind,
    pub counts: Vec<Option<usize>>,
}

/// Area of `Ω_{c,t} = {r > c}` inside the enclosed region, with the data
/// the area-rate estimate needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaSeries {
    pub c: f64,
    pub areas: Vec<f64>,
    /// Centered differences at interior snapshots (`None` at the ends).
    pub rates: Vec<Option<f64>>,
    /// Number of arcs of the profile above `r = c`.
    pub arcs: Vec<usize>,
    /// Largest `|signed turning| / 2π` over those arcs.
    pub max_turning: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub times: Vec<f64>,
    pub neck: Vec<f64>,
    pub max_height: Vec<f64>,
    pub girth: Vec<f64>,
    pub width: Vec<f64>,
    pub components: Vec<usize>,
    pub maxima: Vec<usize>,
    pub minima: Vec<usize>,
    pub barriers: Vec<BarrierSeries>,
    pub areas: Vec<AreaSeries>,
    pub violations: Vec<Violation>,
}

impl SeriesReport {
    /// Flat CSV with one row per snapshot.
    pub fn to_csv(&self) -> String {
        let mut head = vec!["t", "m", "M", "girth", "width", "components", "maxima", "minima"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        for b in &self.barriers {
            head.push(format!("sturm_{}", b.kind.as_str()));
        }
        for a in &self.areas {
            head.push(format!("area_c{}", a.c));
            head.push(format!("rate_c{}", a.c));
        }
        let mut out = head.join(",");
        out.push('\n');
        for k in 0..self.times.len() {
            let mut row = vec![
                fmt(self.times[k]),
                fmt(self.neck[k]),
                fmt(self.max_height[k]),
                fmt(self.girth[k]),
                fmt(self.width[k]),
                self.components[k].to_string(),
                self.maxima[k].to_string(),
                self.minima[k].to_string(),
            ];
            for b in &self.barriers {
                row.push(b.counts[k].map(|c| c.to_string()).unwrap_or_default());
            }
            for a in &self.areas {
                row.push(fmt(a.areas[k]));
                row.push(a.rates[k].map(fmt).unwrap_or_default());
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Fixed float formatting shared by all CSV output.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

fn width(state: &FlowState) -> f64 {
    let lo = state.components.iter().map(|c| c.x_range().0).fold(f64::INFINITY, f64::min);
    let hi = state.components.iter().map(|c| c.x_range().1).fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() { hi - lo } else { 0.0 }
}

fn area_above(comps: &[ProfileGraph], c: f64) -> f64 {
    comps.iter().filter_map(|g| enclosed_area_above(g, c).ok()).sum()
}

/// Arcs above `r = c` and their largest normalized turning.
fn clipped_turning(comps: &[ProfileGraph], c: f64) -> (usize, f64) {
    let mut count = 0;
    let mut worst = 0.0_f64;
    for g in comps {
        for arc in arcs_above(g.nodes(), c) {
            count += 1;
            worst = worst.max(turning_number(&arc));
        }
    }
    (count, worst)
}

/// `|total signed turning| / 2π` of an open polyline.
pub fn turning_number(pts: &[crate::curve::Point]) -> f64 {
    total_turning(pts).abs() / TAU
}

/// Flags strict increases of a count series.
fn increases(times: &[f64], series: &[Option<usize>], law: &str, out: &mut Vec<Violation>) {
    let mut prev: Option<usize> = None;
    for (k, v) in series.iter().enumerate() {
        if let (Some(p), Some(c)) = (prev, *v) {
            if c > p {
                out.push(Violation {
                    t: times[k],
                    law: law.to_string(),
                    magnitude: (c - p) as f64,
                });
            }
        }
        if v.is_some() {
            prev = *v;
        }
    }
}

/// Series of a trace at its snapshot times, with Sturmian counts against
/// each barrier and clipped areas for each `c`.
///
/// Increases of the critical-point total or of any exact barrier's
/// intersection count are listed as violations.
pub fn extract_series(trace: &FlowTrace, barriers: &[BarrierCurve], c_values: &[f64]) -> SeriesReport {
    let states = trace.states();
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    let mut report = SeriesReport {
        times: times.clone(),
        neck: Vec::new(),
        max_height: Vec::new(),
        girth: Vec::new(),
        width: Vec::new(),
        components: Vec::new(),
        maxima: Vec::new(),
        minima: Vec::new(),
        barriers: Vec::new(),
        areas: Vec::new(),
        violations: Vec::new(),
    };
    for s in &states {
        report.neck.push(s.neck_value());
        let top = s.max_height();
        report.max_height.push(top);
        report.girth.push(top);
        report.width.push(width(s));
        report.components.push(s.components.len());
        let (mut maxima, mut minima) = (0, 0);
        for g in &s.components {
            let cp = count_critical_points(g, default_plateau_tol(g));
            maxima += cp.maxima;
            minima += cp.minima;
        }
        report.maxima.push(maxima);
        report.minima.push(minima);
    }
    let totals: Vec<Option<usize>> = report
        .maxima
        .iter()
        .zip(&report.minima)
        .map(|(a, b)| Some(a + b))
        .collect();
    increases(&times, &totals, "critical-points", &mut report.violations);

    for b in barriers {
        let counts: Vec<Option<usize>> = states
            .iter()
            .map(|s| {
                let curve = b.profile(s.t).ok()?;
                s.components.iter().try_fold(0, |acc, g| {
                    count_intersections(g, &curve, CONTACT_TOL).ok().map(|c| acc + c.crossings)
                })
            })
            .collect();
        if b.kind.is_exact() {
            increases(&times, &counts, &format!("sturm-{}", b.kind.as_str()), &mut report.violations);
        }
        report.barriers.push(BarrierSeries { kind: b.kind, counts });
    }

    for &c in c_values {
        let areas: Vec<f64> = states.iter().map(|s| area_above(&s.components, c)).collect();
        let m = areas.len();
        let rates = (0..m)
            .map(|k| {
                (k > 0 && k + 1 < m).then(|| (areas[k + 1] - areas[k - 1]) / (times[k + 1] - times[k - 1]))
            })
            .collect();
        let (arcs, max_turning) = states.iter().map(|s| clipped_turning(&s.components, c)).unzip();
        report.areas.push(AreaSeries {
            c,
            areas,
            rates,
            arcs,
            max_turning,
        });
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaRateCheck {
    pub c: f64,
    pub w_slab: f64,
    /// Largest `|rate| / bound` over the checked snapshots.
    pub worst_ratio: f64,
    pub violations: Vec<Violation>,
    pub passes: bool,
}

/// Checks `|d/dt Area(Ω_{c,t})| < 2π + C_{c,W}` on the discrete rates,
/// with `C_{c,W} = (n - 1) W k / c` for `k` arcs above `r = c` and 10% slack.
///
/// Snapshots neighbouring a topology change are skipped because the
/// centered difference straddles it.
pub fn area_rate_check(report: &SeriesReport, c: f64, w_slab: f64, n: usize) -> Result<AreaRateCheck, DiagnosticsError> {
    let series = report
        .areas
        .iter()
        .find(|a| a.c == c)
        .ok_or_else(|| DiagnosticsError::EstimateInapplicable(format!("no area series for c = {c}")))?;
    if !(c > 0.0) {
        return Err(DiagnosticsError::EstimateInapplicable(format!("c = {c} must be positive")));
    }
    if let Some(k) = report.width.iter().position(|&w| w > w_slab * (1.0 + 1e-9)) {
        return Err(DiagnosticsError::EstimateInapplicable(format!(
            "width {} exceeds the slab width {w_slab} at t = {}",
            report.width[k], report.times[k]
        )));
    }
    if let Some(k) = series.max_turning.iter().position(|&w| w >= 1.0) {
        return Err(DiagnosticsError::EstimateInapplicable(format!(
            "turning number {} >= 1 at t = {}",
            series.max_turning[k], report.times[k]
        )));
    }
    let mut violations = Vec::new();
    let mut worst = 0.0_f64;
    let m = report.times.len();
    for k in 1..m.saturating_sub(1) {
        let Some(rate) = series.rates[k] else { continue };
        if report.components[k - 1] != report.components[k + 1] || series.arcs[k - 1] != series.arcs[k + 1] {
            continue;
        }
        let arcs = series.arcs[k - 1..=k + 1].iter().copied().max().unwrap_or(0);
        let bound = TAU + (n as f64 - 1.0) * w_slab * arcs as f64 / c;
        worst = worst.max(rate.abs() / bound);
        if rate.abs() > 1.1 * bound {
            violations.push(Violation {
                t: report.times[k],
                law: format!("area-rate c={c}"),
                magnitude: rate.abs() - bound,
            });
        }
    }
    Ok(AreaRateCheck {
        c,
        w_slab,
        worst_ratio: worst,
        passes: violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckSpan {
    pub s: f64,
    pub min: f64,
    pub max: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckComparison {
    pub s_a: f64,
    pub s_b: f64,
    /// Differences of the span endpoints between the two runs.
    pub min_gap: f64,
    pub max_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckReport {
    pub band: (f64, f64),
    pub spans: Vec<NeckSpan>,
    pub comparison: Vec<NeckComparison>,
    pub passes: bool,
}

/// Span of the neck `m(t)` over each run's full recentered trace against `band`.
pub fn neck_boundedness_check(results: &[ShootResult], band: (f64, f64)) -> NeckReport {
    let spans: Vec<NeckSpan> = results
        .iter()
        .filter_map(|r| {
            let trace = r.trace()?;
            let (min, max) = trace
                .states()
                .iter()
                .map(|s| s.neck_value())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            Some(NeckSpan {
                s: r.s,
                min,
                max,
                passes: min >= band.0 && max <= band.1,
            })
        })
        .collect();
    let comparison = spans
        .windows(2)
        .map(|w| NeckComparison {
            s_a: w[0].s,
            s_b: w[1].s,
            min_gap: w[1].min - w[0].min,
            max_gap: w[1].max - w[0].max,
        })
        .collect();
    NeckReport {
        band,
        passes: spans.len() == results.len() && spans.iter().all(|s| s.passes),
        spans,
        comparison,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Point;

    #[test]
    fn increases_are_flagged_once_per_jump() {
        let mut v = Vec::new();
        increases(&[0.0, 1.0, 2.0, 3.0], &[Some(3), None, Some(4), Some(2)], "x", &mut v);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].t, 2.0);
    }

    #[test]
    fn spiral_turning_exceeds_one() {
        let pts: Vec<Point> = (0..400)
            .map(|i| {
                let th = 3.0 * TAU * i as f64 / 399.0;
                let rad = 1.0 + 0.1 * th;
                Point::new(rad * th.cos(), 5.0 + rad * th.sin())
            })
            .collect();
        assert!(turning_number(&pts) > 2.9);
    }
}
