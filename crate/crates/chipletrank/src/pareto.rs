//! Correlation-level labeling of sweep scatters.
//!
//! Each scatter point gets a slack `d`: the smallest relaxation at which the
//! point stops being dominated, measured in units of the spread between the
//! bottom-left and top-right corner sets. Slack 0 means the point is on the
//! Pareto front; slack is bucketed into levels 10 (best) down to 0.

use crate::error::{Error, Result};
use crate::placer::{ScatterPoint, ScatterSet};

/// Dominance direction for front extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Minimize,
    Maximize,
}

fn dominates(a: &ScatterPoint, b: &ScatterPoint, dir: Direction) -> bool {
    let (ta, wa, tb, wb) = (a.temperature_c, a.wirelength_mm, b.temperature_c, b.wirelength_mm);
    match dir {
        Direction::Minimize => ta <= tb && wa <= wb && (ta < tb || wa < wb),
        Direction::Maximize => ta >= tb && wa >= wb && (ta > tb || wa > wb),
    }
}

fn front(points: &[ScatterPoint], dir: Direction) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|p| dominates(p, &points[i], dir)))
        .collect()
}

/// Indices of the Pareto-minimal set: points no other point beats in both
/// temperature and wirelength. Duplicate-coordinate points are all included.
pub fn pareto_front(points: &[ScatterPoint]) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::EmptyScatter);
    }
    Ok(front(points, Direction::Minimize))
}

/// The bottom-left (`P`) and top-right (`Q`) corner sets of a scatter, with
/// the per-objective spreads between their means.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerSets {
    /// Pareto-minimal indices.
    pub p: Vec<usize>,
    /// Pareto-maximal indices.
    pub q: Vec<usize>,
    pub mean_t_p: f64,
    pub mean_t_q: f64,
    pub mean_wl_p: f64,
    pub mean_wl_q: f64,
    /// Temperature spread `mean_t_q - mean_t_p`.
    pub d_t: f64,
    /// Wirelength spread `mean_wl_q - mean_wl_p`.
    pub d_wl: f64,
}

impl CornerSets {
    /// True when either spread collapses, which makes slack units undefined.
    pub fn is_degenerate(&self) -> bool {
        self.d_t <= 0.0 || self.d_wl <= 0.0
    }
}

pub fn corner_sets(points: &[ScatterPoint]) -> Result<CornerSets> {
    if points.is_empty() {
        return Err(Error::EmptyScatter);
    }
    let p = front(points, Direction::Minimize);
    let q = front(points, Direction::Maximize);
    let mean = |idx: &[usize], f: fn(&ScatterPoint) -> f64| -> f64 {
        idx.iter().map(|&i| f(&points[i])).sum::<f64>() / idx.len() as f64
    };
    let mean_t_p = mean(&p, |pt| pt.temperature_c);
    let mean_t_q = mean(&q, |pt| pt.temperature_c);
    let mean_wl_p = mean(&p, |pt| pt.wirelength_mm);
    let mean_wl_q = mean(&q, |pt| pt.wirelength_mm);
    Ok(CornerSets {
        p,
        q,
        mean_t_p,
        mean_t_q,
        mean_wl_p,
        mean_wl_q,
        d_t: mean_t_q - mean_t_p,
        d_wl: mean_wl_q - mean_wl_p,
    })
}

/// Closed-form slack of point `i`.
///
/// `d_i` is the largest, over points `j` strictly better in both objectives,
/// of `min((T_i - T_j)/D_T, (WL_i - WL_j)/D_WL)` — equivalently the least
/// relaxation at which `i` passes the test "for all j: `T_i <= T_j + d*D_T`
/// or `WL_i <= WL_j + d*D_WL`". Points with no strict dominator get 0.
///
/// Callers must handle degenerate corners (`D_T` or `D_WL` zero) themselves;
/// this function assumes both spreads are positive.
pub fn slack(points: &[ScatterPoint], corners: &CornerSets, i: usize) -> f64 {
    let pi = &points[i];
    let mut d = 0.0f64;
    for pj in points {
        if pj.temperature_c < pi.temperature_c && pj.wirelength_mm < pi.wirelength_mm {
            let dt = (pi.temperature_c - pj.temperature_c) / corners.d_t;
            let dwl = (pi.wirelength_mm - pj.wirelength_mm) / corners.d_wl;
            d = d.max(dt.min(dwl));
        }
    }
    d
}

/// Bucket a slack into a correlation level: `d < 0.1` is 10, each further
/// 0.1 of slack drops one level, `d >= 1` is 0.
pub fn level_for_slack(d: f64) -> u8 {
    let bucket = (d * 10.0).floor() as i64;
    (10 - bucket).clamp(0, 10) as u8
}

/// A scatter with per-point slack and correlation level.
#[derive(Debug, Clone)]
pub struct LabeledScatter {
    pub points: ScatterSet,
    pub slack: Vec<f64>,
    pub level: Vec<u8>,
    /// Set when the corner spreads collapsed and every slack was forced to 0.
    pub degenerate_spread: bool,
}

impl LabeledScatter {
    /// Count of points per level, indexed 0..=10.
    pub fn level_histogram(&self) -> [usize; 11] {
        let mut hist = [0usize; 11];
        for &l in &self.level {
            hist[l as usize] += 1;
        }
        hist
    }

    /// Level of the given order, if present.
    pub fn level_of(&self, order: &crate::system::PlacementOrder) -> Option<u8> {
        self.points
            .points
            .iter()
            .position(|p| &p.order == order)
            .map(|i| self.level[i])
    }
}

pub const LABELED_CSV_HEADER: &str = "order,temperature_c,wirelength_mm,slack,level";

impl LabeledScatter {
    pub fn to_csv(&self) -> String {
        use crate::placer::fmt_sig6;
        let mut out = String::from(LABELED_CSV_HEADER);
        out.push('\n');
        for (i, p) in self.points.points.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.order,
                fmt_sig6(p.temperature_c),
                fmt_sig6(p.wirelength_mm),
                fmt_sig6(self.slack[i]),
                self.level[i]
            ));
        }
        out
    }

    pub fn from_csv(text: &str, origin: &str) -> Result<LabeledScatter> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default().trim();
        if header != LABELED_CSV_HEADER {
            return Err(Error::MalformedFile {
                path: origin.into(),
                reason: format!("expected header {LABELED_CSV_HEADER:?}, found {header:?}"),
            });
        }
        let mut points = Vec::new();
        let mut slack = Vec::new();
        let mut level = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |what: &str| Error::MalformedFile {
                path: origin.into(),
                reason: format!("line {}: bad {what}", lineno + 2),
            };
            let mut fields = line.split(',');
            let order = crate::system::PlacementOrder::parse(
                fields.next().ok_or_else(|| parse_err("order"))?,
            )
            .map_err(|_| parse_err("order"))?;
            let temperature_c: f64 = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("temperature"))?;
            let wirelength_mm: f64 = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("wirelength"))?;
            let d: f64 = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("slack"))?;
            let l: u8 = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("level"))?;
            if l > 10 {
                return Err(parse_err("level"));
            }
            points.push(ScatterPoint {
                order,
                temperature_c,
                wirelength_mm,
            });
            slack.push(d);
            level.push(l);
        }
        Ok(LabeledScatter {
            points: ScatterSet { points },
            slack,
            level,
            degenerate_spread: false,
        })
    }
}

/// Label every point of a scatter with slack and level.
///
/// A scatter whose corner spreads collapse (all temperatures equal, or all
/// wirelengths equal) still labels: every point gets slack 0 and level 10,
/// and `degenerate_spread` is set so callers can warn.
pub fn assign_levels(points: ScatterSet) -> Result<LabeledScatter> {
    let corners = corner_sets(&points.points)?;
    let degenerate = corners.is_degenerate();
    let slack: Vec<f64> = if degenerate {
        vec![0.0; points.points.len()]
    } else {
        (0..points.points.len())
            .map(|i| slack(&points.points, &corners, i))
            .collect()
    };
    let level = slack.iter().map(|&d| level_for_slack(d)).collect();
    Ok(LabeledScatter {
        points,
        slack,
        level,
        degenerate_spread: degenerate,
    })
}
