//! Deterministic sequential placer with wirelength and thermal evaluation.
//!
//! Chiplets are placed one at a time on a uniform cell grid. The first
//! chiplet is centered; each later chiplet greedily minimizes wire-weighted
//! Manhattan distance to its already-placed neighbors. Every tie is broken
//! explicitly, so a `(system, order)` pair always maps to the same placement
//! regardless of thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::system::{validate_order, ChipletSystem, PlacementOrder};

/// Cap on `n` for all-permutations enumeration (`n! = 40320` at 8).
pub const DEFAULT_PERMUTATION_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacerConfig {
    /// Cells per grid side.
    pub grid: usize,
    /// Margin in cells kept free between any two footprints.
    pub spacing: usize,
}

impl Default for PlacerConfig {
    fn default() -> Self {
        PlacerConfig { grid: 64, spacing: 0 }
    }
}

impl PlacerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid == 0 {
            return Err(Error::Usage("placer grid must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalConfig {
    /// Thermal samples per side.
    pub grid: usize,
    /// Degrees Celsius per watt coupling coefficient.
    pub kappa: f64,
    /// Kernel width offset in mm, added to half the chiplet's longer side.
    pub sigma0: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            grid: 32,
            kappa: 40.0,
            sigma0: 1.0,
        }
    }
}

impl ThermalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 8 {
            return Err(Error::Usage("thermal grid must be >= 8".into()));
        }
        if !(self.kappa > 0.0) || !(self.sigma0 > 0.0) {
            return Err(Error::Usage("thermal kappa and sigma0 must be > 0".into()));
        }
        Ok(())
    }
}

/// One placed footprint: lower-left cell plus extent in cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedRect {
    pub chiplet: usize,
    pub x_cell: usize,
    pub y_cell: usize,
    pub w_cells: usize,
    pub h_cells: usize,
    /// Footprint center in mm.
    pub center_x_mm: f64,
    /// Footprint center in mm.
    pub center_y_mm: f64,
}

/// A legal placement of every chiplet, indexed by chiplet index.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub rects: Vec<PlacedRect>,
    pub grid: usize,
    pub cell_w_mm: f64,
    pub cell_h_mm: f64,
}

impl Placement {
    pub fn center_of(&self, chiplet: usize) -> (f64, f64) {
        let r = self
            .rects
            .iter()
            .find(|r| r.chiplet == chiplet)
            .expect("chiplet present in placement");
        (r.center_x_mm, r.center_y_mm)
    }
}

/// Exhaustive legality check: every footprint inside the grid and no two
/// footprints closer than `spacing` cells. Returns a description of the
/// first violation found.
pub fn check_legal(placement: &Placement, config: &PlacerConfig) -> std::result::Result<(), String> {
    for r in &placement.rects {
        if r.x_cell + r.w_cells > placement.grid || r.y_cell + r.h_cells > placement.grid {
            return Err(format!("chiplet {} out of bounds", r.chiplet));
        }
    }
    for (i, a) in placement.rects.iter().enumerate() {
        for b in placement.rects.iter().skip(i + 1) {
            if rects_conflict(a, b, config.spacing) {
                return Err(format!("chiplets {} and {} overlap", a.chiplet, b.chiplet));
            }
        }
    }
    Ok(())
}

fn rects_conflict(a: &PlacedRect, b: &PlacedRect, spacing: usize) -> bool {
    cells_conflict(
        (a.x_cell, a.y_cell, a.w_cells, a.h_cells),
        (b.x_cell, b.y_cell, b.w_cells, b.h_cells),
        spacing,
    )
}

fn cells_conflict(
    (ax, ay, aw, ah): (usize, usize, usize, usize),
    (bx, by, bw, bh): (usize, usize, usize, usize),
    spacing: usize,
) -> bool {
    ax < bx + bw + spacing && bx < ax + aw + spacing && ay < by + bh + spacing && by < ay + ah + spacing
}

fn footprint_cells(mm: f64, cell_mm: f64) -> usize {
    (mm / cell_mm).ceil() as usize
}

/// Place chiplets one at a time in the given order.
///
/// The first chiplet is centered on the grid (ties toward the smaller row,
/// then column). Each later chiplet takes the legal cell minimizing the
/// wire-weighted Manhattan distance to its placed neighbors, falling back to
/// distance-to-centroid when none of its neighbors is placed yet. Remaining
/// ties break by squared distance to the interposer center, then row-major
/// scan order.
pub fn place_sequential(
    system: &ChipletSystem,
    order: &PlacementOrder,
    config: &PlacerConfig,
) -> Result<Placement> {
    validate_order(system, order)?;
    config.validate()?;
    let grid = config.grid;
    let cell_w = system.interposer.width_mm / grid as f64;
    let cell_h = system.interposer.height_mm / grid as f64;
    let center_x = system.interposer.width_mm / 2.0;
    let center_y = system.interposer.height_mm / 2.0;

    let mut rects: Vec<PlacedRect> = Vec::with_capacity(order.len());
    for (step, &c) in order.0.iter().enumerate() {
        let chiplet = &system.chiplets[c];
        let w = footprint_cells(chiplet.width_mm, cell_w);
        let h = footprint_cells(chiplet.length_mm, cell_h);
        if w > grid || h > grid {
            return Err(Error::Unplaceable {
                chiplet: chiplet.name.clone(),
                step: step + 1,
            });
        }

        let center_mm = |x: usize, y: usize| {
            (
                (x as f64 + w as f64 / 2.0) * cell_w,
                (y as f64 + h as f64 / 2.0) * cell_h,
            )
        };

        let placed_neighbors: Vec<(usize, u64)> = system
            .neighbors(c)
            .filter(|&(u, _)| rects.iter().any(|r| r.chiplet == u))
            .collect();
        let centroid = if rects.is_empty() {
            None
        } else {
            let n = rects.len() as f64;
            Some((
                rects.iter().map(|r| r.center_x_mm).sum::<f64>() / n,
                rects.iter().map(|r| r.center_y_mm).sum::<f64>() / n,
            ))
        };

        let mut best: Option<(f64, f64, usize, usize)> = None;
        if step == 0 {
            let x = (grid - w) / 2;
            let y = (grid - h) / 2;
            best = Some((0.0, 0.0, x, y));
        } else {
            for y in 0..=grid - h {
                for x in 0..=grid - w {
                    let candidate = (x, y, w, h);
                    let legal = rects.iter().all(|r| {
                        !cells_conflict(
                            candidate,
                            (r.x_cell, r.y_cell, r.w_cells, r.h_cells),
                            config.spacing,
                        )
                    });
                    if !legal {
                        continue;
                    }
                    let (cx, cy) = center_mm(x, y);
                    let cost = if placed_neighbors.is_empty() {
                        let (gx, gy) = centroid.expect("step > 0 has placed chiplets");
                        (cx - gx).abs() + (cy - gy).abs()
                    } else {
                        placed_neighbors
                            .iter()
                            .map(|&(u, wires)| {
                                let r = rects
                                    .iter()
                                    .find(|r| r.chiplet == u)
                                    .expect("neighbor placed");
                                wires as f64
                                    * ((cx - r.center_x_mm).abs() + (cy - r.center_y_mm).abs())
                            })
                            .sum()
                    };
                    let tie = (cx - center_x).powi(2) + (cy - center_y).powi(2);
                    let better = match best {
                        None => true,
                        Some((bc, bt, _, _)) => cost < bc || (cost == bc && tie < bt),
                    };
                    if better {
                        best = Some((cost, tie, x, y));
                    }
                }
            }
        }

        match best {
            Some((_, _, x, y)) => {
                let (cx, cy) = center_mm(x, y);
                rects.push(PlacedRect {
                    chiplet: c,
                    x_cell: x,
                    y_cell: y,
                    w_cells: w,
                    h_cells: h,
                    center_x_mm: cx,
                    center_y_mm: cy,
                });
            }
            None => {
                return Err(Error::Unplaceable {
                    chiplet: chiplet.name.clone(),
                    step: step + 1,
                })
            }
        }
    }

    rects.sort_by_key(|r| r.chiplet);
    Ok(Placement {
        rects,
        grid,
        cell_w_mm: cell_w,
        cell_h_mm: cell_h,
    })
}

/// Total center-to-center Manhattan wirelength in mm, weighted by wire count.
pub fn total_wirelength(system: &ChipletSystem, placement: &Placement) -> f64 {
    system
        .nets
        .iter()
        .map(|net| {
            let (ax, ay) = placement.center_of(net.a);
            let (bx, by) = placement.center_of(net.b);
            net.wires as f64 * ((ax - bx).abs() + (ay - by).abs())
        })
        .sum()
}

/// Peak temperature under a Gaussian-superposition power field.
///
/// The field is sampled at the cell centers of a uniform `grid x grid` mesh
/// over the interposer; each chiplet contributes a Gaussian with width
/// `max(width, length)/2 + sigma0` centered on its footprint center.
pub fn peak_temperature(
    system: &ChipletSystem,
    placement: &Placement,
    config: &ThermalConfig,
) -> f64 {
    let g = config.grid;
    let dx = system.interposer.width_mm / g as f64;
    let dy = system.interposer.height_mm / g as f64;
    let sources: Vec<(f64, f64, f64, f64)> = placement
        .rects
        .iter()
        .map(|r| {
            let c = &system.chiplets[r.chiplet];
            let sigma = c.width_mm.max(c.length_mm) / 2.0 + config.sigma0;
            (r.center_x_mm, r.center_y_mm, c.power_w, 2.0 * sigma * sigma)
        })
        .collect();
    let mut peak = 0.0f64;
    for iy in 0..g {
        let y = (iy as f64 + 0.5) * dy;
        for ix in 0..g {
            let x = (ix as f64 + 0.5) * dx;
            let field: f64 = sources
                .iter()
                .map(|&(cx, cy, p, two_sigma_sq)| {
                    let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                    p * (-d2 / two_sigma_sq).exp()
                })
                .sum();
            peak = peak.max(field);
        }
    }
    system.interposer.ambient_c + config.kappa * peak
}

/// Outcome of one `(system, order)` evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub order: PlacementOrder,
    pub temperature_c: f64,
    pub wirelength_mm: f64,
}

/// A collection of scatter points, sorted by order sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSet {
    pub points: Vec<ScatterPoint>,
}

/// Place, then measure: the full pipeline for one order. Pure and
/// deterministic in all of its inputs.
pub fn evaluate_order(
    system: &ChipletSystem,
    order: &PlacementOrder,
    placer_cfg: &PlacerConfig,
    thermal_cfg: &ThermalConfig,
) -> Result<ScatterPoint> {
    thermal_cfg.validate()?;
    let placement = place_sequential(system, order, placer_cfg)?;
    Ok(ScatterPoint {
        order: order.clone(),
        temperature_c: peak_temperature(system, &placement, thermal_cfg),
        wirelength_mm: total_wirelength(system, &placement),
    })
}

/// How candidate orders are chosen for a sweep or a ranking pass.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderSource {
    /// Every permutation, subject to the enumeration cap.
    All,
    /// A caller-provided list.
    Explicit(Vec<PlacementOrder>),
    /// Up to `max` distinct seeded-random permutations.
    Sampled { max: usize, seed: u64 },
}

fn next_permutation(seq: &mut [usize]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = seq.len() - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}

fn factorial_capped(n: usize, cap: usize) -> usize {
    let mut f: usize = 1;
    for k in 2..=n {
        f = match f.checked_mul(k) {
            Some(v) if v <= cap => v,
            _ => return cap + 1,
        };
    }
    f
}

/// Materialize the candidate order list, sorted lexicographically.
pub fn enumerate_orders(
    system: &ChipletSystem,
    source: &OrderSource,
    cap: usize,
) -> Result<Vec<PlacementOrder>> {
    let n = system.chiplet_count();
    match source {
        OrderSource::All => {
            if n > cap {
                return Err(Error::TooManyOrders { n, cap });
            }
            let mut seq: Vec<usize> = (0..n).collect();
            let mut orders = vec![PlacementOrder(seq.clone())];
            while next_permutation(&mut seq) {
                orders.push(PlacementOrder(seq.clone()));
            }
            Ok(orders)
        }
        OrderSource::Explicit(orders) => {
            for order in orders {
                validate_order(system, order)?;
            }
            let mut orders = orders.clone();
            orders.sort();
            orders.dedup();
            Ok(orders)
        }
        OrderSource::Sampled { max, seed } => {
            if factorial_capped(n, *max) <= *max {
                return enumerate_orders(system, &OrderSource::All, n.max(cap));
            }
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut seen = std::collections::HashSet::with_capacity(*max);
            let mut orders = Vec::with_capacity(*max);
            let mut seq: Vec<usize> = (0..n).collect();
            while orders.len() < *max {
                seq.shuffle(&mut rng);
                if seen.insert(seq.clone()) {
                    orders.push(PlacementOrder(seq.clone()));
                }
            }
            orders.sort();
            Ok(orders)
        }
    }
}

/// Evaluate every candidate order. Output is sorted by order sequence, so
/// the bytes written downstream never depend on the worker schedule.
pub fn sweep(
    system: &ChipletSystem,
    source: &OrderSource,
    placer_cfg: &PlacerConfig,
    thermal_cfg: &ThermalConfig,
    parallelism: usize,
    cap: usize,
) -> Result<ScatterSet> {
    let orders = enumerate_orders(system, source, cap)?;
    let run = || -> Result<Vec<ScatterPoint>> {
        orders
            .par_iter()
            .map(|order| evaluate_order(system, order, placer_cfg, thermal_cfg))
            .collect()
    };
    let mut points = if parallelism == 0 {
        run()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::Usage(format!("worker pool: {e}")))?;
        pool.install(run)?
    };
    points.sort_by(|a, b| a.order.cmp(&b.order));
    Ok(ScatterSet { points })
}

/// Format with 6 significant digits in plain decimal notation.
pub fn fmt_sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let sci = format!("{:e}", x.abs());
    let exp: i32 = sci
        .split('e')
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

pub const SWEEP_CSV_HEADER: &str = "order,temperature_c,wirelength_mm";

impl ScatterSet {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                p.order,
                fmt_sig6(p.temperature_c),
                fmt_sig6(p.wirelength_mm)
            ));
        }
        out
    }

    pub fn from_csv(text: &str, origin: &str) -> Result<ScatterSet> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default().trim();
        if header != SWEEP_CSV_HEADER {
            return Err(Error::MalformedFile {
                path: origin.into(),
                reason: format!("expected header {SWEEP_CSV_HEADER:?}, found {header:?}"),
            });
        }
        let mut points = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let parse_err = |what: &str| Error::MalformedFile {
                path: origin.into(),
                reason: format!("line {}: bad {what}", lineno + 2),
            };
            let order = PlacementOrder::parse(fields.next().ok_or_else(|| parse_err("order"))?)
                .map_err(|_| parse_err("order"))?;
            let temperature_c: f64 = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("temperature"))?;
            let wirelength_mm: f64 = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("wirelength"))?;
            points.push(ScatterPoint {
                order,
                temperature_c,
                wirelength_mm,
            });
        }
        Ok(ScatterSet { points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Chiplet, Interposer};

    pub(crate) fn system(
        interposer_mm: (f64, f64),
        chiplets: &[(f64, f64, f64)],
        nets: &[(usize, usize, u64)],
    ) -> ChipletSystem {
        ChipletSystem::new(
            "test".into(),
            Interposer {
                width_mm: interposer_mm.0,
                height_mm: interposer_mm.1,
                ambient_c: 45.0,
            },
            chiplets
                .iter()
                .enumerate()
                .map(|(i, &(w, l, p))| Chiplet {
                    name: format!("c{i}"),
                    width_mm: w,
                    length_mm: l,
                    power_w: p,
                })
                .collect(),
            nets.iter()
                .map(|&(a, b, wires)| crate::system::Net { a, b, wires })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_chiplet_is_centered() {
        let sys = system((20.0, 20.0), &[(2.0, 2.0, 1.0)], &[]);
        let cfg = PlacerConfig::default();
        let placement =
            place_sequential(&sys, &PlacementOrder(vec![0]), &cfg).unwrap();
        let r = &placement.rects[0];
        // 2.0 mm at 0.3125 mm/cell -> 7 cells; (64 - 7) / 2 = 28.
        assert_eq!((r.w_cells, r.h_cells), (7, 7));
        assert_eq!((r.x_cell, r.y_cell), (28, 28));
        assert!(check_legal(&placement, &cfg).is_ok());
    }

    #[test]
    fn second_chiplet_matches_brute_force_argmin() {
        let sys = system((20.0, 20.0), &[(2.0, 2.0, 1.0), (2.0, 2.0, 1.0)], &[(0, 1, 3)]);
        let cfg = PlacerConfig::default();
        let placement = place_sequential(&sys, &PlacementOrder(vec![0, 1]), &cfg).unwrap();
        let first = placement.rects[0];
        let second = placement.rects[1];

        // Independent scan over every legal cell for the second footprint.
        let cell = 20.0 / 64.0;
        let mut best: Option<(f64, f64, usize, usize)> = None;
        for y in 0..=(64 - second.h_cells) {
            for x in 0..=(64 - second.w_cells) {
                let disjoint = x + second.w_cells <= first.x_cell
                    || first.x_cell + first.w_cells <= x
                    || y + second.h_cells <= first.y_cell
                    || first.y_cell + first.h_cells <= y;
                if !disjoint {
                    continue;
                }
                let cx = (x as f64 + second.w_cells as f64 / 2.0) * cell;
                let cy = (y as f64 + second.h_cells as f64 / 2.0) * cell;
                let cost = 3.0 * ((cx - first.center_x_mm).abs() + (cy - first.center_y_mm).abs());
                let tie = (cx - 10.0).powi(2) + (cy - 10.0).powi(2);
                let better = match best {
                    None => true,
                    Some((bc, bt, _, _)) => cost < bc || (cost == bc && tie < bt),
                };
                if better {
                    best = Some((cost, tie, x, y));
                }
            }
        }
        let (_, _, bx, by) = best.unwrap();
        assert_eq!((second.x_cell, second.y_cell), (bx, by));
        // Abuts the first chiplet: centers one footprint apart.
        let gap = (second.center_x_mm - first.center_x_mm).abs()
            + (second.center_y_mm - first.center_y_mm).abs();
        assert!((gap - 7.0 * cell).abs() < 1e-9, "gap {gap}");
    }

    #[test]
    fn two_oversized_chiplets_are_unplaceable() {
        let sys = system((20.0, 20.0), &[(11.0, 11.0, 1.0), (11.0, 11.0, 1.0)], &[]);
        let err = place_sequential(&sys, &PlacementOrder(vec![0, 1]), &PlacerConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::Unplaceable { step: 2, .. }));
    }

    #[test]
    fn wirelength_no_nets_is_zero() {
        let sys = system((20.0, 20.0), &[(2.0, 2.0, 1.0), (2.0, 2.0, 1.0)], &[]);
        let placement =
            place_sequential(&sys, &PlacementOrder(vec![0, 1]), &PlacerConfig::default()).unwrap();
        assert_eq!(total_wirelength(&sys, &placement), 0.0);
    }

    fn hand_placement(centers: &[(f64, f64)]) -> Placement {
        Placement {
            rects: centers
                .iter()
                .enumerate()
                .map(|(i, &(cx, cy))| PlacedRect {
                    chiplet: i,
                    x_cell: 0,
                    y_cell: 0,
                    w_cells: 1,
                    h_cells: 1,
                    center_x_mm: cx,
                    center_y_mm: cy,
                })
                .collect(),
            grid: 64,
            cell_w_mm: 1.0,
            cell_h_mm: 1.0,
        }
    }

    #[test]
    fn wirelength_hand_examples() {
        let sys = system((30.0, 30.0), &[(1.0, 1.0, 0.0), (1.0, 1.0, 0.0)], &[(0, 1, 2)]);
        let placement = hand_placement(&[(0.0, 0.0), (3.0, 4.0)]);
        assert_eq!(total_wirelength(&sys, &placement), 14.0);

        let sys3 = system(
            (30.0, 30.0),
            &[(1.0, 1.0, 0.0), (1.0, 1.0, 0.0), (1.0, 1.0, 0.0)],
            &[(0, 1, 1), (1, 2, 3)],
        );
        let placement3 = hand_placement(&[(1.0, 1.0), (4.0, 2.0), (5.0, 7.0)]);
        // 1*(3+1) + 3*(1+5) = 22.
        assert_eq!(total_wirelength(&sys3, &placement3), 22.0);
    }

    #[test]
    fn zero_power_means_ambient() {
        let sys = system((20.0, 20.0), &[(2.0, 2.0, 0.0), (2.0, 2.0, 0.0)], &[]);
        let placement =
            place_sequential(&sys, &PlacementOrder(vec![0, 1]), &PlacerConfig::default()).unwrap();
        assert_eq!(
            peak_temperature(&sys, &placement, &ThermalConfig::default()),
            45.0
        );
    }

    #[test]
    fn single_hot_chiplet_peaks_near_kappa_times_power() {
        let sys = system((20.0, 20.0), &[(2.0, 2.0, 1.0)], &[]);
        let cfg = ThermalConfig::default();
        let placement =
            place_sequential(&sys, &PlacementOrder(vec![0]), &PlacerConfig::default()).unwrap();
        let t = peak_temperature(&sys, &placement, &cfg);
        // The true maximum is ambient + 40 at the chiplet center; the sampled
        // peak can miss it by at most half a thermal-cell diagonal.
        let pitch = 20.0 / cfg.grid as f64;
        let d2 = 2.0 * (pitch / 2.0).powi(2);
        let sigma = 2.0 / 2.0 + cfg.sigma0;
        let floor = 45.0 + 40.0 * (-d2 / (2.0 * sigma * sigma)).exp();
        assert!(t <= 45.0 + 40.0 + 1e-9, "t = {t}");
        assert!(t >= floor - 1e-9, "t = {t}, floor = {floor}");
    }

    #[test]
    fn adjacent_pair_hotter_than_separated_pair() {
        let sys = system((40.0, 40.0), &[(2.0, 2.0, 1.0), (2.0, 2.0, 1.0)], &[]);
        let cfg = ThermalConfig::default();
        let close = hand_placement(&[(20.0, 20.0), (22.0, 20.0)]);
        let far = hand_placement(&[(2.0, 2.0), (38.0, 38.0)]);
        assert!(
            peak_temperature(&sys, &close, &cfg) >= peak_temperature(&sys, &far, &cfg),
            "adjacent placement should be at least as hot"
        );
    }

    #[test]
    fn added_power_never_cools_fixed_placement() {
        let sys2 = system((40.0, 40.0), &[(2.0, 2.0, 1.5), (2.0, 2.0, 0.8)], &[]);
        let sys3 = system(
            (40.0, 40.0),
            &[(2.0, 2.0, 1.5), (2.0, 2.0, 0.8), (3.0, 3.0, 2.0)],
            &[],
        );
        let cfg = ThermalConfig::default();
        let base = hand_placement(&[(10.0, 10.0), (30.0, 12.0)]);
        let extended = hand_placement(&[(10.0, 10.0), (30.0, 12.0), (20.0, 30.0)]);
        assert!(
            peak_temperature(&sys3, &extended, &cfg) >= peak_temperature(&sys2, &base, &cfg)
        );
    }

    #[test]
    fn evaluate_order_single_chiplet() {
        let sys = system((20.0, 20.0), &[(2.0, 2.0, 1.0)], &[]);
        let point = evaluate_order(
            &sys,
            &PlacementOrder(vec![0]),
            &PlacerConfig::default(),
            &ThermalConfig::default(),
        )
        .unwrap();
        assert_eq!(point.wirelength_mm, 0.0);
        assert!(point.temperature_c > 45.0 && point.temperature_c <= 85.0 + 1e-9);
    }

    #[test]
    fn evaluate_order_is_deterministic() {
        let sys = system(
            (30.0, 30.0),
            &[(4.0, 3.0, 2.0), (2.0, 2.0, 1.0), (3.0, 5.0, 4.0), (2.0, 3.0, 0.5)],
            &[(0, 1, 4), (1, 2, 2), (0, 3, 7)],
        );
        let order = PlacementOrder(vec![2, 0, 3, 1]);
        let a = evaluate_order(&sys, &order, &PlacerConfig::default(), &ThermalConfig::default())
            .unwrap();
        let b = evaluate_order(&sys, &order, &PlacerConfig::default(), &ThermalConfig::default())
            .unwrap();
        assert_eq!(a.temperature_c.to_bits(), b.temperature_c.to_bits());
        assert_eq!(a.wirelength_mm.to_bits(), b.wirelength_mm.to_bits());
    }

    #[test]
    fn reversed_order_changes_outcome_on_asymmetric_system() {
        let sys = system(
            (30.0, 30.0),
            &[(6.0, 4.0, 8.0), (2.0, 2.0, 1.0), (3.0, 5.0, 4.0), (2.0, 3.0, 0.5)],
            &[(0, 1, 9), (1, 2, 2), (2, 3, 5)],
        );
        let fwd = evaluate_order(
            &sys,
            &PlacementOrder(vec![0, 1, 2, 3]),
            &PlacerConfig::default(),
            &ThermalConfig::default(),
        )
        .unwrap();
        let rev = evaluate_order(
            &sys,
            &PlacementOrder(vec![3, 2, 1, 0]),
            &PlacerConfig::default(),
            &ThermalConfig::default(),
        )
        .unwrap();
        assert!(
            fwd.temperature_c != rev.temperature_c || fwd.wirelength_mm != rev.wirelength_mm,
            "order sensitivity lost: {fwd:?} vs {rev:?}"
        );
    }

    #[test]
    fn sweep_counts_permutations() {
        let sys = system(
            (30.0, 30.0),
            &[(2.0, 2.0, 1.0), (3.0, 2.0, 2.0), (2.0, 4.0, 0.5)],
            &[(0, 1, 2)],
        );
        let set = sweep(
            &sys,
            &OrderSource::All,
            &PlacerConfig::default(),
            &ThermalConfig::default(),
            1,
            DEFAULT_PERMUTATION_CAP,
        )
        .unwrap();
        assert_eq!(set.points.len(), 6);
        // Sorted lexicographically by order sequence.
        assert_eq!(set.points[0].order.to_string(), "0-1-2");
        assert_eq!(set.points[5].order.to_string(), "2-1-0");
    }

    #[test]
    fn sampled_orders_reproducible() {
        let sys = system(
            (40.0, 40.0),
            &[
                (2.0, 2.0, 1.0),
                (2.0, 2.0, 1.0),
                (2.0, 2.0, 1.0),
                (2.0, 2.0, 1.0),
                (2.0, 2.0, 1.0),
                (2.0, 2.0, 1.0),
            ],
            &[],
        );
        let source = OrderSource::Sampled { max: 100, seed: 7 };
        let a = enumerate_orders(&sys, &source, DEFAULT_PERMUTATION_CAP).unwrap();
        let b = enumerate_orders(&sys, &source, DEFAULT_PERMUTATION_CAP).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        let distinct: std::collections::HashSet<_> = a.iter().collect();
        assert_eq!(distinct.len(), 100);
    }

    #[test]
    fn all_permutations_above_cap_rejected() {
        let chiplets: Vec<(f64, f64, f64)> = (0..9).map(|_| (2.0, 2.0, 1.0)).collect();
        let sys = system((40.0, 40.0), &chiplets, &[]);
        let err = enumerate_orders(&sys, &OrderSource::All, DEFAULT_PERMUTATION_CAP).unwrap_err();
        assert!(matches!(err, Error::TooManyOrders { n: 9, cap: 8 }));
    }

    #[test]
    fn sweep_invariant_under_worker_count() {
        let sys = system(
            (30.0, 30.0),
            &[(4.0, 3.0, 2.0), (2.0, 2.0, 1.0), (3.0, 5.0, 4.0), (2.0, 3.0, 0.5)],
            &[(0, 1, 4), (1, 2, 2), (0, 3, 7)],
        );
        let run = |threads| {
            sweep(
                &sys,
                &OrderSource::All,
                &PlacerConfig::default(),
                &ThermalConfig::default(),
                threads,
                DEFAULT_PERMUTATION_CAP,
            )
            .unwrap()
            .to_csv()
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn placements_in_sweep_are_legal() {
        let sys = system(
            (30.0, 30.0),
            &[(4.0, 3.0, 2.0), (2.0, 2.0, 1.0), (3.0, 5.0, 4.0), (2.0, 3.0, 0.5)],
            &[(0, 1, 4), (1, 2, 2), (0, 3, 7)],
        );
        let cfg = PlacerConfig::default();
        for order in enumerate_orders(&sys, &OrderSource::All, 8).unwrap() {
            let placement = place_sequential(&sys, &order, &cfg).unwrap();
            check_legal(&placement, &cfg).unwrap();
        }
    }

    #[test]
    fn wirelength_lower_bound_for_two_chiplets() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let w0 = rng.gen_range(1.0..5.0);
            let l0 = rng.gen_range(1.0..5.0);
            let w1 = rng.gen_range(1.0..5.0);
            let l1 = rng.gen_range(1.0..5.0);
            let wires = rng.gen_range(1..20u64);
            let sys = system((30.0, 30.0), &[(w0, l0, 1.0), (w1, l1, 1.0)], &[(0, 1, wires)]);
            let cfg = PlacerConfig::default();
            let placement = place_sequential(&sys, &PlacementOrder(vec![0, 1]), &cfg).unwrap();
            let wl = total_wirelength(&sys, &placement);
            let r0 = &placement.rects[0];
            let r1 = &placement.rects[1];
            let min_dx = (r0.w_cells + r1.w_cells) as f64 / 2.0 * placement.cell_w_mm;
            let min_dy = (r0.h_cells + r1.h_cells) as f64 / 2.0 * placement.cell_h_mm;
            let bound = wires as f64 * min_dx.min(min_dy);
            assert!(wl >= bound - 1e-9, "wl {wl} below bound {bound}");
        }
    }

    #[test]
    fn fmt_sig6_cases() {
        assert_eq!(fmt_sig6(83555.1003), "83555.1");
        assert_eq!(fmt_sig6(88.071234), "88.0712");
        assert_eq!(fmt_sig6(0.0012345678), "0.00123457");
        assert_eq!(fmt_sig6(0.0), "0.00000");
        assert_eq!(fmt_sig6(-42.123456), "-42.1235");
        assert_eq!(fmt_sig6(123456.7), "123457");
        assert_eq!(fmt_sig6(1000.0), "1000.00");
    }

    #[test]
    fn sweep_csv_round_trips() {
        let sys = system(
            (30.0, 30.0),
            &[(2.0, 2.0, 1.0), (3.0, 2.0, 2.0), (2.0, 4.0, 0.5)],
            &[(0, 1, 2), (1, 2, 5)],
        );
        let set = sweep(
            &sys,
            &OrderSource::All,
            &PlacerConfig::default(),
            &ThermalConfig::default(),
            1,
            8,
        )
        .unwrap();
        let csv = set.to_csv();
        let parsed = ScatterSet::from_csv(&csv, "test").unwrap();
        assert_eq!(parsed.points.len(), set.points.len());
        for (a, b) in parsed.points.iter().zip(&set.points) {
            assert_eq!(a.order, b.order);
            assert!((a.temperature_c - b.temperature_c).abs() < 1e-3);
            assert!((a.wirelength_mm - b.wirelength_mm).abs() < 1e-1);
        }
    }
}
