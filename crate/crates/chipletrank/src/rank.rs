//! Candidate ranking and the baseline-versus-ranked evaluation report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{baseline_order, Importance};
use crate::dataset::{build_graph, OrderGraph};
use crate::error::{Error, Result};
use crate::model::RankModel;
use crate::pareto::LabeledScatter;
use crate::placer::{enumerate_orders, OrderSource};
use crate::suite::Split;
use crate::system::{ChipletSystem, PlacementOrder};

/// Anything that can score an order graph. The trained model is the real
/// scorer; tests substitute oracles.
pub trait OrderScorer: Sync {
    fn score_order(&self, graph: &OrderGraph) -> Result<f64>;
}

impl OrderScorer for RankModel {
    fn score_order(&self, graph: &OrderGraph) -> Result<f64> {
        self.score(graph)
    }
}

/// Score every candidate order and return the top `count`, best first.
///
/// Candidates are built and normalized per order with labels unused at
/// inference. Sorting is descending by score with lexicographic order as
/// the tie-break, so equal scores still rank deterministically.
pub fn rank_orders<S: OrderScorer>(
    system: &ChipletSystem,
    system_id: &str,
    scorer: &S,
    source: &OrderSource,
    count: usize,
    parallelism: usize,
    cap: usize,
) -> Result<Vec<(PlacementOrder, f64)>> {
    let orders = enumerate_orders(system, source, cap)?;
    let score_all = || -> Result<Vec<(PlacementOrder, f64)>> {
        orders
            .par_iter()
            .map(|order| {
                let graph = build_graph(system, system_id, order, 0)?;
                Ok((order.clone(), scorer.score_order(&graph)?))
            })
            .collect()
    };
    let mut scored = if parallelism == 0 {
        score_all()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::Usage(format!("worker pool: {e}")))?;
        pool.install(score_all)?
    };
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(count);
    Ok(scored)
}

/// Percentage change of `method` against `baseline`.
pub fn pct_delta(method: f64, baseline: f64) -> f64 {
    (method - baseline) / baseline * 100.0
}

/// The report rendering of a percentage delta, e.g. `(-1.95%)`.
pub fn format_pct(delta: f64) -> String {
    format!("({delta:.2}%)")
}

/// Sweep outcome of one concrete order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub order: String,
    pub temperature_c: f64,
    pub wirelength_mm: f64,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub system_id: String,
    pub split: Split,
    pub baseline: OutcomeRow,
    pub top1: OutcomeRow,
    /// Means over the top-5 ranked orders.
    pub top5_mean: OutcomeRow,
    pub top5_orders: Vec<String>,
}

/// Averages over one split, with percentage deltas against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAggregate {
    pub split: Split,
    pub systems: usize,
    pub baseline_t: f64,
    pub baseline_wl: f64,
    pub baseline_l: f64,
    pub top1_t: f64,
    pub top1_wl: f64,
    pub top1_l: f64,
    pub top1_t_delta_pct: f64,
    pub top1_wl_delta_pct: f64,
    pub top5_t: f64,
    pub top5_wl: f64,
    pub top5_l: f64,
    pub top5_t_delta_pct: f64,
    pub top5_wl_delta_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub training: Option<SplitAggregate>,
    pub testing: Option<SplitAggregate>,
}

/// One system ready for evaluation: its instance plus the labeled full sweep.
pub struct EvalInput {
    pub id: String,
    pub split: Split,
    pub system: ChipletSystem,
    pub labeled: LabeledScatter,
}

fn lookup(labeled: &LabeledScatter, order: &PlacementOrder, system: &str) -> Result<OutcomeRow> {
    let idx = labeled
        .points
        .points
        .iter()
        .position(|p| &p.order == order)
        .ok_or_else(|| Error::MissingSweep {
            system: system.to_string(),
            order: order.to_string(),
        })?;
    let p = &labeled.points.points[idx];
    Ok(OutcomeRow {
        order: order.to_string(),
        temperature_c: p.temperature_c,
        wirelength_mm: p.wirelength_mm,
        level: labeled.level[idx] as f64,
    })
}

/// Build the full per-system and per-split comparison of the baseline order
/// against the scorer's top-1 and top-5 orders, all looked up in the
/// precomputed labeled sweeps.
pub fn eval_compare<S: OrderScorer>(
    inputs: &[EvalInput],
    scorer: &S,
    parallelism: usize,
    cap: usize,
) -> Result<EvalReport> {
    let mut rows = Vec::with_capacity(inputs.len());
    for input in inputs {
        let base_order = baseline_order(&input.system, Importance::PageRank);
        let baseline = lookup(&input.labeled, &base_order, &input.id)?;
        let ranked = rank_orders(
            &input.system,
            &input.id,
            scorer,
            &OrderSource::All,
            5,
            parallelism,
            cap,
        )?;
        if ranked.is_empty() {
            return Err(Error::EmptyScatter);
        }
        let outcomes: Vec<OutcomeRow> = ranked
            .iter()
            .map(|(order, _)| lookup(&input.labeled, order, &input.id))
            .collect::<Result<_>>()?;
        let top1 = outcomes[0].clone();
        let k = outcomes.len() as f64;
        let top5_mean = OutcomeRow {
            order: String::new(),
            temperature_c: outcomes.iter().map(|o| o.temperature_c).sum::<f64>() / k,
            wirelength_mm: outcomes.iter().map(|o| o.wirelength_mm).sum::<f64>() / k,
            level: outcomes.iter().map(|o| o.level).sum::<f64>() / k,
        };
        rows.push(EvalRow {
            system_id: input.id.clone(),
            split: input.split,
            baseline,
            top1,
            top5_mean,
            top5_orders: outcomes.iter().map(|o| o.order.clone()).collect(),
        });
    }
    let training = aggregate(&rows, Split::Train);
    let testing = aggregate(&rows, Split::Test);
    Ok(EvalReport {
        rows,
        training,
        testing,
    })
}

/// Average the split's rows and compute deltas of the averages, the way the
/// comparison tables do.
pub fn aggregate(rows: &[EvalRow], split: Split) -> Option<SplitAggregate> {
    let split_rows: Vec<&EvalRow> = rows.iter().filter(|r| r.split == split).collect();
    if split_rows.is_empty() {
        return None;
    }
    let n = split_rows.len() as f64;
    let mean = |f: &dyn Fn(&EvalRow) -> f64| split_rows.iter().map(|r| f(r)).sum::<f64>() / n;
    let baseline_t = mean(&|r| r.baseline.temperature_c);
    let baseline_wl = mean(&|r| r.baseline.wirelength_mm);
    let top1_t = mean(&|r| r.top1.temperature_c);
    let top1_wl = mean(&|r| r.top1.wirelength_mm);
    let top5_t = mean(&|r| r.top5_mean.temperature_c);
    let top5_wl = mean(&|r| r.top5_mean.wirelength_mm);
    Some(SplitAggregate {
        split,
        systems: split_rows.len(),
        baseline_t,
        baseline_wl,
        baseline_l: mean(&|r| r.baseline.level),
        top1_t,
        top1_wl,
        top1_l: mean(&|r| r.top1.level),
        top1_t_delta_pct: pct_delta(top1_t, baseline_t),
        top1_wl_delta_pct: pct_delta(top1_wl, baseline_wl),
        top5_t,
        top5_wl,
        top5_l: mean(&|r| r.top5_mean.level),
        top5_t_delta_pct: pct_delta(top5_t, baseline_t),
        top5_wl_delta_pct: pct_delta(top5_wl, baseline_wl),
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str, origin: &str) -> Result<EvalReport> {
        serde_json::from_str(text).map_err(|e| Error::MalformedFile {
            path: origin.into(),
            reason: e.to_string(),
        })
    }

    /// Human-readable comparison table.
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>5}  {:>9} {:>12} {:>4}   {:>9} {:>12} {:>4}   {:>9} {:>12} {:>5}",
            "system", "split", "base T", "base WL", "L", "top1 T", "top1 WL", "L", "top5 T",
            "top5 WL", "L"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>5}  {:>9.2} {:>12.2} {:>4}   {:>9.2} {:>12.2} {:>4}   {:>9.2} {:>12.2} {:>5.1}",
                r.system_id,
                r.split.to_string(),
                r.baseline.temperature_c,
                r.baseline.wirelength_mm,
                r.baseline.level,
                r.top1.temperature_c,
                r.top1.wirelength_mm,
                r.top1.level,
                r.top5_mean.temperature_c,
                r.top5_mean.wirelength_mm,
                r.top5_mean.level,
            );
        }
        for agg in [self.training.as_ref(), self.testing.as_ref()].into_iter().flatten() {
            let _ = writeln!(
                out,
                "{:<12} avg    {:>9.2} {:>12.2} {:>4.1}   {:>9.2} {:>12.2} {:>4.1}   {:>9.2} {:>12.2} {:>5.1}",
                agg.split.to_string(),
                agg.baseline_t,
                agg.baseline_wl,
                agg.baseline_l,
                agg.top1_t,
                agg.top1_wl,
                agg.top1_l,
                agg.top5_t,
                agg.top5_wl,
                agg.top5_l,
            );
            let _ = writeln!(
                out,
                "{:<12}        top1 {} T, {} WL; top5 {} T, {} WL",
                "",
                format_pct(agg.top1_t_delta_pct),
                format_pct(agg.top1_wl_delta_pct),
                format_pct(agg.top5_t_delta_pct),
                format_pct(agg.top5_wl_delta_pct),
            );
        }
        out
    }
}
