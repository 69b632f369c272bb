//! Problem-instance data model: chiplets, nets, interposer, placement orders.
//!
//! A [`ChipletSystem`] is immutable after construction and safe to share
//! across worker threads. Parsing validates every structural invariant and
//! canonicalizes the net list (duplicate nets merged, endpoints sorted).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rectangular silicon die with a power budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chiplet {
    pub name: String,
    /// x extent in mm.
    pub width_mm: f64,
    /// y extent in mm.
    pub length_mm: f64,
    pub power_w: f64,
}

impl Chiplet {
    pub fn area_mm2(&self) -> f64 {
        self.width_mm * self.length_mm
    }
}

/// An undirected interconnect bundle between two chiplets.
///
/// Canonical form has `a < b`; duplicate nets on the same unordered pair are
/// merged at parse time by summing their wire counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Net {
    pub a: usize,
    pub b: usize,
    pub wires: u64,
}

/// The carrier substrate chiplets are placed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interposer {
    pub width_mm: f64,
    pub height_mm: f64,
    pub ambient_c: f64,
}

impl Interposer {
    pub fn area_mm2(&self) -> f64 {
        self.width_mm * self.height_mm
    }
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChipletSystem {
    pub name: String,
    pub interposer: Interposer,
    pub chiplets: Vec<Chiplet>,
    pub nets: Vec<Net>,
}

impl ChipletSystem {
    /// Validate invariants and canonicalize the net list.
    ///
    /// Duplicate nets on the same unordered pair are merged by summing wires;
    /// the result is sorted by `(a, b)` with `a < b`, so downstream graph
    /// construction never depends on file order.
    pub fn new(
        name: String,
        interposer: Interposer,
        chiplets: Vec<Chiplet>,
        nets: Vec<Net>,
    ) -> Result<Self> {
        if chiplets.is_empty() {
            return Err(Error::InvalidSystem("chiplets: empty".into()));
        }
        if !(interposer.width_mm > 0.0) || !(interposer.height_mm > 0.0) {
            return Err(Error::InvalidSystem(
                "interposer: width_mm and height_mm must be > 0".into(),
            ));
        }
        if !interposer.ambient_c.is_finite() {
            return Err(Error::InvalidSystem("interposer: ambient_c must be finite".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &chiplets {
            if !(c.width_mm > 0.0) || !(c.length_mm > 0.0) {
                return Err(Error::InvalidSystem(format!(
                    "chiplet {}: width_mm and length_mm must be > 0",
                    c.name
                )));
            }
            if !(c.power_w >= 0.0) || !c.power_w.is_finite() {
                return Err(Error::InvalidSystem(format!(
                    "chiplet {}: power_w must be >= 0",
                    c.name
                )));
            }
            if !seen.insert(c.name.clone()) {
                return Err(Error::InvalidSystem(format!("chiplet name not unique: {}", c.name)));
            }
        }
        let total_area: f64 = chiplets.iter().map(Chiplet::area_mm2).sum();
        if total_area > interposer.area_mm2() {
            return Err(Error::InvalidSystem(format!(
                "chiplets: total area {:.3} mm^2 exceeds interposer area {:.3} mm^2",
                total_area,
                interposer.area_mm2()
            )));
        }

        let n = chiplets.len();
        let mut merged: std::collections::BTreeMap<(usize, usize), u64> =
            std::collections::BTreeMap::new();
        for net in &nets {
            if net.a == net.b {
                return Err(Error::InvalidSystem(format!("net ({}, {}): self-loop", net.a, net.b)));
            }
            if net.a >= n || net.b >= n {
                return Err(Error::InvalidSystem(format!(
                    "net ({}, {}): endpoint out of range (n = {n})",
                    net.a, net.b
                )));
            }
            if net.wires == 0 {
                return Err(Error::InvalidSystem(format!(
                    "net ({}, {}): wires must be >= 1",
                    net.a, net.b
                )));
            }
            let key = (net.a.min(net.b), net.a.max(net.b));
            *merged.entry(key).or_insert(0) += net.wires;
        }
        let nets = merged
            .into_iter()
            .map(|((a, b), wires)| Net { a, b, wires })
            .collect();

        Ok(ChipletSystem {
            name,
            interposer,
            chiplets,
            nets,
        })
    }

    pub fn chiplet_count(&self) -> usize {
        self.chiplets.len()
    }

    /// Wires between chiplets `i` and `j`, 0 if unconnected.
    pub fn wires_between(&self, i: usize, j: usize) -> u64 {
        let key = (i.min(j), i.max(j));
        self.nets
            .iter()
            .find(|n| (n.a, n.b) == key)
            .map_or(0, |n| n.wires)
    }

    /// Neighbors of `i` with the wire count of the connecting net.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.nets.iter().filter_map(move |n| {
            if n.a == i {
                Some((n.b, n.wires))
            } else if n.b == i {
                Some((n.a, n.wires))
            } else {
                None
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system serialization cannot fail")
    }
}

/// Raw wire protocol for system files; validated into [`ChipletSystem`].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    name: String,
    interposer: Interposer,
    chiplets: Vec<Chiplet>,
    #[serde(default)]
    nets: Vec<Net>,
}

/// Parse a system JSON document from a string.
pub fn parse_system_str(text: &str, origin: &str) -> Result<ChipletSystem> {
    let raw: RawSystem = serde_json::from_str(text).map_err(|e| Error::MalformedFile {
        path: origin.to_string(),
        reason: e.to_string(),
    })?;
    ChipletSystem::new(raw.name, raw.interposer, raw.chiplets, raw.nets)
}

/// Parse and validate a system JSON file.
pub fn parse_system(path: impl AsRef<Path>) -> Result<ChipletSystem> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_system_str(&text, &path.display().to_string())
}

/// A permutation of chiplet indices: the sequence chiplets are placed in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlacementOrder(pub Vec<usize>);

impl PlacementOrder {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The identity order `0, 1, .., n-1`.
    pub fn identity(n: usize) -> Self {
        PlacementOrder((0..n).collect())
    }

    /// Parse the dash-separated encoding, e.g. `2-0-1`.
    pub fn parse(text: &str) -> Result<Self> {
        let seq = text
            .split('-')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidOrder(format!("bad index {part:?} in {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PlacementOrder(seq))
    }
}

impl fmt::Display for PlacementOrder {
    /// Dash-separated indices, e.g. `2-0-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

/// Check that `order` is an exact permutation of `0..n-1`.
pub fn validate_order(system: &ChipletSystem, order: &PlacementOrder) -> Result<()> {
    let n = system.chiplet_count();
    if order.len() != n {
        return Err(Error::InvalidOrder(format!(
            "length {} does not match chiplet count {n}",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &idx in &order.0 {
        if idx >= n {
            return Err(Error::InvalidOrder(format!("index {idx} out of range (n = {n})")));
        }
        if seen[idx] {
            return Err(Error::InvalidOrder(format!("index {idx} appears twice")));
        }
        seen[idx] = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chip(name: &str, w: f64, l: f64, p: f64) -> Chiplet {
        Chiplet {
            name: name.into(),
            width_mm: w,
            length_mm: l,
            power_w: p,
        }
    }

    fn interposer(w: f64, h: f64) -> Interposer {
        Interposer {
            width_mm: w,
            height_mm: h,
            ambient_c: 45.0,
        }
    }

    #[test]
    fn single_chiplet_no_nets() {
        let text = r#"{
            "name": "solo",
            "interposer": {"width_mm": 10.0, "height_mm": 10.0, "ambient_c": 45.0},
            "chiplets": [{"name": "c0", "width_mm": 2.0, "length_mm": 3.0, "power_w": 1.5}],
            "nets": []
        }"#;
        let sys = parse_system_str(text, "inline").unwrap();
        assert_eq!(sys.chiplet_count(), 1);
        assert!(sys.nets.is_empty());
    }

    #[test]
    fn duplicate_nets_merge_by_summing_wires() {
        let text = r#"{
            "name": "dup",
            "interposer": {"width_mm": 10.0, "height_mm": 10.0, "ambient_c": 45.0},
            "chiplets": [
                {"name": "c0", "width_mm": 2.0, "length_mm": 2.0, "power_w": 1.0},
                {"name": "c1", "width_mm": 2.0, "length_mm": 2.0, "power_w": 1.0}
            ],
            "nets": [
                {"a": 0, "b": 1, "wires": 3},
                {"a": 1, "b": 0, "wires": 2}
            ]
        }"#;
        let sys = parse_system_str(text, "inline").unwrap();
        assert_eq!(sys.nets, vec![Net { a: 0, b: 1, wires: 5 }]);
    }

    #[test]
    fn oversized_chiplets_rejected() {
        // 1.2x the interposer area.
        let err = ChipletSystem::new(
            "fat".into(),
            interposer(10.0, 10.0),
            vec![chip("c0", 10.0, 6.0, 1.0), chip("c1", 10.0, 6.0, 1.0)],
            vec![],
        )
        .unwrap_err();
        match err {
            Error::InvalidSystem(msg) => assert!(msg.contains("area"), "message: {msg}"),
            other => panic!("expected InvalidSystem, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{
            "name": "x",
            "interposer": {"width_mm": 10.0, "height_mm": 10.0, "ambient_c": 45.0},
            "chiplets": [{"name": "c0", "width_mm": 2.0, "length_mm": 2.0, "power_w": 1.0}],
            "nets": [],
            "extra": 1
        }"#;
        assert!(matches!(
            parse_system_str(text, "inline").unwrap_err(),
            Error::MalformedFile { .. }
        ));
    }

    #[test]
    fn self_loop_and_bad_endpoint_rejected() {
        let base = |nets: Vec<Net>| {
            ChipletSystem::new(
                "bad".into(),
                interposer(10.0, 10.0),
                vec![chip("c0", 1.0, 1.0, 0.0), chip("c1", 1.0, 1.0, 0.0)],
                nets,
            )
        };
        assert!(base(vec![Net { a: 0, b: 0, wires: 1 }]).is_err());
        assert!(base(vec![Net { a: 0, b: 5, wires: 1 }]).is_err());
        assert!(base(vec![Net { a: 0, b: 1, wires: 0 }]).is_err());
    }

    #[test]
    fn validate_order_cases() {
        let sys = ChipletSystem::new(
            "tri".into(),
            interposer(20.0, 20.0),
            vec![
                chip("c0", 1.0, 1.0, 0.0),
                chip("c1", 1.0, 1.0, 0.0),
                chip("c2", 1.0, 1.0, 0.0),
            ],
            vec![],
        )
        .unwrap();
        assert!(validate_order(&sys, &PlacementOrder(vec![2, 0, 1])).is_ok());
        assert!(validate_order(&sys, &PlacementOrder(vec![0, 0, 1])).is_err());
        assert!(validate_order(&sys, &PlacementOrder(vec![0, 1, 2, 3])).is_err());
    }

    #[test]
    fn order_display_round_trip() {
        let order = PlacementOrder(vec![2, 0, 1]);
        assert_eq!(order.to_string(), "2-0-1");
        assert_eq!(PlacementOrder::parse("2-0-1").unwrap(), order);
    }

    #[test]
    fn serialize_parse_round_trip() {
        let sys = ChipletSystem::new(
            "rt".into(),
            interposer(25.0, 18.0),
            vec![
                chip("cpu", 5.0, 4.0, 8.0),
                chip("mem", 3.0, 3.0, 2.0),
                chip("io", 2.0, 2.5, 1.0),
            ],
            vec![Net { a: 2, b: 0, wires: 7 }, Net { a: 0, b: 1, wires: 12 }],
        )
        .unwrap();
        let back = parse_system_str(&sys.to_json(), "inline").unwrap();
        assert_eq!(back, sys);
        // Canonical order: (0,1) before (0,2).
        assert_eq!(back.nets[0], Net { a: 0, b: 1, wires: 12 });
        assert_eq!(back.nets[1], Net { a: 0, b: 2, wires: 7 });
    }
}
