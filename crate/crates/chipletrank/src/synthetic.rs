//! Seeded generator for the bundled benchmark systems.
//!
//! Four connectivity/power profiles give the suite spread in both
//! objectives: hub-dominated wirelength, chain locality, dense meshes, and
//! thermally constrained twin hotspots. Regenerating with the same seed
//! reproduces the bundled files byte for byte.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::suite::Split;
use crate::system::{Chiplet, ChipletSystem, Interposer, Net};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// One large, hot hub wired to every other chiplet.
    Star,
    /// A path with mixed wire weights and one hot link.
    Chain,
    /// Dense random connectivity with uniform moderate power.
    Mesh,
    /// Two hot chiplets on a ring of cool ones.
    Hotspot,
}

fn tenth(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let steps = ((hi - lo) * 10.0).round() as u64;
    lo + rng.gen_range(0..=steps) as f64 / 10.0
}

/// Generate one synthetic system. Deterministic in all arguments.
pub fn synthesize(name: &str, n: usize, profile: Profile, seed: u64) -> ChipletSystem {
    assert!(n >= 4, "profiles need at least four chiplets");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chiplets = Vec::with_capacity(n);
    let mut nets: Vec<Net> = Vec::new();

    // Every profile carries one oversized, cool, thinly wired chiplet. Its
    // area inflates its importance-times-area score far beyond what its
    // connectivity earns, so importance-first orderings waste the center of
    // the interposer on it.
    let decoy = |rng: &mut ChaCha8Rng, wired_to: usize| {
        (
            Chiplet {
                name: "pad".into(),
                width_mm: tenth(rng, 6.5, 8.0),
                length_mm: tenth(rng, 6.5, 8.0),
                power_w: tenth(rng, 0.5, 1.5),
            },
            Net {
                a: usize::MAX, // patched by the caller
                b: wired_to,
                wires: rng.gen_range(1..=3),
            },
        )
    };

    match profile {
        Profile::Star => {
            chiplets.push(Chiplet {
                name: "hub".into(),
                width_mm: tenth(&mut rng, 4.0, 5.5),
                length_mm: tenth(&mut rng, 4.0, 5.5),
                power_w: tenth(&mut rng, 8.0, 14.0),
            });
            for i in 1..n - 1 {
                chiplets.push(Chiplet {
                    name: format!("leaf{i}"),
                    width_mm: tenth(&mut rng, 2.0, 4.5),
                    length_mm: tenth(&mut rng, 2.0, 4.5),
                    power_w: tenth(&mut rng, 0.5, 3.0),
                });
                nets.push(Net {
                    a: 0,
                    b: i,
                    wires: rng.gen_range(8..=48),
                });
            }
            for _ in 0..rng.gen_range(1..=2) {
                let a = rng.gen_range(1..n - 1);
                let b = rng.gen_range(1..n - 1);
                if a != b {
                    nets.push(Net {
                        a,
                        b,
                        wires: rng.gen_range(1..=8),
                    });
                }
            }
            let (pad, mut net) = decoy(&mut rng, rng.gen_range(1..n - 1));
            net.a = n - 1;
            chiplets.push(pad);
            nets.push(net);
        }
        Profile::Chain => {
            let hot = rng.gen_range(0..n - 1);
            for i in 0..n - 1 {
                let power = if i == hot {
                    tenth(&mut rng, 6.0, 12.0)
                } else {
                    tenth(&mut rng, 0.5, 4.0)
                };
                chiplets.push(Chiplet {
                    name: format!("link{i}"),
                    width_mm: tenth(&mut rng, 2.0, 4.5),
                    length_mm: tenth(&mut rng, 2.0, 4.5),
                    power_w: power,
                });
            }
            for i in 0..n - 2 {
                nets.push(Net {
                    a: i,
                    b: i + 1,
                    wires: rng.gen_range(8..=40),
                });
            }
            let (pad, mut net) = decoy(&mut rng, rng.gen_range(0..n - 1));
            net.a = n - 1;
            chiplets.push(pad);
            nets.push(net);
        }
        Profile::Mesh => {
            for i in 0..n - 1 {
                chiplets.push(Chiplet {
                    name: format!("tile{i}"),
                    width_mm: tenth(&mut rng, 2.0, 4.5),
                    length_mm: tenth(&mut rng, 2.0, 4.5),
                    power_w: tenth(&mut rng, 0.5, 4.0),
                });
            }
            for i in 1..n - 1 {
                nets.push(Net {
                    a: i - 1,
                    b: i,
                    wires: rng.gen_range(4..=16),
                });
            }
            for a in 0..n - 1 {
                for b in a + 2..n - 1 {
                    if rng.gen_bool(0.5) {
                        nets.push(Net {
                            a,
                            b,
                            wires: rng.gen_range(1..=24),
                        });
                    }
                }
            }
            let (pad, mut net) = decoy(&mut rng, rng.gen_range(0..n - 1));
            net.a = n - 1;
            chiplets.push(pad);
            nets.push(net);
        }
        Profile::Hotspot => {
            let ring = n - 1;
            for i in 0..ring {
                let hot = i < 2;
                chiplets.push(Chiplet {
                    name: if hot { format!("hot{i}") } else { format!("cool{i}") },
                    width_mm: tenth(&mut rng, if hot { 4.0 } else { 2.0 }, if hot { 5.5 } else { 4.0 }),
                    length_mm: tenth(&mut rng, if hot { 4.0 } else { 2.0 }, if hot { 5.5 } else { 4.0 }),
                    power_w: if hot {
                        tenth(&mut rng, 7.0, 13.0)
                    } else {
                        tenth(&mut rng, 0.5, 2.0)
                    },
                });
            }
            for i in 0..ring {
                nets.push(Net {
                    a: i,
                    b: (i + 1) % ring,
                    wires: rng.gen_range(3..=30),
                });
            }
            let (pad, mut net) = decoy(&mut rng, rng.gen_range(0..ring));
            net.a = n - 1;
            chiplets.push(pad);
            nets.push(net);
        }
    }

    let total_area: f64 = chiplets.iter().map(Chiplet::area_mm2).sum();
    let factor = tenth(&mut rng, 3.6, 4.2);
    let side = (total_area * factor).sqrt().ceil();
    ChipletSystem::new(
        name.to_string(),
        Interposer {
            width_mm: side,
            height_mm: side,
            ambient_c: 45.0,
        },
        chiplets,
        nets,
    )
    .expect("generated system must validate")
}

/// One bundled benchmark system; `split` is `None` for the extra systems
/// outside the 4-train/3-test suite.
pub struct BundledSystem {
    pub id: &'static str,
    pub split: Option<Split>,
    pub system: ChipletSystem,
}

/// The canonical bundled corpus: seven 6-chiplet suite systems in a
/// 4-train/3-test split, plus a 5- and a 7-chiplet extra.
pub fn bundled_systems() -> Vec<BundledSystem> {
    vec![
        BundledSystem {
            id: "star_a",
            split: Some(Split::Train),
            system: synthesize("star_a", 6, Profile::Star, 1001),
        },
        BundledSystem {
            id: "chain_a",
            split: Some(Split::Train),
            system: synthesize("chain_a", 6, Profile::Chain, 1002),
        },
        BundledSystem {
            id: "mesh_a",
            split: Some(Split::Train),
            system: synthesize("mesh_a", 6, Profile::Mesh, 1003),
        },
        BundledSystem {
            id: "hot_a",
            split: Some(Split::Train),
            system: synthesize("hot_a", 6, Profile::Hotspot, 1004),
        },
        BundledSystem {
            id: "star_b",
            split: Some(Split::Test),
            system: synthesize("star_b", 6, Profile::Star, 2001),
        },
        BundledSystem {
            id: "mesh_b",
            split: Some(Split::Test),
            system: synthesize("mesh_b", 6, Profile::Mesh, 2002),
        },
        BundledSystem {
            id: "chain_b",
            split: Some(Split::Test),
            system: synthesize("chain_b", 6, Profile::Chain, 2003),
        },
        BundledSystem {
            id: "star_small",
            split: None,
            system: synthesize("star_small", 5, Profile::Star, 3001),
        },
        BundledSystem {
            id: "mesh_wide",
            split: None,
            system: synthesize("mesh_wide", 7, Profile::Mesh, 3002),
        },
    ]
}

/// The suite manifest body for the bundled split, with system files assumed
/// to sit beside it.
pub fn bundled_suite() -> crate::suite::Suite {
    crate::suite::Suite {
        systems: bundled_systems()
            .into_iter()
            .filter_map(|b| {
                b.split.map(|split| crate::suite::SuiteEntry {
                    id: b.id.to_string(),
                    system: format!("{}.json", b.id).into(),
                    split,
                })
            })
            .collect(),
    }
}
