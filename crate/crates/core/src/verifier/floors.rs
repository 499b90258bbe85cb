//! Pinned lower bounds for the arrowhead ratio `M^{11} / Σ M^{ll}`.
//!
//! The arrowhead inequality only asserts that some positive constant
//! exists, so the floors are empirical: half of the smallest ratio seen
//! over a long seeded sweep of strong samples.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::grad_mp_adjugate;
use crate::cone::sample_arrowhead;
use crate::error::Result;

const FLOORS_JSON: &str = include_str!("../../data/arrowhead_floors.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrowheadFloor {
    pub n: usize,
    pub p: usize,
    pub c: f64,
    pub floor: f64,
    pub observed_min: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn arrowhead_floors() -> &'static [ArrowheadFloor] {
    static FLOORS: OnceLock<Vec<ArrowheadFloor>> = OnceLock::new();
    FLOORS.get_or_init(|| serde_json::from_str(FLOORS_JSON).expect("bundled floors parse"))
}

pub fn arrowhead_floor(n: usize, p: usize, c: f64) -> Option<ArrowheadFloor> {
    arrowhead_floors()
        .iter()
        .find(|f| f.n == n && f.p == p && (f.c - c).abs() <= 1e-12 * c.abs())
        .copied()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArrowheadSweep {
    pub strong: usize,
    /// `None` when no strong sample was drawn.
    pub min_ratio: Option<f64>,
}

/// Smallest `M^{11} / Σ M^{ll}` over the strong samples among `samples`
/// seeded arrowhead draws.
pub fn arrowhead_sweep(
    n: usize,
    p: usize,
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<ArrowheadSweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ArrowheadSweep {
        strong: 0,
        min_ratio: None,
    };
    for _ in 0..samples {
        let s = sample_arrowhead(n, p, c, rng.random())?;
        if !s.strong {
            continue;
        }
        out.strong += 1;
        let g = grad_mp_adjugate(s.matrix.matrix(), p)?;
        let r = g.get(0, 0) / g.trace();
        out.min_ratio = Some(out.min_ratio.map_or(r, |m: f64| m.min(r)));
    }
    Ok(out)
}
