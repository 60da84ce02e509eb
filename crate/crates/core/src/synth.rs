//! Deterministic road-like networks for tests and offline runs.
//!
//! Real road networks are near-planar, sparse (mean degree under 3), mostly
//! tree-like at the scale of a dozen nodes, with long degree-2 chains and a
//! small clustering coefficient. A thinned grid with subdivided streets and
//! rare diagonal shortcuts has the same local texture.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Network;

#[derive(Clone, Debug, PartialEq)]
pub struct RoadLikeParams {
    pub width: u64,
    pub height: u64,
    /// Probability that a grid street segment exists.
    pub keep: f64,
    /// Probability that a kept segment is subdivided by degree-2 nodes.
    pub subdivide: f64,
    /// Maximum number of inserted nodes per subdivided segment.
    pub max_chain: u32,
    /// Probability of a diagonal shortcut inside a grid cell.
    pub diagonal: f64,
}

impl Default for RoadLikeParams {
    fn default() -> Self {
        RoadLikeParams {
            width: 120,
            height: 120,
            keep: 0.72,
            subdivide: 0.45,
            max_chain: 3,
            diagonal: 0.05,
        }
    }
}

pub fn road_like_network(params: &RoadLikeParams, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width, params.height);
    let grid_id = |x: u64, y: u64| y * w + x;
    let mut next_id = w * h;
    let mut edges = Vec::new();

    let mut street = |a: u64, b: u64, rng: &mut ChaCha8Rng, edges: &mut Vec<(u64, u64)>| {
        if !rng.gen_bool(params.keep) {
            return;
        }
        if params.max_chain > 0 && rng.gen_bool(params.subdivide) {
            let chain = rng.gen_range(1..=params.max_chain);
            let mut prev = a;
            for _ in 0..chain {
                edges.push((prev, next_id));
                prev = next_id;
                next_id += 1;
            }
            edges.push((prev, b));
        } else {
            edges.push((a, b));
        }
    };

    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                street(grid_id(x, y), grid_id(x + 1, y), &mut rng, &mut edges);
            }
            if y + 1 < h {
                street(grid_id(x, y), grid_id(x, y + 1), &mut rng, &mut edges);
            }
            if x + 1 < w && y + 1 < h && rng.gen_bool(params.diagonal) {
                edges.push((grid_id(x, y), grid_id(x + 1, y + 1)));
            }
        }
    }
    Network::from_edges(edges)
}
