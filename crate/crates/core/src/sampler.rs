//! Neighborhood-expansion subgraph sampling and HD-balanced pair datasets.

use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, Graph, Network};
use crate::maxcut::{brute_force_optima, min_hamming_distance};

pub const DEFAULT_RESTART_CAP: usize = 10_000;
pub const DEFAULT_ATTEMPT_CAP: usize = 100_000;

/// Grows a connected node set of `size` nodes from a uniform random start.
///
/// Each step picks uniformly among the frontier (neighbors of the selected
/// set that are not yet selected). An empty frontier restarts the walk from a
/// fresh start node; `restart_cap` restarts without success is an error.
pub fn sample_subgraph<R: Rng + ?Sized>(
    net: &Network,
    size: usize,
    restart_cap: usize,
    rng: &mut R,
) -> Result<Graph> {
    if size < 2 {
        return Err(Error::domain(format!("subgraph size must be >= 2, got {size}")));
    }
    if net.is_empty() {
        return Err(Error::domain("cannot sample from an empty network"));
    }
    let mut selected: Vec<u32> = Vec::with_capacity(size);
    let mut frontier: Vec<u32> = Vec::new();
    for _ in 0..=restart_cap {
        selected.clear();
        frontier.clear();
        let start = rng.gen_range(0..net.node_count()) as u32;
        selected.push(start);
        extend_frontier(net, start, &selected, &mut frontier);
        while selected.len() < size && !frontier.is_empty() {
            let pick = frontier.remove(rng.gen_range(0..frontier.len()));
            selected.push(pick);
            extend_frontier(net, pick, &selected, &mut frontier);
        }
        if selected.len() == size {
            let ids: Vec<u64> = selected.iter().map(|&k| net.id_at(k)).collect();
            return induced_subgraph(net, &ids);
        }
    }
    Err(Error::SamplingExhausted {
        size,
        restarts: restart_cap,
    })
}

fn extend_frontier(net: &Network, node: u32, selected: &[u32], frontier: &mut Vec<u32>) {
    for &nb in net.neighbors_of_index(node) {
        if !selected.contains(&nb) && !frontier.contains(&nb) {
            frontier.push(nb);
        }
    }
}

/// Source/target instance pair with exact optima metadata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphPair {
    pub hd: u32,
    pub source: Graph,
    pub target: Graph,
    pub source_opt_cut: u32,
    pub target_opt_cut: u32,
}

pub fn sample_pair<R: Rng + ?Sized>(
    net: &Network,
    size: usize,
    restart_cap: usize,
    rng: &mut R,
) -> Result<GraphPair> {
    let source = sample_subgraph(net, size, restart_cap, rng)?;
    let target = sample_subgraph(net, size, restart_cap, rng)?;
    pair_from_graphs(source, target)
}

/// Solves both graphs exactly and fills in the pair metadata.
pub fn pair_from_graphs(source: Graph, target: Graph) -> Result<GraphPair> {
    let src = brute_force_optima(&source)?;
    let tgt = brute_force_optima(&target)?;
    Ok(GraphPair {
        hd: min_hamming_distance(&src, &tgt)?,
        source_opt_cut: src.opt_cut(),
        target_opt_cut: tgt.opt_cut(),
        source,
        target,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSpec {
    pub size: usize,
    pub pairs_per_hd: usize,
    pub hd_range: RangeInclusive<u32>,
    pub attempt_cap: usize,
    pub restart_cap: usize,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            size: 12,
            pairs_per_hd: 10,
            hd_range: 0..=6,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
            restart_cap: DEFAULT_RESTART_CAP,
        }
    }
}

/// HD-balanced list of pairs: bucket order by hd, insertion order within.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub seed: u64,
    pub pairs: Vec<GraphPair>,
    pub pairs_per_hd: usize,
    pub hd_range: RangeInclusive<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    seed: u64,
    pairs: Vec<GraphPair>,
}

impl Dataset {
    pub fn to_json(&self) -> String {
        let file = DatasetFile {
            seed: self.seed,
            pairs: self.pairs.clone(),
        };
        serde_json::to_string_pretty(&file).expect("dataset serialization cannot fail")
    }

    /// Loads a dataset file, recovering the bucket layout from the pairs.
    /// Unbalanced or out-of-order files are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text)?;
        let (lo, hi) = match (file.pairs.first(), file.pairs.last()) {
            (Some(first), Some(last)) => (first.hd, last.hd),
            _ => return Err(Error::domain("dataset file has no pairs")),
        };
        let buckets = (hi.saturating_sub(lo) + 1) as usize;
        if file.pairs.len() % buckets != 0 {
            return Err(Error::domain("dataset buckets are not balanced"));
        }
        let per = file.pairs.len() / buckets;
        for (k, pair) in file.pairs.iter().enumerate() {
            if pair.hd != lo + (k / per) as u32 {
                return Err(Error::domain(format!(
                    "pair {k} has hd {} but the balanced layout expects {}",
                    pair.hd,
                    lo + (k / per) as u32
                )));
            }
        }
        Ok(Dataset {
            seed: file.seed,
            pairs: file.pairs,
            pairs_per_hd: per,
            hd_range: lo..=hi,
        })
    }

    pub fn fill_counts(&self) -> Vec<(u32, usize)> {
        self.hd_range
            .clone()
            .map(|hd| (hd, self.pairs.iter().filter(|p| p.hd == hd).count()))
            .collect()
    }
}

/// Rejection-samples pairs until every hd bucket holds `pairs_per_hd` pairs.
pub fn build_dataset<R: Rng + ?Sized>(
    net: &Network,
    spec: &DatasetSpec,
    seed: u64,
    rng: &mut R,
) -> Result<Dataset> {
    if spec.pairs_per_hd == 0 {
        return Err(Error::domain("pairs_per_hd must be >= 1"));
    }
    if spec.hd_range.is_empty() {
        return Err(Error::domain("hd range is empty"));
    }
    let lo = *spec.hd_range.start();
    let mut buckets: Vec<Vec<GraphPair>> = vec![Vec::new(); spec.hd_range.clone().count()];
    let mut remaining = buckets.len() * spec.pairs_per_hd;
    let mut attempts = 0;
    while remaining > 0 {
        if attempts == spec.attempt_cap {
            return Err(Error::PartialDataset {
                attempts,
                fill: spec
                    .hd_range
                    .clone()
                    .zip(buckets.iter().map(Vec::len))
                    .collect(),
            });
        }
        attempts += 1;
        let pair = sample_pair(net, spec.size, spec.restart_cap, rng)?;
        if !spec.hd_range.contains(&pair.hd) {
            continue;
        }
        let bucket = &mut buckets[(pair.hd - lo) as usize];
        if bucket.len() < spec.pairs_per_hd {
            bucket.push(pair);
            remaining -= 1;
        }
    }
    log::debug!("dataset seed {seed}: {attempts} pairs sampled");
    Ok(Dataset {
        seed,
        pairs: buckets.into_iter().flatten().collect(),
        pairs_per_hd: spec.pairs_per_hd,
        hd_range: spec.hd_range.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_connected;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(len: u64) -> Network {
        Network::from_edges((0..len - 1).map(|i| (i, i + 1)))
    }

    #[test]
    fn path_samples_are_subpaths() {
        let net = path(50);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = sample_subgraph(&net, 3, DEFAULT_RESTART_CAP, &mut rng).unwrap();
            assert_eq!(g.n(), 3);
            assert_eq!(g.edge_count(), 2);
            assert!(is_connected(&g));
        }
    }

    #[test]
    fn impossible_size_exhausts() {
        // two components of 5 nodes each
        let net = Network::from_edges((0..4).map(|i| (i, i + 1)).chain((10..14).map(|i| (i, i + 1))));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_subgraph(&net, 12, 50, &mut rng),
            Err(Error::SamplingExhausted { size: 12, restarts: 50 })
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let net = path(200);
        let a = sample_subgraph(&net, 6, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_subgraph(&net, 6, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_graphs_have_hd_zero() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let pair = pair_from_graphs(g.clone(), g).unwrap();
        assert_eq!(pair.hd, 0);
        assert_eq!(pair.source_opt_cut, pair.target_opt_cut);
    }

    #[test]
    fn disjoint_copies_fill_hd_zero_bucket() {
        let tri = [(0, 1), (1, 2), (0, 2)];
        let net = Network::from_edges(tri.iter().copied().chain(tri.iter().map(|&(a, b)| (a + 10, b + 10))));
        let spec = DatasetSpec {
            size: 3,
            pairs_per_hd: 1,
            hd_range: 0..=0,
            ..Default::default()
        };
        let ds = build_dataset(&net, &spec, 1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(ds.pairs.len(), 1);
        assert_eq!(ds.pairs[0].hd, 0);
    }

    #[test]
    fn attempt_cap_reports_partial_fill() {
        let net = path(100);
        let spec = DatasetSpec {
            size: 6,
            pairs_per_hd: 5,
            hd_range: 0..=3,
            attempt_cap: 1,
            ..Default::default()
        };
        match build_dataset(&net, &spec, 0, &mut ChaCha8Rng::seed_from_u64(0)) {
            Err(Error::PartialDataset { attempts, fill }) => {
                assert_eq!(attempts, 1);
                assert_eq!(fill.len(), 4);
                assert!(fill.iter().map(|f| f.1).sum::<usize>() <= 1);
            }
            other => panic!("expected partial dataset, got {other:?}"),
        }
    }

    #[test]
    fn dataset_json_round_trip_and_validation() {
        let params = crate::synth::RoadLikeParams {
            width: 20,
            height: 20,
            ..Default::default()
        };
        let net = crate::synth::road_like_network(&params, 2);
        let spec = DatasetSpec {
            size: 4,
            pairs_per_hd: 2,
            hd_range: 0..=1,
            ..Default::default()
        };
        let ds = build_dataset(&net, &spec, 5, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let back = Dataset::from_json(&ds.to_json()).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.fill_counts(), vec![(0, 2), (1, 2)]);

        let mut broken = ds.clone();
        broken.pairs.swap(0, 3);
        assert!(Dataset::from_json(&broken.to_json()).is_err());
    }
}
