//! Undirected simple graphs and road-network ingestion.
//!
//! A [`Network`] is the large source graph (node ids as found in the edge
//! list file). A [`Graph`] is a small problem instance with nodes relabeled
//! `0..n`, produced by [`induced_subgraph`].

use std::collections::{HashMap, VecDeque};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unweighted, undirected simple graph on nodes `0..n`.
///
/// Edges are stored canonically as `(i, j)` with `i < j`, sorted
/// lexicographically, so two graphs with the same edge set compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        Graph::new(raw.n, raw.edges)
    }
}

impl Graph {
    /// Builds a graph, canonicalizing endpoint order. Self-loops, duplicate
    /// edges and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Graph { n, edges: canon })
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, edges: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).is_ok()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// True iff every node is reachable from node 0. Graphs with zero or one
/// node count as connected.
pub fn is_connected(g: &Graph) -> bool {
    if g.n <= 1 {
        return true;
    }
    let mut adj = vec![Vec::new(); g.n];
    for &(a, b) in &g.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; g.n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    reached == g.n
}

/// Large undirected network keyed by the node ids of the source file.
///
/// Stored in compressed adjacency form over the sorted id list; construction
/// is independent of input edge order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    ids: Vec<u64>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    index: HashMap<u64, u32>,
}

impl Network {
    /// Builds a network from undirected edges. Reversed and repeated edges
    /// collapse; self-loops are dropped.
    pub fn from_edges(edges: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut pairs: Vec<(u64, u64)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();

        let mut ids: Vec<u64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        let index: HashMap<u64, u32> = ids
            .iter()
            .enumerate()
            .map(|(k, &id)| (id, k as u32))
            .collect();

        let mut degree = vec![0usize; ids.len()];
        for &(a, b) in &pairs {
            degree[index[&a] as usize] += 1;
            degree[index[&b] as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(ids.len() + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..ids.len()].to_vec();
        let mut adjacency = vec![0u32; offsets[ids.len()]];
        for &(a, b) in &pairs {
            let (ia, ib) = (index[&a], index[&b]);
            adjacency[fill[ia as usize]] = ib;
            fill[ia as usize] += 1;
            adjacency[fill[ib as usize]] = ia;
            fill[ib as usize] += 1;
        }
        for k in 0..ids.len() {
            adjacency[offsets[k]..offsets[k + 1]].sort_unstable();
        }

        Network {
            ids,
            offsets,
            adjacency,
            index,
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.index.contains_key(&id)
    }

    /// Sorted node ids.
    pub fn node_ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn neighbors(&self, id: u64) -> Result<impl Iterator<Item = u64> + '_> {
        let k = self.position(id)?;
        Ok(self.neighbors_of_index(k).iter().map(|&j| self.ids[j as usize]))
    }

    pub fn has_edge(&self, a: u64, b: u64) -> bool {
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(&ia), Some(&ib)) => self.neighbors_of_index(ia).binary_search(&ib).is_ok(),
            _ => false,
        }
    }

    /// Undirected edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.ids.len()).flat_map(move |k| {
            self.neighbors_of_index(k as u32)
                .iter()
                .filter(move |&&j| j as usize > k)
                .map(move |&j| (self.ids[k], self.ids[j as usize]))
        })
    }

    pub(crate) fn position(&self, id: u64) -> Result<u32> {
        self.index.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    pub(crate) fn id_at(&self, k: u32) -> u64 {
        self.ids[k as usize]
    }

    pub(crate) fn neighbors_of_index(&self, k: u32) -> &[u32] {
        let k = k as usize;
        &self.adjacency[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Serializes as a SNAP-style edge list, one undirected edge per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!(
            "# Undirected network\n# Nodes: {} Edges: {}\n# FromNodeId\tToNodeId\n",
            self.node_count(),
            self.edge_count()
        );
        for (a, b) in self.edges() {
            out.push_str(&format!("{a}\t{b}\n"));
        }
        out
    }
}

/// Parses a SNAP-style edge list: `#` comment lines, blank lines ignored,
/// otherwise exactly two non-negative integers separated by whitespace.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Network> {
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next_id = || -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected two node ids".into(),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid node id {tok:?}"),
            })
        };
        let a = next_id()?;
        let b = next_id()?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unexpected extra token {extra:?}"),
            });
        }
        edges.push((a, b));
    }
    Ok(Network::from_edges(edges))
}

pub fn parse_edge_list_str(text: &str) -> Result<Network> {
    parse_edge_list(text.as_bytes())
}

/// Subgraph induced by `nodes`, relabeled so node `k` is `nodes[k]`.
pub fn induced_subgraph(net: &Network, nodes: &[u64]) -> Result<Graph> {
    let mut local: HashMap<u32, usize> = HashMap::with_capacity(nodes.len());
    for (k, &id) in nodes.iter().enumerate() {
        let pos = net.position(id)?;
        if local.insert(pos, k).is_some() {
            return Err(Error::DuplicateNode(id));
        }
    }
    let mut edges = Vec::new();
    for (a, &id) in nodes.iter().enumerate() {
        let pos = net.position(id)?;
        for nb in net.neighbors_of_index(pos) {
            if let Some(&b) = local.get(nb) {
                if a < b {
                    edges.push((a, b));
                }
            }
        }
    }
    Graph::new(nodes.len(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_tabs() {
        let net = parse_edge_list_str("# hdr\n0\t1\n1\t2\n").unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn reversed_duplicates_collapse() {
        let net = parse_edge_list_str("0 1\n1 0\n").unwrap();
        assert_eq!(net.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn self_loops_dropped() {
        let net = parse_edge_list_str("3 3\n3 4\n").unwrap();
        assert_eq!(net.edges().collect::<Vec<_>>(), vec![(3, 4)]);
        assert!(!net.has_edge(3, 3));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_edge_list_str("# c\n0 1\n2 x\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(matches!(
            parse_edge_list_str("5\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_edge_list_str("-1 2\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn induced_path() {
        let net = Network::from_edges([(5, 6), (6, 7)]);
        let g = induced_subgraph(&net, &[5, 6, 7]).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn induced_relabels_by_list_order() {
        let net = Network::from_edges([(1, 2), (2, 3), (1, 3)]);
        let g = induced_subgraph(&net, &[3, 1]).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn induced_empty_and_errors() {
        let net = Network::from_edges([(1, 2)]);
        let g = induced_subgraph(&net, &[]).unwrap();
        assert_eq!(g.n(), 0);
        assert_eq!(g.edge_count(), 0);
        assert!(matches!(
            induced_subgraph(&net, &[1, 9]),
            Err(Error::UnknownNode(9))
        ));
        assert!(matches!(
            induced_subgraph(&net, &[1, 1]),
            Err(Error::DuplicateNode(1))
        ));
    }

    #[test]
    fn connectivity() {
        let p3 = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(is_connected(&p3));
        assert!(!is_connected(&Graph::empty(2)));
        assert!(is_connected(&Graph::empty(1)));
        assert!(is_connected(&Graph::empty(0)));
    }

    #[test]
    fn graph_json_is_canonical() {
        let g = Graph::new(3, [(2, 0), (1, 0)]).unwrap();
        assert_eq!(g.to_json(), r#"{"n":3,"edges":[[0,1],[0,2]]}"#);
        assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
        assert!(Graph::from_json(r#"{"n":2,"edges":[[0,2]]}"#).is_err());
        assert!(Graph::from_json(r#"{"n":2,"edges":[[0,1],[1,0]]}"#).is_err());
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert!(Graph::new(2, [(1, 1)]).is_err());
        assert!(Graph::new(2, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(2, [(0, 2)]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let net = Network::from_edges([(10, 2), (2, 7), (7, 10), (7, 8)]);
        let back = parse_edge_list_str(&net.to_edge_list()).unwrap();
        assert_eq!(back, net);
    }
}
