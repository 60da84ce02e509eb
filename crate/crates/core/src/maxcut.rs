//! Exact MaxCut: cut values, brute-force optima and Hamming distances
//! between optimal-solution sets.
//!
//! Bit convention: bit `b_i = 0` puts node `i` in the first partition
//! (spin `z_i = +1`), `b_i = 1` in the second (`z_i = -1`). Bit `i` of an
//! assignment mask is node `i`, which is also qubit `i` of a basis index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest graph the brute-force oracle accepts by default.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// A bipartition of `n` nodes packed into a bit mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    n: usize,
    mask: u32,
}

impl Assignment {
    pub fn new(n: usize, mask: u32) -> Result<Self> {
        if n > 32 {
            return Err(Error::Capacity {
                what: "assignment length",
                got: n,
                limit: 32,
            });
        }
        if n < 32 && mask >> n != 0 {
            return Err(Error::domain(format!(
                "mask {mask:#x} has bits set beyond length {n}"
            )));
        }
        Ok(Assignment { n, mask })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mask = bits
            .iter()
            .enumerate()
            .fold(0u32, |m, (i, &b)| m | (u32::from(b) << i));
        Assignment::new(bits.len(), mask)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.mask >> i) & 1 == 1
    }

    /// Spin of node `i`: `+1` for bit 0, `-1` for bit 1.
    pub fn spin(&self, i: usize) -> i32 {
        1 - 2 * i32::from(self.bit(i))
    }

    pub fn complement(&self) -> Self {
        let full = if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        };
        Assignment {
            n: self.n,
            mask: !self.mask & full,
        }
    }
}

/// 0/1 string, node 0 leftmost.
impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::domain(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Assignment::from_bits(&bits)
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of edges whose endpoints lie in different partitions.
pub fn cut_value(g: &Graph, a: &Assignment) -> Result<u32> {
    if a.len() != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            got: a.len(),
        });
    }
    Ok(cut_of_mask(g, a.mask))
}

pub(crate) fn cut_of_mask(g: &Graph, mask: u32) -> u32 {
    g.edges()
        .iter()
        .map(|&(i, j)| ((mask >> i) ^ (mask >> j)) & 1)
        .sum()
}

/// All maximum cuts of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimaSet {
    n: usize,
    opt_cut: u32,
    masks: Vec<u32>,
}

impl OptimaSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn opt_cut(&self) -> u32 {
        self.opt_cut
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Optimal assignments in increasing mask order.
    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.masks.iter().map(move |&mask| Assignment { n: self.n, mask })
    }

    pub fn contains(&self, a: &Assignment) -> bool {
        a.n == self.n && self.masks.binary_search(&a.mask).is_ok()
    }
}

pub fn brute_force_optima(g: &Graph) -> Result<OptimaSet> {
    brute_force_optima_with_limit(g, BRUTE_FORCE_LIMIT)
}

pub fn brute_force_optima_with_limit(g: &Graph, limit: usize) -> Result<OptimaSet> {
    let limit = limit.min(31);
    if g.n() > limit {
        return Err(Error::Capacity {
            what: "brute-force node count",
            got: g.n(),
            limit,
        });
    }
    let mut best = 0u32;
    let mut masks = Vec::new();
    for mask in 0..(1u32 << g.n()) {
        let cut = cut_of_mask(g, mask);
        if cut > best {
            best = cut;
            masks.clear();
        }
        if cut == best {
            masks.push(mask);
        }
    }
    Ok(OptimaSet {
        n: g.n(),
        opt_cut: best,
        masks,
    })
}

pub fn hamming(a: &Assignment, b: &Assignment) -> Result<u32> {
    if a.n != b.n {
        return Err(Error::Dimension {
            expected: a.n,
            got: b.n,
        });
    }
    Ok((a.mask ^ b.mask).count_ones())
}

/// Smallest Hamming distance over all cross pairs of the two sets.
pub fn min_hamming_distance(a: &OptimaSet, b: &OptimaSet) -> Result<u32> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("min_hamming_distance of an empty optima set"));
    }
    if a.n != b.n {
        return Err(Error::Dimension {
            expected: a.n,
            got: b.n,
        });
    }
    let mut best = u32::MAX;
    for &x in &a.masks {
        for &y in &b.masks {
            best = best.min((x ^ y).count_ones());
            if best == 0 {
                return Ok(0);
            }
        }
    }
    Ok(best)
}
