use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected graph on `p` nodes with a weight per edge. Pairs are stored as
/// `(min, max)`, zero-based.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeSet {
    nodes: usize,
    edges: BTreeMap<(usize, usize), f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl EdgeSet {
    pub fn empty(nodes: usize) -> Self {
        Self { nodes, edges: BTreeMap::new() }
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(nodes: usize, pairs: I) -> Result<Self> {
        let mut set = Self::empty(nodes);
        for (a, b) in pairs {
            set.insert(a, b, 1.0)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, a: usize, b: usize, weight: f64) -> Result<()> {
        if a == b {
            return Err(Error::InvalidInput(format!("self-loop on node {a}")));
        }
        if a >= self.nodes || b >= self.nodes {
            return Err(Error::InvalidInput(format!(
                "edge ({a}, {b}) out of range for {} nodes",
                self.nodes
            )));
        }
        self.edges.insert((a.min(b), a.max(b)), weight);
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains_key(&(a.min(b), a.max(b)))
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.edges.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = WeightedEdge> + '_ {
        self.edges.iter().map(|(&(a, b), &weight)| WeightedEdge { a, b, weight })
    }

    /// Copy with weights scaled so the largest is 1.
    pub fn normalized(&self) -> Self {
        let top = self.edges.values().cloned().fold(0.0_f64, f64::max);
        let mut out = self.clone();
        if top > 0.0 {
            out.edges.values_mut().for_each(|w| *w /= top);
        }
        out
    }

    /// Fraction of the `p(p-1)/2` node pairs that are connected.
    pub fn density(&self) -> f64 {
        let total = self.nodes * self.nodes.saturating_sub(1) / 2;
        if total == 0 {
            0.0
        } else {
            self.len() as f64 / total as f64
        }
    }

    /// Edge set after relabeling node `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut out = Self::empty(self.nodes);
        for e in self.iter() {
            out.insert(perm[e.a], perm[e.b], e.weight)?;
        }
        Ok(out)
    }
}
