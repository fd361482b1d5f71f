//! Multi-edge network data model and edge-list ingestion.
//!
//! A [`MultiGraph`] is a vertex set plus an integer matrix of edge counts.
//! Undirected graphs store counts canonically in the upper triangle; every
//! model and sampler in this crate iterates *dyads* (canonical cells), never
//! ordered pairs, for undirected graphs.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("negative edge count on line {line}")]
    NegativeCount { line: usize },
    #[error("self-loop on line {line} but self-loops are disallowed")]
    DisallowedSelfLoop { line: usize },
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("unknown vertex '{0}' in partition")]
    UnknownVertex(String),
    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),
}

/// Dyad bookkeeping shared by graphs and fitted models: dimension,
/// directedness, and whether diagonal cells exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadLayout {
    pub n: usize,
    pub directed: bool,
    pub selfloops: bool,
}

impl DyadLayout {
    /// Number of dyads: n^2, n(n-1), n(n+1)/2 or n(n-1)/2 depending on
    /// directedness and self-loop support.
    pub fn cell_count(&self) -> usize {
        match (self.directed, self.selfloops) {
            (true, true) => self.n * self.n,
            (true, false) => self.n * (self.n - 1),
            (false, true) => self.n * (self.n + 1) / 2,
            (false, false) => self.n * (self.n - 1) / 2,
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && (self.selfloops || i != j) && (self.directed || i <= j)
    }

    /// Canonical cell for a vertex pair (sorts the pair when undirected).
    pub fn canonical(&self, i: usize, j: usize) -> (usize, usize) {
        if !self.directed && i > j {
            (j, i)
        } else {
            (i, j)
        }
    }

    /// Iterate all canonical dyads in row-major order.
    pub fn dyads(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let layout = *self;
        (0..layout.n).flat_map(move |i| {
            let start = if layout.directed { 0 } else { i };
            (start..layout.n)
                .filter(move |&j| layout.selfloops || i != j)
                .map(move |j| (i, j))
        })
    }

    /// Row-major index into the dense n x n matrices used throughout (counts,
    /// capacities, propensities, expected values).
    pub fn dense_index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }
}

/// An immutable multi-edge network: labelled vertices and a nonnegative
/// integer count per dyad.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    layout: DyadLayout,
    counts: Vec<u64>,
    labels: Vec<String>,
    index: HashMap<String, usize>,
    m: u64,
}

impl MultiGraph {
    /// Build a graph from a dense n x n count matrix (row-major). Counts must
    /// respect the layout: zero diagonal when self-loops are disallowed, and
    /// an empty lower triangle when undirected.
    pub fn from_dense_counts(
        counts: Vec<u64>,
        directed: bool,
        selfloops: bool,
        labels: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        let n2 = counts.len();
        let n = (n2 as f64).sqrt().round() as usize;
        if n * n != n2 {
            return Err(GraphError::InvalidCounts(format!(
                "count vector of length {n2} is not square"
            )));
        }
        let layout = DyadLayout {
            n,
            directed,
            selfloops,
        };
        for i in 0..n {
            for j in 0..n {
                let c = counts[i * n + j];
                if c > 0 && !layout.contains(i, j) {
                    return Err(GraphError::InvalidCounts(format!(
                        "cell ({i},{j}) populated outside the layout"
                    )));
                }
            }
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        if labels.len() != n {
            return Err(GraphError::InvalidCounts(format!(
                "{} labels for {} vertices",
                labels.len(),
                n
            )));
        }
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        let m = counts.iter().sum();
        Ok(MultiGraph {
            layout,
            counts,
            labels,
            index,
            m,
        })
    }

    pub fn layout(&self) -> DyadLayout {
        self.layout
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }

    /// Total number of multi-edges (sum of counts over dyads).
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn directed(&self) -> bool {
        self.layout.directed
    }

    pub fn selfloops(&self) -> bool {
        self.layout.selfloops
    }

    /// Number of dyads available under this graph's layout.
    pub fn cell_count(&self) -> usize {
        self.layout.cell_count()
    }

    /// Edge count on the canonical cell for (i, j).
    pub fn count(&self, i: usize, j: usize) -> u64 {
        let (a, b) = self.layout.canonical(i, j);
        self.counts[self.layout.dense_index(a, b)]
    }


    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Replace vertex labels (used when emitting sampled replicates with the
    /// labels of the graph the model was fitted on).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, GraphError> {
        if labels.len() != self.layout.n {
            return Err(GraphError::InvalidCounts(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.layout.n
            )));
        }
        self.index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        self.labels = labels;
        Ok(self)
    }

    /// Degree sequences. Directed graphs return (out, in); undirected graphs
    /// return the same sequence twice, with self-loops counting two.
    pub fn degrees(&self) -> (Vec<u64>, Vec<u64>) {
        let n = self.layout.n;
        if self.layout.directed {
            let mut kout = vec![0u64; n];
            let mut kin = vec![0u64; n];
            for (i, j) in self.layout.dyads() {
                let c = self.counts[self.layout.dense_index(i, j)];
                kout[i] += c;
                kin[j] += c;
            }
            (kout, kin)
        } else {
            let mut k = vec![0u64; n];
            for (i, j) in self.layout.dyads() {
                let c = self.counts[self.layout.dense_index(i, j)];
                k[i] += c;
                k[j] += c; // i == j counts twice, on purpose
            }
            (k.clone(), k)
        }
    }

    /// Serialize to edge-list text. Isolated vertices are declared with a
    /// zero-count line so reloading reproduces the full vertex set.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.layout.n {
            let mut any = false;
            for j in 0..self.layout.n {
                if !self.layout.contains(i, j) || (!self.layout.directed && j < i) {
                    continue;
                }
                let c = self.counts[self.layout.dense_index(i, j)];
                if c > 0 {
                    any = true;
                    writeln!(out, "{}\t{}\t{}", self.labels[i], self.labels[j], c).unwrap();
                }
            }
            let incident = any
                || (0..self.layout.n).any(|u| {
                    self.layout.contains(u, i)
                        && self.counts[self.layout.dense_index(
                            self.layout.canonical(u, i).0,
                            self.layout.canonical(u, i).1,
                        )] > 0
                });
            if !incident {
                writeln!(out, "{}\t{}\t0", self.labels[i], self.labels[i]).unwrap();
            }
        }
        out
    }
}

/// Parse whitespace-separated edge-list text: `source target [count]` with
/// `#` comments and blank lines ignored. Repeated lines accumulate. A fourth
/// column (e.g. timestamps) is accepted and ignored. Self-loop support is
/// detected from the data.
pub fn load_edgelist(src: &str, directed: bool) -> Result<MultiGraph, GraphError> {
    load_edgelist_with(src, directed, None)
}

/// Like [`load_edgelist`] but with an explicit self-loop policy. Passing
/// `Some(false)` rejects input containing self-loops.
pub fn load_edgelist_with(
    src: &str,
    directed: bool,
    selfloops: Option<bool>,
) -> Result<MultiGraph, GraphError> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize, u64)> = Vec::new();
    let mut saw_selfloop = false;

    let intern = |tok: &str, labels: &mut Vec<String>, index: &mut HashMap<String, usize>| {
        if let Some(&i) = index.get(tok) {
            i
        } else {
            let i = labels.len();
            labels.push(tok.to_string());
            index.insert(tok.to_string(), i);
            i
        }
    };

    for (lineno, raw) in src.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 4 {
            return Err(GraphError::Parse {
                line,
                message: format!("expected 'source target [count]', got {} fields", fields.len()),
            });
        }
        let a = intern(fields[0], &mut labels, &mut index);
        let b = intern(fields[1], &mut labels, &mut index);
        let count = if fields.len() >= 3 {
            let signed: i64 = fields[2].parse().map_err(|_| GraphError::Parse {
                line,
                message: format!("invalid count '{}'", fields[2]),
            })?;
            if signed < 0 {
                return Err(GraphError::NegativeCount { line });
            }
            signed as u64
        } else {
            1
        };
        if a == b && count > 0 {
            if selfloops == Some(false) {
                return Err(GraphError::DisallowedSelfLoop { line });
            }
            saw_selfloop = true;
        }
        edges.push((a, b, count));
    }

    let n = labels.len();
    let allow_loops = selfloops.unwrap_or(saw_selfloop);
    let layout = DyadLayout {
        n,
        directed,
        selfloops: allow_loops,
    };
    let mut counts = vec![0u64; n * n];
    for (a, b, c) in edges {
        let (i, j) = layout.canonical(a, b);
        counts[layout.dense_index(i, j)] += c;
    }
    MultiGraph::from_dense_counts(counts, directed, allow_loops, Some(labels))
}

/// A vertex partition into groups, for block models.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    group_labels: Vec<String>,
}

impl Partition {
    /// Parse `vertex group` lines against the graph's vertex set. Every
    /// vertex must be assigned exactly once.
    pub fn from_text(src: &str, graph: &MultiGraph) -> Result<Self, GraphError> {
        let n = graph.n();
        let mut assignment = vec![usize::MAX; n];
        let mut group_labels: Vec<String> = Vec::new();
        let mut group_index: HashMap<String, usize> = HashMap::new();
        for (lineno, raw) in src.lines().enumerate() {
            let line = lineno + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    line,
                    message: format!("expected 'vertex group', got {} fields", fields.len()),
                });
            }
            let v = graph
                .vertex_index(fields[0])
                .ok_or_else(|| GraphError::UnknownVertex(fields[0].to_string()))?;
            if assignment[v] != usize::MAX {
                return Err(GraphError::PartitionMismatch(format!(
                    "vertex '{}' assigned twice",
                    fields[0]
                )));
            }
            let g = *group_index.entry(fields[1].to_string()).or_insert_with(|| {
                group_labels.push(fields[1].to_string());
                group_labels.len() - 1
            });
            assignment[v] = g;
        }
        if let Some(v) = assignment.iter().position(|&g| g == usize::MAX) {
            return Err(GraphError::PartitionMismatch(format!(
                "vertex '{}' has no group",
                graph.labels()[v]
            )));
        }
        Ok(Partition {
            assignment,
            group_labels,
        })
    }

    /// Build directly from group indices (must be dense 0..B).
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self, GraphError> {
        if assignment.is_empty() {
            return Err(GraphError::PartitionMismatch("empty assignment".into()));
        }
        let b = assignment.iter().max().unwrap() + 1;
        for g in 0..b {
            if !assignment.contains(&g) {
                return Err(GraphError::PartitionMismatch(format!(
                    "group {g} is empty; group ids must be dense"
                )));
            }
        }
        let group_labels = (0..b).map(|g| g.to_string()).collect();
        Ok(Partition {
            assignment,
            group_labels,
        })
    }

    pub fn group_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    /// Number of groups B.
    pub fn group_count(&self) -> usize {
        self.group_labels.len()
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// The bundled Zachary karate club interaction network: 34 members, 231
/// multi-edges, undirected. This is the weighted interaction-count variant,
/// not the commonly circulated 78-edge binary graph.
pub fn zachary_karate_club() -> MultiGraph {
    let src = include_str!("../data/zkc.tsv");
    load_edgelist(src, false).expect("bundled karate club data must parse")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulates_repeated_directed_lines() {
        let g = load_edgelist("a b\na b\nb c", true).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 3);
        assert_eq!(g.count(0, 1), 2);
        assert_eq!(g.count(1, 2), 1);
        assert!(!g.selfloops());
    }

    #[test]
    fn undirected_accumulates_across_orientations() {
        let g = load_edgelist("a b 2\nb a 3", false).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.m(), 5);
        assert_eq!(g.count(0, 1), 5);
        assert_eq!(g.count(1, 0), 5);
    }

    #[test]
    fn comments_blanks_and_timestamps() {
        let src = "# header\n\na b 2 1999\nb c 1 2001 # trailing\n";
        let g = load_edgelist(src, true).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 3);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = load_edgelist("a b\nbadline", true).unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }));
        let err = load_edgelist("a b -3", true).unwrap_err();
        assert!(matches!(err, GraphError::NegativeCount { line: 1 }));
    }

    #[test]
    fn selfloop_detection_and_override() {
        let g = load_edgelist("a a 2\na b", false).unwrap();
        assert!(g.selfloops());
        let err = load_edgelist_with("a a 2", false, Some(false)).unwrap_err();
        assert!(matches!(err, GraphError::DisallowedSelfLoop { line: 1 }));
        let g = load_edgelist_with("a b", false, Some(true)).unwrap();
        assert!(g.selfloops());
    }

    #[test]
    fn degrees_directed_triangle() {
        let g = load_edgelist("a b\nb c\nc a", true).unwrap();
        let (kout, kin) = g.degrees();
        assert_eq!(kout, vec![1, 1, 1]);
        assert_eq!(kin, vec![1, 1, 1]);
        let m = g.m();
        assert_eq!(kout.iter().sum::<u64>(), m);
        assert_eq!(kin.iter().sum::<u64>(), m);
    }

    #[test]
    fn selfloop_counts_two_undirected() {
        let g = load_edgelist("a a", false).unwrap();
        let (k, _) = g.degrees();
        assert_eq!(k, vec![2]);
    }

    #[test]
    fn cell_counts() {
        let mk = |n, directed, selfloops| DyadLayout {
            n,
            directed,
            selfloops,
        };
        assert_eq!(mk(34, false, false).cell_count(), 561);
        assert_eq!(mk(100, true, true).cell_count(), 10_000);
        assert_eq!(mk(2, true, false).cell_count(), 2);
        assert_eq!(mk(34, false, true).cell_count(), 595);
    }

    #[test]
    fn zkc_dimensions() {
        let g = zachary_karate_club();
        assert_eq!(g.n(), 34);
        assert_eq!(g.m(), 231);
        assert!(!g.directed());
        assert!(!g.selfloops());
        let (k, _) = g.degrees();
        assert_eq!(k.iter().sum::<u64>(), 462);
    }

    #[test]
    fn round_trip_preserves_counts_by_label() {
        let src = "a b 2\nc a 1\nb c 4\nd d 0";
        for directed in [true, false] {
            let g = load_edgelist(src, directed).unwrap();
            let text = g.to_edge_list_string();
            let h = load_edgelist(&text, directed).unwrap();
            assert_eq!(g.n(), h.n());
            assert_eq!(g.m(), h.m());
            for la in g.labels() {
                for lb in g.labels() {
                    let (gi, gj) = (g.vertex_index(la).unwrap(), g.vertex_index(lb).unwrap());
                    let (hi, hj) = (h.vertex_index(la).unwrap(), h.vertex_index(lb).unwrap());
                    assert_eq!(g.count(gi, gj), h.count(hi, hj), "cell ({la},{lb})");
                }
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // serialize -> load reproduces the adjacency matrix and the
            // edge total equals the sum of counts in the source
            #[test]
            fn round_trip_edge_list(
                entries in proptest::collection::vec((0usize..8, 0usize..8, 0u64..9), 1..25),
                directed in proptest::bool::ANY,
            ) {
                let mut src = String::new();
                let mut total = 0u64;
                for (a, b, c) in &entries {
                    src.push_str(&format!("n{a} n{b} {c}\n"));
                    total += c;
                }
                let g = load_edgelist(&src, directed).unwrap();
                prop_assert_eq!(g.m(), total);
                let h = load_edgelist(&g.to_edge_list_string(), directed).unwrap();
                prop_assert_eq!(g.n(), h.n());
                prop_assert_eq!(g.m(), h.m());
                for la in g.labels() {
                    for lb in g.labels() {
                        let (gi, gj) = (g.vertex_index(la).unwrap(), g.vertex_index(lb).unwrap());
                        let (hi, hj) = (h.vertex_index(la).unwrap(), h.vertex_index(lb).unwrap());
                        prop_assert_eq!(g.count(gi, gj), h.count(hi, hj));
                    }
                }
            }
        }
    }

    #[test]
    fn partition_parsing_and_errors() {
        let g = load_edgelist("a b\nb c\nc a", false).unwrap();
        let p = Partition::from_text("a red\nb red\nc blue", &g).unwrap();
        assert_eq!(p.group_count(), 2);
        assert_eq!(p.group_of(0), p.group_of(1));
        assert_ne!(p.group_of(0), p.group_of(2));
        assert!(Partition::from_text("a red\nb red", &g).is_err());
        assert!(Partition::from_text("a red\nb red\nz blue", &g).is_err());
        assert!(Partition::from_text("a red\na blue\nb red\nc red", &g).is_err());
    }
}
