//! Complexes, linkage classes, weak reversibility, deficiency and the
//! stoichiometric subspace.

use std::collections::VecDeque;

use crate::linalg;
use crate::network::{Complex, Network};

/// Pivot tolerance for rank decisions on stoichiometric data.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct StoichiometryAnalysis {
    pub complexes: Vec<Complex>,
    /// Complex indices of each linkage class.
    pub linkage_classes: Vec<Vec<usize>>,
    pub linkage_class_count: usize,
    pub weakly_reversible: bool,
    /// `s = dim S`.
    pub rank: usize,
    pub deficiency: usize,
    /// Orthonormal basis of `S`.
    pub basis_s: Vec<Vec<f64>>,
    /// Orthonormal basis of `S^perp`.
    pub basis_s_perp: Vec<Vec<f64>>,
}

/// Reaction graph on complexes; edge `i` is reaction `i`.
#[derive(Clone, Debug)]
pub struct ComplexGraph {
    pub complexes: Vec<Complex>,
    pub edges: Vec<(usize, usize)>,
}

impl ComplexGraph {
    pub fn new(net: &Network) -> Self {
        let complexes = net.complexes();
        let index = |c: &Complex| complexes.iter().position(|d| d == c).expect("collected");
        let edges = net
            .reactions()
            .iter()
            .map(|r| (index(&r.reactant), index(&r.product)))
            .collect();
        Self { complexes, edges }
    }

    /// Connected components of the undirected graph, each sorted, ordered by
    /// smallest member.
    pub fn linkage_classes(&self) -> Vec<Vec<usize>> {
        let m = self.complexes.len();
        let mut adjacency = vec![Vec::new(); m];
        for &(a, b) in &self.edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut label = vec![usize::MAX; m];
        let mut classes = Vec::new();
        for start in 0..m {
            if label[start] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut members = vec![start];
            label[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = id;
                        members.push(v);
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            classes.push(members);
        }
        classes
    }

    /// True iff every edge lies on a directed cycle, i.e. each connected
    /// component is strongly connected.
    pub fn is_weakly_reversible(&self) -> bool {
        let m = self.complexes.len();
        let mut out = vec![Vec::new(); m];
        for &(a, b) in &self.edges {
            out[a].push(b);
        }
        self.edges.iter().all(|&(a, b)| reachable(&out, b, a))
    }
}

fn reachable(out: &[Vec<usize>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; out.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        if u == to {
            return true;
        }
        for &v in &out[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    false
}

/// `y'_i - y_i` for every reaction, in reaction order.
pub fn reaction_vectors(net: &Network) -> Vec<Vec<f64>> {
    net.reactions().iter().map(|r| r.reaction_vector()).collect()
}

pub fn analyze_structure(net: &Network) -> StoichiometryAnalysis {
    let graph = ComplexGraph::new(net);
    let linkage_classes = graph.linkage_classes();
    let weakly_reversible = graph.is_weakly_reversible();
    let vectors = reaction_vectors(net);
    let n = net.species_count();

    let (basis_s, basis_s_perp) = stoichiometric_bases(&vectors, n);
    let rank = basis_s.len();
    let deficiency = graph.complexes.len() - linkage_classes.len() - rank;

    StoichiometryAnalysis {
        complexes: graph.complexes,
        linkage_class_count: linkage_classes.len(),
        linkage_classes,
        weakly_reversible,
        rank,
        deficiency,
        basis_s,
        basis_s_perp,
    }
}

/// Orthonormal bases of `span(vectors)` and of its orthogonal complement in R^n.
pub fn stoichiometric_bases(vectors: &[Vec<f64>], n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    // Rows are reaction vectors, so the null space is S^perp.
    let reduced = linalg::row_reduce(vectors, n, RANK_TOLERANCE);
    let spanning: Vec<Vec<f64>> = reduced.pivot_rows.iter().map(|&i| vectors[i].clone()).collect();
    let basis_s = linalg::gram_schmidt(&spanning, RANK_TOLERANCE);
    let basis_perp = linalg::gram_schmidt(&reduced.null_space(), RANK_TOLERANCE);
    (basis_s, basis_perp)
}
