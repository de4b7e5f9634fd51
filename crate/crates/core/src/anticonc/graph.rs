use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::index_set::{IndexSet, MAX_GROUND};
use crate::perm::HeavinessThreshold;

use super::poly::QuadraticPolynomial;

/// Graph on `{1, …, n}` with an edge `ij` per large quadratic coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientGraph {
    n_vertices: usize,
    /// Sorted, `i < j`.
    edges: Vec<(usize, usize)>,
    threshold: Option<HeavinessThreshold>,
}

impl CoefficientGraph {
    /// `G^(r)(f)`: edges `ij` with `|coeff(x_i x_j)| ≥ r`.
    pub fn from_polynomial(f: &QuadraticPolynomial, r: &HeavinessThreshold) -> Self {
        let edges = f
            .quadratic_terms()
            .filter(|(_, c)| r.admits(c))
            .map(|(k, _)| k)
            .collect();
        CoefficientGraph {
            n_vertices: f.n_vars(),
            edges,
            threshold: Some(r.clone()),
        }
    }

    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_vertices > MAX_GROUND {
            return Err(contract(format!(
                "graph on {n_vertices} vertices exceeds {MAX_GROUND}"
            )));
        }
        let mut es = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i == j || i == 0 || j == 0 || i > n_vertices || j > n_vertices {
                return Err(contract(format!(
                    "bad edge ({i},{j}) on {n_vertices} vertices"
                )));
            }
            es.push((i.min(j), i.max(j)));
        }
        es.sort_unstable();
        es.dedup();
        Ok(CoefficientGraph {
            n_vertices,
            edges: es,
            threshold: None,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn threshold(&self) -> Option<&HeavinessThreshold> {
        self.threshold.as_ref()
    }
}

/// Maximum matching size `ν(G)` (blossom algorithm).
pub fn matching_number(g: &CoefficientGraph) -> usize {
    if g.edges.is_empty() {
        return 0;
    }
    let graph = UnGraph::<(), ()>::from_edges(
        g.edges
            .iter()
            .map(|&(i, j)| ((i - 1) as u32, (j - 1) as u32)),
    );
    petgraph::algo::maximum_matching(&graph).len()
}

/// Greedy maximal matching in edge order.
pub fn greedy_maximal_matching(g: &CoefficientGraph) -> Vec<(usize, usize)> {
    let mut used = 0u64;
    let mut out = Vec::new();
    for &(i, j) in &g.edges {
        let m = (1u64 << (i - 1)) | (1u64 << (j - 1));
        if used & m == 0 {
            used |= m;
            out.push((i, j));
        }
    }
    out
}

/// Endpoints of a greedy maximal matching: a vertex cover of size at most
/// `2ν(G)`.
pub fn greedy_vertex_cover(g: &CoefficientGraph) -> IndexSet {
    let vs = greedy_maximal_matching(g)
        .into_iter()
        .flat_map(|(i, j)| [i, j]);
    IndexSet::from_indices(g.n_vertices, vs).expect("vertices lie in the ground set")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graphs() {
        let tri = CoefficientGraph::from_edges(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(matching_number(&tri), 1);
        let two = CoefficientGraph::from_edges(4, &[(1, 2), (3, 4)]).unwrap();
        assert_eq!(matching_number(&two), 2);
        let empty = CoefficientGraph::from_edges(5, &[]).unwrap();
        assert_eq!(matching_number(&empty), 0);
        assert!(greedy_vertex_cover(&empty).is_empty());
        let one = CoefficientGraph::from_edges(5, &[(2, 4)]).unwrap();
        assert_eq!(greedy_vertex_cover(&one).to_vec(), vec![2, 4]);
        assert!(CoefficientGraph::from_edges(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn edges_follow_threshold() {
        let mut f = QuadraticPolynomial::new(4);
        f.add_quadratic(1, 2, &3.into()).unwrap();
        f.add_quadratic(3, 4, &(-2).into()).unwrap();
        f.add_quadratic(1, 4, &1.into()).unwrap();
        let g = CoefficientGraph::from_polynomial(&f, &HeavinessThreshold::new(2, 1).unwrap());
        assert_eq!(g.edges(), &[(1, 2), (3, 4)]);
    }
}
