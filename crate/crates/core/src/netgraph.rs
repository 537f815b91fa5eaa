//! Communication topology: the leader/follower digraph, its Laplacian, the
//! leader-following matrix `H` and the rooted spanning-tree check.
//!
//! Vertex 0 is the leader. An edge `(j, i)` means agent `j` sends to agent
//! `i`, so `j` is a neighbour of `i`.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Directed, unweighted communication graph over `N + 1` vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DigraphSpec", into = "DigraphSpec")]
pub struct Digraph {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

/// Serialized form: follower count plus an adjacency list of `[from, to]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DigraphSpec {
    pub followers: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<DigraphSpec> for Digraph {
    type Error = Error;

    fn try_from(spec: DigraphSpec) -> Result<Self> {
        Digraph::new(
            spec.followers,
            spec.edges.iter().map(|e| (e[0], e[1])),
        )
    }
}

impl From<Digraph> for DigraphSpec {
    fn from(g: Digraph) -> Self {
        DigraphSpec {
            followers: g.follower_count(),
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl Digraph {
    /// Builds a graph with `followers` followers (vertices `1..=followers`).
    ///
    /// Self-loops, edges into the leader, out-of-range vertices and
    /// duplicate edges are rejected.
    pub fn new(followers: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if followers == 0 {
            return Err(Error::InvalidGraph("at least one follower is required".into()));
        }
        let vertex_count = followers + 1;
        let mut set = BTreeSet::new();
        for (from, to) in edges {
            if from >= vertex_count || to >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({from}, {to}) out of range for {vertex_count} vertices"
                )));
            }
            if from == to {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {from}")));
            }
            if to == 0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({from}, 0) points into the leader"
                )));
            }
            if !set.insert((from, to)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({from}, {to})")));
            }
        }
        Ok(Self { vertex_count, edges: set })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn follower_count(&self) -> usize {
        self.vertex_count - 1
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    /// In-neighbours `N_i = { j | (j, i) in E }`, ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, to)| to == i)
            .map(|&(from, _)| from)
            .collect()
    }

    /// Followers that receive from `j`, ascending.
    pub fn out_neighbors(&self, j: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(from, _)| from == j)
            .map(|&(_, to)| to)
            .collect()
    }
}

/// Graph Laplacian `L` and its leader-following minor `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderFollowerMatrix {
    pub laplacian: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

pub fn build_laplacian_and_h(g: &Digraph) -> LeaderFollowerMatrix {
    let n = g.vertex_count();
    // integer arithmetic keeps the row sums exactly zero
    let mut lap = vec![vec![0i64; n]; n];
    for (from, to) in g.edges() {
        lap[to][from] = -1;
        lap[to][to] += 1;
    }
    let laplacian = DMatrix::from_fn(n, n, |i, j| lap[i][j] as f64);
    let h = laplacian.view((1, 1), (n - 1, n - 1)).into_owned();
    LeaderFollowerMatrix { laplacian, h }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanningTreeCertificate {
    pub has_root_spanning_tree: bool,
    pub reachable_set: BTreeSet<usize>,
}

/// Breadth-first search from the leader along directed edges.
pub fn check_spanning_tree(g: &Digraph) -> SpanningTreeCertificate {
    let mut reachable = BTreeSet::from([0]);
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for v in g.out_neighbors(u) {
            if reachable.insert(v) {
                queue.push_back(v);
            }
        }
    }
    SpanningTreeCertificate {
        has_root_spanning_tree: reachable.len() == g.vertex_count(),
        reachable_set: reachable,
    }
}

/// Eigenvalues of `H` sorted by (Re, Im) descending.
pub fn eigs_h(m: &LeaderFollowerMatrix) -> Result<Vec<Complex64>> {
    let mut ev = linalg::eigenvalues(&m.h)?;
    sort_descending(&mut ev);
    Ok(ev)
}

pub(crate) fn sort_descending(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> Digraph {
        Digraph::new(3, [(0, 1), (3, 2), (1, 3), (2, 1), (2, 3)]).unwrap()
    }

    #[test]
    fn example1_h() {
        let m = build_laplacian_and_h(&example1());
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, -1.0, 0.0, 0.0, 1.0, -1.0, -1.0, -1.0, 2.0],
        );
        assert_eq!(m.h, expected);
    }

    #[test]
    fn single_follower() {
        let g = Digraph::new(1, [(0, 1)]).unwrap();
        let m = build_laplacian_and_h(&g);
        assert_eq!(m.h, DMatrix::from_element(1, 1, 1.0));
        assert!(check_spanning_tree(&g).has_root_spanning_tree);
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let m = build_laplacian_and_h(&example1());
        for row in m.laplacian.row_iter() {
            assert_eq!(row.sum(), 0.0);
        }
        assert!(m.laplacian.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(Digraph::new(2, [(1, 1)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(Digraph::new(2, [(1, 0)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(Digraph::new(2, [(0, 3)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(
            Digraph::new(2, [(0, 1), (0, 1)]),
            Err(Error::InvalidGraph(_))
        ));
    }

    #[test]
    fn unreachable_follower() {
        // follower 2 only listens to itself-free cycle not rooted at 0
        let g = Digraph::new(3, [(0, 1), (3, 2), (2, 3)]).unwrap();
        let cert = check_spanning_tree(&g);
        assert!(!cert.has_root_spanning_tree);
        assert_eq!(cert.reachable_set, BTreeSet::from([0, 1]));
    }

    #[test]
    fn identity_spectrum() {
        let m = LeaderFollowerMatrix {
            laplacian: DMatrix::zeros(4, 4),
            h: DMatrix::identity(3, 3),
        };
        let ev = eigs_h(&m).unwrap();
        assert!(ev.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-14));
        assert!(ev.iter().all(|z| z.arg().abs() < 1e-14));
    }

    #[test]
    fn serde_roundtrip_validates() {
        let json = r#"{"followers":2,"edges":[[0,1],[1,2]]}"#;
        let g: Digraph = serde_json::from_str(json).unwrap();
        assert_eq!(g.follower_count(), 2);
        let bad = r#"{"followers":2,"edges":[[2,0]]}"#;
        assert!(serde_json::from_str::<Digraph>(bad).is_err());
    }
}
