//! Rooted graphs with cached breadth-first layering.
//!
//! Infinite base graphs are represented by finite truncations. A truncated graph
//! records its radius; vertices at that distance form the boundary, and any walk
//! step or query that needs information beyond it fails with
//! [`Error::Truncation`].

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VertexLabel {
    Int(i64),
    /// Copy `copy` (1-based) of a split vertex at integer position `base`.
    Split { base: i64, copy: u32 },
    Named(String),
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexLabel::Int(x) => write!(f, "{x}"),
            VertexLabel::Split { base, copy } => write!(f, "({base},{copy})"),
            VertexLabel::Named(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootedGraph {
    labels: Vec<VertexLabel>,
    projection: Vec<Option<i64>>,
    /// CSR adjacency; each vertex lists its closer-to-root neighbors first.
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    closer: Vec<u32>,
    dist: Vec<u32>,
    root: usize,
    truncation: Option<u32>,
    max_degree: usize,
    /// Vertex count per distance level.
    level_sizes: Vec<usize>,
    /// Number of edges between level `i` and level `i + 1`.
    level_edges: Vec<usize>,
}

impl RootedGraph {
    /// Builds a rooted graph from an undirected edge list over `labels.len()` vertices.
    ///
    /// Every vertex must be reachable from the root. Parallel edges and self-loops
    /// are rejected.
    pub fn from_edges(
        labels: Vec<VertexLabel>,
        projection: Vec<Option<i64>>,
        edges: &[(usize, usize)],
        root: usize,
        truncation: Option<u32>,
    ) -> Result<Self> {
        let n = labels.len();
        if projection.len() != n {
            return Err(Error::InvalidGraph("projection length mismatch".into()));
        }
        if root >= n {
            return Err(Error::InvalidGraph("root out of range".into()));
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {}", labels[u])));
            }
            if adj[u].contains(&v) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {} - {}",
                    labels[u], labels[v]
                )));
            }
            adj[u].push(v);
            adj[v].push(u);
        }

        let mut dist = vec![u32::MAX; n];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if let Some(v) = dist.iter().position(|&d| d == u32::MAX) {
            return Err(Error::InvalidGraph(format!(
                "vertex {} is not reachable from the root",
                labels[v]
            )));
        }
        let depth = *dist.iter().max().unwrap_or(&0);
        if let Some(r) = truncation {
            if r > depth {
                return Err(Error::InvalidGraph(format!(
                    "truncation radius {r} exceeds graph depth {depth}"
                )));
            }
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(2 * edges.len());
        let mut closer = Vec::with_capacity(n);
        offsets.push(0);
        for (u, nbrs) in adj.iter_mut().enumerate() {
            // stable: closer neighbors first, original order otherwise
            nbrs.sort_by_key(|&v| dist[v] >= dist[u]);
            closer.push(nbrs.iter().filter(|&&v| dist[v] < dist[u]).count() as u32);
            neighbors.extend_from_slice(nbrs);
            offsets.push(neighbors.len());
        }
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);

        let mut level_sizes = vec![0usize; depth as usize + 1];
        for &d in &dist {
            level_sizes[d as usize] += 1;
        }
        let mut level_edges = vec![0usize; depth as usize + 1];
        for &(u, v) in edges {
            let (a, b) = (dist[u].min(dist[v]), dist[u].max(dist[v]));
            if b == a + 1 {
                level_edges[a as usize] += 1;
            }
        }

        Ok(RootedGraph {
            labels,
            projection,
            offsets,
            neighbors,
            closer,
            dist,
            root,
            truncation,
            max_degree,
            level_sizes,
            level_edges,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn label(&self, v: usize) -> &VertexLabel {
        &self.labels[v]
    }

    pub fn find(&self, label: &VertexLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Integer projection of `v`, when the graph carries one.
    pub fn projection(&self, v: usize) -> Option<i64> {
        self.projection[v]
    }

    #[inline]
    pub fn distance(&self, v: usize) -> u32 {
        self.dist[v]
    }

    pub fn truncation(&self) -> Option<u32> {
        self.truncation
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// All neighbors of `v`, closer-to-root ones first.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Number of neighbors strictly closer to the root.
    #[inline]
    pub fn closer_count(&self, v: usize) -> usize {
        self.closer[v] as usize
    }

    #[inline]
    pub fn is_boundary(&self, v: usize) -> bool {
        self.truncation == Some(self.dist[v])
    }

    pub(crate) fn check_interior(&self, v: usize) -> Result<()> {
        if self.is_boundary(v) {
            Err(Error::Truncation {
                vertex: v,
                radius: self.dist[v],
            })
        } else {
            Ok(())
        }
    }

    fn check_radius(&self, r: u32, strict: bool) -> Result<()> {
        let limit = self.truncation.unwrap_or(u32::MAX);
        if r > limit || (strict && r == limit) {
            return Err(Error::Truncation {
                vertex: self.root,
                radius: limit,
            });
        }
        Ok(())
    }

    /// `|K_r|`, the number of vertices at distance exactly `r`.
    pub fn sphere_size(&self, r: u32) -> Result<usize> {
        self.check_radius(r, false)?;
        Ok(self.level_sizes.get(r as usize).copied().unwrap_or(0))
    }

    /// `|B_r|`, the number of vertices within distance `r`.
    pub fn ball_size(&self, r: u32) -> Result<usize> {
        self.check_radius(r, false)?;
        let end = (r as usize + 1).min(self.level_sizes.len());
        Ok(self.level_sizes[..end].iter().sum())
    }

    /// `|∂_E B_r|`: edges leaving the ball of radius `r`. Needs level `r + 1`.
    pub fn edge_boundary(&self, r: u32) -> Result<usize> {
        self.check_radius(r, true)?;
        Ok(self.level_edges.get(r as usize).copied().unwrap_or(0))
    }
}

/// Path graph on `-radius..=radius`, rooted at 0.
pub fn build_line_graph(radius: u32) -> Result<RootedGraph> {
    if radius < 1 {
        return Err(Error::param("line graph radius must be >= 1"));
    }
    let r = radius as i64;
    let labels: Vec<_> = (-r..=r).map(VertexLabel::Int).collect();
    let projection: Vec<_> = (-r..=r).map(Some).collect();
    let edges: Vec<_> = (0..2 * radius as usize).map(|i| (i, i + 1)).collect();
    RootedGraph::from_edges(labels, projection, &edges, radius as usize, Some(radius))
}

fn is_split_position(x: i64) -> bool {
    let a = x.unsigned_abs();
    a >= 2 && a.is_power_of_two()
}

/// The line with every vertex at distance `2^i` (`i >= 1`) split into `m`
/// parallel copies, each adjacent to both integer neighbors, truncated at `radius`.
pub fn build_gamma_m(m: u32, radius: u32) -> Result<RootedGraph> {
    if m < 2 {
        return Err(Error::param("gamma_m needs m >= 2"));
    }
    if radius < 2 {
        return Err(Error::param("gamma_m radius must be >= 2"));
    }
    let r = radius as i64;
    let mut labels = Vec::new();
    let mut projection = Vec::new();
    // vertex ids at each integer position
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(2 * radius as usize + 1);
    for x in -r..=r {
        let mut column = Vec::new();
        if is_split_position(x) {
            for copy in 1..=m {
                column.push(labels.len());
                labels.push(VertexLabel::Split { base: x, copy });
                projection.push(Some(x));
            }
        } else {
            column.push(labels.len());
            labels.push(VertexLabel::Int(x));
            projection.push(Some(x));
        }
        columns.push(column);
    }
    let mut edges = Vec::new();
    for pair in columns.windows(2) {
        for &u in &pair[0] {
            for &v in &pair[1] {
                edges.push((u, v));
            }
        }
    }
    let root = columns[radius as usize][0];
    RootedGraph::from_edges(labels, projection, &edges, root, Some(radius))
}

/// Parses an edge-list description: the root label on the first line, then one
/// `u v` pair per line. Blank lines and `#` comments are ignored. The resulting
/// graph is finite and untruncated.
pub fn parse_edge_list(text: &str) -> Result<RootedGraph> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .enumerate()
        .filter(|(_, l)| !l.is_empty());
    let (_, root_line) = lines
        .next()
        .ok_or_else(|| Error::InvalidGraph("empty edge list".into()))?;

    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut intern = |name: &str| -> usize {
        *ids.entry(name.to_string()).or_insert_with(|| {
            names.push(name.to_string());
            names.len() - 1
        })
    };
    let root = intern(root_line);
    let mut edges = Vec::new();
    for (lineno, line) in lines {
        let parts: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if parts.len() != 2 {
            return Err(Error::InvalidGraph(format!(
                "line {}: expected two vertex labels, got {line:?}",
                lineno + 1
            )));
        }
        let u = intern(parts[0]);
        let v = intern(parts[1]);
        edges.push((u, v));
    }
    let labels: Vec<_> = names
        .into_iter()
        .map(|s| match s.parse::<i64>() {
            Ok(x) => VertexLabel::Int(x),
            Err(_) => VertexLabel::Named(s),
        })
        .collect();
    let projection = vec![None; labels.len()];
    RootedGraph::from_edges(labels, projection, &edges, root, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_graph_shape() {
        let g = build_line_graph(2).unwrap();
        assert_eq!(g.num_vertices(), 5);
        assert_eq!(g.degree(g.root()), 2);
        assert_eq!(g.label(g.root()), &VertexLabel::Int(0));
        for i in 0..2 {
            assert_eq!(g.edge_boundary(i).unwrap(), 2);
        }
        assert!(g.edge_boundary(2).is_err());
        assert_eq!(g.ball_size(2).unwrap(), 5);
        assert!(g.ball_size(3).is_err());
        assert!(build_line_graph(0).is_err());
    }

    #[test]
    fn line_graph_ball_growth() {
        let g = build_line_graph(50).unwrap();
        for r in 0..=50 {
            assert_eq!(g.ball_size(r).unwrap(), 2 * r as usize + 1);
        }
    }

    #[test]
    fn gamma_m_ball_sizes() {
        let g = build_gamma_m(3, 4).unwrap();
        // 2r + 1 + 2(m-1) floor(log2 r): the root is counted.
        assert_eq!(g.ball_size(4).unwrap(), 17);
        let g = build_gamma_m(3, 300).unwrap();
        for r in 1..=300u32 {
            let log2 = 31 - r.leading_zeros();
            assert_eq!(g.ball_size(r).unwrap(), (2 * r + 1 + 2 * 2 * log2) as usize, "r={r}");
        }
    }

    #[test]
    fn gamma_m_split_vertices() {
        let g = build_gamma_m(3, 10).unwrap();
        for copy in 1..=3 {
            let v = g.find(&VertexLabel::Split { base: 2, copy }).unwrap();
            assert_eq!(g.degree(v), 2);
            assert_eq!(g.projection(v), Some(2));
            let nbrs: Vec<_> = g.neighbors(v).iter().map(|&w| g.label(w).clone()).collect();
            assert_eq!(nbrs, vec![VertexLabel::Int(1), VertexLabel::Int(3)]);
        }
        // 3 sits between two split columns
        let three = g.find(&VertexLabel::Int(3)).unwrap();
        assert_eq!(g.degree(three), 6);
        let one = g.find(&VertexLabel::Int(1)).unwrap();
        assert_eq!(g.degree(one), 4);
        assert_eq!(g.max_degree(), 6);
    }

    #[test]
    fn gamma_m_edge_boundary() {
        let m = 3;
        let g = build_gamma_m(m, 70).unwrap();
        for s in 0..70u32 {
            let expected = if s >= 1 && (s.is_power_of_two() || (s + 1).is_power_of_two()) {
                2 * m as usize
            } else {
                2
            };
            assert_eq!(g.edge_boundary(s).unwrap(), expected, "s={s}");
        }
    }

    #[test]
    fn layering_invariants() {
        for g in [build_line_graph(7).unwrap(), build_gamma_m(4, 40).unwrap()] {
            for v in 0..g.num_vertices() {
                for &w in g.neighbors(v) {
                    assert!(g.distance(v).abs_diff(g.distance(w)) <= 1);
                }
                if v != g.root() {
                    assert!(g.closer_count(v) >= 1);
                }
                assert!(g.degree(v) <= g.max_degree());
                let d = g.distance(v);
                let closer = &g.neighbors(v)[..g.closer_count(v)];
                assert!(closer.iter().all(|&w| g.distance(w) + 1 == d));
            }
            assert_eq!(g.closer_count(g.root()), 0);
        }
    }

    #[test]
    fn edge_list_parsing() {
        let text = "# a 4-cycle with a tail\na\na b\nb c\nc d\nd a\nc e\n";
        let g = parse_edge_list(text).unwrap();
        assert_eq!(g.num_vertices(), 5);
        assert_eq!(g.num_edges(), 5);
        assert_eq!(g.label(g.root()), &VertexLabel::Named("a".into()));
        let c = g.find(&VertexLabel::Named("c".into())).unwrap();
        assert_eq!(g.distance(c), 2);
        assert_eq!(g.closer_count(c), 2);
        assert_eq!(g.truncation(), None);
        assert_eq!(g.ball_size(1).unwrap(), 3);
        assert_eq!(g.edge_boundary(1).unwrap(), 2);

        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("0\n0 1 2\n").is_err());
        assert!(parse_edge_list("0\n0 1\n2 3\n").is_err());
        assert!(parse_edge_list("0\n0 1\n1 0\n").is_err());
        assert!(parse_edge_list("0\n0 0\n").is_err());
    }
}
