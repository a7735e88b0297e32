use std::collections::VecDeque;
use std::path::Path;

use super::TopologyError;

const HEAVY_HEX_127: &str = include_str!("../../data/heavy_hex_127.edges");

/// Physical coupling map with all-pairs hop distances (BFS).
#[derive(Clone, Debug)]
pub struct DeviceGraph {
    m: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    dist: Vec<u32>,
}

impl DeviceGraph {
    pub fn from_edges(m: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        if m == 0 {
            return Err(TopologyError::EmptyDevice);
        }
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(TopologyError::SelfLoop { qubit: a });
            }
            if a >= m || b >= m {
                return Err(TopologyError::EdgeOutOfRange { a, b, m });
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adj = vec![Vec::new(); m];
        for &(a, b) in &norm {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut dist = vec![u32::MAX; m * m];
        let mut queue = VecDeque::new();
        for src in 0..m {
            let row = &mut dist[src * m..(src + 1) * m];
            row[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if row[v] == u32::MAX {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if let Some(unreached) = row.iter().position(|&d| d == u32::MAX) {
                return Err(TopologyError::Disconnected { a: src, b: unreached });
            }
        }
        Ok(DeviceGraph {
            m,
            edges: norm,
            adj,
            dist,
        })
    }

    pub fn line(m: usize) -> Result<Self, TopologyError> {
        let edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
        Self::from_edges(m, &edges)
    }

    /// `rows x cols` grid, row-major numbering.
    pub fn grid(rows: usize, cols: usize) -> Result<Self, TopologyError> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                if c + 1 < cols {
                    edges.push((i, i + 1));
                }
                if r + 1 < rows {
                    edges.push((i, i + cols));
                }
            }
        }
        Self::from_edges(rows * cols, &edges)
    }

    /// The 127-qubit heavy-hex lattice, from the bundled edge list.
    pub fn heavy_hex_127() -> Self {
        Self::parse_edge_list(HEAVY_HEX_127).expect("bundled heavy-hex edge list is valid")
    }

    /// Parses `a b` pairs, one per line. Blank lines and `#` comments are
    /// skipped; the qubit count is one past the largest index.
    pub fn parse_edge_list(text: &str) -> Result<Self, TopologyError> {
        let mut edges = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                [a, b] => a.parse::<usize>().ok().zip(b.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some(e) => edges.push(e),
                None => {
                    return Err(TopologyError::EdgeListSyntax {
                        line: n + 1,
                        text: raw.to_string(),
                    })
                }
            }
        }
        let m = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Self::from_edges(m, &edges)
    }

    pub fn load_edge_list(path: &Path) -> Result<Self, TopologyError> {
        let text = std::fs::read_to_string(path).map_err(|e| TopologyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_edge_list(&text)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, p: usize) -> &[usize] {
        &self.adj[p]
    }

    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> u32 {
        self.dist[a * self.m + b]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.dist(a, b) == 1
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// A shortest path `a, ..., b`, preferring lower-index neighbors.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            cur = *self.adj[cur]
                .iter()
                .find(|&&n| self.dist(n, b) + 1 == self.dist(cur, b))
                .expect("connected graph has a descending neighbor");
            path.push(cur);
        }
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_four() {
        let d = DeviceGraph::line(4).unwrap();
        assert_eq!(d.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(d.dist(0, 3), 3);
        assert_eq!(d.shortest_path(0, 3), vec![0, 1, 2, 3]);
    }

    #[test]
    fn grid_two_by_two() {
        let d = DeviceGraph::grid(2, 2).unwrap();
        assert_eq!(d.m(), 4);
        assert_eq!(d.edges().len(), 4);
        assert_eq!(d.dist(0, 3), 2);
    }

    #[test]
    fn heavy_hex_shape() {
        let d = DeviceGraph::heavy_hex_127();
        assert_eq!(d.m(), 127);
        assert_eq!(d.max_degree(), 3);
        assert_eq!(d.edges().len(), 144);
        let degree_sum: usize = (0..127).map(|p| d.neighbors(p).len()).sum();
        assert_eq!(degree_sum, 2 * 144);
    }

    #[test]
    fn adjacency_matches_distance_one() {
        let d = DeviceGraph::heavy_hex_127();
        for a in 0..d.m() {
            for b in 0..d.m() {
                assert_eq!(d.is_adjacent(a, b), d.edges().contains(&(a.min(b), a.max(b))));
            }
        }
    }

    #[test]
    fn rejects_bad_edge_lists() {
        assert!(matches!(
            DeviceGraph::parse_edge_list("0 1\n2 3\n"),
            Err(TopologyError::Disconnected { .. })
        ));
        assert!(matches!(
            DeviceGraph::parse_edge_list("0 1\n1 x\n"),
            Err(TopologyError::EdgeListSyntax { line: 2, .. })
        ));
        assert!(matches!(
            DeviceGraph::from_edges(2, &[(1, 1)]),
            Err(TopologyError::SelfLoop { .. })
        ));
        let d = DeviceGraph::parse_edge_list("# ring\n0 1\n1 2 # tail\n\n2 0\n").unwrap();
        assert_eq!(d.m(), 3);
        assert_eq!(d.dist(0, 2), 1);
    }
}
