use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TopologyError;

/// Hop distances between classical controllers. Validated to be a metric:
/// zero diagonal, symmetric, positive off the diagonal, triangle inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControllerTopology {
    hop: Vec<Vec<u32>>,
}

impl ControllerTopology {
    #[allow(clippy::needless_range_loop)]
    pub fn new(hop: Vec<Vec<u32>>) -> Result<Self, TopologyError> {
        let k = hop.len();
        if k == 0 {
            return Err(TopologyError::NoControllers);
        }
        if let Some(row) = hop.iter().position(|r| r.len() != k) {
            return Err(TopologyError::NotSquare { row, len: hop[row].len(), k });
        }
        for i in 0..k {
            if hop[i][i] != 0 {
                return Err(TopologyError::NonZeroDiagonal { controller: i });
            }
            for j in 0..k {
                if hop[i][j] != hop[j][i] {
                    return Err(TopologyError::Asymmetric { i, j });
                }
                if i != j && hop[i][j] == 0 {
                    return Err(TopologyError::ZeroHop { i, j });
                }
            }
        }
        for via in 0..k {
            for i in 0..k {
                for j in 0..k {
                    if hop[i][j] > hop[i][via] + hop[via][j] {
                        return Err(TopologyError::TriangleViolation { i, j, via });
                    }
                }
            }
        }
        Ok(ControllerTopology { hop })
    }

    /// Controllers around one central router, counting a controller to
    /// controller message as a single step.
    pub fn star(k: usize) -> Self {
        Self::uniform(k, 1)
    }

    /// Star topology where the router itself counts as a hop.
    pub fn star_via_router(k: usize) -> Self {
        Self::uniform(k, 2)
    }

    fn uniform(k: usize, hop: u32) -> Self {
        let hop = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 0 } else { hop }).collect())
            .collect();
        ControllerTopology { hop }
    }

    /// Controllers chained in a line; hop is the index distance.
    pub fn line(k: usize) -> Self {
        let hop = (0..k)
            .map(|i| (0..k).map(|j| i.abs_diff(j) as u32).collect())
            .collect();
        ControllerTopology { hop }
    }

    /// Random link latencies in `1..=max_hop` closed under shortest paths,
    /// so every entry stays within `1..=max_hop` and the result is a metric.
    #[allow(clippy::needless_range_loop)]
    pub fn random_metric(k: usize, max_hop: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max_hop = max_hop.max(1);
        let mut hop = vec![vec![0u32; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let w = rng.random_range(1..=max_hop);
                hop[i][j] = w;
                hop[j][i] = w;
            }
        }
        floyd_warshall(&mut hop);
        ControllerTopology { hop }
    }

    pub fn k(&self) -> usize {
        self.hop.len()
    }

    #[inline]
    pub fn hop(&self, a: usize, b: usize) -> u32 {
        self.hop[a][b]
    }

    pub fn matrix(&self) -> &[Vec<u32>] {
        &self.hop
    }

    /// All off-diagonal hops equal.
    pub fn is_uniform(&self) -> bool {
        let k = self.k();
        let mut it = (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)));
        match it.next() {
            None => true,
            Some((i, j)) => {
                let h = self.hop[i][j];
                it.all(|(a, b)| self.hop[a][b] == h)
            }
        }
    }

    /// Topology with controllers renamed by `perm` (`new[perm[a]][perm[b]] = old[a][b]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.k();
        let mut hop = vec![vec![0; k]; k];
        for a in 0..k {
            for b in 0..k {
                hop[perm[a]][perm[b]] = self.hop[a][b];
            }
        }
        ControllerTopology { hop }
    }
}

pub(crate) fn floyd_warshall(d: &mut [Vec<u32>]) {
    let k = d.len();
    for via in 0..k {
        for i in 0..k {
            for j in 0..k {
                let through = d[i][via].saturating_add(d[via][j]);
                if through < d[i][j] {
                    d[i][j] = through;
                }
            }
        }
    }
}
