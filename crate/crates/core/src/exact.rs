//! Exact longest directed cycle for small digraphs.

use thiserror::Error;

use crate::digraph::Digraph;

pub const DEFAULT_MAX_N: usize = 18;
pub const HARD_MAX_N: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("digraph has {n} vertices, oracle limit is {max}")]
    TooLarge { n: usize, max: usize },
    #[error("max_n {0} exceeds the hard limit of {HARD_MAX_N}")]
    BadLimit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    max_n: usize,
}

impl OracleLimits {
    pub fn new(max_n: usize) -> Result<Self, OracleError> {
        if max_n > HARD_MAX_N {
            return Err(OracleError::BadLimit(max_n));
        }
        Ok(OracleLimits { max_n })
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_n: DEFAULT_MAX_N }
    }
}

pub fn longest_cycle_exact(d: &Digraph) -> Result<usize, OracleError> {
    longest_cycle_with(d, OracleLimits::default())
}

/// For every anchor `a`, enumerates the reachable `(vertex set, endpoint)`
/// path states from `a` over vertices greater than `a`, and closes them with
/// an edge back to `a`.
pub fn longest_cycle_with(d: &Digraph, limits: OracleLimits) -> Result<usize, OracleError> {
    let n = d.n();
    if n > limits.max_n {
        return Err(OracleError::TooLarge { n, max: limits.max_n });
    }
    let out: Vec<u32> = (0..n as u32).map(|v| d.out_neighbors(v).iter().fold(0, |m, &w| m | 1 << w)).collect();
    let mut best = 0;
    let mut ends: Vec<u32> = Vec::new();
    for a in 0..n {
        // bit i of a relative mask is vertex a + 1 + i
        let rest = n - a - 1;
        if rest + 1 <= best {
            break;
        }
        let shift = a + 1;
        ends.clear();
        ends.resize(1 << rest, 0);
        let closes = |v: usize| out[v] >> a & 1 == 1;
        let higher = |v: usize| out[v] >> shift;
        let first = higher(a);
        for i in 0..rest {
            if first >> i & 1 == 1 {
                ends[1 << i] |= 1 << i;
            }
        }
        for mask in 1usize..1 << rest {
            let e = ends[mask];
            if e == 0 {
                continue;
            }
            let mut bits = e;
            let mut any_close = false;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                any_close |= closes(shift + i);
                let mut next = higher(shift + i) & !(mask as u32);
                while next != 0 {
                    let j = next.trailing_zeros() as usize;
                    next &= next - 1;
                    ends[mask | 1 << j] |= 1 << j;
                }
            }
            if any_close {
                best = best.max(mask.count_ones() as usize + 1);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use rand::Rng;

    fn digraph(n: usize, edges: &[(u32, u32)]) -> Digraph {
        Digraph::from_edges(n, edges).unwrap()
    }

    /// Longest cycle by depth-first enumeration of simple paths from each start.
    fn brute(d: &Digraph) -> usize {
        fn dfs(d: &Digraph, start: u32, v: u32, on: &mut Vec<bool>, len: usize, best: &mut usize) {
            for &w in d.out_neighbors(v) {
                if w == start {
                    *best = (*best).max(len);
                } else if w > start && !on[w as usize] {
                    on[w as usize] = true;
                    dfs(d, start, w, on, len + 1, best);
                    on[w as usize] = false;
                }
            }
        }
        let mut best = 0;
        let mut on = vec![false; d.n()];
        for s in 0..d.n() as u32 {
            on[s as usize] = true;
            dfs(d, s, s, &mut on, 1, &mut best);
            on[s as usize] = false;
        }
        best
    }

    #[test]
    fn small_cases() {
        assert_eq!(longest_cycle_exact(&digraph(3, &[(0, 1), (1, 2), (2, 0)])).unwrap(), 3);
        assert_eq!(longest_cycle_exact(&digraph(4, &[(0, 1), (1, 2), (0, 2), (2, 3), (0, 3)])).unwrap(), 0);
        let k4: Vec<(u32, u32)> = (0..4).flat_map(|a| (0..4).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        assert_eq!(longest_cycle_exact(&digraph(4, &k4)).unwrap(), 4);
        assert_eq!(longest_cycle_exact(&digraph(2, &[(0, 1), (1, 0)])).unwrap(), 2);
        assert_eq!(longest_cycle_exact(&digraph(0, &[])).unwrap(), 0);
    }

    #[test]
    fn limits() {
        assert!(OracleLimits::new(21).is_err());
        let d = digraph(19, &[]);
        assert_eq!(longest_cycle_exact(&d), Err(OracleError::TooLarge { n: 19, max: 18 }));
        assert_eq!(longest_cycle_with(&d, OracleLimits::new(20).unwrap()).unwrap(), 0);
    }

    #[test]
    fn agrees_with_path_enumeration() {
        let mut rng = Seed(77).rng();
        for _ in 0..200 {
            let p: f64 = rng.random_range(0.1..0.5);
            let mut edges = Vec::new();
            for a in 0..8u32 {
                for b in 0..8u32 {
                    if a != b && rng.random_bool(p) {
                        edges.push((a, b));
                    }
                }
            }
            let d = digraph(8, &edges);
            assert_eq!(longest_cycle_exact(&d).unwrap(), brute(&d));
        }
    }
}
