use std::collections::{BTreeSet, VecDeque};

use rand::seq::index;

use super::streams::Streams;
use super::NetsimError;

pub const MAX_TOPOLOGY_ATTEMPTS: u64 = 100;

/// Undirected peer graph; `peers[i]` is sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub peers: Vec<Vec<usize>>,
}

impl Topology {
    pub fn node_count(&self) -> usize {
        self.peers.len()
    }

    pub fn edge_count(&self) -> usize {
        self.peers.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let n = self.peers.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.peers[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }
}

/// Each node opens `degree` links to distinct peers chosen uniformly; links are
/// bidirectional. A disconnected draw is retried with the next sub-seed.
pub fn build_topology(node_count: usize, degree: usize, seed: u64) -> Result<Topology, NetsimError> {
    if degree >= node_count.max(1) {
        return Err(NetsimError::InvalidConfig {
            field: "peer_degree",
            reason: format!("{degree} must be below the node count {node_count}"),
        });
    }
    let streams = Streams::new(seed);
    for attempt in 0..MAX_TOPOLOGY_ATTEMPTS {
        let mut rng = streams.topology(attempt);
        let mut sets = vec![BTreeSet::new(); node_count];
        for u in 0..node_count {
            // sample from the other n-1 nodes, skipping u
            for k in index::sample(&mut rng, node_count - 1, degree) {
                let v = if k >= u { k + 1 } else { k };
                sets[u].insert(v);
                sets[v].insert(u);
            }
        }
        let topology = Topology { peers: sets.into_iter().map(|s| s.into_iter().collect()).collect() };
        if topology.is_connected() {
            return Ok(topology);
        }
    }
    Err(NetsimError::CannotConnect { attempts: MAX_TOPOLOGY_ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_nodes_one_edge() {
        let t = build_topology(2, 1, 9).unwrap();
        assert_eq!(t.peers, vec![vec![1], vec![0]]);
    }

    #[test]
    fn fifty_nodes_degree_eight() {
        let t = build_topology(50, 8, 42).unwrap();
        assert!(t.is_connected());
        for (u, peers) in t.peers.iter().enumerate() {
            assert!(peers.len() >= 8, "node {u} has {} peers", peers.len());
            assert!(!peers.contains(&u));
            for &v in peers {
                assert!(t.peers[v].contains(&u));
            }
        }
        assert_eq!(t, build_topology(50, 8, 42).unwrap());
        assert_ne!(t, build_topology(50, 8, 43).unwrap());
    }

    #[test]
    fn degree_zero_cannot_connect() {
        assert_eq!(build_topology(1, 0, 1).unwrap().edge_count(), 0);
        assert_eq!(build_topology(3, 0, 1), Err(NetsimError::CannotConnect { attempts: 100 }));
        assert!(matches!(build_topology(3, 3, 1), Err(NetsimError::InvalidConfig { .. })));
    }

    proptest! {
        #[test]
        fn degree_and_symmetry(n in 2usize..40, d in 1usize..6, seed: u64) {
            prop_assume!(d < n);
            let t = build_topology(n, d, seed).unwrap();
            prop_assert!(t.is_connected());
            for (u, peers) in t.peers.iter().enumerate() {
                prop_assert!(peers.len() >= d);
                for &v in peers {
                    prop_assert!(v != u && t.peers[v].binary_search(&u).is_ok());
                }
            }
        }
    }
}
