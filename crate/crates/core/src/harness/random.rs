//! Seeded random connected graphs: a uniform random spanning tree plus a
//! chosen number of extra edges, with i.i.d. uniform potentials.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Graph};
use crate::{Error, Result};

/// Parameters of a random ensemble. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub min_n: usize,
    pub max_n: usize,
    pub min_beta: usize,
    pub max_beta: usize,
    pub q_low: f64,
    pub q_high: f64,
    pub count: usize,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            min_n: 4,
            max_n: 12,
            min_beta: 0,
            max_beta: 4,
            q_low: -1.0,
            q_high: 1.0,
            count: 200,
        }
    }
}

/// Largest first Betti number of a simple graph on `n` vertices.
pub fn max_betti(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2 - (n - 1)
    }
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.min_n == 0 || self.min_n > self.max_n {
            return Err(Error::InvalidSpec(format!(
                "vertex range {}..={} is empty",
                self.min_n, self.max_n
            )));
        }
        if self.min_beta > self.max_beta {
            return Err(Error::InvalidSpec(format!(
                "beta range {}..={} is empty",
                self.min_beta, self.max_beta
            )));
        }
        if !(self.q_low.is_finite() && self.q_high.is_finite()) || self.q_low > self.q_high {
            return Err(Error::InvalidSpec(format!(
                "potential interval [{}, {}] is invalid",
                self.q_low, self.q_high
            )));
        }
        if self.count == 0 {
            return Err(Error::InvalidSpec("count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Uniform random labelled tree on `n` vertices via a Prüfer sequence.
fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = *leaves.iter().next().expect("a tree always has a leaf");
        leaves.remove(&leaf);
        edges.push((leaf.min(c), leaf.max(c)));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// The `k`-th instance of the ensemble. Each index draws from its own
/// stream of the seeded generator, so instances are independent of each
/// other and of `count`.
///
/// The number of extra edges is uniform on `min_beta..=max_beta`, clipped to
/// what fits on the drawn vertex count.
pub fn random_instance(spec: &InstanceSpec, k: usize) -> Result<Graph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(k as u64);

    let n = rng.gen_range(spec.min_n..=spec.max_n);
    let cap = max_betti(n);
    if spec.min_beta > cap {
        return Err(Error::InfeasibleBeta {
            beta: spec.min_beta,
            n,
            max: cap,
        });
    }
    let beta = rng.gen_range(spec.min_beta..=spec.max_beta.min(cap));

    let tree = random_tree(n, &mut rng);
    let present: BTreeSet<Edge> = tree.iter().copied().collect();
    let mut candidates: Vec<Edge> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|e| !present.contains(e))
        .collect();
    candidates.shuffle(&mut rng);
    let mut edges = tree;
    edges.extend(candidates.into_iter().take(beta));

    let q = (0..n)
        .map(|_| {
            if spec.q_low == spec.q_high {
                spec.q_low
            } else {
                rng.gen_range(spec.q_low..spec.q_high)
            }
        })
        .collect();
    Graph::new(n, &edges, q)
}

/// Exactly `beta` extra edges on exactly `n` vertices.
pub fn random_graph(seed: u64, n: usize, beta: usize) -> Result<Graph> {
    let spec = InstanceSpec {
        seed,
        min_n: n,
        max_n: n,
        min_beta: beta,
        max_beta: beta,
        count: 1,
        ..InstanceSpec::default()
    };
    random_instance(&spec, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CycleStructure;

    #[test]
    fn deterministic_per_seed_and_index() {
        let spec = InstanceSpec::default();
        assert_eq!(random_instance(&spec, 0).unwrap(), random_instance(&spec, 0).unwrap());
        assert_ne!(random_instance(&spec, 0).unwrap(), random_instance(&spec, 1).unwrap());
        let other = InstanceSpec { seed: 43, ..spec.clone() };
        assert_ne!(random_instance(&spec, 3).unwrap(), random_instance(&other, 3).unwrap());
    }

    #[test]
    fn exact_betti_and_connectivity() {
        let g = random_graph(7, 6, 3).unwrap();
        assert_eq!(g.n_vertices(), 6);
        assert_eq!(CycleStructure::new(&g, None).betti(), 3);
        assert_eq!(g.betti(), 3);
    }

    #[test]
    fn tree_ensemble() {
        let spec = InstanceSpec {
            max_beta: 0,
            ..InstanceSpec::default()
        };
        for k in 0..50 {
            let g = random_instance(&spec, k).unwrap();
            assert_eq!(g.n_edges(), g.n_vertices() - 1);
        }
    }

    #[test]
    fn ensemble_respects_ranges() {
        let spec = InstanceSpec::default();
        for k in 0..100 {
            let g = random_instance(&spec, k).unwrap();
            assert!((4..=12).contains(&g.n_vertices()));
            assert!(g.betti() <= 4);
            assert!(g.potential().iter().all(|q| (-1.0..1.0).contains(q)));
        }
    }

    #[test]
    fn infeasible_and_invalid_specs() {
        assert!(matches!(
            random_graph(1, 4, 4),
            Err(Error::InfeasibleBeta { beta: 4, n: 4, max: 3 })
        ));
        assert!(random_graph(1, 4, 3).is_ok());
        let bad = InstanceSpec {
            min_n: 5,
            max_n: 4,
            ..InstanceSpec::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidSpec(_))));
        let bad = InstanceSpec {
            count: 0,
            ..InstanceSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn small_vertex_counts() {
        assert_eq!(random_graph(3, 1, 0).unwrap().n_edges(), 0);
        assert_eq!(random_graph(3, 2, 0).unwrap().edges(), &[(0, 1)]);
    }

    #[test]
    fn prufer_trees_cover_all_shapes() {
        // all 16 labelled trees on 4 vertices appear
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut seen = BTreeSet::new();
        for _ in 0..2000 {
            let mut t = random_tree(4, &mut rng);
            t.sort();
            seen.insert(t);
        }
        assert_eq!(seen.len(), 16);
    }
}
