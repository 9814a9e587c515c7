//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Instance, InstanceError, VertexId};
use crate::int;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Uniform simple graph with exactly `m` edges.
    Gnm,
    RandomTree,
    Complete,
    /// Vertex 0 joined to every other vertex.
    Star,
    Path,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Gnm,
        Family::RandomTree,
        Family::Complete,
        Family::Star,
        Family::Path,
    ];

    /// Edge count the family produces on `n` vertices; `None` when `m` is free.
    pub fn fixed_edges(self, n: usize) -> Option<usize> {
        match self {
            Family::Gnm => None,
            Family::Complete => Some(n * n.saturating_sub(1) / 2),
            Family::RandomTree | Family::Star | Family::Path => Some(n.saturating_sub(1)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Gnm => "gnm",
            Family::RandomTree => "random-tree",
            Family::Complete => "complete",
            Family::Star => "star",
            Family::Path => "path",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundPolicy {
    /// `c_v = k`, clamped to the degree.
    Fixed { k: usize },
    /// `c_v` uniform in `[1, d_v]` (0 for isolated vertices).
    UniformRandom,
    /// `c_v = floor(d_v * num / den)`.
    Fraction { num: usize, den: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightPolicy {
    None,
    /// Integer weights uniform in `[lo, hi]`.
    UniformInt { lo: u64, hi: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    /// Only read by [`Family::Gnm`].
    pub m: usize,
    pub bounds: BoundPolicy,
    pub weights: WeightPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("G(n, m) with n = {n} allows at most {max} edges, asked for {m}")]
    TooManyEdges { n: usize, m: usize, max: usize },
    #[error("fraction bound policy needs a positive denominator")]
    ZeroDenominator,
    #[error("weight range [{lo}, {hi}] is empty")]
    EmptyWeightRange { lo: u64, hi: u64 },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Uniform random recursive tree on `0..n`, relabelled by a random
/// permutation so that ids carry no structure.
pub fn random_tree_edges<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(VertexId, VertexId)> {
    let mut label: Vec<VertexId> = (0..n).collect();
    label.shuffle(rng);
    (1..n)
        .map(|v| (label[rng.gen_range(0..v)], label[v]))
        .collect()
}

fn gnm_edges<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Vec<(VertexId, VertexId)> {
    let max = n * n.saturating_sub(1) / 2;
    if 2 * m > max {
        // Dense: shuffle the full pair list.
        let mut all: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        all.shuffle(rng);
        all.truncate(m);
        all.sort_unstable();
        return all;
    }
    let mut seen = std::collections::BTreeSet::new();
    while seen.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            seen.insert((u.min(v), u.max(v)));
        }
    }
    seen.into_iter().collect()
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let edges = match spec.family {
        Family::Gnm => {
            let max = n * n.saturating_sub(1) / 2;
            if spec.m > max {
                return Err(GenerateError::TooManyEdges { n, m: spec.m, max });
            }
            gnm_edges(n, spec.m, &mut rng)
        }
        Family::RandomTree => random_tree_edges(n, &mut rng),
        Family::Complete => (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect(),
        Family::Star => (1..n).map(|v| (0, v)).collect(),
        Family::Path => (1..n).map(|v| (v - 1, v)).collect(),
    };

    let mut degree = vec![0usize; n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let bounds = match spec.bounds {
        BoundPolicy::Fixed { k } => vec![k; n],
        BoundPolicy::UniformRandom => degree
            .iter()
            .map(|&d| if d == 0 { 0 } else { rng.gen_range(1..=d) })
            .collect(),
        BoundPolicy::Fraction { num, den } => {
            if den == 0 {
                return Err(GenerateError::ZeroDenominator);
            }
            degree.iter().map(|&d| d * num / den).collect()
        }
    };
    let weights = match spec.weights {
        WeightPolicy::None => None,
        WeightPolicy::UniformInt { lo, hi } => {
            if lo > hi {
                return Err(GenerateError::EmptyWeightRange { lo, hi });
            }
            Some(
                (0..edges.len())
                    .map(|_| int(rng.gen_range(lo..=hi) as i64))
                    .collect(),
            )
        }
    };
    Ok(Instance::new(n, edges, bounds, weights)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{parse_instance, serialize_instance};
    use crate::graph::fixtures::star4;
    use proptest::prelude::*;

    fn spec(family: Family, n: usize, m: usize, bounds: BoundPolicy, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            family,
            n,
            m,
            bounds,
            weights: WeightPolicy::None,
            seed,
        }
    }

    #[test]
    fn complete_graph_with_unit_bounds() {
        let inst = generate(&spec(Family::Complete, 5, 0, BoundPolicy::Fixed { k: 1 }, 0)).unwrap();
        assert_eq!(inst.m(), 10);
        assert!((0..5).all(|v| inst.bound(v) == 1 && inst.degree(v) == 4));
    }

    #[test]
    fn star_matches_fixture() {
        let inst = generate(&spec(Family::Star, 5, 0, BoundPolicy::Fixed { k: 1 }, 0)).unwrap();
        assert_eq!(inst, star4());
    }

    #[test]
    fn seeds_determine_output() {
        let s = spec(Family::RandomTree, 10, 0, BoundPolicy::UniformRandom, 7);
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        let t = generate(&s).unwrap();
        assert_eq!(t.m(), 9);
        assert!(crate::tree::root_tree(&t, None).is_ok());
    }

    #[test]
    fn impossible_edge_count() {
        let e = generate(&spec(Family::Gnm, 4, 7, BoundPolicy::UniformRandom, 0)).unwrap_err();
        assert_eq!(e, GenerateError::TooManyEdges { n: 4, m: 7, max: 6 });
    }

    #[test]
    fn fraction_bounds() {
        let inst = generate(&spec(
            Family::Path,
            4,
            0,
            BoundPolicy::Fraction { num: 1, den: 2 },
            0,
        ))
        .unwrap();
        assert_eq!(inst.bounds(), &[0, 1, 1, 0]);
    }

    proptest! {
        #[test]
        fn generated_instances_round_trip(
            fam in 0usize..5,
            n in 1usize..30,
            m in 0usize..60,
            seed in any::<u64>(),
            weighted in any::<bool>(),
        ) {
            let family = Family::ALL[fam];
            let m = m.min(n * (n - 1) / 2);
            let s = GeneratorSpec {
                family,
                n,
                m,
                bounds: BoundPolicy::UniformRandom,
                weights: if weighted {
                    WeightPolicy::UniformInt { lo: 1, hi: 100 }
                } else {
                    WeightPolicy::None
                },
                seed,
            };
            let inst = generate(&s).unwrap();
            if let Some(k) = family.fixed_edges(n) {
                prop_assert_eq!(inst.m(), k);
            } else {
                prop_assert_eq!(inst.m(), m);
            }
            prop_assert!(inst.edges().iter().all(|&(u, v)| u != v));
            let back = parse_instance(&serialize_instance(&inst)).unwrap();
            prop_assert_eq!(&back, &inst);
            prop_assert_eq!(inst.normalized(), inst);
        }
    }
}
