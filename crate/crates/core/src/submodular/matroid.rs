use serde::Serialize;

use crate::market::{MarketInstance, PlatformDesign, Side};

/// A first-period display decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Element {
    /// `viewer` is shown `profile` on its own.
    Arc { viewer: usize, profile: usize },
    /// `i` and `j` are shown to each other in the same period.
    Pair { i: usize, j: usize },
}

/// Disjoint parts covering the ground set, each with a budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionMatroid {
    pub parts: Vec<Vec<usize>>,
    pub budgets: Vec<usize>,
    part_of: Vec<usize>,
}

impl PartitionMatroid {
    /// `part_of[e]` names the part of element `e`; parts are numbered from 0.
    pub fn from_labels(part_of: Vec<usize>, budgets: Vec<usize>) -> Self {
        let mut parts = vec![Vec::new(); budgets.len()];
        for (e, &p) in part_of.iter().enumerate() {
            parts[p].push(e);
        }
        PartitionMatroid { parts, budgets, part_of }
    }

    fn is_independent(&self, set: &[usize]) -> bool {
        let mut used = vec![0usize; self.budgets.len()];
        set.iter().all(|&e| {
            let p = self.part_of[e];
            used[p] += 1;
            used[p] <= self.budgets[p]
        })
    }
}

/// Nested-or-disjoint sets with capacities. Elements outside every set are free.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaminarMatroid {
    pub sets: Vec<Vec<usize>>,
    pub capacities: Vec<usize>,
}

impl LaminarMatroid {
    fn is_independent(&self, set: &[usize]) -> bool {
        self.sets
            .iter()
            .zip(&self.capacities)
            .all(|(s, &cap)| set.iter().filter(|e| s.contains(e)).count() <= cap)
    }

    /// Whether every two sets are nested or disjoint.
    pub fn is_laminar(&self) -> bool {
        let n = self.sets.len();
        (0..n).all(|a| {
            (a + 1..n).all(|b| {
                let (sa, sb) = (&self.sets[a], &self.sets[b]);
                let shared = sa.iter().filter(|e| sb.contains(e)).count();
                shared == 0 || shared == sa.len() || shared == sb.len()
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Matroid {
    Partition(PartitionMatroid),
    Laminar(LaminarMatroid),
}

impl Matroid {
    pub fn is_independent(&self, set: &[usize]) -> bool {
        match self {
            Matroid::Partition(m) => m.is_independent(set),
            Matroid::Laminar(m) => m.is_independent(set),
        }
    }
}

/// Ground set of first-period display decisions and the matroids whose
/// intersection is the feasible first-period region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleRegion {
    pub ground: Vec<Element>,
    pub matroids: Vec<Matroid>,
}

impl FeasibleRegion {
    pub fn is_independent(&self, set: &[usize]) -> bool {
        self.matroids.iter().all(|m| m.is_independent(set))
    }

    pub fn can_add(&self, set: &[usize], e: usize) -> bool {
        if set.contains(&e) {
            return false;
        }
        let mut bigger = set.to_vec();
        bigger.push(e);
        self.is_independent(&bigger)
    }

    pub fn rank_count(&self) -> usize {
        self.matroids.len()
    }
}

/// Capacity partition for `side`: one part per user of that side holding
/// the elements that use the user's capacity; every other element sits in
/// a singleton part of budget 1.
fn capacity_partition(ground: &[Element], instance: &MarketInstance, side: Option<Side>) -> PartitionMatroid {
    let mut budgets: Vec<usize> = instance.users().map(|u| instance.capacity(u)).collect();
    let mut labels = Vec::with_capacity(ground.len());
    for e in ground {
        let owner = match *e {
            Element::Arc { viewer, .. } if side.map_or(true, |s| instance.side(viewer) == s) => Some(viewer),
            Element::Pair { i, .. } if side == Some(Side::I) => Some(i),
            Element::Pair { j, .. } if side == Some(Side::J) => Some(j),
            _ => None,
        };
        labels.push(owner.unwrap_or_else(|| {
            budgets.push(1);
            budgets.len() - 1
        }));
    }
    PartitionMatroid::from_labels(labels, budgets)
}

/// One part per unordered pair of users, budget 1.
fn exclusion_partition(ground: &[Element], instance: &MarketInstance) -> PartitionMatroid {
    let n_j = instance.n_j();
    let n_i = instance.n_i();
    let labels = ground
        .iter()
        .map(|e| {
            let (i, j) = match *e {
                Element::Arc { viewer, profile } if instance.side(viewer) == Side::I => (viewer, profile),
                Element::Arc { viewer, profile } => (profile, viewer),
                Element::Pair { i, j } => (i, j),
            };
            i * n_j + (j - n_i)
        })
        .collect();
    PartitionMatroid::from_labels(labels, vec![1; n_i * n_j])
}

/// The first-period region of `design` from the initial state.
///
/// Ground elements are listed arcs first (by viewer, then profile) and then
/// pairs, covering fresh potential pairs only; initial backlog members are
/// handled outside the region.
pub fn build_feasible_region(instance: &MarketInstance, design: &PlatformDesign) -> FeasibleRegion {
    let state = instance.initial_state();
    let mut ground = Vec::new();
    for u in instance.users() {
        if design.may_initiate(instance.side(u)) {
            for v in state.potentials[u].iter() {
                if state.is_fresh_pair(u, v) {
                    ground.push(Element::Arc { viewer: u, profile: v });
                }
            }
        }
    }
    let mutual = design.allows_mutual(1, instance.horizon());
    if mutual {
        for i in instance.users_of(Side::I) {
            for j in state.potentials[i].iter() {
                if state.is_fresh_pair(i, j) {
                    ground.push(Element::Pair { i, j });
                }
            }
        }
    }

    let matroids = match (design.initiating_side(), mutual) {
        (Some(_), false) => vec![Matroid::Partition(capacity_partition(&ground, instance, None))],
        (None, false) => vec![
            Matroid::Partition(capacity_partition(&ground, instance, None)),
            Matroid::Partition(exclusion_partition(&ground, instance)),
        ],
        (Some(side), true) => {
            let mut sets = Vec::new();
            let mut capacities = Vec::new();
            for u in instance.users_of(side) {
                let involves = |e: &Element| match *e {
                    Element::Arc { viewer, .. } => viewer == u,
                    Element::Pair { i, j } => i == u || j == u,
                };
                let mine: Vec<usize> = (0..ground.len()).filter(|&k| involves(&ground[k])).collect();
                for v in state.potentials[u].iter() {
                    let both: Vec<usize> = mine
                        .iter()
                        .copied()
                        .filter(|&k| match ground[k] {
                            Element::Arc { profile, .. } => profile == v,
                            Element::Pair { i, j } => i == v || j == v,
                        })
                        .collect();
                    if both.len() > 1 {
                        sets.push(both);
                        capacities.push(1);
                    }
                }
                sets.push(mine);
                capacities.push(instance.capacity(u));
            }
            vec![
                Matroid::Laminar(LaminarMatroid { sets, capacities }),
                Matroid::Partition(capacity_partition(&ground, instance, Some(side.other()))),
            ]
        }
        (None, true) => vec![
            Matroid::Partition(capacity_partition(&ground, instance, Some(Side::I))),
            Matroid::Partition(capacity_partition(&ground, instance, Some(Side::J))),
            Matroid::Partition(exclusion_partition(&ground, instance)),
        ],
    };
    FeasibleRegion { ground, matroids }
}
