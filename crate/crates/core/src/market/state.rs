use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, RngCore};
use serde::Serialize;

use super::design::{PlatformDesign, Side};
use super::instance::MarketInstance;
use super::userset::UserSet;

/// Per-user potentials and backlogs at the start of `period`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarketState {
    pub period: usize,
    pub potentials: Vec<UserSet>,
    pub backlog: Vec<UserSet>,
}

impl MarketState {
    /// Records that `liker` has already seen and liked `user`: `liker`
    /// enters `user`'s backlog and `user` leaves `liker`'s potentials.
    pub fn push_backlog(&mut self, user: usize, liker: usize) {
        self.backlog[user].insert(liker);
        self.potentials[liker].remove(user);
    }

    /// `a` and `b` are both still potentials of each other and neither sits
    /// in the other's backlog, so they can be shown to each other mutually.
    pub fn is_fresh_pair(&self, a: usize, b: usize) -> bool {
        self.potentials[a].contains(b)
            && self.potentials[b].contains(a)
            && !self.backlog[a].contains(b)
            && !self.backlog[b].contains(a)
    }
}

/// Displays chosen for one period.
///
/// `x` holds directed displays `(viewer, profile)`; `w` holds mutual
/// displays as canonical `(i, j)` pairs with `i` on side I.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct DisplayPlan {
    pub x: BTreeSet<(usize, usize)>,
    pub w: BTreeSet<(usize, usize)>,
}

impl DisplayPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty() && self.w.is_empty()
    }

    /// Every (viewer, profile) display implied by the plan, `x` first.
    pub fn displays(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.x.iter().copied().chain(self.w.iter().flat_map(|&(i, j)| [(i, j), (j, i)]))
    }

    /// Number of profiles shown to `u`.
    pub fn load(&self, u: usize) -> usize {
        self.x.iter().filter(|&&(v, _)| v == u).count() + self.w.iter().filter(|&&(i, j)| i == u || j == u).count()
    }

    /// Profiles shown to `u`, ascending.
    pub fn shown_to(&self, u: usize) -> UserSet {
        let mut s: UserSet = self.x.iter().filter(|&&(v, _)| v == u).map(|&(_, p)| p).collect();
        for &(i, j) in &self.w {
            if i == u {
                s.insert(j);
            } else if j == u {
                s.insert(i);
            }
        }
        s
    }
}

/// Orders a pair as `(I-user, J-user)`.
pub fn canonical_pair(instance: &MarketInstance, a: usize, b: usize) -> (usize, usize) {
    if instance.side(a) == Side::I {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Sequential,
    NonSequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MatchRecord {
    pub i: usize,
    pub j: usize,
    pub period: usize,
    pub kind: MatchKind,
}

/// Like (`true`) or dislike (`false`) for each `(viewer, profile)` display.
pub type LikeOutcomes = BTreeMap<(usize, usize), bool>;

/// A reason a plan cannot be shown in the current state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanViolation {
    OverCapacity { user: usize, shown: usize, capacity: usize },
    PairShownTwice { a: usize, b: usize },
    SameSide { viewer: usize, profile: usize },
    NotInitiatingSide { viewer: usize, profile: usize },
    MutualNotAllowed { i: usize, j: usize, period: usize },
    NotPotential { viewer: usize, profile: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransitionError {
    #[error("infeasible plan: {0:?}")]
    InfeasiblePlan(Vec<PlanViolation>),
    #[error("no like outcome recorded for display {viewer} -> {profile}")]
    MissingOutcome { viewer: usize, profile: usize },
}

fn structural_violations(plan: &DisplayPlan, state: &MarketState, instance: &MarketInstance) -> Vec<PlanViolation> {
    let mut out = Vec::new();
    let mut seen_pairs = BTreeSet::new();
    for &(v, p) in &plan.x {
        if instance.side(v) == instance.side(p) {
            out.push(PlanViolation::SameSide { viewer: v, profile: p });
            continue;
        }
        if !seen_pairs.insert(canonical_pair(instance, v, p)) {
            out.push(PlanViolation::PairShownTwice { a: v.min(p), b: v.max(p) });
        }
        if !state.potentials[v].contains(p) {
            out.push(PlanViolation::NotPotential { viewer: v, profile: p });
        }
    }
    for &(i, j) in &plan.w {
        if instance.side(i) != Side::I || instance.side(j) != Side::J {
            out.push(PlanViolation::SameSide { viewer: i, profile: j });
            continue;
        }
        if !seen_pairs.insert((i, j)) {
            out.push(PlanViolation::PairShownTwice { a: i, b: j });
        }
        for (v, p) in [(i, j), (j, i)] {
            if !state.potentials[v].contains(p) {
                out.push(PlanViolation::NotPotential { viewer: v, profile: p });
            }
        }
    }
    out
}

/// Every constraint the plan breaks; empty when the plan is feasible.
pub fn plan_violations(
    plan: &DisplayPlan,
    state: &MarketState,
    design: &PlatformDesign,
    instance: &MarketInstance,
) -> Vec<PlanViolation> {
    let mut out = structural_violations(plan, state, instance);
    let mut load = vec![0usize; instance.n_users()];
    for &(v, p) in &plan.x {
        load[v] += 1;
        if !design.may_initiate(instance.side(v)) && !state.backlog[v].contains(p) {
            out.push(PlanViolation::NotInitiatingSide { viewer: v, profile: p });
        }
    }
    for &(i, j) in &plan.w {
        load[i] += 1;
        load[j] += 1;
        if !design.allows_mutual(state.period, instance.horizon()) {
            out.push(PlanViolation::MutualNotAllowed { i, j, period: state.period });
        }
    }
    for (u, &shown) in load.iter().enumerate() {
        if shown > instance.capacity(u) {
            out.push(PlanViolation::OverCapacity { user: u, shown, capacity: instance.capacity(u) });
        }
    }
    out
}

pub fn plan_is_feasible(
    plan: &DisplayPlan,
    state: &MarketState,
    design: &PlatformDesign,
    instance: &MarketInstance,
) -> bool {
    plan_violations(plan, state, design, instance).is_empty()
}

/// Draws an independent like decision for every display in the plan, in the
/// order of [`DisplayPlan::displays`].
pub fn sample_likes<R: RngCore + ?Sized>(
    plan: &DisplayPlan,
    instance: &MarketInstance,
    period: usize,
    rng: &mut R,
) -> LikeOutcomes {
    plan.displays().map(|(v, p)| ((v, p), rng.gen::<f64>() < instance.phi(period, v, p))).collect()
}

/// Applies one period of displays and like decisions.
///
/// Capacity, direction and timing are the caller's concern (see
/// [`plan_violations`]); this checks only that every display is of a current
/// potential and that no pair is shown twice.
pub fn transition(
    state: &MarketState,
    instance: &MarketInstance,
    plan: &DisplayPlan,
    outcomes: &LikeOutcomes,
) -> Result<(MarketState, Vec<MatchRecord>), TransitionError> {
    let violations = structural_violations(plan, state, instance);
    if !violations.is_empty() {
        return Err(TransitionError::InfeasiblePlan(violations));
    }
    let n = instance.n_users();
    let outcome = |v: usize, p: usize| {
        outcomes.get(&(v, p)).copied().ok_or(TransitionError::MissingOutcome { viewer: v, profile: p })
    };

    let mut shown = vec![UserSet::new(); n];
    let mut liked_by = vec![UserSet::new(); n];
    let mut disliked_by = vec![UserSet::new(); n];
    let mut matches = Vec::new();
    for (v, p) in plan.displays() {
        shown[v].insert(p);
        let liked = outcome(v, p)?;
        if state.potentials[p].contains(v) {
            if liked {
                liked_by[p].insert(v);
            } else {
                disliked_by[p].insert(v);
            }
        }
    }
    for &(v, p) in &plan.x {
        if state.backlog[v].contains(p) && outcome(v, p)? {
            let (i, j) = canonical_pair(instance, v, p);
            matches.push(MatchRecord { i, j, period: state.period, kind: MatchKind::Sequential });
        }
    }
    for &(i, j) in &plan.w {
        if outcome(i, j)? && outcome(j, i)? {
            matches.push(MatchRecord { i, j, period: state.period, kind: MatchKind::NonSequential });
        }
    }

    let mut next = MarketState { period: state.period + 1, potentials: state.potentials.clone(), backlog: state.backlog.clone() };
    for u in 0..n {
        next.potentials[u].difference_with(&shown[u]);
        next.potentials[u].difference_with(&disliked_by[u]);
        next.backlog[u].union_with(&liked_by[u]);
        next.backlog[u].difference_with(&shown[u]);
    }
    Ok((next, matches))
}

/// Probability that first-period sequential displays `x` produce exactly
/// the backlog family `backlog` (one set per user).
pub fn backlog_probability(x: &BTreeSet<(usize, usize)>, backlog: &[UserSet], instance: &MarketInstance) -> f64 {
    let mut prob = 1.0;
    for u in instance.users() {
        if !backlog[u].is_subset(instance.initial_potentials(u)) {
            return 0.0;
        }
        for v in instance.initial_potentials(u).iter() {
            let q = if x.contains(&(v, u)) { instance.phi(1, v, u) } else { 0.0 };
            prob *= if backlog[u].contains(v) { q } else { 1.0 - q };
            if prob == 0.0 {
                return 0.0;
            }
        }
    }
    prob
}
