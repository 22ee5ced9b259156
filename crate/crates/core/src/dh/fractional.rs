use std::collections::BTreeMap;

use matchplan_lp::{solve_lp, LinearProgram, Relation};

use crate::error::{Error, Result};
use crate::market::{canonical_pair, plan_violations, DisplayPlan, MarketInstance, MarketState, PlatformDesign, Side};
use crate::policy::{Episode, Memoryless, MemorylessEpisode, Policy};

const POSITIVE: f64 = 1e-9;

/// Column indices of the lookahead LP, keyed by (period offset, viewer, profile).
#[derive(Default)]
struct Columns {
    x: BTreeMap<(usize, usize, usize), usize>,
    w: BTreeMap<(usize, usize, usize), usize>,
    y: BTreeMap<(usize, usize, usize), usize>,
}

/// LP over the current period and the next one (when there is one).
///
/// Backlog displays `y` are limited by the likes the earlier `x` displays are
/// expected to produce, discounting the pairs that were shown mutually.
fn lookahead_lp(state: &MarketState, instance: &MarketInstance, design: &PlatformDesign) -> (LinearProgram, Columns) {
    let t = state.period;
    let horizon = instance.horizon();
    let periods: Vec<usize> = (t..=horizon.min(t + 1)).collect();
    let last = periods.len() - 1;
    let mut lp = LinearProgram::new();
    let mut cols = Columns::default();

    for (s, &tau) in periods.iter().enumerate() {
        if design.allows_mutual(tau, horizon) {
            for i in instance.users_of(Side::I) {
                for j in state.potentials[i].iter() {
                    let b = instance.beta(tau, i, j);
                    if b > 0.0 && state.is_fresh_pair(i, j) {
                        cols.w.insert((s, i, j), lp.add_var(b, 0.0, 1.0));
                    }
                }
            }
        }
        for u in instance.users() {
            let initiates = design.may_initiate(instance.side(u));
            for v in state.potentials[u].iter() {
                if state.backlog[u].contains(v) {
                    continue;
                }
                let (i, j) = canonical_pair(instance, u, v);
                let has_w = cols.w.contains_key(&(s, i, j));
                let feeds_backlog = initiates && s < last && instance.phi(tau, u, v) > 0.0;
                if has_w || feeds_backlog {
                    cols.x.insert((s, u, v), lp.add_var(0.0, 0.0, 1.0));
                }
            }
        }
    }
    for (s, &tau) in periods.iter().enumerate() {
        for u in instance.users() {
            for v in state.potentials[u].iter() {
                let earlier_x = (0..s).any(|r| cols.x.contains_key(&(r, v, u)));
                if (state.backlog[u].contains(v) || earlier_x) && instance.phi(tau, u, v) > 0.0 {
                    cols.y.insert((s, u, v), lp.add_var(instance.phi(tau, u, v), 0.0, 1.0));
                }
            }
        }
    }

    for (&(s, u, v), _) in cols.y.iter() {
        let mut row = Vec::new();
        for r in 0..=s {
            if let Some(&k) = cols.y.get(&(r, u, v)) {
                row.push((k, 1.0));
            }
        }
        for r in 0..s {
            if let Some(&k) = cols.x.get(&(r, v, u)) {
                let p = instance.phi(periods[r], v, u);
                row.push((k, -p));
                let (i, j) = canonical_pair(instance, u, v);
                if let Some(&kw) = cols.w.get(&(r, i, j)) {
                    row.push((kw, p));
                }
            }
        }
        let rhs = if state.backlog[u].contains(v) { 1.0 } else { 0.0 };
        lp.add_constraint(row, Relation::Le, rhs);
    }

    let mut per_arc: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut per_load: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (&(s, u, v), &k) in cols.x.iter().chain(cols.y.iter()) {
        per_arc.entry((u, v)).or_default().push(k);
        per_load.entry((s, u)).or_default().push(k);
    }
    for row in per_arc.values().filter(|r| r.len() > 1) {
        lp.add_constraint(row.iter().map(|&k| (k, 1.0)), Relation::Le, 1.0);
    }
    for (&(_, u), row) in &per_load {
        let cap = instance.capacity(u);
        if row.len() > cap {
            lp.add_constraint(row.iter().map(|&k| (k, 1.0)), Relation::Le, cap as f64);
        }
    }

    for s in 0..periods.len() {
        for i in instance.users_of(Side::I) {
            for j in state.potentials[i].iter() {
                let xij = cols.x.get(&(s, i, j)).copied();
                let xji = cols.x.get(&(s, j, i)).copied();
                let w = cols.w.get(&(s, i, j)).copied();
                if let Some(kw) = w {
                    for kx in [xij, xji].into_iter().flatten() {
                        lp.add_constraint([(kw, 1.0), (kx, -1.0)], Relation::Le, 0.0);
                    }
                }
                if let (Some(a), Some(b)) = (xij, xji) {
                    let mut row = vec![(a, 1.0), (b, 1.0)];
                    if let Some(kw) = w {
                        row.push((kw, -1.0));
                    }
                    lp.add_constraint(row, Relation::Le, 1.0);
                }
                for (viewer, kx) in [(i, xij), (j, xji)] {
                    if let (Some(kx), false) = (kx, design.may_initiate(instance.side(viewer))) {
                        match w {
                            Some(kw) => {
                                lp.add_constraint([(kx, 1.0), (kw, -1.0)], Relation::Le, 0.0);
                            }
                            None => lp.set_bounds(kx, 0.0, 0.0),
                        }
                    }
                }
            }
        }
    }
    (lp, cols)
}

/// Rounds the current-period part of the LP: each user takes backlog
/// profiles with positive `y` by decreasing value, then fresh profiles with
/// positive `x` by decreasing value, up to capacity. Picks made by both
/// users of a fresh pair become a mutual display when the period allows it;
/// otherwise only the initiating viewer keeps the pick (side I under
/// two-directional designs).
fn round_current(
    values: &[f64],
    cols: &Columns,
    state: &MarketState,
    instance: &MarketInstance,
    design: &PlatformDesign,
) -> DisplayPlan {
    let n = instance.n_users();
    let mut y_cand: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut x_cand: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(s, u, v), &k) in &cols.y {
        if s == 0 && values[k] > POSITIVE {
            y_cand[u].push((v, values[k]));
        }
    }
    for (&(s, u, v), &k) in &cols.x {
        if s == 0 && values[k] > POSITIVE {
            x_cand[u].push((v, values[k]));
        }
    }
    let mut picks: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in instance.users() {
        for list in [&mut y_cand[u], &mut x_cand[u]] {
            list.sort_by(|a, b| b.1.total_cmp(&a.1));
            for &(v, _) in list.iter() {
                if picks[u].len() < instance.capacity(u) {
                    picks[u].push(v);
                }
            }
        }
    }

    let t = state.period;
    let mutual_ok = design.allows_mutual(t, instance.horizon());
    let mut plan = DisplayPlan::new();
    for u in instance.users() {
        for &v in &picks[u] {
            if state.backlog[u].contains(v) {
                plan.x.insert((u, v));
                continue;
            }
            let reciprocal = picks[v].contains(&u);
            let side = instance.side(u);
            if reciprocal && mutual_ok {
                plan.w.insert(canonical_pair(instance, u, v));
            } else if reciprocal {
                let keeper = design.initiating_side().unwrap_or(Side::I);
                if side == keeper {
                    plan.x.insert((u, v));
                }
            } else if design.may_initiate(side) {
                plan.x.insert((u, v));
            }
        }
    }
    plan
}

/// DH with a lookahead LP solved every period and rounded greedily.
#[derive(Debug, Clone)]
pub struct DhFractional {
    instance: MarketInstance,
    design: PlatformDesign,
    first: DisplayPlan,
}

impl DhFractional {
    pub fn new(instance: &MarketInstance, design: PlatformDesign) -> Result<Self> {
        let first = Self::solve_period(&instance.initial_state(), instance, &design)?;
        Ok(DhFractional { instance: instance.clone(), design, first })
    }

    /// Solves and rounds the lookahead LP from `state`.
    pub fn solve_period(state: &MarketState, instance: &MarketInstance, design: &PlatformDesign) -> Result<DisplayPlan> {
        let (lp, cols) = lookahead_lp(state, instance, design);
        let sol = solve_lp(&lp)?;
        let plan = round_current(&sol.values, &cols, state, instance, design);
        let violations = plan_violations(&plan, state, design, instance);
        if !violations.is_empty() {
            return Err(Error::InfeasiblePlan { policy: "dh-fractional".into(), period: state.period, violations });
        }
        Ok(plan)
    }
}

pub fn dh_fractional_policy(instance: &MarketInstance, design: PlatformDesign) -> Result<DhFractional> {
    DhFractional::new(instance, design)
}

impl Memoryless for DhFractional {
    fn plan_state(&self, state: &MarketState) -> Result<DisplayPlan> {
        if state.period == 1 {
            Ok(self.first.clone())
        } else {
            Self::solve_period(state, &self.instance, &self.design)
        }
    }
}

impl Policy for DhFractional {
    fn name(&self) -> String {
        "dh-fractional".into()
    }

    fn design(&self) -> PlatformDesign {
        self.design
    }

    fn start(&self) -> Box<dyn Episode + '_> {
        Box::new(MemorylessEpisode(self))
    }
}
