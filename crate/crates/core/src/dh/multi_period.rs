use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::market::{DisplayPlan, MarketInstance, MarketState, PlatformDesign, Side, Timing};
use crate::policy::{Episode, Policy};
use crate::second_stage::fill_from_backlog;
use crate::submodular::dependent_rounding;

use super::relaxation::{build_dh_relaxation, DhRelaxationSolution, RelaxationForm};

fn check_multi_period(instance: &MarketInstance) -> Result<()> {
    if !instance.is_time_homogeneous() {
        return Err(Error::TimeInhomogeneousMultiPeriod);
    }
    if instance.horizon() < 2 {
        return Err(Error::UnsupportedHorizon {
            policy: "dh-multi".into(),
            expected: "T >= 2".into(),
            actual: instance.horizon(),
        });
    }
    Ok(())
}

/// Committed initiating profiles per user, best reply probability first.
fn commitment_lists(instance: &MarketInstance, arcs: &BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); instance.n_users()];
    for &(u, v) in arcs {
        lists[u].push(v);
    }
    for (u, list) in lists.iter_mut().enumerate() {
        list.sort_by(|&a, &b| instance.phi(1, b, u).total_cmp(&instance.phi(1, a, u)));
    }
    lists
}

/// Spreads a horizon-wide commitment over the periods.
///
/// Each period, every user first sees their remaining committed profiles
/// (those still potentials) in list order, then remaining committed mutual
/// pairs are shown, lowest pair first, where both users have room and the
/// period allows mutual displays; leftover capacity goes to the backlog.
#[derive(Debug, Clone)]
struct CommitmentEpisode<'a> {
    instance: &'a MarketInstance,
    design: PlatformDesign,
    x: Vec<Vec<usize>>,
    w: BTreeSet<(usize, usize)>,
}

impl CommitmentEpisode<'_> {
    fn plan(&mut self, state: &MarketState) -> DisplayPlan {
        let inst = self.instance;
        let mut plan = DisplayPlan::new();
        let mut load = vec![0usize; inst.n_users()];
        for u in inst.users() {
            let list = &mut self.x[u];
            list.retain(|&v| state.potentials[u].contains(v));
            let take = list.len().min(inst.capacity(u));
            for v in list.drain(..take) {
                plan.x.insert((u, v));
            }
            load[u] = take;
        }
        if self.design.allows_mutual(state.period, inst.horizon()) {
            self.w.retain(|&(i, j)| state.is_fresh_pair(i, j));
            let mut shown = Vec::new();
            for &(i, j) in &self.w {
                if load[i] < inst.capacity(i) && load[j] < inst.capacity(j) {
                    plan.w.insert((i, j));
                    load[i] += 1;
                    load[j] += 1;
                    shown.push((i, j));
                }
            }
            for e in shown {
                self.w.remove(&e);
            }
        }
        fill_from_backlog(&mut plan, state, inst);
        plan
    }
}

/// T-period DH: one multi-period MIP, then the commitment display loop.
#[derive(Debug, Clone)]
pub struct DhMultiPeriod {
    instance: MarketInstance,
    design: PlatformDesign,
    relaxation: DhRelaxationSolution,
    x_lists: Vec<Vec<usize>>,
}

impl DhMultiPeriod {
    pub fn new(instance: &MarketInstance, design: PlatformDesign) -> Result<Self> {
        check_multi_period(instance)?;
        let relaxation = build_dh_relaxation(instance, &design, RelaxationForm::MultiPeriod)?.solve()?;
        let x_lists = commitment_lists(instance, &relaxation.x);
        Ok(DhMultiPeriod { instance: instance.clone(), design, relaxation, x_lists })
    }

    pub fn relaxation(&self) -> &DhRelaxationSolution {
        &self.relaxation
    }
}

pub fn dh_multi_period_policy(instance: &MarketInstance, design: PlatformDesign) -> Result<DhMultiPeriod> {
    DhMultiPeriod::new(instance, design)
}

impl Episode for CommitmentEpisode<'_> {
    fn plan(&mut self, state: &MarketState, _rng: &mut dyn RngCore) -> Result<DisplayPlan> {
        Ok(CommitmentEpisode::plan(self, state))
    }

    fn fork(&self) -> Box<dyn Episode + '_> {
        Box::new(self.clone())
    }
}

impl Policy for DhMultiPeriod {
    fn name(&self) -> String {
        "dh-multi".into()
    }

    fn design(&self) -> PlatformDesign {
        self.design
    }

    fn start(&self) -> Box<dyn Episode + '_> {
        Box::new(CommitmentEpisode {
            instance: &self.instance,
            design: self.design,
            x: self.x_lists.clone(),
            w: self.relaxation.w.clone(),
        })
    }
}

/// One-directional sequential T-period DH with randomized commitments.
///
/// The multi-period relaxation is solved as an LP; each replication rounds
/// every initiating user's fractional `x` with [`dependent_rounding`] on its
/// first planning call and then runs the same display loop as
/// [`DhMultiPeriod`].
#[derive(Debug, Clone)]
pub struct DhMultiPeriodRounded {
    instance: MarketInstance,
    design: PlatformDesign,
    fractional: BTreeMap<(usize, usize), f64>,
    objective_value: f64,
}

impl DhMultiPeriodRounded {
    pub fn new(instance: &MarketInstance, initiating: Side) -> Result<Self> {
        check_multi_period(instance)?;
        let direction = match initiating {
            Side::I => crate::market::Direction::OneDirectionalFromI,
            Side::J => crate::market::Direction::OneDirectionalFromJ,
        };
        let design = PlatformDesign::new(direction, Timing::SequentialOnly);
        let model = build_dh_relaxation(instance, &design, RelaxationForm::MultiPeriod)?;
        let (values, objective_value) = model.solve_continuous()?;
        let fractional = model.x_vars.iter().map(|&(arc, k)| (arc, values[k].clamp(0.0, 1.0))).collect();
        Ok(DhMultiPeriodRounded { instance: instance.clone(), design, fractional, objective_value })
    }

    /// LP value of every initiating display.
    pub fn fractional_x(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.fractional
    }

    pub fn lp_objective(&self) -> f64 {
        self.objective_value
    }

    /// One draw of the rounded commitments.
    pub fn sample_commitments(&self, rng: &mut dyn RngCore) -> BTreeSet<(usize, usize)> {
        let mut by_user: BTreeMap<usize, Vec<((usize, usize), f64)>> = BTreeMap::new();
        for (&arc, &v) in &self.fractional {
            by_user.entry(arc.0).or_default().push((arc, v));
        }
        let mut chosen = BTreeSet::new();
        for entries in by_user.values() {
            let values: Vec<f64> = entries.iter().map(|e| e.1).collect();
            for (keep, (arc, _)) in dependent_rounding(&values, rng).into_iter().zip(entries) {
                if keep {
                    chosen.insert(*arc);
                }
            }
        }
        chosen
    }
}

pub fn dh_multi_period_onedir_rounded(instance: &MarketInstance, initiating: Side) -> Result<DhMultiPeriodRounded> {
    DhMultiPeriodRounded::new(instance, initiating)
}

#[derive(Clone)]
struct RoundedEpisode<'a> {
    policy: &'a DhMultiPeriodRounded,
    inner: Option<CommitmentEpisode<'a>>,
}

impl Episode for RoundedEpisode<'_> {
    fn plan(&mut self, state: &MarketState, rng: &mut dyn RngCore) -> Result<DisplayPlan> {
        let policy = self.policy;
        let inner = self.inner.get_or_insert_with(|| CommitmentEpisode {
            instance: &policy.instance,
            design: policy.design,
            x: commitment_lists(&policy.instance, &policy.sample_commitments(rng)),
            w: BTreeSet::new(),
        });
        Ok(inner.plan(state))
    }

    fn fork(&self) -> Box<dyn Episode + '_> {
        Box::new(self.clone())
    }
}

impl Policy for DhMultiPeriodRounded {
    fn name(&self) -> String {
        "dh-multi-rounded".into()
    }

    fn design(&self) -> PlatformDesign {
        self.design
    }

    fn start(&self) -> Box<dyn Episode + '_> {
        Box::new(RoundedEpisode { policy: self, inner: None })
    }
}
