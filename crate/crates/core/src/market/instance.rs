use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::design::{PlatformDesign, Side};
use super::state::MarketState;
use super::userset::UserSet;

/// Problems that make an instance unusable. Each variant names the user or
/// pair at fault.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("potentials are not symmetric: {to} is a potential of {from} but not the other way round")]
    AsymmetricPotentials { from: String, to: String },
    #[error("like probability {p} for {from} -> {to} in period {period} is outside [0, 1]")]
    ProbabilityOutOfRange { from: String, to: String, period: usize, p: f64 },
    #[error("initial backlog of {user} contains {member}, which is not one of its potentials")]
    BacklogNotSubset { user: String, member: String },
    #[error("no like probability for {from} -> {to} in period {period}")]
    MissingProbability { from: String, to: String, period: usize },
    #[error("{a} and {b} are each in the other's initial backlog")]
    MutualBacklog { a: String, b: String },
    #[error("user id {0} appears more than once")]
    DuplicateUser(String),
    #[error("unknown user id {0}")]
    UnknownUser(String),
    #[error("{from} and {to} are on the same side of the market")]
    SameSide { from: String, to: String },
    #[error("user {0} has no capacity entry")]
    MissingCapacity(String),
    #[error("capacity of {0} must be at least 1")]
    NonPositiveCapacity(String),
    #[error("horizon must be at least 1")]
    BadHorizon,
    #[error("period {period} for {from} -> {to} is outside 1..={horizon}")]
    PeriodOutOfRange { from: String, to: String, period: usize, horizon: usize },
    #[error("like probability for {from} -> {to} in period {period} is given twice")]
    DuplicateProbability { from: String, to: String, period: usize },
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed instance json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// One like-probability entry of the instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEntry {
    pub from: String,
    pub to: String,
    pub period: usize,
    pub p: f64,
}

/// The on-disk instance format. Field order here is the order on write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub users_i: Vec<String>,
    pub users_j: Vec<String>,
    pub capacity: BTreeMap<String, usize>,
    pub horizon: usize,
    pub probabilities: Vec<ProbabilityEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initial_backlog: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<PlatformDesign>,
}

/// Checks every instance invariant of `file` without keeping the result.
pub fn validate_instance(file: &InstanceFile) -> Result<(), ValidationError> {
    MarketInstance::from_file(file.clone()).map(|_| ())
}

/// A validated, immutable market.
///
/// Users are indexed `0..n_i` for side I followed by `n_i..n` for side J, in
/// file order; every tie-break in the crate uses this index order.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance {
    names: Vec<String>,
    n_i: usize,
    capacity: Vec<usize>,
    horizon: usize,
    phi: Vec<Vec<f64>>,
    potentials: Vec<UserSet>,
    initial_backlog: Vec<UserSet>,
    design: Option<PlatformDesign>,
    homogeneous: bool,
}

impl MarketInstance {
    pub fn from_file(file: InstanceFile) -> Result<Self, ValidationError> {
        let InstanceFile { users_i, users_j, capacity, horizon, probabilities, initial_backlog, design } = file;
        if horizon == 0 {
            return Err(ValidationError::BadHorizon);
        }
        let n_i = users_i.len();
        let names: Vec<String> = users_i.into_iter().chain(users_j).collect();
        let n = names.len();
        let mut index = HashMap::with_capacity(n);
        for (k, name) in names.iter().enumerate() {
            if index.insert(name.clone(), k).is_some() {
                return Err(ValidationError::DuplicateUser(name.clone()));
            }
        }
        let lookup = |name: &str| index.get(name).copied().ok_or_else(|| ValidationError::UnknownUser(name.to_string()));

        for key in capacity.keys() {
            lookup(key)?;
        }
        let mut caps = Vec::with_capacity(n);
        for name in &names {
            match capacity.get(name) {
                None => return Err(ValidationError::MissingCapacity(name.clone())),
                Some(0) => return Err(ValidationError::NonPositiveCapacity(name.clone())),
                Some(&k) => caps.push(k),
            }
        }

        let mut given: Vec<Vec<Option<f64>>> = vec![vec![None; n * n]; horizon];
        let mut potentials = vec![UserSet::new(); n];
        for e in &probabilities {
            let (a, b) = (lookup(&e.from)?, lookup(&e.to)?);
            if (a < n_i) == (b < n_i) {
                return Err(ValidationError::SameSide { from: e.from.clone(), to: e.to.clone() });
            }
            if e.period == 0 || e.period > horizon {
                return Err(ValidationError::PeriodOutOfRange {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    period: e.period,
                    horizon,
                });
            }
            if !(0.0..=1.0).contains(&e.p) {
                return Err(ValidationError::ProbabilityOutOfRange {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    period: e.period,
                    p: e.p,
                });
            }
            let slot = &mut given[e.period - 1][a * n + b];
            if slot.is_some() {
                return Err(ValidationError::DuplicateProbability {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    period: e.period,
                });
            }
            *slot = Some(e.p);
            potentials[a].insert(b);
        }
        for a in 0..n {
            for b in potentials[a].iter() {
                if !potentials[b].contains(a) {
                    return Err(ValidationError::AsymmetricPotentials { from: names[a].clone(), to: names[b].clone() });
                }
            }
        }

        let later_given = given.iter().skip(1).any(|table| table.iter().any(Option::is_some));
        let mut phi = vec![vec![0.0; n * n]; horizon];
        for t in 0..horizon {
            let source = if later_given { t } else { 0 };
            for a in 0..n {
                for b in potentials[a].iter() {
                    match given[source][a * n + b] {
                        Some(p) => phi[t][a * n + b] = p,
                        None => {
                            return Err(ValidationError::MissingProbability {
                                from: names[a].clone(),
                                to: names[b].clone(),
                                period: t + 1,
                            })
                        }
                    }
                }
            }
        }
        let homogeneous = phi.iter().all(|table| table == &phi[0]);

        let mut backlog = vec![UserSet::new(); n];
        for (user, members) in &initial_backlog {
            let u = lookup(user)?;
            for m in members {
                let v = lookup(m)?;
                if !potentials[u].contains(v) {
                    return Err(ValidationError::BacklogNotSubset { user: user.clone(), member: m.clone() });
                }
                backlog[u].insert(v);
            }
        }
        for u in 0..n {
            for v in backlog[u].iter() {
                if backlog[v].contains(u) {
                    return Err(ValidationError::MutualBacklog { a: names[u].clone(), b: names[v].clone() });
                }
            }
        }

        Ok(MarketInstance { names, n_i, capacity: caps, horizon, phi, potentials, initial_backlog: backlog, design, homogeneous })
    }

    pub fn from_json_str(text: &str) -> Result<Self, InstanceIoError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        Ok(Self::from_file(file)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceIoError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceIoError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_file()).expect("instance files always serialize");
        text.push('\n');
        text
    }

    /// The file representation. Time-homogeneous tables are written once
    /// as period 1.
    pub fn to_file(&self) -> InstanceFile {
        let n = self.n_users();
        let periods = if self.homogeneous { 1 } else { self.horizon };
        let mut probabilities = Vec::new();
        for t in 0..periods {
            for a in 0..n {
                for b in self.potentials[a].iter() {
                    probabilities.push(ProbabilityEntry {
                        from: self.names[a].clone(),
                        to: self.names[b].clone(),
                        period: t + 1,
                        p: self.phi[t][a * n + b],
                    });
                }
            }
        }
        let initial_backlog = (0..n)
            .filter(|&u| !self.initial_backlog[u].is_empty())
            .map(|u| (self.names[u].clone(), self.initial_backlog[u].iter().map(|v| self.names[v].clone()).collect()))
            .collect();
        InstanceFile {
            users_i: self.names[..self.n_i].to_vec(),
            users_j: self.names[self.n_i..].to_vec(),
            capacity: (0..n).map(|u| (self.names[u].clone(), self.capacity[u])).collect(),
            horizon: self.horizon,
            probabilities,
            initial_backlog,
            design: self.design,
        }
    }

    pub fn n_users(&self) -> usize {
        self.names.len()
    }

    pub fn n_i(&self) -> usize {
        self.n_i
    }

    pub fn n_j(&self) -> usize {
        self.names.len() - self.n_i
    }

    pub fn users(&self) -> std::ops::Range<usize> {
        0..self.names.len()
    }

    pub fn users_of(&self, side: Side) -> std::ops::Range<usize> {
        match side {
            Side::I => 0..self.n_i,
            Side::J => self.n_i..self.names.len(),
        }
    }

    pub fn side(&self, u: usize) -> Side {
        if u < self.n_i {
            Side::I
        } else {
            Side::J
        }
    }

    pub fn name(&self, u: usize) -> &str {
        &self.names[u]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn capacity(&self, u: usize) -> usize {
        self.capacity[u]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn design(&self) -> Option<PlatformDesign> {
        self.design
    }

    pub fn is_time_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// φ^t_{from,to}: probability that `from` likes `to` when shown in
    /// period `t` (1-based). Zero for non-potential pairs.
    pub fn phi(&self, t: usize, from: usize, to: usize) -> f64 {
        self.phi[t - 1][from * self.names.len() + to]
    }

    /// β^t of the pair: the probability that both like each other in period `t`.
    pub fn beta(&self, t: usize, a: usize, b: usize) -> f64 {
        self.phi(t, a, b) * self.phi(t, b, a)
    }

    pub fn initial_potentials(&self, u: usize) -> &UserSet {
        &self.potentials[u]
    }

    pub fn initial_backlog(&self, u: usize) -> &UserSet {
        &self.initial_backlog[u]
    }

    pub fn has_initial_backlog(&self) -> bool {
        self.initial_backlog.iter().any(|b| !b.is_empty())
    }

    /// All potential pairs as canonical `(i, j)` tuples in index order.
    pub fn potential_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n_i).flat_map(|i| self.potentials[i].iter().map(move |j| (i, j))).collect()
    }

    /// The period-1 state. A user in someone's initial backlog has already
    /// evaluated that someone, so the reverse potential is dropped.
    pub fn initial_state(&self) -> MarketState {
        let mut potentials = self.potentials.clone();
        for u in self.users() {
            for v in self.initial_backlog[u].iter() {
                potentials[v].remove(u);
            }
        }
        MarketState { period: 1, potentials, backlog: self.initial_backlog.clone() }
    }

    pub fn with_design(&self, design: Option<PlatformDesign>) -> Self {
        MarketInstance { design, ..self.clone() }
    }

    /// Multiplies every like probability φ_{ℓ,·} of users on `side` by
    /// `alpha`, clamping to [0, 1].
    pub fn with_scaled_likes(&self, side: Side, alpha: f64) -> Self {
        let mut out = self.clone();
        let n = self.n_users();
        for table in &mut out.phi {
            for a in self.users_of(side) {
                for b in 0..n {
                    let p = &mut table[a * n + b];
                    *p = (*p * alpha).clamp(0.0, 1.0);
                }
            }
        }
        out.homogeneous = out.phi.iter().all(|t| t == &out.phi[0]);
        out
    }

    pub fn with_side_capacity(&self, side: Side, k: usize) -> Self {
        let mut out = self.clone();
        for u in self.users_of(side) {
            out.capacity[u] = k;
        }
        out
    }
}

/// Programmatic construction of instances; the result passes through the
/// same validation as files.
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    file: InstanceFile,
}

impl InstanceBuilder {
    pub fn new<S: AsRef<str>>(users_i: &[S], users_j: &[S], horizon: usize, capacity: usize) -> Self {
        let users_i: Vec<String> = users_i.iter().map(|s| s.as_ref().to_string()).collect();
        let users_j: Vec<String> = users_j.iter().map(|s| s.as_ref().to_string()).collect();
        let capacity = users_i.iter().chain(&users_j).map(|u| (u.clone(), capacity)).collect();
        InstanceBuilder {
            file: InstanceFile {
                users_i,
                users_j,
                capacity,
                horizon,
                probabilities: Vec::new(),
                initial_backlog: BTreeMap::new(),
                design: None,
            },
        }
    }

    /// Same like probability in every period.
    pub fn like(mut self, from: &str, to: &str, p: f64) -> Self {
        for t in 1..=self.file.horizon {
            self = self.like_at(t, from, to, p);
        }
        self
    }

    /// Sets both directions of a pair for every period.
    pub fn pair(self, i: &str, j: &str, p_ij: f64, p_ji: f64) -> Self {
        self.like(i, j, p_ij).like(j, i, p_ji)
    }

    pub fn like_at(mut self, period: usize, from: &str, to: &str, p: f64) -> Self {
        self.file.probabilities.push(ProbabilityEntry { from: from.into(), to: to.into(), period, p });
        self
    }

    pub fn capacity(mut self, user: &str, k: usize) -> Self {
        self.file.capacity.insert(user.into(), k);
        self
    }

    pub fn backlog(mut self, user: &str, member: &str) -> Self {
        self.file.initial_backlog.entry(user.into()).or_default().push(member.into());
        self
    }

    pub fn design(mut self, design: PlatformDesign) -> Self {
        self.file.design = Some(design);
        self
    }

    pub fn into_file(self) -> InstanceFile {
        self.file
    }

    pub fn build(self) -> Result<MarketInstance, ValidationError> {
        MarketInstance::from_file(self.file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::design::{Direction, Timing};

    fn two_by_two() -> InstanceBuilder {
        InstanceBuilder::new(&["i1", "i2"], &["j1", "j2"], 2, 1)
            .pair("i1", "j1", 0.5, 0.4)
            .pair("i1", "j2", 0.3, 0.2)
            .pair("i2", "j1", 1.0, 0.0)
            .pair("i2", "j2", 0.7, 0.9)
    }

    #[test]
    fn symmetric_instance_validates() {
        let inst = two_by_two().build().unwrap();
        assert_eq!(inst.n_users(), 4);
        assert_eq!(inst.phi(2, 1, 2), 1.0);
        assert!((inst.beta(1, 0, 2) - 0.2).abs() < 1e-15);
        assert!(inst.is_time_homogeneous());
    }

    #[test]
    fn one_sided_entry_is_asymmetric() {
        let err = InstanceBuilder::new(&["i"], &["j"], 1, 1).like("i", "j", 0.5).build().unwrap_err();
        assert!(matches!(err, ValidationError::AsymmetricPotentials { .. }));
    }

    #[test]
    fn probability_above_one_is_rejected() {
        let err = InstanceBuilder::new(&["i"], &["j"], 1, 1).pair("i", "j", 1.2, 0.5).build().unwrap_err();
        assert!(matches!(err, ValidationError::ProbabilityOutOfRange { p, .. } if p == 1.2));
    }

    #[test]
    fn backlog_outside_potentials_is_rejected() {
        let err = InstanceBuilder::new(&["i1", "i2"], &["j"], 2, 1)
            .pair("i1", "j", 0.5, 0.5)
            .backlog("j", "i2")
            .build()
            .unwrap_err();
        assert_eq!(err, ValidationError::BacklogNotSubset { user: "j".into(), member: "i2".into() });
    }

    #[test]
    fn partial_period_tables_are_missing_probabilities() {
        let err = InstanceBuilder::new(&["i"], &["j"], 3, 1)
            .like_at(1, "i", "j", 0.5)
            .like_at(1, "j", "i", 0.5)
            .like_at(2, "i", "j", 0.5)
            .build()
            .unwrap_err();
        assert!(matches!(err, ValidationError::MissingProbability { period: 2, .. }));
    }

    #[test]
    fn period_one_table_repeats_when_later_periods_are_absent() {
        let inst = InstanceBuilder::new(&["i"], &["j"], 3, 1)
            .like_at(1, "i", "j", 0.25)
            .like_at(1, "j", "i", 0.5)
            .build()
            .unwrap();
        assert_eq!(inst.phi(3, 0, 1), 0.25);
        assert!(inst.is_time_homogeneous());
    }

    #[test]
    fn json_round_trip_is_stable() {
        let design = PlatformDesign::new(Direction::TwoDirectional, Timing::NonSequentialFirstPeriod);
        let inst = two_by_two().backlog("j1", "i1").design(design).build().unwrap();
        let text = inst.to_json();
        let back = MarketInstance::from_json_str(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
        let users_i = text.find("users_i").unwrap();
        let probs = text.find("probabilities").unwrap();
        assert!(users_i < probs);
    }

    #[test]
    fn initial_state_drops_reverse_potential_of_backlog() {
        let inst = two_by_two().backlog("j1", "i1").build().unwrap();
        let s = inst.initial_state();
        assert!(s.backlog[2].contains(0));
        assert!(s.potentials[2].contains(0));
        assert!(!s.potentials[0].contains(2));
    }

    #[test]
    fn scaling_clamps() {
        let inst = two_by_two().build().unwrap();
        let scaled = inst.with_scaled_likes(Side::J, 2.0);
        assert_eq!(scaled.phi(1, 3, 1), 1.0);
        assert_eq!(scaled.phi(1, 2, 0), 0.8);
        assert_eq!(scaled.phi(1, 0, 2), 0.5);
    }
}
