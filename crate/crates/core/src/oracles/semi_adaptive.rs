use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::market::{MarketInstance, PlatformDesign, Side, UserSet};

/// Ground-set size up to which [`best_semi_adaptive_value`] enumerates.
pub const SEMI_ADAPTIVE_EDGE_LIMIT: usize = 8;

#[derive(Clone, Copy)]
enum Element {
    Arc(usize, usize),
    Pair(usize, usize),
}

impl Element {
    fn pair(self, instance: &MarketInstance) -> (usize, usize) {
        match self {
            Element::Arc(u, v) if instance.side(u) == Side::I => (u, v),
            Element::Arc(u, v) => (v, u),
            Element::Pair(i, j) => (i, j),
        }
    }
}

/// Best expected matches over semi-adaptive policies: initiating and mutual
/// displays are scheduled before the market opens, and only backlog
/// displays react to realized likes.
///
/// Every schedule of the ground set (each element in one period or never)
/// is enumerated. Given a schedule, backlog decisions of different users do
/// not interact, so each user's adaptive backlog value is its own small
/// dynamic program.
pub fn best_semi_adaptive_value(instance: &MarketInstance, design: &PlatformDesign) -> Result<f64> {
    let horizon = instance.horizon();
    let state = instance.initial_state();
    let mutual_periods: Vec<usize> = (1..=horizon).filter(|&t| design.allows_mutual(t, horizon)).collect();
    let mut ground = Vec::new();
    for u in instance.users() {
        if design.may_initiate(instance.side(u)) {
            for v in state.potentials[u].iter() {
                if state.is_fresh_pair(u, v) {
                    ground.push(Element::Arc(u, v));
                }
            }
        }
    }
    if !mutual_periods.is_empty() {
        for i in instance.users_of(Side::I) {
            for j in state.potentials[i].iter() {
                if state.is_fresh_pair(i, j) {
                    ground.push(Element::Pair(i, j));
                }
            }
        }
    }
    if ground.len() > SEMI_ADAPTIVE_EDGE_LIMIT {
        return Err(Error::TooManyEdges { count: ground.len(), limit: SEMI_ADAPTIVE_EDGE_LIMIT });
    }

    let choices: Vec<Vec<usize>> = ground
        .iter()
        .map(|e| match e {
            Element::Arc(..) => (0..=horizon).collect(),
            Element::Pair(..) => std::iter::once(0).chain(mutual_periods.iter().copied()).collect(),
        })
        .collect();
    let mut schedule = vec![0usize; ground.len()];
    let mut best = 0.0f64;
    loop {
        if let Some(v) = evaluate(instance, &ground, &schedule) {
            best = best.max(v);
        }
        let mut k = 0;
        loop {
            if k == ground.len() {
                return Ok(best);
            }
            let pos = choices[k].iter().position(|&c| c == schedule[k]).expect("current choice is listed");
            if pos + 1 < choices[k].len() {
                schedule[k] = choices[k][pos + 1];
                break;
            }
            schedule[k] = choices[k][0];
            k += 1;
        }
    }
}

/// Value of one schedule, or `None` if it breaks a capacity or shows a pair twice.
fn evaluate(instance: &MarketInstance, ground: &[Element], schedule: &[usize]) -> Option<f64> {
    let horizon = instance.horizon();
    let n = instance.n_users();
    let mut load = vec![vec![0usize; horizon + 1]; n];
    let mut arrivals: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); horizon + 1]; n];
    let mut used_pairs = Vec::new();
    let mut value = 0.0;
    for (&e, &t) in ground.iter().zip(schedule) {
        if t == 0 {
            continue;
        }
        let pair = e.pair(instance);
        if used_pairs.contains(&pair) {
            return None;
        }
        used_pairs.push(pair);
        match e {
            Element::Arc(u, v) => {
                load[u][t] += 1;
                arrivals[v][t].push(u);
            }
            Element::Pair(i, j) => {
                load[i][t] += 1;
                load[j][t] += 1;
                value += instance.beta(t, i, j);
            }
        }
    }
    for u in instance.users() {
        if (1..=horizon).any(|t| load[u][t] > instance.capacity(u)) {
            return None;
        }
    }
    for u in instance.users() {
        let mut memo = HashMap::new();
        value += backlog_value(instance, u, 1, instance.initial_backlog(u).clone(), &load[u], &arrivals[u], &mut memo);
    }
    Some(value)
}

/// Best expected sequential matches user `u` collects from period `t` on,
/// holding backlog `backlog`.
fn backlog_value(
    instance: &MarketInstance,
    u: usize,
    t: usize,
    backlog: UserSet,
    load: &[usize],
    arrivals: &[Vec<usize>],
    memo: &mut HashMap<(usize, UserSet), f64>,
) -> f64 {
    if t > instance.horizon() {
        return 0.0;
    }
    if let Some(&v) = memo.get(&(t, backlog.clone())) {
        return v;
    }
    let room = instance.capacity(u) - load[t];
    let members: Vec<usize> = backlog.iter().collect();
    let incoming = &arrivals[t];
    let mut best = 0.0f64;
    for show in 0u64..(1u64 << members.len()) {
        if show.count_ones() as usize > room {
            continue;
        }
        let mut now = 0.0;
        let mut kept = UserSet::new();
        for (b, &v) in members.iter().enumerate() {
            if show >> b & 1 == 1 {
                now += instance.phi(t, u, v);
            } else {
                kept.insert(v);
            }
        }
        let mut later = 0.0;
        for likes in 0u64..(1u64 << incoming.len()) {
            let mut prob = 1.0;
            let mut next = kept.clone();
            for (b, &v) in incoming.iter().enumerate() {
                let p = instance.phi(t, v, u);
                if likes >> b & 1 == 1 {
                    prob *= p;
                    next.insert(v);
                } else {
                    prob *= 1.0 - p;
                }
            }
            if prob > 0.0 {
                later += prob * backlog_value(instance, u, t + 1, next, load, arrivals, memo);
            }
        }
        best = best.max(now + later);
    }
    memo.insert((t, backlog), best);
    best
}
