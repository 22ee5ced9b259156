use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Direction, InstanceBuilder, MarketInstance, PlatformDesign, Timing};

fn default_epsilon() -> f64 {
    0.1
}

/// Parameters of the score-based synthetic market.
///
/// Every user gets an attractiveness score uniform on [−√3, √3] (unit
/// variance). The probability that `a` likes `b` is
/// `logistic(base_a + score_weight·score_b + pair_noise·u)` with `u` uniform
/// on [−1, 1] per directed pair. `base` is set so that the expected like
/// probability, over score and noise, equals the side's target mean. Each cross pair is a potential independently with
/// probability `density`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParams {
    pub n_i: usize,
    pub n_j: usize,
    pub capacity: usize,
    pub horizon: usize,
    pub density: f64,
    pub mean_like_i: f64,
    pub mean_like_j: f64,
    pub score_weight: f64,
    pub pair_noise: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            n_i: 15,
            n_j: 20,
            capacity: 3,
            horizon: 2,
            density: 0.6,
            mean_like_i: 0.27,
            mean_like_j: 0.57,
            score_weight: 0.8,
            pair_noise: 0.5,
        }
    }
}

/// Instance families the generator knows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// 2×2 market where the final-period value with mutual displays is not
    /// submodular in the backlog.
    Nonsubmodular {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    /// n×n market, K = 1, where every side-I user's myopic favorite is `j1`.
    GreedyAdversarial {
        n: usize,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    /// |I| = 2n, |J| = 2, K = 1, φ_ij = p and φ_ji = q.
    PmAdversarial { n: usize, p: f64, q: f64 },
    Synthetic(SyntheticParams),
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadGeneratorParams(msg.into())
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(bad(format!("{name} = {p} is not a probability")))
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Base logit whose expected logistic value under a uniform score on
/// [−√3, √3] and uniform noise on [−1, 1] is `mean`. The expectation uses a
/// 64×64 midpoint rule; the base comes from bisection around `logit(mean)`.
fn calibrated_base(mean: f64, score_weight: f64, pair_noise: f64) -> f64 {
    const N: usize = 64;
    let spread = 3f64.sqrt();
    let expected = |base: f64| {
        let mut total = 0.0;
        for a in 0..N {
            let score = -spread + 2.0 * spread * (a as f64 + 0.5) / N as f64;
            for c in 0..N {
                let u = -1.0 + 2.0 * (c as f64 + 0.5) / N as f64;
                total += logistic(base + score_weight * score + pair_noise * u);
            }
        }
        total / (N * N) as f64
    };
    let width = score_weight.abs() * spread + pair_noise.abs() + 1.0;
    let (mut lo, mut hi) = (logit(mean) - width, logit(mean) + width);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn generate_instance<R: Rng + ?Sized>(kind: &GeneratorKind, rng: &mut R) -> Result<MarketInstance> {
    let built = match kind {
        GeneratorKind::Nonsubmodular { epsilon } => {
            check_probability("epsilon", *epsilon)?;
            InstanceBuilder::new(&["i1", "i2"], &["j1", "j2"], 2, 1)
                .pair("i1", "j1", 1.0, *epsilon)
                .pair("i2", "j2", *epsilon, 1.0)
                .pair("i1", "j2", 1.0, 0.5)
                .pair("i2", "j1", 0.5, 1.0)
                .design(PlatformDesign::new(Direction::TwoDirectional, Timing::NonSequentialAllPeriods))
                .build()
        }
        GeneratorKind::GreedyAdversarial { n, epsilon } => {
            if *n == 0 {
                return Err(bad("n must be at least 1"));
            }
            check_probability("epsilon", *epsilon)?;
            let (is, js) = (names("i", *n), names("j", *n));
            let mut b = InstanceBuilder::new(&is, &js, 2, 1)
                .design(PlatformDesign::new(Direction::TwoDirectional, Timing::NonSequentialFirstPeriod));
            for i in &is {
                for (k, j) in js.iter().enumerate() {
                    let back = if k == 0 { 1.0 } else { 1.0 - epsilon };
                    b = b.like_at(1, i, j, 1.0).like_at(1, j, i, back).like_at(2, i, j, 0.0).like_at(2, j, i, 0.0);
                }
            }
            b.build()
        }
        GeneratorKind::PmAdversarial { n, p, q } => {
            if *n == 0 {
                return Err(bad("n must be at least 1"));
            }
            check_probability("p", *p)?;
            check_probability("q", *q)?;
            let (is, js) = (names("i", 2 * n), names("j", 2));
            let mut b = InstanceBuilder::new(&is, &js, 2, 1)
                .design(PlatformDesign::new(Direction::TwoDirectional, Timing::NonSequentialAllPeriods));
            for i in &is {
                for j in &js {
                    b = b.pair(i, j, *p, *q);
                }
            }
            b.build()
        }
        GeneratorKind::Synthetic(s) => {
            if s.n_i == 0 || s.n_j == 0 || s.capacity == 0 || s.horizon == 0 {
                return Err(bad("side sizes, capacity and horizon must be positive"));
            }
            if !(s.density > 0.0 && s.density <= 1.0) {
                return Err(bad(format!("density = {} must lie in (0, 1]", s.density)));
            }
            for (name, m) in [("mean_like_i", s.mean_like_i), ("mean_like_j", s.mean_like_j)] {
                if !(m > 0.0 && m < 1.0) {
                    return Err(bad(format!("{name} = {m} must lie in (0, 1)")));
                }
            }
            let (is, js) = (names("i", s.n_i), names("j", s.n_j));
            let spread = 3f64.sqrt();
            let score_i: Vec<f64> = is.iter().map(|_| rng.gen_range(-spread..=spread)).collect();
            let score_j: Vec<f64> = js.iter().map(|_| rng.gen_range(-spread..=spread)).collect();
            let base_i = calibrated_base(s.mean_like_i, s.score_weight, s.pair_noise);
            let base_j = calibrated_base(s.mean_like_j, s.score_weight, s.pair_noise);
            let mut b = InstanceBuilder::new(&is, &js, s.horizon, s.capacity)
                .design(PlatformDesign::new(Direction::TwoDirectional, Timing::NonSequentialFirstPeriod));
            for (a, i) in is.iter().enumerate() {
                for (c, j) in js.iter().enumerate() {
                    if rng.gen::<f64>() >= s.density {
                        continue;
                    }
                    let noise_ij: f64 = rng.gen_range(-1.0..=1.0);
                    let noise_ji: f64 = rng.gen_range(-1.0..=1.0);
                    let p_ij = logistic(base_i + s.score_weight * score_j[c] + s.pair_noise * noise_ij);
                    let p_ji = logistic(base_j + s.score_weight * score_i[a] + s.pair_noise * noise_ji);
                    b = b.pair(i, j, p_ij, p_ji);
                }
            }
            b.build()
        }
    };
    built.map_err(|e| bad(e.to_string()))
}
