use std::collections::BTreeSet;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{plan_violations, sample_likes, transition, MarketInstance, MatchKind, PlatformDesign, Side};
use crate::par::{map_indices, Execution};
use crate::policy::Policy;

/// How many replications to run and how their random streams are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { replications: 100, master_seed: 0, execution: Execution::Parallel }
    }
}

/// Outcome of one simulated run of the market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub replication: usize,
    pub matches_total: usize,
    pub matches_seq: usize,
    pub matches_nonseq: usize,
    /// Side-I users with at least one match.
    pub matched_i: usize,
    /// Side-J users with at least one match.
    pub matched_j: usize,
    /// Master seed; the replication's generator is that seed on stream `replication`.
    pub seed: u64,
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
    pub mean_seq: f64,
    pub mean_nonseq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyResult {
    pub policy: String,
    pub design: PlatformDesign,
    pub replications: Vec<ReplicationResult>,
}

fn mean_and_error(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

impl PolicyResult {
    pub fn mean(&self) -> f64 {
        self.summary().mean
    }

    pub fn std_error(&self) -> f64 {
        self.summary().std_error
    }

    pub fn summary(&self) -> Summary {
        let reps = &self.replications;
        let (mean, std_error) = mean_and_error(reps.iter().map(|r| r.matches_total as f64));
        let (mean_seq, _) = mean_and_error(reps.iter().map(|r| r.matches_seq as f64));
        let (mean_nonseq, _) = mean_and_error(reps.iter().map(|r| r.matches_nonseq as f64));
        Summary { mean, std_error, mean_seq, mean_nonseq }
    }

    /// Writes one row per replication, without header.
    pub fn write_rows<W: Write>(&self, out: &mut csv::Writer<W>) -> csv::Result<()> {
        let design = self.design.to_string();
        for r in &self.replications {
            out.write_record([
                self.policy.clone(),
                design.clone(),
                r.replication.to_string(),
                r.matches_total.to_string(),
                r.matches_seq.to_string(),
                r.matches_nonseq.to_string(),
                r.seed.to_string(),
            ])?;
        }
        Ok(())
    }
}

/// Column names of the per-replication CSV.
pub const CSV_COLUMNS: [&str; 7] =
    ["policy", "design", "replication", "matches_total", "matches_seq", "matches_nonseq", "seed"];

/// Comment line describing how the random streams were derived.
pub fn csv_header_comment(master_seed: u64) -> String {
    format!("# rng=ChaCha8 seed_from_u64({master_seed}) stream=replication index; likes drawn in plan display order")
}

/// Writes the comment header, column names and every result's rows.
pub fn write_csv<W: Write>(out: W, master_seed: u64, results: &[PolicyResult]) -> csv::Result<()> {
    let mut out = out;
    writeln!(out, "{}", csv_header_comment(master_seed))?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_COLUMNS)?;
    for r in results {
        r.write_rows(&mut writer)?;
    }
    writer.flush()?;
    Ok(())
}

/// The generator used for replication `r`.
pub fn replication_rng(master_seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(r as u64);
    rng
}

fn run_one(instance: &MarketInstance, policy: &dyn Policy, design: &PlatformDesign, r: usize, seed: u64) -> Result<ReplicationResult> {
    let mut rng = replication_rng(seed, r);
    let mut episode = policy.start();
    let mut state = instance.initial_state();
    let (mut seq, mut nonseq) = (0, 0);
    let mut matched = BTreeSet::new();
    while state.period <= instance.horizon() {
        let plan = episode.plan(&state, &mut rng)?;
        let violations = plan_violations(&plan, &state, design, instance);
        if !violations.is_empty() {
            return Err(Error::InfeasiblePlan { policy: policy.name(), period: state.period, violations });
        }
        let likes = sample_likes(&plan, instance, state.period, &mut rng);
        let (next, records) = transition(&state, instance, &plan, &likes)?;
        for m in records {
            match m.kind {
                MatchKind::Sequential => seq += 1,
                MatchKind::NonSequential => nonseq += 1,
            }
            matched.insert(m.i);
            matched.insert(m.j);
        }
        state = next;
    }
    let matched_i = matched.iter().filter(|&&u| instance.side(u) == Side::I).count();
    Ok(ReplicationResult {
        replication: r,
        matches_total: seq + nonseq,
        matches_seq: seq,
        matches_nonseq: nonseq,
        matched_i,
        matched_j: matched.len() - matched_i,
        seed,
    })
}

/// Simulates `config.replications` independent runs of `policy`.
///
/// Results come back in replication order whatever the execution mode, and
/// each replication draws from its own stream of the master seed, so the
/// output depends only on the instance, policy and config.
pub fn run_simulation(instance: &MarketInstance, policy: &dyn Policy, config: &SimulationConfig) -> Result<PolicyResult> {
    if config.replications == 0 {
        return Err(Error::BadGeneratorParams("replications must be at least 1".into()));
    }
    let design = policy.design();
    let runs = map_indices(config.replications, config.execution, |r| {
        run_one(instance, policy, &design, r, config.master_seed)
    });
    let replications = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(PolicyResult { policy: policy.name(), design, replications })
}
