//! Seeded Monte Carlo experiments over fair-coin sequences.
//!
//! Trial `i` always uses stream `i` of the master seed, trials run on a
//! dedicated rayon pool, and per-trial records are collected in trial order,
//! so results do not depend on the thread count.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitseq::{generate, Seed};
use crate::discrepancy::{self, plan_profile, DiscrepancyValue, DEFAULT_K_MAX};
use crate::error::{Error, Result};
use crate::thresholds::ThresholdFn;

/// Default smallest checkpoint that counts towards the pass criterion.
pub const DEFAULT_MIN_CHECKPOINT: u64 = 1 << 12;

/// Largest `n` accepted by [`exact_d1_distribution`].
pub const EXACT_D1_MAX_N: u64 = 64;

/// Checkpoint schedule of an experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Checkpoints {
    /// `2^j` for `from_exp ≤ j ≤ to_exp`; `to_exp` defaults to `⌊log2 N⌋`.
    Geometric {
        from_exp: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        to_exp: Option<u32>,
    },
    /// `count` log-spaced points `⌈from · (to/from)^(i/(count−1))⌉`, deduplicated.
    LogSpaced { from: u64, to: u64, count: u32 },
    Explicit { points: Vec<u64> },
}

impl Checkpoints {
    pub fn resolve(&self, length: u64) -> Result<Vec<u64>> {
        let points = match self {
            Checkpoints::Geometric { from_exp, to_exp } => {
                if length == 0 {
                    return Err(Error::pre("geometric checkpoints need length >= 1"));
                }
                let top = to_exp.unwrap_or(63 - length.leading_zeros());
                if top > 62 || *from_exp > top {
                    return Err(Error::pre(format!("empty geometric range 2^{from_exp}..2^{top}")));
                }
                (*from_exp..=top).map(|j| 1u64 << j).collect()
            }
            Checkpoints::LogSpaced { from, to, count } => log_spaced(*from, *to, *count)?,
            Checkpoints::Explicit { points } => points.clone(),
        };
        if points.is_empty() {
            return Err(Error::pre("checkpoint list is empty"));
        }
        Ok(points)
    }
}

/// `count` distinct, ascending, roughly log-uniform points in `[from, to]`.
pub fn log_spaced(from: u64, to: u64, count: u32) -> Result<Vec<u64>> {
    if from == 0 || from > to || count == 0 {
        return Err(Error::pre(format!("bad log-spaced range {from}..{to} x {count}")));
    }
    if count == 1 {
        return Ok(vec![to]);
    }
    let ratio = (to as f64 / from as f64).ln();
    let mut out: Vec<u64> = Vec::with_capacity(count as usize);
    for i in 0..count {
        let x = (from as f64 * (ratio * i as f64 / (count - 1) as f64).exp()).ceil() as u64;
        let x = x.clamp(from, to);
        let x = match out.last() {
            Some(&prev) if x <= prev => prev + 1,
            _ => x,
        };
        out.push(x.min(to));
    }
    out.dedup();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedSchedule {
    pub name: String,
    pub schedule: ThresholdFn,
}

impl NamedSchedule {
    pub fn new(name: impl Into<String>, schedule: ThresholdFn) -> Self {
        Self { name: name.into(), schedule }
    }
}

fn default_k_max() -> u32 {
    DEFAULT_K_MAX
}

fn default_min_checkpoint() -> u64 {
    DEFAULT_MIN_CHECKPOINT
}

/// Configuration of one Monte Carlo experiment.
///
/// `length` is the largest checkpoint allowed. Each trial draws
/// `max(length, max_n (n + s(n) − 1))` bits so that every window of every
/// checkpoint is inside the sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub trials: u64,
    pub length: u64,
    pub checkpoints: Checkpoints,
    pub schedules: Vec<NamedSchedule>,
    /// Pass tolerance on `D_{s(n)}(t,n)`.
    pub epsilon: f64,
    #[serde(default = "default_min_checkpoint")]
    pub min_checkpoint: u64,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
}

/// Everything about a spec that can be checked before any trial runs.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub checkpoints: Vec<u64>,
    /// Per schedule, the `(n, k)` pairs to evaluate.
    pub plans: Vec<Vec<(u64, u32)>>,
    pub sequence_bits: u64,
}

impl ExperimentSpec {
    pub fn plan(&self) -> Result<ExperimentPlan> {
        if self.trials == 0 {
            return Err(Error::pre("an experiment needs at least one trial"));
        }
        if self.schedules.is_empty() {
            return Err(Error::pre("an experiment needs at least one schedule"));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::pre(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        let checkpoints = self.checkpoints.resolve(self.length)?;
        if let Some(&last) = checkpoints.last() {
            if last > self.length {
                return Err(Error::pre(format!(
                    "checkpoint {last} exceeds the experiment length {}",
                    self.length
                )));
            }
        }
        if !checkpoints.iter().any(|&n| n >= self.min_checkpoint) {
            return Err(Error::pre(format!(
                "no checkpoint at or above min_checkpoint = {}",
                self.min_checkpoint
            )));
        }
        let plans = self
            .schedules
            .iter()
            .map(|s| plan_profile(u64::MAX, &s.schedule, &checkpoints, self.k_max))
            .collect::<Result<Vec<_>>>()?;
        let need = plans
            .iter()
            .flatten()
            .map(|&(n, k)| n + k as u64 - 1)
            .max()
            .unwrap_or(0);
        let sequence_bits = need.max(self.length);
        usize::try_from(sequence_bits)
            .map_err(|_| Error::Resource(format!("{sequence_bits} bits exceed the address space")))?;
        Ok(ExperimentPlan { checkpoints, plans, sequence_bits })
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    /// `values[s][j]` is `D_{s(n_j)}(t, n_j)` for schedule `s`.
    pub values: Vec<Vec<DiscrepancyValue>>,
    /// Whether `sup_{n_j ≥ n0} D ≤ ε`, per schedule.
    pub passes: Vec<bool>,
}

impl TrialRecord {
    pub fn family_pass(&self) -> bool {
        self.passes.iter().all(|&p| p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub n: u64,
    pub k: u32,
    pub median: DiscrepancyValue,
    pub q10: DiscrepancyValue,
    pub q90: DiscrepancyValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub name: String,
    pub checkpoints: Vec<CheckpointStats>,
    pub pass_count: u64,
    pub pass_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub seed: u64,
    pub trials: u64,
    pub sequence_bits: u64,
    pub schedules: Vec<ScheduleSummary>,
    pub family_pass_count: u64,
    pub family_pass_fraction: f64,
}

fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Resource(format!("cannot start {threads} worker threads: {e}")))
}

fn run_trial(spec: &ExperimentSpec, plan: &ExperimentPlan, index: u64) -> Result<TrialRecord> {
    let t = generate(Seed::new(spec.seed, index), plan.sequence_bits as usize)?;
    let mut values = Vec::with_capacity(plan.plans.len());
    let mut passes = Vec::with_capacity(plan.plans.len());
    for pairs in &plan.plans {
        let points = discrepancy::profile_planned(&t, pairs, spec.k_max)?;
        let pass = points
            .iter()
            .filter(|p| p.n >= spec.min_checkpoint)
            .all(|p| p.d.at_most(spec.epsilon));
        passes.push(pass);
        values.push(points.into_iter().map(|p| p.d).collect());
    }
    Ok(TrialRecord { index, values, passes })
}

/// Runs every trial and returns the records in trial order.
pub fn run_trials(spec: &ExperimentSpec, threads: usize) -> Result<Vec<TrialRecord>> {
    let plan = spec.plan()?;
    let pool = build_pool(threads)?;
    pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|i| run_trial(spec, &plan, i))
            .collect()
    })
}

pub fn run(spec: &ExperimentSpec, threads: usize) -> Result<ExperimentResult> {
    let plan = spec.plan()?;
    let records = run_trials(spec, threads)?;
    Ok(aggregate(spec, &plan, &records))
}

/// Nearest-rank quantile: the `⌈q·M⌉`-th smallest value (1-based).
pub fn nearest_rank<T: Copy>(sorted: &[T], q: f64) -> T {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let m = sorted.len();
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}

pub fn aggregate(spec: &ExperimentSpec, plan: &ExperimentPlan, records: &[TrialRecord]) -> ExperimentResult {
    let trials = records.len() as u64;
    let mut schedules = Vec::with_capacity(spec.schedules.len());
    let mut column = Vec::with_capacity(records.len());
    for (s, named) in spec.schedules.iter().enumerate() {
        let checkpoints = plan.plans[s]
            .iter()
            .enumerate()
            .map(|(j, &(n, k))| {
                column.clear();
                column.extend(records.iter().map(|r| r.values[s][j]));
                column.sort_unstable();
                CheckpointStats {
                    n,
                    k,
                    median: nearest_rank(&column, 0.5),
                    q10: nearest_rank(&column, 0.1),
                    q90: nearest_rank(&column, 0.9),
                }
            })
            .collect();
        let pass_count = records.iter().filter(|r| r.passes[s]).count() as u64;
        schedules.push(ScheduleSummary {
            name: named.name.clone(),
            checkpoints,
            pass_count,
            pass_fraction: pass_count as f64 / trials as f64,
        });
    }
    let family_pass_count = records.iter().filter(|r| r.family_pass()).count() as u64;
    ExperimentResult {
        seed: spec.seed,
        trials,
        sequence_bits: plan.sequence_bits,
        schedules,
        family_pass_count,
        family_pass_fraction: family_pass_count as f64 / trials as f64,
    }
}

/// One atom of the law of `D(t,n)` under the fair-coin measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct D1Atom {
    /// `|2z − n| / n`, unreduced.
    pub value: DiscrepancyValue,
    /// Reduced probability.
    pub probability: BigRational,
}

/// Exact law of `D(t,n) = |2Z − n| / n` with `Z ~ Binomial(n, 1/2)`,
/// ascending in value. Atoms for `z` and `n − z` are merged.
pub fn exact_d1_distribution(n: u64) -> Result<Vec<D1Atom>> {
    if !(1..=EXACT_D1_MAX_N).contains(&n) {
        return Err(Error::pre(format!("exact distribution needs 1 <= n <= {EXACT_D1_MAX_N}, got {n}")));
    }
    let total = BigUint::one() << n as usize;
    // binomial(n, z) by the multiplicative recurrence
    let mut binom = BigUint::one();
    let mut weights = vec![BigUint::zero(); n as usize / 2 + 1];
    for z in 0..=n {
        let numer = (2 * z).abs_diff(n);
        weights[(numer / 2) as usize] += &binom;
        binom = binom * (n - z) / (z + 1);
    }
    let atoms = weights
        .into_iter()
        .enumerate()
        .filter(|(_, w)| !w.is_zero())
        .map(|(half, w)| {
            let numer = 2 * half as u64 + n % 2;
            let g = w.gcd(&total);
            D1Atom {
                value: DiscrepancyValue::new(numer, n).expect("n >= 1"),
                probability: BigRational::new_raw((&w / &g).into(), (&total / &g).into()),
            }
        })
        .collect();
    Ok(atoms)
}

/// Counts of `|2·zeros − n|` over `trials` seeded sequences of length `n`,
/// indexed by that numerator.
pub fn empirical_d1_counts(master: u64, trials: u64, n: u64, threads: usize) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::pre("d1 needs n >= 1"));
    }
    let pool = build_pool(threads)?;
    let numerators: Vec<u64> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let t = generate(Seed::new(master, i), n as usize)?;
                Ok(discrepancy::d1(&t, n)?.numerator())
            })
            .collect::<Result<_>>()
    })?;
    let mut counts = vec![0u64; n as usize + 1];
    for v in numerators {
        counts[v as usize] += 1;
    }
    Ok(counts)
}

/// Total-variation distance between an exact law and empirical counts.
pub fn total_variation(exact: &[D1Atom], counts: &[u64]) -> f64 {
    let trials: u64 = counts.iter().sum();
    let mut exact_p = vec![0f64; counts.len()];
    for a in exact {
        if let Some(slot) = exact_p.get_mut(a.value.numerator() as usize) {
            *slot = a.probability.to_f64().unwrap_or(f64::NAN);
        }
    }
    0.5 * exact_p
        .iter()
        .zip(counts)
        .map(|(p, &c)| (p - c as f64 / trials as f64).abs())
        .sum::<f64>()
}

/// Medians and trend verdicts of one regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeTrend {
    pub name: String,
    pub medians: Vec<CheckpointStats>,
    /// Medians at checkpoints `≥ min_checkpoint` strictly decrease.
    pub strictly_decreasing: bool,
    /// Every median is at least `floor_ratio` times the first one.
    pub bounded_below: bool,
    pub pass_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    /// Fraction of the first median used as the lower floor, as `(num, den)`.
    pub floor_ratio: (u64, u64),
    pub a: RegimeTrend,
    pub b: RegimeTrend,
}

pub const TREND_FLOOR_RATIO: (u64, u64) = (1, 2);

fn trend(spec: &ExperimentSpec, result: &ExperimentResult) -> RegimeTrend {
    let summary = &result.schedules[0];
    let tail: Vec<_> = summary
        .checkpoints
        .iter()
        .filter(|c| c.n >= spec.min_checkpoint)
        .collect();
    let strictly_decreasing = tail.windows(2).all(|w| w[1].median < w[0].median);
    let first = summary.checkpoints[0].median;
    let (num, den) = TREND_FLOOR_RATIO;
    let bounded_below = summary
        .checkpoints
        .iter()
        .all(|c| c.median.at_least_fraction_of(&first, num, den));
    RegimeTrend {
        name: summary.name.clone(),
        medians: summary.checkpoints.clone(),
        strictly_decreasing,
        bounded_below,
        pass_fraction: summary.pass_fraction,
    }
}

/// Runs two single-schedule regimes on the same seeds and checkpoints.
pub fn regime_compare(a: &ExperimentSpec, b: &ExperimentSpec, threads: usize) -> Result<TrendReport> {
    for spec in [a, b] {
        if spec.schedules.len() != 1 {
            return Err(Error::pre(format!(
                "regime comparison takes one schedule per regime, got {}",
                spec.schedules.len()
            )));
        }
    }
    if a.length != b.length || a.trials != b.trials {
        return Err(Error::pre("regimes must share length and trial count"));
    }
    if a.checkpoints.resolve(a.length)? != b.checkpoints.resolve(b.length)? {
        return Err(Error::pre("regimes must share checkpoints"));
    }
    let ra = run(a, threads)?;
    let rb = run(b, threads)?;
    Ok(TrendReport { floor_ratio: TREND_FLOOR_RATIO, a: trend(a, &ra), b: trend(b, &rb) })
}
