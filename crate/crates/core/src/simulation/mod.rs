//! Monte Carlo estimates of `P(Y_n > x)`.
//!
//! The stratified engine splits on `ν = #{j : xi_j > y}`. Stratum weights are
//! exact binomial point masses and strata above `k_cap` are bounded by
//! `(n V(y))^(k_cap+1) / (k_cap+1)!` instead of sampled. Inside stratum `j`
//! the number `c` of jumps above `M` is integrated out with its exact
//! conditional law, and one jump is smoothed out analytically:
//!
//! * with an uncensored large jump left, its conditional tail at `x - rest`;
//! * otherwise the Asmussen-Kroese form over the small jumps when `x` lies
//!   above their bulk, and the conditional tail of the last small jump below it.
//!
//! Every sample reads a fixed number of uniforms from a counter-addressed
//! stream, and per-block statistics merge in block order, so results do not
//! depend on the number of worker threads.

pub mod rng;
pub mod stats;

mod simplex;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{binomial, WalkConfig, DEFAULT_K_MAX};
use crate::distributions::{ConditionedSampler, JumpModel, Side};
use crate::error::{Error, Result};

pub use simplex::{oracle_w_simplex, SimplexEstimate};
use stats::Welford;

pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const MIN_SAMPLES: u64 = 1_000;
pub const DEFAULT_SEED: u64 = 0x5EED_C0DE;
pub const DEFAULT_Y_FACTOR: f64 = 0.1;
pub const DEFAULT_K_CAP: usize = DEFAULT_K_MAX + 2;
/// Largest stratum cap; keeps the exact `C(j, c)` products in range.
pub const MAX_K_CAP: usize = 60;

/// Samples per block; the unit of parallel work and of the ordered merge.
const BLOCK: u64 = 256;

const TAG_CENSORED: u8 = 1;
const TAG_UNCENSORED: u8 = 2;
const TAG_PLAIN: u8 = 3;

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCConfig {
    /// Samples per stratum, or walks for the plain estimator.
    pub samples: u64,
    pub seed: u64,
    /// Stratification threshold `y = y_factor * M`.
    pub y_factor: f64,
    pub k_cap: usize,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    /// Explicit threshold overriding `y_factor`.
    pub y: Option<f64>,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            y_factor: DEFAULT_Y_FACTOR,
            k_cap: DEFAULT_K_CAP,
            workers: 0,
            y: None,
        }
    }
}

impl MCConfig {
    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::domain(format!(
                "samples must be at least {MIN_SAMPLES}, got {}",
                self.samples
            )));
        }
        if !(self.y_factor > 0.0 && self.y_factor < 1.0) {
            return Err(Error::domain(format!(
                "y_factor must be in (0, 1), got {}",
                self.y_factor
            )));
        }
        if self.k_cap > MAX_K_CAP {
            return Err(Error::domain(format!(
                "k_cap must be at most {MAX_K_CAP}, got {}",
                self.k_cap
            )));
        }
        if let Some(y) = self.y {
            if !y.is_finite() {
                return Err(Error::domain(format!(
                    "threshold y must be finite, got {y}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Plain,
    Stratified,
}

/// Stratum `ν = j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stratum {
    pub j: usize,
    pub weight: f64,
    pub cond_p: f64,
    pub cond_se: f64,
}

/// Part of stratum `j` where exactly `c` of the large jumps exceed `M`.
/// Its standard error is marginal; the parts of one stratum share draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubStratum {
    pub j: usize,
    pub c: usize,
    pub weight: f64,
    pub cond_p: f64,
    pub cond_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub method: Method,
    pub x: f64,
    pub p_hat: f64,
    pub std_err: f64,
    pub samples: u64,
    /// Stratification threshold; `None` for the plain estimator.
    pub y: Option<f64>,
    pub strata: Vec<Stratum>,
    /// Censoring breakdown of the strata; empty for uncensored walks.
    pub censored: Vec<SubStratum>,
    /// Upper bound on the unsampled mass `P(ν > k_cap)`.
    pub bias_bound: f64,
}

impl Estimate {
    pub fn relative_se(&self) -> f64 {
        if self.p_hat > 0.0 {
            self.std_err / self.p_hat
        } else {
            f64::INFINITY
        }
    }

    /// Fraction of `p_hat` carried by `j` large jumps of which `c` are censored.
    pub fn share(&self, j: usize, c: usize) -> f64 {
        let part: f64 = self
            .censored
            .iter()
            .filter(|s| s.j == j && s.c == c)
            .map(|s| s.weight * s.cond_p)
            .sum();
        if self.p_hat > 0.0 {
            part / self.p_hat
        } else {
            0.0
        }
    }

    /// Sum of the sampled stratum weights.
    pub fn weight_total(&self) -> f64 {
        self.strata.iter().map(|s| s.weight).sum()
    }
}

/// Exact stratum weights `P(ν = j)`, `j <= k_cap`, and the tail bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightTable {
    pub y: f64,
    pub tail_y: f64,
    pub weights: Vec<f64>,
    pub bias_bound: f64,
}

impl WeightTable {
    pub fn new(n: u64, model: &JumpModel, y: f64, k_cap: usize) -> Result<Self> {
        let vy = model.tail_v(y);
        if !(vy > 0.0 && vy < 1.0) {
            return Err(Error::domain(format!(
                "tail_V(y) = {vy} at y = {y}; needs (0, 1)"
            )));
        }
        let top = k_cap.min(usize::try_from(n).unwrap_or(usize::MAX));
        let (ln_v, ln_rest) = (vy.ln(), (-vy).ln_1p());
        let weights: Vec<f64> = (0..=top)
            .map(|j| (ln_choose(n, j) + j as f64 * ln_v + (n - j as u64) as f64 * ln_rest).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::StratumOverflow(format!(
                "all weights of strata 0..={top} underflow at y = {y}; raise k_cap or y"
            )));
        }
        let bias_bound = if top as u64 >= n {
            0.0
        } else {
            let k = (k_cap + 1) as f64;
            (k * (n as f64 * vy).ln() - ln_factorial(k_cap + 1)).exp()
        };
        Ok(Self {
            y,
            tail_y: vy,
            weights,
            bias_bound,
        })
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn ln_choose(n: u64, j: usize) -> f64 {
    (0..j as u64).map(|i| ((n - i) as f64).ln()).sum::<f64>() - ln_factorial(j)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))
}

fn block_range(block: u64, samples: u64) -> std::ops::Range<u64> {
    block * BLOCK..((block + 1) * BLOCK).min(samples)
}

fn block_count(samples: u64) -> u64 {
    samples.div_ceil(BLOCK)
}

/// Plain frequency estimate of `P(Y_n > x)`.
pub fn estimate_plain(config: &WalkConfig, x: f64, mc: &MCConfig) -> Result<Estimate> {
    Ok(estimate_plain_many(config, &[x], mc)?.remove(0))
}

/// Plain estimates for several levels from one set of walks.
pub fn estimate_plain_many(
    config: &WalkConfig,
    xs: &[f64],
    mc: &MCConfig,
) -> Result<Vec<Estimate>> {
    mc.validate()?;
    check_levels(xs)?;
    let n = config.n;
    let cap = config.m;
    let all = ConditionedSampler::new(config.model, f64::INFINITY, Side::Below)?;
    let (mu, sigma) = (config.model.location(), config.model.scale());
    let stream = rng::stream_id(TAG_PLAIN, 0, 0);
    let blocks = block_count(mc.samples);
    let hits: Vec<Vec<u64>> = pool(mc.workers)?.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let range = block_range(b, mc.samples);
                let mut g = rng::positioned(mc.seed, stream, range.start, n);
                let mut h = vec![0u64; xs.len()];
                for _ in range {
                    let (mut s, mut y) = (0.0, 0.0);
                    for _ in 0..n {
                        let xi = (all.level_uniform(rng::next_open(&mut g)) - mu) / sigma;
                        s += xi;
                        y += xi.min(cap);
                    }
                    debug_assert!(y <= s && y <= n as f64 * cap);
                    for (hit, &x) in h.iter_mut().zip(xs) {
                        *hit += u64::from(y > x);
                    }
                }
                h
            })
            .collect()
    });
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let count: u64 = hits.iter().map(|h| h[i]).sum();
            let p = count as f64 / mc.samples as f64;
            Estimate {
                method: Method::Plain,
                x,
                p_hat: p,
                std_err: (p * (1.0 - p) / mc.samples as f64).sqrt(),
                samples: mc.samples,
                y: None,
                strata: Vec::new(),
                censored: Vec::new(),
                bias_bound: 0.0,
            }
        })
        .collect())
}

/// Stratified estimate of `P(Y_n > x, ν <= k_cap)` for the censored walk.
pub fn estimate_stratified(config: &WalkConfig, x: f64, mc: &MCConfig) -> Result<Estimate> {
    Ok(estimate_stratified_many(config, &[x], mc)?.remove(0))
}

/// Stratified estimates for several levels from one set of draws per stratum.
pub fn estimate_stratified_many(
    config: &WalkConfig,
    xs: &[f64],
    mc: &MCConfig,
) -> Result<Vec<Estimate>> {
    mc.validate()?;
    check_levels(xs)?;
    let y = mc.y.unwrap_or(mc.y_factor * config.m);
    if !(y < config.m) {
        return Err(Error::domain(format!(
            "threshold y = {y} must lie below M = {}",
            config.m
        )));
    }
    let plan = Plan::new(
        config.n,
        config.model,
        Some(config.m),
        y,
        mc.k_cap,
        TAG_CENSORED,
    )?;
    plan.run(xs, mc)
}

/// Stratified estimate of `P(S_n > x)` for the uncensored walk.
///
/// Default threshold: `y = max(y_factor * x, 2 (n ln n)^(1/2))`, using the
/// largest `x` when several levels share draws.
pub fn simulate_uncensored_tail(
    n: u64,
    x: f64,
    model: &JumpModel,
    mc: &MCConfig,
) -> Result<Estimate> {
    Ok(simulate_uncensored_tail_many(n, &[x], model, mc)?.remove(0))
}

pub fn simulate_uncensored_tail_many(
    n: u64,
    xs: &[f64],
    model: &JumpModel,
    mc: &MCConfig,
) -> Result<Vec<Estimate>> {
    mc.validate()?;
    check_levels(xs)?;
    if n < 2 {
        return Err(Error::domain(format!("n must be at least 2, got {n}")));
    }
    let y = mc.y.unwrap_or_else(|| {
        let top = xs.iter().copied().fold(0.0f64, f64::max);
        (mc.y_factor * top).max(2.0 * (n as f64 * (n as f64).ln()).sqrt())
    });
    let plan = Plan::new(n, *model, None, y, mc.k_cap, TAG_UNCENSORED)?;
    plan.run(xs, mc)
}

fn check_levels(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::domain("no levels x given"));
    }
    if let Some(x) = xs.iter().find(|x| x.is_nan()) {
        return Err(Error::domain(format!("level x = {x} is not a number")));
    }
    Ok(())
}

struct PlanStratum {
    j: usize,
    weight: f64,
    /// `P(c censored | ν = j)` for `c = 0..=j`; `[1]` without censoring.
    split: Vec<f64>,
}

/// Everything a stratified run needs besides the levels.
struct Plan {
    n: u64,
    y: f64,
    cap: Option<f64>,
    tag: u8,
    mu: f64,
    sigma: f64,
    below: ConditionedSampler,
    large: ConditionedSampler,
    strata: Vec<PlanStratum>,
    bias_bound: f64,
}

/// Reusable per-sample state.
struct Draw {
    /// Sum and maximum of all small jumps but the last; `max` is `-inf` if none.
    sum_rest: f64,
    max_rest: f64,
    last: f64,
    /// Prefix sums of the sampled large jumps: `prefix[i]` sums the first `i`.
    prefix: Vec<f64>,
}

impl Plan {
    fn new(
        n: u64,
        model: JumpModel,
        cap: Option<f64>,
        y: f64,
        k_cap: usize,
        tag: u8,
    ) -> Result<Self> {
        let table = WeightTable::new(n, &model, y, k_cap)?;
        let below = ConditionedSampler::new(model, y, Side::Below)?;
        let (large, ratio) = match cap {
            Some(m) => (
                ConditionedSampler::new(model, y, Side::Between { upper: m })?,
                model.tail_v(m) / table.tail_y,
            ),
            None => (ConditionedSampler::new(model, y, Side::Above)?, 0.0),
        };
        let strata = table
            .weights
            .iter()
            .enumerate()
            .map(|(j, &weight)| PlanStratum {
                j,
                weight,
                split: if cap.is_some() {
                    (0..=j)
                        .map(|c| {
                            binomial(j, c)
                                * ratio.powi(c as i32)
                                * (1.0 - ratio).powi((j - c) as i32)
                        })
                        .collect()
                } else {
                    vec![1.0]
                },
            })
            .collect();
        Ok(Self {
            n,
            y,
            cap,
            tag,
            mu: model.location(),
            sigma: model.scale(),
            below,
            large,
            strata,
            bias_bound: table.bias_bound,
        })
    }

    /// Uniforms read per sample in stratum `j`: the small jumps and all but
    /// one large jump.
    fn draws(&self, j: usize) -> u64 {
        self.n - j as u64 + (j.max(1) - 1) as u64
    }

    fn sample(&self, j: usize, g: &mut ChaCha8Rng, d: &mut Draw) {
        let small = self.n - j as u64;
        let (mut sum, mut top) = (0.0, 0.0f64);
        for _ in 0..small.saturating_sub(1) {
            let level = self.below.level_uniform(rng::next_open(g));
            sum += level;
            top = top.max(level);
        }
        let others = small.saturating_sub(1) as f64;
        d.sum_rest = (sum - others * self.mu) / self.sigma;
        d.max_rest = if others > 0.0 {
            ((top - self.mu) / self.sigma).min(self.y)
        } else {
            f64::NEG_INFINITY
        };
        d.last = if small > 0 {
            self.below.sample_uniform(rng::next_open(g))
        } else {
            0.0
        };
        d.prefix.clear();
        d.prefix.push(0.0);
        for i in 0..j.max(1) - 1 {
            let v = self.large.sample_uniform(rng::next_open(g));
            d.prefix.push(d.prefix[i] + v);
        }
    }

    /// Conditional probability of `{Y > x}` in part `(j, c)` given the draw.
    fn smoothed(&self, j: usize, c: usize, x: f64, d: &Draw) -> f64 {
        let small = self.n - j as u64;
        let base = c as f64 * self.cap.unwrap_or(0.0);
        let free = j - c;
        if free >= 1 {
            let rest = base + d.prefix[free - 1] + d.sum_rest + d.last;
            debug_assert!(self.cap.is_none_or(|m| rest <= self.n as f64 * m));
            return self.large.conditional_tail(x - rest);
        }
        if small == 0 {
            return if base > x { 1.0 } else { 0.0 };
        }
        let t = x - (base + d.sum_rest);
        if x > base {
            small as f64 * self.below.conditional_tail(t.max(d.max_rest))
        } else {
            self.below.conditional_tail(t)
        }
    }

    fn run(&self, xs: &[f64], mc: &MCConfig) -> Result<Vec<Estimate>> {
        let blocks = block_count(mc.samples);
        let tasks: Vec<(usize, u64)> = (0..self.strata.len())
            .flat_map(|s| (0..blocks).map(move |b| (s, b)))
            .collect();
        let results: Vec<Vec<Welford>> = pool(mc.workers)?.install(|| {
            tasks
                .par_iter()
                .map(|&(s, b)| self.block(&self.strata[s], b, xs, mc))
                .collect()
        });
        let mut merged: Vec<Vec<Welford>> = self
            .strata
            .iter()
            .map(|s| vec![Welford::default(); xs.len() * (s.split.len() + 1)])
            .collect();
        for (&(s, _), acc) in tasks.iter().zip(&results) {
            for (m, a) in merged[s].iter_mut().zip(acc) {
                m.merge(a);
            }
        }
        Ok(xs
            .iter()
            .enumerate()
            .map(|(i, &x)| self.assemble(i, x, &merged, mc.samples))
            .collect())
    }

    /// Accumulators for one block: per level, the combined stratum value
    /// followed by one entry per censoring count.
    fn block(&self, s: &PlanStratum, block: u64, xs: &[f64], mc: &MCConfig) -> Vec<Welford> {
        let width = s.split.len() + 1;
        let mut acc = vec![Welford::default(); xs.len() * width];
        let range = block_range(block, mc.samples);
        let stream = rng::stream_id(self.tag, s.j as u64, 0);
        let mut g = rng::positioned(mc.seed, stream, range.start, self.draws(s.j));
        let mut d = Draw {
            sum_rest: 0.0,
            max_rest: 0.0,
            last: 0.0,
            prefix: Vec::with_capacity(s.j + 1),
        };
        for _ in range {
            self.sample(s.j, &mut g, &mut d);
            for (i, &x) in xs.iter().enumerate() {
                let row = &mut acc[i * width..(i + 1) * width];
                let mut combined = 0.0;
                for (c, &f) in s.split.iter().enumerate() {
                    let z = self.smoothed(s.j, c, x, &d);
                    combined += f * z;
                    row[c + 1].push(z);
                }
                row[0].push(combined);
            }
        }
        acc
    }

    fn assemble(&self, i: usize, x: f64, merged: &[Vec<Welford>], samples: u64) -> Estimate {
        let mut strata = Vec::with_capacity(self.strata.len());
        let mut censored = Vec::new();
        for (s, acc) in self.strata.iter().zip(merged) {
            let width = s.split.len() + 1;
            let row = &acc[i * width..(i + 1) * width];
            strata.push(Stratum {
                j: s.j,
                weight: s.weight,
                cond_p: row[0].mean(),
                cond_se: row[0].std_err(),
            });
            if self.cap.is_some() {
                for (c, &f) in s.split.iter().enumerate() {
                    censored.push(SubStratum {
                        j: s.j,
                        c,
                        weight: s.weight * f,
                        cond_p: row[c + 1].mean(),
                        cond_se: row[c + 1].std_err(),
                    });
                }
            }
        }
        let p_hat = strata.iter().map(|s| s.weight * s.cond_p).sum();
        let var: f64 = strata.iter().map(|s| (s.weight * s.cond_se).powi(2)).sum();
        Estimate {
            method: Method::Stratified,
            x,
            p_hat,
            std_err: var.sqrt(),
            samples,
            y: Some(self.y),
            strata,
            censored,
            bias_bound: self.bias_bound,
        }
    }
}

#[cfg(test)]
mod tests;
