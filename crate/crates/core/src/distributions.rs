//! Jump laws with regularly varying right tails.
//!
//! The reference family is the standardized Pareto law: if `P` is Pareto with
//! shape `alpha` and minimum 1, then `xi = (P - mu_P) / sigma_P` has mean 0,
//! variance 1 and exact right tail `V(t) = (mu_P + sigma_P t)^(-alpha)`.
//! All sampling goes through the inverse of that tail, so every draw consumes
//! exactly one uniform.

use std::fmt;
use std::str::FromStr;

use rand_core::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};

/// Slowly varying factor `L` in `V(t) = t^(-alpha) L(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SlowFactor {
    /// `L(t) = C`.
    Constant(f64),
    /// `L(t) = C (ln t)^beta` for `t >= e`, extended by the constant `C` below `e`.
    LogPower { c: f64, beta: f64 },
}

impl SlowFactor {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SlowFactor::Constant(c) => c,
            SlowFactor::LogPower { c, beta } => {
                if t >= std::f64::consts::E {
                    c * t.ln().powf(beta)
                } else {
                    c
                }
            }
        }
    }
}

/// Tail index and slowly varying factor of a regularly varying tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSpec {
    alpha: f64,
    slow: SlowFactor,
}

impl TailSpec {
    pub fn new(alpha: f64, slow: SlowFactor) -> Result<Self> {
        if !(alpha > 2.0) || !alpha.is_finite() {
            return Err(Error::domain(format!(
                "tail index alpha must be finite and > 2, got {alpha}"
            )));
        }
        let c = match slow {
            SlowFactor::Constant(c) => c,
            SlowFactor::LogPower { c, beta } => {
                if !beta.is_finite() {
                    return Err(Error::domain("log-power exponent must be finite"));
                }
                c
            }
        };
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::domain(format!(
                "slowly varying constant must be positive, got {c}"
            )));
        }
        Ok(Self { alpha, slow })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn slow_factor(&self) -> SlowFactor {
        self.slow
    }

    /// Left end of the range on which `t^(-alpha) L(t)` is nonincreasing.
    pub fn t_min(&self) -> f64 {
        match self.slow {
            SlowFactor::Constant(_) => 1.0,
            SlowFactor::LogPower { beta, .. } => (beta / self.alpha).max(1.0).exp(),
        }
    }

    /// `V(t)`, held constant below [`TailSpec::t_min`] and capped at 1.
    pub fn tail(&self, t: f64) -> f64 {
        let t = t.max(self.t_min());
        (t.powf(-self.alpha) * self.slow.eval(t)).min(1.0)
    }
}

/// Concrete jump families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum JumpKind {
    StandardizedPareto { alpha: f64 },
}

/// A zero-mean, unit-variance jump law with an exact sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpModel {
    kind: JumpKind,
    tail: TailSpec,
    mu: f64,
    sigma: f64,
    #[serde(skip)]
    neg_inv_alpha: f64,
}

/// Builds the standardized Pareto model `(P - mu_P) / sigma_P`.
pub fn make_standardized_pareto(alpha: f64) -> Result<JumpModel> {
    JumpModel::standardized_pareto(alpha)
}

impl JumpModel {
    pub fn standardized_pareto(alpha: f64) -> Result<Self> {
        if !(alpha > 2.0) || !alpha.is_finite() {
            return Err(Error::domain(format!(
                "alpha must be > 2 for a finite-variance Pareto jump, got {alpha}"
            )));
        }
        let mu = alpha / (alpha - 1.0);
        let sigma = (alpha / ((alpha - 1.0).powi(2) * (alpha - 2.0))).sqrt();
        let tail = TailSpec::new(alpha, SlowFactor::Constant(sigma.powf(-alpha)))?;
        Ok(Self {
            kind: JumpKind::StandardizedPareto { alpha },
            tail,
            mu,
            sigma,
            neg_inv_alpha: -1.0 / alpha,
        })
    }

    pub fn kind(&self) -> JumpKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.tail.alpha
    }

    /// Asymptotic tail representation `t^(-alpha) L` with `L -> sigma_P^(-alpha)`.
    pub fn tail_spec(&self) -> TailSpec {
        self.tail
    }

    /// Location `mu_P` of the underlying Pareto law.
    pub fn location(&self) -> f64 {
        self.mu
    }

    /// Scale `sigma_P` of the underlying Pareto law.
    pub fn scale(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn variance(&self) -> f64 {
        1.0
    }

    /// Smallest value in the support, `(1 - mu_P) / sigma_P`.
    pub fn support_min(&self) -> f64 {
        (1.0 - self.mu) / self.sigma
    }

    /// Exact right tail `P(xi > t)`.
    #[inline]
    pub fn tail_v(&self, t: f64) -> f64 {
        let level = self.mu + self.sigma * t;
        if level <= 1.0 {
            1.0
        } else {
            level.powf(-self.tail.alpha)
        }
    }

    /// Inverse of the tail: the `xi` with `P(xi > xi) = q`, for `q` in `(0, 1]`.
    #[inline]
    pub fn inverse_tail(&self, q: f64) -> f64 {
        self.xi_of_level(self.level_from_tail(q))
    }

    /// Pareto-scale level `q^(-1/alpha)`; `xi = (level - mu) / sigma`.
    #[inline]
    pub(crate) fn level_from_tail(&self, q: f64) -> f64 {
        q.powf(self.neg_inv_alpha)
    }

    #[inline]
    pub(crate) fn xi_of_level(&self, level: f64) -> f64 {
        (level - self.mu) / self.sigma
    }

    /// Draw from a uniform in `(0, 1)`: `xi = inverse_tail(u)`.
    ///
    /// `u = 0.5` and `alpha = 3` give `(2^(1/3) - 1.5) / sqrt(0.75)`.
    #[inline]
    pub fn sample_uniform(&self, u: f64) -> f64 {
        self.inverse_tail(u)
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_uniform(crate::simulation::rng::open_unit(rng.next_u64()))
    }

    /// `E(xi^2; xi > t)` in closed form.
    pub fn second_moment_above(&self, t: f64) -> f64 {
        let a = self.alpha();
        let (mu, sigma) = (self.mu, self.sigma);
        let p = (mu + sigma * t).max(1.0);
        // E((P - mu)^2; P > p) with E(P^k; P > p) = a p^(k-a) / (a-k)
        let raw = a * p.powf(2.0 - a) / (a - 2.0) - 2.0 * mu * a * p.powf(1.0 - a) / (a - 1.0)
            + mu * mu * p.powf(-a);
        raw / (sigma * sigma)
    }

    /// `E(xi^2; |xi| > t)` in closed form.
    pub fn truncated_second_moment(&self, t: f64) -> f64 {
        let t = t.abs();
        let left = if -t > self.support_min() {
            1.0 - self.second_moment_above(-t)
        } else {
            0.0
        };
        self.second_moment_above(t) + left
    }
}

impl fmt::Display for JumpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            JumpKind::StandardizedPareto { alpha } => write!(f, "pareto:alpha={alpha}"),
        }
    }
}

/// Parses `pareto:alpha=3.0`.
impl FromStr for JumpModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        match family.trim() {
            "pareto" => {
                let mut alpha = None;
                for kv in params.split(',').filter(|p| !p.trim().is_empty()) {
                    let (key, value) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::domain(format!("malformed jump parameter `{kv}`")))?;
                    let value: f64 = value.trim().parse().map_err(|_| {
                        Error::domain(format!("jump parameter `{key}` is not a number"))
                    })?;
                    match key.trim() {
                        "alpha" => alpha = Some(value),
                        other => {
                            return Err(Error::domain(format!(
                                "unknown pareto parameter `{other}`"
                            )))
                        }
                    }
                }
                let alpha =
                    alpha.ok_or_else(|| Error::domain("pareto jump requires alpha=<value>"))?;
                JumpModel::standardized_pareto(alpha)
            }
            other => Err(Error::domain(format!("unknown jump family `{other}`"))),
        }
    }
}

/// Which side of the threshold a conditioned draw lands on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Side {
    /// `xi > y`
    Above,
    /// `xi <= y`
    Below,
    /// `y < xi <= upper`; used for the uncensored large jumps of a censored walk.
    Between { upper: f64 },
}

/// Exact sampler for the law of `xi` conditioned on one side of a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedSampler {
    model: JumpModel,
    threshold: f64,
    side: Side,
    // tail probabilities bracketing the conditioned event: q in (q_lo, q_hi]
    q_lo: f64,
    q_hi: f64,
    upper: f64,
}

impl ConditionedSampler {
    pub fn new(model: JumpModel, threshold: f64, side: Side) -> Result<Self> {
        if threshold.is_nan() {
            return Err(Error::domain("conditioning threshold is NaN"));
        }
        let vy = model.tail_v(threshold);
        let (q_lo, q_hi, upper) = match side {
            Side::Above => (0.0, vy, f64::INFINITY),
            Side::Below => (vy, 1.0, threshold),
            Side::Between { upper } => {
                if !(upper > threshold) {
                    return Err(Error::domain(format!(
                        "band ({threshold}, {upper}] is empty"
                    )));
                }
                (model.tail_v(upper), vy, upper)
            }
        };
        if !(q_hi - q_lo > 0.0) {
            return Err(Error::domain(format!(
                "conditioning event {side:?} at y = {threshold} has probability 0"
            )));
        }
        Ok(Self {
            model,
            threshold,
            side,
            q_lo,
            q_hi,
            upper,
        })
    }

    pub fn model(&self) -> &JumpModel {
        &self.model
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Probability of the conditioning event.
    pub fn event_probability(&self) -> f64 {
        self.q_hi - self.q_lo
    }

    /// Draw from a uniform in `(0, 1)`.
    #[inline]
    pub fn sample_uniform(&self, u: f64) -> f64 {
        let q = self.q_lo + u * (self.q_hi - self.q_lo);
        let x = self.model.inverse_tail(q);
        // rounding can push the draw onto the wrong side of a boundary
        match self.side {
            Side::Above => {
                if x > self.threshold {
                    x
                } else {
                    self.threshold.next_up()
                }
            }
            Side::Below => x.min(self.threshold),
            Side::Between { .. } => {
                if x > self.threshold {
                    x.min(self.upper)
                } else {
                    self.threshold.next_up()
                }
            }
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_uniform(crate::simulation::rng::open_unit(rng.next_u64()))
    }

    /// Pareto-scale level of a draw from `u`, without the boundary repair of
    /// [`Self::sample_uniform`]. `exp(-ln q / alpha)` is cheaper than `powf`.
    #[inline]
    pub(crate) fn level_uniform(&self, u: f64) -> f64 {
        let q = self.q_lo + u * (self.q_hi - self.q_lo);
        (q.ln() * self.model.neg_inv_alpha).exp()
    }

    /// `P(xi > t | event)`.
    pub fn conditional_tail(&self, t: f64) -> f64 {
        let q = self.model.tail_v(t).clamp(self.q_lo, self.q_hi);
        (q - self.q_lo) / (self.q_hi - self.q_lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto3() -> JumpModel {
        make_standardized_pareto(3.0).unwrap()
    }

    #[test]
    fn standardization_constants() {
        let m = pareto3();
        assert!((m.location() - 1.5).abs() < 1e-15);
        assert!((m.scale() - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((m.scale() - 0.8660).abs() < 1e-4);
    }

    #[test]
    fn rejects_infinite_variance() {
        assert!(matches!(
            make_standardized_pareto(2.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            make_standardized_pareto(1.5),
            Err(Error::Domain(_))
        ));
        assert!(make_standardized_pareto(f64::NAN).is_err());
        assert!(TailSpec::new(2.0, SlowFactor::Constant(1.0)).is_err());
        assert!(TailSpec::new(3.0, SlowFactor::Constant(0.0)).is_err());
    }

    #[test]
    fn tail_values() {
        let m = pareto3();
        assert_eq!(m.tail_v(-10.0), 1.0);
        assert!((m.support_min() - (-0.5 / 0.75f64.sqrt())).abs() < 1e-15);
        assert!((m.tail_v(0.0) - (1.0f64 / 1.5).powi(3)).abs() < 1e-15);
        assert!((m.tail_v(0.0) - 0.2963).abs() < 1e-4);
        // (1.5 + 0.8660254 * 100)^-3
        let expect = (1.5 + 0.75f64.sqrt() * 100.0).powi(-3);
        assert!((m.tail_v(100.0) / expect - 1.0).abs() < 1e-14);
        assert!((m.tail_v(100.0) - 1.4624e-6).abs() < 1e-9);
    }

    #[test]
    fn tail_asymptotics() {
        let m = pareto3();
        let t = 1e4;
        let ratio = m.tail_v(t) / (m.scale().powi(-3) * t.powi(-3));
        assert!((ratio - 1.0).abs() < 0.01);
        let rv = m.tail_v(2e5) / m.tail_v(1e5);
        assert!((rv / 0.125 - 1.0).abs() < 0.005);
        assert!((m.tail_spec().tail(1e8) / m.tail_v(1e8) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tail_grid_is_monotone_probability() {
        for alpha in [2.1, 2.5, 3.0, 4.0, 7.5] {
            let m = make_standardized_pareto(alpha).unwrap();
            let mut prev = f64::INFINITY;
            for i in 0..1000 {
                let t = -5.0 + i as f64 * 0.05 + (i as f64).powi(3) * 1e-3;
                let v = m.tail_v(t);
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn log_power_slow_variation() {
        for beta in [-2.0, -1.0, 0.5, 2.0] {
            let spec = TailSpec::new(3.0, SlowFactor::LogPower { c: 1.0, beta }).unwrap();
            let l = spec.slow_factor();
            for lambda in [2.0f64, 10.0] {
                let r = l.eval(lambda * 1e6) / l.eval(1e6);
                let exact = (1.0 + lambda.ln() / 1e6f64.ln()).powf(beta);
                assert!(
                    (r / exact - 1.0).abs() < 1e-12,
                    "beta {beta} lambda {lambda}: {r}"
                );
                // the ratio approaches 1 only logarithmically
                let mut prev_gap = (r - 1.0).abs();
                for t in [1e12, 1e24, 1e48, 1e96] {
                    let gap = (l.eval(lambda * t) / l.eval(t) - 1.0).abs();
                    assert!(gap < prev_gap);
                    prev_gap = gap;
                }
                assert!(prev_gap < 0.05);
            }
            let mut prev = f64::INFINITY;
            for i in 0..1000 {
                let t = spec.t_min() * (1.0 + i as f64 * 0.37);
                let v = spec.tail(t);
                assert!(v <= prev && v >= 0.0);
                prev = v;
            }
        }
    }

    #[test]
    fn log_power_small_exponent_at_moderate_scale() {
        for beta in [-0.3, 0.3] {
            let l = SlowFactor::LogPower { c: 2.0, beta };
            for lambda in [2.0, 10.0] {
                let r = l.eval(lambda * 1e6) / l.eval(1e6);
                assert!((r - 1.0).abs() < 0.05, "beta {beta} lambda {lambda}: {r}");
            }
        }
    }

    #[test]
    fn inverse_cdf_examples() {
        let m = pareto3();
        let x = m.sample_uniform(0.5);
        let expect = (2f64.powf(1.0 / 3.0) - 1.5) / 0.75f64.sqrt();
        assert!((x - expect).abs() < 1e-14);
        assert!((x + 0.2772).abs() < 1e-3);
        // CDF(sample(u)) = 1 - u
        for u in [1e-9, 0.01, 0.3, 0.5, 0.77, 0.999] {
            let x = m.sample_uniform(u);
            assert!((m.tail_v(x) - u).abs() < 1e-12 * u.max(1e-3));
        }
        let near_one = m.sample_uniform(1.0 - 1e-12);
        assert!((near_one - m.support_min()).abs() < 1e-10);
    }

    #[test]
    fn conditioned_support() {
        let m = pareto3();
        // V(y) = 1e-6
        let y = m.inverse_tail(1e-6);
        let above = ConditionedSampler::new(m, y, Side::Above).unwrap();
        let below = ConditionedSampler::new(m, 0.0, Side::Below).unwrap();
        for i in 0..10_000 {
            let u = (i as f64 + 0.5) / 10_000.0;
            assert!(above.sample_uniform(u) > y);
            assert!(below.sample_uniform(u) <= 0.0);
        }
        assert!(above.sample_uniform(1.0 - 1e-17) > y);
        let band = ConditionedSampler::new(m, 10.0, Side::Between { upper: 20.0 }).unwrap();
        for u in [1e-12, 0.5, 1.0 - 1e-16] {
            let x = band.sample_uniform(u);
            assert!(x > 10.0 && x <= 20.0);
        }
    }

    #[test]
    fn conditioned_domain_errors() {
        let m = pareto3();
        assert!(matches!(
            ConditionedSampler::new(m, -100.0, Side::Below),
            Err(Error::Domain(_))
        ));
        assert!(ConditionedSampler::new(m, f64::INFINITY, Side::Above).is_err());
        assert!(ConditionedSampler::new(m, 5.0, Side::Between { upper: 5.0 }).is_err());
    }

    #[test]
    fn parse_jump_spec() {
        let m: JumpModel = "pareto:alpha=3.0".parse().unwrap();
        assert_eq!(m.alpha(), 3.0);
        assert_eq!(m.to_string(), "pareto:alpha=3");
        assert!("pareto:alpha=2".parse::<JumpModel>().is_err());
        assert!("pareto".parse::<JumpModel>().is_err());
        assert!("normal:alpha=3".parse::<JumpModel>().is_err());
        assert!("pareto:beta=3".parse::<JumpModel>().is_err());
    }

    #[test]
    fn second_moment_closed_form_matches_variance() {
        let m = pareto3();
        assert!((m.truncated_second_moment(0.0) - 1.0).abs() < 1e-12);
        let a = m.truncated_second_moment(100.0);
        let b = m.truncated_second_moment(1000.0);
        assert!(a > b && b > 0.0);
    }
}
