//! Large-deviation approximations of `P(Y_n > x)` for `Y_n = Σ min(xi_j, M)`.
//!
//! Three regimes:
//!
//! * below the threshold, `H_n(x) = Φ̄(x / √n) + n V(x) 1{x > √n}`;
//! * near a multiple `kM`, `(Π_n^k / k!) H_n(x - kM)` with `Π_n = n V(M)`;
//! * strictly between multiples, `(Π_n^k / k!) Σ_j C(k, j) W_{k-j}(x/M - j)`.
//!
//! [`Approximator`] owns a walk, the regime bands and quadrature settings and
//! dispatches between the three.

mod wfunc;

use std::fmt;

use serde::{Serialize, Serializer};

use crate::distributions::JumpModel;
use crate::error::{Error, Result};
use crate::special::{normal_tail, QuadratureSettings};

pub use wfunc::{w, w1_closed, w2_closed, w_direct, WFamily, CHEBYSHEV_NODES, MAX_ORDER};

/// Default cap on the number of censored jumps handled by the dispatcher.
pub const DEFAULT_K_MAX: usize = 6;

/// Ratio `M / s_n` below which the walk is flagged as not softly censored.
pub const SOFT_CENSORING_RATIO: f64 = 3.0;

/// `s_n = ((alpha - 2) n ln n)^(1/2)`.
pub fn s_n(alpha: f64, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("s_n needs n >= 2, got {n}")));
    }
    if !(alpha > 2.0) {
        return Err(Error::domain(format!("s_n needs alpha > 2, got {alpha}")));
    }
    let n = n as f64;
    Ok(((alpha - 2.0) * n * n.ln()).sqrt())
}

/// The two addends of `H_n(z)`: `(Φ̄(z / √n), n V(z) 1{z > √n})`.
pub fn capital_h_parts(n: u64, z: f64, model: &JumpModel) -> (f64, f64) {
    let root = (n as f64).sqrt();
    let gaussian = normal_tail(z / root);
    let jump = if z > root {
        n as f64 * model.tail_v(z)
    } else {
        0.0
    };
    (gaussian, jump)
}

/// `H_n(z) = Φ̄(z n^(-1/2)) + n V(z) 1{z > n^(1/2)}`.
pub fn capital_h(n: u64, z: f64, model: &JumpModel) -> f64 {
    let (g, j) = capital_h_parts(n, z, model);
    g + j
}

/// `k!` as an exact integer product, then converted.
pub fn factorial(k: usize) -> f64 {
    (1..=k as u128).product::<u128>() as f64
}

/// `C(k, j)` in exact integer arithmetic.
pub fn binomial(k: usize, j: usize) -> f64 {
    if j > k {
        return 0.0;
    }
    let j = j.min(k - j) as u128;
    let mut c: u128 = 1;
    for i in 0..j {
        c = c * (k as u128 - i) / (i + 1);
    }
    c as f64
}

/// Number of summands, censoring level and jump law, with derived scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkConfig {
    pub n: u64,
    #[serde(rename = "M")]
    pub m: f64,
    pub model: JumpModel,
    pub s_n: f64,
    pub pi_n: f64,
    /// `M / s_n`.
    pub censoring_ratio: f64,
    /// Set when `M / s_n < 3`.
    pub soft_censoring_warning: bool,
}

impl WalkConfig {
    pub fn new(n: u64, m: f64, model: JumpModel) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("n must be an integer >= 2, got {n}")));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::domain(format!(
                "M must be positive and finite, got {m}"
            )));
        }
        let s = s_n(model.alpha(), n)?;
        let pi_n = n as f64 * model.tail_v(m);
        if !(pi_n > 0.0 && pi_n < 1.0) {
            return Err(Error::HardRegime { pi_n });
        }
        let ratio = m / s;
        Ok(Self {
            n,
            m,
            model,
            s_n: s,
            pi_n,
            censoring_ratio: ratio,
            soft_censoring_warning: ratio < SOFT_CENSORING_RATIO,
        })
    }

    /// Config with `M = ratio * s_n`.
    pub fn with_ratio(n: u64, ratio: f64, model: JumpModel) -> Result<Self> {
        let s = s_n(model.alpha(), n)?;
        Self::new(n, ratio * s, model)
    }

    pub fn alpha(&self) -> f64 {
        self.model.alpha()
    }

    /// `Π_n^k / k!`.
    pub fn censoring_weight(&self, k: usize) -> f64 {
        self.pi_n.powi(k as i32) / factorial(k)
    }
}

/// Regime boundaries: band half-widths `eps`, `h`, the slack `d` of the
/// single-jump range, the Gaussian cut `c s_n` and the largest order `k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bands {
    pub eps: f64,
    pub h: f64,
    pub d: f64,
    pub c: f64,
    pub k_max: usize,
}

impl Bands {
    pub fn new(eps: f64, h: f64, d: f64, c: f64, k_max: usize) -> Result<Self> {
        let b = Self {
            eps,
            h,
            d,
            c,
            k_max,
        };
        b.validate()?;
        Ok(b)
    }

    /// `h = min(4 s_n / M, 1/8)`, `eps = 2h`, `d = 4 (n ln n)^(1/2)`, `c = 1.2`.
    pub fn defaults(config: &WalkConfig) -> Self {
        let h = (4.0 * config.s_n / config.m).min(0.125);
        let n = config.n as f64;
        Self {
            eps: 2.0 * h,
            h,
            d: 4.0 * (n * n.ln()).sqrt(),
            c: 1.2,
            k_max: DEFAULT_K_MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h <= self.eps && self.eps <= 0.5) {
            return Err(Error::domain(format!(
                "bands need 0 < h <= eps <= 1/2, got h = {}, eps = {}",
                self.h, self.eps
            )));
        }
        if !(self.d >= 0.0) || !(self.c > 0.0) || self.k_max == 0 || self.k_max > MAX_ORDER {
            return Err(Error::domain(format!(
                "bands need d >= 0, c > 0 and 1 <= k_max <= {MAX_ORDER}"
            )));
        }
        Ok(())
    }
}

/// Which formula applies at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeKind {
    Gaussian,
    BelowThreshold,
    NearMultiple(usize),
    Interior(usize),
}

impl RegimeKind {
    /// Number of censored jumps the regime describes.
    pub fn k(&self) -> usize {
        match *self {
            RegimeKind::Gaussian | RegimeKind::BelowThreshold => 0,
            RegimeKind::NearMultiple(k) | RegimeKind::Interior(k) => k,
        }
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeKind::Gaussian => write!(f, "Gaussian"),
            RegimeKind::BelowThreshold => write!(f, "BelowThreshold"),
            RegimeKind::NearMultiple(k) => write!(f, "NearMultiple({k})"),
            RegimeKind::Interior(k) => write!(f, "Interior({k})"),
        }
    }
}

impl Serialize for RegimeKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Regime tag with the band widths used to decide it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub eps: f64,
    pub h: f64,
}

/// A labelled addend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub value: f64,
}

impl Term {
    fn new(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            value,
        }
    }
}

/// Value of one formula: `value` is the sum of `terms`; `diagnostics` carry the
/// competing formula inside overlap bands and are not part of `value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximation {
    pub value: f64,
    pub regime: Regime,
    pub k: usize,
    pub terms: Vec<Term>,
    pub diagnostics: Vec<Term>,
}

impl Approximation {
    fn from_terms(regime: Regime, k: usize, terms: Vec<Term>) -> Self {
        let value = terms.iter().map(|t| t.value).sum();
        Self {
            value,
            regime,
            k,
            terms,
            diagnostics: Vec::new(),
        }
    }
}

/// Formula evaluator for one walk.
#[derive(Debug, Clone)]
pub struct Approximator {
    config: WalkConfig,
    bands: Bands,
    settings: QuadratureSettings,
}

impl Approximator {
    /// Evaluator with default bands and quadrature settings.
    pub fn new(config: WalkConfig) -> Self {
        Self {
            bands: Bands::defaults(&config),
            config,
            settings: QuadratureSettings::default(),
        }
    }

    pub fn with_bands(mut self, bands: Bands) -> Result<Self> {
        bands.validate()?;
        self.bands = bands;
        Ok(self)
    }

    pub fn with_quadrature(mut self, settings: QuadratureSettings) -> Result<Self> {
        settings.validate()?;
        self.settings = settings;
        Ok(self)
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    pub fn bands(&self) -> &Bands {
        &self.bands
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    fn regime(&self, kind: RegimeKind) -> Regime {
        Regime {
            kind,
            eps: self.bands.eps,
            h: self.bands.h,
        }
    }

    fn check_x(x: f64) -> Result<()> {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("x must be positive, got {x}")))
        }
    }

    /// Partition of `(0, (k_max + 1/2) M)`.
    ///
    /// Below `min((1 - eps) M, M - d)` the walk is Gaussian up to `c s_n` and
    /// single-jump above; the closed bands `|x/M - k| <= eps` are near-multiple;
    /// everything else is `Interior(ceil(x / M))`.
    pub fn classify(&self, x: f64) -> Result<Regime> {
        Self::check_x(x)?;
        let (m, b) = (self.config.m, &self.bands);
        let r = x / m;
        if r >= b.k_max as f64 + 0.5 {
            return Err(Error::range(format!(
                "x / M = {r} is beyond k_max + 1/2 = {}",
                b.k_max as f64 + 0.5
            )));
        }
        if x <= (1.0 - b.eps) * m && x <= m - b.d {
            let kind = if x <= b.c * self.config.s_n {
                RegimeKind::Gaussian
            } else {
                RegimeKind::BelowThreshold
            };
            return Ok(self.regime(kind));
        }
        let nearest = r.round();
        if nearest >= 1.0 && (r - nearest).abs() <= b.eps {
            return Ok(self.regime(RegimeKind::NearMultiple(nearest as usize)));
        }
        Ok(self.regime(RegimeKind::Interior(r.ceil() as usize)))
    }

    fn below_terms(&self, x: f64) -> Vec<Term> {
        let (g, j) = capital_h_parts(self.config.n, x, &self.config.model);
        vec![Term::new("gaussian", g), Term::new("single_jump", j)]
    }

    /// `H_n(x)` for `0 < x <= M - d`.
    pub fn below(&self, x: f64) -> Result<Approximation> {
        Self::check_x(x)?;
        let limit = self.config.m - self.bands.d;
        if x > limit {
            return Err(Error::range(format!(
                "x = {x} exceeds M - d = {limit}, outside the single-jump range"
            )));
        }
        let kind = if x <= self.bands.c * self.config.s_n {
            RegimeKind::Gaussian
        } else {
            RegimeKind::BelowThreshold
        };
        Ok(Approximation::from_terms(
            self.regime(kind),
            0,
            self.below_terms(x),
        ))
    }

    /// `(Π_n^k / k!) H_n(x - kM)` for `|x/M - k| <= eps`.
    pub fn near_multiple(&self, k: usize, x: f64) -> Result<Approximation> {
        Self::check_x(x)?;
        if k == 0 {
            return Err(Error::domain("near-multiple order k must be >= 1"));
        }
        let c = &self.config;
        let r = x / c.m;
        if (r - k as f64).abs() > self.bands.eps {
            return Err(Error::range(format!(
                "|x/M - {k}| = {} exceeds eps = {}",
                (r - k as f64).abs(),
                self.bands.eps
            )));
        }
        let scale = c.censoring_weight(k);
        let (g, j) = capital_h_parts(c.n, x - k as f64 * c.m, &c.model);
        let terms = vec![
            Term::new("gaussian", scale * g),
            Term::new("single_jump", scale * j),
        ];
        Ok(Approximation::from_terms(
            self.regime(RegimeKind::NearMultiple(k)),
            k,
            terms,
        ))
    }

    /// `(Π_n^k / k!) Σ_{j=0}^{k} C(k, j) W_{k-j}(x/M - j)` for
    /// `k - 1 + h <= x/M <= k - h` (`h <= x/M <= 1 - h` when `k = 1`).
    pub fn interior(&self, k: usize, x: f64) -> Result<Approximation> {
        Self::check_x(x)?;
        if k == 0 {
            return Err(Error::domain("interior order k must be >= 1"));
        }
        let c = &self.config;
        let h = self.bands.h;
        let r = x / c.m;
        let kf = k as f64;
        let lo = if k == 1 { h } else { kf - 1.0 + h };
        if !(r >= lo && r <= kf - h) {
            return Err(Error::range(format!(
                "x/M = {r} is outside the interior band [{lo}, {}]",
                kf - h
            )));
        }
        let family = WFamily::shared(c.alpha())?;
        let scale = c.censoring_weight(k);
        let mut terms = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let order = k - j;
            let arg = r - j as f64;
            // an argument at the right end of the domain is the empty simplex
            let wv = if order == 0 {
                1.0
            } else if arg >= order as f64 {
                0.0
            } else {
                family.eval(order, arg, &self.settings)?
            };
            terms.push(Term::new(format!("j={j}"), scale * binomial(k, j) * wv));
        }
        Ok(Approximation::from_terms(
            self.regime(RegimeKind::Interior(k)),
            k,
            terms,
        ))
    }

    /// Classify `x` and evaluate the matching formula.
    ///
    /// Inside an overlap band the competing interior formula is attached as a
    /// diagnostic. Between `M - d` and the first near-multiple band the value is
    /// still `H_n(x)`, with the `k = 1` interior formula as a diagnostic.
    pub fn auto(&self, x: f64) -> Result<Approximation> {
        let regime = self.classify(x)?;
        let r = x / self.config.m;
        let h = self.bands.h;
        match regime.kind {
            RegimeKind::Gaussian | RegimeKind::BelowThreshold => self.below(x),
            RegimeKind::NearMultiple(k) => {
                let mut a = self.near_multiple(k, x)?;
                let kf = k as f64;
                let lower_lo = if k == 1 { h } else { kf - 1.0 + h };
                if r >= lower_lo && r <= kf - h {
                    let alt = self.interior(k, x)?;
                    a.diagnostics
                        .push(Term::new(format!("interior_{k}"), alt.value));
                }
                if r >= kf + h && r <= kf + 1.0 - h {
                    let alt = self.interior(k + 1, x)?;
                    a.diagnostics
                        .push(Term::new(format!("interior_{}", k + 1), alt.value));
                }
                Ok(a)
            }
            RegimeKind::Interior(1) => {
                let mut a = Approximation::from_terms(regime, 1, self.below_terms(x));
                if r >= h && r <= 1.0 - h {
                    let alt = self.interior(1, x)?;
                    a.diagnostics.push(Term::new("interior_1", alt.value));
                }
                Ok(a)
            }
            RegimeKind::Interior(k) => self.interior(k, x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto3() -> JumpModel {
        JumpModel::standardized_pareto(3.0).unwrap()
    }

    fn desk() -> Approximator {
        Approximator::new(WalkConfig::new(10_000, 3000.0, pareto3()).unwrap())
    }

    #[test]
    fn s_n_examples() {
        // sqrt(1e4 ln 1e4) from 30-digit arithmetic
        let s = s_n(3.0, 10_000).unwrap();
        assert!((s - 303.485_425_877_029_27).abs() < 1e-9);
        assert!(s_n(3.0, 1).is_err());
        assert!(s_n(2.0 + 1e-12, 1000).unwrap() < 1e-4);
        assert!("2.718".parse::<u64>().is_err());
    }

    #[test]
    fn capital_h_examples() {
        let m = pareto3();
        for n in [2, 100, 10_000] {
            assert_eq!(capital_h(n, 0.0, &m), 0.5);
        }
        assert!((capital_h(10_000, -300.0, &m) - 0.998_650_101_968_369_9).abs() < 1e-14);
        let (g, j) = capital_h_parts(10_000, 1000.0, &m);
        assert!((g - 7.619_853_024_160_527e-24).abs() < 1e-36);
        // 1e4 (1.5 + 1000 sqrt(3/4))^(-3)
        let level: f64 = 1.5 + 1000.0 * 0.75f64.sqrt();
        assert!((j / (1e4 * level.powi(-3)) - 1.0).abs() < 1e-14);
        assert!((j - 1.5317e-5).abs() < 1e-8);
    }

    #[test]
    fn capital_h_single_jump_at_root_n() {
        let m = pareto3();
        let n = 10_000u64;
        let at = capital_h(n, 100.0, &m);
        let after = capital_h(n, 100.0f64.next_up(), &m);
        assert!((after - at - n as f64 * m.tail_v(100.0)).abs() < 1e-12);
        // continuous elsewhere
        for z in [-50.0, 20.0, 99.0, 101.0, 500.0] {
            let dz = 1e-7;
            assert!((capital_h(n, z + dz, &m) - capital_h(n, z, &m)).abs() < 1e-6);
        }
    }

    #[test]
    fn walk_config_diagnostics() {
        let c = WalkConfig::new(10_000, 3000.0, pareto3()).unwrap();
        assert!((c.censoring_ratio - 9.885).abs() < 1e-3);
        assert!(!c.soft_censoring_warning);
        assert!((c.pi_n - 5.6919e-7).abs() < 1e-10);
        let low = WalkConfig::new(10_000, 500.0, pareto3()).unwrap();
        assert!(low.soft_censoring_warning);
        assert!(matches!(
            WalkConfig::new(10_000, 10.0, pareto3()),
            Err(Error::HardRegime { .. })
        ));
        assert!(WalkConfig::new(1, 10.0, pareto3()).is_err());
        assert!(WalkConfig::new(100, -1.0, pareto3()).is_err());
    }

    #[test]
    fn default_bands() {
        let a = desk();
        let b = a.bands();
        assert_eq!(b.h, 0.125);
        assert_eq!(b.eps, 0.25);
        assert!((b.d - 4.0 * (1e4f64 * 1e4f64.ln()).sqrt()).abs() < 1e-9);
        let far = Approximator::new(WalkConfig::with_ratio(10_000, 100.0, pareto3()).unwrap());
        assert!((far.bands().h - 0.04).abs() < 1e-12);
        assert!(Bands::new(0.1, 0.2, 0.0, 1.2, 6).is_err());
        assert!(Bands::new(0.6, 0.2, 0.0, 1.2, 6).is_err());
    }

    #[test]
    fn classify_examples() {
        let c = WalkConfig::with_ratio(10_000, 10.0, pareto3()).unwrap();
        let a = Approximator::new(c)
            .with_bands(Bands::new(0.1, 0.05, 4.0 * (1e4f64 * 1e4f64.ln()).sqrt(), 1.2, 6).unwrap())
            .unwrap();
        let m = c.m;
        assert_eq!(
            a.classify(0.3 * m).unwrap().kind,
            RegimeKind::BelowThreshold
        );
        assert_eq!(a.classify(0.1 * m).unwrap().kind, RegimeKind::Gaussian);
        let b = Approximator::new(c)
            .with_bands(Bands::new(0.05, 0.05, 0.0, 1.2, 6).unwrap())
            .unwrap();
        assert_eq!(
            b.classify(1.04 * m).unwrap().kind,
            RegimeKind::NearMultiple(1)
        );
        assert_eq!(b.classify(1.5 * m).unwrap().kind, RegimeKind::Interior(2));
        assert!(matches!(b.classify(6.5 * m), Err(Error::Range(_))));
        assert!(matches!(b.classify(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn below_examples() {
        let a = desk();
        let s = a.config().s_n;
        let low = a.below(0.5 * s).unwrap();
        assert_eq!(low.regime.kind, RegimeKind::Gaussian);
        assert_eq!(
            low.value,
            normal_tail(0.5 * s / 100.0) + 1e4 * pareto3().tail_v(0.5 * s)
        );
        let x = 2.0 * s;
        let mid = a.below(x).unwrap();
        assert_eq!(mid.regime.kind, RegimeKind::BelowThreshold);
        let level = 1.5 + 0.75f64.sqrt() * x;
        assert!((mid.terms[1].value / (1e4 * level.powi(-3)) - 1.0).abs() < 1e-14);
        assert!((mid.terms[1].value - 6.8257e-5).abs() < 1e-8);
        assert!(mid.terms[1].value > 1e3 * mid.terms[0].value);
        assert!(matches!(a.below(2000.0), Err(Error::Range(_))));
    }

    #[test]
    fn near_multiple_examples() {
        let a = desk();
        let pi = a.config().pi_n;
        let at = a.near_multiple(1, 3000.0).unwrap();
        assert_eq!(at.value, pi * 0.5);
        assert!((at.value - 2.8459e-7).abs() < 1e-10);
        let left = a.near_multiple(1, (1.0 - 0.125) * 3000.0).unwrap();
        // Pi * normal_tail(-3.75)
        assert!((left.value / (pi * 0.999_911_582_714_799_2) - 1.0).abs() < 1e-12);
        let two = a.near_multiple(2, 6000.0).unwrap();
        assert!((two.value / (pi * pi / 4.0) - 1.0).abs() < 1e-15);
        assert!(matches!(a.near_multiple(1, 4000.0), Err(Error::Range(_))));
    }

    #[test]
    fn interior_examples() {
        let a = desk();
        let pi = a.config().pi_n;
        let mid = a.interior(2, 4500.0).unwrap();
        assert_eq!(mid.terms.len(), 3);
        // W_2(1.5) + 2 W_1(0.5) + 1 with W_1(0.5) = 7
        let expected = pi * pi / 2.0 * (6.231_392_556_035_926 + 15.0);
        assert!((mid.value / expected - 1.0).abs() < 1e-8);
        let edge = a.interior(2, (2.0 - 0.125) * 3000.0).unwrap();
        assert!(edge.terms[2].value / edge.value > 0.4);
        assert!(matches!(a.interior(2, 3100.0), Err(Error::Range(_))));
        assert!(matches!(a.interior(2, 5900.0), Err(Error::Range(_))));
        let one = a.interior(1, 1800.0).unwrap();
        assert!((one.value / (pi * 0.6f64.powi(-3)) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn auto_dispatch_and_diagnostics() {
        let a = desk();
        let interior = a.auto(4500.0).unwrap();
        assert_eq!(interior.regime.kind, RegimeKind::Interior(2));
        assert_eq!(interior.terms.len(), 3);
        // x/M = 11/6 is inside the near-multiple band and the interior band of k = 2
        let overlap = a.auto(5500.0).unwrap();
        assert_eq!(overlap.regime.kind, RegimeKind::NearMultiple(2));
        assert_eq!(overlap.diagnostics.len(), 1);
        assert_eq!(overlap.diagnostics[0].label, "interior_2");
        assert_eq!(
            overlap.diagnostics[0].value,
            a.interior(2, 5500.0).unwrap().value
        );
        let upper = a.auto(6500.0).unwrap();
        assert_eq!(upper.diagnostics[0].label, "interior_3");
        let gap = a.auto(2000.0).unwrap();
        assert_eq!(gap.regime.kind, RegimeKind::Interior(1));
        assert_eq!(gap.value, capital_h(10_000, 2000.0, &pareto3()));
        assert!(matches!(a.auto(20_000.0), Err(Error::Range(_))));
    }

    #[test]
    fn values_are_sums_of_terms() {
        let a = desk();
        for i in 1..120 {
            let x = i as f64 * 150.0;
            let r = a.auto(x).unwrap();
            let total: f64 = r.terms.iter().map(|t| t.value).sum();
            assert_eq!(total, r.value);
            assert!(r.value >= 0.0);
        }
    }

    #[test]
    fn transition_gap_shrinks_with_censoring_ratio() {
        // qualitative content of the overlap-zone merge: the worst mismatch over
        // both overlap bands decreases as M / s_n grows
        let mut prev = f64::INFINITY;
        for ratio in [10.0, 30.0, 100.0, 300.0] {
            let a = Approximator::new(WalkConfig::with_ratio(10_000, ratio, pareto3()).unwrap());
            let (m, h) = (a.config().m, a.bands().h);
            let mut worst = 0.0f64;
            for i in 0..=20 {
                let u = h * (1.0 + 1e-6 + i as f64 / 20.0 * (1.0 - 2e-6));
                let below = (2.0 - u) * m;
                let above = (2.0 + u) * m;
                let r1 =
                    a.near_multiple(2, below).unwrap().value / a.interior(2, below).unwrap().value;
                let r2 =
                    a.near_multiple(2, above).unwrap().value / a.interior(3, above).unwrap().value;
                worst = worst.max((r1 - 1.0).abs()).max((r2 - 1.0).abs());
            }
            assert!(worst < prev, "ratio {ratio}: {worst}");
            prev = worst;
        }
    }

    #[test]
    fn exact_combinatorics() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(6), 720.0);
        assert_eq!(factorial(20), 2_432_902_008_176_640_000.0);
        assert_eq!(binomial(6, 2), 15.0);
        assert_eq!(binomial(10_000, 3), 166_616_670_000.0);
        assert_eq!(binomial(3, 5), 0.0);
    }
}
