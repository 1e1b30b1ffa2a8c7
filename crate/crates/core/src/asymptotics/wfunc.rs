//! The functions `W_k(z) = alpha^k ∫_{D_k(z)} (t_1 ... t_k)^(-alpha-1) dt` over
//! `D_k(z) = {t in (0,1)^k : t_1 + ... + t_k > z}`, computed through
//!
//! ```text
//! W_0 = 1,   W_k(z) = alpha ∫_{z-k+1}^{1} W_{k-1}(z - t) t^(-alpha-1) dt,   z in (k-1, k).
//! ```
//!
//! `W_1` is integrated directly and `W_2` nests a direct `W_1`. From `k = 3` on,
//! the inner `W_{k-1}` is read from a barycentric Chebyshev interpolant built once
//! per `alpha`.
//!
//! Near its ends, `W_m(u)` for `m >= 2` grows like `(u - m + 1)^(m - 1 - alpha)` on
//! the left (logarithmically when `m - 1 = alpha`, bounded beyond) and behaves like
//! `alpha^m (m - u)^m / m!` on the right. The interpolant stores the part left
//! after dividing out both behaviours.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::special::{
    gen_incomplete_beta, try_integrate_adaptive, try_integrate_log, QuadratureSettings,
};

/// Chebyshev nodes per cached level.
pub const CHEBYSHEV_NODES: usize = 257;

/// Highest order with a cache slot.
pub const MAX_ORDER: usize = 16;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "alpha must be finite and > 2, got {alpha}"
        )))
    }
}

fn check_argument(k: usize, z: f64) -> Result<()> {
    let lo = k as f64 - 1.0;
    if k >= 1 && !(z > lo && z < k as f64) {
        return Err(Error::domain(format!(
            "W_{k} is defined on ({lo}, {k}), got z = {z}"
        )));
    }
    Ok(())
}

/// `W_1(z) = z^(-alpha) - 1` on `(0, 1)`.
pub fn w1_closed(z: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_argument(1, z)?;
    Ok(z.powf(-alpha) - 1.0)
}

fn closed_form_settings() -> QuadratureSettings {
    QuadratureSettings {
        abs_tol: f64::MIN_POSITIVE,
        rel_tol: 1e-14,
        max_subdivisions: 2000,
    }
}

/// `W_2(z) = 1 - (z-1)^(-alpha) + alpha z^(-2 alpha) B(1 - 1/z, 1/z; -alpha, 1 - alpha)` on `(1, 2)`.
pub fn w2_closed(z: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_argument(2, z)?;
    let b = gen_incomplete_beta(
        1.0 - 1.0 / z,
        1.0 / z,
        -alpha,
        1.0 - alpha,
        &closed_form_settings(),
    )?;
    Ok(1.0 - (z - 1.0).powf(-alpha) + alpha * z.powf(-2.0 * alpha) * b)
}

/// One step of the recursion for `W_k(k - w)`, with `inner(v, 1 - v)` evaluating
/// `W_{k-1}((k - 1) - v)` for `v in (0, 1)`.
///
/// Both `w` and `lo = 1 - w` are passed so neither is formed by cancellation.
/// With `t` the integration variable, the inner offset is `v = t - lo` and the
/// distance to the inner singular end is `1 - v = lo + 1 - t`. The integral is
/// split at the midpoint of `(lo, 1)`. For `lo <= 1/2` the halves are integrated
/// in `ln t` and in `ln(1 - v)`, which flattens the power-law ends; for a short
/// interval the halves are integrated in the offsets from each end.
fn recursion_step<F>(
    k: usize,
    w: f64,
    lo: f64,
    alpha: f64,
    settings: &QuadratureSettings,
    mut inner: F,
) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let power = -alpha - 1.0;
    let half = 0.5 * w;
    if k == 1 {
        let r = if lo <= 0.5 {
            try_integrate_log(|t| Ok(t.powf(power)), lo, 1.0, settings)?
        } else {
            try_integrate_adaptive(|e| Ok((1.0 - e).powf(power)), 0.0, w, settings)?
        };
        return Ok(alpha * r.value);
    }
    let (left, right) = if lo <= 0.5 {
        let mid = lo + half;
        let left = try_integrate_log(
            |t| Ok(inner(t - lo, (1.0 - t) + lo)? * t.powf(power)),
            lo,
            mid,
            settings,
        )?;
        let right = try_integrate_log(
            |d| {
                let t = (1.0 - d) + lo;
                Ok(inner(1.0 - d, d)? * t.powf(power))
            },
            lo,
            mid,
            settings,
        )?;
        (left, right)
    } else {
        let left = try_integrate_adaptive(
            |e| Ok(inner(e, 1.0 - e)? * (lo + e).powf(power)),
            0.0,
            half,
            settings,
        )?;
        let right = try_integrate_adaptive(
            |e| Ok(inner(w - e, lo + e)? * (1.0 - e).powf(power)),
            0.0,
            half,
            settings,
        )?;
        (left, right)
    };
    Ok(alpha * (left.value + right.value))
}

/// Offsets `(k - z, z - k + 1)` of `z` from both ends of `(k - 1, k)`.
fn offsets(k: usize, z: f64) -> (f64, f64) {
    (k as f64 - z, z - (k as f64 - 1.0))
}

fn direct_offset(
    k: usize,
    w: f64,
    lo: f64,
    alpha: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    if w <= 0.0 {
        return Ok(0.0);
    }
    let inner_settings = settings.tightened(0.1);
    recursion_step(k, w, lo, alpha, settings, |v, one_minus_v| {
        direct_offset(k - 1, v, one_minus_v, alpha, &inner_settings)
    })
}

/// `W_k(z)` by nested quadrature all the way down, without interpolation.
///
/// Cost grows geometrically with `k`; intended for `k <= 3` and for checking
/// the interpolated route.
pub fn w_direct(k: usize, z: f64, alpha: f64, settings: &QuadratureSettings) -> Result<f64> {
    check_alpha(alpha)?;
    if k == 0 {
        return Ok(1.0);
    }
    check_argument(k, z)?;
    let (w, lo) = offsets(k, z);
    direct_offset(k, w, lo, alpha, settings)
}

/// Barycentric interpolant on Chebyshev points of the first kind mapped to `(0, 1)`.
///
/// Node complements `1 - s_j` are kept separately so differences near `s = 1`
/// are formed without cancellation.
#[derive(Debug, Clone)]
struct Chebyshev {
    nodes: Vec<f64>,
    complements: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl Chebyshev {
    fn build<F>(n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        let theta = |j: usize| (2 * j + 1) as f64 * PI / (2 * n) as f64;
        let nodes: Vec<f64> = (0..n).map(|j| 0.5 * (1.0 + theta(j).cos())).collect();
        let complements: Vec<f64> = (0..n).map(|j| (0.5 * theta(j)).sin().powi(2)).collect();
        let weights = (0..n)
            .map(|j| {
                if j % 2 == 0 {
                    theta(j).sin()
                } else {
                    -theta(j).sin()
                }
            })
            .collect();
        let values = nodes
            .iter()
            .zip(&complements)
            .map(|(&s, &c)| f(s, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nodes,
            complements,
            weights,
            values,
        })
    }

    fn eval(&self, s: f64, one_minus_s: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..self.nodes.len() {
            let d = if s > 0.5 {
                self.complements[j] - one_minus_s
            } else {
                s - self.nodes[j]
            };
            if d == 0.0 {
                return self.values[j];
            }
            let c = self.weights[j] / d;
            num += c * self.values[j];
            den += c;
        }
        num / den
    }
}

/// Exponent of the stretched variable; smooths fractional powers at `w = 1`.
const STRETCH: f64 = 6.0;

/// Interpolated `W_m` for one order `m >= 2`.
///
/// With `w = m - u`, the stored function is `G(s) = W_m(m - w) (1 - w)^p / w^m`
/// in the stretched variable `1 - w = (1 - s)^6`. The exponent `p` is the
/// left-end growth order `alpha + 1 - m` when that is at least 1/4, one more
/// than it when it is smaller but positive, and 1 otherwise. The stretch
/// smooths the remaining fractional-power and log terms at `w = 1`.
#[derive(Debug, Clone)]
struct Level {
    order: usize,
    power: f64,
    regular: Chebyshev,
}

impl Level {
    fn power(alpha: f64, m: usize) -> f64 {
        let p = alpha + 1.0 - m as f64;
        if p >= 0.25 {
            p
        } else if p > 0.0 {
            p + 1.0
        } else {
            1.0
        }
    }

    /// `W_m(m - w)` given `w` and `1 - w`.
    fn eval_offset(&self, w: f64, one_minus_w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let c = one_minus_w.powf(1.0 / STRETCH);
        let g = self.regular.eval(1.0 - c, c);
        g * w.powi(self.order as i32) / one_minus_w.powf(self.power)
    }

    fn eval(&self, u: f64) -> f64 {
        let (w, lo) = offsets(self.order, u);
        self.eval_offset(w, lo)
    }
}

/// All orders of `W` for one tail index, with lazily built interpolation caches.
///
/// Each cache level is built once under its own [`OnceLock`]; afterwards the
/// family is read-only and can be shared between threads.
#[derive(Debug)]
pub struct WFamily {
    alpha: f64,
    levels: Vec<OnceLock<Result<Arc<Level>>>>,
}

impl WFamily {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            levels: (0..=MAX_ORDER).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Process-wide family for `alpha`, created on first use.
    pub fn shared(alpha: f64) -> Result<Arc<WFamily>> {
        static REGISTRY: OnceLock<Mutex<HashMap<u64, Arc<WFamily>>>> = OnceLock::new();
        check_alpha(alpha)?;
        let registry = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = registry.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(f) = map.get(&alpha.to_bits()) {
            return Ok(Arc::clone(f));
        }
        let f = Arc::new(WFamily::new(alpha)?);
        map.insert(alpha.to_bits(), Arc::clone(&f));
        Ok(f)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn build_settings() -> QuadratureSettings {
        QuadratureSettings {
            abs_tol: f64::MIN_POSITIVE,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }

    fn level(&self, m: usize) -> Result<Arc<Level>> {
        if !(2..=MAX_ORDER).contains(&m) {
            return Err(Error::domain(format!(
                "no interpolation cache for order {m} (supported 2..={MAX_ORDER})"
            )));
        }
        self.levels[m]
            .get_or_init(|| {
                let settings = Self::build_settings();
                let power = Level::power(self.alpha, m);
                let regular = Chebyshev::build(CHEBYSHEV_NODES, |_, c| {
                    let one_minus_w = c.powf(STRETCH);
                    let w = 1.0 - one_minus_w;
                    let value = self.eval_offset(m, w, one_minus_w, &settings)?;
                    Ok(value * one_minus_w.powf(power) / w.powi(m as i32))
                })?;
                Ok(Arc::new(Level {
                    order: m,
                    power,
                    regular,
                }))
            })
            .clone()
    }

    /// `W_k(k - w)` by one quadrature over the best available `W_{k-1}`.
    fn eval_offset(&self, k: usize, w: f64, lo: f64, settings: &QuadratureSettings) -> Result<f64> {
        let alpha = self.alpha;
        match k {
            0 => Ok(1.0),
            1 | 2 => direct_offset(k, w, lo, alpha, settings),
            _ => {
                let inner = self.level(k - 1)?;
                recursion_step(k, w, lo, alpha, settings, |v, one_minus_v| {
                    Ok(inner.eval_offset(v, one_minus_v))
                })
            }
        }
    }

    /// `W_k(z)` for `z in (k-1, k)`; `W_0 = 1` for every `z`.
    pub fn eval(&self, k: usize, z: f64, settings: &QuadratureSettings) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        if k > MAX_ORDER + 1 {
            return Err(Error::domain(format!(
                "order {k} exceeds {}",
                MAX_ORDER + 1
            )));
        }
        check_argument(k, z)?;
        let (w, lo) = offsets(k, z);
        self.eval_offset(k, w, lo, settings)
    }

    /// Interpolated `W_m(u)` from the cache of order `m >= 2`.
    pub fn interpolated(&self, m: usize, u: f64) -> Result<f64> {
        check_argument(m, u)?;
        Ok(self.level(m)?.eval(u))
    }
}

/// `W_k(z)`; `W_0 = 1` everywhere and `z in (k-1, k)` for `k >= 1`.
pub fn w(k: usize, z: f64, alpha: f64, settings: &QuadratureSettings) -> Result<f64> {
    WFamily::shared(alpha)?.eval(k, z, settings)
}
