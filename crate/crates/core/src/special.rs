//! Normal tail, generalized incomplete beta and adaptive Gauss–Kronrod quadrature.

use serde::Serialize;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal tail `1 - Phi(z)`.
pub fn normal_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_density(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Tolerances and subdivision budget for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let s = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 10 {
            return Err(Error::domain("max_subdivisions must be at least 10"));
        }
        Ok(())
    }

    /// Same budget with both tolerances scaled by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: (self.abs_tol * factor).max(f64::MIN_POSITIVE),
            rel_tol: (self.rel_tol * factor).max(4.0 * f64::EPSILON),
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Value, error estimate and work of one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
}

// 15-point Kronrod abscissae with the embedded 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    splittable: bool,
}

fn check(t: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("integrand is not finite at t = {t}")))
    }
}

fn gauss_kronrod<F>(f: &mut F, lo: f64, hi: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = check(center, f(center)?)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = check(center - dx, f(center - dx)?)?;
        let f2 = check(center + dx, f(center + dx)?)?;
        kronrod += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    let width_ok = half.abs() > 64.0 * f64::EPSILON * center.abs().max(f64::MIN_POSITIVE);
    Ok(Panel {
        lo,
        hi,
        value,
        error,
        splittable: width_ok,
    })
}

/// Globally adaptive bisection with a 15-point Kronrod rule per panel.
///
/// The error of a panel is `|K15 - G7|`. The worst panel is bisected until the
/// summed error drops below `max(abs_tol, rel_tol |value|)`; exhausting the
/// subdivision budget is a [`Error::Convergence`].
pub fn integrate_adaptive<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    settings: &QuadratureSettings,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_adaptive(|t| Ok(f(t)), lo, hi, settings)
}

/// [`integrate_adaptive`] for integrands that can fail.
pub fn try_integrate_adaptive<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    settings: &QuadratureSettings,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    settings.validate()?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!(
            "integration bounds must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mut panels = vec![gauss_kronrod(&mut f, lo, hi)?];
    let mut subdivisions = 0;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let tol = settings.abs_tol.max(settings.rel_tol * value.abs());
        if error <= tol {
            return Ok(QuadResult {
                value,
                error_estimate: error,
                subdivisions_used: subdivisions,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i);
        let Some(worst) = worst.filter(|_| subdivisions < settings.max_subdivisions) else {
            return Err(Error::Convergence {
                value,
                error_estimate: error,
                subdivisions,
            });
        };
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        panels.push(gauss_kronrod(&mut f, p.lo, mid)?);
        panels.push(gauss_kronrod(&mut f, mid, p.hi)?);
        subdivisions += 1;
    }
}

/// `∫_lo^hi f(t) dt` for `0 < lo < hi`, integrated in `s = ln t`.
///
/// Integrands dominated by a power `t^(-p)` become exponentials in `s`, which
/// the Kronrod rule resolves in a handful of panels.
pub fn try_integrate_log<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    settings: &QuadratureSettings,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0) {
        return Err(Error::domain("logarithmic substitution needs lo > 0"));
    }
    try_integrate_adaptive(
        |s| {
            let t = s.exp();
            Ok(f(t)? * t)
        },
        lo.ln(),
        hi.ln(),
        settings,
    )
}

/// Generalized incomplete beta `B(z1, z2; a, b) = ∫_{z1}^{z2} t^(a-1) (1-t)^(b-1) dt`.
///
/// Any real `a`, `b` are accepted; the integral is split at the midpoint and
/// each half is integrated in the logarithm of the distance to its endpoint.
pub fn gen_incomplete_beta(
    z1: f64,
    z2: f64,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if !(0.0 < z1 && z1 < z2 && z2 < 1.0) {
        return Err(Error::domain(format!(
            "incomplete beta needs 0 < z1 < z2 < 1, got z1 = {z1}, z2 = {z2}"
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("incomplete beta parameters must be finite"));
    }
    let mid = 0.5 * (z1 + z2);
    let settings = settings.tightened(0.5);
    // left half in s = ln t: integrand t^a (1-t)^(b-1)
    let left = try_integrate_adaptive(
        |s| {
            let t = s.exp();
            Ok(t.powf(a) * (1.0 - t).powf(b - 1.0))
        },
        z1.ln(),
        mid.ln(),
        &settings,
    )?;
    // right half in r = ln(1-t): integrand t^(a-1) (1-t)^b
    let right = try_integrate_adaptive(
        |r| {
            let u = r.exp();
            Ok((1.0 - u).powf(a - 1.0) * u.powf(b))
        },
        (1.0 - z2).ln(),
        (1.0 - mid).ln(),
        &settings,
    )?;
    Ok(left.value + right.value)
}
