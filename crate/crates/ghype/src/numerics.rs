//! Shared numerical kernels: log-gamma based combinatorics, regularized
//! incomplete beta/gamma functions, adaptive quadrature on the unit interval,
//! a one-sample Kolmogorov-Smirnov test, and sample skewness.
//!
//! Everything here is pure and reentrant.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failed to converge: error estimate {error:.3e} after {subdivisions} subdivisions")]
    NonConvergence { error: f64, subdivisions: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("empty sample")]
    EmptySample,
}

/// Controls the adaptive quadrature used to evaluate likelihood integrals.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 2048,
        }
    }
}

impl QuadratureConfig {
    fn validate(&self) -> Result<(), NumericsError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(NumericsError::Domain(
                "quadrature tolerances must be strictly positive".into(),
            ));
        }
        if self.max_subdivisions < 1 {
            return Err(NumericsError::Domain(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin();
        std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// log C(n, k) for real n ≥ 0 and 0 ≤ k ≤ n, via log-gamma.
///
/// Fitted capacity matrices are generally non-integer, so the binomial
/// coefficient is taken in its gamma-function form.
pub fn log_binomial(n: f64, k: f64) -> Result<f64, NumericsError> {
    if !n.is_finite() || !k.is_finite() || n < 0.0 || k < 0.0 || k > n {
        return Err(NumericsError::Domain(format!(
            "log_binomial requires 0 <= k <= n, got n={n}, k={k}"
        )));
    }
    if k == 0.0 || k == n {
        return Ok(0.0);
    }
    Ok(ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0))
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta function I_x(a, b).
///
/// Continued-fraction evaluation (modified Lentz), with the symmetry
/// I_x(a,b) = 1 − I_{1−x}(b,a) applied where the fraction converges faster.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64, NumericsError> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(NumericsError::Domain(format!(
            "reg_inc_beta requires a > 0 and b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(NumericsError::Domain(format!(
            "reg_inc_beta requires x in [0,1], got x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - beta_cf(1.0 - x, b, a)?)
    } else {
        beta_cf(x, a, b)
    }
}

/// Survival of the regularized incomplete beta, 1 - I_x(a, b), evaluated as
/// I_{1-x}(b, a) so far tails keep full precision instead of cancelling.
pub fn reg_inc_beta_sf(x: f64, a: f64, b: f64) -> Result<f64, NumericsError> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(NumericsError::Domain(format!(
            "reg_inc_beta_sf requires a > 0 and b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(NumericsError::Domain(format!(
            "reg_inc_beta_sf requires x in [0,1], got x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        beta_cf(1.0 - x, b, a)
    } else {
        Ok(1.0 - beta_cf(x, a, b)?)
    }
}

// I_x(a,b) = x^a (1-x)^b / (a B(a,b)) * 1/cf, cf by modified Lentz.
fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64, NumericsError> {
    const MAX_ITER: usize = 600;
    const TINY: f64 = 1e-300;
    let ln_prefix = a * x.ln() + b * (1.0 - x).ln_1p_safe() - ln_beta(a, b);
    let prefix = ln_prefix.exp() / a;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut f = d;
    for m in 1..=MAX_ITER {
        let fm = m as f64;
        let m2 = 2.0 * fm;
        let aa = fm * (b - fm) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        f *= d * c;
        let aa = -(a + fm) * (qab + fm) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        f *= delta;
        if (delta - 1.0).abs() < 1e-15 {
            return Ok((prefix * f).clamp(0.0, 1.0));
        }
    }
    Err(NumericsError::NonConvergence {
        error: f64::NAN,
        subdivisions: MAX_ITER,
    })
}

// (1-x).ln() written as ln_1p(-x) keeps precision for x near 0.
trait Ln1pSafe {
    fn ln_1p_safe(self) -> f64;
}
impl Ln1pSafe for f64 {
    fn ln_1p_safe(self) -> f64 {
        // self is (1 - x); recover ln(1-x) via ln_1p(-x)
        (self - 1.0).ln_1p()
    }
}

/// ln(1 − e^w) for w < 0, stable across the whole range.
pub(crate) fn ln_one_minus_exp(w: f64) -> f64 {
    debug_assert!(w <= 0.0);
    if w > -std::f64::consts::LN_2 {
        (-w.exp_m1()).ln()
    } else {
        (-w.exp()).ln_1p()
    }
}

// Regularized lower incomplete gamma P(a, x), series for x < a+1, continued
// fraction for the complement otherwise.
fn gamma_p(a: f64, x: f64) -> Result<f64, NumericsError> {
    if x < 0.0 || a <= 0.0 {
        return Err(NumericsError::Domain(format!(
            "incomplete gamma requires a > 0 and x >= 0, got a={a}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        // series
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..2000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-16 {
                return Ok(sum * (a * x.ln() - x - ln_gamma(a)).exp());
            }
        }
        Err(NumericsError::NonConvergence {
            error: del.abs(),
            subdivisions: 2000,
        })
    } else {
        Ok(1.0 - gamma_q_cf(a, x)?)
    }
}

fn gamma_q_cf(a: f64, x: f64) -> Result<f64, NumericsError> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=2000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h * (a * x.ln() - x - ln_gamma(a)).exp());
        }
    }
    Err(NumericsError::NonConvergence {
        error: f64::NAN,
        subdivisions: 500,
    })
}

/// Survival function of the chi-squared distribution with `nu` degrees of
/// freedom: Pr(X >= x). The upper tail goes through the continued fraction
/// directly so tiny survival probabilities keep full precision.
pub fn chi2_sf(x: f64, nu: u32) -> Result<f64, NumericsError> {
    if nu < 1 {
        return Err(NumericsError::Domain("chi2_sf requires nu >= 1".into()));
    }
    if !(x >= 0.0) {
        return Err(NumericsError::Domain(format!(
            "chi2_sf requires x >= 0, got {x}"
        )));
    }
    let a = nu as f64 / 2.0;
    let t = x / 2.0;
    if t == 0.0 {
        return Ok(1.0);
    }
    if t < a + 1.0 {
        Ok((1.0 - gamma_p(a, t)?).clamp(0.0, 1.0))
    } else {
        Ok(gamma_q_cf(a, t)?.clamp(0.0, 1.0))
    }
}

pub(crate) fn chi2_cdf(x: f64, nu: u32) -> Result<f64, NumericsError> {
    Ok(1.0 - chi2_sf(x, nu)?)
}

pub(crate) fn chi2_pdf(x: f64, nu: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = nu as f64 / 2.0;
    ((a - 1.0) * x.ln() - x / 2.0 - a * std::f64::consts::LN_2 - ln_gamma(a)).exp()
}

/// Density of a Beta(a, b) variable rescaled to [0, scale].
pub(crate) fn scaled_beta_pdf(x: f64, a: f64, b: f64, scale: f64) -> f64 {
    if x <= 0.0 || x >= scale {
        return 0.0;
    }
    let u = x / scale;
    ((a - 1.0) * u.ln() + (b - 1.0) * (-u).ln_1p() - ln_beta(a, b)).exp() / scale
}

// Inverse of a monotone nondecreasing CDF by bisection over [lo, hi].
pub(crate) fn invert_cdf(cdf: impl Fn(f64) -> f64, p: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

// --- adaptive quadrature -------------------------------------------------

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights at the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_27,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    integral: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, NumericsError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(NumericsError::Domain(format!(
            "integrand is not finite at {c}"
        )));
    }
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, &xg) in XGK.iter().enumerate().take(7) {
        let dx = h * xg;
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(NumericsError::Domain(format!(
                "integrand is not finite near {c}"
            )));
        }
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Panel {
        a,
        b,
        integral: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    })
}

/// Adaptive Gauss-Kronrod integral of `f` over (0, 1).
///
/// The rule never evaluates the endpoints, so integrable endpoint
/// singularities are tolerated. Deterministic for a fixed configuration.
pub fn integrate_unit_interval<F: Fn(f64) -> f64>(
    f: F,
    cfg: &QuadratureConfig,
) -> Result<f64, NumericsError> {
    integrate_unit_with_breakpoints(f, &[], cfg)
}

/// Same as [`integrate_unit_interval`] but with initial subdivision points,
/// used when the caller already knows where the integrand concentrates.
pub fn integrate_unit_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64, NumericsError> {
    cfg.validate()?;
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    let mut panels = Vec::with_capacity(64);
    for w in cuts.windows(2) {
        panels.push(gk15(&f, w[0], w[1])?);
    }
    let mut subdivisions = panels.len().saturating_sub(1);
    loop {
        let total: f64 = panels.iter().map(|p| p.integral).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= tol {
            return Ok(total);
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(NumericsError::NonConvergence {
                error: err,
                subdivisions,
            });
        }
        // split the panel with the largest error estimate
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.partial_cmp(&b.1.error).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval no longer splittable in f64; accept what we have
            return Ok(total);
        }
        panels[worst] = gk15(&f, a, mid)?;
        panels.push(gk15(&f, mid, b)?);
        subdivisions += 1;
    }
}

// --- Kolmogorov-Smirnov --------------------------------------------------

/// Result of a one-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Serialize)]
pub struct KsReport {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Two-sided one-sample KS test of `samples` against the continuous CDF `cdf`.
///
/// The p-value is the asymptotic Kolmogorov distribution evaluated at
/// sqrt(n) * D (series truncated at 100 terms).
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsReport, NumericsError> {
    if samples.is_empty() {
        return Err(NumericsError::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let fx = cdf(x);
        if !fx.is_finite() {
            return Err(NumericsError::Domain(format!(
                "cdf not finite at sample value {x}"
            )));
        }
        d = d.max(fx - i as f64 / nf).max((i + 1) as f64 / nf - fx);
    }
    Ok(KsReport {
        statistic: d,
        p_value: kolmogorov_sf(nf.sqrt() * d),
        n,
    })
}

// Survival function of the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // theta-function form converges quickly for small arguments
        let mut s = 0.0;
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        for k in 1..=100u32 {
            let q = (2 * k - 1) as f64;
            s += (-q * q * c).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100u32 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Fisher-Pearson moment coefficient of skewness, m3 / m2^(3/2).
///
/// This is the plain (bias-uncorrected) estimator; the convention is recorded
/// in report metadata since published skewness figures rarely name theirs.
pub fn sample_skewness(values: &[f64]) -> Result<f64, NumericsError> {
    if values.len() < 3 {
        return Err(NumericsError::Degenerate(format!(
            "skewness needs at least 3 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    if m2 <= 0.0 {
        return Err(NumericsError::Degenerate(
            "skewness undefined for a constant sequence".into(),
        ));
    }
    Ok(m3 / m2.powf(1.5))
}

/// Mean and unbiased sample variance.
pub fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}
