//! Likelihood-ratio tests for nested network hypotheses: the deviance
//! statistic, its Monte Carlo null distribution with per-replicate refits,
//! the moment-matched Beta approximation of that null, and the chi-squared
//! comparator it replaces.
//!
//! The deviance D = -2 log lambda of a nested pair is bounded: its image has
//! an upper limit M, so the null is approximated by a Beta distribution
//! rescaled to [0, M] whose parameters come from the first two sample
//! moments. The chi-squared approximation assumes independent observations
//! and is reported alongside for comparison.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Hypothesis, ModelError, ModelSpec, ModelSummary};
use crate::multigraph::MultiGraph;
use crate::numerics::{
    chi2_cdf, chi2_sf, ks_test, mean_variance, reg_inc_beta, reg_inc_beta_sf, KsReport,
    NumericsError, QuadratureConfig,
};
use crate::sampler::{replicate_seed, sample_graph, SamplerError};

#[derive(Debug, Error)]
pub enum TestError {
    #[error("alternative '{alt}' does not nest null '{null}' (order: regular, configuration, block, full)")]
    NonNested { null: String, alt: String },
    #[error("need at least 30 null samples, got {0}")]
    NotEnoughSamples(usize),
    #[error("null deviance samples have zero variance")]
    ZeroVariance,
    #[error("moments infeasible for a Beta on [0, {m_upper}]: mean {mean}, variance {variance}; the upper bound is underestimated")]
    InfeasibleMoments {
        mean: f64,
        variance: f64,
        m_upper: f64,
    },
    #[error("{dropped} of {total} replicates failed to refit (limit 1%)")]
    TooManyDropped { dropped: usize, total: usize },
    #[error("degenerate null distribution: {0}")]
    DegenerateNull(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Monte Carlo null distribution of the deviance, with its fitted Beta and
/// the chi-squared comparator's degrees of freedom.
#[derive(Debug, Clone)]
pub struct NullDistribution {
    samples: Vec<f64>,
    m_upper: f64,
    alpha: f64,
    beta: f64,
    nu: u32,
    seed: u64,
    dropped: usize,
    clamped: bool,
}

impl NullDistribution {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Upper limit M of the deviance image used by the Beta rescaling.
    pub fn m_upper(&self) -> f64 {
        self.m_upper
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Degrees of freedom of the chi-squared comparator.
    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Replicates dropped because a refit failed.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// Whether the bound M had to be raised to cover an observed sample.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// CDF of the fitted Beta on [0, M].
    pub fn beta_cdf(&self, d: f64) -> f64 {
        let x = (d / self.m_upper).clamp(0.0, 1.0);
        reg_inc_beta(x, self.alpha, self.beta).unwrap_or(f64::NAN)
    }
}

/// Likelihood-ratio statistic of a nested model pair on a graph: returns
/// (lambda, D) with lambda = L0 / sup(L0, La) and D = -2 log lambda, so D is
/// never negative.
pub fn lr_statistic(
    model0: &ModelSpec,
    model_a: &ModelSpec,
    g: &MultiGraph,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64), TestError> {
    let l0 = model0.log_likelihood(g, cfg)?;
    let la = model_a.log_likelihood(g, cfg)?;
    let log_lambda = l0 - l0.max(la);
    Ok((log_lambda.exp(), -2.0 * log_lambda))
}

/// Multinomial bound on the deviance image: M = 2m log(1/p_min), where p
/// are the null model's expected per-dyad edge probabilities over dyads with
/// positive capacity.
pub fn estimate_m_upper(
    null_model: &ModelSpec,
    _alt: &Hypothesis,
    g: &MultiGraph,
) -> Result<f64, TestError> {
    let m = g.m() as f64;
    let cfg = QuadratureConfig::default();
    let expected = null_model.expected_counts(m, &cfg)?;
    let layout = null_model.layout();
    let mut p_min = f64::INFINITY;
    for (i, j) in layout.dyads() {
        if null_model.xi(i, j) > 0.0 {
            let p = expected[layout.dense_index(i, j)] / m;
            if p > 0.0 {
                p_min = p_min.min(p);
            } else {
                return Err(TestError::DegenerateNull(format!(
                    "expected probability vanished at dyad ({i},{j})"
                )));
            }
        }
    }
    if !p_min.is_finite() {
        return Err(TestError::DegenerateNull(
            "no dyad carries capacity".into(),
        ));
    }
    let m_upper = 2.0 * m * (1.0 / p_min).ln();
    if !(m_upper > 1e-6 * m) {
        return Err(TestError::DegenerateNull(
            "deviance image collapses to a point (single reachable dyad)".into(),
        ));
    }
    Ok(m_upper)
}

/// Beta parameters on [0, M] by exact moment matching:
/// alpha = mu (mu (M - mu) - sigma^2) / (M sigma^2), beta = (M - mu) alpha / mu.
pub fn fit_beta_null(samples: &[f64], m_upper: f64) -> Result<(f64, f64), TestError> {
    if samples.is_empty() {
        return Err(TestError::NotEnoughSamples(0));
    }
    let (mean, variance) = mean_variance(samples);
    if variance <= 0.0 {
        return Err(TestError::ZeroVariance);
    }
    if !(mean > 0.0) || !(mean < m_upper) || variance >= mean * (m_upper - mean) {
        return Err(TestError::InfeasibleMoments {
            mean,
            variance,
            m_upper,
        });
    }
    let alpha = mean * (mean * (m_upper - mean) - variance) / (m_upper * variance);
    let beta = (m_upper - mean) * alpha / mean;
    Ok((alpha, beta))
}

/// Beta-null p-value: survival of the fitted scaled Beta at D, computed in
/// the tail-stable form.
pub fn p_value_beta(d: f64, nd: &NullDistribution) -> f64 {
    if d >= nd.m_upper {
        return 0.0;
    }
    let x = (d.max(0.0) / nd.m_upper).clamp(0.0, 1.0);
    reg_inc_beta_sf(x, nd.alpha, nd.beta).unwrap_or(f64::NAN)
}

/// Chi-squared comparator p-value: Pr(chi2(nu) >= D).
pub fn p_value_chi2(d: f64, nu: u32) -> Result<f64, TestError> {
    Ok(chi2_sf(d.max(0.0), nu)?)
}

/// Draw `count` replicates from the fitted null and return the refitted
/// deviance of each (dropping failed refits, with the drop count). This is
/// the raw material for [`null_distribution`] and for validation sweeps.
pub fn null_deviance_samples(
    g: &MultiGraph,
    null: &Hypothesis,
    alt: &Hypothesis,
    count: usize,
    master_seed: u64,
    cfg: &QuadratureConfig,
) -> Result<(Vec<f64>, usize), TestError> {
    let null_model = null.fit(g)?;
    let m = g.m();
    let replicate_d = |i: usize| -> Result<f64, TestError> {
        let rep = sample_graph(&null_model, m, replicate_seed(master_seed, i as u64))?;
        let m0 = null.fit(&rep)?;
        let ma = alt.fit(&rep)?;
        let (_, d) = lr_statistic(&m0, &ma, &rep, cfg)?;
        Ok(d)
    };
    let results: Vec<Result<f64, TestError>> =
        (0..count).into_par_iter().map(replicate_d).collect();
    let mut samples = Vec::with_capacity(count);
    let mut dropped = 0usize;
    for r in results {
        match r {
            Ok(d) => samples.push(d),
            Err(_) => dropped += 1,
        }
    }
    Ok((samples, dropped))
}

/// Build the Monte Carlo null distribution for a nested hypothesis pair on a
/// graph: fit the null, draw `s` replicates with the observed edge total,
/// refit both hypotheses on every replicate (the statistic is defined with
/// per-replicate maximum likelihood), and moment-match the Beta on [0, M].
pub fn null_distribution(
    g: &MultiGraph,
    null: &Hypothesis,
    alt: &Hypothesis,
    s: usize,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<NullDistribution, TestError> {
    if s < 30 {
        return Err(TestError::NotEnoughSamples(s));
    }
    let null_model = null.fit(g)?;
    let alt_model_obs = alt.fit(g)?;
    let (samples, dropped) = null_deviance_samples(g, null, alt, s, seed, cfg)?;
    if dropped * 100 > s {
        return Err(TestError::TooManyDropped { dropped, total: s });
    }
    let (_, variance) = mean_variance(&samples);
    if !(variance > 0.0) {
        return Err(TestError::ZeroVariance);
    }

    let mut m_upper = estimate_m_upper(&null_model, alt, g)?;
    let max_sample = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut clamped = false;
    if max_sample >= m_upper {
        // safety clamp; the bound is approximate for refitted statistics
        m_upper = 1.05 * max_sample;
        clamped = true;
    }
    let (alpha, beta) = fit_beta_null(&samples, m_upper)?;
    let nu_diff = alt_model_obs.degrees_of_freedom() - null_model.degrees_of_freedom();
    Ok(NullDistribution {
        samples,
        m_upper,
        alpha,
        beta,
        nu: nu_diff.max(1) as u32,
        seed,
        dropped,
        clamped,
    })
}

/// KS validation of a null distribution against its own fitted Beta and
/// against the chi-squared comparator. Returns (beta_fit, chi2_fit).
pub fn validate_null(nd: &NullDistribution) -> Result<(KsReport, KsReport), TestError> {
    if nd.samples.len() < 30 {
        return Err(TestError::NotEnoughSamples(nd.samples.len()));
    }
    let beta_fit = ks_test(&nd.samples, |x| nd.beta_cdf(x))?;
    let nu = nd.nu;
    let chi2_fit = ks_test(&nd.samples, |x| chi2_cdf(x.max(0.0), nu).unwrap_or(f64::NAN))?;
    Ok((beta_fit, chi2_fit))
}

/// Fixed metadata recorded with every report so results stay interpretable.
#[derive(Debug, Clone, Serialize)]
pub struct Convention {
    pub directedness: String,
    pub selfloops: bool,
    pub dof_rule: String,
}

impl Convention {
    pub fn for_graph(g: &MultiGraph) -> Self {
        Convention {
            directedness: if g.directed() {
                "directed".into()
            } else {
                "undirected".into()
            },
            selfloops: g.selfloops(),
            dof_rule: "capacity-params + distinct-propensities - 1".into(),
        }
    }
}

/// Full outcome of a likelihood-ratio test.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub command: String,
    pub lambda: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub p_beta: f64,
    pub p_chi2: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "M")]
    pub m_upper: f64,
    pub nu: u32,
    pub s: usize,
    pub seed: u64,
    pub dropped_replicates: usize,
    pub null_model: ModelSummary,
    pub alt_model: ModelSummary,
    pub convention: Convention,
    pub timings_ms: std::collections::BTreeMap<String, u64>,
    #[serde(skip)]
    pub null_distribution: NullDistribution,
}

/// Likelihood-ratio test of `null` against a nesting `alt` on `g`, with an
/// `s`-sample Monte Carlo null distribution.
pub fn lr_test(
    g: &MultiGraph,
    null: &Hypothesis,
    alt: &Hypothesis,
    s: usize,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<TestReport, TestError> {
    if !null.nests_in(alt) {
        return Err(TestError::NonNested {
            null: null.name().into(),
            alt: alt.name().into(),
        });
    }
    if s < 30 {
        return Err(TestError::NotEnoughSamples(s));
    }
    let started = std::time::Instant::now();
    let model0 = null.fit(g)?;
    let model_a = alt.fit(g)?;
    let (lambda, d) = lr_statistic(&model0, &model_a, g, cfg)?;
    let fit_ms = started.elapsed().as_millis() as u64;

    if null.same_as(alt) {
        // the deviance is identically zero; there is nothing to approximate
        let mut timings = std::collections::BTreeMap::new();
        timings.insert("fit".into(), fit_ms);
        timings.insert("null_distribution".into(), 0);
        timings.insert("total".into(), started.elapsed().as_millis() as u64);
        return Ok(TestReport {
            schema_version: 1,
            command: "test".into(),
            lambda: 1.0,
            d: 0.0,
            p_beta: 1.0,
            p_chi2: 1.0,
            alpha: 0.0,
            beta: 0.0,
            m_upper: 0.0,
            nu: 1,
            s,
            seed,
            dropped_replicates: 0,
            null_model: model0.summary(),
            alt_model: model_a.summary(),
            convention: Convention::for_graph(g),
            timings_ms: timings,
            null_distribution: NullDistribution {
                samples: Vec::new(),
                m_upper: 0.0,
                alpha: 0.0,
                beta: 0.0,
                nu: 1,
                seed,
                dropped: 0,
                clamped: false,
            },
        });
    }

    let null_started = std::time::Instant::now();
    let nd = null_distribution(g, null, alt, s, seed, cfg)?;
    let null_ms = null_started.elapsed().as_millis() as u64;

    let p_beta = p_value_beta(d, &nd);
    let p_chi2 = p_value_chi2(d, nd.nu())?;
    let mut timings = std::collections::BTreeMap::new();
    timings.insert("fit".into(), fit_ms);
    timings.insert("null_distribution".into(), null_ms);
    timings.insert("total".into(), started.elapsed().as_millis() as u64);
    Ok(TestReport {
        schema_version: 1,
        command: "test".into(),
        lambda,
        d,
        p_beta,
        p_chi2,
        alpha: nd.alpha(),
        beta: nd.beta(),
        m_upper: nd.m_upper(),
        nu: nd.nu(),
        s,
        seed,
        dropped_replicates: nd.dropped(),
        null_model: model0.summary(),
        alt_model: model_a.summary(),
        convention: Convention::for_graph(g),
        timings_ms: timings,
        null_distribution: nd,
    })
}

/// Goodness-of-fit test: the alternative is the full model that reproduces
/// the observation in expectation.
pub fn gof_test(
    g: &MultiGraph,
    null: &Hypothesis,
    s: usize,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<TestReport, TestError> {
    let mut report = lr_test(g, null, &Hypothesis::Full, s, seed, cfg)?;
    report.command = "gof".into();
    Ok(report)
}
