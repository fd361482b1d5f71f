//! Calibration of the Beta-null p-value: when the data really come from the
//! null hypothesis, reported p-values must be uniform on [0, 1].

use ghype::lrtest::{lr_test, TestError};
use ghype::model::{Hypothesis, ModelSpec, XiMatrix};
use ghype::multigraph::DyadLayout;
use ghype::numerics::{ks_test, QuadratureConfig};
use ghype::sampler::{replicate_seed, sample_graph};
use rayon::prelude::*;

#[test]
fn beta_p_values_are_uniform_under_the_null() {
    let quad = QuadratureConfig::default();
    let n = 20usize;
    let m = 60u64;
    let layout = DyadLayout {
        n,
        directed: false,
        selfloops: false,
    };
    // one-parameter generating model with the capacity a regular fit would
    // assign to an (n, m) graph of this layout
    let kbar = 2.0 * m as f64 / n as f64;
    let generator = ModelSpec::custom(layout, XiMatrix::Scalar(kbar * kbar), None, 1).unwrap();

    let reps = 400usize;
    let p_values: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| -> Result<f64, TestError> {
            let g = sample_graph(&generator, m, replicate_seed(60601, r as u64))?;
            let report = lr_test(
                &g,
                &Hypothesis::Regular,
                &Hypothesis::Configuration,
                400,
                replicate_seed(60602, r as u64),
                &quad,
            )?;
            Ok(report.p_beta)
        })
        .collect::<Result<Vec<_>, _>>()
        .expect("all repetitions run");

    let ks = ks_test(&p_values, |x| x.clamp(0.0, 1.0)).expect("ks runs");
    println!(
        "calibration: {} p-values, KS vs uniform = {:.4}, p = {:.4}",
        reps, ks.statistic, ks.p_value
    );
    assert!(
        ks.p_value > 0.01,
        "null-generated p-values deviate from uniformity: KS p = {}",
        ks.p_value
    );
}
