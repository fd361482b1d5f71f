//! User-supplied capacity matrices: a citation-network-style ensemble where
//! the slots between two authors are the product of their publication
//! counts, rather than observed degrees.
//!
//! Run with: cargo run --release --example custom_capacities

use ghype::model::{ModelSpec, XiMatrix};
use ghype::multigraph::DyadLayout;
use ghype::numerics::QuadratureConfig;
use ghype::sampler::{replicate_seed, sample_graph};

fn main() {
    let quad = QuadratureConfig::default();

    // five authors with publication counts; author i can cite author j once
    // per pair of papers
    let papers = [12.0, 7.0, 5.0, 3.0, 2.0];
    let n = papers.len();
    let layout = DyadLayout {
        n,
        directed: true,
        selfloops: false,
    };
    let mut xi = vec![0.0; n * n];
    for (i, j) in layout.dyads() {
        xi[i * n + j] = papers[i] * papers[j];
    }
    let model = ModelSpec::custom(layout, XiMatrix::Dense(xi), None, 1).expect("valid spec");
    println!(
        "citation-style ensemble over {} ordered pairs, total capacity {}",
        layout.cell_count(),
        model.total_xi()
    );

    let m = 60u64;
    let expected = model.expected_counts(m as f64, &quad).expect("expectation");
    println!("\nexpected citations for m = {m}:");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:5.1}", expected[i * n + j])).collect();
        println!("  author {i}: {}", row.join(" "));
    }

    let g = sample_graph(&model, m, replicate_seed(77, 0)).expect("sample");
    let ll = model.log_likelihood(&g, &quad).expect("likelihood");
    println!("\none sampled citation network has log-likelihood {ll:.3}");
    let (kout, kin) = g.degrees();
    println!("citations made: {kout:?}");
    println!("citations received: {kin:?}");
}
