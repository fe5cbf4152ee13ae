//! Monte Carlo estimates of the strong-convexity constant μ and the Chow-learnability
//! constant β for a few activations under a Gaussian marginal.
//!
//! cargo run --release --example probe_convexity

use relu_regress::data::MarginalSpec;
use relu_regress::numerics::Rng;
use relu_regress::surrogate::{probe_pairs, Activation, ProbeSpec};

fn main() -> relu_regress::Result<()> {
    let marginal = MarginalSpec::gaussian(3);
    let spec = ProbeSpec { m: 200_000, pairs: 100, ..ProbeSpec::default() };
    println!("{:<22} {:>8} {:>8} {:>8}", "activation", "mu_hat", "beta_hat", "1/mu");
    for act in [Activation::Identity, Activation::LeakyRelu { alpha: 0.2 }, Activation::Relu] {
        let pairs = probe_pairs(act, &marginal, &spec, &mut Rng::new(11))?;
        let mu = pairs.iter().map(|p| p.strong_convexity).fold(f64::INFINITY, f64::min);
        let beta = pairs.iter().map(|p| p.chow_learnability).fold(0.0, f64::max);
        println!("{:<22} {mu:>8.4} {beta:>8.4} {:>8.4}", format!("{act:?}"), 1.0 / mu);
    }
    Ok(())
}
