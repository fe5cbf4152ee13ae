//! Refines a constant-factor ReLU fit into the three-slab hypothesis on an instance
//! whose labels are zeroed near the hinge, sweeping the band multiplier γ.
//!
//! cargo run --release --example ptas_refine

use relu_regress::data::{generate, LabelModel, MarginalSpec};
use relu_regress::numerics::Rng;
use relu_regress::ptas::{piecewise_loss, ptas_train, region_losses, PtasConfig};
use relu_regress::surrogate::{pgd_train, select_min_gradient, square_loss, Activation, SolverConfig};

fn main() -> relu_regress::Result<()> {
    let marginal = MarginalSpec::gaussian(3);
    let labels = LabelModel::zeroing_band(0.3);
    let w_star = [1.0, 0.0, 0.0];
    let (train, _) = generate(&marginal, &labels, &w_star, 200_000, &mut Rng::with_stream(8, 0))?;
    let (fresh, _) = generate(&marginal, &labels, &w_star, 20_000, &mut Rng::with_stream(8, 1))?;
    let (holdout, gt) = generate(&marginal, &labels, &w_star, 50_000, &mut Rng::with_stream(8, 2))?;

    let trace = pgd_train(&train, Activation::Relu, &SolverConfig::default())?;
    let model = select_min_gradient(&trace, &fresh)?.model;
    let loss_const = square_loss(&model, &holdout)?;
    println!("opt_ref {:.4e}   constant-factor fit {loss_const:.4e}", gt.opt_ref);

    for gamma in [0.8, 1.2, 1.6] {
        let cfg = PtasConfig { eta_accuracy: 0.5, gamma: Some(gamma), ..PtasConfig::default() };
        let h = ptas_train(&train, &holdout, &cfg, &model)?;
        let r = region_losses(&h, &holdout)?;
        println!(
            "γ={gamma:.1} k={} t={:.4}  loss {:.4e}  slabs {:?}  slab losses [{:.2e}, {:.2e}, {:.2e}]",
            h.provenance.degree,
            h.partition.t,
            piecewise_loss(&h, &holdout)?,
            r.counts,
            r.losses[0],
            r.losses[1],
            r.losses[2],
        );
    }
    Ok(())
}
