//! Fits a ReLU with the projected and the projection-free gradient method on clean and
//! corrupted labels, picking the iterate with the smallest gradient on a fresh sample.
//!
//! cargo run --release --example train_surrogate

use relu_regress::data::{generate, random_unit, LabelModel, MarginalSpec};
use relu_regress::numerics::{dist, Rng};
use relu_regress::surrogate::{pgd_train, select_min_gradient, square_loss, Activation, SolverConfig};

fn main() -> relu_regress::Result<()> {
    let d = 10;
    let marginal = MarginalSpec::gaussian(d);
    let w_star: Vec<f64> = random_unit(d, &mut Rng::new(3)).iter().map(|v| 0.5 * v).collect();

    let solvers = [
        ("projected, step 0.2", SolverConfig::default()),
        ("fast, step 1/16", SolverConfig { grad_tol: 1e-8, ..SolverConfig::fast(2000) }),
    ];
    for labels in [LabelModel::clean(), LabelModel::fraction_adversarial(0.1, 0.5)] {
        let (train, _) = generate(&marginal, &labels, &w_star, 100_000, &mut Rng::with_stream(1, 0))?;
        let (fresh, _) = generate(&marginal, &labels, &w_star, 20_000, &mut Rng::with_stream(1, 1))?;
        let (holdout, gt) = generate(&marginal, &labels, &w_star, 20_000, &mut Rng::with_stream(1, 2))?;
        println!("{:?} labels, opt_ref = {:.3e}", labels.kind, gt.opt_ref);
        for (name, cfg) in &solvers {
            let trace = pgd_train(&train, Activation::Relu, cfg)?;
            let sel = select_min_gradient(&trace, &fresh)?;
            println!(
                "  {name:<20} steps {:>5}  picked t={:<5} holdout {:.3e}  ‖w−w*‖ {:.3e}",
                trace.steps_taken(),
                sel.iteration,
                square_loss(&sel.model, &holdout)?,
                dist(&sel.model.w, &w_star),
            );
        }
    }
    Ok(())
}
