//! Draws datasets from each marginal and corruption model, prints the teacher's loss
//! (`opt_ref`) and round-trips one of them through CSV.
//!
//! cargo run --release --example generate_data

use relu_regress::data::{generate, isotropy_check, read_csv, write_csv, LabelModel, MarginalKind, MarginalSpec};
use relu_regress::numerics::Rng;

fn main() -> relu_regress::Result<()> {
    let d = 5;
    let w_star = [0.6, 0.0, -0.8, 0.0, 0.0];
    let m = 100_000;

    println!("{:<28} {:>10} {:>10}", "marginal", "|mean|", "max|Σ−I|");
    for kind in [
        MarginalKind::Gaussian,
        MarginalKind::UniformBallIsotropic,
        MarginalKind::LaplaceProductIsotropic,
    ] {
        let (mean, cov) = isotropy_check(&MarginalSpec::new(kind, d), 10 * d * d * 100, &mut Rng::new(1))?;
        println!("{:<28} {:>10.4} {:>10.4}", format!("{kind:?}"), mean, cov);
    }

    let marginal = MarginalSpec::gaussian(d);
    let models = [
        ("clean", LabelModel::clean()),
        ("zeroing_band a=0.2", LabelModel::zeroing_band(0.2)),
        ("bounded_additive 5%", LabelModel::bounded_additive(0.05, 0.3)),
        ("fraction_adversarial 10%", LabelModel::fraction_adversarial(0.1, 0.5)),
    ];
    println!();
    println!("{:<28} {:>12}", "labels", "opt_ref");
    for (name, labels) in models {
        let (_, gt) = generate(&marginal, &labels, &w_star, m, &mut Rng::new(42))?;
        println!("{name:<28} {:>12.4e}", gt.opt_ref);
    }

    let (ds, _) = generate(&marginal, &LabelModel::zeroing_band(0.2), &w_star, 1000, &mut Rng::new(7))?;
    let path = std::env::temp_dir().join("relu_regress_example.csv");
    write_csv(&ds, &path)?;
    let back = read_csv(&path, d)?;
    assert_eq!(back, ds);
    println!("\nround-tripped {} rows through {}", back.len(), path.display());
    Ok(())
}
