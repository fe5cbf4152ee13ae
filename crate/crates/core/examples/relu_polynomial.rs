//! Uniform polynomial approximation of ReLU on [−s, s]: Chebyshev truncation against
//! the Remez minimax polynomial, with the monomial coefficient ℓ1 norm.
//!
//! cargo run --release --example relu_polynomial

use relu_regress::poly_approx::{chebyshev_relu_series, coeff_l1, remez_relu_approx, sup_error_grid};

fn main() -> relu_regress::Result<()> {
    let s = 1.0;
    println!("{:>3} {:>12} {:>12} {:>8} {:>12}", "n", "chebyshev", "remez", "3s/n", "l1(remez)");
    for n in [1, 2, 4, 8, 16, 32, 64] {
        let cheb = chebyshev_relu_series(n, s)?;
        let remez = remez_relu_approx(n, s, 50)?;
        let l1 = if n <= 16 { format!("{:.4e}", coeff_l1(&remez.poly)) } else { "-".into() };
        println!(
            "{n:>3} {:>12.4e} {:>12.4e} {:>8.4} {l1:>12}",
            sup_error_grid(&cheb, s, 20_001),
            remez.achieved_error,
            3.0 * s / n as f64,
        );
    }
    Ok(())
}
