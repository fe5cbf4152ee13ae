use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Largest feature count accepted for a monomial expansion.
pub const MAX_FEATURES: u128 = 1_000_000;

/// `C(d + k, k)`, saturating once it passes [`MAX_FEATURES`].
pub fn monomial_count(d: usize, k: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        c = c * (d as u128 + i) / i;
        if c > MAX_FEATURES * 1_000 {
            return c;
        }
    }
    c
}

/// Exponent vectors of total degree `deg` in lexicographically descending order.
fn push_degree(d: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() == d - 1 {
        prefix.push(deg);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=deg).rev() {
        prefix.push(first);
        push_degree(d, deg - first, prefix, out);
        prefix.pop();
    }
}

/// All monomials of total degree `≤ k` in `d` variables, graded lexicographic order:
/// constant first, then by increasing degree, and within a degree by descending
/// exponent of `x0`, then `x1`, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    d: usize,
    k: usize,
    exponents: Vec<Vec<u32>>,
    /// For each non-constant monomial: (index of the monomial divided by x_var, var).
    parents: Vec<(usize, usize)>,
}

impl MonomialBasis {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("monomial basis needs d >= 1".into()));
        }
        let count = monomial_count(d, k);
        if count > MAX_FEATURES {
            return Err(Error::SizeOverflow(count));
        }
        let mut exponents = Vec::with_capacity(count as usize);
        for deg in 0..=k as u32 {
            push_degree(d, deg, &mut Vec::with_capacity(d), &mut exponents);
        }
        let index: HashMap<&[u32], usize> =
            exponents.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect();
        let mut parents = vec![(0, 0); exponents.len()];
        for (i, alpha) in exponents.iter().enumerate().skip(1) {
            let var = alpha.iter().position(|&a| a > 0).expect("non-constant monomial");
            let mut parent = alpha.clone();
            parent[var] -= 1;
            parents[i] = (index[parent.as_slice()], var);
        }
        Ok(MonomialBasis {
            d,
            k,
            exponents,
            parents,
        })
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Writes every monomial of `x` into `out`.
    pub fn fill(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.d);
        out[0] = 1.0;
        for i in 1..self.exponents.len() {
            let (p, var) = self.parents[i];
            out[i] = out[p] * x[var];
        }
    }
}

/// Monomial feature vector of `x` up to total degree `k`.
pub fn monomial_features(x: &[f64], k: usize) -> Result<Vec<f64>> {
    let basis = MonomialBasis::new(x.len(), k)?;
    let mut out = vec![0.0; basis.len()];
    basis.fill(x, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub alpha: Vec<u32>,
    pub c: f64,
}

/// `d`-variate polynomial of total degree `≤ k`, terms in graded lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPoly {
    pub d: usize,
    pub k: usize,
    pub terms: Vec<Term>,
}

impl MultiPoly {
    pub fn zero(d: usize) -> Self {
        MultiPoly {
            d,
            k: 0,
            terms: vec![Term {
                alpha: vec![0; d],
                c: 0.0,
            }],
        }
    }

    pub fn from_coeffs(basis: &MonomialBasis, coeffs: Vec<f64>) -> Self {
        assert_eq!(basis.len(), coeffs.len());
        MultiPoly {
            d: basis.dim(),
            k: basis.degree(),
            terms: basis
                .exponents()
                .iter()
                .zip(coeffs)
                .map(|(alpha, c)| Term {
                    alpha: alpha.clone(),
                    c,
                })
                .collect(),
        }
    }

    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.c.abs()).sum()
    }

    pub fn coeff(&self, alpha: &[u32]) -> Option<f64> {
        self.terms.iter().find(|t| t.alpha == alpha).map(|t| t.c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.alpha
                    .iter()
                    .zip(x)
                    .fold(t.c, |acc, (&a, &xi)| acc * xi.powi(a as i32))
            })
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            check_dim(self.d, t.alpha.len())?;
            if t.alpha.iter().map(|&a| a as usize).sum::<usize>() > self.k {
                return Err(Error::InvalidSpec("term exceeds declared degree".into()));
            }
        }
        if self.terms.len() as u128 > monomial_count(self.d, self.k) {
            return Err(Error::InvalidSpec("too many terms for declared degree".into()));
        }
        Ok(())
    }
}
