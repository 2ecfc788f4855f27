//! Seeded random states for property checks and the verification suite.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::density::{DensityOperator, Matrix};
use crate::error::Result;
use crate::rule::RuleAst;

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of R's diagonal folded back into Q.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniform point on the probability simplex of the given size.
pub fn random_probabilities<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// `U diag(p) U†` with a random spectrum `p` and random unitary `U`.
pub fn random_density<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<DensityOperator> {
    let dim = 1usize << num_qubits;
    let probs = random_probabilities(dim, rng);
    let u = random_unitary(dim, rng);
    let diag = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        probs.into_iter().map(|p| Complex64::new(p, 0.0)),
    ));
    DensityOperator::from_channel_output(&u * diag * u.adjoint())
}

/// Random formula over voters `1..=voters` with depth at most `max_depth`.
pub fn random_ast<R: Rng + ?Sized>(voters: usize, max_depth: usize, rng: &mut R) -> RuleAst {
    if max_depth <= 1 || rng.random_bool(0.3) {
        return RuleAst::Atom(rng.random_range(1..=voters));
    }
    match rng.random_range(0..5) {
        0 => RuleAst::Not(Box::new(random_ast(voters, max_depth - 1, rng))),
        k => {
            let arity = rng.random_range(2..=3);
            let children = (0..arity).map(|_| random_ast(voters, max_depth - 1, rng)).collect();
            if k % 2 == 0 {
                RuleAst::And(children)
            } else {
                RuleAst::Or(children)
            }
        }
    }
}
