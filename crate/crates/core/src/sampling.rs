//! Random states and distributions for property checks and self-tests.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::quantum::{BellDiagonalState, Mat4, TwoQubitState, C64};

/// A Ginibre-distributed two-qubit state `G G^dag / Tr(G G^dag)`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let mut g = Mat4::zeros();
    for z in g.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *z = C64::new(re, im);
    }
    let m = g * g.adjoint();
    let tr = m.trace().re;
    TwoQubitState::new(m.unscale(tr)).expect("Ginibre sample is a state")
}

/// A uniform (flat Dirichlet) sample from the probability simplex.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|v| v / total).collect()
}

/// A flat Dirichlet sample over the four Bell weights.
pub fn random_bell_diagonal<R: Rng + ?Sized>(rng: &mut R) -> BellDiagonalState {
    let p = random_distribution(rng, 4);
    BellDiagonalState::new([p[0], p[1], p[2], p[3]]).expect("simplex sample")
}

/// Like [`random_bell_diagonal`], but with probability one half a random
/// subset of the weights is set exactly to zero.
pub fn random_bell_diagonal_with_zeros<R: Rng + ?Sized>(rng: &mut R) -> BellDiagonalState {
    let mut p = random_distribution(rng, 4);
    if rng.random_bool(0.5) {
        let keep = rng.random_range(1..4);
        let mut order = [0usize, 1, 2, 3];
        for i in (1..4).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        for &idx in &order[keep..] {
            p[idx] = 0.0;
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
    }
    BellDiagonalState::new([p[0], p[1], p[2], p[3]]).expect("simplex sample")
}
