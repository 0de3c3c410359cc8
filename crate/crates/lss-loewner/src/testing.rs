//! Small reference systems and brute-force oracles shared by the test suites.
//!
//! The oracles here deliberately use explicit dense inverses so they stay
//! independent of the factorized-solve paths they are used to check.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::lss::{C64, LssModel, ModeSystem, promote, rcond_estimate};
use crate::tuples::{GammaSet, ThetaSet, Word, build_two_mode_tuples};

/// The two-mode evaporator-vessel system: identity E, modes
/// `A_1 = diag(-1, -1/2)` and `A_2 = [[-1, 2], [-1/2, -1/2]]`,
/// `B = [0; 1]`, `C = [1/2, 1/2]`, identity couplings.
pub fn evaporator() -> LssModel {
    let a1 = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -0.5]);
    let a2 = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, -0.5, -0.5]);
    let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
    let c = DMatrix::from_row_slice(1, 2, &[0.5, 0.5]);
    LssModel::siso_identity_e(vec![(a1, b.clone(), c.clone()), (a2, b, c)])
}

/// The interpolation grid that recovers the evaporator exactly:
/// right points (-3/2, 1, -2, 3/2), left points (2, 0, 1/2, -1/2),
/// one nested group of depth two per side.
pub fn evaporator_tuples() -> (GammaSet, ThetaSet) {
    let c = |x: f64| C64::new(x, 0.0);
    let right = [c(-1.5), c(1.0), c(-2.0), c(1.5)];
    let left = [c(2.0), c(0.0), c(0.5), c(-0.5)];
    build_two_mode_tuples(&right, &left, &[2], &[2]).expect("reference grid is well-formed")
}

fn phi_dense(model: &LssModel, q: usize, s: C64) -> DMatrix<C64> {
    let ms = model.mode(q);
    (promote(&ms.e) * s - promote(&ms.a))
        .try_inverse()
        .expect("oracle pencil invertible")
}

fn coupling_dense(model: &LssModel, from: usize, to: usize) -> DMatrix<C64> {
    promote(&model.coupling_matrix(from, to).expect("oracle coupling resolvable"))
}

/// Brute-force transfer value: the full product of dense inverses.
pub fn dense_transfer_oracle(model: &LssModel, w: &Word) -> C64 {
    let k = w.len();
    let mut acc = phi_dense(model, w.modes[k - 1], w.points[k - 1]) * promote(&model.mode(w.modes[k - 1]).b);
    for t in (0..k - 1).rev() {
        acc = coupling_dense(model, w.modes[t + 1], w.modes[t]) * acc;
        acc = phi_dense(model, w.modes[t], w.points[t]) * acc;
    }
    let out = promote(&model.mode(w.modes[0]).c) * acc;
    out[(0, 0)]
}

/// Brute-force generalized controllability/observability matrices.
pub fn dense_gramian_oracle(
    model: &LssModel,
    gamma: &GammaSet,
    theta: &ThetaSet,
) -> (Vec<DMatrix<C64>>, Vec<DMatrix<C64>>) {
    let d = gamma.num_modes;
    let mut r_out = Vec::with_capacity(d);
    for q in 1..=d {
        let words = gamma.mode_words(q);
        let n = model.dim(q);
        let mut r = DMatrix::<C64>::zeros(n, words.len());
        for (u, w) in words.iter().enumerate() {
            let k = w.len();
            let mut col =
                phi_dense(model, w.modes[k - 1], w.points[k - 1]) * promote(&model.mode(w.modes[k - 1]).b);
            for t in (0..k - 1).rev() {
                col = coupling_dense(model, w.modes[t + 1], w.modes[t]) * col;
                col = phi_dense(model, w.modes[t], w.points[t]) * col;
            }
            for i in 0..n {
                r[(i, u)] = col[(i, 0)];
            }
        }
        r_out.push(r);
    }
    let mut o_out = Vec::with_capacity(d);
    for q in 1..=d {
        let words = theta.mode_words(q);
        let n = model.dim(q);
        let mut o = DMatrix::<C64>::zeros(words.len(), n);
        for (v, w) in words.iter().enumerate() {
            let mut row = promote(&model.mode(w.modes[0]).c) * phi_dense(model, w.modes[0], w.points[0]);
            for t in 1..w.len() {
                row *= coupling_dense(model, w.modes[t], w.modes[t - 1]);
                row *= phi_dense(model, w.modes[t], w.points[t]);
            }
            for j in 0..n {
                o[(v, j)] = row[(0, j)];
            }
        }
        o_out.push(o);
    }
    (r_out, o_out)
}

/// A random SISO switched system with asymptotically stable modes and random
/// couplings for every ordered mode pair. Deterministic in the seed.
pub fn random_stable_model(seed: u64, dims: &[usize]) -> LssModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dims.len();
    let mut modes = Vec::with_capacity(d);
    for &n in dims {
        let e = loop {
            let cand = DMatrix::identity(n, n)
                + DMatrix::from_fn(n, n, |_, _| 0.2 * (rng.random::<f64>() - 0.5));
            if rcond_estimate(&cand) > 1e-6 {
                break cand;
            }
        };
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        // shift the pencil spectrum into the open left half-plane:
        // eig(A - s E, E) = eig(A, E) - s
        let a_tilde = e.clone().lu().solve(&a).expect("E nonsingular by construction");
        let max_re = a_tilde
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        a -= &e * (max_re + 0.5 + rng.random::<f64>());
        let b = DMatrix::from_fn(n, 1, |_, _| rng.random::<f64>() - 0.5);
        let c = DMatrix::from_fn(1, n, |_, _| rng.random::<f64>() - 0.5);
        modes.push(ModeSystem::new(e, a, b, c));
    }
    let mut couplings = BTreeMap::new();
    for from in 1..=d {
        for to in 1..=d {
            if from != to {
                let k = DMatrix::from_fn(dims[to - 1], dims[from - 1], |_, _| rng.random::<f64>() - 0.5);
                couplings.insert((from, to), k);
            }
        }
    }
    LssModel::new(modes, couplings, 1, 1)
}

/// Random nonsingular square matrix, for equivalence-transform tests.
pub fn random_nonsingular(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let cand = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { 1.0 } else { 0.0 };
            diag + rng.random::<f64>() - 0.5
        });
        if rcond_estimate(&cand) > 1e-4 {
            return cand;
        }
    }
}
