//! Balanced-truncation baseline for switched systems via average gramians.
//!
//! Per mode the controllability/observability gramians solve the generalized
//! Lyapunov equations `A P E^T + E P A^T + B B^T = 0` and
//! `A^T Q E + E^T Q A + C^T C = 0`. One global square-root balancing of the
//! averaged pair `(P_av, Q_av)` yields a single projection applied to every
//! mode and every coupling matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lss::{LssModel, ModeSystem, RCOND_TOL, rcond_estimate};
use crate::reduction::numerical_rank;

/// Per-mode gramians and their averages.
#[derive(Debug, Clone)]
pub struct GramianSet {
    pub p: Vec<DMatrix<f64>>,
    pub q: Vec<DMatrix<f64>>,
    pub p_av: DMatrix<f64>,
    pub q_av: DMatrix<f64>,
}

/// Balancing summary: the average Hankel singular values and whether the
/// requested order had to be capped at the numerical rank of the gramian pair.
#[derive(Debug, Clone)]
pub struct BtReport {
    pub hankel: Vec<f64>,
    pub order: usize,
    pub rank_capped: bool,
}

/// Solves `A X + X A^T + G = 0` by the Bartels-Stewart approach: real Schur
/// form of A, then a blockwise back-substitution over the quasi-triangular
/// factor. Requires eig(A) + eig(A) to avoid zero, which holds for stable A.
pub fn solve_lyapunov(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || g.nrows() != n || g.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: format!("lyapunov wants square matching matrices, got {}x{} and {}x{}",
                a.nrows(), a.ncols(), g.nrows(), g.ncols()),
        });
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let schur = a.clone().schur();
    let (q, t) = schur.unpack();
    let c = -(q.transpose() * g * &q);
    let y = solve_quasi_triangular_lyapunov(&t, &c)?;
    let x = &q * y * q.transpose();
    // the equation is symmetric in X; fold rounding asymmetry away
    Ok((&x + x.transpose()) * 0.5)
}

/// Solves `T Y + Y T^T = C` for quasi-upper-triangular T.
fn solve_quasi_triangular_lyapunov(t: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    // diagonal block boundaries: 2x2 blocks have a nonzero subdiagonal entry
    let mut starts = Vec::new();
    let mut i = 0;
    while i < n {
        starts.push(i);
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            i += 2;
        } else {
            i += 1;
        }
    }
    let nb = starts.len();
    let size = |bi: usize| -> usize {
        let s = starts[bi];
        if bi + 1 < nb { starts[bi + 1] - s } else { n - s }
    };
    let mut y = DMatrix::<f64>::zeros(n, n);
    for bj in (0..nb).rev() {
        let (js, jn) = (starts[bj], size(bj));
        for bi in (0..nb).rev() {
            let (is, in_) = (starts[bi], size(bi));
            let mut rhs = c.view((is, js), (in_, jn)).into_owned();
            // subtract sum_{K > I} T_IK Y_KJ
            for (bk, &ks) in starts.iter().enumerate().skip(bi + 1) {
                let kn = size(bk);
                rhs -= t.view((is, ks), (in_, kn)) * y.view((ks, js), (kn, jn));
            }
            // subtract sum_{L > J} Y_IL (T^T)_LJ = Y_IL T_JL^T
            for (bl, &ls) in starts.iter().enumerate().skip(bj + 1) {
                let ln = size(bl);
                rhs -= y.view((is, ls), (in_, ln)) * t.view((js, ls), (jn, ln)).transpose();
            }
            let tii = t.view((is, is), (in_, in_)).into_owned();
            let tjj = t.view((js, js), (jn, jn)).into_owned();
            // vec form of T_II X + X T_JJ^T = RHS (column-major vec)
            let m = in_ * jn;
            let mut sys = DMatrix::<f64>::zeros(m, m);
            for col in 0..jn {
                for row in 0..in_ {
                    let r = col * in_ + row;
                    for k in 0..in_ {
                        sys[(r, col * in_ + k)] += tii[(row, k)];
                    }
                    for l in 0..jn {
                        sys[(r, l * in_ + row)] += tjj[(col, l)];
                    }
                }
            }
            let mut vec_rhs = DVector::<f64>::zeros(m);
            for col in 0..jn {
                for row in 0..in_ {
                    vec_rhs[col * in_ + row] = rhs[(row, col)];
                }
            }
            let sol = sys.lu().solve(&vec_rhs).ok_or_else(|| Error::DimensionMismatch {
                context: "lyapunov block system singular (eigenvalue pair sums to zero)".into(),
            })?;
            for col in 0..jn {
                for row in 0..in_ {
                    y[(is + row, js + col)] = sol[col * in_ + row];
                }
            }
        }
    }
    Ok(y)
}

fn stability_check(model: &LssModel, q: usize) -> Result<DMatrix<f64>> {
    let ms = model.mode(q);
    if rcond_estimate(&ms.e) < RCOND_TOL {
        return Err(Error::InvalidInput(format!("mode {q}: E is singular")));
    }
    let a_tilde = ms.e.clone().lu().solve(&ms.a).expect("E nonsingular checked");
    for eig in a_tilde.complex_eigenvalues().iter() {
        if eig.re >= 0.0 {
            return Err(Error::UnstableMode { mode: q, eig: *eig });
        }
    }
    Ok(a_tilde)
}

/// Solves the two generalized Lyapunov equations per mode and averages.
///
/// Every mode must be asymptotically stable and share one state dimension.
pub fn mode_gramians(model: &LssModel) -> Result<GramianSet> {
    let d = model.num_modes();
    let n = model.dim(1);
    for q in 2..=d {
        if model.dim(q) != n {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "balanced truncation needs one common state dimension, modes have {:?}",
                    model.dims()
                ),
            });
        }
    }
    let mut p_all = Vec::with_capacity(d);
    let mut q_all = Vec::with_capacity(d);
    for q in 1..=d {
        let a_tilde = stability_check(model, q)?;
        let ms = model.mode(q);
        let e_lu = ms.e.clone().lu();
        let b_tilde = e_lu.solve(&ms.b).expect("E nonsingular checked");
        // C E^{-1} via the transposed system
        let ct = ms.e.transpose().lu().solve(&ms.c.transpose()).expect("E nonsingular checked");
        let c_tilde = ct.transpose();
        let p = solve_lyapunov(&a_tilde, &(&b_tilde * b_tilde.transpose()))?;
        let qg = solve_lyapunov(&a_tilde.transpose(), &(c_tilde.transpose() * &c_tilde))?;
        p_all.push(p);
        q_all.push(qg);
    }
    let scale = 1.0 / d as f64;
    let mut p_av = DMatrix::<f64>::zeros(n, n);
    let mut q_av = DMatrix::<f64>::zeros(n, n);
    for q in 0..d {
        p_av += &p_all[q];
        q_av += &q_all[q];
    }
    Ok(GramianSet { p: p_all, q: q_all, p_av: p_av * scale, q_av: q_av * scale })
}

/// Symmetric PSD square-root factor via eigendecomposition, negatives clamped.
fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let n = m.nrows();
    let mut f = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let l = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..n {
            f[(i, j)] = eig.eigenvectors[(i, j)] * l;
        }
    }
    f
}

/// Square-root balancing of the average gramian pair, truncated to order `r`.
///
/// With `P_av = U U^T`, `Q_av = L L^T` and the SVD `L^T U = Zl S Zr^T`, the
/// projection pair is `W = L Zl_r S_r^(-1/2)` and `V = U Zr_r S_r^(-1/2)`;
/// every mode and every stored coupling is projected with the same (W, V).
/// `r` is capped at the numerical rank of S, reported in the [`BtReport`].
pub fn bt_reduce(model: &LssModel, r: usize) -> Result<(LssModel, BtReport)> {
    let n = model.dim(1);
    if r == 0 || r > n {
        return Err(Error::RankTooLarge { mode: 0, requested: r, max: n });
    }
    let grams = mode_gramians(model)?;
    let u = psd_factor(&grams.p_av);
    let l = psd_factor(&grams.q_av);
    let svd = (l.transpose() * &u).svd(true, true);
    let hankel: Vec<f64> = svd.singular_values.iter().copied().collect();
    let rank = numerical_rank(&hankel, 1e-12);
    if rank == 0 {
        return Err(Error::InvalidInput("average gramian product has rank zero".into()));
    }
    let rank_capped = r > rank;
    let r_eff = r.min(rank);
    let zl = svd.u.as_ref().expect("svd with u").columns(0, r_eff).into_owned();
    let zr = svd.v_t.as_ref().expect("svd with v_t").rows(0, r_eff).transpose();
    let s_inv_sqrt = DMatrix::<f64>::from_fn(r_eff, r_eff, |i, j| {
        if i == j { 1.0 / hankel[i].sqrt() } else { 0.0 }
    });
    let w = &l * &zl * &s_inv_sqrt;
    let v = &u * &zr * &s_inv_sqrt;

    let modes = model
        .modes()
        .iter()
        .map(|ms| {
            ModeSystem::new(
                w.transpose() * &ms.e * &v,
                w.transpose() * &ms.a * &v,
                w.transpose() * &ms.b,
                &ms.c * &v,
            )
        })
        .collect();
    let mut couplings = std::collections::BTreeMap::new();
    for (&(from, to), k) in model.couplings() {
        couplings.insert((from, to), w.transpose() * k * &v);
    }
    // absent couplings stay absent: W^T V = I, so the identity projects to the
    // identity of the reduced space
    let reduced = LssModel::new(modes, couplings, model.num_inputs(), model.num_outputs());
    Ok((reduced, BtReport { hankel, order: r_eff, rank_capped }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{evaporator, random_stable_model};
    use approx::assert_relative_eq;

    #[test]
    fn scalar_lyapunov() {
        // a = -1, g = 1: -2p + 1 = 0
        let p = solve_lyapunov(
            &DMatrix::from_element(1, 1, -1.0),
            &DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        assert_relative_eq!(p[(0, 0)], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn lyapunov_residual_random() {
        for seed in [1u64, 2, 3] {
            let m = random_stable_model(seed, &[6]);
            let ms = m.mode(1);
            let g = &ms.b * ms.b.transpose();
            let x = solve_lyapunov(&ms.a, &g).unwrap();
            let resid = (&ms.a * &x + &x * ms.a.transpose() + &g).norm();
            assert!(resid <= 1e-10 * g.norm().max(x.norm()), "seed {seed}: {resid:.3e}");
            assert!((&x - x.transpose()).norm() < 1e-12);
        }
    }

    #[test]
    fn scalar_mode_gramians() {
        let m = LssModel::siso_identity_e(vec![(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
        )]);
        let g = mode_gramians(&m).unwrap();
        assert_relative_eq!(g.p[0][(0, 0)], 0.5, epsilon = 1e-14);
        assert_relative_eq!(g.q[0][(0, 0)], 0.5, epsilon = 1e-14);
        // single mode: the average is the gramian itself
        assert_relative_eq!(g.p_av[(0, 0)], g.p[0][(0, 0)], epsilon = 1e-16);
    }

    #[test]
    fn evaporator_gramian_residuals() {
        let m = evaporator();
        let g = mode_gramians(&m).unwrap();
        for q in 1..=2 {
            let ms = m.mode(q);
            let rp = (&ms.a * &g.p[q - 1] * ms.e.transpose()
                + &ms.e * &g.p[q - 1] * ms.a.transpose()
                + &ms.b * ms.b.transpose())
                .norm();
            let rq = (ms.a.transpose() * &g.q[q - 1] * &ms.e
                + ms.e.transpose() * &g.q[q - 1] * &ms.a
                + ms.c.transpose() * &ms.c)
                .norm();
            assert!(rp < 1e-10, "P residual mode {q}: {rp:.3e}");
            assert!(rq < 1e-10, "Q residual mode {q}: {rq:.3e}");
        }
        // gramians stay symmetric positive semidefinite
        for m in g.p.iter().chain(g.q.iter()).chain([&g.p_av, &g.q_av]) {
            assert!((m - m.transpose()).norm() < 1e-12);
            let min_eig = m.clone().symmetric_eigen().eigenvalues.min();
            assert!(min_eig >= -1e-10 * m.norm(), "min eigenvalue {min_eig:.3e}");
        }
    }

    #[test]
    fn unstable_mode_rejected() {
        let m = LssModel::siso_identity_e(vec![(
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
        )]);
        assert!(matches!(mode_gramians(&m), Err(Error::UnstableMode { mode: 1, .. })));
    }

    #[test]
    fn mixed_dims_rejected() {
        let m = random_stable_model(5, &[3, 4]);
        assert!(matches!(mode_gramians(&m), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn full_order_bt_is_change_of_basis() {
        let m = random_stable_model(9, &[4, 4]);
        let (red, report) = bt_reduce(&m, 4).unwrap();
        assert_eq!(report.order, 4);
        assert!(!report.rank_capped);
        // bi-orthogonality of the balancing pair shows up as exact moment match
        for q in 1..=2 {
            for w in [0.0_f64, 0.3, 1.0, 4.0] {
                let s = crate::lss::C64::new(0.0, w);
                let h0 = crate::transfer::eval_transfer(
                    &m,
                    &crate::tuples::Word::new(vec![q], vec![s]),
                )
                .unwrap();
                let h1 = crate::transfer::eval_transfer(
                    &red,
                    &crate::tuples::Word::new(vec![q], vec![s]),
                )
                .unwrap();
                assert!((h0 - h1).norm() <= 1e-8 * h0.norm().max(1.0), "mode {q} w {w}");
            }
        }
    }

    #[test]
    fn rank_deficient_gramians_cap_the_order() {
        // second state is unreachable and unobservable: hankel rank 1
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        let b = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let m = LssModel::siso_identity_e(vec![(a, b, c)]);
        let (red, report) = bt_reduce(&m, 2).unwrap();
        assert!(report.rank_capped);
        assert_eq!(report.order, 1);
        assert_eq!(red.dims(), vec![1]);
    }

    #[test]
    fn evaporator_bt_rank_one() {
        let (red, report) = bt_reduce(&evaporator(), 1).unwrap();
        assert_eq!(red.dims(), vec![1, 1]);
        assert_eq!(report.hankel.len(), 2);
        assert!(report.hankel[0] >= report.hankel[1]);
    }
}
