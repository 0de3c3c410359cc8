//! Reduced-order realizations from Loewner data: the exact square case, the
//! SVD-truncated redundant case, and the unitary realification that turns
//! conjugate-pair data into real matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::loewner::LoewnerData;
use crate::lss::{C64, LssModel, ModeSystem, RCOND_TOL, rcond_estimate, rcond_estimate_c};

/// Relative imaginary-part budget for treating Loewner data as real.
const REALNESS_TOL: f64 = 1e-9;

/// Per-mode truncation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeReduction {
    pub mode: usize,
    /// Singular values of the mode pencil, nonincreasing.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub largest_neglected: f64,
}

/// Outcome of an SVD truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    /// Relative tolerance used for rank selection, when not overridden.
    pub tolerance: Option<f64>,
    pub modes: Vec<ModeReduction>,
}

/// Rank selection for [`svd_truncate`].
#[derive(Debug, Clone)]
pub enum RankSpec {
    /// Keep singular values above `tol * sigma_1`, per mode.
    Tolerance(f64),
    /// Explicit per-mode ranks.
    PerMode(Vec<usize>),
}

/// Default relative truncation tolerance; slightly looser than machine
/// precision to absorb accumulated solve error.
pub const DEFAULT_SVD_TOL: f64 = 1e-12;

/// Count of singular values above `tol * sigma_1`; zero for an all-zero list.
pub fn numerical_rank(singular_values: &[f64], tol: f64) -> usize {
    debug_assert!(
        singular_values.windows(2).all(|w| w[0] >= w[1]),
        "singular values must be nonincreasing"
    );
    match singular_values.first() {
        None | Some(&0.0) => 0,
        Some(&s1) => singular_values.iter().take_while(|&&s| s > tol * s1).count(),
    }
}

fn max_imag(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn real_part(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|v| v.re)
}

/// Largest |Im| across all data matrices, and the data magnitude scale.
fn imag_and_scale(data: &LoewnerData) -> (f64, f64) {
    let mut im: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut visit = |m: &DMatrix<C64>| {
        im = im.max(max_imag(m));
        scale = scale.max(max_abs(m));
    };
    for q in 0..data.num_modes {
        visit(&data.loewner[q]);
        visit(&data.shifted[q]);
        visit(&data.v[q]);
        visit(&data.w[q]);
    }
    for xi in data.coupling.values() {
        visit(xi);
    }
    (im, scale)
}

fn require_real(data: &LoewnerData) -> Result<()> {
    let (im, scale) = imag_and_scale(data);
    if im > REALNESS_TOL * scale.max(1.0) {
        let mode = (0..data.num_modes)
            .max_by(|&a, &b| {
                max_imag(&data.loewner[a]).total_cmp(&max_imag(&data.loewner[b]))
            })
            .unwrap_or(0)
            + 1;
        return Err(Error::ComplexData { mode, max_imag: im });
    }
    Ok(())
}

/// Exact realization for square, nonsingular pencils:
/// `E_q = -L_q`, `A_q = -Ls_q`, `B_q = V_q`, `C_q = W_q`, `K_(i,j) = Xi_(i,j)`.
///
/// The data must be real (real interpolation points, or realified); every
/// sampled generalized transfer-function value of the source is matched
/// exactly by the returned model.
pub fn exact_realization(data: &LoewnerData) -> Result<LssModel> {
    let d = data.num_modes;
    for q in 1..=d {
        let lm = &data.loewner[q - 1];
        if lm.nrows() != lm.ncols() {
            return Err(Error::SingularLoewner { mode: q, rows: lm.nrows(), cols: lm.ncols() });
        }
        if rcond_estimate_c(lm) < RCOND_TOL {
            return Err(Error::SingularLoewner { mode: q, rows: lm.nrows(), cols: lm.ncols() });
        }
        // no point paired with mode q may be an eigenvalue of (Ls_q, L_q);
        // points attached to other modes are unconstrained here
        for &p in &data.points_by_mode[q - 1] {
            let shifted = &data.shifted[q - 1] - lm * p;
            if rcond_estimate_c(&shifted) < RCOND_TOL {
                return Err(Error::EigenpointCollision { mode: q, point: p });
            }
        }
    }
    require_real(data)?;
    let modes = (1..=d)
        .map(|q| {
            ModeSystem::new(
                -real_part(&data.loewner[q - 1]),
                -real_part(&data.shifted[q - 1]),
                real_part(&data.v[q - 1]),
                real_part(&data.w[q - 1]),
            )
        })
        .collect();
    let mut couplings = BTreeMap::new();
    for (&(i, j), xi) in &data.coupling {
        couplings.insert((i, j), real_part(xi));
    }
    Ok(LssModel::new(modes, couplings, 1, 1))
}

/// Rank-revealing truncation of the Loewner pencils.
///
/// Per mode, with the SVD `L_q = Y S X^T`, the leading `r_q` columns project:
/// `E_q = -Y^T L_q X`, `A_q = -Y^T Ls_q X`, `B_q = Y^T V_q`, `C_q = W_q X`,
/// and `K_(i,j) = Y_j^T Xi_(i,j) X_i`. Reduced mode dimensions may differ, in
/// which case coupling matrices become rectangular.
pub fn svd_truncate(data: &LoewnerData, spec: RankSpec) -> Result<(LssModel, ReductionReport)> {
    require_real(data)?;
    let d = data.num_modes;
    if let RankSpec::PerMode(ranks) = &spec {
        if ranks.len() != d {
            return Err(Error::DimensionMismatch {
                context: format!("expected {d} rank overrides, got {}", ranks.len()),
            });
        }
    }
    let mut y_mats = Vec::with_capacity(d);
    let mut x_mats = Vec::with_capacity(d);
    let mut report = ReductionReport {
        tolerance: match &spec {
            RankSpec::Tolerance(t) => Some(*t),
            RankSpec::PerMode(_) => None,
        },
        modes: Vec::with_capacity(d),
    };
    for q in 1..=d {
        let lm = real_part(&data.loewner[q - 1]);
        let (rows, cols) = (lm.nrows(), lm.ncols());
        let svd = lm.svd(true, true);
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        if sv.first().copied().unwrap_or(0.0) == 0.0 {
            return Err(Error::DegenerateData { mode: q });
        }
        let rank = match &spec {
            RankSpec::Tolerance(t) => numerical_rank(&sv, *t),
            RankSpec::PerMode(ranks) => {
                let r = ranks[q - 1];
                if r == 0 || r > rows.min(cols) {
                    return Err(Error::RankTooLarge { mode: q, requested: r, max: rows.min(cols) });
                }
                r
            }
        };
        let u = svd.u.as_ref().expect("svd computed with u");
        let vt = svd.v_t.as_ref().expect("svd computed with v_t");
        y_mats.push(u.columns(0, rank).into_owned());
        x_mats.push(vt.rows(0, rank).transpose());
        report.modes.push(ModeReduction {
            mode: q,
            largest_neglected: sv.get(rank).copied().unwrap_or(0.0),
            singular_values: sv,
            rank,
        });
    }
    let mut modes = Vec::with_capacity(d);
    for q in 1..=d {
        let y = &y_mats[q - 1];
        let x = &x_mats[q - 1];
        let e = -(y.transpose() * real_part(&data.loewner[q - 1]) * x);
        if rcond_estimate(&e) < RCOND_TOL {
            return Err(Error::SingularLoewner { mode: q, rows: e.nrows(), cols: e.ncols() });
        }
        let a = -(y.transpose() * real_part(&data.shifted[q - 1]) * x);
        let b = y.transpose() * real_part(&data.v[q - 1]);
        let c = real_part(&data.w[q - 1]) * x;
        modes.push(ModeSystem::new(e, a, b, c));
    }
    let mut couplings = BTreeMap::new();
    for (&(i, j), xi) in &data.coupling {
        couplings.insert((i, j), y_mats[j - 1].transpose() * real_part(xi) * &x_mats[i - 1]);
    }
    Ok((LssModel::new(modes, couplings, 1, 1), report))
}

/// Applies the unitary conjugate-pair transform that makes the data real.
///
/// Requires every word set to be closed under conjugation of its points. For
/// each conjugate pair of rows (or columns) the 2x2 block maps
/// `[x, conj(x)]` to `[sqrt(2) Re x, sqrt(2) Im x]`; self-conjugate (all-real)
/// words pass through unchanged. Transfer-function content is preserved, so
/// realizations built from the result are equivalent to complex-data ones.
pub fn realify(data: &LoewnerData) -> Result<LoewnerData> {
    let d = data.num_modes;
    // left pairings act on V rows (theta words), right pairings on W columns
    // (gamma words); word lists are recovered from the selector dimensions and
    // the stored point metadata is untouched.
    let j_left: Vec<DMatrix<C64>> = (0..d)
        .map(|q| pairing_transform(&data.theta_words[q]))
        .collect::<Result<_>>()?;
    let j_right: Vec<DMatrix<C64>> = (0..d)
        .map(|q| pairing_transform(&data.gamma_words[q]))
        .collect::<Result<_>>()?;

    let mut out = data.clone();
    for q in 0..d {
        let jl = &j_left[q];
        let jr_h = j_right[q].adjoint();
        out.loewner[q] = jl * &data.loewner[q] * &jr_h;
        out.shifted[q] = jl * &data.shifted[q] * &jr_h;
        out.v[q] = jl * &data.v[q];
        out.w[q] = &data.w[q] * &jr_h;
        out.selectors.lambda[q] = &j_right[q] * &data.selectors.lambda[q] * &jr_h;
        out.selectors.m[q] = jl * &data.selectors.m[q] * jl.adjoint();
        out.selectors.r[q] = &data.selectors.r[q] * &jr_h;
        out.selectors.l[q] = jl * &data.selectors.l[q];
    }
    for ((i, j), xi) in &data.coupling {
        out.coupling.insert(
            (*i, *j),
            &j_left[*j - 1] * xi * j_right[*i - 1].adjoint(),
        );
    }
    for i in 1..=d {
        for g in 1..=d {
            out.selectors.s[i - 1][g - 1] =
                &j_right[i - 1] * &data.selectors.s[i - 1][g - 1] * j_right[g - 1].adjoint();
        }
    }
    for j in 1..=d {
        for h in 1..=d {
            out.selectors.t[j - 1][h - 1] =
                &j_left[h - 1] * &data.selectors.t[j - 1][h - 1] * j_left[j - 1].adjoint();
        }
    }

    // verify, then discard the imaginary dust
    let (mut im, mut scale) = imag_and_scale(&out);
    for sel in out
        .selectors
        .s
        .iter()
        .chain(out.selectors.t.iter())
        .flatten()
        .chain(out.selectors.lambda.iter())
        .chain(out.selectors.m.iter())
        .chain(out.selectors.r.iter())
        .chain(out.selectors.l.iter())
    {
        im = im.max(max_imag(sel));
        scale = scale.max(max_abs(sel));
    }
    if im > 1e-12 * scale.max(1.0) {
        return Err(Error::NotConjugateClosed {
            word: format!("<value symmetry violated: max |Im| = {im:.3e} after transform>"),
        });
    }
    let zero_im = |m: &mut DMatrix<C64>| {
        for v in m.iter_mut() {
            *v = C64::new(v.re, 0.0);
        }
    };
    for q in 0..d {
        zero_im(&mut out.loewner[q]);
        zero_im(&mut out.shifted[q]);
        zero_im(&mut out.v[q]);
        zero_im(&mut out.w[q]);
        zero_im(&mut out.selectors.lambda[q]);
        zero_im(&mut out.selectors.m[q]);
        zero_im(&mut out.selectors.r[q]);
        zero_im(&mut out.selectors.l[q]);
    }
    for xi in out.coupling.values_mut() {
        zero_im(xi);
    }
    for row in out.selectors.s.iter_mut().chain(out.selectors.t.iter_mut()) {
        for m in row.iter_mut() {
            zero_im(m);
        }
    }
    out.realified = true;
    out.j_left = Some(j_left);
    out.j_right = Some(j_right);
    Ok(out)
}

/// The per-mode unitary built from the conjugation involution of a word list.
fn pairing_transform(words: &[crate::tuples::Word]) -> Result<DMatrix<C64>> {
    let n = words.len();
    let partner: Vec<usize> = words
        .iter()
        .map(|w| {
            let conj = w.conj();
            words
                .iter()
                .position(|cand| cand == &conj)
                .ok_or_else(|| Error::NotConjugateClosed { word: w.to_string() })
        })
        .collect::<Result<_>>()?;
    for (a, &b) in partner.iter().enumerate() {
        if partner[b] != a {
            return Err(Error::NotConjugateClosed { word: words[a].to_string() });
        }
    }
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mi = C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
    let pi = C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let mut j = DMatrix::<C64>::zeros(n, n);
    for a in 0..n {
        let b = partner[a];
        if a == b {
            j[(a, a)] = C64::new(1.0, 0.0);
        } else if a < b {
            j[(a, a)] = inv_sqrt2;
            j[(a, b)] = inv_sqrt2;
            j[(b, a)] = mi;
            j[(b, b)] = pi;
        }
    }
    Ok(j)
}
