//! Loewner and shifted-Loewner pencils for switched systems, assembled either
//! from state-space matrices or from transfer-function samples, plus the
//! Sylvester-identity residual checks that tie the two routes together.
//!
//! Per mode q the pencil factors as `L_q = -O_q E_q R_q` and
//! `Ls_q = -O_q A_q R_q`, where the generalized controllability matrix `R_q`
//! stacks resolvent chains over the right words of mode q and the generalized
//! observability matrix `O_q` stacks the dual chains over left words. The same
//! matrices are, entry by entry, divided differences of transfer-function
//! samples: the sample route reproduces the factorization route without ever
//! touching the model.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lss::{C64, LssModel, promote};
use crate::transfer::{ResolventCache, SampleSet, splice_at_seam};
use crate::tuples::{GammaSet, SelectorData, ThetaSet, Word, selector_data};

/// Generalized controllability/observability matrices of a model for one
/// tuple-set pair.
#[derive(Debug, Clone)]
pub struct GenGramians {
    /// r[q-1]: n_q x k_q, column u is the chain for right word u of mode q.
    pub r: Vec<DMatrix<C64>>,
    /// o[q-1]: l_q x n_q, row v is the chain for left word v of mode q.
    pub o: Vec<DMatrix<C64>>,
}

/// Per-mode pencils and data vectors, with the selector matrices attached.
#[derive(Debug, Clone)]
pub struct LoewnerData {
    pub num_modes: usize,
    /// L_q, one per mode: l_q x k_q.
    pub loewner: Vec<DMatrix<C64>>,
    /// Ls_q, one per mode.
    pub shifted: Vec<DMatrix<C64>>,
    /// V_q: l_q x 1.
    pub v: Vec<DMatrix<C64>>,
    /// W_q: 1 x k_q.
    pub w: Vec<DMatrix<C64>>,
    /// Xi_(i,j) keyed by the ordered pair (i, j), i != j: l_j x k_i.
    pub coupling: BTreeMap<(usize, usize), DMatrix<C64>>,
    pub selectors: SelectorData,
    /// Right words per mode, in the column order of the pencils.
    pub gamma_words: Vec<Vec<Word>>,
    /// Left words per mode, in the row order of the pencils.
    pub theta_words: Vec<Vec<Word>>,
    /// Distinct interpolation points per mode: points_by_mode[q-1] holds every
    /// point that appears paired with mode q in some word coordinate.
    pub points_by_mode: Vec<Vec<C64>>,
    pub realified: bool,
    /// Left/right realification transforms, present once realified.
    pub j_left: Option<Vec<DMatrix<C64>>>,
    pub j_right: Option<Vec<DMatrix<C64>>>,
}

impl LoewnerData {
    /// Xi_(i,j), if the mode pair is stored.
    pub fn xi(&self, i: usize, j: usize) -> Option<&DMatrix<C64>> {
        self.coupling.get(&(i, j))
    }

    /// (rows, cols) of the mode-q pencil.
    pub fn pencil_dims(&self, q: usize) -> (usize, usize) {
        (self.loewner[q - 1].nrows(), self.loewner[q - 1].ncols())
    }
}

fn collect_points(gamma: &GammaSet, theta: &ThetaSet) -> Vec<Vec<C64>> {
    let mut by_mode: Vec<Vec<C64>> = vec![Vec::new(); gamma.num_modes];
    for w in gamma.all_words().chain(theta.all_words()) {
        for (&q, &p) in w.modes.iter().zip(&w.points) {
            let bucket = &mut by_mode[q - 1];
            if !bucket.iter().any(|c| c.re == p.re && c.im == p.im) {
                bucket.push(p);
            }
        }
    }
    by_mode
}

/// Generalized controllability matrices: column u of `R_q` is the resolvent
/// chain of right word u of mode q.
pub fn controllability_matrices(model: &LssModel, gamma: &GammaSet) -> Result<Vec<DMatrix<C64>>> {
    let mut cache = ResolventCache::new(model);
    controllability_with_cache(&mut cache, gamma)
}

pub(crate) fn controllability_with_cache(
    cache: &mut ResolventCache<'_>,
    gamma: &GammaSet,
) -> Result<Vec<DMatrix<C64>>> {
    let model = cache.model();
    let mut out = Vec::with_capacity(gamma.num_modes);
    for q in 1..=gamma.num_modes {
        let words = gamma.mode_words(q);
        let n = model.dim(q);
        let mut r = DMatrix::<C64>::zeros(n, words.len());
        for (u, word) in words.iter().enumerate() {
            debug_assert_eq!(word.first_mode(), q);
            let col = cache.reach_chain(word)?;
            r.set_column(u, &col);
        }
        out.push(r);
    }
    Ok(out)
}

/// Generalized observability matrices: row v of `O_q` is the dual chain of
/// left word v of mode q. Computed through transposed factorized solves.
pub fn observability_matrices(model: &LssModel, theta: &ThetaSet) -> Result<Vec<DMatrix<C64>>> {
    let mut out = Vec::with_capacity(theta.num_modes);
    for q in 1..=theta.num_modes {
        let words = theta.mode_words(q);
        let n = model.dim(q);
        let mut o = DMatrix::<C64>::zeros(words.len(), n);
        for (v, word) in words.iter().enumerate() {
            debug_assert_eq!(word.last_mode(), q);
            let row = obs_chain(model, word)?;
            for j in 0..n {
                o[(v, j)] = row[j];
            }
        }
        out.push(o);
    }
    Ok(out)
}

/// The row chain `C_(q1) Phi_(q1)(m1) K .. Phi_(qj)(mj)` of a left word,
/// computed as a column chain on the transposed pencils.
fn obs_chain(model: &LssModel, word: &crate::tuples::Word) -> Result<DVector<C64>> {
    let k = word.len();
    let first = word.modes[0];
    let c = &model.mode(first).c;
    let mut y: DVector<C64> =
        DVector::from_iterator(model.dim(first), c.row(0).iter().map(|&v| C64::new(v, 0.0)));
    for t in 0..k {
        let q = word.modes[t];
        let s = word.points[t];
        let ms = model.mode(q);
        let n = ms.dim();
        let mut shifted_t = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // transpose of (s E - A)
                shifted_t[(i, j)] = s * ms.e[(j, i)] - ms.a[(j, i)];
            }
        }
        let lu = shifted_t.lu();
        if crate::lss::rcond_estimate_lu(&lu) < crate::lss::RCOND_TOL {
            return Err(Error::SingularResolvent { mode: q, point: s, level: Some(t + 1) });
        }
        y = lu.solve(&y).expect("square system");
        if t + 1 < k {
            // K_(b,a)^T with a = modes[t], b = modes[t+1]
            let (a, b) = (word.modes[t], word.modes[t + 1]);
            y = apply_coupling_transposed(model, b, a, &y)?;
        }
    }
    Ok(y)
}

fn apply_coupling_transposed(
    model: &LssModel,
    from: usize,
    to: usize,
    y: &DVector<C64>,
) -> Result<DVector<C64>> {
    if from == to {
        return Ok(y.clone());
    }
    match model.coupling(from, to) {
        Some(k) => Ok(promote(k).transpose() * y),
        None => {
            if model.dim(from) != model.dim(to) {
                return Err(Error::DimensionMismatch {
                    context: format!("no coupling {from}->{to} and dims differ"),
                });
            }
            Ok(y.clone())
        }
    }
}

/// Both generalized matrices at once.
pub fn gen_gramians(model: &LssModel, gamma: &GammaSet, theta: &ThetaSet) -> Result<GenGramians> {
    Ok(GenGramians {
        r: controllability_matrices(model, gamma)?,
        o: observability_matrices(model, theta)?,
    })
}

/// Assembles the Loewner data from state-space matrices:
/// `L_q = -O_q E_q R_q`, `Ls_q = -O_q A_q R_q`, `V_q = O_q B_q`,
/// `W_q = C_q R_q`, `Xi_(i,j) = O_j K_(i,j) R_i`.
pub fn from_state(model: &LssModel, gamma: &GammaSet, theta: &ThetaSet) -> Result<LoewnerData> {
    let d = gamma.num_modes;
    if theta.num_modes != d {
        return Err(Error::DimensionMismatch {
            context: format!("tuple sets disagree on mode count: {d} vs {}", theta.num_modes),
        });
    }
    let grams = gen_gramians(model, gamma, theta)?;
    let mut loewner = Vec::with_capacity(d);
    let mut shifted = Vec::with_capacity(d);
    let mut v = Vec::with_capacity(d);
    let mut w = Vec::with_capacity(d);
    for q in 1..=d {
        let r = &grams.r[q - 1];
        let o = &grams.o[q - 1];
        let ms = model.mode(q);
        let e = promote(&ms.e);
        let a = promote(&ms.a);
        loewner.push(-(o * &e * r));
        shifted.push(-(o * &a * r));
        v.push(o * promote(&ms.b));
        w.push(promote(&ms.c) * r);
    }
    let mut coupling = BTreeMap::new();
    for i in 1..=d {
        for j in 1..=d {
            if i != j {
                let k = promote(&model.coupling_matrix(i, j)?);
                coupling.insert((i, j), &grams.o[j - 1] * k * &grams.r[i - 1]);
            }
        }
    }
    Ok(LoewnerData {
        num_modes: d,
        loewner,
        shifted,
        v,
        w,
        coupling,
        selectors: selector_data(gamma, theta),
        gamma_words: gamma.words.clone(),
        theta_words: theta.words.clone(),
        points_by_mode: collect_points(gamma, theta),
        realified: false,
        j_left: None,
        j_right: None,
    })
}

/// Assembles the same data from transfer-function samples alone.
///
/// Pencil entry (v, u) of mode q is the first-order divided difference in the
/// seam coordinate where left word v and right word u meet: with
/// `mu = last point of v` and `la = first point of u`,
/// `L_q(v,u) = (H(seam=mu) - H(seam=la)) / (mu - la)` and
/// `Ls_q(v,u) = (mu H(seam=mu) - la H(seam=la)) / (mu - la)`, all other
/// coordinates inherited from the two words. V, W and the coupling blocks are
/// sample values read off directly.
pub fn from_samples(samples: &SampleSet, gamma: &GammaSet, theta: &ThetaSet) -> Result<LoewnerData> {
    let d = gamma.num_modes;
    if theta.num_modes != d {
        return Err(Error::DimensionMismatch {
            context: format!("tuple sets disagree on mode count: {d} vs {}", theta.num_modes),
        });
    }
    let mut loewner = Vec::with_capacity(d);
    let mut shifted = Vec::with_capacity(d);
    let mut v_out = Vec::with_capacity(d);
    let mut w_out = Vec::with_capacity(d);
    for q in 1..=d {
        let lefts = theta.mode_words(q);
        let rights = gamma.mode_words(q);
        let (l, k) = (lefts.len(), rights.len());
        let mut lm = DMatrix::<C64>::zeros(l, k);
        let mut ls = DMatrix::<C64>::zeros(l, k);
        for (vi, vw) in lefts.iter().enumerate() {
            for (ui, uw) in rights.iter().enumerate() {
                let mu = vw.last_point();
                let la = uw.first_point();
                if mu == la {
                    return Err(Error::CoincidentPoints { point: mu });
                }
                let h_mu = samples.require(&splice_at_seam(vw, uw, mu))?;
                let h_la = samples.require(&splice_at_seam(vw, uw, la))?;
                let den = mu - la;
                lm[(vi, ui)] = (h_mu - h_la) / den;
                ls[(vi, ui)] = (mu * h_mu - la * h_la) / den;
            }
        }
        loewner.push(lm);
        shifted.push(ls);
        let mut v = DMatrix::<C64>::zeros(l, 1);
        for (vi, vw) in lefts.iter().enumerate() {
            v[(vi, 0)] = samples.require(vw)?;
        }
        v_out.push(v);
        let mut w = DMatrix::<C64>::zeros(1, k);
        for (ui, uw) in rights.iter().enumerate() {
            w[(0, ui)] = samples.require(uw)?;
        }
        w_out.push(w);
    }
    let mut coupling = BTreeMap::new();
    for i in 1..=d {
        for j in 1..=d {
            if i == j {
                continue;
            }
            let lefts = theta.mode_words(j);
            let rights = gamma.mode_words(i);
            let mut xi = DMatrix::<C64>::zeros(lefts.len(), rights.len());
            for (vi, vw) in lefts.iter().enumerate() {
                for (ui, uw) in rights.iter().enumerate() {
                    xi[(vi, ui)] = samples.require(&vw.concat(uw))?;
                }
            }
            coupling.insert((i, j), xi);
        }
    }
    Ok(LoewnerData {
        num_modes: d,
        loewner,
        shifted,
        v: v_out,
        w: w_out,
        coupling,
        selectors: selector_data(gamma, theta),
        gamma_words: gamma.words.clone(),
        theta_words: theta.words.clone(),
        points_by_mode: collect_points(gamma, theta),
        realified: false,
        j_left: None,
        j_right: None,
    })
}

/// One residual line of the Sylvester-identity report.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub equation: &'static str,
    pub mode: usize,
    /// Frobenius residual divided by the Frobenius norm of the left-hand side.
    pub residual: f64,
}

/// Scale-free residuals of every Sylvester identity the data must satisfy.
#[derive(Debug, Clone, Default)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    pub fn push(&mut self, equation: &'static str, mode: usize, lhs: &DMatrix<C64>, rhs: &DMatrix<C64>) {
        let scale = lhs.norm();
        let denom = if scale > 0.0 { scale } else { 1.0 };
        self.entries.push(ResidualEntry { equation, mode, residual: (lhs - rhs).norm() / denom });
    }
}

impl std::fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for e in &self.entries {
            writeln!(f, "{:<22} mode {}: {:.3e}", e.equation, e.mode, e.residual)?;
        }
        Ok(())
    }
}

/// Evaluates all Sylvester identities relating the model, the generalized
/// controllability/observability matrices, the selector matrices and the
/// pencil data. Residuals are Frobenius norms normalized by the left-hand
/// side; exact-arithmetic-valid data drives them to rounding level.
pub fn sylvester_residuals(
    model: &LssModel,
    gamma: &GammaSet,
    theta: &ThetaSet,
    data: &LoewnerData,
) -> Result<ResidualReport> {
    let d = data.num_modes;
    let sel = &data.selectors;
    let grams = gen_gramians(model, gamma, theta)?;
    // under realification the chains transform with the same unitary pair
    let (r_mats, o_mats): (Vec<_>, Vec<_>) = if data.realified {
        let jl = data.j_left.as_ref().expect("realified data stores transforms");
        let jr = data.j_right.as_ref().expect("realified data stores transforms");
        (
            (0..d).map(|q| &grams.r[q] * jr[q].adjoint()).collect(),
            (0..d).map(|q| &jl[q] * &grams.o[q]).collect(),
        )
    } else {
        (grams.r.clone(), grams.o.clone())
    };

    let mut report = ResidualReport::default();
    for g in 1..=d {
        let ms = model.mode(g);
        let (e, a) = (promote(&ms.e), promote(&ms.a));
        let b = promote(&ms.b);
        let c = promote(&ms.c);
        let rg = &r_mats[g - 1];
        let og = &o_mats[g - 1];

        // controllability: A_g R_g + sum_i K_(i,g) R_i S_i^(g) + B_g R^(g) = E_g R_g Lambda_g
        let mut lhs = &a * rg + &b * &sel.r[g - 1];
        for i in 1..=d {
            let s_ig = sel.s_mat(i, g);
            if s_ig.iter().all(|x| x.norm() == 0.0) {
                continue;
            }
            let k = promote(&model.coupling_matrix(i, g)?);
            lhs += k * &r_mats[i - 1] * s_ig;
        }
        let rhs = &e * rg * &sel.lambda[g - 1];
        report.push("controllability", g, &lhs, &rhs);

        // observability: O_h A_h + sum_j T_j^(h) O_j K_(h,j) + L^(h) C_h = M_h O_h E_h
        let mut lhs = og * &a + &sel.l[g - 1] * &c;
        for j in 1..=d {
            let t_jh = sel.t_mat(j, g);
            if t_jh.iter().all(|x| x.norm() == 0.0) {
                continue;
            }
            let k = promote(&model.coupling_matrix(g, j)?);
            lhs += t_jh * &o_mats[j - 1] * k;
        }
        let rhs = &sel.m[g - 1] * og * &e;
        report.push("observability", g, &lhs, &rhs);
    }

    report.entries.extend(pencil_residuals(data).entries);
    Ok(report)
}

/// The pencil identities alone; these need no model, only the data.
pub fn pencil_residuals(data: &LoewnerData) -> ResidualReport {
    let d = data.num_modes;
    let sel = &data.selectors;
    let mut report = ResidualReport::default();
    for h in 1..=d {
        let lm = &data.loewner[h - 1];
        let ls = &data.shifted[h - 1];
        let v = &data.v[h - 1];
        let w = &data.w[h - 1];
        let lam = &sel.lambda[h - 1];
        let m = &sel.m[h - 1];
        let r = &sel.r[h - 1];
        let l = &sel.l[h - 1];

        // Ls_h = L_h Lambda_h + V_h R^(h) + sum_i Xi_(i,h) S_i^(h)
        let mut rhs = lm * lam + v * r;
        for i in 1..=d {
            if let Some(xi) = data.xi(i, h) {
                rhs += xi * sel.s_mat(i, h);
            }
        }
        report.push("pencil-right", h, ls, &rhs);

        // Ls_h = M_h L_h + L^(h) W_h + sum_j T_j^(h) Xi_(h,j)
        let mut rhs = m * lm + l * w;
        for j in 1..=d {
            if let Some(xi) = data.xi(h, j) {
                rhs += sel.t_mat(j, h) * xi;
            }
        }
        report.push("pencil-left", h, ls, &rhs);

        // M_h L_h - L_h Lambda_h = (V_h R - L W_h) + sum_j (Xi_(j,h) S_j^(h) - T_j^(h) Xi_(h,j))
        let lhs = m * lm - lm * lam;
        let mut rhs = v * r - l * w;
        for j in 1..=d {
            if let Some(xi) = data.xi(j, h) {
                rhs += xi * sel.s_mat(j, h);
            }
            if let Some(xi) = data.xi(h, j) {
                rhs -= sel.t_mat(j, h) * xi;
            }
        }
        report.push("loewner-sylvester", h, &lhs, &rhs);

        // M_h Ls_h - Ls_h Lambda_h =
        //   (M_h V_h R - L W_h Lambda_h) + sum_j (M_h Xi_(j,h) S_j^(h) - T_j^(h) Xi_(h,j) Lambda_h)
        let lhs = m * ls - ls * lam;
        let mut rhs = m * v * r - l * w * lam;
        for j in 1..=d {
            if let Some(xi) = data.xi(j, h) {
                rhs += m * xi * sel.s_mat(j, h);
            }
            if let Some(xi) = data.xi(h, j) {
                rhs -= sel.t_mat(j, h) * xi * lam;
            }
        }
        report.push("shifted-sylvester", h, &lhs, &rhs);
    }
    report
}
