//! Linear switched systems: model storage, validation, resolvent solves and
//! mode-wise equivalence transforms.
//!
//! A model holds `D` modes, each a quadruple `(E_q, A_q, B_q, C_q)` with
//! nonsingular `E_q`, plus coupling matrices `K_(q1,q2)` applied to the state
//! when switching from mode `q1` to mode `q2`. Couplings between identical
//! modes are the identity and are never stored; absent off-diagonal couplings
//! default to the identity, which requires equal state dimensions.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Reciprocal-condition threshold below which a matrix is treated as singular.
pub const RCOND_TOL: f64 = 1e-14;

/// The quadruple (E, A, B, C) active in one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSystem {
    pub e: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl ModeSystem {
    pub fn new(e: DMatrix<f64>, a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Self {
        Self { e, a, b, c }
    }

    /// State dimension n_q.
    pub fn dim(&self) -> usize {
        self.e.nrows()
    }
}

/// A continuous-time linear switched system.
#[derive(Debug, Clone, PartialEq)]
pub struct LssModel {
    modes: Vec<ModeSystem>,
    /// Coupling matrices keyed by (from, to), 1-based modes, from != to.
    couplings: BTreeMap<(usize, usize), DMatrix<f64>>,
    num_inputs: usize,
    num_outputs: usize,
}

/// One validation failure, identifying the offending mode or coupling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.rule)
    }
}

impl LssModel {
    /// Stores the model as given; call [`LssModel::validate`] to check invariants.
    pub fn new(
        modes: Vec<ModeSystem>,
        couplings: BTreeMap<(usize, usize), DMatrix<f64>>,
        num_inputs: usize,
        num_outputs: usize,
    ) -> Self {
        Self { modes, couplings, num_inputs, num_outputs }
    }

    /// SISO model with identity E matrices and default couplings.
    pub fn siso_identity_e(ab: Vec<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)>) -> Self {
        let modes = ab
            .into_iter()
            .map(|(a, b, c)| {
                let n = a.nrows();
                ModeSystem::new(DMatrix::identity(n, n), a, b, c)
            })
            .collect();
        Self::new(modes, BTreeMap::new(), 1, 1)
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    /// State dimension of mode `q` (1-based).
    pub fn dim(&self, q: usize) -> usize {
        self.modes[q - 1].dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(ModeSystem::dim).collect()
    }

    pub fn mode(&self, q: usize) -> &ModeSystem {
        &self.modes[q - 1]
    }

    pub fn modes(&self) -> &[ModeSystem] {
        &self.modes
    }

    /// Stored coupling K_(from,to), if any.
    pub fn coupling(&self, from: usize, to: usize) -> Option<&DMatrix<f64>> {
        self.couplings.get(&(from, to))
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), DMatrix<f64>> {
        &self.couplings
    }

    /// The coupling K_(from,to) as a dense matrix, resolving defaults to the identity.
    pub fn coupling_matrix(&self, from: usize, to: usize) -> Result<DMatrix<f64>> {
        if from == to {
            let n = self.dim(from);
            return Ok(DMatrix::identity(n, n));
        }
        match self.couplings.get(&(from, to)) {
            Some(k) => Ok(k.clone()),
            None => {
                let (nf, nt) = (self.dim(from), self.dim(to));
                if nf != nt {
                    return Err(Error::DimensionMismatch {
                        context: format!(
                            "default identity coupling {from}->{to} needs equal dims, got {nf} and {nt}"
                        ),
                    });
                }
                Ok(DMatrix::identity(nf, nf))
            }
        }
    }

    /// Applies K_(from,to) to a complex vector, avoiding the allocation for defaults.
    pub fn apply_coupling(&self, from: usize, to: usize, x: &DVector<C64>) -> Result<DVector<C64>> {
        if from == to {
            return Ok(x.clone());
        }
        match self.couplings.get(&(from, to)) {
            Some(k) => Ok(k.map(|v| C64::new(v, 0.0)) * x),
            None => {
                if self.dim(from) != self.dim(to) {
                    return Err(Error::DimensionMismatch {
                        context: format!("no coupling {from}->{to} and dims differ"),
                    });
                }
                Ok(x.clone())
            }
        }
    }

    /// Checks every structural invariant and returns the list of violations.
    ///
    /// An empty list means all downstream operations' structural preconditions hold.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let d = self.num_modes();
        if d == 0 {
            out.push(Violation {
                location: "model".into(),
                rule: "at least one mode required".into(),
            });
            return out;
        }
        for (idx, ms) in self.modes.iter().enumerate() {
            let q = idx + 1;
            let n = ms.e.nrows();
            let loc = |mat: &str| format!("mode {q} matrix {mat}");
            if ms.e.ncols() != n {
                out.push(Violation { location: loc("E"), rule: "must be square".into() });
            }
            if ms.a.nrows() != n || ms.a.ncols() != n {
                out.push(Violation {
                    location: loc("A"),
                    rule: format!("expected {n}x{n}, got {}x{}", ms.a.nrows(), ms.a.ncols()),
                });
            }
            if ms.b.nrows() != n || ms.b.ncols() != self.num_inputs {
                out.push(Violation {
                    location: loc("B"),
                    rule: format!("expected {n}x{}, got {}x{}", self.num_inputs, ms.b.nrows(), ms.b.ncols()),
                });
            }
            if ms.c.nrows() != self.num_outputs || ms.c.ncols() != n {
                out.push(Violation {
                    location: loc("C"),
                    rule: format!("expected {}x{n}, got {}x{}", self.num_outputs, ms.c.nrows(), ms.c.ncols()),
                });
            }
            for (name, mat) in [("E", &ms.e), ("A", &ms.a), ("B", &ms.b), ("C", &ms.c)] {
                if mat.iter().any(|v| !v.is_finite()) {
                    out.push(Violation { location: loc(name), rule: "non-finite entry".into() });
                }
            }
            if ms.e.ncols() == n && ms.e.iter().all(|v| v.is_finite()) && rcond_estimate(&ms.e) < RCOND_TOL {
                out.push(Violation {
                    location: format!("mode {q}"),
                    rule: format!("E_{q} singular (rcond below {RCOND_TOL:e})"),
                });
            }
        }
        for (&(from, to), k) in &self.couplings {
            let loc = format!("coupling {from}->{to}");
            if from == to {
                out.push(Violation {
                    location: loc.clone(),
                    rule: "self-couplings are implicitly the identity and must not be stored".into(),
                });
                continue;
            }
            if from == 0 || from > d || to == 0 || to > d {
                out.push(Violation { location: loc, rule: format!("mode out of range 1..={d}") });
                continue;
            }
            let (nf, nt) = (self.dim(from), self.dim(to));
            if k.nrows() != nt || k.ncols() != nf {
                out.push(Violation {
                    location: loc.clone(),
                    rule: format!("expected {nt}x{nf}, got {}x{}", k.nrows(), k.ncols()),
                });
            }
            if k.iter().any(|v| !v.is_finite()) {
                out.push(Violation { location: loc, rule: "non-finite entry".into() });
            }
        }
        // Absent couplings fall back to the identity, which needs equal dims.
        for from in 1..=d {
            for to in 1..=d {
                if from != to
                    && !self.couplings.contains_key(&(from, to))
                    && self.dim(from) != self.dim(to)
                {
                    out.push(Violation {
                        location: format!("coupling {from}->{to}"),
                        rule: format!(
                            "default identity coupling needs equal dims, got {} and {}",
                            self.dim(from),
                            self.dim(to)
                        ),
                    });
                }
            }
        }
        out
    }

    /// Solves (s E_q - A_q) X = RHS by a factorized solve.
    pub fn resolvent_solve(&self, q: usize, s: C64, rhs: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let lu = self.resolvent_lu(q, s)?;
        Ok(lu.solve(rhs))
    }

    /// Factorization of (s E_q - A_q), reusable across right-hand sides.
    pub fn resolvent_lu(&self, q: usize, s: C64) -> Result<ResolventLu> {
        let ms = self.mode(q);
        let n = ms.dim();
        let mut shifted = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                shifted[(i, j)] = s * ms.e[(i, j)] - ms.a[(i, j)];
            }
        }
        let lu = shifted.lu();
        if rcond_estimate_lu(&lu) < RCOND_TOL {
            return Err(Error::SingularResolvent { mode: q, point: s, level: None });
        }
        Ok(ResolventLu { lu })
    }

    /// Mode-wise two-sided transform preserving all generalized transfer functions.
    ///
    /// Returns the model with `E'_q = ZL_q E_q ZR_q`, `A'_q = ZL_q A_q ZR_q`,
    /// `B'_q = ZL_q B_q`, `C'_q = C_q ZR_q` and `K'_(q1,q2) = ZL_(q2) K_(q1,q2) ZR_(q1)`.
    /// Default couplings are materialized since they are no longer the identity.
    pub fn equivalence_transform(
        &self,
        zl: &[DMatrix<f64>],
        zr: &[DMatrix<f64>],
    ) -> Result<LssModel> {
        let d = self.num_modes();
        if zl.len() != d || zr.len() != d {
            return Err(Error::DimensionMismatch {
                context: format!("expected {d} transform pairs, got {} left / {} right", zl.len(), zr.len()),
            });
        }
        for q in 1..=d {
            let n = self.dim(q);
            for (side, z) in [("left", &zl[q - 1]), ("right", &zr[q - 1])] {
                if z.nrows() != n || z.ncols() != n {
                    return Err(Error::DimensionMismatch {
                        context: format!("transform for mode {q} ({side}) must be {n}x{n}"),
                    });
                }
                if rcond_estimate(z) < RCOND_TOL {
                    return Err(Error::SingularTransform { mode: q, side });
                }
            }
        }
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(idx, ms)| {
                let (l, r) = (&zl[idx], &zr[idx]);
                ModeSystem::new(l * &ms.e * r, l * &ms.a * r, l * &ms.b, &ms.c * r)
            })
            .collect();
        let mut couplings = BTreeMap::new();
        for from in 1..=d {
            for to in 1..=d {
                if from != to {
                    let k = self.coupling_matrix(from, to)?;
                    couplings.insert((from, to), &zl[to - 1] * k * &zr[from - 1]);
                }
            }
        }
        Ok(LssModel::new(modes, couplings, self.num_inputs, self.num_outputs))
    }
}

/// LU factorization of a shifted pencil.
pub struct ResolventLu {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl ResolventLu {
    pub fn solve(&self, rhs: &DMatrix<C64>) -> DMatrix<C64> {
        self.lu.solve(rhs).expect("pencil dimensions checked at factorization")
    }

    pub fn solve_vector(&self, rhs: &DVector<C64>) -> DVector<C64> {
        self.lu.solve(rhs).expect("pencil dimensions checked at factorization")
    }
}

/// A finite switching signal: ordered (mode, dwell duration) events.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSignal {
    events: Vec<(usize, f64)>,
}

impl SwitchingSignal {
    pub fn new(events: Vec<(usize, f64)>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InvalidSignal { reason: "no events".into() });
        }
        for &(q, dur) in &events {
            if q == 0 {
                return Err(Error::InvalidSignal { reason: "modes are 1-based".into() });
            }
            if dur.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !dur.is_finite() {
                return Err(Error::InvalidSignal {
                    reason: format!("duration {dur} for mode {q} must be strictly positive"),
                });
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[(usize, f64)] {
        &self.events
    }

    /// Cumulative switch boundaries T_1..T_k.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.events
            .iter()
            .map(|&(_, d)| {
                acc += d;
                acc
            })
            .collect()
    }

    pub fn total_time(&self) -> f64 {
        self.events.iter().map(|&(_, d)| d).sum()
    }

    pub fn max_mode(&self) -> usize {
        self.events.iter().map(|&(q, _)| q).max().unwrap_or(0)
    }
}

/// Cheap reciprocal-condition estimate from an LU factorization: the ratio of
/// the smallest to largest |U_ii|. Zero pivots map to zero.
pub(crate) fn rcond_estimate_lu(lu: &nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let n = u.nrows().min(u.ncols());
    if n == 0 {
        return 0.0;
    }
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    for i in 0..n {
        let p = u[(i, i)].norm();
        min = min.min(p);
        max = max.max(p);
    }
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Reciprocal-condition estimate of a real matrix.
pub fn rcond_estimate(m: &DMatrix<f64>) -> f64 {
    rcond_estimate_c(&promote(m))
}

/// Reciprocal-condition estimate of a complex matrix.
pub fn rcond_estimate_c(m: &DMatrix<C64>) -> f64 {
    if m.nrows() != m.ncols() || m.is_empty() {
        return 0.0;
    }
    rcond_estimate_lu(&m.clone().lu())
}

/// Promotes a real matrix to complex.
pub fn promote(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}
