//! Interpolation bookkeeping: mode/point words, the nested two-mode multi-tuples,
//! cyclic word sets for an arbitrary mode count, and the selector and shift
//! matrices (R, L, Lambda, M, S, T) attached to them.
//!
//! Right word sets are prefix-closed (dropping the leading mode/point pair of a
//! word yields another word of the set); left word sets are suffix-closed. The
//! enumeration order within a mode is group-major, depth ascending inside each
//! group, and fixes the row/column indexing of every matrix downstream.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lss::C64;

/// A mode word paired with interpolation points, e.g. `(1,2; s1,s2)`.
#[derive(Debug, Clone)]
pub struct Word {
    pub modes: Vec<usize>,
    pub points: Vec<C64>,
}

fn bits(x: f64) -> u64 {
    // collapse -0.0 and 0.0 so conjugated real points compare equal
    if x == 0.0 {
        0u64
    } else {
        x.to_bits()
    }
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes
            && self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| bits(a.re) == bits(b.re) && bits(a.im) == bits(b.im))
    }
}

impl Eq for Word {}

impl std::hash::Hash for Word {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.modes.hash(state);
        for p in &self.points {
            bits(p.re).hash(state);
            bits(p.im).hash(state);
        }
    }
}

impl Word {
    pub fn new(modes: Vec<usize>, points: Vec<C64>) -> Self {
        assert_eq!(modes.len(), points.len(), "word modes and points must pair up");
        assert!(!modes.is_empty(), "words have length >= 1");
        Self { modes, points }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first_mode(&self) -> usize {
        self.modes[0]
    }

    pub fn last_mode(&self) -> usize {
        *self.modes.last().unwrap()
    }

    pub fn first_point(&self) -> C64 {
        self.points[0]
    }

    pub fn last_point(&self) -> C64 {
        *self.points.last().unwrap()
    }

    /// Drops the leading (mode, point) pair; the prefix-closure parent.
    pub fn drop_first(&self) -> Option<Word> {
        (self.len() >= 2)
            .then(|| Word::new(self.modes[1..].to_vec(), self.points[1..].to_vec()))
    }

    /// Drops the trailing (mode, point) pair; the suffix-closure parent.
    pub fn drop_last(&self) -> Option<Word> {
        (self.len() >= 2).then(|| {
            Word::new(
                self.modes[..self.len() - 1].to_vec(),
                self.points[..self.len() - 1].to_vec(),
            )
        })
    }

    /// All points conjugated.
    pub fn conj(&self) -> Word {
        Word::new(self.modes.clone(), self.points.iter().map(C64::conj).collect())
    }

    /// Plain concatenation: `self` then `other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&other.modes);
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Word::new(modes, points)
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let modes: Vec<String> = self.modes.iter().map(|m| m.to_string()).collect();
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|p| {
                if p.im == 0.0 {
                    format!("{}", p.re)
                } else {
                    format!("{}{:+}i", p.re, p.im)
                }
            })
            .collect();
        write!(f, "({};{})", modes.join(","), pts.join(","))
    }
}

/// Right word sets, one ordered list per mode; words in `Gamma_q` start at mode q.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub num_modes: usize,
    pub words: Vec<Vec<Word>>,
    /// Group sizes (depths) the set was built from, shared by all modes.
    pub groups: Vec<usize>,
}

/// Left word sets, one ordered list per mode; words in `Theta_q` end at mode q.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSet {
    pub num_modes: usize,
    pub words: Vec<Vec<Word>>,
    pub groups: Vec<usize>,
}

impl GammaSet {
    pub fn mode_words(&self, q: usize) -> &[Word] {
        &self.words[q - 1]
    }

    pub fn count(&self, q: usize) -> usize {
        self.words[q - 1].len()
    }

    pub fn all_words(&self) -> impl Iterator<Item = &Word> {
        self.words.iter().flatten()
    }

    /// Dropping the leading pair of any word of length >= 2 yields a member.
    pub fn is_prefix_closed(&self) -> bool {
        self.all_words().all(|w| match w.drop_first() {
            None => true,
            Some(parent) => self
                .words
                .get(parent.first_mode() - 1)
                .is_some_and(|ws| ws.contains(&parent)),
        })
    }
}

impl ThetaSet {
    pub fn mode_words(&self, q: usize) -> &[Word] {
        &self.words[q - 1]
    }

    pub fn count(&self, q: usize) -> usize {
        self.words[q - 1].len()
    }

    pub fn all_words(&self) -> impl Iterator<Item = &Word> {
        self.words.iter().flatten()
    }

    /// Dropping the trailing pair of any word of length >= 2 yields a member.
    pub fn is_suffix_closed(&self) -> bool {
        self.all_words().all(|w| match w.drop_last() {
            None => true,
            Some(parent) => self
                .words
                .get(parent.last_mode() - 1)
                .is_some_and(|ws| ws.contains(&parent)),
        })
    }
}

/// Selector and shift matrices attached to a (Gamma, Theta) pair.
///
/// All matrices are stored complex so that realification can transform them
/// alongside the Loewner data; as built, the entries are real.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorData {
    /// R^(q): 1 x k_q, marks length-1 right words.
    pub r: Vec<DMatrix<C64>>,
    /// L^(q): l_q x 1, marks length-1 left words.
    pub l: Vec<DMatrix<C64>>,
    /// Lambda_q: k_q x k_q diagonal of the first point of each right word.
    pub lambda: Vec<DMatrix<C64>>,
    /// M_q: l_q x l_q diagonal of the last point of each left word.
    pub m: Vec<DMatrix<C64>>,
    /// s[i-1][g-1] = S_i^(g) (k_i x k_g): column u is e_(u-1) when right word u
    /// of mode g extends right word u-1 of mode i by one leading pair.
    pub s: Vec<Vec<DMatrix<C64>>>,
    /// t[j-1][h-1] = T_j^(h) (l_h x l_j): row v is e_(v-1)^T when left word v
    /// of mode h extends left word v-1 of mode j by one trailing pair.
    pub t: Vec<Vec<DMatrix<C64>>>,
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_disjoint(right: &[C64], left: &[C64]) -> Result<()> {
    for l in left {
        for r in right {
            if bits(l.re) == bits(r.re) && bits(l.im) == bits(r.im) {
                return Err(Error::PointOverlap { point: *l });
            }
        }
    }
    Ok(())
}

/// Nested multi-tuples for the two-mode case.
///
/// Group i consumes `2 * groups_right[i]` right points and produces, for each of
/// the two modes, words of depths `1..=groups_right[i]` whose modes alternate.
/// Within group i with local right points `l1, l2, ..., l(2m)`:
/// mode-1 words are `(l1)`, `(l3,l2)`, `(l5,l4,l1)`, ... and mode-2 words are
/// `(l2)`, `(l4,l1)`, `(l6,l3,l2)`, ...; left words are built dually with the
/// new point appended at the tail.
pub fn build_two_mode_tuples(
    right_points: &[C64],
    left_points: &[C64],
    groups_right: &[usize],
    groups_left: &[usize],
) -> Result<(GammaSet, ThetaSet)> {
    if groups_right.is_empty() || groups_right.contains(&0) {
        return Err(Error::InvalidInput("right group sizes must be positive".into()));
    }
    if groups_left.is_empty() || groups_left.contains(&0) {
        return Err(Error::InvalidInput("left group sizes must be positive".into()));
    }
    let need_right = 2 * groups_right.iter().sum::<usize>();
    let need_left = 2 * groups_left.iter().sum::<usize>();
    if right_points.len() != need_right {
        return Err(Error::CountMismatch {
            context: "two-mode right points",
            expected: need_right,
            got: right_points.len(),
        });
    }
    if left_points.len() != need_left {
        return Err(Error::CountMismatch {
            context: "two-mode left points",
            expected: need_left,
            got: left_points.len(),
        });
    }
    check_disjoint(right_points, left_points)?;

    let mut gamma = vec![Vec::new(), Vec::new()];
    let mut offset = 0;
    for &m in groups_right {
        let pts = &right_points[offset..offset + 2 * m];
        offset += 2 * m;
        // lambda_1(g) = (l_{2g-1}) :: lambda_2(g-1); lambda_2(g) = (l_{2g}) :: lambda_1(g-1)
        let mut w1: Vec<Word> = Vec::with_capacity(m);
        let mut w2: Vec<Word> = Vec::with_capacity(m);
        for g in 1..=m {
            if g == 1 {
                w1.push(Word::new(vec![1], vec![pts[0]]));
                w2.push(Word::new(vec![2], vec![pts[1]]));
            } else {
                let head1 = Word::new(vec![1], vec![pts[2 * g - 2]]);
                let head2 = Word::new(vec![2], vec![pts[2 * g - 1]]);
                w1.push(head1.concat(&w2[g - 2]));
                w2.push(head2.concat(&w1[g - 2]));
            }
        }
        gamma[0].extend(w1);
        gamma[1].extend(w2);
    }

    let mut theta = vec![Vec::new(), Vec::new()];
    let mut offset = 0;
    for &p in groups_left {
        let pts = &left_points[offset..offset + 2 * p];
        offset += 2 * p;
        // mu_1(h) = mu_2(h-1) :: (m_{2h-1}); mu_2(h) = mu_1(h-1) :: (m_{2h})
        let mut w1: Vec<Word> = Vec::with_capacity(p);
        let mut w2: Vec<Word> = Vec::with_capacity(p);
        for h in 1..=p {
            if h == 1 {
                w1.push(Word::new(vec![1], vec![pts[0]]));
                w2.push(Word::new(vec![2], vec![pts[1]]));
            } else {
                let tail1 = Word::new(vec![1], vec![pts[2 * h - 2]]);
                let tail2 = Word::new(vec![2], vec![pts[2 * h - 1]]);
                w1.push(w2[h - 2].concat(&tail1));
                w2.push(w1[h - 2].concat(&tail2));
            }
        }
        theta[0].extend(w1);
        theta[1].extend(w2);
    }

    Ok((
        GammaSet { num_modes: 2, words: gamma, groups: groups_right.to_vec() },
        ThetaSet { num_modes: 2, words: theta, groups: groups_left.to_vec() },
    ))
}

/// Cyclic word sets for `d` modes, one group of the given depth per mode.
///
/// The depth-i right word of mode q starts at q and descends cyclically
/// (q, q-1, q-2, ... wrapping mod d), extending the depth-(i-1) word of mode
/// q-1 with the fresh head point `right[q + d*(i-1)]`. Left words append the
/// fresh tail point `left[q + d*(i-1)]` to the depth-(i-1) word of a source
/// mode that itself cycles through the other modes (q-1, q-2, ..., restarting
/// every d-1 depths), which reproduces the alternating two-mode layout at
/// d = 2.
pub fn build_cyclic_tuples(
    d: usize,
    right_points: &[C64],
    left_points: &[C64],
    depth: usize,
) -> Result<(GammaSet, ThetaSet)> {
    if d == 0 || depth == 0 {
        return Err(Error::InvalidInput("mode count and depth must be positive".into()));
    }
    if d == 1 && depth > 1 {
        return Err(Error::InvalidInput(
            "cyclic layout with one mode supports depth 1 only".into(),
        ));
    }
    let need = d * depth;
    if right_points.len() != need {
        return Err(Error::CountMismatch { context: "cyclic right points", expected: need, got: right_points.len() });
    }
    if left_points.len() != need {
        return Err(Error::CountMismatch { context: "cyclic left points", expected: need, got: left_points.len() });
    }
    check_disjoint(right_points, left_points)?;

    // wraps x into 1..=d
    let wrap = |x: isize| -> usize { (x - 1).rem_euclid(d as isize) as usize + 1 };

    let mut gamma: Vec<Vec<Word>> = vec![Vec::with_capacity(depth); d];
    for i in 1..=depth {
        for q in 1..=d {
            let point = right_points[(q - 1) + d * (i - 1)];
            let w = if i == 1 {
                Word::new(vec![q], vec![point])
            } else {
                let src = wrap(q as isize - 1);
                let head = Word::new(vec![q], vec![point]);
                head.concat(&gamma[src - 1][i - 2])
            };
            gamma[q - 1].push(w);
        }
    }

    let mut theta: Vec<Vec<Word>> = vec![Vec::with_capacity(depth); d];
    for i in 1..=depth {
        for q in 1..=d {
            let point = left_points[(q - 1) + d * (i - 1)];
            let w = if i == 1 {
                Word::new(vec![q], vec![point])
            } else {
                let step = ((i - 2) % (d - 1)) + 1;
                let src = wrap(q as isize - step as isize);
                let tail = Word::new(vec![q], vec![point]);
                theta[src - 1][i - 2].concat(&tail)
            };
            theta[q - 1].push(w);
        }
    }

    Ok((
        GammaSet { num_modes: d, words: gamma, groups: vec![depth] },
        ThetaSet { num_modes: d, words: theta, groups: vec![depth] },
    ))
}

/// Builds the selector and shift matrices for a (Gamma, Theta) pair.
pub fn selector_data(gamma: &GammaSet, theta: &ThetaSet) -> SelectorData {
    let d = gamma.num_modes;
    let one = re(1.0);

    let r = (1..=d)
        .map(|q| {
            let ws = gamma.mode_words(q);
            DMatrix::from_fn(1, ws.len(), |_, u| if ws[u].len() == 1 { one } else { re(0.0) })
        })
        .collect();
    let l = (1..=d)
        .map(|q| {
            let ws = theta.mode_words(q);
            DMatrix::from_fn(ws.len(), 1, |v, _| if ws[v].len() == 1 { one } else { re(0.0) })
        })
        .collect();
    let lambda = (1..=d)
        .map(|q| {
            let ws = gamma.mode_words(q);
            DMatrix::from_fn(ws.len(), ws.len(), |i, j| {
                if i == j { ws[i].first_point() } else { re(0.0) }
            })
        })
        .collect();
    let m = (1..=d)
        .map(|q| {
            let ws = theta.mode_words(q);
            DMatrix::from_fn(ws.len(), ws.len(), |i, j| {
                if i == j { ws[i].last_point() } else { re(0.0) }
            })
        })
        .collect();

    // S_i^(g): word u of Gamma_g = (g, point) ++ word u-1 of Gamma_i
    let mut s = vec![Vec::with_capacity(d); d];
    for i in 1..=d {
        for g in 1..=d {
            let wi = gamma.mode_words(i);
            let wg = gamma.mode_words(g);
            let mut mat = DMatrix::zeros(wi.len(), wg.len());
            for u in 1..wg.len() {
                if u - 1 < wi.len() {
                    if let Some(parent) = wg[u].drop_first() {
                        if parent == wi[u - 1] {
                            mat[(u - 1, u)] = one;
                        }
                    }
                }
            }
            s[i - 1].push(mat);
        }
    }

    // T_j^(h): word v of Theta_h = word v-1 of Theta_j ++ (h, point)
    let mut t = vec![Vec::with_capacity(d); d];
    for j in 1..=d {
        for h in 1..=d {
            let wj = theta.mode_words(j);
            let wh = theta.mode_words(h);
            let mut mat = DMatrix::zeros(wh.len(), wj.len());
            for v in 1..wh.len() {
                if v - 1 < wj.len() {
                    if let Some(parent) = wh[v].drop_last() {
                        if parent == wj[v - 1] {
                            mat[(v, v - 1)] = one;
                        }
                    }
                }
            }
            t[j - 1].push(mat);
        }
    }

    SelectorData { r, l, lambda, m, s, t }
}

impl SelectorData {
    /// S_i^(g), 1-based modes.
    pub fn s_mat(&self, i: usize, g: usize) -> &DMatrix<C64> {
        &self.s[i - 1][g - 1]
    }

    /// T_j^(h), 1-based modes.
    pub fn t_mat(&self, j: usize, h: usize) -> &DMatrix<C64> {
        &self.t[j - 1][h - 1]
    }
}

/// Block-diagonal of upper Jordan shift blocks J_(g1), J_(g2), ... (ones on the
/// superdiagonal inside each block). The expected value of `sum_i S_i^(g)`.
pub fn block_jordan(groups: &[usize]) -> DMatrix<C64> {
    let n: usize = groups.iter().sum();
    let mut m = DMatrix::zeros(n, n);
    let mut off = 0;
    for &g in groups {
        for u in 1..g {
            m[(off + u - 1, off + u)] = re(1.0);
        }
        off += g;
    }
    m
}
