//! Weight data, sigma sequences, Drinfel'd polynomials, irreducibility and
//! TD-pair verification for modules pulled back along `phi_s` / `iota_t`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldConfig, Scalar};
use crate::linalg::{unit, Matrix, Poly, Subspace, Vector};
use crate::loopmod::{build_evaluation, tensor, AlgebraKind, EvalFactor, LoopError, ModuleSpec};
use crate::modp;
use crate::qstrings::QString;
use crate::tdalg::{phi_s, theta_sequences, TDPairCandidate, TModule, TdError, ThetaData};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("k is not diagonal in the module basis")]
    NonDiagonal,
    #[error("the spectrum of k is not a single q^2-ladder")]
    NonLadder,
    #[error("the top weight space has dimension {0}, expected 1")]
    DegenerateTop(usize),
    #[error(transparent)]
    Td(#[from] TdError),
    #[error(transparent)]
    Loop(#[from] LoopError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightData {
    pub s: Scalar,
    pub d: usize,
    /// Basis indices of `U_0, ..., U_d`.
    pub blocks: Vec<Vec<usize>>,
    pub dims: Vec<usize>,
}

/// Groups basis vectors by the eigenvalue `s q^(2i-d)` of `k`.
pub fn weight_decomposition(field: &FieldConfig, tm: &TModule) -> Result<WeightData, AnalysisError> {
    if !tm.k.is_diagonal() {
        return Err(AnalysisError::NonDiagonal);
    }
    let diag = tm.k.diag_entries();
    let base = &diag[0];
    let mut exps = Vec::with_capacity(diag.len());
    for lam in &diag {
        match field.q_power_ratio(base, lam) {
            Ok(Some(m)) if m % 2 == 0 => exps.push(m),
            _ => return Err(AnalysisError::NonLadder),
        }
    }
    let lo = *exps.iter().min().expect("nonempty");
    let hi = *exps.iter().max().expect("nonempty");
    let d = ((hi - lo) / 2) as usize;
    let mut blocks = vec![Vec::new(); d + 1];
    for (b, m) in exps.iter().enumerate() {
        blocks[((m - lo) / 2) as usize].push(b);
    }
    let lowest = diag[exps.iter().position(|&m| m == lo).expect("present")].clone();
    Ok(WeightData {
        s: lowest * field.q_pow(d as i64),
        d,
        dims: blocks.iter().map(Vec::len).collect(),
        blocks,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SigmaSequence {
    pub sigma: Vec<Scalar>,
}

fn top_index(w: &WeightData) -> Result<usize, AnalysisError> {
    match w.blocks[0].as_slice() {
        [i] => Ok(*i),
        other => Err(AnalysisError::DegenerateTop(other.len())),
    }
}

/// `y^i x^i u = sigma_i u` on the one-dimensional `U_0`.
pub fn sigma_sequence(field: &FieldConfig, tm: &TModule) -> Result<SigmaSequence, AnalysisError> {
    let w = weight_decomposition(field, tm)?;
    let top = top_index(&w)?;
    let mut sigma = vec![Scalar::one()];
    let mut up = unit(tm.dim(), top);
    for i in 1..=w.d {
        up = tm.x.apply(&up);
        let mut v = up.clone();
        for _ in 0..i {
            v = tm.y.apply(&v);
        }
        sigma.push(v[top].clone());
    }
    Ok(SigmaSequence { sigma })
}

/// Monic of degree `d`, coefficients constant term first.
pub type DrinfeldPolynomial = Poly;

/// `eps s^-2 + eps* s^2`, where the polynomial reduces to `Q_d^-1 sigma_d`.
pub fn special_point(kind: AlgebraKind, s: &Scalar) -> Scalar {
    let s2 = s * s;
    &kind.eps() * &s2.inv() + &kind.eps_star() * &s2
}

pub fn drinfeld_from_sigma(
    field: &FieldConfig,
    sigma: &SigmaSequence,
    s: &Scalar,
    kind: AlgebraKind,
) -> DrinfeldPolynomial {
    let d = sigma.sigma.len() - 1;
    let s2 = s * s;
    let s2i = s2.inv();
    let (eps, eps_s) = (kind.eps(), kind.eps_star());
    let mut total = Poly::zero();
    for (i, sig) in sigma.sigma.iter().enumerate() {
        let mut term = Poly::constant(sig.clone());
        for j in i + 1..=d {
            let dj = (d - j) as i64;
            let m = field.q_pow(j as i64) - field.q_pow(-(j as i64));
            let c = &eps * &s2i * field.q_pow(2 * dj) + &eps_s * &s2 * field.q_pow(-2 * dj);
            // (q^j - q^-j)^2 (c - lambda)
            let lin = Poly::new(vec![c, -Scalar::one()]).scale(&(&m * &m));
            term = &term * &lin;
        }
        total = &total + &term;
    }
    total.scale(&field.q_d_norm(d).inv())
}

pub fn drinfeld(field: &FieldConfig, tm: &TModule) -> Result<DrinfeldPolynomial, AnalysisError> {
    let sigma = sigma_sequence(field, tm)?;
    Ok(drinfeld_from_sigma(field, &sigma, &tm.type_s, tm.kind))
}

/// `lambda^ell0 * prod_i prod_{c in S(ell_i, a_i)} (lambda + c + eps eps* c^-1)`.
pub fn drinfeld_closed_form(field: &FieldConfig, spec: &ModuleSpec) -> DrinfeldPolynomial {
    let ee = &spec.kind.eps() * &spec.kind.eps_star();
    let mut p = Poly::monomial(spec.leading_trivial_ell);
    for f in &spec.factors {
        for c in QString::from(f).elements(field) {
            let shift = if ee.is_zero() { c.clone() } else { &c + &(&ee * &c.inv()) };
            p = &p * &Poly::linear(shift);
        }
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecursionWitness {
    pub i: usize,
    /// `c_i(0)`.
    pub c_i_m: Scalar,
    /// `c*_i(i-1)`.
    pub c_star_i_m: Scalar,
    pub lhs: Scalar,
    pub rhs: Scalar,
    /// `sigma_i + alpha q [i]^2 c_i(0) c*_i(i-1) sigma_{i-1}`.
    pub rhs_factored: Scalar,
}

impl RecursionWitness {
    pub fn passed(&self) -> bool {
        self.lhs == self.rhs && self.rhs == self.rhs_factored
    }
}

/// Compares the sigma sequence of `V ⊗ V(1,a)` with the recursion in terms of `V`.
pub fn sigma_recursion_check(
    field: &FieldConfig,
    tm: &TModule,
    a: &Scalar,
) -> Result<Vec<RecursionWitness>, AnalysisError> {
    let kind = tm.kind;
    let s = &tm.type_s;
    let sigma = sigma_sequence(field, tm)?.sigma;
    let d = sigma.len() - 1;
    let v1 = build_evaluation(field, &EvalFactor::new(1, a.clone()), kind)?;
    let big = phi_s(field, &tensor(&tm.rep, &v1)?, s)?;
    let tilde = sigma_sequence(field, &big)?.sigma;
    let (eps, eps_s) = (kind.eps(), kind.eps_star());
    let eps_s_ai = if kind.epsilon_star() == 0 { Scalar::zero() } else { a.inv() };
    let si = s.inv();
    let s2 = s * s;
    let alpha_q = field.constants().alpha * field.q();
    let di = d as i64;
    let mut out = Vec::new();
    for i in 1..=d + 1 {
        let ii = i as i64;
        let sig_i = sigma.get(i).cloned().unwrap_or_else(Scalar::zero);
        let prev = &sigma[i - 1];
        let m = field.q_pow(ii) - field.q_pow(-ii);
        let e = 2 * (di + 1 - ii);
        let bracket = a + &(&eps * &eps_s_ai) + &eps * &s2.inv() * field.q_pow(e) + &eps_s * &s2 * field.q_pow(-e);
        let rhs = &sig_i - &(&m * &m * bracket * prev);
        let c = a * s * field.q_pow(ii - di - 1) + &eps * &si * field.q_pow(-ii + di + 1);
        let m_star = ii - 1;
        let c_star = &eps_s_ai * s * field.q_pow(-ii + 2 * m_star - di + 1) + &si * &field.q_pow(ii - 2 * m_star + di - 1);
        let qi = field.q_integer(ii);
        let rhs_factored = &sig_i + &(&alpha_q * &qi * &qi * &c * &c_star * prev);
        out.push(RecursionWitness { i, c_i_m: c, c_star_i_m: c_star, lhs: tilde[i].clone(), rhs, rhs_factored });
    }
    Ok(out)
}

/// Smallest subspace containing `v` and stable under every generator.
pub fn spin(gens: &[&Matrix], v: &[Scalar]) -> Subspace {
    let mut sub = Subspace::zero(v.len());
    let mut queue = VecDeque::new();
    if sub.insert(v) {
        queue.push_back(v.to_vec());
    }
    while let Some(w) = queue.pop_front() {
        for g in gens {
            let u = g.apply(&w);
            if sub.insert(&u) {
                queue.push_back(u);
            }
        }
    }
    sub
}

/// Generator blocks between weight spaces: `(source, target, matrix)`.
struct GradedOp {
    pieces: Vec<(usize, usize, Matrix)>,
}

impl GradedOp {
    /// `None` if `g` does not shift weights by exactly `shift`.
    fn new(g: &Matrix, blocks: &[Vec<usize>], shift: i64) -> Option<GradedOp> {
        let mut pieces = Vec::new();
        let mut seen = 0;
        for (i, src) in blocks.iter().enumerate() {
            let j = i as i64 + shift;
            if j < 0 || j as usize >= blocks.len() {
                continue;
            }
            let dst = &blocks[j as usize];
            let m = Matrix::from_fn(dst.len(), src.len(), |r, c| g.get(dst[r], src[c]).clone());
            seen += m.nonzero_count();
            pieces.push((i, j as usize, m));
        }
        (seen == g.nonzero_count()).then_some(GradedOp { pieces })
    }
}

fn graded_spin(ops: &[GradedOp], dims: &[usize], block: usize, v: Vector) -> Vec<Subspace> {
    let mut subs: Vec<Subspace> = dims.iter().map(|&n| Subspace::zero(n)).collect();
    let mut queue = VecDeque::new();
    if subs[block].insert(&v) {
        queue.push_back((block, v));
    }
    while let Some((b, w)) = queue.pop_front() {
        for op in ops {
            for (src, dst, m) in &op.pieces {
                if *src != b {
                    continue;
                }
                let u = m.apply(&w);
                if subs[*dst].insert(&u) {
                    queue.push_back((*dst, u));
                }
            }
        }
    }
    subs
}

fn lift(blocks: &[Vec<usize>], n: usize, subs: &[Subspace]) -> Subspace {
    let mut vs = Vec::new();
    for (idx, sub) in blocks.iter().zip(subs) {
        for b in sub.basis() {
            let mut v = vec![Scalar::zero(); n];
            for (k, &i) in idx.iter().enumerate() {
                v[i] = b[k].clone();
            }
            vs.push(v);
        }
    }
    Subspace::span(n, &vs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    /// A proper nonzero invariant subspace.
    Reducible(Subspace),
    /// No decisive singular element was found; flagged rather than guessed.
    Undecided,
}

impl Irreducibility {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, Irreducibility::Irreducible)
    }

    pub fn witness(&self) -> Option<&Subspace> {
        match self {
            Irreducibility::Reducible(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NortonReport {
    pub irreducible: Option<bool>,
    pub witness_dim: Option<usize>,
    pub witness_basis: Vec<Vector>,
    pub method: String,
}

impl NortonReport {
    pub fn from_verdict(v: &Irreducibility, method: impl Into<String>) -> Self {
        let (irreducible, witness) = match v {
            Irreducibility::Irreducible => (Some(true), None),
            Irreducibility::Reducible(w) => (Some(false), Some(w)),
            Irreducibility::Undecided => (None, None),
        };
        NortonReport {
            irreducible,
            witness_dim: witness.map(Subspace::dim),
            witness_basis: witness.map(|w| w.basis().to_vec()).unwrap_or_default(),
            method: method.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NortonConfig {
    pub seed: u64,
    pub max_word_len: usize,
    pub rounds: usize,
    /// Largest dimension for the Burnside fallback.
    pub burnside_max_dim: usize,
}

impl Default for NortonConfig {
    fn default() -> Self {
        NortonConfig { seed: 0, max_word_len: 6, rounds: 32, burnside_max_dim: 10 }
    }
}

/// Norton's criterion for a singular `b` with one-dimensional kernel.
fn norton_with(gens: &[&Matrix], gens_t: &[Matrix], b: &Matrix) -> Option<Irreducibility> {
    let n = b.rows();
    let ker = b.nullspace();
    if ker.len() != 1 {
        return None;
    }
    if !modp::spin_is_full(gens, &ker[0]) {
        let w = spin(gens, &ker[0]);
        if w.dim() < n {
            return Some(Irreducibility::Reducible(w));
        }
    }
    let ker_t = b.transpose().nullspace();
    let refs: Vec<&Matrix> = gens_t.iter().collect();
    if !modp::spin_is_full(&refs, &ker_t[0]) {
        let wt = spin(&refs, &ker_t[0]);
        if wt.dim() < n {
            return Some(Irreducibility::Reducible(wt.annihilator()));
        }
    }
    Some(Irreducibility::Irreducible)
}

fn random_element(gens: &[&Matrix], rng: &mut ChaCha8Rng, max_len: usize) -> Matrix {
    let n = gens[0].rows();
    let mut acc = Matrix::zeros(n, n);
    for _ in 0..3 {
        let len = rng.gen_range(1..=max_len);
        let mut w = Matrix::identity(n);
        for _ in 0..len {
            w = &w * gens[rng.gen_range(0..gens.len())];
        }
        let c = Scalar::from_int(rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 });
        acc = &acc + &w.scale(&c);
    }
    acc
}

/// Dimension of the algebra generated by `gens` (with identity).
fn algebra_dim(gens: &[&Matrix]) -> usize {
    let n = gens[0].rows();
    let flat = |m: &Matrix| -> Vector { (0..n).flat_map(|i| m.row(i).to_vec()).collect() };
    let mut span = Subspace::zero(n * n);
    let mut queue = VecDeque::new();
    let id = Matrix::identity(n);
    span.insert(&flat(&id));
    queue.push_back(id);
    while let Some(m) = queue.pop_front() {
        for g in gens {
            let p = &m * *g;
            if span.insert(&flat(&p)) {
                queue.push_back(p);
            }
        }
    }
    span.dim()
}

/// Irreducibility of the module generated by `gens`.
///
/// `hints` are pairs `(M, lambda)` with `lambda` a likely eigenvalue of `M`;
/// they are tried before seeded random words.
pub fn norton_test(gens: &[&Matrix], hints: &[(&Matrix, Scalar)], cfg: &NortonConfig) -> (Irreducibility, String) {
    let n = gens.first().map_or(0, |g| g.rows());
    if n <= 1 {
        return (Irreducibility::Irreducible, "dimension".into());
    }
    let gens_t: Vec<Matrix> = gens.iter().map(|g| g.transpose()).collect();
    for (k, (m, lam)) in hints.iter().enumerate() {
        if let Some(v) = norton_with(gens, &gens_t, &m.add_scalar(&-lam)) {
            return (v, format!("hint {k}"));
        }
    }
    for round in 0..cfg.rounds {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(round as u64));
        let r = random_element(gens, &mut rng, cfg.max_word_len);
        // words ending in a nilpotent-heavy product are often singular
        for b in [r.clone(), &r * gens[round % gens.len()]] {
            if let Some(v) = norton_with(gens, &gens_t, &b) {
                return (v, format!("random round {round}"));
            }
        }
    }
    if n <= cfg.burnside_max_dim && algebra_dim(gens) == n * n {
        return (Irreducibility::Irreducible, "burnside".into());
    }
    (Irreducibility::Undecided, "undecided".into())
}

/// Irreducibility of a `T`-module.
///
/// `k` is diagonal with a one-dimensional top weight space, so `k - s q^-d`
/// is a decisive Norton element; spinning runs weight space by weight space.
pub fn norton_irreducible(field: &FieldConfig, tm: &TModule) -> Irreducibility {
    let n = tm.dim();
    if n <= 1 {
        return Irreducibility::Irreducible;
    }
    let fallback = || {
        let hint = tm.k.get(0, 0).clone();
        norton_test(&tm.generators(), &[(&tm.k, hint)], &NortonConfig::default()).0
    };
    let Ok(w) = weight_decomposition(field, tm) else { return fallback() };
    if top_index(&w).is_err() {
        return fallback();
    }
    let ops = [GradedOp::new(&tm.x, &w.blocks, 1), GradedOp::new(&tm.y, &w.blocks, -1)];
    let ops_t = [GradedOp::new(&tm.x.transpose(), &w.blocks, -1), GradedOp::new(&tm.y.transpose(), &w.blocks, 1)];
    let (Some(ops), Some(ops_t)) = (ops.into_iter().collect::<Option<Vec<_>>>(), ops_t.into_iter().collect::<Option<Vec<_>>>())
    else {
        return fallback();
    };
    let start = vec![Scalar::one()];
    let full = |subs: &[Subspace]| subs.iter().zip(&w.dims).all(|(s, &d)| s.dim() == d);
    let top = unit(n, w.blocks[0][0]);
    if !modp::spin_is_full(&[&tm.x, &tm.y], &top) {
        let up = graded_spin(&ops, &w.dims, 0, start.clone());
        if !full(&up) {
            return Irreducibility::Reducible(lift(&w.blocks, n, &up));
        }
    }
    let (xt, yt) = (tm.x.transpose(), tm.y.transpose());
    if !modp::spin_is_full(&[&xt, &yt], &top) {
        let down = graded_spin(&ops_t, &w.dims, 0, start);
        if !full(&down) {
            return Irreducibility::Reducible(lift(&w.blocks, n, &down).annihilator());
        }
    }
    Irreducibility::Irreducible
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TDPairReport {
    /// Set when the eigenvalue sequences are not distinct and structure checks were skipped.
    pub skipped: Option<String>,
    pub diagonalizable_a: bool,
    pub diagonalizable_astar: bool,
    pub tridiagonal_a_on_vstar: bool,
    pub tridiagonal_astar_on_v: bool,
    pub irreducible: bool,
    pub norton: Option<NortonReport>,
    /// Coordinate indices of each split block, when it is a coordinate subspace.
    pub split_blocks: Vec<Vec<usize>>,
    pub split_matches_weights: bool,
    pub shape: Vec<usize>,
    pub theta_used: ThetaData,
    /// `P_V(t^2 + eps eps* t^-2)`.
    pub drinfeld_at_t: Option<Scalar>,
    pub e0star_identity: bool,
    pub theta_norm: Scalar,
    pub theta_i: Vec<Scalar>,
    pub theta_star_i: Vec<Scalar>,
}

impl TDPairReport {
    pub fn axioms_hold(&self) -> bool {
        self.skipped.is_none()
            && self.diagonalizable_a
            && self.diagonalizable_astar
            && self.tridiagonal_a_on_vstar
            && self.tridiagonal_astar_on_v
            && self.irreducible
    }
}

fn partial_products(theta: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::one()];
    for j in 1..theta.len() {
        let next = out[j - 1].clone() * (&theta[0] - &theta[j]);
        out.push(next);
    }
    out
}

/// `prod_i (M - theta_i) = 0`, applied column by column.
fn annihilated_by(m: &Matrix, theta: &[Scalar]) -> bool {
    let n = m.rows();
    (0..n).all(|c| {
        let mut v = unit(n, c);
        for th in theta {
            let mv = m.apply(&v);
            v = mv.iter().zip(&v).map(|(a, b)| a - &(th * b)).collect();
            if v.iter().all(Scalar::is_zero) {
                return true;
            }
        }
        false
    })
}

fn eigenspaces(m: &Matrix, theta: &[Scalar]) -> Vec<Subspace> {
    let n = m.rows();
    theta.iter().map(|th| Subspace::span(n, &m.add_scalar(&-th).nullspace())).collect()
}

/// `M V_i ⊆ V_{i-1} + V_i + V_{i+1}` for every `i`.
fn acts_tridiagonally(m: &Matrix, spaces: &[Subspace]) -> bool {
    (0..spaces.len()).all(|i| {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(spaces.len() - 1);
        let mut near = spaces[lo].clone();
        for s in &spaces[lo + 1..=hi] {
            near = near.sum(s);
        }
        spaces[i].basis().iter().all(|v| near.contains(&m.apply(v)))
    })
}

/// Checks the TD-pair axioms, the split decomposition and the `E_0^*` projection identity.
pub fn td_pair_verify(field: &FieldConfig, c: &TDPairCandidate, cfg: &NortonConfig) -> TDPairReport {
    let tm = &c.parent;
    let n = tm.dim();
    let th = theta_sequences(field, &tm.type_s, &c.t, tm.d, tm.kind);
    let theta_i = partial_products(&th.theta);
    let theta_star_i = partial_products(&th.theta_star);
    let theta_norm = &theta_i[tm.d] * &theta_star_i[tm.d];
    let t2 = &c.t * &c.t;
    let lam_t = &t2 + &(&(&tm.kind.eps() * &tm.kind.eps_star()) * &t2.inv());
    let poly = drinfeld(field, tm).ok();
    let mut rep = TDPairReport {
        skipped: None,
        diagonalizable_a: false,
        diagonalizable_astar: false,
        tridiagonal_a_on_vstar: false,
        tridiagonal_astar_on_v: false,
        irreducible: false,
        norton: None,
        split_blocks: Vec::new(),
        split_matches_weights: false,
        shape: Vec::new(),
        drinfeld_at_t: poly.as_ref().map(|p| p.eval(&lam_t)),
        e0star_identity: false,
        theta_norm,
        theta_i,
        theta_star_i,
        theta_used: th.clone(),
    };
    if !th.theta_distinct_pairwise || !th.theta_star_distinct_pairwise {
        let mut why = Vec::new();
        if !th.theta_distinct_pairwise {
            why.push("theta");
        }
        if !th.theta_star_distinct_pairwise {
            why.push("theta*");
        }
        rep.skipped = Some(format!("repeated {} eigenvalues", why.join(" and ")));
        return rep;
    }
    rep.diagonalizable_a = annihilated_by(&c.a, &th.theta);
    rep.diagonalizable_astar = annihilated_by(&c.a_star, &th.theta_star);
    let vs = eigenspaces(&c.a, &th.theta);
    let vss = eigenspaces(&c.a_star, &th.theta_star);
    rep.diagonalizable_a &= vs.iter().map(Subspace::dim).sum::<usize>() == n;
    rep.diagonalizable_astar &= vss.iter().map(Subspace::dim).sum::<usize>() == n;
    if !(rep.diagonalizable_a && rep.diagonalizable_astar) {
        return rep;
    }
    rep.tridiagonal_astar_on_v = acts_tridiagonally(&c.a_star, &vs);
    rep.tridiagonal_a_on_vstar = acts_tridiagonally(&c.a, &vss);

    // U_i = (V*_0 + ... + V*_i) ∩ (V_i + ... + V_d)
    let d = tm.d;
    let mut lower = Vec::with_capacity(d + 1);
    let mut acc = Subspace::zero(n);
    for s in &vss {
        acc = acc.sum(s);
        lower.push(acc.clone());
    }
    let mut upper = vec![Subspace::zero(n); d + 1];
    let mut acc = Subspace::zero(n);
    for i in (0..=d).rev() {
        acc = acc.sum(&vs[i]);
        upper[i] = acc.clone();
    }
    let weights = weight_decomposition(field, tm).ok();
    let mut matches = weights.as_ref().is_some_and(|w| w.d == d);
    for i in 0..=d {
        let u = lower[i].intersection(&upper[i]);
        rep.shape.push(u.dim());
        let coord = weights.as_ref().and_then(|w| w.blocks.get(i)).filter(|b| {
            let cs = Subspace::coordinate(n, b);
            cs.same_as(&u)
        });
        match coord {
            Some(b) => rep.split_blocks.push(b.clone()),
            None => {
                matches = false;
                rep.split_blocks.push(Vec::new());
            }
        }
    }
    rep.split_matches_weights = matches;

    let gens = [&c.a, &c.a_star];
    let (verdict, method) = norton_test(&gens, &[(&c.a, th.theta[0].clone()), (&c.a_star, th.theta_star[0].clone())], cfg);
    rep.irreducible = verdict.is_irreducible();
    rep.norton = Some(NortonReport::from_verdict(&verdict, method));

    if let (Some(p), Some(w), Some(v)) = (&poly, &weights, vs[0].basis().first()) {
        let mut e = v.clone();
        for j in 1..=d {
            let av = c.a_star.apply(&e);
            let den = (&th.theta_star[0] - &th.theta_star[j]).inv();
            e = av.iter().zip(&e).map(|(a, b)| (a - &(&th.theta_star[j] * b)) * &den).collect();
        }
        let mut u0 = vec![Scalar::zero(); n];
        for &i in &w.blocks[0] {
            u0[i] = v[i].clone();
        }
        let closed = rep.theta_norm.inv() * field.q_d_norm(d) * p.eval(&lam_t);
        let by_closed: Vector = u0.iter().map(|x| x * &closed).collect();
        let sums = sigma_sequence(field, tm).map(|sg| {
            sg.sigma
                .iter()
                .enumerate()
                .fold(Scalar::zero(), |acc, (i, s)| acc + s / &(&rep.theta_i[i] * &rep.theta_star_i[i]))
        });
        let by_sum: Option<Vector> = sums.ok().map(|f| u0.iter().map(|x| x * &f).collect());
        rep.e0star_identity = e == by_closed && by_sum.as_ref() == Some(&e);
    }
    rep
}

/// `g(lambda) = sum_i dim U_i lambda^i`, constant term first.
pub fn shape_generating_function(field: &FieldConfig, tm: &TModule) -> Result<Vec<u64>, AnalysisError> {
    Ok(weight_decomposition(field, tm)?.dims.iter().map(|&d| d as u64).collect())
}

/// `prod_i (1 + lambda + ... + lambda^ell_i)`.
pub fn shape_product_formula(ells: &[usize]) -> Vec<u64> {
    ells.iter().fold(vec![1u64], |acc, &l| {
        let mut out = vec![0u64; acc.len() + l];
        for (i, a) in acc.iter().enumerate() {
            for o in &mut out[i..=i + l] {
                *o += a;
            }
        }
        out
    })
}

/// An invertible `X` with `X g1 = g2 X` for every generator, if one exists.
///
/// Unknowns are restricted to weight-preserving entries; among solutions the
/// first nullspace vector in reduced order is taken.
pub fn find_intertwiner(field: &FieldConfig, m1: &TModule, m2: &TModule) -> Result<Option<Matrix>, AnalysisError> {
    let n = m1.dim();
    if m2.dim() != n || m1.k.diag_entries() != m2.k.diag_entries() {
        return Ok(None);
    }
    let w = weight_decomposition(field, m1)?;
    let mut unknowns: Vec<(usize, usize)> = Vec::new();
    for b in &w.blocks {
        for &i in b {
            for &j in b {
                unknowns.push((i, j));
            }
        }
    }
    let col_of = |i: usize, j: usize| unknowns.iter().position(|&u| u == (i, j));
    let mut rows: Vec<Vector> = Vec::new();
    for (g1, g2) in [(&m1.x, &m2.x), (&m1.y, &m2.y)] {
        // (X g1 - g2 X)[i][j] = sum_k X[i][k] g1[k][j] - g2[i][k] X[k][j]
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![Scalar::zero(); unknowns.len()];
                let mut any = false;
                for k in 0..n {
                    if !g1.get(k, j).is_zero() {
                        if let Some(c) = col_of(i, k) {
                            row[c] += g1.get(k, j);
                            any = true;
                        }
                    }
                    if !g2.get(i, k).is_zero() {
                        if let Some(c) = col_of(k, j) {
                            row[c] -= g2.get(i, k);
                            any = true;
                        }
                    }
                }
                if any {
                    rows.push(row);
                }
            }
        }
    }
    let sys = Matrix::from_rows(unknowns.len(), &rows);
    let Some(sol) = sys.nullspace().into_iter().next() else { return Ok(None) };
    let mut x = Matrix::zeros(n, n);
    for (c, &(i, j)) in unknowns.iter().enumerate() {
        x.set(i, j, sol[c].clone());
    }
    Ok(x.inverse().is_some().then_some(x))
}
