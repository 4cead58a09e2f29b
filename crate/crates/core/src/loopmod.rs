//! Evaluation modules of the `U_q(sl2)`-loop algebra as explicit matrices.
//!
//! Generators are stored as `e0+`, `e1+`, `f0 = e0- k0`, `f1 = e1- k1`,
//! `k0`, `k0^-1`, with `k1 = k0^-1`. Tensor products use the coproduct
//! on these elements and a row-major basis over `(i1, i2)`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::field::{FieldConfig, FieldError, Scalar};
use crate::linalg::{Matrix, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoopError {
    #[error("(epsilon, epsilon*) = ({0}, {1}) is not one of (1,1), (1,0), (0,0)")]
    InvalidKind(u8, u8),
    #[error("evaluation parameter a = 0 requires kind (1,0)")]
    ZeroParameter,
    #[error("V(0) is only allowed as the leading factor of kind (1,0)")]
    ZeroLength,
    #[error("a = 0 is only allowed in the leading factor")]
    MisplacedTrivial,
    #[error("tensor of modules of different kinds")]
    KindMismatch,
    #[error("operation unsupported for kind ({0}, {1})")]
    UnsupportedKind(u8, u8),
    #[error("highest_embedding needs ell >= 2, got {0}")]
    EllTooSmall(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The pair `(epsilon, epsilon*)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraKind {
    epsilon: u8,
    epsilon_star: u8,
}

impl AlgebraKind {
    pub const FIRST: AlgebraKind = AlgebraKind { epsilon: 1, epsilon_star: 1 };
    pub const SECOND: AlgebraKind = AlgebraKind { epsilon: 1, epsilon_star: 0 };
    pub const THIRD: AlgebraKind = AlgebraKind { epsilon: 0, epsilon_star: 0 };
    pub const ALL: [AlgebraKind; 3] = [Self::FIRST, Self::SECOND, Self::THIRD];

    pub fn new(epsilon: u8, epsilon_star: u8) -> Result<Self, LoopError> {
        match (epsilon, epsilon_star) {
            (1, 1) | (1, 0) | (0, 0) => Ok(AlgebraKind { epsilon, epsilon_star }),
            _ => Err(LoopError::InvalidKind(epsilon, epsilon_star)),
        }
    }

    pub fn epsilon(self) -> u8 {
        self.epsilon
    }

    pub fn epsilon_star(self) -> u8 {
        self.epsilon_star
    }

    pub fn eps(self) -> Scalar {
        Scalar::from_int(self.epsilon as i64)
    }

    pub fn eps_star(self) -> Scalar {
        Scalar::from_int(self.epsilon_star as i64)
    }

    /// Whether `e0-` is part of the algebra (the full loop algebra).
    pub fn has_f0(self) -> bool {
        self != Self::SECOND
    }

    pub fn label(self) -> String {
        format!("({},{})", self.epsilon, self.epsilon_star)
    }
}

impl Serialize for AlgebraKind {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        [self.epsilon, self.epsilon_star].serialize(ser)
    }
}

impl<'de> Deserialize<'de> for AlgebraKind {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let [e, es] = <[u8; 2]>::deserialize(de)?;
        AlgebraKind::new(e, es).map_err(serde::de::Error::custom)
    }
}

/// One tensor factor `V(ell, a)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvalFactor {
    pub ell: usize,
    pub a: Scalar,
}

impl EvalFactor {
    pub fn new(ell: usize, a: Scalar) -> Self {
        EvalFactor { ell, a }
    }
}

/// `V(ell_0) ⊗ V(ell_1, a_1) ⊗ ... ⊗ V(ell_n, a_n)`; the leading factor only for kind (1,0).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub kind: AlgebraKind,
    pub factors: Vec<EvalFactor>,
    #[serde(default)]
    pub leading_trivial_ell: usize,
}

impl ModuleSpec {
    pub fn new(kind: AlgebraKind, factors: Vec<EvalFactor>) -> Self {
        ModuleSpec { kind, factors, leading_trivial_ell: 0 }
    }

    pub fn with_leading(mut self, ell: usize) -> Self {
        self.leading_trivial_ell = ell;
        self
    }

    pub fn diameter(&self) -> usize {
        self.leading_trivial_ell + self.factors.iter().map(|f| f.ell).sum::<usize>()
    }

    pub fn dim(&self) -> usize {
        (self.leading_trivial_ell + 1) * self.factors.iter().map(|f| f.ell + 1).product::<usize>()
    }

    pub fn validate(&self, field: &FieldConfig) -> Result<(), LoopError> {
        if self.leading_trivial_ell > 0 && self.kind != AlgebraKind::SECOND {
            return Err(LoopError::MisplacedTrivial);
        }
        for f in &self.factors {
            field.check(&f.a)?;
            if f.ell == 0 {
                return Err(LoopError::ZeroLength);
            }
            if f.a.is_zero() {
                return Err(if self.kind == AlgebraKind::SECOND {
                    LoopError::MisplacedTrivial
                } else {
                    LoopError::ZeroParameter
                });
            }
        }
        Ok(())
    }
}

/// Generator matrices of a finite-dimensional module with its weight grading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation {
    pub kind: AlgebraKind,
    pub dim: usize,
    pub d: usize,
    pub e0p: Matrix,
    pub e1p: Matrix,
    pub f0: Option<Matrix>,
    pub f1: Matrix,
    pub k0: Matrix,
    pub k0_inv: Matrix,
    /// Weight index of each basis vector; `k0` acts there by `q^(2i - d)`.
    pub weights: Vec<usize>,
}

impl Representation {
    pub fn trivial(kind: AlgebraKind) -> Self {
        let z = Matrix::zeros(1, 1);
        Representation {
            kind,
            dim: 1,
            d: 0,
            e0p: z.clone(),
            e1p: z.clone(),
            f0: kind.has_f0().then(|| z.clone()),
            f1: z,
            k0: Matrix::identity(1),
            k0_inv: Matrix::identity(1),
            weights: vec![0],
        }
    }

    /// `e0- = f0 k0^-1`.
    pub fn e0m(&self) -> Option<Matrix> {
        self.f0.as_ref().map(|f| f * &self.k0_inv)
    }

    /// `e1- = f1 k1^-1 = f1 k0`.
    pub fn e1m(&self) -> Matrix {
        &self.f1 * &self.k0
    }

    /// Named generator matrices, in a fixed order.
    pub fn generators(&self) -> Vec<(&'static str, &Matrix)> {
        let mut g = vec![("e0+", &self.e0p), ("e1+", &self.e1p)];
        if let Some(f0) = &self.f0 {
            g.push(("f0", f0));
        }
        g.extend([("f1", &self.f1), ("k0", &self.k0), ("k0^-1", &self.k0_inv)]);
        g
    }

    /// Checks diagonal `k0` with the expected eigenvalues and the block shifts of every generator.
    pub fn check_grading(&self, field: &FieldConfig) -> bool {
        let d = self.d as i64;
        let diag_ok = self.k0.is_diagonal()
            && self.weights.iter().enumerate().all(|(b, &w)| {
                *self.k0.get(b, b) == field.q_pow(2 * w as i64 - d)
                    && *self.k0_inv.get(b, b) == field.q_pow(d - 2 * w as i64)
            });
        let shifts = |m: &Matrix, delta: i64| {
            (0..self.dim).all(|i| {
                (0..self.dim).all(|j| {
                    m.get(i, j).is_zero() || self.weights[i] as i64 == self.weights[j] as i64 + delta
                })
            })
        };
        diag_ok
            && shifts(&self.e0p, 1)
            && shifts(&self.f1, 1)
            && shifts(&self.e1p, -1)
            && self.f0.as_ref().is_none_or(|f| shifts(f, -1))
    }
}

/// The module `V(ell, a)` in its standard basis `v_0, ..., v_ell`.
pub fn build_evaluation(
    field: &FieldConfig,
    factor: &EvalFactor,
    kind: AlgebraKind,
) -> Result<Representation, LoopError> {
    field.check(&factor.a)?;
    let l = factor.ell;
    let a = &factor.a;
    if a.is_zero() && kind != AlgebraKind::SECOND {
        return Err(LoopError::ZeroParameter);
    }
    if l == 0 && !(a.is_zero() && kind == AlgebraKind::SECOND) {
        return Err(LoopError::ZeroLength);
    }
    let n = l + 1;
    let li = l as i64;
    let qi = |k: i64| field.q_integer(k);
    let q = field.q();
    let mut e0p = Matrix::zeros(n, n);
    let mut e1p = Matrix::zeros(n, n);
    let mut f1 = Matrix::zeros(n, n);
    let mut f0 = kind.has_f0().then(|| Matrix::zeros(n, n));
    for i in 0..n {
        let ii = i as i64;
        if i + 1 < n {
            // e0+ v_i = a q [i+1] v_{i+1};  f1 v_i = q^(l-2i) [i+1] v_{i+1}
            e0p.set(i + 1, i, a * &q * qi(ii + 1));
            f1.set(i + 1, i, field.q_pow(li - 2 * ii) * qi(ii + 1));
        }
        if i > 0 {
            // e1+ v_i = [l-i+1] v_{i-1};  f0 v_i = q^(2i-l) a^-1 q^-1 [l-i+1] v_{i-1}
            e1p.set(i - 1, i, qi(li - ii + 1));
            if let Some(f0) = f0.as_mut() {
                f0.set(i - 1, i, field.q_pow(2 * ii - li - 1) * a.inv() * qi(li - ii + 1));
            }
        }
    }
    let k0 = Matrix::diagonal(&(0..n as i64).map(|i| field.q_pow(2 * i - li)).collect::<Vec<_>>());
    let k0_inv = Matrix::diagonal(&(0..n as i64).map(|i| field.q_pow(li - 2 * i)).collect::<Vec<_>>());
    Ok(Representation { kind, dim: n, d: l, e0p, e1p, f0, f1, k0, k0_inv, weights: (0..n).collect() })
}

/// `r1 ⊗ r2` through the coproduct.
pub fn tensor(r1: &Representation, r2: &Representation) -> Result<Representation, LoopError> {
    if r1.kind != r2.kind {
        return Err(LoopError::KindMismatch);
    }
    let id2 = Matrix::identity(r2.dim);
    let delta = |k: &Matrix, g1: &Matrix, g2: &Matrix| &k.kron(g2) + &g1.kron(&id2);
    let f0 = match (&r1.f0, &r2.f0) {
        (Some(a), Some(b)) => Some(delta(&r1.k0, a, b)),
        _ => None,
    };
    let weights = r1
        .weights
        .iter()
        .flat_map(|&w1| r2.weights.iter().map(move |&w2| w1 + w2))
        .collect();
    Ok(Representation {
        kind: r1.kind,
        dim: r1.dim * r2.dim,
        d: r1.d + r2.d,
        e0p: delta(&r1.k0, &r1.e0p, &r2.e0p),
        e1p: delta(&r1.k0_inv, &r1.e1p, &r2.e1p),
        f0,
        f1: delta(&r1.k0_inv, &r1.f1, &r2.f1),
        k0: r1.k0.kron(&r2.k0),
        k0_inv: r1.k0_inv.kron(&r2.k0_inv),
        weights,
    })
}

/// The module described by `spec`, factors tensored left to right.
pub fn build_module(field: &FieldConfig, spec: &ModuleSpec) -> Result<Representation, LoopError> {
    spec.validate(field)?;
    let mut acc = if spec.leading_trivial_ell > 0 {
        build_evaluation(field, &EvalFactor::new(spec.leading_trivial_ell, Scalar::zero()), spec.kind)?
    } else {
        Representation::trivial(spec.kind)
    };
    for (i, f) in spec.factors.iter().enumerate() {
        let v = build_evaluation(field, f, spec.kind)?;
        acc = if i == 0 && spec.leading_trivial_ell == 0 { v } else { tensor(&acc, &v)? };
    }
    Ok(acc)
}

/// Exact residual of one relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationResidual {
    pub name: String,
    pub nonzero_entries: usize,
    /// First nonzero residual entry as `(row, col, value)`.
    pub first_nonzero: Option<(usize, usize, Scalar)>,
    #[serde(skip)]
    pub residual: Matrix,
}

impl RelationResidual {
    pub fn new(name: impl Into<String>, residual: Matrix) -> Self {
        RelationResidual {
            name: name.into(),
            nonzero_entries: residual.nonzero_count(),
            first_nonzero: residual.first_nonzero(),
            residual,
        }
    }

    pub fn passed(&self) -> bool {
        self.nonzero_entries == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub relations: Vec<RelationResidual>,
}

impl RelationReport {
    pub fn push(&mut self, name: impl Into<String>, residual: Matrix) {
        self.relations.push(RelationResidual::new(name, residual));
    }

    pub fn passed(&self) -> bool {
        self.relations.iter().all(RelationResidual::passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.relations.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&RelationResidual> {
        self.relations.iter().find(|r| r.name == name)
    }
}

/// `[a, a^2 b - beta a b a + b a^2]`.
pub(crate) fn serre(a: &Matrix, b: &Matrix, beta: &Scalar) -> Matrix {
    let aa = a * a;
    let inner = &(&(&aa * b) - &(a * b * a).scale(beta)) + &(b * &aa);
    a.commutator(&inner)
}

/// Residuals of the defining relations of the loop algebra (or its subalgebra for kind (1,0)).
pub fn verify_loop_relations(field: &FieldConfig, r: &Representation) -> RelationReport {
    let mut rep = RelationReport::default();
    let n = r.dim;
    let id = Matrix::identity(n);
    let q2 = field.q_pow(2);
    let qm2 = field.q_pow(-2);
    let beta = field.constants().beta;
    let qq = field.q_pow(1) - field.q_pow(-1);
    let (k, ki) = (&r.k0, &r.k0_inv);
    let conj = |x: &Matrix| &(k * x) * ki;

    rep.push("k0 k0^-1 = 1", &(k * ki) - &id);
    rep.push("k0^-1 k0 = 1", &(ki * k) - &id);
    let e1m = r.e1m();
    let e0m = r.e0m();
    rep.push("k0 e0+ k0^-1 = q^2 e0+", &conj(&r.e0p) - &r.e0p.scale(&q2));
    rep.push("k0 e1+ k0^-1 = q^-2 e1+", &conj(&r.e1p) - &r.e1p.scale(&qm2));
    rep.push("k0 e1- k0^-1 = q^2 e1-", &conj(&e1m) - &e1m.scale(&q2));
    if let Some(e0m) = &e0m {
        rep.push("k0 e0- k0^-1 = q^-2 e0-", &conj(e0m) - &e0m.scale(&qm2));
    }

    // [e_i+, e_i-] = (k_i - k_i^-1)/(q - q^-1), with k1 = k0^-1
    rep.push("[e1+, e1-] = (k1 - k1^-1)/(q - q^-1)", &r.e1p.commutator(&e1m) - &(ki - k).scale(&qq.inv()));
    rep.push("[e0+, e1-] = 0", r.e0p.commutator(&e1m));
    if let Some(e0m) = &e0m {
        rep.push("[e0+, e0-] = (k0 - k0^-1)/(q - q^-1)", &r.e0p.commutator(e0m) - &(k - ki).scale(&qq.inv()));
        rep.push("[e1+, e0-] = 0", r.e1p.commutator(e0m));
    }

    rep.push("q-Serre e0+ e1+", serre(&r.e0p, &r.e1p, &beta));
    rep.push("q-Serre e1+ e0+", serre(&r.e1p, &r.e0p, &beta));
    if let Some(e0m) = &e0m {
        rep.push("q-Serre e0- e1-", serre(e0m, &e1m, &beta));
        rep.push("q-Serre e1- e0-", serre(&e1m, e0m, &beta));
    }
    rep
}

/// The contragredient module twisted by the anti-automorphism swapping `e_i+` and `e_i- k_i`.
pub fn dual(r: &Representation) -> Result<Representation, LoopError> {
    let Some(f0) = &r.f0 else {
        return Err(LoopError::UnsupportedKind(r.kind.epsilon, r.kind.epsilon_star));
    };
    if r.kind != AlgebraKind::FIRST {
        return Err(LoopError::UnsupportedKind(r.kind.epsilon, r.kind.epsilon_star));
    }
    Ok(Representation {
        kind: r.kind,
        dim: r.dim,
        d: r.d,
        e0p: f0.transpose(),
        e1p: r.f1.transpose(),
        f0: Some(r.e0p.transpose()),
        f1: r.e1p.transpose(),
        k0: r.k0.transpose(),
        k0_inv: r.k0_inv.transpose(),
        weights: r.weights.clone(),
    })
}

/// Rescaling of the dual basis that identifies `dual(V(ell, a))` with `V(ell, a^-1)`.
pub fn dual_basis_change(field: &FieldConfig, ell: usize) -> Result<Matrix, LoopError> {
    let l = ell as i64;
    let mut diag = Vec::with_capacity(ell + 1);
    for i in 0..=l {
        diag.push(field.q_pow(-i * (l - i + 1)) * field.q_binomial(l, i)?);
    }
    Ok(Matrix::diagonal(&diag))
}

/// Whether `P^-1 X P` equals the matching generator of `target` for every generator.
pub fn conjugates_to(r: &Representation, p: &Matrix, target: &Representation) -> bool {
    let Some(pi) = p.inverse() else { return false };
    let a = r.generators();
    let b = target.generators();
    a.len() == b.len()
        && a.iter().zip(&b).all(|((na, x), (nb, y))| na == nb && &(&(&pi * *x) * p) == *y)
}

/// The vectors `w_i` spanning a copy of `V(ell, a)` inside `V(ell-1, a q^-1) ⊗ V(1, a q^(ell-1))`.
#[derive(Clone, Debug)]
pub struct EmbeddingWitness {
    pub ell: usize,
    pub a: Scalar,
    pub ambient: Representation,
    pub vectors: Vec<Vec<Scalar>>,
    /// Generator names whose restriction matched the standard matrices.
    pub matched: Vec<&'static str>,
    pub mismatched: Vec<&'static str>,
    pub span_dim: usize,
}

impl EmbeddingWitness {
    pub fn verified(&self) -> bool {
        self.mismatched.is_empty() && self.span_dim == self.ell + 1
    }
}

pub fn highest_embedding(
    field: &FieldConfig,
    ell: usize,
    a: &Scalar,
    kind: AlgebraKind,
) -> Result<EmbeddingWitness, LoopError> {
    if ell < 2 {
        return Err(LoopError::EllTooSmall(ell));
    }
    let l = ell as i64;
    let left = build_evaluation(field, &EvalFactor::new(ell - 1, a * field.q_pow(-1)), kind)?;
    let right = build_evaluation(field, &EvalFactor::new(1, a * field.q_pow(l - 1)), kind)?;
    let ambient = tensor(&left, &right)?;
    let n = ambient.dim;
    // index of u_i ⊗ v_j is 2i + j
    let vectors: Vec<Vec<Scalar>> = (0..=ell)
        .map(|i| {
            let mut w = vec![Scalar::zero(); n];
            if i < ell {
                w[2 * i] = field.q_pow(-(i as i64));
            }
            if i > 0 {
                w[2 * (i - 1) + 1] = Scalar::one();
            }
            w
        })
        .collect();
    let span_dim = Subspace::span(n, &vectors).dim();
    let w = Matrix::from_columns(n, &vectors);
    let standard = build_evaluation(field, &EvalFactor::new(ell, a.clone()), kind)?;
    let mut matched = Vec::new();
    let mut mismatched = Vec::new();
    for ((name, g), (_, s)) in ambient.generators().into_iter().zip(standard.generators()) {
        match w.solve_left_cancel(&(g * &w)) {
            Some(m) if &m == s => matched.push(name),
            _ => mismatched.push(name),
        }
    }
    Ok(EmbeddingWitness { ell, a: a.clone(), ambient, vectors, matched, mismatched, span_dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q2() -> FieldConfig {
        FieldConfig::rational(2, 1).unwrap()
    }

    fn s(v: &str) -> Scalar {
        v.parse().unwrap()
    }

    fn ev(f: &FieldConfig, ell: usize, a: &str, kind: AlgebraKind) -> Representation {
        build_evaluation(f, &EvalFactor::new(ell, s(a)), kind).unwrap()
    }

    #[test]
    fn evaluation_matrices() {
        let f = q2();
        let v = ev(&f, 1, "3", AlgebraKind::FIRST);
        // e0+ v0 = a q v1
        assert_eq!(v.e0p.get(1, 0), &s("6"));
        assert!(v.e0p.get(0, 1).is_zero());
        assert_eq!(v.k0.diag_entries(), vec![s("1/2"), s("2")]);
        let v2 = ev(&f, 2, "5", AlgebraKind::THIRD);
        assert_eq!(v2.e1p.get(0, 1), &f.q_integer(2));
        assert_eq!(v2.e1p.get(1, 2), &Scalar::one());
        let triv = build_evaluation(&f, &EvalFactor::new(0, Scalar::zero()), AlgebraKind::SECOND).unwrap();
        assert_eq!(triv.dim, 1);
        assert!(triv.e0p.is_zero() && triv.e1p.is_zero() && triv.f1.is_zero() && triv.f0.is_none());
        assert_eq!(triv.k0, Matrix::identity(1));
        let vl = ev(&f, 3, "0", AlgebraKind::SECOND);
        assert!(vl.e0p.is_zero());
        assert!(build_evaluation(&f, &EvalFactor::new(1, Scalar::zero()), AlgebraKind::FIRST).is_err());
    }

    #[test]
    fn tensor_examples() {
        let f = q2();
        let (a, b) = (s("3"), s("5"));
        let v = tensor(&ev(&f, 1, "3", AlgebraKind::FIRST), &ev(&f, 2, "7", AlgebraKind::FIRST)).unwrap();
        assert_eq!(v.dim, 6);
        let t = tensor(&ev(&f, 1, "3", AlgebraKind::FIRST), &ev(&f, 1, "5", AlgebraKind::FIRST)).unwrap();
        assert_eq!(t.k0.get(0, 0), &s("1/4"));
        // Δ(e0+) v0⊗v0 = b v0⊗v1 + a q v1⊗v0
        let img = t.e0p.column(0);
        assert_eq!(img[1], b);
        assert_eq!(img[2], &a * &f.q());
        assert!(img[0].is_zero() && img[3].is_zero());
        assert_eq!(t.weights, vec![0, 1, 1, 2]);
        assert!(tensor(&ev(&f, 1, "3", AlgebraKind::FIRST), &ev(&f, 1, "3", AlgebraKind::THIRD)).is_err());
    }

    #[test]
    fn relations_hold_and_detect_corruption() {
        let f = q2();
        for kind in AlgebraKind::ALL {
            let v = ev(&f, 1, "3", kind);
            assert!(verify_loop_relations(&f, &v).passed(), "{kind:?}");
            let w = tensor(&v, &ev(&f, 2, "1/2", kind)).unwrap();
            let rep = verify_loop_relations(&f, &w);
            assert!(rep.passed(), "{kind:?}: {:?}", rep.failures());
            assert!(w.check_grading(&f));
        }
        let mut v = tensor(&ev(&f, 1, "3", AlgebraKind::FIRST), &ev(&f, 1, "5", AlgebraKind::FIRST)).unwrap();
        let old = v.e0p.get(1, 0).clone();
        v.e0p.set(1, 0, old + Scalar::one());
        let rep = verify_loop_relations(&f, &v);
        assert!(!rep.get("[e0+, e1-] = 0").unwrap().passed());
    }

    #[test]
    fn tensor_associative() {
        let f = q2();
        let (a, b, c) = (
            ev(&f, 1, "3", AlgebraKind::FIRST),
            ev(&f, 2, "-1", AlgebraKind::FIRST),
            ev(&f, 1, "1/2", AlgebraKind::FIRST),
        );
        let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn dual_of_evaluation_module() {
        let f = q2();
        for ell in 1..=3 {
            for a in ["3", "-1/2", "5"] {
                let v = ev(&f, ell, a, AlgebraKind::FIRST);
                let dv = dual(&v).unwrap();
                assert!(verify_loop_relations(&f, &dv).passed());
                let target = build_evaluation(&f, &EvalFactor::new(ell, s(a).inv()), AlgebraKind::FIRST).unwrap();
                let p = dual_basis_change(&f, ell).unwrap();
                assert!(conjugates_to(&dv, &p, &target), "ell={ell} a={a}");
                assert_eq!(dual(&dv).unwrap(), v);
            }
        }
        let t = Representation::trivial(AlgebraKind::FIRST);
        assert_eq!(dual(&t).unwrap(), t);
        assert!(dual(&ev(&f, 1, "3", AlgebraKind::SECOND)).is_err());
    }

    #[test]
    fn dual_basis_for_ell_one() {
        let f = q2();
        let p = dual_basis_change(&f, 1).unwrap();
        assert_eq!(p.diag_entries(), vec![Scalar::one(), s("1/2")]);
    }

    #[test]
    fn embedding() {
        let f = q2();
        for ell in 2..=4 {
            let w = highest_embedding(&f, ell, &s("3"), AlgebraKind::FIRST).unwrap();
            assert!(w.verified(), "ell={ell}: {:?}", w.mismatched);
            assert!(w.vectors[0][0].is_one());
            assert!(w.vectors[0][1..].iter().all(Scalar::is_zero));
        }
        assert!(highest_embedding(&f, 1, &s("3"), AlgebraKind::FIRST).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn tensor_preserves_relations(
            l1 in 1usize..3, l2 in 1usize..3, n1 in 1i64..6, n2 in -5i64..6, kind in 0usize..3
        ) {
            prop_assume!(n2 != 0);
            let f = q2();
            let kind = AlgebraKind::ALL[kind];
            let a = build_evaluation(&f, &EvalFactor::new(l1, Scalar::from_int(n1)), kind).unwrap();
            let b = build_evaluation(&f, &EvalFactor::new(l2, Scalar::from_ratio(1, n2)), kind).unwrap();
            let t = tensor(&a, &b).unwrap();
            prop_assert!(verify_loop_relations(&f, &t).passed());
            prop_assert!(t.check_grading(&f));
        }
    }
}
