//! The augmented algebra `T` on loop modules via `phi_s`, and the
//! tridiagonal algebra `A` on top of it via `iota_t`.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldConfig, Scalar};
use crate::linalg::Matrix;
use crate::loopmod::{serre, AlgebraKind, RelationReport, Representation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TdError {
    #[error("the type s must be nonzero")]
    ZeroS,
    #[error("the parameter t must be nonzero")]
    ZeroT,
    #[error("kind (1,1) needs f0 but the representation has none")]
    MissingF0,
}

/// Matrices of `x`, `y`, `k^{±1}` on a loop module pulled back along `phi_s`.
#[derive(Clone, Debug)]
pub struct TModule {
    pub x: Matrix,
    pub y: Matrix,
    pub k: Matrix,
    pub k_inv: Matrix,
    pub type_s: Scalar,
    pub d: usize,
    pub weights: Vec<usize>,
    pub kind: AlgebraKind,
    pub rep: Arc<Representation>,
}

impl TModule {
    pub fn dim(&self) -> usize {
        self.x.rows()
    }

    pub fn generators(&self) -> [&Matrix; 4] {
        [&self.x, &self.y, &self.k, &self.k_inv]
    }
}

/// `x = alpha(s e0+ + eps s^-1 f1)`, `y = eps* s f0 + s^-1 e1+`, `k = s k0`.
pub fn phi_s(field: &FieldConfig, r: &Representation, s: &Scalar) -> Result<TModule, TdError> {
    if s.is_zero() {
        return Err(TdError::ZeroS);
    }
    let kind = r.kind;
    let si = s.inv();
    let alpha = field.constants().alpha;
    let mut x = r.e0p.scale(s);
    if kind.epsilon() == 1 {
        x = &x + &r.f1.scale(&si);
    }
    let x = x.scale(&alpha);
    let mut y = r.e1p.scale(&si);
    if kind.epsilon_star() == 1 {
        let f0 = r.f0.as_ref().ok_or(TdError::MissingF0)?;
        y = &y + &f0.scale(s);
    }
    Ok(TModule {
        x,
        y,
        k: r.k0.scale(s),
        k_inv: r.k0_inv.scale(&si),
        type_s: s.clone(),
        d: r.d,
        weights: r.weights.clone(),
        kind,
        rep: Arc::new(r.clone()),
    })
}

pub fn verify_t_relations(field: &FieldConfig, tm: &TModule) -> RelationReport {
    let mut rep = RelationReport::default();
    let n = tm.dim();
    let id = Matrix::identity(n);
    let c = field.constants();
    let (x, y, k, ki) = (&tm.x, &tm.y, &tm.k, &tm.k_inv);
    let eps = tm.kind.eps();
    let eps_s = tm.kind.eps_star();
    rep.push("k k^-1 = 1", &(k * ki) - &id);
    rep.push("k^-1 k = 1", &(ki * k) - &id);
    rep.push("k x k^-1 = q^2 x", &(&(k * x) * ki) - &x.scale(&field.q_pow(2)));
    rep.push("k y k^-1 = q^-2 y", &(&(k * y) * ki) - &y.scale(&field.q_pow(-2)));
    let (xx, yy, kk, kki) = (x * x, y * y, k * k, ki * ki);
    let rhs_x = (&(&xx * &kk).scale(&eps_s) - &(&kki * &xx).scale(&eps)).scale(&c.delta_prime);
    rep.push("[x, x^2 y - beta x y x + y x^2] = delta'(eps* x^2 k^2 - eps k^-2 x^2)", &serre(x, y, &c.beta) - &rhs_x);
    let rhs_y = (&(&yy * &kki).scale(&eps) - &(&kk * &yy).scale(&eps_s)).scale(&c.delta_prime);
    rep.push("[y, y^2 x - beta y x y + x y^2] = delta'(-eps* k^2 y^2 + eps y^2 k^-2)", &serre(y, x, &c.beta) - &rhs_y);
    rep
}

/// `A = x + t k + eps t^-1 k^-1`, `A* = y + eps* t^-1 k + t k^-1`.
#[derive(Clone, Debug)]
pub struct TDPairCandidate {
    pub a: Matrix,
    pub a_star: Matrix,
    pub t: Scalar,
    pub b: Scalar,
    pub b_star: Scalar,
    pub parent: TModule,
}

pub fn iota_t(tm: &TModule, t: &Scalar) -> Result<TDPairCandidate, TdError> {
    if t.is_zero() {
        return Err(TdError::ZeroT);
    }
    let ti = t.inv();
    let a = &(&tm.x + &tm.k.scale(t)) + &tm.k_inv.scale(&(&tm.kind.eps() * &ti));
    let a_star = &(&tm.y + &tm.k.scale(&(&tm.kind.eps_star() * &ti))) + &tm.k_inv.scale(t);
    Ok(TDPairCandidate {
        a,
        a_star,
        t: t.clone(),
        b: &tm.type_s * t,
        b_star: &tm.type_s * &ti,
        parent: tm.clone(),
    })
}

pub fn verify_a_relations(field: &FieldConfig, c: &TDPairCandidate) -> RelationReport {
    let mut rep = RelationReport::default();
    let tm = &c.parent;
    let n = tm.dim();
    let id = Matrix::identity(n);
    let consts = field.constants();
    let (a, s, k, ki) = (&c.a, &c.a_star, &tm.k, &tm.k_inv);
    let eps = tm.kind.eps();
    let eps_s = tm.kind.eps_star();
    let q = field.q_pow(1);
    let qi = field.q_pow(-1);
    let den = (&q - &qi).inv();
    let ti = c.t.inv();
    rep.push("k k^-1 = 1", &(k * ki) - &id);
    let lhs = (&(a * k).scale(&q) - &(k * a).scale(&qi)).scale(&den);
    let rhs = &(k * k).scale(&c.t) + &id.scale(&(&eps * &ti));
    rep.push("(q A k - q^-1 k A)/(q - q^-1) = t k^2 + eps t^-1", &lhs - &rhs);
    let lhs = (&(k * s).scale(&q) - &(s * k).scale(&qi)).scale(&den);
    let rhs = &(k * k).scale(&(&eps_s * &ti)) + &id.scale(&c.t);
    rep.push("(q k A* - q^-1 A* k)/(q - q^-1) = eps* t^-1 k^2 + t", &lhs - &rhs);
    let rhs = a.commutator(s).scale(&(&eps * &consts.delta));
    rep.push("[A, A^2 A* - beta A A* A + A* A^2] = eps delta [A, A*]", &serre(a, s, &consts.beta) - &rhs);
    let rhs = s.commutator(a).scale(&(&eps_s * &consts.delta));
    rep.push("[A*, A*^2 A - beta A* A A* + A A*^2] = eps* delta [A*, A]", &serre(s, a, &consts.beta) - &rhs);
    rep
}

/// Standardized eigenvalue sequences of `A` and `A*`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaData {
    pub theta: Vec<Scalar>,
    pub theta_star: Vec<Scalar>,
    pub s: Scalar,
    pub t: Scalar,
    pub d: usize,
    pub b: Scalar,
    pub b_star: Scalar,
    /// `st != ±eps q^i` for `|i| <= d-1`.
    pub theta_distinct: bool,
    /// `st^-1 != ±eps* q^i` for `|i| <= d-1`.
    pub theta_star_distinct: bool,
    pub theta_distinct_pairwise: bool,
    pub theta_star_distinct_pairwise: bool,
}

impl ThetaData {
    pub fn admissible(&self) -> bool {
        self.theta_distinct && self.theta_star_distinct
    }
}

fn all_distinct(v: &[Scalar]) -> bool {
    (0..v.len()).all(|i| (i + 1..v.len()).all(|j| v[i] != v[j]))
}

/// Whether `b = ±q^i` for some `|i| <= d-1`.
fn hits_power(field: &FieldConfig, b: &Scalar, d: usize) -> bool {
    let one = Scalar::one();
    [b.clone(), -b].iter().any(|v| {
        matches!(field.q_power_ratio(&one, v), Ok(Some(i)) if (i.unsigned_abs() as usize) < d)
    })
}

pub fn theta_sequences(field: &FieldConfig, s: &Scalar, t: &Scalar, d: usize, kind: AlgebraKind) -> ThetaData {
    let b = s * t;
    let b_star = s / t;
    let eps = kind.eps();
    let eps_s = kind.eps_star();
    let di = d as i64;
    let (bi, bsi) = (b.inv(), b_star.inv());
    let theta: Vec<Scalar> = (0..=di)
        .map(|i| &b * &field.q_pow(2 * i - di) + &eps * &bi * field.q_pow(di - 2 * i))
        .collect();
    let theta_star: Vec<Scalar> = (0..=di)
        .map(|i| &eps_s * &b_star * field.q_pow(2 * i - di) + &bsi * &field.q_pow(di - 2 * i))
        .collect();
    ThetaData {
        theta_distinct: kind.epsilon() == 0 || !hits_power(field, &b, d),
        theta_star_distinct: kind.epsilon_star() == 0 || !hits_power(field, &b_star, d),
        theta_distinct_pairwise: all_distinct(&theta),
        theta_star_distinct_pairwise: all_distinct(&theta_star),
        theta,
        theta_star,
        s: s.clone(),
        t: t.clone(),
        d,
        b,
        b_star,
    }
}
