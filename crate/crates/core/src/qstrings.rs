//! q-strings `S(ell, a) = {a q^(2i-ell+1) : 0 <= i < ell}` and the
//! combinatorics that classifies irreducible tensor products.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldConfig, FieldError, Scalar};
use crate::loopmod::{AlgebraKind, EvalFactor, ModuleSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QStringError {
    #[error("multiset is not inversion-symmetric at {0}")]
    Asymmetric(Scalar),
    #[error("self-inverse entry {0} has odd multiplicity")]
    OddSelfInverse(Scalar),
    #[error("zero entry in a multiset of nonzero scalars")]
    ZeroEntry,
    #[error("root {0} is the excluded value eps s^-2 + eps* s^2")]
    ForbiddenRoot(Scalar),
    #[error("zeta^2 + ({0}) zeta + 1 does not split over the field")]
    NoSplit(Scalar),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QString {
    pub ell: usize,
    pub a: Scalar,
}

impl QString {
    pub fn new(ell: usize, a: Scalar) -> Self {
        QString { ell, a }
    }

    pub fn elements(&self, field: &FieldConfig) -> Vec<Scalar> {
        let l = self.ell as i64;
        (0..l).map(|i| &self.a * &field.q_pow(2 * i - l + 1)).collect()
    }

    pub fn inverted(&self) -> QString {
        QString::new(self.ell, self.a.inv())
    }

    /// Membership through the q-power ratio and its parity.
    pub fn contains(&self, field: &FieldConfig, c: &Scalar) -> bool {
        if c.is_zero() {
            return false;
        }
        let l = self.ell as i64;
        match field.q_power_ratio(&self.a, c) {
            Ok(Some(m)) => m.abs() < l && (m - (l - 1)).rem_euclid(2) == 0,
            _ => false,
        }
    }

    pub fn contains_by_enumeration(&self, field: &FieldConfig, c: &Scalar) -> bool {
        self.elements(field).contains(c)
    }
}

impl From<&EvalFactor> for QString {
    fn from(f: &EvalFactor) -> Self {
        QString::new(f.ell, f.a.clone())
    }
}

/// One entry of a multiset of scalars.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaEntry {
    pub value: Scalar,
    pub mult: usize,
}

pub fn expand(entries: &[OmegaEntry]) -> Vec<Scalar> {
    entries.iter().flat_map(|e| std::iter::repeat_n(e.value.clone(), e.mult)).collect()
}

/// Sorted `(value, multiplicity)` pairs.
pub fn compact(values: &[Scalar]) -> Vec<OmegaEntry> {
    let mut m: BTreeMap<&Scalar, usize> = BTreeMap::new();
    for v in values {
        *m.entry(v).or_default() += 1;
    }
    m.into_iter().map(|(v, mult)| OmegaEntry { value: v.clone(), mult }).collect()
}

/// Union of the elements of every string, with multiplicity.
pub fn union_of(field: &FieldConfig, ms: &[QString]) -> Vec<Scalar> {
    let mut out: Vec<Scalar> = ms.iter().flat_map(|s| s.elements(field)).collect();
    out.sort();
    out
}

/// Union of `S(ell, a) ∪ S(ell, a^-1)` over the multiset.
pub fn symmetric_union_of(field: &FieldConfig, ms: &[QString]) -> Vec<Scalar> {
    let mut out: Vec<Scalar> =
        ms.iter().flat_map(|s| s.elements(field).into_iter().chain(s.inverted().elements(field))).collect();
    out.sort();
    out
}

pub fn adjacent(field: &FieldConfig, s1: &QString, s2: &QString) -> bool {
    let Ok(Some(m)) = field.q_power_ratio(&s1.a, &s2.a) else { return false };
    let m = m.unsigned_abs() as usize;
    let gap = s1.ell.abs_diff(s2.ell);
    m >= gap + 2 && m <= s1.ell + s2.ell && (m - gap).is_multiple_of(2)
}

pub fn general_position(field: &FieldConfig, ms: &[QString]) -> bool {
    (0..ms.len()).all(|i| (i + 1..ms.len()).all(|j| !adjacent(field, &ms[i], &ms[j])))
}

/// Inverting both strings of a pair gives the same adjacency, so two sign patterns suffice.
pub fn strongly_general_position(field: &FieldConfig, ms: &[QString]) -> bool {
    (0..ms.len()).all(|i| {
        (i + 1..ms.len()).all(|j| {
            !adjacent(field, &ms[i], &ms[j]) && !adjacent(field, &ms[i].inverted(), &ms[j])
        })
    })
}

/// Equal up to permutation and inversion of individual strings.
pub fn equivalent(m1: &[QString], m2: &[QString]) -> bool {
    matches_up_to(m1, m2, |x, y| x.ell == y.ell && (x.a == y.a || x.a == y.a.inv()))
}

/// Equal up to permutation.
pub fn coincide(m1: &[QString], m2: &[QString]) -> bool {
    matches_up_to(m1, m2, |x, y| x == y)
}

// The relation is an equivalence, so greedy matching is exact.
fn matches_up_to(m1: &[QString], m2: &[QString], rel: impl Fn(&QString, &QString) -> bool) -> bool {
    if m1.len() != m2.len() {
        return false;
    }
    let mut used = vec![false; m2.len()];
    m1.iter().all(|x| match (0..m2.len()).find(|&j| !used[j] && rel(x, &m2[j])) {
        Some(j) => {
            used[j] = true;
            true
        }
        None => false,
    })
}

/// The unique general-position multiset of strings whose union is `omega`.
pub fn decompose(field: &FieldConfig, omega: &[Scalar]) -> Result<Vec<QString>, QStringError> {
    // ladder classes: base value plus multiplicity at each q^2-step
    let mut classes: Vec<(Scalar, BTreeMap<i64, usize>)> = Vec::new();
    for c in omega {
        if c.is_zero() {
            return Err(QStringError::ZeroEntry);
        }
        let slot = classes.iter_mut().find_map(|(base, counts)| match field.q_power_ratio(base, c) {
            Ok(Some(m)) if m % 2 == 0 => Some((counts, m / 2)),
            _ => None,
        });
        match slot {
            Some((counts, p)) => *counts.entry(p).or_default() += 1,
            None => classes.push((c.clone(), BTreeMap::from([(0, 1)]))),
        }
    }
    let mut out = Vec::new();
    for (base, mut counts) in classes {
        while !counts.is_empty() {
            let support: Vec<i64> = counts.keys().copied().collect();
            let mut start = 0;
            while start < support.len() {
                let mut end = start;
                while end + 1 < support.len() && support[end + 1] == support[end] + 1 {
                    end += 1;
                }
                let len = (end - start + 1) as i64;
                let lo = support[start];
                out.push(QString::new(len as usize, &base * &field.q_pow(2 * lo + len - 1)));
                start = end + 1;
            }
            for p in support {
                let c = counts.get_mut(&p).expect("present");
                *c -= 1;
                if *c == 0 {
                    counts.remove(&p);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

fn check_symmetric(omega: &[Scalar]) -> Result<(), QStringError> {
    let entries = compact(omega);
    let count = |v: &Scalar| entries.iter().find(|e| &e.value == v).map_or(0, |e| e.mult);
    for e in &entries {
        if e.value.is_zero() {
            return Err(QStringError::ZeroEntry);
        }
        let inv = e.value.inv();
        if inv == e.value {
            if e.mult % 2 == 1 {
                return Err(QStringError::OddSelfInverse(e.value.clone()));
            }
        } else if count(&inv) != e.mult {
            return Err(QStringError::Asymmetric(e.value.clone()));
        }
    }
    Ok(())
}

/// A strongly-general-position multiset `{S(ell_i, a_i)}` with
/// `omega = ⋃ S(ell_i, a_i) ∪ S(ell_i, a_i^-1)`, by peeling maximal elements.
pub fn decompose_symmetric(field: &FieldConfig, omega: &[Scalar]) -> Result<Vec<QString>, QStringError> {
    check_symmetric(omega)?;
    let mut rest: Vec<Scalar> = omega.to_vec();
    let mut peeled = Vec::new();
    while !rest.is_empty() {
        let is_maximal = |c: &Scalar| {
            !rest.iter().any(|b| matches!(field.q_power_ratio(c, b), Ok(Some(m)) if m > 0 && m % 2 == 0))
        };
        let c = rest.iter().filter(|c| is_maximal(c)).min().expect("finite multiset has a maximal element").clone();
        let ci = c.inv();
        for v in [&c, &ci] {
            let at = rest.iter().position(|x| x == v).expect("symmetry checked");
            rest.swap_remove(at);
        }
        peeled.push(c);
    }
    let mut strings: Vec<QString> = Vec::new();
    for c in peeled.into_iter().rev() {
        let mut best: Option<(usize, bool)> = None;
        for (j, s) in strings.iter().enumerate() {
            let top = field.q_pow(s.ell as i64 + 1);
            let direct = c == &s.a * &top;
            let flipped = c.inv() == &s.a * &top.inv();
            if (direct || flipped) && best.is_none_or(|(b, _)| strings[b].ell < s.ell) {
                best = Some((j, direct));
            }
        }
        match best {
            Some((j, direct)) => {
                let base = if direct { strings[j].a.clone() } else { strings[j].a.inv() };
                strings[j] = QString::new(strings[j].ell + 1, &base * &field.q());
            }
            None => strings.push(QString::new(1, c)),
        }
    }
    strings.sort();
    Ok(strings)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub kind: AlgebraKind,
    pub irreducible_as_t_module: bool,
    /// Only present when `t` was supplied.
    pub m_sdt_member: Option<bool>,
    pub failed_conditions: Vec<String>,
    pub b: Option<Scalar>,
    pub b_star: Option<Scalar>,
    pub d: usize,
}

fn avoids(field: &FieldConfig, strings: &[QString], c: &Scalar, both_signs: bool) -> bool {
    strings.iter().all(|s| {
        let by_ratio = s.contains(field, c) || (both_signs && s.inverted().contains(field, c));
        !by_ratio
    })
}

/// Whether `b = ±q^i` for some `|i| <= d-1`.
fn near_power(field: &FieldConfig, b: &Scalar, d: usize) -> bool {
    let one = Scalar::one();
    [b.clone(), -b]
        .iter()
        .any(|v| matches!(field.q_power_ratio(&one, v), Ok(Some(i)) if (i.unsigned_abs() as usize) < d))
}

pub fn classify_module(
    field: &FieldConfig,
    spec: &ModuleSpec,
    s: &Scalar,
    t: Option<&Scalar>,
) -> ClassificationReport {
    let kind = spec.kind;
    let strings: Vec<QString> = spec.factors.iter().map(QString::from).collect();
    let d = spec.diameter();
    let mut failed = Vec::new();
    let first = kind == AlgebraKind::FIRST;
    let positioned = if first {
        strongly_general_position(field, &strings)
    } else {
        general_position(field, &strings)
    };
    if !positioned {
        failed.push("(i.1)".to_string());
    }
    let forbidden = match kind {
        k if k == AlgebraKind::FIRST => Some(-(s * s)),
        k if k == AlgebraKind::SECOND => Some(-(s * s).inv()),
        _ => None,
    };
    if let Some(c) = forbidden {
        if !avoids(field, &strings, &c, first) {
            failed.push("(i.2)".to_string());
        }
    }
    if d != spec.leading_trivial_ell + strings.iter().map(|s| s.ell).sum::<usize>() {
        failed.push("(i.3)".to_string());
    }
    let irreducible = failed.is_empty();
    let (mut m_sdt, mut b, mut b_star) = (None, None, None);
    if let Some(t) = t {
        let bb = s * t;
        let bs = s / t;
        if kind.epsilon() == 1 && near_power(field, &bb, d) {
            failed.push("(17)".to_string());
        }
        if kind.epsilon_star() == 1 && near_power(field, &bs, d) {
            failed.push("(18)".to_string());
        }
        if !avoids(field, &strings, &-(t * t), first) {
            failed.push("(ii.1)".to_string());
        }
        m_sdt = Some(failed.is_empty());
        b = Some(bb);
        b_star = Some(bs);
    }
    ClassificationReport {
        kind,
        irreducible_as_t_module: irreducible,
        m_sdt_member: m_sdt,
        failed_conditions: failed,
        b,
        b_star,
        d,
    }
}

/// A module spec whose Drinfel'd polynomial has exactly the given roots.
pub fn realize_polynomial(
    field: &FieldConfig,
    roots: &[Scalar],
    kind: AlgebraKind,
    s: &Scalar,
) -> Result<ModuleSpec, QStringError> {
    let s2 = s * s;
    let forbidden = &kind.eps() * &s2.inv() + &kind.eps_star() * &s2;
    for r in roots {
        field.check(r)?;
        if r == &forbidden {
            return Err(QStringError::ForbiddenRoot(r.clone()));
        }
    }
    let two = Scalar::from_int(2);
    let to_spec = |strings: Vec<QString>, lead: usize| {
        let factors = strings.into_iter().map(|q| EvalFactor::new(q.ell, q.a)).collect();
        ModuleSpec::new(kind, factors).with_leading(lead)
    };
    if kind == AlgebraKind::FIRST {
        let mut omega = Vec::with_capacity(2 * roots.len());
        for lam in roots {
            let disc = lam * lam - Scalar::from_int(4);
            let r = field.sqrt(&disc).ok_or_else(|| QStringError::NoSplit(lam.clone()))?;
            omega.push((-lam + &r) / &two);
            omega.push((-lam - &r) / &two);
        }
        return Ok(to_spec(decompose_symmetric(field, &omega)?, 0));
    }
    let zeros = roots.iter().filter(|r| r.is_zero()).count();
    let omega: Vec<Scalar> = roots.iter().filter(|r| !r.is_zero()).map(|r| -r).collect();
    Ok(to_spec(decompose(field, &omega)?, zeros))
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

    fn qs(ell: usize, a: &str) -> QString {
        QString::new(ell, s(a))
    }

    // Adjacent iff the union is one string strictly longer than both.
    fn adjacent_by_union(f: &FieldConfig, a: &QString, b: &QString) -> bool {
        let mut u = a.elements(f);
        for e in b.elements(f) {
            if !u.contains(&e) {
                u.push(e);
            }
        }
        if u.len() <= a.ell.max(b.ell) {
            return false;
        }
        let lo = u.iter().find(|c| !u.contains(&(*c * &f.q_pow(-2)))).cloned();
        let Some(lo) = lo else { return false };
        let run: Vec<Scalar> = (0..u.len() as i64).map(|i| &lo * &f.q_pow(2 * i)).collect();
        run.iter().all(|c| u.contains(c))
    }

    #[test]
    fn elements_and_membership() {
        let f = q2();
        assert_eq!(qs(3, "1").elements(&f), vec![s("1/4"), s("1"), s("4")]);
        assert_eq!(qs(2, "1").elements(&f), vec![s("1/2"), s("2")]);
        assert!(qs(2, "1").contains(&f, &s("2")));
        assert!(!qs(2, "1").contains(&f, &s("1")));
        assert!(!qs(2, "1").contains(&f, &s("8")));
    }

    #[test]
    fn adjacency_examples() {
        let f = q2();
        assert!(adjacent(&f, &qs(1, "2"), &qs(1, "1/2")));
        assert!(!adjacent(&f, &qs(2, "3"), &qs(2, "3")));
        assert!(!adjacent(&f, &qs(1, "1"), &qs(1, "3")));
        assert!(general_position(&f, &[]));
        assert!(general_position(&f, &[qs(3, "5"), qs(1, "5")]));
        assert!(!general_position(&f, &[qs(1, "2"), qs(1, "1/2")]));
    }

    #[test]
    fn strong_position_examples() {
        let f = q2();
        assert!(!strongly_general_position(&f, &[qs(1, "2"), qs(1, "2")]));
        assert!(general_position(&f, &[qs(1, "2"), qs(1, "2")]));
        assert!(strongly_general_position(&f, &[qs(2, "5"), qs(2, "5")]));
    }

    #[test]
    fn equivalence_examples() {
        let m = [qs(2, "3"), qs(1, "5")];
        assert!(equivalent(&m, &m));
        assert!(equivalent(&[qs(2, "3")], &[qs(2, "1/3")]));
        assert!(!equivalent(&[qs(1, "3")], &[qs(2, "3")]));
        assert!(!coincide(&[qs(2, "3")], &[qs(2, "1/3")]));
    }

    #[test]
    fn decompose_examples() {
        let f = q2();
        let a = qs(3, "7");
        assert_eq!(decompose(&f, &a.elements(&f)).unwrap(), vec![a]);
        assert_eq!(decompose(&f, &[s("2"), s("1/2")]).unwrap(), vec![qs(2, "1")]);
        assert_eq!(decompose(&f, &[s("3"), s("3")]).unwrap(), vec![qs(1, "3"), qs(1, "3")]);
        // ladder {1,4,4,16}: layers [1,4,16] and [4]
        let out = decompose(&f, &[s("1"), s("4"), s("4"), s("16")]).unwrap();
        assert!(coincide(&out, &[qs(3, "4"), qs(1, "4")]));
    }

    #[test]
    fn decompose_symmetric_examples() {
        let f = q2();
        assert_eq!(decompose_symmetric(&f, &[s("2"), s("1/2")]).unwrap(), vec![qs(1, "2")]);
        assert_eq!(decompose_symmetric(&f, &[s("-1"), s("-1")]).unwrap(), vec![qs(1, "-1")]);
        assert!(matches!(decompose_symmetric(&f, &[s("2"), s("3")]), Err(QStringError::Asymmetric(_))));
        assert!(matches!(decompose_symmetric(&f, &[s("1")]), Err(QStringError::OddSelfInverse(_))));
    }

    #[test]
    fn classify_examples() {
        let f = q2();
        let k3 = ModuleSpec::new(AlgebraKind::THIRD, vec![EvalFactor::new(1, s("2")), EvalFactor::new(1, s("1/2"))]);
        let r = classify_module(&f, &k3, &s("1"), None);
        assert!(!r.irreducible_as_t_module);
        assert_eq!(r.failed_conditions, vec!["(i.1)"]);
        let sv = s("3");
        let k1 = ModuleSpec::new(AlgebraKind::FIRST, vec![EvalFactor::new(1, -(&sv * &sv))]);
        let r = classify_module(&f, &k1, &sv, None);
        assert_eq!(r.failed_conditions, vec!["(i.2)"]);
        let k1 = ModuleSpec::new(AlgebraKind::FIRST, vec![EvalFactor::new(2, s("5"))]);
        let r = classify_module(&f, &k1, &s("1"), Some(&s("2")));
        assert!(r.irreducible_as_t_module);
        assert_eq!(r.m_sdt_member, Some(false));
        assert!(r.failed_conditions.contains(&"(17)".to_string()));
        let k2 = ModuleSpec::new(AlgebraKind::SECOND, vec![EvalFactor::new(1, s("-1/9"))]);
        assert!(!classify_module(&f, &k2, &s("3"), None).irreducible_as_t_module);
    }

    #[test]
    fn realize_examples() {
        let f = q2();
        let a = s("5");
        let spec = realize_polynomial(&f, &[-&a], AlgebraKind::THIRD, &s("1")).unwrap();
        assert_eq!(spec.factors, vec![EvalFactor::new(1, a.clone())]);
        let spec = realize_polynomial(&f, &vec![Scalar::zero(); 3], AlgebraKind::SECOND, &s("1")).unwrap();
        assert_eq!(spec.leading_trivial_ell, 3);
        assert!(spec.factors.is_empty());
        let spec = realize_polynomial(&f, &[-(&a / &f.q()), -(&a * &f.q())], AlgebraKind::THIRD, &s("1")).unwrap();
        assert_eq!(spec.factors, vec![EvalFactor::new(2, a)]);
        assert!(matches!(
            realize_polynomial(&f, &[Scalar::from_int(2)], AlgebraKind::FIRST, &s("1")),
            Err(QStringError::ForbiddenRoot(_))
        ));
        assert!(matches!(
            realize_polynomial(&f, &[Scalar::one()], AlgebraKind::FIRST, &s("3")),
            Err(QStringError::NoSplit(_))
        ));
    }

    fn arb_string() -> impl Strategy<Value = QString> {
        (1usize..4, prop::sample::select(vec![1i64, -1, 3, -3]), -4i64..5)
            .prop_map(|(ell, u, e)| QString::new(ell, Scalar::from_int(u) * q2().q_pow(e)))
    }

    proptest! {
        #[test]
        fn adjacency_matches_union(a in arb_string(), b in arb_string()) {
            let f = q2();
            prop_assert_eq!(adjacent(&f, &a, &b), adjacent(&f, &b, &a));
            prop_assert_eq!(adjacent(&f, &a, &b), adjacent_by_union(&f, &a, &b));
        }

        #[test]
        fn membership_paths_agree(a in arb_string(), u in prop::sample::select(vec![1i64, -1, 3]), e in -6i64..7) {
            let f = q2();
            let c = Scalar::from_int(u) * f.q_pow(e);
            prop_assert_eq!(a.contains(&f, &c), a.contains_by_enumeration(&f, &c));
        }

        #[test]
        fn decompose_round_trip(ms in prop::collection::vec(arb_string(), 0..5), seed in any::<u64>()) {
            let f = q2();
            let mut omega = union_of(&f, &ms);
            let out = decompose(&f, &omega).unwrap();
            prop_assert!(general_position(&f, &out));
            prop_assert_eq!(union_of(&f, &out), omega.clone());
            let n = omega.len();
            if n > 1 {
                omega.rotate_left((seed as usize) % n);
            }
            prop_assert!(coincide(&decompose(&f, &omega).unwrap(), &out));
        }

        #[test]
        fn decompose_symmetric_round_trip(ms in prop::collection::vec(arb_string(), 0..4)) {
            let f = q2();
            let omega = symmetric_union_of(&f, &ms);
            let out = decompose_symmetric(&f, &omega).unwrap();
            prop_assert!(strongly_general_position(&f, &out));
            prop_assert_eq!(symmetric_union_of(&f, &out), omega);
        }

        #[test]
        fn equivalence_is_an_equivalence(
            a in prop::collection::vec(arb_string(), 0..3),
            flips in prop::collection::vec(any::<bool>(), 3),
        ) {
            let b: Vec<QString> = a.iter().zip(&flips).map(|(s, &f)| if f { s.inverted() } else { s.clone() }).rev().collect();
            let c: Vec<QString> = b.iter().map(QString::inverted).collect();
            prop_assert!(equivalent(&a, &a));
            prop_assert!(equivalent(&a, &b) && equivalent(&b, &a));
            prop_assert!(equivalent(&b, &c) && equivalent(&a, &c));
        }
    }
}
