//! Exhaustive small grid: every module spec up to a diameter bound, with the
//! criteria-versus-oracle and consistency checks run on each.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    drinfeld_closed_form, drinfeld_from_sigma, norton_irreducible, shape_product_formula, sigma_recursion_check,
    sigma_sequence, special_point, td_pair_verify, weight_decomposition, NortonConfig,
};
use crate::field::{FieldConfig, FieldError, Scalar};
use crate::loopmod::{build_module, verify_loop_relations, AlgebraKind, EvalFactor, ModuleSpec, RelationReport};
use crate::qstrings::classify_module;
use crate::tdalg::{iota_t, phi_s, theta_sequences, verify_a_relations, verify_t_relations};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("instance {label} has dimension {dim}, above the cap {cap}")]
    CapExceeded { label: String, dim: usize, cap: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridChecks {
    pub relations: bool,
    pub drinfeld: bool,
    pub sigma: bool,
    pub criteria: bool,
    pub shape: bool,
    /// Largest diameter of `V` for the recursion against `V(1,a)`; `None` skips it.
    pub recursion_max_diameter: Option<usize>,
    pub td_pairs: bool,
}

impl Default for GridChecks {
    fn default() -> Self {
        GridChecks {
            relations: true,
            drinfeld: true,
            sigma: true,
            criteria: true,
            shape: true,
            recursion_max_diameter: Some(4),
            td_pairs: true,
        }
    }
}

impl GridChecks {
    pub fn only_relations() -> Self {
        GridChecks {
            relations: true,
            drinfeld: false,
            sigma: false,
            criteria: false,
            shape: false,
            recursion_max_diameter: None,
            td_pairs: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub field: FieldConfig,
    pub kinds: Vec<AlgebraKind>,
    pub max_diameter: usize,
    pub cap: usize,
    pub a_values: Vec<Scalar>,
    pub s_values: Vec<Scalar>,
    pub t_values: Vec<Scalar>,
    pub seed: u64,
    pub checks: GridChecks,
}

impl Default for GridConfig {
    fn default() -> Self {
        let sc = |v: &str| v.parse::<Scalar>().expect("literal");
        GridConfig {
            field: FieldConfig::rational(2, 1).expect("q = 2"),
            kinds: AlgebraKind::ALL.to_vec(),
            max_diameter: 6,
            cap: 64,
            a_values: ["2", "3", "1/2", "-1", "5"].iter().map(|v| sc(v)).collect(),
            s_values: vec![sc("1")],
            t_values: vec![sc("7")],
            seed: 0,
            checks: GridChecks::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridInstance {
    pub id: usize,
    pub label: String,
    pub spec: ModuleSpec,
    pub s: Scalar,
}

pub fn spec_label(spec: &ModuleSpec) -> String {
    let mut parts = Vec::new();
    if spec.leading_trivial_ell > 0 {
        parts.push(format!("V({})", spec.leading_trivial_ell));
    }
    parts.extend(spec.factors.iter().map(|f| format!("V({},{})", f.ell, f.a)));
    if parts.is_empty() {
        parts.push("trivial".into());
    }
    format!("{} {}", spec.kind.label(), parts.join("⊗"))
}

// Non-decreasing lists of (ell, a index) with total ell at most `budget`.
fn multisets(budget: usize, n_a: usize, from: (usize, usize), acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    out.push(acc.clone());
    for ell in from.0..=budget {
        let a0 = if ell == from.0 { from.1 } else { 0 };
        for ai in a0..n_a {
            acc.push((ell, ai));
            multisets(budget - ell, n_a, (ell, ai), acc, out);
            acc.pop();
        }
    }
}

/// All grid instances in lexicographic order of
/// (kind, leading length, factor count, ell-composition, parameter indices).
pub fn enumerate(cfg: &GridConfig) -> Result<Vec<GridInstance>, GridError> {
    let mut keyed = Vec::new();
    for (ki, &kind) in cfg.kinds.iter().enumerate() {
        let leads: Vec<usize> = if kind == AlgebraKind::SECOND { (0..=cfg.max_diameter).collect() } else { vec![0] };
        for lead in leads {
            let mut lists = Vec::new();
            multisets(cfg.max_diameter - lead, cfg.a_values.len(), (1, 0), &mut Vec::new(), &mut lists);
            for list in lists {
                let ells: Vec<usize> = list.iter().map(|p| p.0).collect();
                let idx: Vec<usize> = list.iter().map(|p| p.1).collect();
                for (si, s) in cfg.s_values.iter().enumerate() {
                    keyed.push(((ki, lead, list.len(), ells.clone(), idx.clone(), si), kind, lead, list.clone(), s.clone()));
                }
            }
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = Vec::with_capacity(keyed.len());
    for (id, (_, kind, lead, list, s)) in keyed.into_iter().enumerate() {
        let factors = list.iter().map(|&(ell, ai)| EvalFactor::new(ell, cfg.a_values[ai].clone())).collect();
        let spec = ModuleSpec::new(kind, factors).with_leading(lead);
        let label = format!("{} s={}", spec_label(&spec), s);
        if spec.dim() > cfg.cap {
            return Err(GridError::CapExceeded { label, dim: spec.dim(), cap: cfg.cap });
        }
        for a in &cfg.a_values {
            cfg.field.check(a)?;
        }
        out.push(GridInstance { id, label, spec, s });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceResult {
    pub id: usize,
    pub label: String,
    pub dim: usize,
    pub d: usize,
    pub irreducible_criteria: Option<bool>,
    pub irreducible_oracle: Option<bool>,
    pub drinfeld: Vec<Scalar>,
    pub shape: Vec<usize>,
    pub recursion_checked: usize,
    pub td_checked: usize,
    pub failures: Vec<String>,
}

impl InstanceResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridSummary {
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub irreducible: usize,
    pub reducible: usize,
    pub recursion_checked: usize,
    pub td_checked: usize,
    pub first_counterexample: Option<InstanceResult>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridReport {
    pub summary: GridSummary,
    pub results: Vec<InstanceResult>,
}

impl GridReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

fn note_relations(fails: &mut Vec<String>, tag: &str, rep: &RelationReport) {
    fails.extend(rep.failures().into_iter().map(|f| format!("{tag}: {f}")));
}

pub fn run_instance(cfg: &GridConfig, inst: &GridInstance) -> InstanceResult {
    let field = &cfg.field;
    let ch = &cfg.checks;
    let spec = &inst.spec;
    let mut res = InstanceResult {
        id: inst.id,
        label: inst.label.clone(),
        dim: spec.dim(),
        d: spec.diameter(),
        irreducible_criteria: None,
        irreducible_oracle: None,
        drinfeld: Vec::new(),
        shape: Vec::new(),
        recursion_checked: 0,
        td_checked: 0,
        failures: Vec::new(),
    };
    let fails = &mut res.failures;
    let rep = match build_module(field, spec) {
        Ok(r) => r,
        Err(e) => {
            fails.push(format!("build: {e}"));
            return res;
        }
    };
    let tm = match phi_s(field, &rep, &inst.s) {
        Ok(t) => t,
        Err(e) => {
            fails.push(format!("phi_s: {e}"));
            return res;
        }
    };
    if ch.relations {
        note_relations(fails, "loop", &verify_loop_relations(field, &rep));
        note_relations(fails, "T", &verify_t_relations(field, &tm));
        if let Some(t) = cfg.t_values.first() {
            match iota_t(&tm, t) {
                Ok(c) => note_relations(fails, "A", &verify_a_relations(field, &c)),
                Err(e) => fails.push(format!("iota_t: {e}")),
            }
        }
    }
    let needs_sigma = ch.drinfeld || ch.sigma || ch.td_pairs || ch.recursion_max_diameter.is_some();
    let weights = weight_decomposition(field, &tm);
    match &weights {
        Ok(w) => res.shape = w.dims.clone(),
        Err(e) => fails.push(format!("weights: {e}")),
    }
    let mut poly = None;
    if needs_sigma {
        match sigma_sequence(field, &tm) {
            Ok(sg) => {
                let p = drinfeld_from_sigma(field, &sg, &inst.s, spec.kind);
                let closed = drinfeld_closed_form(field, spec);
                if ch.drinfeld && p != closed {
                    fails.push("drinfeld: definition differs from closed form".into());
                }
                if ch.sigma {
                    let d = sg.sigma.len() - 1;
                    let pt = special_point(spec.kind, &inst.s);
                    if !sg.sigma[0].is_one() {
                        fails.push("sigma: sigma_0 != 1".into());
                    }
                    if p.eval(&pt) != &sg.sigma[d] / &field.q_d_norm(d) {
                        fails.push("sigma: P_V(eps s^-2 + eps* s^2) != sigma_d / Q_d".into());
                    }
                    if sg.sigma[d].is_zero() != closed.eval(&pt).is_zero() {
                        fails.push("sigma: sigma_d = 0 disagrees with the closed form".into());
                    }
                }
                res.drinfeld = p.coeffs().to_vec();
                poly = Some(p);
            }
            Err(e) => fails.push(format!("sigma: {e}")),
        }
    }
    let mut irreducible = None;
    if ch.criteria || ch.shape || ch.td_pairs {
        let crit = classify_module(field, spec, &inst.s, None).irreducible_as_t_module;
        res.irreducible_criteria = Some(crit);
        irreducible = Some(crit);
        if ch.criteria {
            let verdict = norton_irreducible(field, &tm);
            res.irreducible_oracle = match &verdict {
                crate::analysis::Irreducibility::Undecided => None,
                v => Some(v.is_irreducible()),
            };
            if let Some(w) = verdict.witness() {
                let proper = w.dim() > 0 && w.dim() < tm.dim();
                if !proper || !tm.generators().iter().all(|g| w.is_invariant(g)) {
                    fails.push("criteria: witness is not a proper invariant subspace".into());
                }
            }
            if res.irreducible_oracle != Some(crit) {
                fails.push(format!("criteria: classify={crit} oracle={:?}", res.irreducible_oracle));
            }
        }
    }
    if ch.shape {
        if let Ok(w) = &weights {
            let d = w.d;
            if w.dims.iter().enumerate().any(|(i, &n)| n as u64 > binomial(d, i)) {
                fails.push("shape: dim U_i exceeds binom(d, i)".into());
            }
            if irreducible == Some(true) {
                let mut ells: Vec<usize> = spec.factors.iter().map(|f| f.ell).collect();
                if spec.leading_trivial_ell > 0 {
                    ells.push(spec.leading_trivial_ell);
                }
                let g: Vec<u64> = w.dims.iter().map(|&n| n as u64).collect();
                if g != shape_product_formula(&ells) {
                    fails.push("shape: generating function differs from the product formula".into());
                }
                if (0..=d).any(|i| w.dims[i] != w.dims[d - i]) {
                    fails.push("shape: dims not palindromic".into());
                }
            }
        }
    }
    if let Some(max_d) = ch.recursion_max_diameter {
        if res.d <= max_d {
            for a in &cfg.a_values {
                match sigma_recursion_check(field, &tm, a) {
                    Ok(ws) => {
                        res.recursion_checked += 1;
                        if let Some(w) = ws.iter().find(|w| !w.passed()) {
                            fails.push(format!("recursion: a={a} i={}", w.i));
                        }
                    }
                    Err(e) => fails.push(format!("recursion: a={a}: {e}")),
                }
            }
        }
    }
    if ch.td_pairs && irreducible == Some(true) {
        let norton = NortonConfig { seed: cfg.seed, ..NortonConfig::default() };
        for t in &cfg.t_values {
            let th = theta_sequences(field, &inst.s, t, res.d, spec.kind);
            let t2 = t * t;
            let lam = &t2 + &(&(&spec.kind.eps() * &spec.kind.eps_star()) * &t2.inv());
            let nonroot = poly.as_ref().is_some_and(|p| !p.eval(&lam).is_zero());
            let member = classify_module(field, spec, &inst.s, Some(t)).m_sdt_member == Some(true);
            if member != (th.admissible() && nonroot) {
                fails.push(format!("td: t={t}: membership disagrees with theta/P_V conditions"));
            }
            if !member {
                continue;
            }
            let Ok(c) = iota_t(&tm, t) else { continue };
            let r = td_pair_verify(field, &c, &norton);
            res.td_checked += 1;
            let shape_ok = r.shape == res.shape;
            if !(r.axioms_hold() && r.split_matches_weights && r.e0star_identity && shape_ok) {
                fails.push(format!(
                    "td: t={t}: axioms={} split={} e0*={} shape={}",
                    r.axioms_hold(),
                    r.split_matches_weights,
                    r.e0star_identity,
                    shape_ok
                ));
            }
        }
    }
    res
}

pub fn run_grid(cfg: &GridConfig) -> Result<GridReport, GridError> {
    let instances = enumerate(cfg)?;
    let mut results: Vec<InstanceResult> = instances.par_iter().map(|i| run_instance(cfg, i)).collect();
    results.sort_by_key(|r| r.id);
    let failed = results.iter().filter(|r| !r.passed()).count();
    let summary = GridSummary {
        instances: results.len(),
        passed: results.len() - failed,
        failed,
        irreducible: results.iter().filter(|r| r.irreducible_criteria == Some(true)).count(),
        reducible: results.iter().filter(|r| r.irreducible_criteria == Some(false)).count(),
        recursion_checked: results.iter().map(|r| r.recursion_checked).sum(),
        td_checked: results.iter().map(|r| r.td_checked).sum(),
        first_counterexample: results.iter().find(|r| !r.passed()).cloned(),
    };
    Ok(GridReport { summary, results })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(max_d: usize) -> GridConfig {
        GridConfig { max_diameter: max_d, ..GridConfig::default() }
    }

    // Number of multisets of (ell, a) pairs, ell >= 1, with total ell <= n, counted by brute force.
    fn count_brute(n: usize, n_a: usize) -> usize {
        // coloured partitions: p(m) = number of multisets with total exactly m
        let mut p = vec![0usize; n + 1];
        p[0] = 1;
        for ell in 1..=n {
            for _ in 0..n_a {
                for m in ell..=n {
                    p[m] += p[m - ell];
                }
            }
        }
        p.iter().sum()
    }

    #[test]
    fn enumeration_counts() {
        let cfg = GridConfig { kinds: vec![AlgebraKind::FIRST], ..small(3) };
        assert_eq!(enumerate(&cfg).unwrap().len(), count_brute(3, 5));
        let cfg = GridConfig { kinds: vec![AlgebraKind::SECOND], ..small(2) };
        let expect: usize = (0..=2).map(|l| count_brute(2 - l, 5)).sum();
        assert_eq!(enumerate(&cfg).unwrap().len(), expect);
        let ids: Vec<usize> = enumerate(&small(2)).unwrap().iter().map(|i| i.id).collect();
        assert_eq!(ids, (0..ids.len()).collect::<Vec<_>>());
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = GridConfig { cap: 4, ..small(6) };
        assert!(matches!(enumerate(&cfg), Err(GridError::CapExceeded { .. })));
    }

    #[test]
    fn tiny_grid_passes() {
        let rep = run_grid(&small(2)).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.summary.first_counterexample);
        assert!(rep.summary.reducible > 0 && rep.summary.irreducible > 0);
        assert!(rep.summary.td_checked > 0);
    }

    #[test]
    fn binomials() {
        assert_eq!((0..=6).map(|k| binomial(6, k)).collect::<Vec<_>>(), vec![1, 6, 15, 20, 15, 6, 1]);
    }
}
