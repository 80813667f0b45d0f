//! Mixed-integer models of the maximum quasi-clique problem.
//!
//! Three formulations are built as plain data: a big-M linearization over
//! vertex indicators (`Mip7`), an edge-variable model with a size selector
//! (`Mip8`), and a degree-weighted variant of it (`Mip9`). Models can be
//! checked against an assignment and written to or read from LP files.

pub mod lp;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Gamma, Graph, VertexSet};

/// Feasibility tolerance used by [`check`].
pub const CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    #[serde(with = "lower_bound")]
    pub lower: f64,
    #[serde(with = "upper_bound")]
    pub upper: f64,
}

// JSON has no infinities; an unbounded side is stored as null.
macro_rules! bound_serde {
    ($name:ident, $inf:expr) => {
        mod $name {
            use serde::{Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                if v.is_infinite() {
                    s.serialize_none()
                } else {
                    s.serialize_some(v)
                }
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                Ok(Option::<f64>::deserialize(d)?.unwrap_or($inf))
            }
        }
    };
}
bound_serde!(lower_bound, f64::NEG_INFINITY);
bound_serde!(upper_bound, f64::INFINITY);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// Sparse linear expression over variable indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinExpr(pub Vec<(usize, f64)>);

impl LinExpr {
    /// Sorts by variable, merges duplicates and drops zero coefficients.
    pub fn canonical(mut self) -> Self {
        self.0.sort_by_key(|&(v, _)| v);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.0.len());
        for (v, c) in self.0 {
            match out.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        LinExpr(out)
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.0.iter().map(|&(v, c)| c * values[v]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub expr: LinExpr,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: Sense,
    pub expr: LinExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Formulation {
    Mip7 { nu: f64, corrected_7e: bool },
    Mip8 { omega_l: usize, omega_u: usize },
    Mip9 { omega_l: usize, omega_u: usize },
}

impl Formulation {
    pub fn tag(&self) -> &'static str {
        match self {
            Formulation::Mip7 { .. } => "mip7",
            Formulation::Mip8 { .. } => "mip8",
            Formulation::Mip9 { .. } => "mip9",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub formulation: Formulation,
    pub gamma: f64,
    /// Per-vertex big-M of the degree-weighted model.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
    pub meta: Option<ModelMeta>,
}

impl MilpModel {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    /// Variables whose name starts with `prefix` followed by `_`.
    pub fn count_prefix(&self, prefix: &str) -> usize {
        self.variables
            .iter()
            .filter(|v| {
                v.name
                    .strip_prefix(prefix)
                    .is_some_and(|r| r.starts_with('_'))
            })
            .count()
    }

    /// Checks that every expression refers to a declared variable and that
    /// binaries are bounded by {0, 1}.
    pub fn validate(&self) -> Result<()> {
        let nv = self.variables.len();
        let exprs = std::iter::once(("objective", &self.objective.expr))
            .chain(self.constraints.iter().map(|c| (c.name.as_str(), &c.expr)));
        for (name, e) in exprs {
            if let Some(&(v, _)) = e.0.iter().find(|&&(v, _)| v >= nv) {
                return Err(Error::input(format!(
                    "{name} references undeclared variable {v}"
                )));
            }
        }
        for v in &self.variables {
            if v.kind == VarKind::Binary && (v.lower != 0.0 || v.upper != 1.0) {
                return Err(Error::input(format!(
                    "binary {} has bounds other than [0, 1]",
                    v.name
                )));
            }
            if v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan() {
                return Err(Error::input(format!(
                    "variable {} has empty bounds",
                    v.name
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Values for model variables, by name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    pub values: BTreeMap<String, f64>,
}

impl Assignment {
    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub feasible: bool,
    pub objective: f64,
    pub violated: Vec<String>,
}

/// Evaluates every constraint, bound and integrality requirement.
pub fn check(model: &MilpModel, a: &Assignment) -> Result<CheckReport> {
    let values: Vec<f64> = model
        .variables
        .iter()
        .map(|v| {
            a.get(&v.name)
                .ok_or_else(|| Error::input(format!("assignment is missing variable {}", v.name)))
        })
        .collect::<Result<_>>()?;

    let mut violated = Vec::new();
    for (v, &x) in model.variables.iter().zip(&values) {
        if x < v.lower - CHECK_TOL || x > v.upper + CHECK_TOL {
            violated.push(format!("bound:{}", v.name));
        }
        if v.kind == VarKind::Binary && (x - x.round()).abs() > 1e-9 {
            violated.push(format!("integrality:{}", v.name));
        }
    }
    for c in &model.constraints {
        let lhs = c.expr.eval(&values);
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs + CHECK_TOL,
            Relation::Ge => lhs >= c.rhs - CHECK_TOL,
            Relation::Eq => (lhs - c.rhs).abs() <= CHECK_TOL,
        };
        if !ok {
            violated.push(c.name.clone());
        }
    }
    Ok(CheckReport {
        feasible: violated.is_empty(),
        objective: model.objective.expr.eval(&values),
        violated,
    })
}

struct Builder {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            variables: Vec::new(),
            constraints: Vec::new(),
        }
    }

    fn var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> usize {
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        self.variables.len() - 1
    }

    fn row(&mut self, name: String, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            name,
            expr: LinExpr(terms).canonical(),
            relation,
            rhs,
        });
    }

    fn finish(self, objective: Vec<(usize, f64)>, meta: ModelMeta) -> MilpModel {
        MilpModel {
            variables: self.variables,
            objective: Objective {
                sense: Sense::Maximize,
                expr: LinExpr(objective).canonical(),
            },
            constraints: self.constraints,
            meta: Some(meta),
        }
    }
}

fn binaries(b: &mut Builder, n: usize) -> Vec<usize> {
    (0..n)
        .map(|i| b.var(format!("x_{i}"), VarKind::Binary, 0.0, 1.0))
        .collect()
}

fn check_bounds(n: usize, omega_l: usize, omega_u: usize) -> Result<()> {
    if omega_l > omega_u {
        return Err(Error::input(format!(
            "omega_l = {omega_l} exceeds omega_u = {omega_u}"
        )));
    }
    if omega_u > n {
        return Err(Error::input(format!("omega_u = {omega_u} exceeds n = {n}")));
    }
    Ok(())
}

/// Default big-M: `|h_i| <= gamma + sum_j |A_ij - gamma| < n`.
pub fn default_nu(g: &Graph) -> f64 {
    g.n() as f64
}

/// Big-M model over vertex indicators `x_i` and linking variables `h_i`.
///
/// Constraints, in order: `density` (sum of h nonnegative), `h_ub_i`/`h_lb_i`
/// (`|h_i| <= nu x_i`), `h_lo_i` and `h_hi_i` (two-sided linking of `h_i` to
/// the weighted neighbour count). With `corrected_7e = false` the upper
/// linking row uses `(A_ij + gamma)` and `- nu (1 - x_i)` as published,
/// which is infeasible whenever some `x_i = 0` and the rest of the row is
/// below `nu`. The corrected row is
/// `h_i <= gamma x_i + sum_j (A_ij - gamma) x_j + nu (1 - x_i)`.
pub fn build_mip7(g: &Graph, gamma: f64, nu: f64, corrected_7e: bool) -> Result<MilpModel> {
    let gamma_v = Gamma::new(gamma)?.value();
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::input(format!("nu must be positive, got {nu}")));
    }
    let n = g.n();
    let mut b = Builder::new();
    let x = binaries(&mut b, n);
    let h: Vec<usize> = (0..n)
        .map(|i| b.var(format!("h_{i}"), VarKind::Continuous, -nu, nu))
        .collect();

    b.row(
        "density".into(),
        h.iter().map(|&v| (v, 1.0)).collect(),
        Relation::Ge,
        0.0,
    );
    for i in 0..n {
        b.row(
            format!("h_ub_{i}"),
            vec![(h[i], 1.0), (x[i], -nu)],
            Relation::Le,
            0.0,
        );
        b.row(
            format!("h_lb_{i}"),
            vec![(h[i], 1.0), (x[i], nu)],
            Relation::Ge,
            0.0,
        );
    }
    let weighted = |i: usize, shift: f64| -> Vec<(usize, f64)> {
        let mut t: Vec<(usize, f64)> = (0..n)
            .map(|j| (x[j], -(f64::from(u8::from(g.has_edge(i, j))) + shift)))
            .collect();
        t.push((x[i], -gamma_v));
        t
    };
    for i in 0..n {
        // h_i - gamma x_i - sum_j (A_ij - gamma) x_j - nu x_i >= -nu
        let mut t = weighted(i, -gamma_v);
        t.push((h[i], 1.0));
        t.push((x[i], -nu));
        b.row(format!("h_lo_{i}"), t, Relation::Ge, -nu);
    }
    for i in 0..n {
        let (shift, m_coef, rhs) = if corrected_7e {
            (-gamma_v, nu, nu)
        } else {
            (gamma_v, -nu, -nu)
        };
        let mut t = weighted(i, shift);
        t.push((h[i], 1.0));
        t.push((x[i], m_coef));
        b.row(format!("h_hi_{i}"), t, Relation::Le, rhs);
    }

    let obj = x.iter().map(|&v| (v, 1.0)).collect();
    Ok(b.finish(
        obj,
        ModelMeta {
            formulation: Formulation::Mip7 { nu, corrected_7e },
            gamma,
            psi: Vec::new(),
        },
    ))
}

/// Edge-variable model: `z_i_j <= x_i, x_j` per edge, size selector `s_t`.
pub fn build_mip8(g: &Graph, gamma: f64, omega_l: usize, omega_u: usize) -> Result<MilpModel> {
    let gamma_v = Gamma::new(gamma)?.value();
    let n = g.n();
    check_bounds(n, omega_l, omega_u)?;
    let mut b = Builder::new();
    let x = binaries(&mut b, n);
    let z: Vec<(usize, usize, usize)> = g
        .edges()
        .iter()
        .map(|&(i, j)| {
            (
                i,
                j,
                b.var(format!("z_{i}_{j}"), VarKind::Continuous, 0.0, 1.0),
            )
        })
        .collect();
    let s: Vec<(usize, usize)> = (omega_l..=omega_u)
        .map(|t| (t, b.var(format!("s_{t}"), VarKind::Continuous, 0.0, 1.0)))
        .collect();

    let mut dens: Vec<(usize, f64)> = z.iter().map(|&(_, _, v)| (v, 1.0)).collect();
    dens.extend(
        s.iter()
            .map(|&(t, v)| (v, -gamma_v * (t * t.saturating_sub(1)) as f64 / 2.0)),
    );
    b.row("density".into(), dens, Relation::Ge, 0.0);
    for &(i, j, v) in &z {
        b.row(
            format!("zi_{i}_{j}"),
            vec![(v, 1.0), (x[i], -1.0)],
            Relation::Le,
            0.0,
        );
        b.row(
            format!("zj_{i}_{j}"),
            vec![(v, 1.0), (x[j], -1.0)],
            Relation::Le,
            0.0,
        );
    }
    push_size_rows(&mut b, &x, &s);

    let obj = x.iter().map(|&v| (v, 1.0)).collect();
    Ok(b.finish(
        obj,
        ModelMeta {
            formulation: Formulation::Mip8 { omega_l, omega_u },
            gamma,
            psi: Vec::new(),
        },
    ))
}

fn push_size_rows(b: &mut Builder, x: &[usize], s: &[(usize, usize)]) {
    let mut size: Vec<(usize, f64)> = x.iter().map(|&v| (v, 1.0)).collect();
    size.extend(s.iter().map(|&(t, v)| (v, -(t as f64))));
    b.row("size".into(), size, Relation::Eq, 0.0);
    b.row(
        "choose".into(),
        s.iter().map(|&(_, v)| (v, 1.0)).collect(),
        Relation::Eq,
        1.0,
    );
}

/// Degree-weighted model: `w_i <= psi_i x_i`, `w_i <= sum_{j ~ i} x_j` with
/// `psi_i = deg(i)`.
pub fn build_mip9(g: &Graph, gamma: f64, omega_l: usize, omega_u: usize) -> Result<MilpModel> {
    let gamma_v = Gamma::new(gamma)?.value();
    let n = g.n();
    check_bounds(n, omega_l, omega_u)?;
    let psi: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    let mut b = Builder::new();
    let x = binaries(&mut b, n);
    let w: Vec<usize> = (0..n)
        .map(|i| b.var(format!("w_{i}"), VarKind::Continuous, 0.0, f64::INFINITY))
        .collect();
    let s: Vec<(usize, usize)> = (omega_l..=omega_u)
        .map(|t| (t, b.var(format!("s_{t}"), VarKind::Continuous, 0.0, 1.0)))
        .collect();

    let mut dens: Vec<(usize, f64)> = w.iter().map(|&v| (v, 1.0)).collect();
    dens.extend(
        s.iter()
            .map(|&(t, v)| (v, -gamma_v * (t * t.saturating_sub(1)) as f64)),
    );
    b.row("density".into(), dens, Relation::Ge, 0.0);
    for i in 0..n {
        b.row(
            format!("wpsi_{i}"),
            vec![(w[i], 1.0), (x[i], -psi[i])],
            Relation::Le,
            0.0,
        );
        let mut t = vec![(w[i], 1.0)];
        t.extend(g.neighbors(i).iter().map(|&j| (x[j], -1.0)));
        b.row(format!("wnbr_{i}"), t, Relation::Le, 0.0);
    }
    push_size_rows(&mut b, &x, &s);

    let obj = x.iter().map(|&v| (v, 1.0)).collect();
    Ok(b.finish(
        obj,
        ModelMeta {
            formulation: Formulation::Mip9 { omega_l, omega_u },
            gamma,
            psi,
        },
    ))
}

/// Canonical assignment for a vertex set: indicators, products on edges,
/// the matching size selector, linking values `h_i` and neighbour counts `w_i`.
///
/// `h_i = x_i (gamma x_i + sum_j (A_ij - gamma) x_j)`, summed over all vertices,
/// so that `sum_i h_i = 2 e(S) - gamma |S| (|S| - 1)`.
pub fn lift(g: &Graph, gamma: f64, s: &VertexSet, formulation: &Formulation) -> Result<Assignment> {
    let gamma_v = Gamma::new(gamma)?.value();
    let n = g.n();
    s.check_bounds(n)?;
    let ind = s.indicator(n);
    let x = |i: usize| f64::from(u8::from(ind[i]));
    let mut a = Assignment::default();
    for i in 0..n {
        a.set(format!("x_{i}"), x(i));
    }
    let inside_nbrs = |i: usize| g.neighbors(i).iter().filter(|&&j| ind[j]).count() as f64;
    let selector = |a: &mut Assignment, lo: usize, hi: usize| {
        for t in lo..=hi {
            a.set(format!("s_{t}"), f64::from(u8::from(t == s.len())));
        }
    };
    match *formulation {
        Formulation::Mip7 { .. } => {
            let size = s.len() as f64;
            for i in 0..n {
                // gamma x_i + sum_j (A_ij - gamma) x_j, with A_ii = 0
                let h = x(i) * (gamma_v * x(i) + inside_nbrs(i) - gamma_v * size);
                a.set(format!("h_{i}"), h);
            }
        }
        Formulation::Mip8 { omega_l, omega_u } => {
            for &(i, j) in g.edges() {
                a.set(format!("z_{i}_{j}"), x(i) * x(j));
            }
            selector(&mut a, omega_l, omega_u);
        }
        Formulation::Mip9 { omega_l, omega_u } => {
            for i in 0..n {
                a.set(format!("w_{i}"), x(i) * inside_nbrs(i));
            }
            selector(&mut a, omega_l, omega_u);
        }
    }
    Ok(a)
}
