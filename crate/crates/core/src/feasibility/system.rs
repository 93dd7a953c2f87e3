use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;
use crate::tangle::MontesinosKnot;

pub type VarId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("constraint references undeclared variable {0}")]
    UnknownVariable(VarId),
    #[error("variable {0} is not live in this system")]
    NotLive(VarId),
    #[error("the angle system is only defined for knots, got {components} components")]
    NotAKnot { components: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        }
    }
}

/// Which angle condition a constraint encodes. Tangle indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// `0 < alpha_bar_i` or `alpha_bar_i <= 1`.
    AlphaBound(usize),
    /// `0 < beta_bar_i` or `beta_bar_i < 1`.
    BetaBound(usize),
    /// (1) `Σ alpha_bar <= 2`.
    AlphaSum,
    /// (2) `Σ beta_bar <= 1`.
    BetaSum,
    /// (3) `alpha_bar_i + q_i beta_bar_i >= 2`.
    OddFace(usize),
    /// (4) `alpha_bar_i + |pbar_i| beta_bar_i >= 1`.
    EvenFace(usize),
    /// (5) `alpha_bar_i + beta_bar_i > 1` when `q_i = 2`.
    HalfTangle(usize),
    /// Produced by elimination; parents index the input system's constraints.
    Derived { parents: Vec<(usize, Rational)> },
    /// User supplied.
    Input,
}

impl Provenance {
    /// Condition number (1)-(5), or `None` for bounds and non-angle constraints.
    pub fn condition(&self) -> Option<u8> {
        match self {
            Provenance::AlphaSum => Some(1),
            Provenance::BetaSum => Some(2),
            Provenance::OddFace(_) => Some(3),
            Provenance::EvenFace(_) => Some(4),
            Provenance::HalfTangle(_) => Some(5),
            _ => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::AlphaBound(i) => write!(f, "bound alpha_bar_{i}"),
            Provenance::BetaBound(i) => write!(f, "bound beta_bar_{i}"),
            Provenance::AlphaSum => write!(f, "condition (1)"),
            Provenance::BetaSum => write!(f, "condition (2)"),
            Provenance::OddFace(i) => write!(f, "condition (3) i={i}"),
            Provenance::EvenFace(i) => write!(f, "condition (4) i={i}"),
            Provenance::HalfTangle(i) => write!(f, "condition (5) i={i}"),
            Provenance::Derived { parents } => write!(f, "derived from {} rows", parents.len()),
            Provenance::Input => write!(f, "input"),
        }
    }
}

/// `Σ coefficients[v] * x_v  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coefficients: BTreeMap<VarId, Rational>,
    pub rhs: Rational,
    pub relation: Relation,
    pub provenance: Provenance,
}

impl LinearConstraint {
    pub fn new<I>(terms: I, relation: Relation, rhs: Rational, provenance: Provenance) -> Self
    where
        I: IntoIterator<Item = (VarId, Rational)>,
    {
        let mut coefficients = BTreeMap::new();
        for (v, c) in terms {
            let entry = coefficients.entry(v).or_insert_with(Rational::zero);
            *entry += &c;
        }
        coefficients.retain(|_, c: &mut Rational| !c.is_zero());
        LinearConstraint {
            coefficients,
            rhs,
            relation,
            provenance,
        }
    }

    pub fn lhs_at(&self, point: &[Rational]) -> Rational {
        self.coefficients.iter().map(|(&v, c)| c * &point[v]).sum()
    }

    /// Signed distance from violation: nonnegative when the non-strict form holds.
    /// For equalities this is `-|lhs - rhs|`.
    pub fn margin_at(&self, point: &[Rational]) -> Rational {
        let lhs = self.lhs_at(point);
        match self.relation {
            Relation::Le | Relation::Lt => &self.rhs - &lhs,
            Relation::Ge | Relation::Gt => lhs - &self.rhs,
            Relation::Eq => -(lhs - &self.rhs).abs(),
        }
    }

    pub fn holds_at(&self, point: &[Rational]) -> bool {
        let margin = self.margin_at(point);
        if self.relation.is_strict() {
            margin.is_positive()
        } else {
            !margin.is_negative()
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Linear system over declared variables. Eliminated variables stay declared
/// but are no longer live, so variable ids are stable across elimination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    variables: Vec<String>,
    live: Vec<bool>,
    elimination_order: Vec<VarId>,
    constraints: Vec<LinearConstraint>,
}

impl LinearSystem {
    pub fn new<S: Into<String>>(variables: impl IntoIterator<Item = S>) -> Self {
        let variables: Vec<String> = variables.into_iter().map(Into::into).collect();
        let n = variables.len();
        LinearSystem {
            variables,
            live: vec![true; n],
            elimination_order: (0..n).collect(),
            constraints: Vec::new(),
        }
    }

    pub fn with_elimination_order(mut self, order: Vec<VarId>) -> Self {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(
            sorted,
            (0..self.variables.len()).collect::<Vec<_>>(),
            "elimination order must list every variable once"
        );
        self.elimination_order = order;
        self
    }

    pub fn push(&mut self, constraint: LinearConstraint) -> Result<usize, SystemError> {
        for &v in constraint.coefficients.keys() {
            if v >= self.variables.len() {
                return Err(SystemError::UnknownVariable(v));
            }
            if !self.live[v] {
                return Err(SystemError::NotLive(v));
            }
        }
        self.constraints.push(constraint);
        Ok(self.constraints.len() - 1)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn variable_name(&self, v: VarId) -> &str {
        &self.variables[v]
    }

    pub fn is_live(&self, v: VarId) -> bool {
        self.live.get(v).copied().unwrap_or(false)
    }

    pub(crate) fn mark_eliminated(&mut self, v: VarId) {
        self.live[v] = false;
    }

    pub(crate) fn replace_constraints(&mut self, constraints: Vec<LinearConstraint>) {
        self.constraints = constraints;
    }

    /// Live variables in elimination order.
    pub fn elimination_order(&self) -> Vec<VarId> {
        self.elimination_order
            .iter()
            .copied()
            .filter(|&v| self.live[v])
            .collect()
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Indices of constraints that fail at `point`.
    pub fn violated_at(&self, point: &[Rational]) -> Vec<usize> {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.holds_at(point))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Variable ids in the angle system: `alpha_bar_i` is `i - 1`, `beta_bar_i` is `i + 2`.
pub const fn alpha_var(i: usize) -> VarId {
    i - 1
}

pub const fn beta_var(i: usize) -> VarId {
    i + 2
}

/// The angle inequality system of a knot, in units of π, over
/// `a1, a2, a3` (external large-corner angles) and `b1, b2, b3` (external
/// small-corner angles).
pub fn build_knot_system(knot: &MontesinosKnot) -> Result<LinearSystem, SystemError> {
    let components = knot.component_count();
    if components != 1 {
        return Err(SystemError::NotAKnot { components });
    }
    Ok(build_angle_system(knot.q(), knot.pbar_abs()))
}

/// Same system from raw `(q_i, |pbar_i|)`; no knot check.
pub fn build_angle_system(q: [i64; 3], pbar_abs: [i64; 3]) -> LinearSystem {
    let mut sys = LinearSystem::new(["a1", "a2", "a3", "b1", "b2", "b3"])
        .with_elimination_order(vec![3, 4, 5, 0, 1, 2]);
    let one = Rational::one;
    let mut add = |c: LinearConstraint| {
        sys.push(c).expect("angle system uses declared variables");
    };
    for i in 1..=3 {
        let (a, b) = (alpha_var(i), beta_var(i));
        add(LinearConstraint::new(
            [(a, one())],
            Relation::Gt,
            Rational::zero(),
            Provenance::AlphaBound(i),
        ));
        add(LinearConstraint::new(
            [(a, one())],
            Relation::Le,
            one(),
            Provenance::AlphaBound(i),
        ));
        add(LinearConstraint::new(
            [(b, one())],
            Relation::Gt,
            Rational::zero(),
            Provenance::BetaBound(i),
        ));
        add(LinearConstraint::new(
            [(b, one())],
            Relation::Lt,
            one(),
            Provenance::BetaBound(i),
        ));
    }
    add(LinearConstraint::new(
        (1..=3).map(|i| (alpha_var(i), one())),
        Relation::Le,
        Rational::from(2),
        Provenance::AlphaSum,
    ));
    add(LinearConstraint::new(
        (1..=3).map(|i| (beta_var(i), one())),
        Relation::Le,
        one(),
        Provenance::BetaSum,
    ));
    for i in 1..=3 {
        add(LinearConstraint::new(
            [
                (alpha_var(i), one()),
                (beta_var(i), Rational::from(q[i - 1])),
            ],
            Relation::Ge,
            Rational::from(2),
            Provenance::OddFace(i),
        ));
    }
    for i in 1..=3 {
        add(LinearConstraint::new(
            [
                (alpha_var(i), one()),
                (beta_var(i), Rational::from(pbar_abs[i - 1])),
            ],
            Relation::Ge,
            one(),
            Provenance::EvenFace(i),
        ));
    }
    for i in 1..=3 {
        if q[i - 1] == 2 {
            add(LinearConstraint::new(
                [(alpha_var(i), one()), (beta_var(i), one())],
                Relation::Gt,
                one(),
                Provenance::HalfTangle(i),
            ));
        }
    }
    sys
}
