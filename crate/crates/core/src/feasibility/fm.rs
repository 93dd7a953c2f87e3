//! Exact Fourier–Motzkin elimination.
//!
//! Every constraint is first rewritten as `c·x <= b` or `c·x < b`. Each working
//! row remembers the nonnegative combination of those input rows it came from,
//! so a row that collapses to `0 <= negative` or `0 < 0` is already a Farkas
//! witness. Feasible systems are solved by back-substitution through the
//! stored elimination levels.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::system::{LinearConstraint, LinearSystem, Provenance, Relation, SystemError, VarId};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("back-substituted point violates constraints {0:?}")]
    WitnessRejected(Vec<usize>),
    #[error("assembled Farkas witness failed re-verification: {0}")]
    FarkasRejected(FarkasError),
    #[error("empty interval for variable {0} during back-substitution")]
    EmptyInterval(VarId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FarkasError {
    #[error("multiplier for constraint {0} refers past the end of the system")]
    UnknownConstraint(usize),
    #[error("negative multiplier {1} on inequality {0}")]
    NegativeMultiplier(usize, Rational),
    #[error("combined coefficient of {0} is {1}, not zero")]
    NonzeroCoefficient(VarId, Rational),
    #[error("combination reduces to 0 <= {0}, which is satisfiable")]
    NotAbsurd(Rational),
}

/// Multipliers over the constraints of a system proving it has no solution.
///
/// Each inequality is read in its `<=`/`<` orientation (a `>=` constraint is
/// negated first); multipliers on inequalities are nonnegative and equalities
/// may carry either sign. The weighted sum has zero coefficients and reduces
/// to `0 <= d` with `d < 0`, or to `0 < 0` when `strict` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarkasWitness {
    pub multipliers: Vec<(usize, Rational)>,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCheck {
    /// `d` in `0 <= d` (or `0 < d`).
    pub constant: Rational,
    pub strict: bool,
}

fn orientation(relation: Relation) -> i64 {
    match relation {
        Relation::Ge | Relation::Gt => -1,
        Relation::Le | Relation::Lt | Relation::Eq => 1,
    }
}

/// Recomputes the witness combination directly from the system's constraints.
pub fn verify_farkas(
    system: &LinearSystem,
    witness: &FarkasWitness,
) -> Result<FarkasCheck, FarkasError> {
    let n = system.variables().len();
    let mut coeffs = vec![Rational::zero(); n];
    let mut constant = Rational::zero();
    let mut strict = false;
    for (idx, lambda) in &witness.multipliers {
        let c = system
            .constraints()
            .get(*idx)
            .ok_or(FarkasError::UnknownConstraint(*idx))?;
        if c.relation != Relation::Eq && lambda.is_negative() {
            return Err(FarkasError::NegativeMultiplier(*idx, lambda.clone()));
        }
        let weight = lambda * orientation(c.relation);
        for (&v, a) in &c.coefficients {
            coeffs[v] += &(&weight * a);
        }
        constant += &(&weight * &c.rhs);
        if c.relation.is_strict() && lambda.is_positive() {
            strict = true;
        }
    }
    if let Some((v, a)) = coeffs.iter().enumerate().find(|(_, a)| !a.is_zero()) {
        return Err(FarkasError::NonzeroCoefficient(v, a.clone()));
    }
    if constant.is_negative() || (constant.is_zero() && strict) {
        let strict = constant.is_zero();
        Ok(FarkasCheck { constant, strict })
    } else {
        Err(FarkasError::NotAbsurd(constant))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// A point indexed by variable id; eliminated variables are set to zero.
    Feasible(Vec<Rational>),
    Infeasible(FarkasWitness),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<Rational>,
    rhs: Rational,
    strict: bool,
    /// Weights over the oriented input rows; empty when the tableau does not
    /// track them.
    combo: Vec<Rational>,
    /// Set when the row is an input constraint carried through unchanged.
    passthrough: Option<usize>,
}

impl Row {
    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    fn is_absurd_constant(&self) -> bool {
        self.rhs.is_negative() || (self.rhs.is_zero() && self.strict)
    }

    /// Scales so the first nonzero coefficient has absolute value 1.
    fn normalize(&mut self) {
        let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).map(Rational::abs) else {
            return;
        };
        if lead == 1 {
            return;
        }
        let inv = lead.recip();
        for c in self.coeffs.iter_mut().chain(self.combo.iter_mut()) {
            if !c.is_zero() {
                *c = &*c * &inv;
            }
        }
        self.rhs = &self.rhs * &inv;
    }

    /// Coefficients and right-hand side scaled to a unit leading coefficient.
    fn unit_form(&self) -> (Vec<Rational>, Rational) {
        let lead = self
            .coeffs
            .iter()
            .find(|c| !c.is_zero())
            .map(Rational::abs)
            .expect("nonconstant row");
        if lead == 1 {
            return (self.coeffs.clone(), self.rhs.clone());
        }
        let inv = lead.recip();
        (
            self.coeffs.iter().map(|c| c * &inv).collect(),
            &self.rhs * &inv,
        )
    }
}

/// `a * wa + b * wb`, skipping the bignum work for zero terms (most combo
/// entries are zero).
fn weighted_sum(a: &Rational, wa: &Rational, b: &Rational, wb: &Rational) -> Rational {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => Rational::zero(),
        (false, true) => a * wa,
        (true, false) => b * wb,
        (false, false) => a * wa + b * wb,
    }
}

/// Input constraint `k` oriented as `sign * (c·x - b) <= 0`.
#[derive(Debug, Clone, Copy)]
struct Origin {
    constraint: usize,
    sign: i64,
    equality: bool,
}

struct Tableau {
    n: usize,
    origins: Vec<Origin>,
    rows: Vec<Row>,
}

enum Step {
    Rows(Vec<Row>),
    Contradiction(Row),
}

impl Tableau {
    /// With `track` unset rows carry no combination weights, which is much
    /// cheaper but cannot produce a witness.
    fn from_system(system: &LinearSystem, track: bool) -> Self {
        let n = system.variables().len();
        let mut origins = Vec::new();
        for (k, c) in system.constraints().iter().enumerate() {
            match c.relation {
                Relation::Eq => {
                    origins.push(Origin {
                        constraint: k,
                        sign: 1,
                        equality: true,
                    });
                    origins.push(Origin {
                        constraint: k,
                        sign: -1,
                        equality: true,
                    });
                }
                r => origins.push(Origin {
                    constraint: k,
                    sign: orientation(r),
                    equality: false,
                }),
            }
        }
        let m = origins.len();
        let rows = origins
            .iter()
            .enumerate()
            .map(|(j, o)| {
                let c = &system.constraints()[o.constraint];
                let mut coeffs = vec![Rational::zero(); n];
                for (&v, a) in &c.coefficients {
                    coeffs[v] = a * o.sign;
                }
                let mut combo = Vec::new();
                if track {
                    combo = vec![Rational::zero(); m];
                    combo[j] = Rational::one();
                }
                Row {
                    coeffs,
                    rhs: &c.rhs * o.sign,
                    strict: c.relation.is_strict(),
                    combo,
                    passthrough: (c.relation != Relation::Eq).then_some(o.constraint),
                }
            })
            .collect();
        Tableau { n, origins, rows }
    }

    /// Drops tautologies, keeps the tightest of parallel rows, and reports the
    /// first absurd constant row.
    fn tidy(&self, rows: Vec<Row>) -> Step {
        let mut out: Vec<(Row, Rational)> = Vec::with_capacity(rows.len());
        let mut index: HashMap<Vec<Rational>, usize> = HashMap::new();
        for row in rows {
            if row.is_constant() {
                if row.is_absurd_constant() {
                    return Step::Contradiction(row);
                }
                continue;
            }
            let (key, scaled_rhs) = row.unit_form();
            match index.entry(key) {
                Entry::Vacant(e) => {
                    e.insert(out.len());
                    out.push((row, scaled_rhs));
                }
                Entry::Occupied(e) => {
                    let (kept, kept_rhs) = &out[*e.get()];
                    let tighter = scaled_rhs < *kept_rhs
                        || (scaled_rhs == *kept_rhs && row.strict && !kept.strict);
                    if tighter {
                        out[*e.get()] = (row, scaled_rhs);
                    }
                }
            }
        }
        Step::Rows(
            out.into_iter()
                .map(|(mut row, _)| {
                    if row.passthrough.is_none() {
                        row.normalize();
                    }
                    row
                })
                .collect(),
        )
    }

    fn eliminate(&self, rows: &[Row], v: VarId) -> Step {
        let mut kept = Vec::new();
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for row in rows {
            match row.coeffs[v].signum() {
                0 => kept.push(row.clone()),
                1 => upper.push(row),
                _ => lower.push(row),
            }
        }
        for u in &upper {
            for l in &lower {
                let wu = -&l.coeffs[v];
                let wl = u.coeffs[v].clone();
                let coeffs = (0..self.n)
                    .map(|k| {
                        if k == v {
                            Rational::zero()
                        } else {
                            weighted_sum(&u.coeffs[k], &wu, &l.coeffs[k], &wl)
                        }
                    })
                    .collect();
                let combo = u
                    .combo
                    .iter()
                    .zip(&l.combo)
                    .map(|(a, b)| weighted_sum(a, &wu, b, &wl))
                    .collect();
                kept.push(Row {
                    coeffs,
                    rhs: &u.rhs * &wu + &l.rhs * &wl,
                    strict: u.strict || l.strict,
                    combo,
                    passthrough: None,
                });
            }
        }
        self.tidy(kept)
    }

    fn witness(&self, row: &Row) -> FarkasWitness {
        let mut per_constraint: Vec<(usize, Rational)> = Vec::new();
        for (o, w) in self.origins.iter().zip(&row.combo) {
            if w.is_zero() {
                continue;
            }
            // An equality's two copies fold into one signed multiplier.
            let signed = if o.equality { w * o.sign } else { w.clone() };
            match per_constraint.iter_mut().find(|(k, _)| *k == o.constraint) {
                Some((_, acc)) => *acc += &signed,
                None => per_constraint.push((o.constraint, signed)),
            }
        }
        per_constraint.retain(|(_, w)| !w.is_zero());
        per_constraint.sort_by_key(|(k, _)| *k);
        FarkasWitness {
            multipliers: per_constraint,
            strict: row.rhs.is_zero(),
        }
    }
}

/// Projects out `variable`. Constraints not mentioning it are kept as they were;
/// new constraints are `<=`/`<` rows with [`Provenance::Derived`] parents
/// indexing `system`'s constraints.
pub fn fm_eliminate(system: &LinearSystem, variable: VarId) -> Result<LinearSystem, SystemError> {
    if !system.is_live(variable) {
        return Err(if variable >= system.variables().len() {
            SystemError::UnknownVariable(variable)
        } else {
            SystemError::NotLive(variable)
        });
    }
    let tableau = Tableau::from_system(system, true);
    let rows = match tableau.tidy(tableau.rows.clone()) {
        Step::Rows(rows) => rows,
        Step::Contradiction(row) => vec![row],
    };
    let rows = match tableau.eliminate(&rows, variable) {
        Step::Rows(rows) => rows,
        Step::Contradiction(row) => vec![row],
    };
    let mut out = system.clone();
    out.mark_eliminated(variable);
    let constraints = rows
        .iter()
        .map(|row| match row.passthrough {
            Some(k) => system.constraints()[k].clone(),
            None => LinearConstraint::new(
                row.coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(v, c)| (v, c.clone())),
                if row.strict {
                    Relation::Lt
                } else {
                    Relation::Le
                },
                row.rhs.clone(),
                Provenance::Derived {
                    parents: tableau.witness(row).multipliers,
                },
            ),
        })
        .collect();
    out.replace_constraints(constraints);
    Ok(out)
}

/// Interval for one variable given the values of the others.
#[derive(Debug, Clone, Default)]
struct Interval {
    lower: Option<(Rational, bool)>,
    upper: Option<(Rational, bool)>,
}

impl Interval {
    fn add_lower(&mut self, value: Rational, strict: bool) {
        let replace = match &self.lower {
            None => true,
            Some((l, s)) => value > *l || (value == *l && strict && !s),
        };
        if replace {
            self.lower = Some((value, strict));
        }
    }

    fn add_upper(&mut self, value: Rational, strict: bool) {
        let replace = match &self.upper {
            None => true,
            Some((u, s)) => value < *u || (value == *u && strict && !s),
        };
        if replace {
            self.upper = Some((value, strict));
        }
    }

    /// Midpoint when bounded on both sides; a closed finite end or one unit
    /// past an open end otherwise.
    fn pick(&self) -> Option<Rational> {
        match (&self.lower, &self.upper) {
            (Some((l, ls)), Some((u, us))) => {
                if l < u {
                    Some(l.midpoint(u))
                } else if l == u && !ls && !us {
                    Some(l.clone())
                } else {
                    None
                }
            }
            (Some((l, false)), None) => Some(l.clone()),
            (Some((l, true)), None) => Some(l + 1),
            (None, Some((u, false))) => Some(u.clone()),
            (None, Some((u, true))) => Some(u - 1),
            (None, None) => Some(Rational::zero()),
        }
    }
}

/// Runs the elimination, keeping every level for back-substitution.
fn forward_with(tableau: &Tableau, order: &[VarId]) -> Result<Vec<Vec<Row>>, Row> {
    let mut levels: Vec<Vec<Row>> = Vec::with_capacity(order.len() + 1);
    match tableau.tidy(tableau.rows.clone()) {
        Step::Rows(rows) => levels.push(rows),
        Step::Contradiction(row) => return Err(row),
    }
    for &v in order {
        match tableau.eliminate(levels.last().expect("nonempty"), v) {
            Step::Rows(rows) => {
                log::trace!("eliminated {v}: {} rows", rows.len());
                levels.push(rows);
            }
            Step::Contradiction(row) => return Err(row),
        }
    }
    Ok(levels)
}

/// Decides feasibility over the rationals, eliminating in the system's
/// elimination order. Both outcomes are re-verified against `system` before
/// being returned.
pub fn solve(system: &LinearSystem) -> Result<Feasibility, SolveError> {
    let order = system.elimination_order();
    let levels = match forward_with(&Tableau::from_system(system, false), &order) {
        Ok(levels) => levels,
        // Redo the pass with weights to explain the contradiction.
        Err(_) => {
            let tableau = Tableau::from_system(system, true);
            let row = match forward_with(&tableau, &order) {
                Err(row) => row,
                Ok(_) => unreachable!("tracking weights cannot change the outcome"),
            };
            let witness = tableau.witness(&row);
            verify_farkas(system, &witness).map_err(SolveError::FarkasRejected)?;
            return Ok(Feasibility::Infeasible(witness));
        }
    };

    let n = system.variables().len();
    let mut point = vec![Rational::zero(); n];
    for (k, &v) in order.iter().enumerate().rev() {
        let mut interval = Interval::default();
        for row in &levels[k] {
            let a = &row.coeffs[v];
            if a.is_zero() {
                continue;
            }
            let rest: Rational = row
                .coeffs
                .iter()
                .enumerate()
                .filter(|(u, c)| *u != v && !c.is_zero())
                .map(|(u, c)| c * &point[u])
                .sum();
            let bound = (&row.rhs - &rest) / a;
            if a.is_positive() {
                interval.add_upper(bound, row.strict);
            } else {
                interval.add_lower(bound, row.strict);
            }
        }
        point[v] = interval.pick().ok_or(SolveError::EmptyInterval(v))?;
    }
    let violated = system.violated_at(&point);
    if !violated.is_empty() {
        return Err(SolveError::WitnessRejected(violated));
    }
    Ok(Feasibility::Feasible(point))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    fn c(terms: &[(VarId, i64)], rel: Relation, rhs: i64) -> LinearConstraint {
        LinearConstraint::new(
            terms.iter().map(|&(v, a)| (v, r(a))),
            rel,
            r(rhs),
            Provenance::Input,
        )
    }

    fn system(vars: &[&str], cs: Vec<LinearConstraint>) -> LinearSystem {
        let mut s = LinearSystem::new(vars.iter().copied());
        for x in cs {
            s.push(x).unwrap();
        }
        s
    }

    /// `a` and `b` describe the same half-space.
    fn same_halfspace(a: &LinearConstraint, b: &LinearConstraint) -> bool {
        let norm = |c: &LinearConstraint| {
            let s = orientation(c.relation);
            let lead = c.coefficients.values().next().unwrap().abs();
            let coeffs: Vec<(VarId, Rational)> = c
                .coefficients
                .iter()
                .map(|(&v, x)| (v, x * s / &lead))
                .collect();
            (coeffs, &c.rhs * s / &lead, c.relation.is_strict())
        };
        norm(a) == norm(b)
    }

    #[test]
    fn eliminate_simple() {
        let s = system(
            &["x", "y"],
            vec![
                c(&[(0, 1), (1, 1)], Relation::Le, 1),
                c(&[(0, 1)], Relation::Ge, 0),
            ],
        );
        let p = fm_eliminate(&s, 0).unwrap();
        assert_eq!(p.len(), 1);
        assert!(same_halfspace(
            &p.constraints()[0],
            &c(&[(1, 1)], Relation::Le, 1)
        ));
        assert!(!p.is_live(0));
    }

    #[test]
    fn eliminate_to_contradiction() {
        let s = system(
            &["x"],
            vec![c(&[(0, 1)], Relation::Gt, 0), c(&[(0, 1)], Relation::Lt, 0)],
        );
        let p = fm_eliminate(&s, 0).unwrap();
        assert_eq!(p.len(), 1);
        let k = &p.constraints()[0];
        assert!(k.is_constant());
        assert_eq!(k.relation, Relation::Lt);
        assert!(k.rhs.is_zero());
    }

    #[test]
    fn eliminate_first_half_tangle_step() {
        // a1 <= 1 and a1 + 2 b1 >= 2 give 2 b1 >= 1.
        let s = system(
            &["a1", "b1"],
            vec![
                c(&[(0, 1)], Relation::Le, 1),
                c(&[(0, 1), (1, 2)], Relation::Ge, 2),
            ],
        );
        let p = fm_eliminate(&s, 0).unwrap();
        assert_eq!(p.len(), 1);
        assert!(same_halfspace(
            &p.constraints()[0],
            &c(&[(1, 2)], Relation::Ge, 1)
        ));
        match &p.constraints()[0].provenance {
            Provenance::Derived { parents } => {
                assert_eq!(
                    parents.iter().map(|(k, _)| *k).collect::<Vec<_>>(),
                    vec![0, 1]
                );
            }
            other => panic!("expected derived provenance, got {other:?}"),
        }
    }

    #[test]
    fn eliminate_rejects_dead_variable() {
        let s = system(&["x"], vec![c(&[(0, 1)], Relation::Le, 1)]);
        let p = fm_eliminate(&s, 0).unwrap();
        assert_eq!(fm_eliminate(&p, 0), Err(SystemError::NotLive(0)));
        assert_eq!(fm_eliminate(&s, 4), Err(SystemError::UnknownVariable(4)));
    }

    #[test]
    fn solve_half_open_interval_uses_midpoint() {
        let s = system(
            &["x"],
            vec![c(&[(0, 1)], Relation::Gt, 0), c(&[(0, 1)], Relation::Le, 1)],
        );
        assert_eq!(
            solve(&s).unwrap(),
            Feasibility::Feasible(vec![Rational::new(1, 2)])
        );
    }

    #[test]
    fn solve_point_interval() {
        let s = system(
            &["x", "y"],
            vec![
                c(&[(0, 1), (1, 1)], Relation::Eq, 3),
                c(&[(0, 1)], Relation::Ge, 1),
                c(&[(0, 1)], Relation::Le, 1),
            ],
        );
        assert_eq!(solve(&s).unwrap(), Feasibility::Feasible(vec![r(1), r(2)]));
    }

    #[test]
    fn solve_unbounded_sides() {
        let s = system(
            &["x", "y"],
            vec![
                c(&[(0, 1)], Relation::Gt, 5),
                c(&[(1, 1)], Relation::Lt, -2),
            ],
        );
        let Feasibility::Feasible(p) = solve(&s).unwrap() else {
            panic!()
        };
        assert!(s.violated_at(&p).is_empty());
    }

    #[test]
    fn infeasible_equalities_use_signed_multipliers() {
        let s = system(
            &["x"],
            vec![c(&[(0, 1)], Relation::Eq, 1), c(&[(0, 1)], Relation::Ge, 2)],
        );
        let Feasibility::Infeasible(w) = solve(&s).unwrap() else {
            panic!("expected infeasible")
        };
        let check = verify_farkas(&s, &w).unwrap();
        assert!(check.constant.is_negative());
        assert!(!w.strict);
    }

    #[test]
    fn constant_input_contradiction() {
        let s = system(&["x"], vec![c(&[], Relation::Gt, 0)]);
        let Feasibility::Infeasible(w) = solve(&s).unwrap() else {
            panic!()
        };
        assert!(w.strict);
        assert_eq!(w.multipliers, vec![(0, r(1))]);
    }

    #[test]
    fn farkas_verifier_rejects_bad_witnesses() {
        let s = system(
            &["x"],
            vec![c(&[(0, 1)], Relation::Le, 0), c(&[(0, 1)], Relation::Ge, 1)],
        );
        let good = FarkasWitness {
            multipliers: vec![(0, r(1)), (1, r(1))],
            strict: false,
        };
        assert_eq!(verify_farkas(&s, &good).unwrap().constant, r(-1));
        let unbalanced = FarkasWitness {
            multipliers: vec![(0, r(2)), (1, r(1))],
            strict: false,
        };
        assert!(matches!(
            verify_farkas(&s, &unbalanced),
            Err(FarkasError::NonzeroCoefficient(0, _))
        ));
        let negative = FarkasWitness {
            multipliers: vec![(0, r(-1)), (1, r(-1))],
            strict: false,
        };
        assert!(matches!(
            verify_farkas(&s, &negative),
            Err(FarkasError::NegativeMultiplier(0, _))
        ));
        let empty = FarkasWitness {
            multipliers: vec![],
            strict: false,
        };
        assert_eq!(verify_farkas(&s, &empty), Err(FarkasError::NotAbsurd(r(0))));
        let missing = FarkasWitness {
            multipliers: vec![(7, r(1))],
            strict: false,
        };
        assert_eq!(
            verify_farkas(&s, &missing),
            Err(FarkasError::UnknownConstraint(7))
        );
    }

    #[test]
    fn witness_json_shape() {
        let w = FarkasWitness {
            multipliers: vec![(3, Rational::new(1, 2))],
            strict: true,
        };
        assert_eq!(
            serde_json::to_string(&w).unwrap(),
            r#"{"multipliers":[[3,"1/2"]],"strict":true}"#
        );
    }
}
