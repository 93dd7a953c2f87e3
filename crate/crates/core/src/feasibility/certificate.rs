use std::fmt;

use serde::{Deserialize, Serialize};

use super::fm::{solve, FarkasWitness, Feasibility, SolveError};
use super::system::{alpha_var, beta_var, build_knot_system, Provenance};
use crate::rational::Rational;
use crate::tangle::MontesinosKnot;

/// Known angle assignments, each valid on a pattern of `(q_i, |pbar_i|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// All `q_i >= 4`.
    SumA,
    /// `q_1 = 3`, `q_2, q_3 >= 5`.
    SumB,
    /// `q = (3, 4, >= 7)`.
    SumC,
    /// `q = (3, 4, 5)`, `|pbar_3| = 2`.
    Case1,
    /// `q_1 = q_2 = 3`, `|pbar_3| >= 3`.
    Case2,
    /// `q_1 = 2`, `|pbar_2|, |pbar_3| >= 2`, `q_2, q_3 >= 7`.
    Case3a,
    /// `q_1 = 2`, `|pbar_2|, |pbar_3| >= 2`, `q_2 = 5`, `q_3 >= 9`.
    Case3b,
    /// `q_1 = 2`, `|pbar_2| = 1`, `q_2 >= 5`, `|pbar_3| >= 3`.
    Case4,
    /// `q_1 = 2`, `q_2 = 3`, `|pbar_3| >= 7`.
    Case5,
}

/// Tangle parameters the angle conditions depend on.
pub type Params = ([i64; 3], [i64; 3]);

impl Regime {
    pub const ALL: [Regime; 9] = [
        Regime::SumA,
        Regime::SumB,
        Regime::SumC,
        Regime::Case1,
        Regime::Case2,
        Regime::Case3a,
        Regime::Case3b,
        Regime::Case4,
        Regime::Case5,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Regime::SumA => "thm1.1-A",
            Regime::SumB => "thm1.1-B",
            Regime::SumC => "thm1.1-C",
            Regime::Case1 => "thm8.2-case1",
            Regime::Case2 => "thm8.2-case2",
            Regime::Case3a => "thm8.2-case3a",
            Regime::Case3b => "thm8.2-case3b",
            Regime::Case4 => "thm8.2-case4",
            Regime::Case5 => "thm8.2-case5",
        }
    }

    pub fn from_id(id: &str) -> Option<Regime> {
        Regime::ALL.into_iter().find(|r| r.id() == id)
    }

    pub fn pattern(self) -> &'static str {
        match self {
            Regime::SumA => "q_i >= 4",
            Regime::SumB => "q = (3, >=5, >=5)",
            Regime::SumC => "q = (3, 4, >=7)",
            Regime::Case1 => "q = (3, 4, 5), |pbar_3| = 2",
            Regime::Case2 => "q = (3, 3, q_3), |pbar_3| >= 3",
            Regime::Case3a => "q = (2, >=7, >=7), |pbar_2|, |pbar_3| > 1",
            Regime::Case3b => "q = (2, 5, >=9), |pbar_2|, |pbar_3| > 1",
            Regime::Case4 => "q = (2, >=5, q_3), |pbar_2| = 1, |pbar_3| >= 3",
            Regime::Case5 => "q = (2, 3, >=15), |pbar_3| >= 7",
        }
    }

    /// Whether tangles in this order fit the pattern.
    pub fn matches(self, (q, pb): Params) -> bool {
        match self {
            Regime::SumA => q.iter().all(|&x| x >= 4),
            Regime::SumB => q[0] == 3 && q[1] >= 5 && q[2] >= 5,
            Regime::SumC => q[0] == 3 && q[1] == 4 && q[2] >= 7,
            Regime::Case1 => q == [3, 4, 5] && pb[2] == 2,
            Regime::Case2 => q[0] == 3 && q[1] == 3 && pb[2] >= 3,
            Regime::Case3a => q[0] == 2 && pb[1] > 1 && pb[2] > 1 && q[1] >= 7 && q[2] >= 7,
            Regime::Case3b => q[0] == 2 && pb[1] > 1 && pb[2] > 1 && q[1] == 5 && q[2] >= 9,
            Regime::Case4 => q[0] == 2 && pb[1] == 1 && q[1] >= 5 && pb[2] >= 3,
            Regime::Case5 => q[0] == 2 && q[1] == 3 && pb[2] >= 7,
        }
    }

    /// Smallest `(q, |pbar|)` realized by actual tangles in the pattern.
    pub fn minimal_params(self) -> Params {
        match self {
            Regime::SumA => ([4, 4, 4], [1, 1, 1]),
            Regime::SumB => ([3, 5, 5], [1, 1, 1]),
            Regime::SumC => ([3, 4, 7], [1, 1, 1]),
            Regime::Case1 => ([3, 4, 5], [1, 1, 2]),
            Regime::Case2 => ([3, 3, 7], [1, 1, 3]),
            Regime::Case3a => ([2, 7, 7], [1, 2, 2]),
            Regime::Case3b => ([2, 5, 9], [1, 2, 2]),
            Regime::Case4 => ([2, 5, 7], [1, 1, 3]),
            Regime::Case5 => ([2, 3, 15], [1, 1, 7]),
        }
    }

    /// External angles `(alpha_bar, beta_bar)` in units of π, numerators over `den`.
    fn angles(self) -> ([i64; 3], [i64; 3], i64) {
        match self {
            Regime::SumA => ([2, 2, 2], [1, 1, 1], 3),
            Regime::SumB => ([2, 3, 3], [2, 1, 1], 4),
            Regime::SumC => ([3, 4, 5], [3, 2, 1], 6),
            Regime::Case1 => ([3, 2, 1], [1, 1, 1], 3),
            Regime::Case2 => ([7, 7, 2], [3, 3, 2], 8),
            Regime::Case3a => ([4, 2, 2], [2, 1, 1], 4),
            Regime::Case3b => ([6, 2, 4], [3, 2, 1], 6),
            Regime::Case4 => ([4, 3, 1], [2, 1, 1], 4),
            Regime::Case5 => ([8, 7, 1], [4, 3, 1], 8),
        }
    }

    pub fn certificate(self) -> Certificate {
        let (a, b, den) = self.angles();
        Certificate {
            alpha_bar: a.map(|x| Rational::new(x, den)),
            beta_bar: b.map(|x| Rational::new(x, den)),
            regime: Some(self),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// External corner angles in units of π: `alpha_bar` for large corners,
/// `beta_bar` for small corners, one per tangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub alpha_bar: [Rational; 3],
    pub beta_bar: [Rational; 3],
    pub regime: Option<Regime>,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    alpha_bar: [Rational; 3],
    beta_bar: [Rational; 3],
    units: String,
    #[serde(default)]
    regime: Option<String>,
}

impl Serialize for Certificate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CertificateJson {
            alpha_bar: self.alpha_bar.clone(),
            beta_bar: self.beta_bar.clone(),
            units: "pi".into(),
            regime: self.regime.map(|r| r.id().to_string()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let json = CertificateJson::deserialize(deserializer)?;
        if json.units != "pi" {
            return Err(D::Error::custom(format!(
                "angles must be given in units of pi, got units = {:?}",
                json.units
            )));
        }
        let regime = match json.regime {
            None => None,
            Some(id) => Some(
                Regime::from_id(&id)
                    .ok_or_else(|| D::Error::custom(format!("unknown regime `{id}`")))?,
            ),
        };
        Ok(Certificate {
            alpha_bar: json.alpha_bar,
            beta_bar: json.beta_bar,
            regime,
        })
    }
}

impl Certificate {
    /// Angles of tangle `i` move to position `j` where `permutation[j] = i`.
    pub fn permuted(&self, permutation: [usize; 3]) -> Certificate {
        Certificate {
            alpha_bar: permutation.map(|j| self.alpha_bar[j].clone()),
            beta_bar: permutation.map(|j| self.beta_bar[j].clone()),
            regime: self.regime,
        }
    }

    /// Inverse of [`permuted`](Self::permuted).
    pub fn unpermuted(&self, permutation: [usize; 3]) -> Certificate {
        let mut alpha_bar = self.alpha_bar.clone();
        let mut beta_bar = self.beta_bar.clone();
        for (j, &i) in permutation.iter().enumerate() {
            alpha_bar[i] = self.alpha_bar[j].clone();
            beta_bar[i] = self.beta_bar[j].clone();
        }
        Certificate {
            alpha_bar,
            beta_bar,
            regime: self.regime,
        }
    }
}

/// A failed check, with `slack` the signed amount by which it holds
/// (negative, or zero for a strict check, means violated).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub check: Provenance,
    pub slack: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails with slack {}", self.check, self.slack)
    }
}

/// Slack of every check, in a fixed order: bounds, then conditions (1)-(5).
/// Each entry is `(check, slack, strict)`.
pub fn condition_slacks(params: Params, cert: &Certificate) -> Vec<(Provenance, Rational, bool)> {
    let (q, pb) = params;
    let a = &cert.alpha_bar;
    let b = &cert.beta_bar;
    let mut out = Vec::new();
    for i in 0..3 {
        out.push((Provenance::AlphaBound(i + 1), a[i].clone(), true));
        out.push((
            Provenance::AlphaBound(i + 1),
            Rational::one() - &a[i],
            false,
        ));
        out.push((Provenance::BetaBound(i + 1), b[i].clone(), true));
        out.push((Provenance::BetaBound(i + 1), Rational::one() - &b[i], true));
    }
    out.push((
        Provenance::AlphaSum,
        Rational::from(2) - a.iter().sum::<Rational>(),
        false,
    ));
    out.push((
        Provenance::BetaSum,
        Rational::one() - b.iter().sum::<Rational>(),
        false,
    ));
    for i in 0..3 {
        out.push((
            Provenance::OddFace(i + 1),
            &a[i] + &(&b[i] * q[i]) - 2,
            false,
        ));
    }
    for i in 0..3 {
        out.push((
            Provenance::EvenFace(i + 1),
            &a[i] + &(&b[i] * pb[i]) - 1,
            false,
        ));
    }
    for i in 0..3 {
        if q[i] == 2 {
            out.push((Provenance::HalfTangle(i + 1), &a[i] + &b[i] - 1, true));
        }
    }
    out
}

/// Evaluates the angle conditions directly on `(q, |pbar|)`.
pub fn verify_params(params: Params, cert: &Certificate) -> Vec<Violation> {
    condition_slacks(params, cert)
        .into_iter()
        .filter(|(_, slack, strict)| slack.is_negative() || (*strict && slack.is_zero()))
        .map(|(check, slack, _)| Violation { check, slack })
        .collect()
}

pub fn verify_certificate(knot: &MontesinosKnot, cert: &Certificate) -> Vec<Violation> {
    verify_params((knot.q(), knot.pbar_abs()), cert)
}

/// First known preset (in [`Regime::ALL`] order) that applies to some
/// reordering of the knot's tangles, expressed in the knot's own tangle order.
pub fn preset_for(knot: &MontesinosKnot) -> Option<Certificate> {
    let orbit = knot.orbit();
    for regime in Regime::ALL {
        for (mv, image) in &orbit {
            if regime.matches((image.q(), image.pbar_abs())) {
                let cert = regime.certificate().unpermuted(mv.permutation);
                debug_assert!(verify_certificate(knot, &cert).is_empty());
                if verify_certificate(knot, &cert).is_empty() {
                    return Some(cert);
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KnotFeasibility {
    Feasible(Certificate),
    /// Witness indexes the constraints of `build_knot_system(knot)`.
    Infeasible(FarkasWitness),
}

impl KnotFeasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, KnotFeasibility::Feasible(_))
    }
}

/// Runs the exact solver on the knot's angle system. A feasible point is
/// turned into a certificate and checked again by direct evaluation.
pub fn solve_knot(knot: &MontesinosKnot) -> Result<KnotFeasibility, SolveError> {
    let system = build_knot_system(knot)?;
    match solve(&system)? {
        Feasibility::Feasible(point) => {
            let cert = Certificate {
                alpha_bar: [1, 2, 3].map(|i| point[alpha_var(i)].clone()),
                beta_bar: [1, 2, 3].map(|i| point[beta_var(i)].clone()),
                regime: None,
            };
            let violations = verify_certificate(knot, &cert);
            if !violations.is_empty() {
                return Err(SolveError::WitnessRejected(Vec::new()));
            }
            Ok(KnotFeasibility::Feasible(cert))
        }
        Feasibility::Infeasible(w) => Ok(KnotFeasibility::Infeasible(w)),
    }
}
