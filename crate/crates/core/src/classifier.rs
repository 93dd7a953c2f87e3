//! End-to-end verdicts: certify by a known angle preset or the exact solver,
//! otherwise name the residual family the knot falls into.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feasibility::{
    preset_for, solve_knot, verify_certificate, Certificate, FarkasWitness, KnotFeasibility,
    SolveError, SystemError,
};
use crate::tangle::{
    enumerate_canonical, partial_fraction_small_pbar, MontesinosKnot, PartialFractionForm,
};

pub const DISCLAIMER: &str = "assumes K hyperbolic";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("not a knot: {components} components")]
    NotAKnot { components: usize },
    #[error("solver failure: {0}")]
    Solve(SolveError),
}

impl From<SolveError> for ClassifyError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::System(SystemError::NotAKnot { components }) => {
                ClassifyError::NotAKnot { components }
            }
            other => ClassifyError::Solve(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateSource {
    Preset,
    Solver,
}

impl fmt::Display for CertificateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateSource::Preset => "preset",
            CertificateSource::Solver => "solver",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    CertifiedNoAsfs {
        certificate: Certificate,
        source: CertificateSource,
    },
    /// `representative` is the orbit image written in the family's own tangle order.
    ResidualFamily {
        id: u8,
        representative: MontesinosKnot,
    },
    Anomaly {
        report: String,
    },
}

impl Verdict {
    pub fn class(&self) -> VerdictClass {
        match self {
            Verdict::CertifiedNoAsfs { .. } => VerdictClass::Certified,
            Verdict::ResidualFamily { id, .. } => VerdictClass::Family(*id),
            Verdict::Anomaly { .. } => VerdictClass::Anomaly,
        }
    }
}

/// Verdict with the knot-specific payload dropped, for comparing orbit images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VerdictClass {
    Certified,
    Family(u8),
    Anomaly,
}

impl VerdictClass {
    pub fn label(self) -> &'static str {
        match self {
            VerdictClass::Certified => "certified",
            VerdictClass::Family(_) => "family",
            VerdictClass::Anomaly => "anomaly",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub knot: MontesinosKnot,
    pub verdict: Verdict,
    /// Present whenever the solver ran and found the system infeasible.
    pub farkas: Option<FarkasWitness>,
}

/// Flat serialized form of a [`Classification`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub knot: String,
    pub verdict: String,
    pub certificate: Option<Certificate>,
    pub family: Option<u8>,
    pub disclaimer: String,
}

impl Classification {
    pub fn certificate_source(&self) -> Option<CertificateSource> {
        match &self.verdict {
            Verdict::CertifiedNoAsfs { source, .. } => Some(*source),
            _ => None,
        }
    }

    pub fn family(&self) -> Option<u8> {
        match &self.verdict {
            Verdict::ResidualFamily { id, .. } => Some(*id),
            _ => None,
        }
    }

    pub fn row(&self) -> ClassificationRow {
        ClassificationRow {
            knot: self.knot.to_string(),
            verdict: self.verdict.class().label().to_string(),
            certificate: match &self.verdict {
                Verdict::CertifiedNoAsfs { certificate, .. } => Some(certificate.clone()),
                _ => None,
            },
            family: self.family(),
            disclaimer: DISCLAIMER.to_string(),
        }
    }
}

fn residue(p: i64, q: i64) -> i64 {
    p.rem_euclid(q)
}

/// Tests one ordered image against the five residual patterns.
fn family_pattern(knot: &MontesinosKnot) -> Option<u8> {
    let t = knot.tangles();
    let q = knot.q();
    let pb = knot.pbar_abs();
    let is = |i: usize, p: i64, qq: i64| q[i] == qq && residue(t[i].p(), qq) == residue(p, qq);
    let is_pm = |i: usize, p: i64, qq: i64| is(i, p, qq) || is(i, -p, qq);

    if is(0, 1, 3) && is_pm(1, 1, 4) && q[2] == 5 && is_pm(2, 1, 5) {
        return Some(1);
    }
    if is(0, 1, 3) && is_pm(1, 1, 3) && pb[2] <= 2 {
        return Some(2);
    }
    if is(0, 1, 2) && is_pm(1, 2, 5) && (q[2] == 5 || q[2] == 7) && pb[2] > 1 {
        return Some(3);
    }
    if is(0, 1, 2) && q[1] >= 5 && is_pm(1, 1, q[1]) && pb[2] <= 2 {
        return Some(4);
    }
    if is(0, 1, 2) && is_pm(1, 1, 3) && pb[2] <= 6 {
        return Some(5);
    }
    None
}

/// Smallest family id matched by any permutation or mirror image, with the
/// image that matched.
pub fn family_match_with_image(knot: &MontesinosKnot) -> Option<(u8, MontesinosKnot)> {
    knot.orbit()
        .into_iter()
        .filter_map(|(_, image)| family_pattern(&image).map(|id| (id, image)))
        .min_by_key(|(id, _)| *id)
}

pub fn family_match(knot: &MontesinosKnot) -> Option<u8> {
    family_match_with_image(knot).map(|(id, _)| id)
}

pub fn classify(knot: &MontesinosKnot) -> Result<Classification, ClassifyError> {
    let components = knot.component_count();
    if components != 1 {
        return Err(ClassifyError::NotAKnot { components });
    }
    if let Some(certificate) = preset_for(knot) {
        return Ok(Classification {
            knot: knot.clone(),
            verdict: Verdict::CertifiedNoAsfs {
                certificate,
                source: CertificateSource::Preset,
            },
            farkas: None,
        });
    }
    match solve_knot(knot)? {
        KnotFeasibility::Feasible(certificate) => Ok(Classification {
            knot: knot.clone(),
            verdict: Verdict::CertifiedNoAsfs {
                certificate,
                source: CertificateSource::Solver,
            },
            farkas: None,
        }),
        KnotFeasibility::Infeasible(witness) => {
            let verdict = match family_match_with_image(knot) {
                Some((id, representative)) => Verdict::ResidualFamily { id, representative },
                None => Verdict::Anomaly {
                    report: format!(
                        "angle system infeasible for {knot} (q = {:?}, |pbar| = {:?}) but no residual family matches",
                        knot.q(),
                        knot.pbar_abs()
                    ),
                },
            };
            Ok(Classification {
                knot: knot.clone(),
                verdict,
                farkas: Some(witness),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EnumerateOptions {
    /// Count closures with more than one component in the summary.
    pub include_links: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    pub q_bound: i64,
    pub knots: usize,
    pub certified_preset: usize,
    pub certified_solver: usize,
    pub families: BTreeMap<u8, usize>,
    pub anomalies: usize,
    /// Certified knots that also fit a residual family pattern.
    pub certified_in_family: usize,
    /// Only counted when links are requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub links: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub rows: Vec<Classification>,
    pub summary: Summary,
}

#[derive(Debug, Error)]
pub enum EnumerateError {
    #[error("q bound must be at least 2, got {0}")]
    BadBound(i64),
    #[error("could not start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("classifying {knot}: {source}")]
    Classify { knot: String, source: ClassifyError },
}

/// Classifies one representative per orbit with all `q_i <= q_bound`, in
/// canonical order regardless of the number of workers.
pub fn enumerate_and_classify(
    q_bound: i64,
    options: EnumerateOptions,
) -> Result<Enumeration, EnumerateError> {
    if q_bound < 2 {
        return Err(EnumerateError::BadBound(q_bound));
    }
    let candidates = enumerate_canonical(q_bound);
    let links = candidates.iter().filter(|k| !k.is_knot()).count();
    let knots: Vec<MontesinosKnot> = candidates.into_iter().filter(|k| k.is_knot()).collect();

    let work = || -> Vec<Result<(Classification, bool), EnumerateError>> {
        knots
            .par_iter()
            .map(|k| {
                let c = classify(k).map_err(|source| EnumerateError::Classify {
                    knot: k.to_string(),
                    source,
                })?;
                let in_family = c.certificate_source().is_some() && family_match(k).is_some();
                Ok((c, in_family))
            })
            .collect()
    };
    let results = match options.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()?
            .install(work),
        None => work(),
    };

    let mut summary = Summary {
        q_bound,
        links: options.include_links.then_some(links),
        ..Summary::default()
    };
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let (c, in_family) = r?;
        summary.knots += 1;
        match &c.verdict {
            Verdict::CertifiedNoAsfs { source, .. } => match source {
                CertificateSource::Preset => summary.certified_preset += 1,
                CertificateSource::Solver => summary.certified_solver += 1,
            },
            Verdict::ResidualFamily { id, .. } => *summary.families.entry(*id).or_default() += 1,
            Verdict::Anomaly { report } => {
                log::warn!("{report}");
                summary.anomalies += 1;
            }
        }
        if in_family {
            summary.certified_in_family += 1;
        }
        rows.push(c);
    }
    Ok(Enumeration { rows, summary })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub tangle: usize,
    pub form: String,
    #[serde(skip)]
    pub parts: PartialFractionForm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub knot: String,
    pub preset: Option<Certificate>,
    pub preset_valid: Option<bool>,
    pub solver_feasible: bool,
    /// False only if a preset applies but the solver reports infeasible.
    pub preset_implies_feasible: bool,
    /// Solver feasibility for each of the 12 orbit images, identity first.
    pub orbit_feasible: Vec<bool>,
    pub orbit_uniform: bool,
    pub family: Option<u8>,
    /// Tangles with `|pbar| = 2`, written as `n ± 1/(2 ± 1/m)`.
    pub decompositions: Vec<Decomposition>,
}

impl CrossCheck {
    pub fn consistent(&self) -> bool {
        self.preset_valid != Some(false) && self.preset_implies_feasible && self.orbit_uniform
    }
}

pub fn cross_check(knot: &MontesinosKnot) -> Result<CrossCheck, ClassifyError> {
    let preset = preset_for(knot);
    let preset_valid = preset
        .as_ref()
        .map(|c| verify_certificate(knot, c).is_empty());
    let solver_feasible = solve_knot(knot)?.is_feasible();
    let orbit_feasible = knot
        .orbit()
        .into_iter()
        .map(|(_, image)| solve_knot(&image).map(|f| f.is_feasible()))
        .collect::<Result<Vec<_>, _>>()?;
    let orbit_uniform = orbit_feasible.iter().all(|&f| f == solver_feasible);
    let decompositions = knot
        .tangles()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.pbar_abs() == 2)
        .map(|(i, t)| {
            let parts = partial_fraction_small_pbar(t.p(), t.q()).expect("|pbar| = 2 was checked");
            Decomposition {
                tangle: i + 1,
                form: parts.to_string(),
                parts,
            }
        })
        .collect();
    Ok(CrossCheck {
        knot: knot.to_string(),
        preset_implies_feasible: preset.is_none() || solver_feasible,
        preset,
        preset_valid,
        solver_feasible,
        orbit_feasible,
        orbit_uniform,
        family: family_match(knot),
        decompositions,
    })
}
