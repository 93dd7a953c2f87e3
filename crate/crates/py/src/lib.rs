//! Python bindings: knots, classification, certificate checks, enumeration and
//! the Euler-sum check on angled graphs.
//!
//! Exact rationals cross the boundary as `fractions.Fraction`.

use montesinos::classifier::{self, Classification, EnumerateOptions, Verdict};
use montesinos::feasibility::{verify_certificate, Certificate, Regime};
use montesinos::gauss_bonnet::{graph_euler_check, validate_graph, GeneralizedGraph};
use montesinos::rational::Rational;
use montesinos::tangle::MontesinosKnot;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((r.to_string(),))
}

/// Accepts `Fraction`, `int` or strings like `"2/3"`.
fn rational(value: &Bound<'_, PyAny>) -> PyResult<Rational> {
    value.str()?.to_str()?.parse().map_err(value_error)
}

fn angles(values: Vec<Bound<'_, PyAny>>) -> PyResult<[Rational; 3]> {
    let parsed = values.iter().map(rational).collect::<PyResult<Vec<_>>>()?;
    parsed
        .try_into()
        .map_err(|v: Vec<Rational>| value_error(format!("expected 3 angles, got {}", v.len())))
}

/// A length-3 Montesinos knot or link, e.g. `Knot("K(1/3, 1/4, 2/5)")`.
#[pyclass(name = "Knot", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyKnot(MontesinosKnot);

#[pymethods]
impl PyKnot {
    #[new]
    fn new(literal: &str) -> PyResult<Self> {
        literal.parse().map(PyKnot).map_err(value_error)
    }

    #[staticmethod]
    fn from_fractions(fractions: [(i64, i64); 3]) -> PyResult<Self> {
        MontesinosKnot::from_fractions(fractions)
            .map(PyKnot)
            .map_err(value_error)
    }

    /// Slopes `(p, q)` as displayed, with the integer part folded in.
    #[getter]
    fn fractions(&self) -> [(i64, i64); 3] {
        self.0.display_fractions()
    }

    #[getter]
    fn q(&self) -> [i64; 3] {
        self.0.q()
    }

    #[getter]
    fn pbar_abs(&self) -> [i64; 3] {
        self.0.pbar_abs()
    }

    #[getter]
    fn component_count(&self) -> usize {
        self.0.component_count()
    }

    #[getter]
    fn is_knot(&self) -> bool {
        self.0.is_knot()
    }

    fn mirror(&self) -> Self {
        PyKnot(self.0.mirror())
    }

    fn permute(&self, permutation: [usize; 3]) -> PyResult<Self> {
        let mut seen = permutation;
        seen.sort();
        if seen != [0, 1, 2] {
            return Err(value_error(format!(
                "{permutation:?} is not a permutation of 0, 1, 2"
            )));
        }
        Ok(PyKnot(self.0.permute(permutation)))
    }

    /// Smallest image under reordering and mirroring; equal for knots in one orbit.
    fn orbit_representative(&self) -> Self {
        PyKnot(self.0.orbit_key().knot())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Knot(\"{}\")", self.0)
    }
}

fn knot_arg(value: &Bound<'_, PyAny>) -> PyResult<MontesinosKnot> {
    if let Ok(k) = value.cast::<PyKnot>() {
        return Ok(k.get().0.clone());
    }
    value.str()?.to_str()?.parse().map_err(value_error)
}

/// Outcome of classifying one knot.
#[pyclass(name = "Classification", frozen, skip_from_py_object)]
struct PyClassification(Classification);

#[pymethods]
impl PyClassification {
    #[getter]
    fn knot(&self) -> PyKnot {
        PyKnot(self.0.knot.clone())
    }

    /// `"certified"`, `"family"` or `"anomaly"`.
    #[getter]
    fn verdict(&self) -> &'static str {
        self.0.verdict.class().label()
    }

    #[getter]
    fn family(&self) -> Option<u8> {
        self.0.family()
    }

    /// `"preset"` or `"solver"` for certified knots.
    #[getter]
    fn certificate_source(&self) -> Option<String> {
        self.0.certificate_source().map(|s| s.to_string())
    }

    /// `{"alpha_bar": [...], "beta_bar": [...], "regime": id or None}` in units of pi.
    #[getter]
    fn certificate<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyDict>>> {
        let Verdict::CertifiedNoAsfs { certificate, .. } = &self.0.verdict else {
            return Ok(None);
        };
        let d = PyDict::new(py);
        let list = |xs: &[Rational; 3]| {
            xs.iter()
                .map(|x| fraction(py, x))
                .collect::<PyResult<Vec<_>>>()
        };
        d.set_item("alpha_bar", list(&certificate.alpha_bar)?)?;
        d.set_item("beta_bar", list(&certificate.beta_bar)?)?;
        d.set_item("regime", certificate.regime.map(Regime::id))?;
        Ok(Some(d))
    }

    /// Farkas multipliers `[(constraint, weight), ...]` when the solver proved infeasibility.
    #[getter]
    fn farkas<'py>(&self, py: Python<'py>) -> PyResult<Option<Vec<(usize, Bound<'py, PyAny>)>>> {
        self.0
            .farkas
            .as_ref()
            .map(|w| {
                w.multipliers
                    .iter()
                    .map(|(k, m)| Ok((*k, fraction(py, m)?)))
                    .collect()
            })
            .transpose()
    }

    /// The flat JSON row also printed by the command-line tool.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0.row()).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        match self.0.family() {
            Some(id) => format!("<Classification {} family {id}>", self.0.knot),
            None => format!("<Classification {} {}>", self.0.knot, self.verdict()),
        }
    }
}

/// Classifies a knot given as a `Knot` or a literal such as `"K(1/2, 1/5, 1/5)"`.
#[pyfunction]
fn classify(knot: &Bound<'_, PyAny>) -> PyResult<PyClassification> {
    let knot = knot_arg(knot)?;
    classifier::classify(&knot)
        .map(PyClassification)
        .map_err(value_error)
}

/// Checks angles (in units of pi) against every bound and condition.
/// Returns the failed checks as strings; an empty list means the angles certify the knot.
#[pyfunction]
fn certify(
    knot: &Bound<'_, PyAny>,
    alpha_bar: Vec<Bound<'_, PyAny>>,
    beta_bar: Vec<Bound<'_, PyAny>>,
) -> PyResult<Vec<String>> {
    let knot = knot_arg(knot)?;
    let cert = Certificate {
        alpha_bar: angles(alpha_bar)?,
        beta_bar: angles(beta_bar)?,
        regime: None,
    };
    Ok(verify_certificate(&knot, &cert)
        .iter()
        .map(|v| v.to_string())
        .collect())
}

/// Classifies one representative per orbit with every `q_i <= q_bound`.
/// Returns `(classifications, summary)`.
#[pyfunction]
#[pyo3(signature = (q_bound, jobs = None))]
fn enumerate<'py>(
    py: Python<'py>,
    q_bound: i64,
    jobs: Option<usize>,
) -> PyResult<(Vec<PyClassification>, Bound<'py, PyAny>)> {
    if jobs == Some(0) {
        return Err(value_error("jobs must be at least 1"));
    }
    let options = EnumerateOptions {
        include_links: false,
        jobs,
    };
    let result = py
        .detach(|| classifier::enumerate_and_classify(q_bound, options))
        .map_err(value_error)?;
    let summary = serde_json::to_string(&result.summary).map_err(value_error)?;
    let summary = py.import("json")?.getattr("loads")?.call1((summary,))?;
    Ok((
        result.rows.into_iter().map(PyClassification).collect(),
        summary,
    ))
}

/// Checks the angled-graph Euler identity on a graph given as JSON text.
/// Valence rules apply when `delta` is given here or in the file.
/// Returns `{"sum_e", "chi", "equality", "violations"}`; `sum_e` and
/// `equality` are None when the graph has violations.
#[pyfunction]
#[pyo3(signature = (graph_json, delta = None))]
fn gb_check<'py>(
    py: Python<'py>,
    graph_json: &str,
    delta: Option<u32>,
) -> PyResult<Bound<'py, PyDict>> {
    let graph: GeneralizedGraph = serde_json::from_str(graph_json).map_err(value_error)?;
    let mut violations = match delta.or(graph.delta) {
        Some(d) => validate_graph(&graph, d),
        None => graph.structural_violations(),
    };
    let report = if violations.is_empty() {
        graph_euler_check(&graph)
            .map_err(|e| violations.push(e))
            .ok()
    } else {
        None
    };
    let d = PyDict::new(py);
    d.set_item(
        "sum_e",
        report
            .as_ref()
            .map(|r| fraction(py, &r.sum_e))
            .transpose()?,
    )?;
    d.set_item("chi", graph.surface_euler_char)?;
    d.set_item("equality", report.map(|r| r.equality))?;
    d.set_item(
        "violations",
        violations.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
    )?;
    Ok(d)
}

#[pymodule]
fn pymontesinos(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKnot>()?;
    m.add_class::<PyClassification>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(gb_check, m)?)?;
    m.add("DISCLAIMER", classifier::DISCLAIMER)?;
    Ok(())
}
