//! Python bindings. Structured results cross the boundary as plain
//! dicts and lists; profiles stay wrapped as `LicenseProfile`.

use std::io::Cursor;

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use lichain::benchmark::{generate_mutants as core_generate_mutants, CueTable};
use lichain::evalkit::{chi_square_test as core_chi_square, score_extraction as core_score, Scope};
use lichain::extraction::{
    extract_rules as core_extract_rules, match_template as core_match_template,
    parse_agent_output as core_parse, RulePatterns, TemplateCatalog, TemplateMatch,
};
use lichain::graph::{
    build_graph, enumerate_chains as core_chains, read_records, scan_conflicts, ProfileStore,
    ScanOptions,
};
use lichain::ingestion::{bundled_signatures, scan_invocations};
use lichain::{bundled, complete_profile, Attitude, MissingLicensePolicy, Taxonomy};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON so nested results arrive as dicts and lists.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn attitude(s: &str) -> PyResult<Attitude> {
    s.parse().map_err(value_err)
}

/// A license's term/attitude assignments.
#[pyclass(name = "LicenseProfile", module = "lichain_py", frozen)]
struct PyLicenseProfile {
    inner: lichain::LicenseProfile,
}

#[pymethods]
impl PyLicenseProfile {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        lichain::LicenseProfile::from_json(text)
            .map(|inner| PyLicenseProfile { inner })
            .map_err(value_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn license_id(&self) -> &str {
        self.inner.license_id()
    }

    /// Term → attitude for every assignment present.
    fn attitudes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for a in self.inner.assignments() {
            d.set_item(&a.term, a.attitude.as_str())?;
        }
        Ok(d)
    }

    fn declared_terms(&self) -> Vec<String> {
        self.inner.declared().map(|a| a.term.clone()).collect()
    }

    /// Fills unmentioned terms with their defaults.
    fn complete(&self) -> PyResult<Self> {
        complete_profile(&self.inner, &Taxonomy::bundled())
            .map(|inner| PyLicenseProfile { inner })
            .map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "LicenseProfile({:?}, {} terms)",
            self.inner.license_id(),
            self.inner.len()
        )
    }
}

#[pyfunction]
fn attitude_compatible(upstream: &str, downstream: &str) -> PyResult<bool> {
    Ok(lichain::attitude_compatible(
        attitude(upstream)?,
        attitude(downstream)?,
    ))
}

#[pyfunction]
fn term_ids() -> Vec<String> {
    Taxonomy::bundled()
        .terms()
        .iter()
        .map(|t| t.id.clone())
        .collect()
}

#[pyfunction]
fn bundled_license_ids() -> Vec<&'static str> {
    bundled::OSS
        .iter()
        .chain(bundled::AI)
        .map(|l| l.id)
        .collect()
}

fn bundled_entry(license_id: &str) -> PyResult<&'static bundled::BundledLicense> {
    bundled::OSS
        .iter()
        .chain(bundled::AI)
        .find(|l| l.id.eq_ignore_ascii_case(license_id))
        .ok_or_else(|| PyKeyError::new_err(license_id.to_string()))
}

/// Ground-truth profile of a bundled license (Declared terms only).
#[pyfunction]
fn bundled_profile(license_id: &str) -> PyResult<PyLicenseProfile> {
    PyLicenseProfile::from_json(bundled_entry(license_id)?.profile)
}

#[pyfunction]
fn bundled_text(license_id: &str) -> PyResult<&'static str> {
    Ok(bundled_entry(license_id)?.text)
}

/// Term conflicts of `downstream` depending on `upstream`; both are completed first.
#[pyfunction]
fn check_pair<'py>(
    py: Python<'py>,
    downstream: &PyLicenseProfile,
    upstream: &PyLicenseProfile,
) -> PyResult<Bound<'py, PyAny>> {
    let t = Taxonomy::bundled();
    let down = complete_profile(&downstream.inner, &t).map_err(value_err)?;
    let up = complete_profile(&upstream.inner, &t).map_err(value_err)?;
    let conflicts = lichain::check_pair(&down, &up, &t).map_err(value_err)?;
    to_py(py, &conflicts)
}

#[pyfunction]
fn match_template<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    let m = core_match_template(text, &TemplateCatalog::bundled());
    let d = PyDict::new(py);
    d.set_item("license_id", m.license_id())?;
    match &m {
        TemplateMatch::Exact { .. } => d.set_item("kind", "exact")?,
        TemplateMatch::NoAssertion {
            closest,
            similarity,
        } => {
            d.set_item("kind", "noassertion")?;
            d.set_item("closest", closest)?;
            d.set_item("similarity", similarity)?;
        }
        TemplateMatch::Unknown {
            closest,
            similarity,
        } => {
            d.set_item("kind", "unknown")?;
            d.set_item("closest", closest)?;
            d.set_item("similarity", similarity)?;
        }
        TemplateMatch::NotFound => d.set_item("kind", "not_found")?,
    }
    Ok(d)
}

#[pyfunction]
fn extract_rules(text: &str, license_id: &str) -> PyLicenseProfile {
    let patterns = RulePatterns::bundled(&Taxonomy::bundled());
    PyLicenseProfile {
        inner: core_extract_rules(text, license_id, &patterns),
    }
}

/// Parses an agent answer into term assignments with their evidence.
#[pyfunction]
fn parse_agent_output<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let parsed = core_parse(text, &Taxonomy::bundled()).map_err(value_err)?;
    to_py(py, &parsed.assignments)
}

/// Model-loading calls in one Python source file.
#[pyfunction]
#[pyo3(signature = (source, path = "<string>"))]
fn scan_source<'py>(py: Python<'py>, source: &str, path: &str) -> PyResult<Bound<'py, PyAny>> {
    let findings = scan_invocations(path, source, &bundled_signatures()).map_err(value_err)?;
    to_py(py, &findings)
}

/// Conflict report for line-delimited graph records, checked against the
/// bundled profiles.
#[pyfunction]
#[pyo3(signature = (records, policy = "strict", lenient = false))]
fn check_graph<'py>(
    py: Python<'py>,
    records: &str,
    policy: &str,
    lenient: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let missing_license = match policy {
        "strict" => MissingLicensePolicy::Strict,
        "skip" => MissingLicensePolicy::Skip,
        other => return Err(PyValueError::new_err(format!("unknown policy `{other}`"))),
    };
    let records = read_records(Cursor::new(records)).map_err(value_err)?;
    let (graph, _) = build_graph(records).map_err(value_err)?;
    let store = ProfileStore::bundled(Taxonomy::bundled());
    let report = scan_conflicts(
        &graph,
        &store,
        ScanOptions {
            missing_license,
            lenient,
        },
    )
    .map_err(value_err)?;
    to_py(py, &report)
}

#[pyfunction]
fn enumerate_chains<'py>(py: Python<'py>, records: &str) -> PyResult<Bound<'py, PyAny>> {
    let records = read_records(Cursor::new(records)).map_err(value_err)?;
    let (graph, _) = build_graph(records).map_err(value_err)?;
    to_py(py, &core_chains(&graph))
}

/// Mutants of a bundled license as `(mutant_id, text, profile)` tuples.
#[pyfunction]
fn generate_mutants(license_id: &str) -> PyResult<Vec<(String, String, PyLicenseProfile)>> {
    let entry = bundled_entry(license_id)?;
    let base = lichain::LicenseProfile::from_json(entry.profile).map_err(value_err)?;
    let t = Taxonomy::bundled();
    let mutants = core_generate_mutants(entry.text, &base, None, &t, &CueTable::bundled(&t))
        .map_err(value_err)?;
    Ok(mutants
        .into_iter()
        .map(|m| (m.license_id, m.text, PyLicenseProfile { inner: m.profile }))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (predicted, truth, scope = "declared"))]
fn score_extraction<'py>(
    py: Python<'py>,
    predicted: &PyLicenseProfile,
    truth: &PyLicenseProfile,
    scope: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let scope = match scope {
        "declared" => Scope::DeclaredOnly,
        "all" => Scope::AllTerms,
        other => return Err(PyValueError::new_err(format!("unknown scope `{other}`"))),
    };
    let m = core_score(&predicted.inner, &truth.inner, scope, &Taxonomy::bundled())
        .map_err(value_err)?;
    to_py(py, &m)
}

#[pyfunction]
fn chi_square_test<'py>(py: Python<'py>, table: Vec<Vec<u64>>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &core_chi_square(&table).map_err(value_err)?)
}

#[pymodule]
fn lichain_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLicenseProfile>()?;
    m.add_function(wrap_pyfunction!(attitude_compatible, m)?)?;
    m.add_function(wrap_pyfunction!(term_ids, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_license_ids, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_profile, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_text, m)?)?;
    m.add_function(wrap_pyfunction!(check_pair, m)?)?;
    m.add_function(wrap_pyfunction!(match_template, m)?)?;
    m.add_function(wrap_pyfunction!(extract_rules, m)?)?;
    m.add_function(wrap_pyfunction!(parse_agent_output, m)?)?;
    m.add_function(wrap_pyfunction!(scan_source, m)?)?;
    m.add_function(wrap_pyfunction!(check_graph, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_chains, m)?)?;
    m.add_function(wrap_pyfunction!(generate_mutants, m)?)?;
    m.add_function(wrap_pyfunction!(score_extraction, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square_test, m)?)?;
    Ok(())
}
