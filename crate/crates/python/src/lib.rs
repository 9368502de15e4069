//! Python bindings for the ormspace pipeline.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ormspace::validator::check_assertions;
use ormspace::{EnumerateOptions, MappingCandidate, ObjectModel, PinSet};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed and validated object model.
#[pyclass(name = "Model", module = "ormspace_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: ObjectModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ormspace::check_source(text)
            .map(|inner| Self { inner })
            .map_err(|diags| {
                value_error(
                    diags
                        .iter()
                        .map(|d| d.to_string())
                        .collect::<Vec<_>>()
                        .join("\n"),
                )
            })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.classes.iter().map(|c| c.name.clone()).collect()
    }

    #[getter]
    fn associations(&self) -> Vec<String> {
        self.inner
            .associations
            .iter()
            .map(|a| a.name.clone())
            .collect()
    }

    fn to_dsl(&self) -> String {
        ormspace::print_model(&self.inner)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("model serializes")
    }

    fn __repr__(&self) -> String {
        format!(
            "Model({:?}, {} classes, {} associations)",
            self.inner.name,
            self.inner.classes.len(),
            self.inner.associations.len()
        )
    }
}

/// One synthesized relational schema.
#[pyclass(name = "Candidate", module = "ormspace_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyCandidate {
    inner: MappingCandidate,
}

#[pymethods]
impl PyCandidate {
    #[getter]
    fn tables(&self) -> Vec<String> {
        self.inner.tables.iter().map(|t| t.name.clone()).collect()
    }

    #[getter]
    fn foreign_keys(&self) -> Vec<(String, String, String, String)> {
        self.inner
            .foreign_keys
            .iter()
            .map(|f| {
                (
                    f.from_table.clone(),
                    f.from_field.clone(),
                    f.to_table.clone(),
                    f.to_field.clone(),
                )
            })
            .collect()
    }

    /// Strategy name per class and association.
    fn assignment<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in &self.inner.assignment.classes {
            d.set_item(k, v.as_str())?;
        }
        for (k, v) in &self.inner.assignment.assocs {
            d.set_item(k, v.as_str())?;
        }
        Ok(d)
    }

    fn stored(&self, table: &str) -> Vec<String> {
        self.inner
            .t_associate
            .get(table)
            .cloned()
            .unwrap_or_default()
    }

    fn sql(&self) -> String {
        ormspace::emit_sql(&self.inner)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Candidate({} tables, {} foreign keys)",
            self.inner.tables.len(),
            self.inner.foreign_keys.len()
        )
    }
}

/// Every feasible mapping of `model`, optionally constrained by a pin set
/// given as JSON text.
#[pyfunction]
#[pyo3(signature = (model, pins=None, parallel=false))]
fn synthesize(model: &PyModel, pins: Option<&str>, parallel: bool) -> PyResult<Vec<PyCandidate>> {
    let pins = match pins {
        Some(text) => PinSet::from_json(text).map_err(value_error)?,
        None => PinSet::default(),
    };
    let r = ormspace::enumerate_with(&model.inner, &pins, EnumerateOptions { parallel })
        .map_err(value_error)?;
    Ok(r.candidates
        .into_iter()
        .map(|inner| PyCandidate { inner })
        .collect())
}

/// The six aggregate metrics of a candidate.
#[pyfunction]
fn metrics<'py>(
    py: Python<'py>,
    model: &PyModel,
    candidate: &PyCandidate,
) -> PyResult<Bound<'py, PyDict>> {
    let v = ormspace::metric_vector(&model.inner, &candidate.inner);
    let d = PyDict::new(py);
    for (name, value) in ormspace::METRIC_NAMES.iter().zip(v.aggregates()) {
        d.set_item(*name, value)?;
    }
    Ok(d)
}

/// Clusters candidates and returns `(report_json, radar_svg)`.
#[pyfunction]
fn pareto(model: &PyModel, candidates: Vec<PyCandidate>) -> (String, String) {
    let cands: Vec<MappingCandidate> = candidates.into_iter().map(|c| c.inner).collect();
    let report = ormspace::pareto(ormspace::cluster(&model.inner, &cands));
    (report.to_json_pretty(), ormspace::radar(&report))
}

/// Components of `model` and the names of the removed bridges.
#[pyfunction]
fn split(model: &PyModel) -> (Vec<PyModel>, Vec<String>) {
    let s = ormspace::split(&model.inner);
    (
        s.components
            .into_iter()
            .map(|inner| PyModel { inner })
            .collect(),
        s.removed_bridges,
    )
}

/// True when the candidate satisfies every structural assertion.
#[pyfunction]
fn check(model: &PyModel, candidate: &PyCandidate) -> bool {
    check_assertions(&candidate.inner, &model.inner).pass
}

#[pymodule]
fn ormspace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyCandidate>()?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(pareto, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
