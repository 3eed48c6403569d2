//! Python bindings. Exact values cross the boundary as "num/den" strings,
//! which `fractions.Fraction` parses directly; inputs accept anything whose
//! `str()` is an integer, a fraction or a finite decimal.

// the pymethods expansion converts PyErr into itself
#![allow(clippy::useless_conversion)]

use std::str::FromStr;

use nadic_core::config::DepthSetting;
use nadic_core::driver;
use nadic_core::weights::uniform_rh_constant_bound;
use nadic_core::{
    ExactRational, ExperimentConfig, Interval, NAdicInterval as CoreNAdic, ReweightParams as CoreParams,
    StepDensity,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat(v: &Bound<'_, PyAny>) -> PyResult<ExactRational> {
    ExactRational::from_str(&v.str()?.to_cow()?).map_err(err)
}

fn interval(lo: &Bound<'_, PyAny>, hi: &Bound<'_, PyAny>) -> PyResult<Interval> {
    Interval::new(rat(lo)?, rat(hi)?).map_err(err)
}

fn depth(d: Option<&Bound<'_, PyAny>>) -> PyResult<nadic_core::Depth> {
    match d {
        None => Ok(nadic_core::Depth::Auto),
        Some(v) => DepthSetting::from_str(&v.str()?.to_cow()?).map(DepthSetting::to_depth).map_err(err),
    }
}

/// Serialises through JSON so Python sees plain dicts and lists.
fn to_py<T: serde::Serialize>(py: Python<'_>, v: &T) -> PyResult<PyObject> {
    let text = serde_json::to_string(v).map_err(err)?;
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "NAdicInterval", frozen)]
#[derive(Clone)]
struct PyNAdic(CoreNAdic);

#[pymethods]
impl PyNAdic {
    #[new]
    fn new(base: u32, level: i32, index: i64) -> PyResult<Self> {
        CoreNAdic::new(base, level, index).map(PyNAdic).map_err(err)
    }

    #[getter]
    fn base(&self) -> u32 {
        self.0.base()
    }

    #[getter]
    fn level(&self) -> i32 {
        self.0.level()
    }

    #[getter]
    fn index(&self) -> String {
        self.0.index().to_string()
    }

    #[getter]
    fn lo(&self) -> String {
        self.0.lo().to_string()
    }

    #[getter]
    fn hi(&self) -> String {
        self.0.hi().to_string()
    }

    fn children(&self) -> Vec<PyNAdic> {
        self.0.children().into_iter().map(PyNAdic).collect()
    }

    fn siblings(&self) -> Vec<PyNAdic> {
        self.0.siblings().into_iter().map(PyNAdic).collect()
    }

    fn parent(&self) -> PyNAdic {
        PyNAdic(self.0.parent())
    }

    fn __repr__(&self) -> String {
        format!("NAdicInterval(base={}, level={}, index={}) = [{}, {})", self.0.base(), self.0.level(), self.0.index(), self.0.lo(), self.0.hi())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

#[pyclass(name = "ReweightParams", frozen)]
#[derive(Clone)]
struct PyParams(CoreParams);

#[pymethods]
impl PyParams {
    #[new]
    fn new(a: &Bound<'_, PyAny>, alpha: u32, x: u64) -> PyResult<Self> {
        CoreParams::new(rat(a)?, alpha, x).map(PyParams).map_err(err)
    }

    #[getter]
    fn a(&self) -> String {
        self.0.a().to_string()
    }

    #[getter]
    fn b(&self) -> String {
        self.0.b().to_string()
    }

    #[getter]
    fn alpha(&self) -> u32 {
        self.0.alpha()
    }

    #[getter]
    fn x(&self) -> u64 {
        self.0.x()
    }

    #[getter]
    fn z(&self) -> String {
        self.0.z().to_string()
    }

    #[getter]
    fn kappa(&self) -> String {
        self.0.kappa().to_string()
    }

    fn support(&self) -> (String, String) {
        let s = self.0.support();
        (s.lo().to_string(), s.hi().to_string())
    }

    /// Ratio of the extreme adjacent pair of the stage.
    fn extreme_ratio(&self) -> String {
        nadic_core::extreme_pair(&self.0).ratio.to_string()
    }

    /// Certified bound on the RH constant (r-th power) over n-adic intervals, when b^r < 2.
    fn uniform_rh_bound(&self, r: u32) -> Option<String> {
        uniform_rh_constant_bound(&self.0, r).map(|v| v.to_string())
    }

    fn density(&self) -> PyDensity {
        PyDensity(nadic_core::reweight(&self.0))
    }
}

#[pyclass(name = "StepDensity", frozen)]
struct PyDensity(StepDensity);

#[pymethods]
impl PyDensity {
    /// From `(lo, hi, value)` triples and the value outside them.
    #[new]
    #[pyo3(signature = (pieces, tail = None))]
    fn new(pieces: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>, Bound<'_, PyAny>)>, tail: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let pieces = pieces
            .iter()
            .map(|(lo, hi, v)| Ok((interval(lo, hi)?, rat(v)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let tail = tail.map(rat).transpose()?.unwrap_or_else(ExactRational::one);
        StepDensity::from_pieces(pieces, tail).map(PyDensity).map_err(err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        StepDensity::from_text(text).map(PyDensity).map_err(err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn pieces(&self) -> Vec<(String, String, String)> {
        self.0.pieces().into_iter().map(|(i, v)| (i.lo().to_string(), i.hi().to_string(), v.to_string())).collect()
    }

    fn integrate(&self, lo: &Bound<'_, PyAny>, hi: &Bound<'_, PyAny>) -> PyResult<String> {
        Ok(self.0.integrate(&interval(lo, hi)?).to_string())
    }

    /// Supremum of sibling ratios over n-adic intervals; `depth` is "auto" or a level.
    #[pyo3(signature = (n, depth = None))]
    fn doubling_constant(&self, py: Python<'_>, n: u32, depth: Option<&Bound<'_, PyAny>>) -> PyResult<PyObject> {
        let d = nadic_core::nadic_doubling_constant(&self.0, n, self::depth(depth)?).map_err(err)?;
        let out = to_py(py, &d)?;
        out.bind(py).downcast::<PyDict>()?.set_item("bound", d.bound().to_string())?;
        Ok(out)
    }

    /// Supremum of the r-th power RH constant over n-adic intervals.
    #[pyo3(signature = (n, r, depth = None))]
    fn rh_constant(&self, py: Python<'_>, n: u32, r: u32, depth: Option<&Bound<'_, PyAny>>) -> PyResult<PyObject> {
        let d = nadic_core::nadic_rh_constant(&self.0, n, r, self::depth(depth)?, None).map_err(err)?;
        let out = to_py(py, &d)?;
        out.bind(py).downcast::<PyDict>()?.set_item("bound", d.bound().to_string())?;
        Ok(out)
    }

    /// RH constant (r-th power) on one interval.
    fn rh_on(&self, lo: &Bound<'_, PyAny>, hi: &Bound<'_, PyAny>, r: u32) -> PyResult<String> {
        let c = nadic_core::rh_constant(&self.0, &interval(lo, hi)?, r).map_err(err)?;
        Ok(c.constant_rth_power.to_string())
    }
}

/// Smallest x <= x_max with every n^x within relative error eps of a power of two.
#[pyfunction]
fn find_witness(py: Python<'_>, bases: Vec<u32>, epsilon: &Bound<'_, PyAny>, x_max: u64) -> PyResult<Option<PyObject>> {
    let w = nadic_core::find_witness(&bases, &rat(epsilon)?, x_max).map_err(err)?;
    w.map(|w| {
        let out = to_py(py, &w)?;
        out.bind(py).downcast::<PyDict>()?.set_item("errors", to_py(py, &w.errors())?)?;
        Ok(out)
    })
    .transpose()
}

/// Continued-fraction candidates (p, x) with p/x close to log2(n).
#[pyfunction]
#[pyo3(signature = (n, count = 8))]
fn convergent_candidates(n: u32, count: usize) -> PyResult<Vec<(u64, u64)>> {
    nadic_core::convergent_candidates(n, count).map_err(err)
}

#[pyfunction]
fn covering_bound(i1: (Bound<'_, PyAny>, Bound<'_, PyAny>), i2: (Bound<'_, PyAny>, Bound<'_, PyAny>), n: u32, m: &Bound<'_, PyAny>) -> PyResult<String> {
    let v = nadic_core::covering_bound(&interval(&i1.0, &i1.1)?, &interval(&i2.0, &i2.1)?, n, &rat(m)?).map_err(err)?;
    Ok(v.to_string())
}

/// Runs a TOML experiment config; returns the report as a dict.
#[pyfunction]
fn run_config(py: Python<'_>, toml_text: &str) -> PyResult<PyObject> {
    let cfg = ExperimentConfig::from_toml(toml_text).map_err(err)?;
    let rep = driver::run(&cfg).map_err(err)?;
    py.import_bound("json")?.call_method1("loads", (rep.to_json().map_err(err)?,)).map(Bound::unbind)
}

#[pymodule]
fn nadic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNAdic>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyDensity>()?;
    m.add_function(wrap_pyfunction!(find_witness, m)?)?;
    m.add_function(wrap_pyfunction!(convergent_candidates, m)?)?;
    m.add_function(wrap_pyfunction!(covering_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
