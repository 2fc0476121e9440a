//! Python bindings. Matrices cross the boundary as nested lists of `complex`.

use ck_dilation::dilate::{dilate_isometric_schaffer, dilate_kernel, dilate_poisson, DilationResult, Method};
use ck_dilation::linalg::CMat;
use ck_dilation::pieces::{maximal_piece as piece_of, preset_polysets, PolyPreset};
use ck_dilation::report::{run_suite, SuiteConfig};
use ck_dilation::tuples::{self, DEFAULT_TOL};
use ck_dilation::variety::{admissible_supports, symmetrize};
use ck_dilation::words::{admissible_up_to, TransitionMatrix};
use ck_dilation::{Error, OperatorTuple};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(ckdilation, DomainError, PyException, "A mathematical precondition does not hold.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Construction { .. } => DomainError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Rows = Vec<Vec<Complex64>>;
type VarietySummary = (Vec<Vec<u8>>, Vec<usize>, Vec<(usize, usize)>, Vec<Vec<usize>>);

fn from_rows(rows: &Rows) -> PyResult<CMat> {
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err(PyValueError::new_err("ragged matrix rows"));
    }
    Ok(CMat::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

fn to_rows(m: &CMat) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

#[pyclass(name = "TransitionMatrix", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTransition(TransitionMatrix);

#[pymethods]
impl PyTransition {
    #[new]
    fn new(rows: Vec<Vec<u8>>) -> PyResult<Self> {
        TransitionMatrix::new(rows).map(PyTransition).map_err(to_py)
    }

    #[staticmethod]
    fn all_ones(n: usize) -> Self {
        PyTransition(TransitionMatrix::all_ones(n))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn rows(&self) -> Vec<Vec<u8>> {
        self.0.rows()
    }

    /// Admissible words of length at most `max_len`, as lists of 1-based letters.
    fn words(&self, max_len: usize) -> Vec<Vec<usize>> {
        admissible_up_to(&self.0, max_len).iter().map(|w| w.letters().to_vec()).collect()
    }

    /// `(A', zero vertices, edges, maximal supports)` of the symmetrized graph.
    fn variety(&self) -> PyResult<VarietySummary> {
        let g = symmetrize(&self.0);
        let supports = admissible_supports(&g).map_err(to_py)?;
        Ok((g.a_sym, g.zero_vertices, g.edges, supports))
    }

    fn __repr__(&self) -> String {
        format!("TransitionMatrix({:?})", self.0.rows())
    }
}

#[pyclass(name = "OperatorTuple", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTuple(OperatorTuple);

#[pymethods]
impl PyTuple {
    #[new]
    fn new(mats: Vec<Rows>) -> PyResult<Self> {
        let mats = mats.iter().map(from_rows).collect::<PyResult<Vec<_>>>()?;
        OperatorTuple::new(mats).map(PyTuple).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn matrices(&self) -> Vec<Rows> {
        self.0.mats().iter().map(to_rows).collect()
    }

    fn scaled(&self, r: f64) -> Self {
        PyTuple(self.0.scaled(r))
    }

    /// `(contractive, unital)`.
    #[pyo3(signature = (tol = DEFAULT_TOL))]
    fn row_contraction(&self, tol: f64) -> (bool, bool) {
        let r = tuples::is_row_contraction(&self.0, tol);
        (r.contractive, r.unital)
    }

    /// Largest `‖T_i T_j‖` over pairs with `a_ij = 0`.
    fn relation_violation(&self, a: &PyTransition) -> PyResult<f64> {
        tuples::satisfies_a_relations(&self.0, &a.0, f64::INFINITY).map(|r| r.max_violation).map_err(to_py)
    }

    /// `p_1, …, p_m` with `p_k = ‖Σ_{|α|=k} T^α (T^α)*‖`.
    fn purity_profile(&self, a: &PyTransition, m: usize) -> PyResult<Vec<f64>> {
        tuples::purity_profile(&self.0, &a.0, m).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("OperatorTuple(n={}, dim={})", self.0.n(), self.0.dim())
    }
}

#[pyclass(name = "Dilation", frozen)]
struct PyDilation(DilationResult);

#[pymethods]
impl PyDilation {
    #[getter]
    fn tuple(&self) -> PyTuple {
        PyTuple(self.0.tuple.clone())
    }

    #[getter]
    fn embedding(&self) -> Rows {
        to_rows(&self.0.embedding)
    }

    #[getter]
    fn method(&self) -> String {
        self.0.method.to_string()
    }

    #[getter]
    fn level(&self) -> usize {
        self.0.level
    }

    fn embedding_defect(&self) -> f64 {
        self.0.embedding_defect()
    }

    fn co_invariance_residual(&self, t: &PyTuple) -> f64 {
        self.0.co_invariance_residual(&t.0)
    }
}

/// The matrix units `E_12`, `E_21` with `A = [[0,1],[1,0]]`.
#[pyfunction]
fn flip_pair() -> (PyTuple, PyTransition) {
    let (t, a) = tuples::flip_pair();
    (PyTuple(t), PyTransition(a))
}

/// Builds a dilation by `method` (`kernel`, `poisson` or `schaffer`).
#[pyfunction]
#[pyo3(signature = (t, a, method = "kernel", level = 4, r = None, tol = DEFAULT_TOL))]
fn dilate(t: &PyTuple, a: &PyTransition, method: &str, level: usize, r: Option<f64>, tol: f64) -> PyResult<PyDilation> {
    let method: Method = method.parse().map_err(to_py)?;
    let res = match method {
        Method::Kernel => dilate_kernel(&t.0, &a.0, level, tol).map(|k| k.result),
        Method::Poisson => dilate_poisson(&t.0, &a.0, level, r, tol).and_then(|p| p.to_dilation_result()),
        Method::Schaffer => dilate_isometric_schaffer(&t.0, level, tol).map(|s| s.result),
    };
    res.map(PyDilation).map_err(to_py)
}

/// Dimension and frame of the maximal piece for `relations` in
/// `{"a", "c", "fermionic", "union"}`, or q-commuting when `q` is given.
#[pyfunction]
#[pyo3(signature = (t, a, relations = "a", q = None, tol = 1e-9))]
fn maximal_piece(t: &PyTuple, a: &PyTransition, relations: &str, q: Option<f64>, tol: f64) -> PyResult<(usize, Rows)> {
    let n = a.0.n();
    let kind = match (relations, q) {
        (_, Some(q)) => PolyPreset::QCommuting(vec![vec![q; n]; n]),
        ("a", None) => PolyPreset::ARelation,
        ("c", None) => PolyPreset::Commuting,
        ("fermionic", None) => PolyPreset::Fermionic,
        ("union", None) => PolyPreset::Union(vec![PolyPreset::ARelation, PolyPreset::Commuting]),
        (other, None) => return Err(PyValueError::new_err(format!("unknown relation family `{other}`"))),
    };
    let polys = preset_polysets(&a.0, &kind).map_err(to_py)?;
    let piece = piece_of(&t.0, &polys, tol).map_err(to_py)?;
    Ok((piece.dim(), to_rows(piece.frame())))
}

/// Runs the check suite and returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (t, a, seed = 0, checks = None))]
fn suite(t: &PyTuple, a: &PyTransition, seed: u64, checks: Option<Vec<String>>) -> PyResult<String> {
    let cfg = SuiteConfig { seed, checks, ..SuiteConfig::default() };
    run_suite(&t.0, &a.0, &cfg).map(|r| r.to_json()).map_err(to_py)
}

#[pymodule]
fn ckdilation(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTransition>()?;
    m.add_class::<PyTuple>()?;
    m.add_class::<PyDilation>()?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add_function(wrap_pyfunction!(flip_pair, m)?)?;
    m.add_function(wrap_pyfunction!(dilate, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_piece, m)?)?;
    m.add_function(wrap_pyfunction!(suite, m)?)?;
    Ok(())
}
