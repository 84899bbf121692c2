//! Python bindings: `import bdmf_py`.

// The pyfunction macro expansion converts `PyErr` into itself.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use bdmf::complex::{
    build_complex, build_lifted_complex, skeleton_graph, verify_d_squared, verify_resolution, CellComplex,
};
use bdmf::decomposition::{b_ell, b_generic, verify_exchange, verify_set_containment, DecompositionFunction};
use bdmf::io::{complex_from_json, complex_to_dot, complex_to_json};
use bdmf::oracle::{hilbert_series, hilbert_series_from_betti, total_betti, INCLUSION_EXCLUSION_LIMIT};
use bdmf::{
    betti_from_sets, generators, power_generators, verify_linear_quotients, LqCertificate, Monomial, Partition,
    Variable,
};

fn err(e: bdmf::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn partition(s: &str) -> PyResult<Partition> {
    s.parse().map_err(err)
}

fn decomposition(s: &str) -> PyResult<DecompositionFunction> {
    s.parse().map_err(err)
}

/// Parses JSON text into Python objects.
fn to_py(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<PyObject> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

/// A monomial over the variables `x1..xn, y1..yn, z1..zn`.
#[pyclass(name = "Monomial", frozen, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyMonomial(Monomial);

#[pymethods]
impl PyMonomial {
    #[new]
    fn new(text: &str, n: usize) -> PyResult<Self> {
        Monomial::parse(text, n).map(PyMonomial).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    fn exponents(&self) -> Vec<u8> {
        self.0.exponents().to_vec()
    }

    fn divides(&self, other: &PyMonomial) -> bool {
        self.0.divides(&other.0)
    }

    fn __mul__(&self, other: &PyMonomial) -> PyResult<PyMonomial> {
        if self.0.n() != other.0.n() {
            return Err(PyValueError::new_err("monomials live in different rings"));
        }
        Ok(PyMonomial(self.0.mul(&other.0)))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Monomial('{}', {})", self.0, self.0.n())
    }
}

/// Generators in linear-quotient order with their variable sets.
#[pyclass(name = "Certificate", frozen)]
struct PyCertificate(LqCertificate);

#[pymethods]
impl PyCertificate {
    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn monomials(&self) -> Vec<String> {
        (0..self.0.len()).map(|j| self.0.monomial(j).to_string()).collect()
    }

    fn sets(&self) -> Vec<Vec<String>> {
        (0..self.0.len()).map(|j| self.0.set(j).iter().map(Variable::to_string).collect()).collect()
    }

    fn betti(&self) -> Vec<u64> {
        betti_from_sets(&self.0).0
    }

    #[pyo3(signature = (decomposition = "bl"))]
    fn exchange(&self, py: Python<'_>, decomposition: &str) -> PyResult<PyObject> {
        to_py(py, &verify_exchange(&self.0, self::decomposition(decomposition)?))
    }

    #[pyo3(signature = (decomposition = "bl"))]
    fn containment(&self, py: Python<'_>, decomposition: &str) -> PyResult<PyObject> {
        to_py(py, &verify_set_containment(&self.0, self::decomposition(decomposition)?))
    }

    /// `b(v m)` as a monomial string.
    #[pyo3(signature = (variable, monomial, decomposition = "bl"))]
    fn decompose(&self, variable: &str, monomial: &str, decomposition: &str) -> PyResult<String> {
        let n = self.0.n();
        let v = Variable::parse(variable, n).map_err(err)?;
        let m = Monomial::parse(monomial, n).map_err(err)?;
        let r = match self::decomposition(decomposition)? {
            DecompositionFunction::Generic => b_generic(&self.0, v, &m),
            DecompositionFunction::BEll => b_ell(&self.0, v, &m),
        };
        r.map(|m| m.to_string()).map_err(err)
    }

    #[pyo3(signature = (decomposition = "bl", lifted = false))]
    fn complex(&self, decomposition: &str, lifted: bool) -> PyResult<PyComplex> {
        let c = if lifted {
            build_lifted_complex(&self.0)
        } else {
            build_complex(&self.0, self::decomposition(decomposition)?)
        };
        c.map(PyComplex).map_err(err)
    }
}

#[pyclass(name = "CellComplex", frozen)]
struct PyComplex(CellComplex);

#[pymethods]
impl PyComplex {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        complex_from_json(text).map(PyComplex).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn f_vector(&self) -> Vec<u64> {
        self.0.f_vector().0
    }

    fn d_squared(&self) -> bool {
        verify_d_squared(&self.0).passed()
    }

    fn verify(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &verify_resolution(&self.0).map_err(err)?)
    }

    fn skeleton(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &skeleton_graph(&self.0))
    }

    fn to_json(&self) -> PyResult<String> {
        complex_to_json(&self.0).map_err(err)
    }

    fn to_dot(&self) -> String {
        complex_to_dot(&self.0)
    }
}

/// Generators of `M_a` as monomial strings.
#[pyfunction]
fn gens(partition: &str) -> PyResult<Vec<String>> {
    let a = self::partition(partition)?;
    Ok(generators(&a).map_err(err)?.iter().map(|c| c.monomial(a.n()).to_string()).collect())
}

/// Minimal generators of `(M_a)^power`, ascending.
#[pyfunction]
#[pyo3(signature = (partition, power = 1))]
fn power(partition: &str, power: usize) -> PyResult<Vec<String>> {
    let g = power_generators(&self::partition(partition)?, power).map_err(err)?;
    Ok(g.monomials.iter().map(Monomial::to_string).collect())
}

/// The linear-quotient certificate, or `None` when the order fails.
#[pyfunction]
#[pyo3(signature = (partition, power = 1))]
fn linear_quotients(partition: &str, power: usize) -> PyResult<Option<PyCertificate>> {
    Ok(verify_linear_quotients(&self::partition(partition)?, power).map_err(err)?.ok().map(PyCertificate))
}

/// Betti numbers from the Koszul oracle.
#[pyfunction]
#[pyo3(signature = (partition, power = 1))]
fn oracle_betti(partition: &str, power: usize) -> PyResult<Vec<u64>> {
    let g = power_generators(&self::partition(partition)?, power).map_err(err)?;
    Ok(total_betti(&g.monomials).map_err(err)?.0)
}

/// `(numerator, exponent)` of the reduced Hilbert series of the quotient.
#[pyfunction]
#[pyo3(signature = (partition, power = 1))]
fn hilbert(partition: &str, power: usize) -> PyResult<(Vec<i64>, usize)> {
    let a = self::partition(partition)?;
    let g = power_generators(&a, power).map_err(err)?.monomials;
    let h = if g.len() <= INCLUSION_EXCLUSION_LIMIT {
        hilbert_series(&g, a.n())
    } else {
        hilbert_series_from_betti(&g, a.n())
    };
    let h = h.map_err(err)?;
    Ok((h.numerator, h.exponent))
}

#[pymodule]
fn bdmf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMonomial>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyComplex>()?;
    m.add_function(wrap_pyfunction!(gens, m)?)?;
    m.add_function(wrap_pyfunction!(power, m)?)?;
    m.add_function(wrap_pyfunction!(linear_quotients, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_betti, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert, m)?)?;
    Ok(())
}
