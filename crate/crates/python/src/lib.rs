//! Python bindings: dimension estimates, PH⁰ primitives, the statistics
//! battery and TRJ1 I/O, over plain lists of floats.

use phdim_core::metricspace::MAX_PRECOMPUTED;
use phdim_core::stats::{self, CorrelationKind, RecordTable};
use phdim_core::{
    e_alpha as core_e_alpha, estimate_ph_dim, mst, trj1, DistanceMatrix, DistanceOracle, EstimatorConfig, LossMatrix,
    MetricKind, PointMetric, WeightTrajectory,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(phdim, FormatError, PyValueError, "Malformed TRJ1 payload, manifest or record table.");
create_exception!(phdim, DegenerateError, PyValueError, "Input admits no meaningful result.");

fn to_py(err: phdim_core::Error) -> PyErr {
    use phdim_core::Error as E;
    let msg = err.to_string();
    match err {
        E::Format(_) | E::Schema(_) | E::Csv(_) | E::Json(_) => FormatError::new_err(msg),
        E::Degenerate(_) => DegenerateError::new_err(msg),
        E::Io { .. } => PyOSError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for phdim_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Result of a PH⁰ dimension estimate.
#[pyclass(name = "DimEstimate", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyDimEstimate {
    inner: phdim_core::DimEstimate,
}

#[pymethods]
impl PyDimEstimate {
    #[getter]
    fn dimension(&self) -> Option<f64> {
        self.inner.dimension
    }

    #[getter]
    fn slope(&self) -> Option<f64> {
        self.inner.slope
    }

    #[getter]
    fn intercept(&self) -> Option<f64> {
        self.inner.intercept
    }

    #[getter]
    fn r_squared(&self) -> Option<f64> {
        self.inner.r_squared
    }

    #[getter]
    fn sample_sizes(&self) -> Vec<usize> {
        self.inner.sample_sizes.clone()
    }

    #[getter]
    fn e_values(&self) -> Vec<f64> {
        self.inner.e_values.clone()
    }

    /// `None`, or a short reason the fit is unusable.
    #[getter]
    fn degenerate(&self) -> Option<&'static str> {
        self.inner.degenerate.map(|d| d.describe())
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.config.alpha
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.config.seed
    }

    #[getter]
    fn metric(&self) -> String {
        self.inner.config.metric.to_string()
    }

    fn __repr__(&self) -> String {
        match (self.inner.dimension, self.inner.degenerate) {
            (Some(d), None) => format!("DimEstimate(dimension={d:.6}, metric={})", self.inner.config.metric),
            _ => format!("DimEstimate(degenerate={:?})", self.degenerate().unwrap_or("unknown")),
        }
    }
}

fn estimator(
    k: usize,
    metric: MetricKind,
    seed: u64,
    alpha: f64,
    sample_sizes: Option<Vec<usize>>,
    restarts: usize,
) -> EstimatorConfig {
    EstimatorConfig {
        alpha,
        sample_sizes: sample_sizes.unwrap_or_else(|| EstimatorConfig::default_sizes_for(k)),
        restarts_per_size: restarts,
        seed,
        metric,
    }
}

fn run_estimate(py: Python<'_>, oracle: DistanceOracle<'_>, cfg: EstimatorConfig) -> PyResult<PyDimEstimate> {
    let inner = py
        .detach(|| {
            let oracle = if oracle.len() <= MAX_PRECOMPUTED {
                oracle.precompute()?
            } else {
                oracle
            };
            estimate_ph_dim(&oracle, &cfg)
        })
        .py_err()?;
    Ok(PyDimEstimate { inner })
}

/// PH⁰ dimension of a point cloud (one row per point) under the Euclidean metric.
#[pyfunction]
#[pyo3(signature = (points, seed, alpha = 1.0, sample_sizes = None, restarts = 5))]
fn estimate_dimension(
    py: Python<'_>,
    points: Vec<Vec<f64>>,
    seed: u64,
    alpha: f64,
    sample_sizes: Option<Vec<usize>>,
    restarts: usize,
) -> PyResult<PyDimEstimate> {
    let traj = WeightTrajectory::from_rows(&points).py_err()?;
    let cfg = estimator(traj.iterates(), MetricKind::Euclidean, seed, alpha, sample_sizes, restarts);
    run_estimate(py, DistanceOracle::euclidean(&traj), cfg)
}

/// PH⁰ dimension under the loss pseudometric; one row of per-sample losses per iterate.
#[pyfunction]
#[pyo3(signature = (losses, seed, alpha = 1.0, sample_sizes = None, restarts = 5))]
fn estimate_loss_dimension(
    py: Python<'_>,
    losses: Vec<Vec<f64>>,
    seed: u64,
    alpha: f64,
    sample_sizes: Option<Vec<usize>>,
    restarts: usize,
) -> PyResult<PyDimEstimate> {
    let lm = LossMatrix::from_rows(&losses).py_err()?;
    let cfg = estimator(lm.iterates(), MetricKind::LossBased, seed, alpha, sample_sizes, restarts);
    run_estimate(py, DistanceOracle::loss_based(&lm), cfg)
}

/// Estimate from TRJ1 files; `metric` is "euclidean" or "loss".
#[pyfunction]
#[pyo3(signature = (trajectory, seed, metric = "euclidean", losses = None, alpha = 1.0, sample_sizes = None, restarts = 5))]
#[allow(clippy::too_many_arguments)]
fn estimate_file(
    py: Python<'_>,
    trajectory: &str,
    seed: u64,
    metric: &str,
    losses: Option<&str>,
    alpha: f64,
    sample_sizes: Option<Vec<usize>>,
    restarts: usize,
) -> PyResult<PyDimEstimate> {
    let kind = match metric {
        "euclidean" => MetricKind::Euclidean,
        "loss" | "loss_based" => MetricKind::LossBased,
        other => return Err(PyValueError::new_err(format!("unknown metric {other:?}"))),
    };
    let traj = trj1::read_trajectory(trajectory).py_err()?;
    let lm = losses.map(trj1::read_loss_matrix).transpose().py_err()?;
    let oracle = DistanceOracle::for_kind(kind, &traj, lm.as_ref()).py_err()?;
    let cfg = estimator(traj.iterates(), kind, seed, alpha, sample_sizes, restarts);
    run_estimate(py, oracle, cfg)
}

fn full_mst(points: &[Vec<f64>]) -> PyResult<phdim_core::MstResult> {
    let dm = DistanceMatrix::euclidean(points);
    mst(&dm, &(0..points.len()).collect::<Vec<_>>()).py_err()
}

/// Euclidean MST edge lengths in Prim insertion order.
#[pyfunction]
fn mst_edge_lengths(points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    Ok(full_mst(&points)?.edge_lengths)
}

/// Finite PH⁰ bar lengths of the Euclidean Rips filtration, ascending.
#[pyfunction]
fn ph0_barcode(points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    Ok(full_mst(&points)?.barcode().bar_lengths().to_vec())
}

/// `Σ length^alpha` over bar lengths.
#[pyfunction]
#[pyo3(signature = (bars, alpha = 1.0))]
fn e_alpha(bars: Vec<f64>, alpha: f64) -> PyResult<f64> {
    let n = bars.len() + 1;
    let barcode = phdim_core::Barcode0::new(bars, n).py_err()?;
    core_e_alpha(&barcode, alpha).py_err()
}

#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::spearman(&x, &y).py_err()
}

#[pyfunction]
fn kendall_tau_b(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::kendall_tau_b(&x, &y).py_err()
}

/// `(z, p_value)` comparing two Spearman coefficients.
#[pyfunction]
fn fisher_z(r1: f64, n1: usize, r2: f64, n2: usize) -> PyResult<(f64, f64)> {
    let f = stats::fisher_z_compare(r1, n1, r2, n2).py_err()?;
    Ok((f.z, f.p_value))
}

/// `(coefficient, p_value)` of the rank partial correlation of x and y given
/// the columns of z.
#[pyfunction]
#[pyo3(signature = (x, y, z, seed, kind = "spearman", permutations = 999))]
fn partial_corr(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<Vec<f64>>,
    seed: u64,
    kind: &str,
    permutations: usize,
) -> PyResult<(f64, f64)> {
    let kind = match kind {
        "spearman" => CorrelationKind::Spearman,
        "kendall" => CorrelationKind::Kendall,
        other => return Err(PyValueError::new_err(format!("unknown kind {other:?}"))),
    };
    let p = py.detach(|| stats::partial_corr(&x, &y, &z, kind, permutations, seed)).py_err()?;
    Ok((p.coefficient, p.p_value))
}

/// `(cmi, p_value)` of the local-permutation test of x ⟂ y | z.
#[pyfunction]
#[pyo3(signature = (x, y, z, seed, bins = 5, permutations = 999))]
fn cmi_test(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    seed: u64,
    bins: usize,
    permutations: usize,
) -> PyResult<(f64, f64)> {
    let t = py.detach(|| stats::cmi_local_perm_test(&x, &y, &z, bins, permutations, seed)).py_err()?;
    Ok((t.cmi, t.p_value))
}

/// Ψ over a run-record CSV.
#[pyfunction]
#[pyo3(signature = (records, measure, target, axes = vec!["learning_rate".to_owned(), "batch_size".to_owned()]))]
fn granulated_kendall(records: &str, measure: &str, target: &str, axes: Vec<String>) -> PyResult<f64> {
    let table = RecordTable::read(records).py_err()?;
    let axes: Vec<&str> = axes.iter().map(String::as_str).collect();
    Ok(stats::granulated_kendall(&table.records, measure, target, &axes).py_err()?.psi)
}

#[pyfunction]
fn read_trajectory(path: &str) -> PyResult<Vec<Vec<f64>>> {
    let t = trj1::read_trajectory(path).py_err()?;
    Ok(t.rows().map(<[f64]>::to_vec).collect())
}

#[pyfunction]
fn write_trajectory(path: &str, rows: Vec<Vec<f64>>) -> PyResult<()> {
    let t = WeightTrajectory::from_rows(&rows).py_err()?;
    trj1::write_trajectory(path, &t).py_err()
}

#[pyfunction]
fn read_loss_matrix(path: &str) -> PyResult<Vec<Vec<f64>>> {
    let m = trj1::read_loss_matrix(path).py_err()?;
    Ok((0..m.iterates()).map(|t| m.row(t).to_vec()).collect())
}

#[pyfunction]
fn write_loss_matrix(path: &str, rows: Vec<Vec<f64>>) -> PyResult<()> {
    let m = LossMatrix::from_rows(&rows).py_err()?;
    trj1::write_loss_matrix(path, &m).py_err()
}

#[pymodule]
fn phdim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("FormatError", m.py().get_type::<FormatError>())?;
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    m.add_class::<PyDimEstimate>()?;
    m.add_function(wrap_pyfunction!(estimate_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_loss_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_file, m)?)?;
    m.add_function(wrap_pyfunction!(mst_edge_lengths, m)?)?;
    m.add_function(wrap_pyfunction!(ph0_barcode, m)?)?;
    m.add_function(wrap_pyfunction!(e_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(kendall_tau_b, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_z, m)?)?;
    m.add_function(wrap_pyfunction!(partial_corr, m)?)?;
    m.add_function(wrap_pyfunction!(cmi_test, m)?)?;
    m.add_function(wrap_pyfunction!(granulated_kendall, m)?)?;
    m.add_function(wrap_pyfunction!(read_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(write_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(read_loss_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(write_loss_matrix, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyDict;

    fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "phdim").unwrap();
            phdim(&m).unwrap();
            let globals = PyDict::new(py);
            globals.set_item("phdim", m).unwrap();
            f(py, &globals);
        });
    }

    fn eval<'py>(py: Python<'py>, g: &Bound<'py, PyDict>, code: &str) -> PyResult<Bound<'py, PyAny>> {
        let code = std::ffi::CString::new(code).unwrap();
        py.eval(&code, Some(g), None)
    }

    #[test]
    fn barcode_and_e_alpha() {
        with_module(|py, g| {
            let bars: Vec<f64> = eval(py, g, "phdim.ph0_barcode([[0.0], [1.0], [3.0]])").unwrap().extract().unwrap();
            assert_eq!(bars, vec![1.0, 2.0]);
            let e: f64 = eval(py, g, "phdim.e_alpha([1.0, 2.0], 2.0)").unwrap().extract().unwrap();
            assert_eq!(e, 5.0);
        });
    }

    #[test]
    fn estimate_on_a_line() {
        with_module(|py, g| {
            let code = "phdim.estimate_dimension([[i / 400.0, 0.0] for i in range(400)], 1, sample_sizes=[100, 200, 400])";
            let est = eval(py, g, code).unwrap();
            let est: PyDimEstimate = est.extract().unwrap();
            assert!(est.inner.degenerate.is_none());
            let d = est.inner.dimension.unwrap();
            assert!((d - 1.0).abs() < 0.05, "{d}");
        });
    }

    #[test]
    fn degenerate_estimate_is_reported() {
        with_module(|py, g| {
            let code = "phdim.estimate_dimension([[0.0]] * 50, 0, sample_sizes=[10, 20, 50])";
            let est: PyDimEstimate = eval(py, g, code).unwrap().extract().unwrap();
            assert_eq!(est.degenerate(), Some("zero E_alpha at some sample size"));
            assert!(est.__repr__().starts_with("DimEstimate(degenerate="));
        });
    }

    #[test]
    fn errors_map_to_exception_types() {
        with_module(|py, g| {
            let err = eval(py, g, "phdim.spearman([1.0, 2.0], [1.0])").unwrap_err();
            assert!(err.is_instance_of::<PyValueError>(py));
            let err = eval(py, g, "phdim.read_trajectory('/nonexistent/x.trj1')").unwrap_err();
            assert!(err.is_instance_of::<PyOSError>(py));
        });
    }

    #[test]
    fn trj1_round_trip() {
        let dir = std::env::temp_dir().join(format!("phdim-py-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.trj1");
        let bad = dir.join("bad.trj1");
        std::fs::write(&bad, b"nope").unwrap();
        with_module(|py, g| {
            g.set_item("path", path.to_str().unwrap()).unwrap();
            g.set_item("bad", bad.to_str().unwrap()).unwrap();
            eval(py, g, "phdim.write_trajectory(path, [[1.0, 2.0], [3.0, 4.5]])").unwrap();
            let rows: Vec<Vec<f64>> = eval(py, g, "phdim.read_trajectory(path)").unwrap().extract().unwrap();
            assert_eq!(rows, vec![vec![1.0, 2.0], vec![3.0, 4.5]]);
            let err = eval(py, g, "phdim.read_loss_matrix(path)").unwrap_err();
            assert!(err.is_instance_of::<FormatError>(py));
            let err = eval(py, g, "phdim.read_trajectory(bad)").unwrap_err();
            assert!(err.is_instance_of::<FormatError>(py));
        });
        std::fs::remove_dir_all(dir).unwrap();
    }
}
