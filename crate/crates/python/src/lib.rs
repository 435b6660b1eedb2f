//! Python bindings: designs, scoring, searches and fine-grid audits.

#[pyo3::pymodule]
pub mod pygdopt {
    use std::path::PathBuf;

    use gdopt::design_io::{read_design_csv, write_design_csv};
    use gdopt::runner::scale_eval_count as scale_counts;
    use gdopt::verify::{rescore_with, RescoreOptions, RescoreReport};
    use gdopt::{Bounds, DesignMatrix, DesignPoint, ModelSpec, ScenarioConfig, ScoringGrid};
    use pyo3::exceptions::{PyIOError, PyValueError};
    use pyo3::prelude::*;

    fn py_err(e: gdopt::Error) -> PyErr {
        match e {
            gdopt::Error::Io { .. } => PyIOError::new_err(e.to_string()),
            _ => PyValueError::new_err(e.to_string()),
        }
    }

    /// An N x K design matrix; each row is one run.
    #[pyclass(name = "Design", module = "pygdopt", frozen, eq, from_py_object)]
    #[derive(Clone, PartialEq)]
    pub struct PyDesign {
        pub inner: DesignMatrix,
    }

    #[pymethods]
    impl PyDesign {
        #[new]
        fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
            DesignMatrix::from_rows(&rows).map(|inner| Self { inner }).map_err(py_err)
        }

        #[staticmethod]
        fn read_csv(path: PathBuf) -> PyResult<Self> {
            read_design_csv(&path).map(|inner| Self { inner }).map_err(py_err)
        }

        fn write_csv(&self, path: PathBuf) -> PyResult<()> {
            write_design_csv(&path, &self.inner).map_err(py_err)
        }

        #[getter]
        fn n(&self) -> usize {
            self.inner.n()
        }

        #[getter]
        fn k(&self) -> usize {
            self.inner.k()
        }

        fn rows(&self) -> Vec<Vec<f64>> {
            self.inner.to_rows()
        }

        fn __len__(&self) -> usize {
            self.inner.n()
        }

        fn __repr__(&self) -> String {
            format!("Design(n={}, k={}, rows={:?})", self.inner.n(), self.inner.k(), self.inner.to_rows())
        }
    }

    /// Outcome of one seeded search.
    #[pyclass(name = "RunResult", module = "pygdopt", frozen, get_all, skip_from_py_object)]
    #[derive(Clone)]
    pub struct PyRunResult {
        pub best_design: PyDesign,
        pub best_g: f64,
        pub best_g_eff: f64,
        pub eval_count: u64,
        pub iterations: usize,
        pub seed: u64,
        pub stop_reason: String,
    }

    #[pymethods]
    impl PyRunResult {
        fn __repr__(&self) -> String {
            format!(
                "RunResult(seed={}, best_g={}, best_g_eff={:.4}, iterations={}, eval_count={}, stop_reason='{}')",
                self.seed, self.best_g, self.best_g_eff, self.iterations, self.eval_count, self.stop_reason
            )
        }
    }

    impl From<gdopt::RunResult> for PyRunResult {
        fn from(r: gdopt::RunResult) -> Self {
            Self {
                best_design: PyDesign { inner: r.best_design },
                best_g: r.best_g,
                best_g_eff: r.best_g_eff,
                eval_count: r.eval_count,
                iterations: r.iterations,
                seed: r.seed,
                stop_reason: r.stop_reason.to_string(),
            }
        }
    }

    /// Results of a batch in run-index order, with the index of the winner.
    #[pyclass(name = "Catalog", module = "pygdopt", frozen, get_all, skip_from_py_object)]
    pub struct PyCatalog {
        pub results: Vec<PyRunResult>,
        pub best_index: usize,
        pub total_evals: u64,
    }

    #[pymethods]
    impl PyCatalog {
        fn best(&self) -> PyRunResult {
            self.results[self.best_index].clone()
        }

        fn __len__(&self) -> usize {
            self.results.len()
        }
    }

    fn spec_for(design: &PyDesign) -> PyResult<ModelSpec> {
        ModelSpec::quadratic(design.inner.k()).map_err(py_err)
    }

    fn grid_for(spec: &ModelSpec, levels: usize) -> PyResult<ScoringGrid> {
        ScoringGrid::equispaced(spec, levels, &Bounds::unit(spec.k())).map_err(py_err)
    }

    fn scenario(
        k: usize,
        n: usize,
        particles: usize,
        grid: usize,
        max_iterations: Option<usize>,
        stagnation_limit: Option<usize>,
    ) -> PyResult<ScenarioConfig> {
        let mut s = ScenarioConfig::new(k, n).map_err(py_err)?;
        s.grid_levels = grid;
        s.pso.swarm_size = particles;
        if let Some(m) = max_iterations {
            s.pso.max_iterations = m;
        }
        if let Some(l) = stagnation_limit {
            s.pso.stagnation_limit = l;
        }
        s.validate().map_err(py_err)?;
        Ok(s)
    }

    /// Number of terms in the full quadratic model in `k` factors.
    #[pyfunction]
    fn p_count(k: usize) -> PyResult<usize> {
        gdopt::p_count(k).map_err(py_err)
    }

    /// Model vector of point `x`: intercept, linear, interaction and square terms.
    #[pyfunction]
    fn model_expand(x: Vec<f64>) -> PyResult<Vec<f64>> {
        let spec = ModelSpec::quadratic(x.len()).map_err(py_err)?;
        let point = DesignPoint::new(x).map_err(py_err)?;
        spec.expand(&point).map_err(py_err)
    }

    /// Term labels in model-vector order.
    #[pyfunction]
    fn model_terms(k: usize) -> PyResult<Vec<String>> {
        let spec = ModelSpec::quadratic(k).map_err(py_err)?;
        Ok(spec.terms().iter().map(|t| t.to_string()).collect())
    }

    /// Scaled prediction variance of `design` at `x`.
    #[pyfunction]
    fn spv(x: Vec<f64>, design: &PyDesign) -> PyResult<f64> {
        let spec = spec_for(design)?;
        let point = DesignPoint::new(x).map_err(py_err)?;
        gdopt::spv(&point, &design.inner, &spec).map_err(py_err)
    }

    /// `(G, argmax)` over a `grid`-level grid on `[-1, 1]^K`; `G` is `inf`
    /// and `argmax` is `None` for a singular design.
    #[pyfunction]
    #[pyo3(signature = (design, grid = 5))]
    fn g_score(design: &PyDesign, grid: usize) -> PyResult<(f64, Option<Vec<f64>>)> {
        let spec = spec_for(design)?;
        let g = grid_for(&spec, grid)?.score(&design.inner).map_err(py_err)?;
        Ok((g.value, g.argmax.map(|p| p.coords().to_vec())))
    }

    #[pyfunction]
    fn g_efficiency(g: f64, p: usize) -> PyResult<f64> {
        gdopt::g_efficiency(g, p).map_err(py_err)
    }

    #[pyfunction]
    fn relative_efficiency(eff_a: f64, eff_b: f64) -> PyResult<f64> {
        gdopt::relative_efficiency(eff_a, eff_b).map_err(py_err)
    }

    /// One seeded search for an N-run design in K factors.
    #[pyfunction]
    #[pyo3(signature = (k, n, seed = 0, particles = 150, grid = 5, max_iterations = None, stagnation_limit = None))]
    #[allow(clippy::too_many_arguments)]
    fn run_search(
        py: Python<'_>,
        k: usize,
        n: usize,
        seed: u64,
        particles: usize,
        grid: usize,
        max_iterations: Option<usize>,
        stagnation_limit: Option<usize>,
    ) -> PyResult<PyRunResult> {
        let s = scenario(k, n, particles, grid, max_iterations, stagnation_limit)?;
        let r = py.detach(|| gdopt::run(&s, &s.pso, seed)).map_err(py_err)?;
        Ok(r.into())
    }

    /// `runs` searches with seeds `base_seed + i`; results do not depend on `threads`.
    #[pyfunction]
    #[pyo3(signature = (k, n, runs, base_seed = 0, threads = None, particles = 150, grid = 5, max_iterations = None, stagnation_limit = None))]
    #[allow(clippy::too_many_arguments)]
    fn run_batch(
        py: Python<'_>,
        k: usize,
        n: usize,
        runs: usize,
        base_seed: u64,
        threads: Option<usize>,
        particles: usize,
        grid: usize,
        max_iterations: Option<usize>,
        stagnation_limit: Option<usize>,
    ) -> PyResult<PyCatalog> {
        let mut s = scenario(k, n, particles, grid, max_iterations, stagnation_limit)?;
        s.n_searches = runs;
        s.base_seed = base_seed;
        if let Some(t) = threads {
            s.parallelism = t;
        }
        let cat = py.detach(|| gdopt::run_batch(&s)).map_err(py_err)?;
        Ok(PyCatalog {
            total_evals: cat.total_evals(),
            best_index: cat.best_index,
            results: cat.results.into_iter().map(Into::into).collect(),
        })
    }

    /// `(estimate, (low, high))`: evaluation total scaled from `n_observed`
    /// to `n_target` searches with a 95% interval.
    #[pyfunction]
    fn scale_eval_count(total: u64, n_observed: usize, n_target: usize) -> PyResult<(f64, (f64, f64))> {
        let s = scale_counts(total, n_observed, n_target).map_err(py_err)?;
        Ok((s.estimate, s.ci95))
    }

    /// Fine-grid rescoring report as a dict.
    #[pyfunction]
    #[pyo3(signature = (design, fine_levels = 21))]
    fn rescore_fine<'py>(py: Python<'py>, design: &PyDesign, fine_levels: usize) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let spec = spec_for(design)?;
        let opts = RescoreOptions::new(spec.k(), fine_levels);
        let r = py.detach(|| rescore_with(&design.inner, &spec, &opts)).map_err(py_err)?;
        report_dict(py, &r)
    }

    fn report_dict<'py>(py: Python<'py>, r: &RescoreReport) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let d = pyo3::types::PyDict::new(py);
        d.set_item("coarse_g", r.coarse_g)?;
        d.set_item("fine_g", r.fine_g)?;
        d.set_item("fine_levels", r.fine_levels)?;
        d.set_item("argmax_fine", r.argmax_fine.as_ref().map(|p| p.coords().to_vec()))?;
        d.set_item("discrepancy_pct", r.discrepancy_pct)?;
        d.set_item("coarse_g_eff", r.coarse_g_eff)?;
        d.set_item("fine_g_eff", r.fine_g_eff)?;
        d.set_item("singular", r.singular)?;
        d.set_item("suspect", r.suspect)?;
        Ok(d)
    }
}
