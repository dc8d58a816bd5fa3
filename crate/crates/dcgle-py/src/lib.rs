use pyo3::prelude::*;

#[pymodule]
fn dcgle(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
