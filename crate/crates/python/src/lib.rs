//! Python bindings: mesh loading, compression, decompression and analysis.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use qebc::baseline::{compare_methods, default_seeds};
use qebc::container::{self, CompressOptions, Mode};
use qebc::entropy::static_entropy;
use qebc::fixed::EncodingId;
use qebc::mesh::io::{load_polygon_mesh, write_mesh, Format};
use qebc::preprocess::{patch_holes, split_large_polygons};
use qebc::traversal::{encode_clers as encode, Gate};
use qebc::PolyMesh;

fn err(e: qebc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn format(name: &str) -> PyResult<Format> {
    name.parse().map_err(PyValueError::new_err)
}

/// A manifold polygon mesh with optional per-vertex coordinate text.
#[pyclass(name = "Mesh", module = "pyqebc")]
struct Mesh {
    inner: PolyMesh,
}

#[pymethods]
impl Mesh {
    #[new]
    #[pyo3(signature = (vertex_count, faces, coords=None))]
    fn new(vertex_count: usize, faces: Vec<Vec<usize>>, coords: Option<Vec<String>>) -> PyResult<Self> {
        let mut inner = PolyMesh::new(vertex_count, &faces).map_err(err)?;
        if let Some(c) = coords {
            inner = inner.with_coords(c).map_err(err)?;
        }
        Ok(Mesh { inner })
    }

    /// Parses OBJ or OFF text.
    #[staticmethod]
    #[pyo3(signature = (text, fmt="obj"))]
    fn parse(text: &str, fmt: &str) -> PyResult<Self> {
        let inner = load_polygon_mesh(text.as_bytes(), format(fmt)?).map_err(err)?;
        Ok(Mesh { inner })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let fmt = Format::from_path(&path).ok_or_else(|| PyValueError::new_err("expected a .obj or .off path"))?;
        let bytes = std::fs::read(&path)?;
        let inner = load_polygon_mesh(&bytes, fmt).map_err(err)?;
        Ok(Mesh { inner })
    }

    #[pyo3(signature = (fmt="obj"))]
    fn to_text(&self, fmt: &str) -> PyResult<String> {
        Ok(write_mesh(&self.inner, format(fmt)?))
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn face_count(&self) -> usize {
        self.inner.face_count()
    }

    fn faces(&self) -> Vec<Vec<usize>> {
        self.inner.faces().map(<[usize]>::to_vec).collect()
    }

    fn coords(&self) -> Option<Vec<String>> {
        self.inner.coords().map(<[String]>::to_vec)
    }

    fn is_closed(&self) -> bool {
        self.inner.is_closed()
    }

    /// Canonical face list; equal lists mean identical connectivity.
    fn canonical_faces(&self) -> Vec<Vec<usize>> {
        self.inner.canonical_faces()
    }

    fn topo_counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = self.inner.topo_counts();
        let d = PyDict::new(py);
        d.set_item("v", t.v)?;
        d.set_item("e", t.e)?;
        d.set_item("f", t.f)?;
        d.set_item("q", t.q)?;
        d.set_item("t", t.t)?;
        d.set_item("holes", t.holes)?;
        d.set_item("euler_characteristic", t.euler_characteristic)?;
        d.set_item("genus", t.genus)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Mesh(V={}, F={})", self.inner.vertex_count(), self.inner.face_count())
    }
}

fn options(mode: &str, encoding: Option<&str>, memory: usize, geometry: bool, keep_order: bool) -> PyResult<CompressOptions> {
    Ok(CompressOptions {
        mode: mode.parse::<Mode>().map_err(err)?,
        encoding: match encoding {
            None | Some("auto") => None,
            Some(s) => Some(s.parse::<EncodingId>().map_err(|_| PyValueError::new_err(format!("unknown encoding {s:?}")))?),
        },
        memory,
        geometry,
        keep_order,
        ..CompressOptions::default()
    })
}

/// Compresses a mesh into container bytes.
#[pyfunction]
#[pyo3(signature = (mesh, mode="fixed", encoding=None, memory=3, geometry=false, keep_order=false))]
fn compress<'py>(
    py: Python<'py>,
    mesh: &Mesh,
    mode: &str,
    encoding: Option<&str>,
    memory: usize,
    geometry: bool,
    keep_order: bool,
) -> PyResult<Bound<'py, PyBytes>> {
    let opts = options(mode, encoding, memory, geometry, keep_order)?;
    let c = container::compress(&mesh.inner, &opts).map_err(err)?;
    Ok(PyBytes::new(py, &c.bytes))
}

#[pyfunction]
fn decompress(data: &[u8]) -> PyResult<Mesh> {
    let m = container::decompress(data).map_err(err)?;
    Ok(Mesh { inner: m.into_poly() })
}

/// Round trip with connectivity check; returns faces, bits and bits per vertex.
#[pyfunction]
#[pyo3(signature = (mesh, mode="fixed", memory=3))]
fn verify<'py>(py: Python<'py>, mesh: &Mesh, mode: &str, memory: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = container::verify(&mesh.inner, &options(mode, None, memory, false, false)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("faces", r.faces)?;
    d.set_item("bits", r.bits)?;
    d.set_item("payload_bits", r.payload_bits)?;
    d.set_item("bits_per_vertex", r.bits_per_vertex())?;
    Ok(d)
}

/// Face codes of the traversal from the default gate, after hole patching.
#[pyfunction]
fn encode_clers(mesh: &Mesh) -> PyResult<Vec<String>> {
    let qt = split_large_polygons(&mesh.inner).map_err(err)?;
    let (patched, _) = patch_holes(&qt).map_err(err)?;
    let t = encode(&patched, Gate::Default).map_err(err)?;
    Ok(t.sequence.codes.iter().map(ToString::to_string).collect())
}

/// Static conditional entropy of the face codes, in bits per vertex.
#[pyfunction]
#[pyo3(signature = (mesh, memory=3))]
fn entropy_bpv(mesh: &Mesh, memory: usize) -> PyResult<f64> {
    let qt = split_large_polygons(&mesh.inner).map_err(err)?;
    let (patched, _) = patch_holes(&qt).map_err(err)?;
    let seq = encode(&patched, Gate::Default).map_err(err)?.sequence;
    Ok(static_entropy(&seq, memory, mesh.inner.vertex_count()).pair_bpv)
}

/// Quad method against the random-split baseline, one report row.
#[pyfunction]
#[pyo3(signature = (mesh, name="mesh", seeds=8))]
fn analyze<'py>(py: Python<'py>, mesh: &Mesh, name: &str, seeds: usize) -> PyResult<Bound<'py, PyDict>> {
    let qt = split_large_polygons(&mesh.inner).map_err(err)?;
    let r = compare_methods(name, &qt, &default_seeds(seeds.max(1))).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mesh", &r.mesh)?;
    d.set_item("v", r.v)?;
    d.set_item("q", r.q)?;
    d.set_item("t", r.t)?;
    d.set_item("holes", r.holes)?;
    d.set_item("fixed_bpv", r.fixed_bpv)?;
    d.set_item("entropy_n1_bpv", r.entropy_bpv[0])?;
    d.set_item("entropy_n3_bpv", r.entropy_bpv[1])?;
    d.set_item("random_split_n1_bpv", r.split_bpv[0].mean)?;
    d.set_item("random_split_n3_bpv", r.split_bpv[1].mean)?;
    Ok(d)
}

/// Generated test shapes by name: cube, tetrahedron, icosahedron, or grid.
#[pyfunction]
#[pyo3(signature = (name, rows=4, cols=4))]
fn shape(name: &str, rows: usize, cols: usize) -> PyResult<Mesh> {
    use qebc::mesh::generate;
    let m = match name {
        "cube" => generate::cube(),
        "tetrahedron" => generate::tetrahedron(),
        "icosahedron" => generate::icosahedron(),
        "grid" => generate::grid(rows, cols),
        _ => return Err(PyValueError::new_err(format!("unknown shape {name:?}"))),
    };
    Ok(Mesh { inner: m.into_poly() })
}

#[pymodule]
fn pyqebc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mesh>()?;
    m.add_function(wrap_pyfunction!(compress, m)?)?;
    m.add_function(wrap_pyfunction!(decompress, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(encode_clers, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_bpv, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(shape, m)?)?;
    Ok(())
}
