//! File formats: graph text files and `.dk` kernel files.
//!
//! A kernel file is a JSON header carrying the ground-set description
//! (base graph, labels), the class, and the validation tolerances. Small
//! matrices (up to 64 elements per side) are stored inline as CSV text;
//! larger ones go to a row-major little-endian `f64` sidecar named in the
//! header and resolved relative to the `.dk` file. Both routes round-trip
//! bit-exactly: the text forms print the shortest decimal that re-parses to
//! the same bits, the sidecar stores the bits themselves.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::{
    GroundSet, Kernel, KernelClass, EIGENVALUE_TOL, IDEMPOTENCE_TOL, SYMMETRY_TOL,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

/// Matrices up to this many elements per side are inlined as CSV.
pub const INLINE_MATRIX_LIMIT: usize = 64;

const FORMAT_TAG: &str = "dk1";

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    vertex_count: usize,
    degree_bound: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl GraphRepr {
    fn from_graph(g: &Graph) -> GraphRepr {
        GraphRepr {
            vertex_count: g.vertex_count(),
            degree_bound: g.degree_bound(),
            edges: g.edges().iter().map(|e| (e.u, e.v, e.weight)).collect(),
        }
    }

    fn to_graph(&self) -> Result<Graph> {
        Graph::new(self.vertex_count, self.degree_bound, self.edges.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct Tolerances {
    symmetry: f64,
    eigenvalue: f64,
    idempotence: f64,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    elements: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sidecar: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    format: String,
    graph: GraphRepr,
    labels: Vec<String>,
    class: String,
    tolerances: Tolerances,
    matrix: MatrixRepr,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn kernel_err(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::ParseKernel {
        path: path.display().to_string(),
        offset,
        message: message.into(),
    }
}

pub fn write_graph(g: &Graph, path: &Path) -> Result<()> {
    std::fs::write(path, g.to_text()).map_err(|e| io_err(path, e))
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Graph::from_text(&text, &path.display().to_string())
}

fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn matrix_from_csv(csv: &str, n: usize, path: &Path) -> Result<DMatrix<f64>> {
    let mut values = Vec::with_capacity(n * n);
    let mut offset = 0usize;
    for line in csv.lines() {
        for field in line.split(',') {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let v: f64 = field.parse().map_err(|e| {
                kernel_err(path, offset, format!("bad matrix entry `{field}`: {e}"))
            })?;
            values.push(v);
            offset += 1;
        }
    }
    if values.len() != n * n {
        return Err(kernel_err(
            path,
            values.len(),
            format!("matrix has {} entries, expected {}", values.len(), n * n),
        ));
    }
    Ok(DMatrix::from_row_slice(n, n, &values))
}

/// Writes `k` to `path`; matrices above the inline limit go to a sidecar
/// named `<file name>.bin` next to `path`.
pub fn write_kernel(k: &Kernel, path: &Path) -> Result<()> {
    let n = k.size();
    let matrix = if n <= INLINE_MATRIX_LIMIT {
        MatrixRepr {
            elements: n,
            csv: Some(matrix_to_csv(k.matrix())),
            sidecar: None,
        }
    } else {
        let sidecar_name = format!(
            "{}.bin",
            path.file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "kernel.dk".to_string())
        );
        let sidecar_path = path.with_file_name(&sidecar_name);
        let mut bytes = Vec::with_capacity(n * n * 8);
        for i in 0..n {
            for j in 0..n {
                bytes.extend_from_slice(&k.matrix()[(i, j)].to_le_bytes());
            }
        }
        std::fs::write(&sidecar_path, bytes).map_err(|e| io_err(&sidecar_path, e))?;
        MatrixRepr {
            elements: n,
            csv: None,
            sidecar: Some(sidecar_name),
        }
    };
    let file = KernelFile {
        format: FORMAT_TAG.to_string(),
        graph: GraphRepr::from_graph(k.ground().base()),
        labels: k.ground().labels().to_vec(),
        class: k.class().as_str().to_string(),
        tolerances: Tolerances {
            symmetry: SYMMETRY_TOL,
            eigenvalue: EIGENVALUE_TOL,
            idempotence: IDEMPOTENCE_TOL,
        },
        matrix,
    };
    let json =
        serde_json::to_string_pretty(&file).expect("kernel header serialization cannot fail");
    std::fs::write(path, json).map_err(|e| io_err(path, e))
}

fn json_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.lines().enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1);
        }
        offset += l.len() + 1;
    }
    offset
}

/// Reads a `.dk` file, re-validating the matrix against the header class.
/// Every malformation is reported as a parse error naming the offending
/// offset.
pub fn read_kernel(path: &Path) -> Result<Kernel> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: KernelFile = serde_json::from_str(&text).map_err(|e| {
        kernel_err(
            path,
            json_offset(&text, e.line(), e.column()),
            format!("bad kernel header: {e}"),
        )
    })?;
    if file.format != FORMAT_TAG {
        return Err(kernel_err(
            path,
            0,
            format!("unsupported format tag `{}`", file.format),
        ));
    }
    let graph = file
        .graph
        .to_graph()
        .map_err(|e| kernel_err(path, 0, format!("bad base graph: {e}")))?;
    let ground = GroundSet::new(graph, file.labels.clone())
        .map_err(|e| kernel_err(path, 0, format!("bad label set: {e}")))?;
    let n = file.matrix.elements;
    if n != ground.len() {
        return Err(kernel_err(
            path,
            0,
            format!(
                "matrix is {}x{n} but the ground set has {} elements",
                n,
                ground.len()
            ),
        ));
    }
    let matrix = match (&file.matrix.csv, &file.matrix.sidecar) {
        (Some(csv), None) => matrix_from_csv(csv, n, path)?,
        (None, Some(sidecar)) => {
            let sidecar_path = path.with_file_name(sidecar);
            let bytes = std::fs::read(&sidecar_path).map_err(|e| io_err(&sidecar_path, e))?;
            if bytes.len() != n * n * 8 {
                return Err(kernel_err(
                    &sidecar_path,
                    bytes.len(),
                    format!(
                        "sidecar holds {} bytes, expected {}",
                        bytes.len(),
                        n * n * 8
                    ),
                ));
            }
            let values: Vec<f64> = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            DMatrix::from_row_slice(n, n, &values)
        }
        _ => {
            return Err(kernel_err(
                path,
                0,
                "matrix must carry exactly one of `csv` or `sidecar`",
            ))
        }
    };
    let class =
        KernelClass::from_str(&file.class).map_err(|e| kernel_err(path, 0, format!("{e}")))?;
    let kernel = match class {
        KernelClass::Projection => Kernel::new_projection(ground, matrix),
        KernelClass::Contraction => Kernel::new_contraction_unclipped(ground, matrix),
    }
    .map_err(|e| kernel_err(path, 0, format!("matrix fails validation: {e}")))?;
    if kernel.class() != class {
        return Err(kernel_err(
            path,
            0,
            format!(
                "header claims {} but the matrix validates as {}",
                class.as_str(),
                kernel.class().as_str()
            ),
        ));
    }
    Ok(kernel)
}
