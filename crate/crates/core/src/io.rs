//! JSON encodings for states, channels and programs.
//!
//! A matrix is a list of rows, each row a list of `[re, im]` pairs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::goia::GoiaProgram;
use crate::linalg::{c, ComplexMatrix, ComplexVector};
use crate::state::{DensityMatrix, StateTolerance};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_cols) {
        return Err(Error::Parse(format!("matrix row {i} has {} entries, row 0 has {n_cols}", row.len())));
    }
    Ok(ComplexMatrix::from_fn(n_rows, n_cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn vector_to_json(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[[f64; 2]]) -> ComplexVector {
    ComplexVector::from_iterator(v.len(), v.iter().map(|p| c(p[0], p[1])))
}

/// `#[serde(with = "crate::io::matrix_list")]` for `Vec<ComplexMatrix>` fields.
pub mod matrix_list {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use super::{matrix_from_json, matrix_to_json, MatrixJson};
    use crate::linalg::ComplexMatrix;

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ComplexMatrix>, D::Error> {
        let raw = Vec::<MatrixJson>::deserialize(d)?;
        raw.iter().map(|m| matrix_from_json(m).map_err(D::Error::custom)).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub kraus: Vec<MatrixJson>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e} (line {}, column {})", e.line(), e.column())))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Compact state file with one matrix row per line.
pub fn state_to_json(rho: &DensityMatrix) -> String {
    let rows: Vec<String> = matrix_to_json(rho.matrix())
        .iter()
        .map(|row| format!("    {}", serde_json::to_string(row).expect("row serialization")))
        .collect();
    format!("{{\n  \"dims\": {:?},\n  \"matrix\": [\n{}\n  ]\n}}", rho.dims(), rows.join(",\n"))
}

pub fn parse_state(text: &str, tol: StateTolerance) -> Result<DensityMatrix> {
    let file: StateFile = parse_json(text, "state file")?;
    let m = matrix_from_json(&file.matrix)?;
    if m.nrows() != m.ncols() {
        return Err(Error::Validation(format!("field `matrix`: {}x{} is not square", m.nrows(), m.ncols())));
    }
    DensityMatrix::with_tolerance(file.dims, m, tol)
}

pub fn read_state(path: &Path, tol: StateTolerance) -> Result<DensityMatrix> {
    parse_state(&read_text(path)?, tol).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Reads a square matrix stored in the state-file layout (used for unitaries).
pub fn parse_matrix_file(text: &str) -> Result<(Vec<usize>, ComplexMatrix)> {
    let file: StateFile = parse_json(text, "matrix file")?;
    let m = matrix_from_json(&file.matrix)?;
    let total: usize = file.dims.iter().product();
    if m.nrows() != m.ncols() || m.nrows() != total {
        return Err(Error::Validation(format!(
            "field `matrix`: {}x{} is inconsistent with dims {:?}",
            m.nrows(),
            m.ncols(),
            file.dims
        )));
    }
    Ok((file.dims, m))
}

pub fn channel_to_json(ch: &KrausChannel) -> String {
    let file = ChannelFile {
        in_dims: ch.in_dims().to_vec(),
        out_dims: ch.out_dims().to_vec(),
        kraus: ch.kraus().iter().map(matrix_to_json).collect(),
    };
    serde_json::to_string_pretty(&file).expect("channel serialization")
}

pub fn parse_channel(text: &str) -> Result<KrausChannel> {
    let file: ChannelFile = parse_json(text, "channel file")?;
    let kraus = file.kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    KrausChannel::new(kraus, file.in_dims, file.out_dims)
}

pub fn program_to_json(p: &GoiaProgram) -> String {
    serde_json::to_string_pretty(p).expect("program serialization")
}

pub fn parse_program(text: &str) -> Result<GoiaProgram> {
    parse_json(text, "program file")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn state_round_trip() {
        for (_, rho) in fixtures::all() {
            let back = parse_state(&state_to_json(&rho), StateTolerance::default()).unwrap();
            assert_eq!(back.dims(), rho.dims());
            assert!(crate::linalg::frobenius(&(back.matrix() - rho.matrix())) < 1e-15);
        }
    }

    #[test]
    fn malformed_state_files() {
        let tol = StateTolerance::default();
        let err = parse_state("{\"dims\": [2], \"matrix\": [[[1,0],[0,0]],\n [[0,0]]]}", tol).unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("row 1")), "{err:?}");
        let err = parse_state("{\"dims\": [2], \"matrix\": [[[1,0],[0,0]]]}", tol).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("not square")), "{err:?}");
        let err = parse_state("{\"dims\": [3], \"matrix\": [[[1,0],[0,0]],[[0,0],[0,0]]]}", tol).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("dims")), "{err:?}");
        let err = parse_state("{\"dims\": [2],\n \"matrx\": []}", tol).unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("line 2")), "{err:?}");
        let err = parse_state("{\"dims\": [2], \"matrix\": [[[0.5,0],[0,0]],[[0,0],[0,0]]]}", tol).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("trace")), "{err:?}");
    }

    #[test]
    fn channel_round_trip() {
        let ch = crate::channel::controlled_translation(2, 3).unwrap();
        let back = parse_channel(&channel_to_json(&ch)).unwrap();
        assert_eq!(back, ch);
        let bad = "{\"in_dims\":[1],\"out_dims\":[1],\"kraus\":[[[[1,0]]],[[[1,0]]]]}";
        assert!(matches!(parse_channel(bad), Err(Error::InvalidChannel(_))));
    }
}
