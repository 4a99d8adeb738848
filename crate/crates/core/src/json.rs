//! Serde adapters. Complex scalars are always written as `[re, im]` pairs;
//! matrices as lists of rows (or lists of columns for subspace bases).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::C64;

pub type Pair = [f64; 2];

pub fn pair(z: &C64) -> Pair {
    [z.re, z.im]
}

pub fn from_pair(p: &Pair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn pairs(values: &[C64]) -> Vec<Pair> {
    values.iter().map(pair).collect()
}

pub fn from_pairs(values: &[Pair]) -> Vec<C64> {
    values.iter().map(from_pair).collect()
}

pub fn matrix_to_rows(m: &DMatrix<C64>) -> Vec<Vec<Pair>> {
    m.row_iter().map(|r| r.iter().map(pair).collect()).collect()
}

/// Builds a matrix from rows; `cols` is used when there are no rows.
pub fn rows_to_matrix(rows: &[Vec<Pair>], cols: usize) -> Result<DMatrix<C64>, String> {
    let ncols = rows.first().map_or(cols, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flat_map(|r| r.iter().map(from_pair)),
    ))
}

pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw: Vec<Pair> = Vec::deserialize(d)?;
        Ok(from_pairs(&raw))
    }
}

pub mod dvector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DVector<C64>, s: S) -> Result<S::Ok, S::Error> {
        pairs(v.as_slice()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<C64>, D::Error> {
        let raw: Vec<Pair> = Vec::deserialize(d)?;
        Ok(DVector::from_vec(from_pairs(&raw)))
    }
}

pub mod matrix_rows {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<C64>, D::Error> {
        let raw: Vec<Vec<Pair>> = Vec::deserialize(d)?;
        rows_to_matrix(&raw, 0).map_err(serde::de::Error::custom)
    }
}

pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[DMatrix<C64>], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<C64>>, D::Error> {
        let raw: Vec<Vec<Vec<Pair>>> = Vec::deserialize(d)?;
        raw.iter()
            .map(|m| rows_to_matrix(m, 0).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Orthonormal bases: a list of column vectors. The ambient dimension is
/// carried by the surrounding struct, so an empty list deserializes to a
/// `0 × 0` matrix and must be resized by the caller if needed.
pub mod matrix_columns {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
        m.column_iter()
            .map(|c| c.iter().map(pair).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<C64>, D::Error> {
        let raw: Vec<Vec<Pair>> = Vec::deserialize(d)?;
        rows_to_matrix(&raw, 0)
            .map(|m| m.transpose())
            .map_err(serde::de::Error::custom)
    }
}

/// `f64` where `+∞` is written as `null`.
pub mod extended_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

pub mod extended_f64_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| x.is_finite().then_some(*x))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}
