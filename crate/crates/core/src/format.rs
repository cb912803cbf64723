//! JSON file formats for networks, CPWL decompositions and subdivisions.
//!
//! Rationals are written as lowest-terms strings. Writers emit compact JSON
//! followed by a newline, so a canonical file read and written again is
//! byte-identical.

use serde::{Deserialize, Serialize};

use crate::geometry::{GeometryError, Piece, Polytope, SubdivisionComplex};
use crate::ir::{AffineMap, IrError, ReluNetwork};
use crate::rational::Rational;
use crate::synth::{CpwlDecomposition, CpwlTerm, Sign, SynthError};

pub const NETWORK_FORMAT: &str = "relu-net/1";
pub const DECOMP_FORMAT: &str = "cpwl-decomp/1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerV1 {
    pub weights: Vec<Vec<Rational>>,
    pub bias: Vec<Rational>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFileV1 {
    pub format: String,
    pub input_dim: usize,
    pub layers: Vec<LayerV1>,
}

impl NetworkFileV1 {
    pub fn from_network(net: &ReluNetwork) -> Self {
        let last = net.layers().len() - 1;
        let layers = net
            .layers()
            .iter()
            .enumerate()
            .map(|(i, l)| LayerV1 {
                weights: l.to_dense(),
                bias: l.bias().to_vec(),
                activation: if i == last { Activation::None } else { Activation::Relu },
            })
            .collect();
        NetworkFileV1 {
            format: NETWORK_FORMAT.to_string(),
            input_dim: net.input_dim(),
            layers,
        }
    }

    pub fn to_network(&self) -> Result<ReluNetwork, FormatError> {
        if self.format != NETWORK_FORMAT {
            return Err(FormatError::Invalid(format!(
                "unsupported format {:?}, expected {NETWORK_FORMAT:?}",
                self.format
            )));
        }
        let last = self.layers.len().checked_sub(1).ok_or_else(|| FormatError::Invalid("no layers".into()))?;
        let mut cols = self.input_dim;
        let mut maps = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let expected = if i == last { Activation::None } else { Activation::Relu };
            if l.activation != expected {
                return Err(FormatError::Invalid(format!(
                    "layer {i} has activation {:?}, expected {:?}",
                    l.activation, expected
                )));
            }
            if let Some(r) = l.weights.iter().position(|row| row.len() != cols) {
                return Err(FormatError::Invalid(format!(
                    "layer {i} row {r} has {} entries, expected {cols}",
                    l.weights[r].len()
                )));
            }
            let map = AffineMap::from_dense(cols, l.weights.clone(), l.bias.clone())?;
            cols = map.rows();
            maps.push(map);
        }
        Ok(ReluNetwork::new(self.input_dim, maps)?)
    }
}

fn to_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn network_to_json(net: &ReluNetwork) -> String {
    to_line(&NetworkFileV1::from_network(net))
}

pub fn network_from_json(s: &str) -> Result<ReluNetwork, FormatError> {
    serde_json::from_str::<NetworkFileV1>(s)?.to_network()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompTermV1 {
    pub sign: i64,
    pub matrix: Vec<Vec<Rational>>,
    pub bias: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompFileV1 {
    pub format: String,
    pub n: usize,
    pub terms: Vec<DecompTermV1>,
}

impl DecompFileV1 {
    pub fn from_decomposition(d: &CpwlDecomposition) -> Self {
        DecompFileV1 {
            format: DECOMP_FORMAT.to_string(),
            n: d.n,
            terms: d
                .terms
                .iter()
                .map(|t| DecompTermV1 {
                    sign: t.sign.as_i64(),
                    matrix: t.map.to_dense(),
                    bias: t.map.bias().to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_decomposition(&self) -> Result<CpwlDecomposition, FormatError> {
        if self.format != DECOMP_FORMAT {
            return Err(FormatError::Invalid(format!(
                "unsupported format {:?}, expected {DECOMP_FORMAT:?}",
                self.format
            )));
        }
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let sign = Sign::from_i64(t.sign)
                    .ok_or_else(|| FormatError::Invalid(format!("term {i}: sign must be 1 or -1, got {}", t.sign)))?;
                if t.matrix.len() != self.n + 1 || t.matrix.iter().any(|r| r.len() != self.n) {
                    return Err(FormatError::Invalid(format!(
                        "term {i}: matrix must be {}x{}",
                        self.n + 1,
                        self.n
                    )));
                }
                let map = AffineMap::from_dense(self.n, t.matrix.clone(), t.bias.clone())?;
                Ok(CpwlTerm { sign, map })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(CpwlDecomposition::new(self.n, terms)?)
    }
}

pub fn decomp_to_json(d: &CpwlDecomposition) -> String {
    to_line(&DecompFileV1::from_decomposition(d))
}

pub fn decomp_from_json(s: &str) -> Result<CpwlDecomposition, FormatError> {
    serde_json::from_str::<DecompFileV1>(s)?.to_decomposition()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceFile {
    pub name: String,
    pub vertices: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    pub dim: usize,
    pub ambient: Vec<Vec<Rational>>,
    pub pieces: Vec<PieceFile>,
}

impl ComplexFile {
    pub fn from_complex(c: &SubdivisionComplex) -> Self {
        ComplexFile {
            dim: c.dim(),
            ambient: c.ambient.vertices().to_vec(),
            pieces: c
                .pieces
                .iter()
                .map(|p| PieceFile {
                    name: p.name.clone(),
                    vertices: p.polytope.vertices().to_vec(),
                })
                .collect(),
        }
    }

    /// Builds the complex; vertex lists are reduced to their hulls.
    pub fn to_complex(&self) -> Result<SubdivisionComplex, FormatError> {
        let ambient = Polytope::from_points(self.dim, self.ambient.clone())?;
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                Ok(Piece {
                    name: p.name.clone(),
                    polytope: Polytope::from_points(self.dim, p.vertices.clone())?,
                    certificate: None,
                })
            })
            .collect::<Result<Vec<_>, GeometryError>>()?;
        Ok(SubdivisionComplex::new(ambient, pieces)?)
    }
}

pub fn complex_to_json(c: &SubdivisionComplex) -> String {
    to_line(&ComplexFile::from_complex(c))
}

pub fn complex_from_json(s: &str) -> Result<SubdivisionComplex, FormatError> {
    serde_json::from_str::<ComplexFile>(s)?.to_complex()
}
