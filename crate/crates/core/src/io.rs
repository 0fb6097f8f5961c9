//! JSON matrix format.
//!
//! `{"kind":"choi","n":2,"m":2,"re":[[...]],"im":[[...]]}`, row-major.
//! `kind` is one of `matrix`, `density` or `choi`; `n` and `m` are the block
//! structure of a Choi matrix and are omitted for the other kinds.

use serde::{Deserialize, Serialize};

use crate::channels::{ChoiMatrix, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};
use crate::policy::NumericPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Matrix,
    Density,
    Choi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub kind: MatrixKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// A parsed payload; every kind is Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Matrix(HermitianMatrix),
    Density(DensityMatrix),
    Choi(ChoiMatrix),
}

impl Payload {
    pub fn hermitian(&self) -> &HermitianMatrix {
        match self {
            Payload::Matrix(h) => h,
            Payload::Density(d) => d.hermitian(),
            Payload::Choi(c) => c.matrix(),
        }
    }
}

impl MatrixFile {
    pub fn from_hermitian(kind: MatrixKind, dims: Option<(usize, usize)>, h: &HermitianMatrix) -> Self {
        let d = h.dim();
        Self {
            kind,
            n: dims.map(|(n, _)| n),
            m: dims.map(|(_, m)| m),
            re: (0..d).map(|i| (0..d).map(|j| h[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| h[(i, j)].im).collect()).collect(),
        }
    }

    pub fn from_choi(c: &ChoiMatrix) -> Self {
        Self::from_hermitian(MatrixKind::Choi, Some((c.n(), c.m())), c.matrix())
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self::from_hermitian(MatrixKind::Density, None, rho.hermitian())
    }

    fn to_hermitian(&self) -> Result<HermitianMatrix> {
        let d = self.re.len();
        if d == 0 {
            return Err(Error::Parse("empty matrix".into()));
        }
        if self.im.len() != d || self.re.iter().chain(&self.im).any(|row| row.len() != d) {
            return Err(Error::Parse(format!("re and im must both be {d}x{d}")));
        }
        let m = ComplexMatrix::from_fn(d, d, |i, j| C64::new(self.re[i][j], self.im[i][j]));
        HermitianMatrix::with_tolerance(m, NumericPolicy::global().parse_hermitian_tol)
            .map_err(|e| Error::Parse(e.to_string()))
    }

    /// Validates the payload against its declared kind.
    pub fn into_payload(self) -> Result<Payload> {
        let h = self.to_hermitian()?;
        match self.kind {
            MatrixKind::Matrix => Ok(Payload::Matrix(h)),
            MatrixKind::Density => Ok(Payload::Density(DensityMatrix::new(h)?)),
            MatrixKind::Choi => {
                let (n, m) = match (self.n, self.m) {
                    (Some(n), Some(m)) => (n, m),
                    _ => return Err(Error::Parse("choi payload needs n and m".into())),
                };
                Ok(Payload::Choi(ChoiMatrix::new(n, m, h)?))
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Payload> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_payload()
}

pub fn to_json(file: &MatrixFile) -> String {
    serde_json::to_string(file).expect("matrix files always serialize")
}
