use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{NgcaError, Result};
use crate::linalg;
use crate::scalar::Real;

/// Coordinate system a subspace basis is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Whitened,
    Original,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Whitened => f.write_str("whitened"),
            Frame::Original => f.write_str("original"),
        }
    }
}

/// A `d_s`-dimensional linear subspace of `R^{d_x}`, stored as a
/// `d_x x d_s` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T: Real> {
    basis: DMatrix<T>,
    frame: Frame,
    degenerate_gap: bool,
}

pub(crate) fn orthonormal_tol<T: Real>() -> T {
    T::lit(1e-10).max(T::default_epsilon() * T::lit(1e3))
}

impl<T: Real> Subspace<T> {
    /// Wraps an orthonormal basis. Fails if `basisᵀ basis` deviates from the
    /// identity by more than 1e-10 in any entry.
    pub fn new(basis: DMatrix<T>, frame: Frame) -> Result<Self> {
        if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
            return Err(NgcaError::Dimension(format!(
                "subspace basis must be d_x x d_s with 1 <= d_s <= d_x, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        let gram = basis.tr_mul(&basis);
        let dev = (gram - DMatrix::identity(basis.ncols(), basis.ncols()))
            .abs()
            .max();
        if !(dev <= orthonormal_tol::<T>()) {
            return Err(NgcaError::Numeric(format!(
                "basis columns are not orthonormal (max deviation {:e})",
                dev.as_f64()
            )));
        }
        Ok(Self {
            basis,
            frame,
            degenerate_gap: false,
        })
    }

    /// Orthonormalizes arbitrary spanning columns first.
    pub fn from_spanning(columns: &DMatrix<T>, frame: Frame) -> Result<Self> {
        Self::new(linalg::orthonormalize(columns)?, frame)
    }

    /// Subspace spanned by the first `d_s` canonical axes of `R^{d_x}`.
    pub fn canonical(d_x: usize, d_s: usize, frame: Frame) -> Result<Self> {
        let mut b = DMatrix::zeros(d_x, d_s);
        for i in 0..d_s.min(d_x) {
            b[(i, i)] = T::one();
        }
        Self::new(b, frame)
    }

    pub fn with_degenerate_gap(mut self, flag: bool) -> Self {
        self.degenerate_gap = flag;
        self
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Set when the eigenvalue split that produced this subspace was
    /// degenerate, so the span is not well determined.
    pub fn degenerate_gap(&self) -> bool {
        self.degenerate_gap
    }

    pub fn projector(&self) -> DMatrix<T> {
        linalg::projector(&self.basis)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SubspaceDoc {
            frame: self.frame,
            basis: (0..self.basis.nrows())
                .flat_map(|i| self.basis.row(i).iter().copied().collect::<Vec<_>>())
                .collect(),
            d_x: self.ambient_dim(),
            d_s: self.dim(),
            warning_degenerate_gap: self.degenerate_gap,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SubspaceDoc<T> = serde_json::from_str(text)?;
        if doc.basis.len() != doc.d_x * doc.d_s {
            return Err(NgcaError::shape(
                format!("{} basis entries (d_x * d_s)", doc.d_x * doc.d_s),
                format!("{}", doc.basis.len()),
            ));
        }
        let basis = DMatrix::from_row_slice(doc.d_x, doc.d_s, &doc.basis);
        Ok(Self::new(basis, doc.frame)?.with_degenerate_gap(doc.warning_degenerate_gap))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|source| NgcaError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| NgcaError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct SubspaceDoc<T> {
    frame: Frame,
    /// Row-major `d_x x d_s` entries.
    basis: Vec<T>,
    d_x: usize,
    d_s: usize,
    warning_degenerate_gap: bool,
}
