//! On-disk records: bodies, γ fields and Radon arcs.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::harmonics::HarmonicCoeffs;
use crate::sphere::SphericalGrid;

/// A body as its band-limited radial function. Floats are written in
/// shortest round-trip form, so save → load is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyRecord {
    pub dim_n: usize,
    pub band_limit: usize,
    /// (m, k, value) triples; omitted triples are zero.
    pub radial_coeffs: Vec<(usize, i64, f64)>,
}

impl BodyRecord {
    pub fn from_coeffs(rho: &HarmonicCoeffs) -> Self {
        Self { dim_n: rho.dim(), band_limit: rho.band_limit(), radial_coeffs: rho.triples().collect() }
    }

    pub fn from_body(body: &ConvexBody) -> Self {
        Self::from_coeffs(body.radial_coeffs())
    }

    pub fn coeffs(&self) -> Result<HarmonicCoeffs> {
        HarmonicCoeffs::from_triples(self.dim_n, self.band_limit, self.radial_coeffs.iter().copied())
    }

    /// Rebuilds the body on `grid` (runs the convexity certificates).
    pub fn to_body(&self, grid: Arc<SphericalGrid>) -> Result<ConvexBody> {
        ConvexBody::from_radial_coeffs(grid, self.coeffs()?)
    }
}

/// Radon arc coefficients a_1, a_2, ....
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub coeffs: Vec<f64>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_pretty(value)?)?;
    Ok(())
}

/// Parses a γ file ({dim_n, band_limit, coeffs}).
pub fn read_gamma(path: &Path) -> Result<HarmonicCoeffs> {
    read_json(path)
}

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
