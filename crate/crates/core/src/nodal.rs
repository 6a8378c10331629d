//! Sign changes of real eigenfunctions and the nodal surplus.

use serde::Serialize;

use crate::graph::{CycleStructure, Graph};
use crate::spectral::SpectralDecomposition;
use crate::{Error, Result};

/// An entry with `|f_u| <= TOL_ZERO` (after l2 normalization) counts as a
/// zero of the eigenfunction.
pub const TOL_ZERO: f64 = 1e-8;

/// Number of edges `(u, v)` with `f_u * f_v < 0`.
pub fn sign_changes(g: &Graph, f: &[f64]) -> Result<usize> {
    if f.len() != g.n_vertices() {
        return Err(Error::DimensionMismatch {
            what: "eigenfunction",
            got: f.len(),
            expected: g.n_vertices(),
        });
    }
    let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    if let Some(vertex) = f.iter().position(|x| !(x.abs() > TOL_ZERO * norm)) {
        return Err(Error::VanishingEntry {
            vertex,
            value: if norm > 0.0 { f[vertex].abs() / norm } else { 0.0 },
        });
    }
    Ok(g
        .edges()
        .iter()
        .filter(|&&(u, v)| (f[u] < 0.0) != (f[v] < 0.0))
        .count())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodalReport {
    pub level: usize,
    /// Sign-change count `phi_n`; `None` for non-generic levels.
    pub phi: Option<usize>,
    /// Nodal surplus `phi_n - (n - 1)`; `None` for non-generic levels.
    pub surplus: Option<i64>,
    pub generic: bool,
    pub min_abs_entry: f64,
    pub spectral_gap: f64,
    /// Why the level is not generic, if it is not.
    pub reason: Option<String>,
}

impl NodalReport {
    /// `0 <= sigma_n <= beta`; vacuous for non-generic levels.
    pub fn within_bounds(&self, betti: usize) -> bool {
        self.surplus
            .map_or(true, |s| s >= 0 && s <= betti as i64)
    }
}

/// Nodal count of level `level` of a real decomposition. A level is generic
/// when its eigenvalue is simple and the eigenfunction vanishes nowhere.
pub fn nodal_report(
    g: &Graph,
    cs: &CycleStructure,
    sd: &SpectralDecomposition,
    level: usize,
) -> Result<NodalReport> {
    debug_assert_eq!(cs.betti(), g.betti());
    sd.check_level(level)?;
    let f = sd.real_vector(level).ok_or(Error::ComplexEigenbasis)?;
    let min_abs_entry = f.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    let spectral_gap = sd.gap(level);
    let mut report = NodalReport {
        level,
        phi: None,
        surplus: None,
        generic: false,
        min_abs_entry,
        spectral_gap,
        reason: None,
    };
    if !sd.is_simple(level) {
        report.reason = Some(format!(
            "DegenerateEigenvalue: gap {spectral_gap:e} <= {:e}",
            sd.tol_gap()
        ));
        return Ok(report);
    }
    match sign_changes(g, &f) {
        Ok(phi) => {
            report.generic = true;
            report.phi = Some(phi);
            report.surplus = Some(phi as i64 - (level as i64 - 1));
        }
        Err(Error::VanishingEntry { vertex, value }) => {
            report.reason = Some(format!("VanishingEntry: |f[{vertex}]| = {value:e}"));
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}
