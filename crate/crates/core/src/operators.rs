//! Plain, magnetic and cut Schrödinger operators on a graph.
//!
//! All operators are dense complex Hermitian matrices. The plain operator is
//! `H = Q - C` with `Q` the diagonal potential and `C` the adjacency matrix.
//! Deformations act only on the surplus edges of a [`CycleStructure`]: a
//! magnetic phase replaces the `-1` on `s_j = (u, v)`, `u < v`, by
//! `-exp(i alpha_j)` (conjugate below the diagonal); a cut removes the edge and
//! shifts the potential by `-gamma_j` at `u` and `-1/gamma_j` at `v`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::graph::{CycleStructure, Edge, Graph};
use crate::{Error, Result};

/// Maps an angle into `(-pi, pi]`.
pub fn normalize_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `e^{i alpha}`, exact at multiples of `pi`.
pub fn unit_phase(alpha: f64) -> Complex64 {
    let a = normalize_angle(alpha);
    if a == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if a == PI {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, a)
    }
}

/// Dense Hermitian matrix. Off-diagonal entries are written in conjugate
/// pairs so the matrix is Hermitian bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<Complex64>,
}

impl HermitianOperator {
    /// Diagonal operator with the given real entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut matrix = DMatrix::zeros(d, d);
        for (i, &x) in diag.iter().enumerate() {
            matrix[(i, i)] = Complex64::new(x, 0.0);
        }
        HermitianOperator { matrix }
    }

    /// Builds from an arbitrary square matrix by keeping the upper triangle
    /// and the real part of the diagonal.
    pub fn from_upper(m: &DMatrix<Complex64>) -> Self {
        assert!(m.is_square(), "operator must be square");
        let d = m.nrows();
        let mut out = HermitianOperator {
            matrix: DMatrix::zeros(d, d),
        };
        for u in 0..d {
            out.matrix[(u, u)] = Complex64::new(m[(u, u)].re, 0.0);
            for v in u + 1..d {
                out.set_pair(u, v, m[(u, v)]);
            }
        }
        out
    }

    /// Real symmetric operator from the upper triangle of `m`.
    pub fn from_real_upper(m: &DMatrix<f64>) -> Self {
        Self::from_upper(&m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, u: usize, v: usize) -> Complex64 {
        self.matrix[(u, v)]
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }

    /// Entrywise exact Hermitian check (no tolerance).
    pub fn is_exactly_hermitian(&self) -> bool {
        let d = self.dim();
        (0..d).all(|u| {
            self.matrix[(u, u)].im == 0.0
                && (u + 1..d).all(|v| self.matrix[(u, v)] == self.matrix[(v, u)].conj())
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn scale(&self, t: f64) -> HermitianOperator {
        HermitianOperator {
            matrix: self.matrix.map(|z| z * t),
        }
    }

    /// `<x, H y>` with conjugation on the first argument.
    pub fn inner(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for u in 0..d {
            let mut row = Complex64::new(0.0, 0.0);
            for v in 0..d {
                row += self.matrix[(u, v)] * y[v];
            }
            acc += x[u].conj() * row;
        }
        acc
    }

    pub(crate) fn set_pair(&mut self, u: usize, v: usize, z: Complex64) {
        self.matrix[(u, v)] = z;
        self.matrix[(v, u)] = z.conj();
    }

    pub(crate) fn add_diag(&mut self, u: usize, x: f64) {
        self.matrix[(u, u)].re += x;
    }
}

/// Magnetic phases `alpha_j`, one per surplus edge, normalized into `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticPhases(Vec<f64>);

impl MagneticPhases {
    pub fn new(alpha: Vec<f64>) -> Self {
        MagneticPhases(alpha.into_iter().map(normalize_angle).collect())
    }

    pub fn zeros(beta: usize) -> Self {
        MagneticPhases(vec![0.0; beta])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Cut parameters `gamma_j`, each finite and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct CutParams(Vec<f64>);

impl CutParams {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        for (index, &value) in gamma.iter().enumerate() {
            check_gamma(index, value)?;
        }
        Ok(CutParams(gamma))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_gamma(index: usize, value: f64) -> Result<()> {
    if value == 0.0 || !value.is_finite() {
        Err(Error::GammaZeroOrInfinite { index, value })
    } else {
        Ok(())
    }
}

/// How a single surplus edge is treated when assembling an operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurplusEdgeMode {
    /// Ordinary `-1` coupling.
    Bond,
    /// Coupling `-exp(i alpha)` at `(u, v)`, `u < v`.
    Phase(f64),
    /// Edge removed, potential shifted by `-gamma` at `u` and `-1/gamma` at `v`.
    Cut(f64),
}

/// Operator with every surplus edge treated according to `modes`.
pub fn build_surgery(
    g: &Graph,
    cs: &CycleStructure,
    modes: &[SurplusEdgeMode],
) -> Result<HermitianOperator> {
    if modes.len() != cs.betti() {
        return Err(Error::DimensionMismatch {
            what: "surplus edge modes",
            got: modes.len(),
            expected: cs.betti(),
        });
    }
    let mut h = HermitianOperator::diagonal(g.potential());
    let minus_one = Complex64::new(-1.0, 0.0);
    for &(u, v) in cs.tree_edges() {
        h.set_pair(u, v, minus_one);
    }
    for (j, (&(u, v), mode)) in cs.surplus_edges().iter().zip(modes).enumerate() {
        match *mode {
            SurplusEdgeMode::Bond => h.set_pair(u, v, minus_one),
            SurplusEdgeMode::Phase(alpha) => h.set_pair(u, v, -unit_phase(alpha)),
            SurplusEdgeMode::Cut(gamma) => {
                check_gamma(j, gamma)?;
                h.add_diag(u, -gamma);
                h.add_diag(v, -1.0 / gamma);
            }
        }
    }
    Ok(h)
}

/// `H = Q - C`.
pub fn build_plain(g: &Graph) -> HermitianOperator {
    let mut h = HermitianOperator::diagonal(g.potential());
    for &(u, v) in g.edges() {
        h.set_pair(u, v, Complex64::new(-1.0, 0.0));
    }
    h
}

/// Magnetic operator with phase `alpha_j` on surplus edge `j`.
pub fn build_magnetic(
    g: &Graph,
    cs: &CycleStructure,
    phases: &MagneticPhases,
) -> Result<HermitianOperator> {
    let modes: Vec<_> = phases
        .as_slice()
        .iter()
        .map(|&a| SurplusEdgeMode::Phase(a))
        .collect();
    build_surgery(g, cs, &modes)
}

/// Cut operator: every surplus edge removed with parameter `gamma_j`. The
/// result is the operator of a tree.
pub fn build_cut(g: &Graph, cs: &CycleStructure, cut: &CutParams) -> Result<HermitianOperator> {
    let modes: Vec<_> = cut
        .as_slice()
        .iter()
        .map(|&c| SurplusEdgeMode::Cut(c))
        .collect();
    build_surgery(g, cs, &modes)
}

/// Rank-one matrix `B` with the 2x2 block `[[gamma, -e^{i alpha}], [-e^{-i alpha}, 1/gamma]]`
/// on the endpoints of surplus edge `j`, so that cutting edge `j` equals
/// putting phase `alpha` on it and subtracting `B`.
pub fn perturbation_matrix(
    g: &Graph,
    cs: &CycleStructure,
    j: usize,
    gamma: f64,
    alpha: f64,
) -> Result<HermitianOperator> {
    cs.check_index(j)?;
    check_gamma(j, gamma)?;
    let (u, v) = cs.surplus_edges()[j];
    let mut b = HermitianOperator::diagonal(&vec![0.0; g.n_vertices()]);
    b.add_diag(u, gamma);
    b.add_diag(v, 1.0 / gamma);
    b.set_pair(u, v, -unit_phase(alpha));
    Ok(b)
}

/// Arbitrary magnetic potential: a phase `A_{u,v}` on every edge with
/// `A_{v,u} = -A_{u,v}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePhaseAssignment {
    phases: BTreeMap<Edge, f64>,
}

impl EdgePhaseAssignment {
    pub fn zeros(g: &Graph) -> Self {
        EdgePhaseAssignment {
            phases: g.edges().iter().map(|&e| (e, 0.0)).collect(),
        }
    }

    /// Assignment from `(u, v) -> A_{u,v}` entries in any orientation. Every
    /// graph edge must be covered exactly once.
    pub fn from_entries(g: &Graph, entries: &[((usize, usize), f64)]) -> Result<Self> {
        let mut phases = BTreeMap::new();
        for &((a, b), value) in entries {
            let (u, v) = (a.min(b), a.max(b));
            if !g.has_edge(u, v) {
                return Err(Error::UnknownEdge { u, v });
            }
            let oriented = if a < b { value } else { -value };
            if phases.insert((u, v), oriented).is_some() {
                return Err(Error::Parse(format!("edge ({u},{v}) assigned twice")));
            }
        }
        if let Some(&(u, v)) = g.edges().iter().find(|e| !phases.contains_key(e)) {
            return Err(Error::MissingEdgePhase { u, v });
        }
        Ok(EdgePhaseAssignment { phases })
    }

    /// `A_{a,b}` in the given direction.
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        if a < b {
            self.phases.get(&(a, b)).copied()
        } else {
            self.phases.get(&(b, a)).map(|x| -x)
        }
    }

    /// Sets `A_{a,b}` (and implicitly `A_{b,a} = -A_{a,b}`).
    pub fn set(&mut self, a: usize, b: usize, value: f64) -> Result<()> {
        let (u, v) = (a.min(b), a.max(b));
        match self.phases.get_mut(&(u, v)) {
            Some(slot) => {
                *slot = if a < b { value } else { -value };
                Ok(())
            }
            None => Err(Error::UnknownEdge { u, v }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.phases.iter().map(|(&e, &a)| (e, a))
    }
}

/// Operator with coupling `-exp(i A_{u,v})` at `(u, v)` on every edge.
pub fn build_decorated(g: &Graph, a: &EdgePhaseAssignment) -> Result<HermitianOperator> {
    let mut h = HermitianOperator::diagonal(g.potential());
    for &(u, v) in g.edges() {
        let phase = a.get(u, v).ok_or(Error::MissingEdgePhase { u, v })?;
        h.set_pair(u, v, -unit_phase(phase));
    }
    Ok(h)
}

/// Flux of `a` through basis cycle `j`: the sum of `A` along the oriented
/// cycle, reduced into `(-pi, pi]`.
pub fn flux(cs: &CycleStructure, a: &EdgePhaseAssignment, j: usize) -> Result<f64> {
    cs.check_index(j)?;
    let mut total = 0.0;
    for &(from, to) in cs.cycle(j) {
        total += a.get(from, to).ok_or(Error::MissingEdgePhase {
            u: from.min(to),
            v: from.max(to),
        })?;
    }
    Ok(normalize_angle(total))
}

/// Canonical phases on the surplus edges with the same fluxes as `a`. The
/// decorated operator of `a` is unitarily equivalent (by a diagonal gauge
/// transform) to [`build_magnetic`] with these phases.
pub fn reduce_gauge(g: &Graph, cs: &CycleStructure, a: &EdgePhaseAssignment) -> Result<MagneticPhases> {
    if let Some(&(u, v)) = g.edges().iter().find(|&&(u, v)| a.get(u, v).is_none()) {
        return Err(Error::MissingEdgePhase { u, v });
    }
    let alpha = (0..cs.betti())
        .map(|j| flux(cs, a, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(MagneticPhases::new(alpha))
}
