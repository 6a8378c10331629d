//! The n-th eigenvalue as a function of the magnetic phases on the
//! `beta`-torus: its critical point at zero field, the Hessian there, and
//! the Morse index compared against the nodal surplus.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::graph::{CycleStructure, Graph};
use crate::nodal::{nodal_report, NodalReport};
use crate::operators::{build_magnetic, build_plain, MagneticPhases};
use crate::spectral::{eig, eigenvalues, Inertia, SpectralDecomposition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalityConfig {
    /// Step of the finite-difference Hessian.
    pub fd_step: f64,
    /// Combine the stencils at `fd_step` and `fd_step / 2` to cancel the
    /// `O(h^2)` truncation term.
    pub fd_extrapolate: bool,
    /// Step of the finite-difference gradient.
    pub gradient_step: f64,
    /// Hessian eigenvalues with `|mu| <= tol_hess_rel * max(1, |H|)` count as zero.
    pub tol_hess_rel: f64,
    pub gradient_tol: f64,
    /// PT/FD Hessians must agree to `max(abs, rel * |H|)` in Frobenius norm.
    pub cross_check_abs: f64,
    pub cross_check_rel: f64,
}

impl Default for CriticalityConfig {
    fn default() -> Self {
        CriticalityConfig {
            fd_step: 1e-3,
            fd_extrapolate: true,
            gradient_step: 1e-3,
            tol_hess_rel: 1e-5,
            gradient_tol: 1e-6,
            cross_check_abs: 1e-5,
            cross_check_rel: 1e-4,
        }
    }
}

/// `lambda_level` of the magnetic operator with phases `phases`.
pub fn lambda_of_alpha(
    g: &Graph,
    cs: &CycleStructure,
    phases: &MagneticPhases,
    level: usize,
) -> Result<f64> {
    check_level(g, level)?;
    let h = build_magnetic(g, cs, phases)?;
    Ok(eigenvalues(&h)[level - 1])
}

fn check_level(g: &Graph, level: usize) -> Result<()> {
    if level == 0 || level > g.n_vertices() {
        Err(Error::LevelOutOfRange {
            level,
            dim: g.n_vertices(),
        })
    } else {
        Ok(())
    }
}

fn require_generic(
    g: &Graph,
    cs: &CycleStructure,
    sd: &SpectralDecomposition,
    level: usize,
) -> Result<NodalReport> {
    let report = nodal_report(g, cs, sd, level)?;
    if report.generic {
        Ok(report)
    } else {
        Err(Error::NonGenericLevel {
            level,
            reason: report.reason.clone().unwrap_or_default(),
        })
    }
}

/// Evaluates `lambda_level` at `alpha = sum_k (coef_k * e_{axis_k})`.
struct BandProbe<'a> {
    g: &'a Graph,
    cs: &'a CycleStructure,
    level: usize,
}

impl BandProbe<'_> {
    fn at(&self, shifts: &[(usize, f64)]) -> Result<f64> {
        let mut alpha = vec![0.0; self.cs.betti()];
        for &(axis, x) in shifts {
            alpha[axis] += x;
        }
        let h = build_magnetic(self.g, self.cs, &MagneticPhases::new(alpha))?;
        Ok(eigenvalues(&h)[self.level - 1])
    }
}

/// Analytic gradient `Im(conj(f_u) f_v)` over the surplus edges; identically
/// zero for a real eigenfunction.
pub fn analytic_gradient(cs: &CycleStructure, sd: &SpectralDecomposition, level: usize) -> Vec<f64> {
    let f = sd.vector(level);
    cs.surplus_edges()
        .iter()
        .map(|&(u, v)| (f[u].conj() * f[v]).im)
        .collect()
}

/// Central finite-difference gradient of `lambda_level(alpha)` at `alpha = 0`.
pub fn gradient_at_zero(g: &Graph, cs: &CycleStructure, level: usize, step: f64) -> Result<Vec<f64>> {
    check_level(g, level)?;
    let sd = eig(&build_plain(g))?;
    require_generic(g, cs, &sd, level)?;
    fd_gradient(g, cs, level, step)
}

fn fd_gradient(g: &Graph, cs: &CycleStructure, level: usize, step: f64) -> Result<Vec<f64>> {
    let probe = BandProbe { g, cs, level };
    (0..cs.betti())
        .map(|j| Ok((probe.at(&[(j, step)])? - probe.at(&[(j, -step)])?) / (2.0 * step)))
        .collect()
}

/// Finite-difference Hessian of `lambda_level(alpha)` at `alpha = 0`: three
/// point stencil on the diagonal, four point cross stencil off it.
pub fn hessian_fd(g: &Graph, cs: &CycleStructure, level: usize, step: f64) -> Result<DMatrix<f64>> {
    check_level(g, level)?;
    let sd = eig(&build_plain(g))?;
    require_generic(g, cs, &sd, level)?;
    fd_hessian(g, cs, level, sd.eigenvalue(level), step)
}

fn fd_hessian(
    g: &Graph,
    cs: &CycleStructure,
    level: usize,
    lambda0: f64,
    h: f64,
) -> Result<DMatrix<f64>> {
    let beta = cs.betti();
    let probe = BandProbe { g, cs, level };
    let mut hess = DMatrix::zeros(beta, beta);
    for j in 0..beta {
        hess[(j, j)] = (probe.at(&[(j, h)])? - 2.0 * lambda0 + probe.at(&[(j, -h)])?) / (h * h);
        for k in j + 1..beta {
            let pp = probe.at(&[(j, h), (k, h)])?;
            let pm = probe.at(&[(j, h), (k, -h)])?;
            let mp = probe.at(&[(j, -h), (k, h)])?;
            let mm = probe.at(&[(j, -h), (k, -h)])?;
            let x = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[(j, k)] = x;
            hess[(k, j)] = x;
        }
    }
    Ok(hess)
}

/// Richardson combination `(4 D(h/2) - D(h)) / 3` of the stencils of
/// [`hessian_fd`]; truncation error `O(h^4)`.
pub fn hessian_fd_extrapolated(
    g: &Graph,
    cs: &CycleStructure,
    level: usize,
    step: f64,
) -> Result<DMatrix<f64>> {
    check_level(g, level)?;
    let sd = eig(&build_plain(g))?;
    require_generic(g, cs, &sd, level)?;
    fd_hessian_extrapolated(g, cs, level, sd.eigenvalue(level), step)
}

fn fd_hessian_extrapolated(
    g: &Graph,
    cs: &CycleStructure,
    level: usize,
    lambda0: f64,
    h: f64,
) -> Result<DMatrix<f64>> {
    let coarse = fd_hessian(g, cs, level, lambda0, h)?;
    let fine = fd_hessian(g, cs, level, lambda0, 0.5 * h)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Hessian of `lambda_level(alpha)` at `alpha = 0` from second-order
/// perturbation theory:
///
/// `H_jk = <f, d2H/da_j da_k f> + 2 sum_{m != n} Re(<f, dH_j f_m><f_m, dH_k f>) / (lambda_n - lambda_m)`
///
/// where `dH_j` has `-i` at `(u_j, v_j)` and `+i` at `(v_j, u_j)`, and the
/// second derivative is `+1` at both positions of edge `j` (zero for `j != k`).
pub fn hessian_pt(g: &Graph, cs: &CycleStructure, level: usize) -> Result<DMatrix<f64>> {
    check_level(g, level)?;
    let sd = eig(&build_plain(g))?;
    require_generic(g, cs, &sd, level)?;
    Ok(pt_hessian(cs, &sd, level))
}

fn pt_hessian(cs: &CycleStructure, sd: &SpectralDecomposition, level: usize) -> DMatrix<f64> {
    let beta = cs.betti();
    let d = sd.dim();
    let n = level - 1;
    let f = sd.vector(level);
    let lambda = sd.eigenvalue(level);
    let i = Complex64::new(0.0, 1.0);

    // couplings[j][m] = <f, dH_j f_m>
    let couplings: Vec<Vec<Complex64>> = cs
        .surplus_edges()
        .iter()
        .map(|&(u, v)| {
            (0..d)
                .map(|m| {
                    let fm = sd.eigenvectors().column(m);
                    f[u].conj() * (-i) * fm[v] + f[v].conj() * i * fm[u]
                })
                .collect()
        })
        .collect();

    let mut hess = DMatrix::zeros(beta, beta);
    for j in 0..beta {
        let (u, v) = cs.surplus_edges()[j];
        hess[(j, j)] = 2.0 * (f[u].conj() * f[v]).re;
        for k in 0..beta {
            let mut acc = 0.0;
            for m in (0..d).filter(|&m| m != n) {
                let denom = lambda - sd.eigenvalues()[m];
                acc += (couplings[j][m] * couplings[k][m].conj()).re / denom;
            }
            hess[(j, k)] += 2.0 * acc;
        }
    }
    (&hess + hess.transpose()) * 0.5
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// Everything known about the critical point `alpha = 0` of one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalityReport {
    pub level: usize,
    pub eigenvalue: f64,
    pub betti: usize,
    pub generic: bool,
    /// Reason the level was excluded, if it was.
    pub skip_reason: Option<String>,
    pub phi: Option<usize>,
    pub surplus: Option<i64>,
    /// Finite-difference gradient at zero.
    pub gradient: Vec<f64>,
    /// `Im(conj(f_u) f_v)` per surplus edge.
    pub analytic_gradient: Vec<f64>,
    /// Perturbation-theory Hessian (the one classified).
    pub hessian: Vec<Vec<f64>>,
    pub hessian_fd: Vec<Vec<f64>>,
    /// Frobenius distance between the two Hessians.
    pub hessian_discrepancy: f64,
    pub hessian_cross_check_ok: bool,
    pub hessian_eigenvalues: Vec<f64>,
    pub inertia: Option<Inertia>,
    pub morse_index: Option<usize>,
    pub degenerate_hessian: bool,
    /// `morse_index == surplus`; `None` when the level is non-generic or the
    /// Hessian is degenerate.
    pub theorem_holds: Option<bool>,
}

impl CriticalityReport {
    pub fn gradient_max_abs(&self) -> f64 {
        self.gradient.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Full criticality report for one level of the plain operator.
pub fn morse_report(
    g: &Graph,
    cs: &CycleStructure,
    level: usize,
    config: &CriticalityConfig,
) -> Result<CriticalityReport> {
    check_level(g, level)?;
    let sd = eig(&build_plain(g))?;
    morse_report_with(g, cs, &sd, level, config)
}

/// As [`morse_report`], reusing a decomposition of the plain operator.
pub fn morse_report_with(
    g: &Graph,
    cs: &CycleStructure,
    sd: &SpectralDecomposition,
    level: usize,
    config: &CriticalityConfig,
) -> Result<CriticalityReport> {
    sd.check_level(level)?;
    let nodal = nodal_report(g, cs, sd, level)?;
    let mut report = CriticalityReport {
        level,
        eigenvalue: sd.eigenvalue(level),
        betti: cs.betti(),
        generic: nodal.generic,
        skip_reason: nodal.reason.clone(),
        phi: nodal.phi,
        surplus: nodal.surplus,
        gradient: Vec::new(),
        analytic_gradient: analytic_gradient(cs, sd, level),
        hessian: Vec::new(),
        hessian_fd: Vec::new(),
        hessian_discrepancy: 0.0,
        hessian_cross_check_ok: true,
        hessian_eigenvalues: Vec::new(),
        inertia: None,
        morse_index: None,
        degenerate_hessian: false,
        theorem_holds: None,
    };
    if !nodal.generic {
        return Ok(report);
    }

    report.gradient = fd_gradient(g, cs, level, config.gradient_step)?;
    let pt = pt_hessian(cs, sd, level);
    let fd = if config.fd_extrapolate {
        fd_hessian_extrapolated(g, cs, level, sd.eigenvalue(level), config.fd_step)?
    } else {
        fd_hessian(g, cs, level, sd.eigenvalue(level), config.fd_step)?
    };
    let norm = spectral_norm(&pt);
    report.hessian_discrepancy = (&pt - &fd).norm();
    report.hessian_cross_check_ok = report.hessian_discrepancy
        <= config.cross_check_abs.max(config.cross_check_rel * pt.norm());
    report.hessian_eigenvalues = if pt.is_empty() {
        Vec::new()
    } else {
        let mut mu = pt.clone().symmetric_eigenvalues().as_slice().to_vec();
        mu.sort_by(f64::total_cmp);
        mu
    };
    let inertia = Inertia::of_values(&report.hessian_eigenvalues, config.tol_hess_rel * norm.max(1.0));
    report.degenerate_hessian = inertia.n_zero > 0;
    report.inertia = Some(inertia);
    report.morse_index = Some(inertia.n_minus);
    report.hessian = to_rows(&pt);
    report.hessian_fd = to_rows(&fd);
    if report.degenerate_hessian {
        report.skip_reason = Some("DegenerateHessian".into());
    } else {
        report.theorem_holds = Some(nodal.surplus == Some(inertia.n_minus as i64));
    }
    Ok(report)
}
