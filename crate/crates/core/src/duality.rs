//! Magnetic phase versus cut on a single surplus edge: eigenvalue transfer to
//! the cut tree, interlacing, band extrema, and the scan tables behind the
//! band and duality plots.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::graph::{CycleStructure, Edge, Graph};
use crate::harness::io::graph_hash;
use crate::nodal::{nodal_report, sign_changes};
use crate::operators::{build_cut, build_plain, build_surgery, CutParams, SurplusEdgeMode};
use crate::spectral::{eig, eigenvalues, Inertia, SpectralDecomposition};
use crate::{Error, Result};

/// Absolute tolerance of the interlacing comparisons.
pub const INTERLACE_TOL: f64 = 1e-9;

/// The eigenpair of a level carried over to the tree obtained by cutting all
/// surplus edges with `gamma_j = f(v_j) / f(u_j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferRecord {
    pub level: usize,
    pub eigenvalue: f64,
    pub gamma_tilde: Vec<f64>,
    pub phi: usize,
    /// Number of negative `gamma_tilde` entries.
    pub p: usize,
    /// `phi - p + 1`: the position of the eigenvalue in the tree spectrum.
    pub cut_level: usize,
    pub cut_eigenvalue: f64,
    pub eigenvalue_error: f64,
    /// `|H_cut f - lambda f|`.
    pub residual: f64,
}

fn generic_vector(
    g: &Graph,
    cs: &CycleStructure,
    sd: &SpectralDecomposition,
    level: usize,
) -> Result<Vec<f64>> {
    let report = nodal_report(g, cs, sd, level)?;
    if !report.generic {
        return Err(Error::NonGenericLevel {
            level,
            reason: report.reason.unwrap_or_default(),
        });
    }
    Ok(sd.real_vector(level).expect("nodal report checked realness"))
}

fn gamma_tilde(cs: &CycleStructure, f: &[f64]) -> Vec<f64> {
    cs.surplus_edges().iter().map(|&(u, v)| f[v] / f[u]).collect()
}

pub fn transfer(
    g: &Graph,
    cs: &CycleStructure,
    sd: &SpectralDecomposition,
    level: usize,
) -> Result<TransferRecord> {
    let f = generic_vector(g, cs, sd, level)?;
    let gammas = gamma_tilde(cs, &f);
    let p = gammas.iter().filter(|&&x| x < 0.0).count();
    let phi = sign_changes(g, &f)?;
    let cut_level = phi + 1 - p;
    let cut = build_cut(g, cs, &CutParams::new(gammas.clone())?)?;
    let cut_values = eigenvalues(&cut);
    let lambda = sd.eigenvalue(level);
    let fv = nalgebra::DVector::from_vec(f);
    let residual = (cut.real_part() * &fv - &fv * lambda).norm();
    let cut_eigenvalue = cut_values[cut_level - 1];
    Ok(TransferRecord {
        level,
        eigenvalue: lambda,
        gamma_tilde: gammas,
        phi,
        p,
        cut_level,
        cut_eigenvalue,
        eigenvalue_error: (cut_eigenvalue - lambda).abs(),
        residual,
    })
}

/// Relative steps tried by the cut-tree gradient.
const GRADIENT_STEPS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
const BRANCH_OVERLAP: f64 = 0.9;

/// Critical point of the cut-tree eigenvalue `lambda_{phi-p+1}` as a function
/// of the cut parameters, at `gamma_tilde`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeIndexReport {
    pub level: usize,
    pub cut_level: usize,
    pub gamma_tilde: Vec<f64>,
    /// Distance from the eigenvalue to the rest of the cut-tree spectrum.
    pub cut_gap: f64,
    /// Five-point finite-difference gradient, step chosen per axis from a
    /// ladder of relative steps.
    pub gradient: Vec<f64>,
    /// `-f_u^2 + f_v^2 / gamma_j^2` per surplus edge.
    pub analytic_gradient: Vec<f64>,
    /// Finite-difference Hessian in the cut parameters.
    pub hessian: Vec<Vec<f64>>,
    /// `D H D` with `D = diag(|gamma_tilde|)`: the Hessian in the relative
    /// coordinates `gamma_j / gamma_tilde_j`. Congruent to `hessian`, so it has
    /// the same inertia, but its scale does not depend on the size of
    /// `gamma_tilde`. The inertia is classified from this matrix.
    pub relative_hessian: Vec<Vec<f64>>,
    /// Perturbation-theory Hessian of the cut-tree operator, relative
    /// coordinates.
    pub relative_hessian_pt: Vec<Vec<f64>>,
    pub inertia: Inertia,
    pub inertia_pt: Inertia,
    pub degenerate_hessian: bool,
    /// `n - 1 + beta - phi`.
    pub expected_index: usize,
    /// Finite-difference index equals `expected_index` on a nondegenerate
    /// Hessian.
    pub matches: bool,
    pub matches_pt: bool,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn classify(m: &DMatrix<f64>) -> Inertia {
    let norm = if m.is_empty() {
        0.0
    } else {
        m.clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |acc, x| acc.max(x.abs()))
    };
    Inertia::of_symmetric(m, 1e-5 * norm.max(1.0))
}

/// Gradient and Hessian of the cut-tree eigenvalue at `gamma_tilde`. The
/// finite-difference Hessian uses step `rel_step * |gamma_tilde_j|` along
/// axis `j`, Richardson-combined with half the step; a second Hessian comes
/// from perturbation theory of the cut-tree operator.
pub fn tree_index(
    g: &Graph,
    cs: &CycleStructure,
    sd: &SpectralDecomposition,
    level: usize,
    rel_step: f64,
) -> Result<TreeIndexReport> {
    let f = generic_vector(g, cs, sd, level)?;
    let rec = transfer(g, cs, sd, level)?;
    let beta = cs.betti();
    let base = rec.gamma_tilde.clone();
    // the sorted-index eigenvalue, with the overlap of its eigenvector with f
    let eval_overlap = |shifts: &[(usize, f64)]| -> Result<(f64, f64)> {
        let mut gamma = base.clone();
        for &(j, dx) in shifts {
            gamma[j] += dx;
        }
        let sd = eig(&build_cut(g, cs, &CutParams::new(gamma)?)?)?;
        let m = rec.cut_level - 1;
        let overlap = sd
            .eigenvectors()
            .column(m)
            .iter()
            .zip(&f)
            .map(|(z, x)| z.re * x)
            .sum::<f64>()
            .abs();
        Ok((sd.eigenvalues()[m], overlap))
    };
    let eval = |shifts: &[(usize, f64)]| eval_overlap(shifts).map(|(value, _)| value);
    let steps: Vec<f64> = base.iter().map(|x| rel_step * x.abs()).collect();

    // five-point derivatives on a ladder of steps; keep the estimate where
    // two consecutive steps agree best (truncation error dominates above
    // that step, rounding below it)
    // a step is discarded when another cut-tree eigenvalue crosses the level
    // inside the stencil, seen as the eigenvector losing its overlap with f
    let mut gradient = Vec::with_capacity(beta);
    for j in 0..beta {
        let mut ladder = Vec::with_capacity(GRADIENT_STEPS.len());
        for &rel in &GRADIENT_STEPS {
            let h = rel * base[j].abs();
            let mut values = [0.0; 4];
            let mut clean = true;
            for (value, dx) in values.iter_mut().zip([2.0 * h, h, -h, -2.0 * h]) {
                let (lambda, overlap) = eval_overlap(&[(j, dx)])?;
                *value = lambda;
                clean &= overlap > BRANCH_OVERLAP;
            }
            let estimate = (-values[0] + 8.0 * values[1] - 8.0 * values[2] + values[3]) / (12.0 * h);
            ladder.push((estimate, clean));
        }
        let mut estimates: Vec<f64> = ladder.iter().filter(|e| e.1).map(|e| e.0).collect();
        if estimates.is_empty() {
            estimates.push(ladder[ladder.len() - 1].0);
        }
        let best = estimates
            .windows(2)
            .min_by(|a, b| (a[0] - a[1]).abs().total_cmp(&(b[0] - b[1]).abs()))
            .map_or(estimates[0], |w| w[1]);
        gradient.push(best);
    }
    let analytic_gradient = cs
        .surplus_edges()
        .iter()
        .zip(&base)
        .map(|(&(u, v), &gm)| -f[u] * f[u] + f[v] * f[v] / (gm * gm))
        .collect();

    let center = rec.eigenvalue;
    let stencil = |shrink: f64| -> Result<DMatrix<f64>> {
        let mut hess = DMatrix::zeros(beta, beta);
        for j in 0..beta {
            let hj = steps[j] * shrink;
            hess[(j, j)] = (eval(&[(j, hj)])? - 2.0 * center + eval(&[(j, -hj)])?) / (hj * hj);
            for k in j + 1..beta {
                let hk = steps[k] * shrink;
                let x = (eval(&[(j, hj), (k, hk)])? - eval(&[(j, hj), (k, -hk)])?
                    - eval(&[(j, -hj), (k, hk)])?
                    + eval(&[(j, -hj), (k, -hk)])?)
                    / (4.0 * hj * hk);
                hess[(j, k)] = x;
                hess[(k, j)] = x;
            }
        }
        Ok(hess)
    };
    let hess = (stencil(0.5)? * 4.0 - stencil(1.0)?) / 3.0;

    let cut_sd = eig(&build_cut(g, cs, &CutParams::new(base.clone())?)?)?;
    let cut_gap = cut_sd.gap(rec.cut_level);
    let pt = cut_hessian_pt(cs, &cut_sd, rec.cut_level, &base);

    let scale = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        beta,
        base.iter().map(|x| x.abs()),
    ));
    let relative = &scale * &hess * &scale;
    let relative_pt = &scale * &pt * &scale;
    let inertia = classify(&relative);
    let inertia_pt = classify(&relative_pt);
    let expected_index = level - 1 + beta - rec.phi;
    Ok(TreeIndexReport {
        level,
        cut_level: rec.cut_level,
        gamma_tilde: base,
        cut_gap,
        gradient,
        analytic_gradient,
        hessian: rows(&hess),
        relative_hessian: rows(&relative),
        relative_hessian_pt: rows(&relative_pt),
        degenerate_hessian: inertia.n_zero > 0,
        matches: inertia.n_zero == 0 && inertia.n_minus == expected_index,
        matches_pt: inertia_pt.n_zero == 0 && inertia_pt.n_minus == expected_index,
        inertia,
        inertia_pt,
        expected_index,
    })
}

/// Second-order perturbation Hessian of `lambda_level` of the cut-tree
/// operator in the cut parameters. `dH/dgamma_j` is `-1` at `u_j` and
/// `1/gamma_j^2` at `v_j` on the diagonal; the second derivative is
/// `-2/gamma_j^3` at `v_j`.
fn cut_hessian_pt(
    cs: &CycleStructure,
    sd: &SpectralDecomposition,
    level: usize,
    gamma: &[f64],
) -> DMatrix<f64> {
    let beta = cs.betti();
    let d = sd.dim();
    let n = level - 1;
    let lambda = sd.eigenvalue(level);
    let f = sd.vector(level);
    let couplings: Vec<Vec<f64>> = cs
        .surplus_edges()
        .iter()
        .zip(gamma)
        .map(|(&(u, v), &gm)| {
            (0..d)
                .map(|m| {
                    let fm = sd.eigenvectors().column(m);
                    (-f[u].conj() * fm[u] + f[v].conj() * fm[v] / (gm * gm)).re
                })
                .collect()
        })
        .collect();
    let mut hess = DMatrix::zeros(beta, beta);
    for (j, (&(_, v), &gm)) in cs.surplus_edges().iter().zip(gamma).enumerate() {
        hess[(j, j)] = -2.0 * f[v].norm_sqr() / (gm * gm * gm);
    }
    for j in 0..beta {
        for k in 0..beta {
            let mut acc = 0.0;
            for m in (0..d).filter(|&m| m != n) {
                acc += couplings[j][m] * couplings[k][m] / (lambda - sd.eigenvalue(m + 1));
            }
            hess[(j, k)] += 2.0 * acc;
        }
    }
    hess
}

/// Operator with phase `alpha` on surplus edge `j`, every other edge intact.
fn single_phase(g: &Graph, cs: &CycleStructure, j: usize, alpha: f64) -> Result<Vec<f64>> {
    let mut modes = vec![SurplusEdgeMode::Bond; cs.betti()];
    modes[j] = SurplusEdgeMode::Phase(alpha);
    Ok(eigenvalues(&build_surgery(g, cs, &modes)?))
}

/// Operator with surplus edge `j` cut with parameter `gamma`.
fn single_cut(g: &Graph, cs: &CycleStructure, j: usize, gamma: f64) -> Result<Vec<f64>> {
    let mut modes = vec![SurplusEdgeMode::Bond; cs.betti()];
    modes[j] = SurplusEdgeMode::Cut(gamma);
    Ok(eigenvalues(&build_surgery(g, cs, &modes)?))
}

/// `lambda_index` with `-inf` below the spectrum and `+inf` above it.
fn extended(values: &[f64], index: isize) -> f64 {
    if index < 1 {
        f64::NEG_INFINITY
    } else if index as usize > values.len() {
        f64::INFINITY
    } else {
        values[index as usize - 1]
    }
}

/// Per level `n`, the smaller of `lambda_n(mag) - lambda_{n-p}(cut)` and
/// `lambda_{n-p+1}(cut) - lambda_n(mag)`, where edge `j` carries phase `alpha`
/// in the magnetic operator and is cut with `gamma` in the other. Negative
/// slack is a violation.
pub fn interlace_slacks(
    g: &Graph,
    cs: &CycleStructure,
    j: usize,
    gamma: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    cs.check_index(j)?;
    let cut = single_cut(g, cs, j, gamma)?;
    let mag = single_phase(g, cs, j, alpha)?;
    Ok(interlace_from_spectra(&mag, &cut, gamma))
}

pub(crate) fn interlace_from_spectra(mag: &[f64], cut: &[f64], gamma: f64) -> Vec<f64> {
    let p = isize::from(gamma < 0.0);
    (1..=mag.len() as isize)
        .map(|n| {
            let lam = mag[n as usize - 1];
            let lower = lam - extended(cut, n - p);
            let upper = extended(cut, n - p + 1) - lam;
            lower.min(upper)
        })
        .collect()
}

/// Whether the interlacing inequalities hold at every level for this
/// `(gamma, alpha)` pair, to [`INTERLACE_TOL`].
pub fn interlace_check(g: &Graph, cs: &CycleStructure, j: usize, gamma: f64, alpha: f64) -> Result<bool> {
    Ok(interlace_slacks(g, cs, j, gamma, alpha)?
        .iter()
        .all(|&s| s >= -INTERLACE_TOL))
}

/// Extrema of the band `lambda_n(alpha)` and of the cut curves for one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelExtrema {
    pub level: usize,
    pub min_alpha: f64,
    pub max_alpha: f64,
    /// `max_gamma lambda_{n - p(gamma)}(cut)`.
    pub max_lower_cut: f64,
    /// `min_gamma lambda_{n - p(gamma) + 1}(cut)`.
    pub min_upper_cut: f64,
    pub lambda_plain: f64,
    /// `lambda_n` with phase `pi` on the edge.
    pub lambda_hat: f64,
    /// `|max_lower_cut - min_alpha|`.
    pub lower_error: f64,
    /// `|max_alpha - min_upper_cut|`.
    pub upper_error: f64,
    /// The plain eigenvalue sits at the band minimum.
    pub plain_is_min: bool,
    /// The plain eigenvalue sits at the band maximum.
    pub plain_is_max: bool,
    /// The extremum not taken by the plain eigenvalue equals `lambda_hat`.
    pub hat_is_complement: bool,
    pub flat_band: bool,
    pub surplus: Option<i64>,
    /// For `beta = 1`: `surplus == 0` iff the plain eigenvalue is the minimum.
    pub consistent_with_surplus: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremaReport {
    pub edge: Edge,
    pub samples: usize,
    pub tolerance: f64,
    pub levels: Vec<LevelExtrema>,
}

impl ExtremaReport {
    pub fn all_match(&self) -> bool {
        self.levels.iter().all(|l| {
            l.lower_error <= self.tolerance
                && l.upper_error <= self.tolerance
                && (l.plain_is_min || l.plain_is_max)
                && l.hat_is_complement
                && l.consistent_with_surplus != Some(false)
        })
    }
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
fn golden_max(mut a: f64, mut b: f64, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximum of `f` given its values on a sorted grid, refined by golden
/// section between the neighbours of the best grid point. Non-finite values
/// are ignored.
fn refined_max(grid: &[f64], values: &[f64], f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let best = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1));
    let Some((k, &v)) = best else {
        return f64::NEG_INFINITY;
    };
    let a = if k > 0 { grid[k - 1] } else { lo };
    let b = if k + 1 < grid.len() { grid[k + 1] } else { hi };
    let (_, refined) = golden_max(a, b, &|x| {
        let y = f(x);
        if y.is_finite() {
            y
        } else {
            f64::NEG_INFINITY
        }
    });
    v.max(refined)
}

/// Band and cut extrema for every level, scanning surplus edge `edge` with
/// `samples` points in `alpha` over `[-pi, pi]` and in `x = atan(gamma)`
/// over `(-pi/2, pi/2)`. Other surplus edges keep their ordinary coupling.
pub fn extrema_match(g: &Graph, cs: &CycleStructure, edge: Edge, samples: usize) -> Result<ExtremaReport> {
    if samples < 3 {
        return Err(Error::TooFewSamples { min: 3, got: samples });
    }
    let j = cs.require_surplus(g, edge)?;
    let d = g.n_vertices();
    let tolerance = 1e-6;
    let plain_sd = eig(&build_plain(g))?;
    let hat = single_phase(g, cs, j, PI)?;

    let alpha_grid: Vec<f64> = (0..samples)
        .map(|k| -PI + 2.0 * PI * k as f64 / (samples - 1) as f64)
        .collect();
    // x = 0 (gamma = 0) and x = +-pi/2 (gamma = inf) are excluded
    let edge_eps = 1e-9;
    let x_grid: Vec<f64> = (1..samples)
        .map(|k| -FRAC_PI_2 + PI * k as f64 / samples as f64)
        .filter(|x| x.abs() > edge_eps)
        .collect();
    let mag_spectra = alpha_grid
        .iter()
        .map(|&a| single_phase(g, cs, j, a))
        .collect::<Result<Vec<_>>>()?;
    let cut_spectra = x_grid
        .iter()
        .map(|&x| single_cut(g, cs, j, x.tan()))
        .collect::<Result<Vec<_>>>()?;

    let mut levels = Vec::with_capacity(d);
    for level in 1..=d {
        let n = level as isize;
        let mag_at = |a: f64| single_phase(g, cs, j, a).map(|v| v[level - 1]).unwrap_or(f64::NAN);
        let cut_index = |x: f64, shift: isize| n - isize::from(x < 0.0) + shift;
        let cut_at = |x: f64, shift: isize| {
            if x.abs() <= edge_eps || FRAC_PI_2 - x.abs() <= edge_eps {
                return f64::NAN;
            }
            match single_cut(g, cs, j, x.tan()) {
                Ok(v) => extended(&v, cut_index(x, shift)),
                Err(_) => f64::NAN,
            }
        };
        let band: Vec<f64> = mag_spectra.iter().map(|v| v[level - 1]).collect();
        let neg_band: Vec<f64> = band.iter().map(|v| -v).collect();
        let lower: Vec<f64> = x_grid
            .iter()
            .zip(&cut_spectra)
            .map(|(&x, v)| extended(v, cut_index(x, 0)))
            .collect();
        let neg_upper: Vec<f64> = x_grid
            .iter()
            .zip(&cut_spectra)
            .map(|(&x, v)| -extended(v, cut_index(x, 1)))
            .collect();

        let max_alpha = refined_max(&alpha_grid, &band, &mag_at, -PI, PI);
        let min_alpha = -refined_max(&alpha_grid, &neg_band, &|a| -mag_at(a), -PI, PI);
        let max_lower_cut = refined_max(&x_grid, &lower, &|x| cut_at(x, 0), -FRAC_PI_2, FRAC_PI_2);
        let min_upper_cut =
            -refined_max(&x_grid, &neg_upper, &|x| -cut_at(x, 1), -FRAC_PI_2, FRAC_PI_2);

        let lambda_plain = plain_sd.eigenvalue(level);
        let lambda_hat = hat[level - 1];
        let plain_is_min = (min_alpha - lambda_plain).abs() <= tolerance;
        let plain_is_max = (max_alpha - lambda_plain).abs() <= tolerance;
        let hat_is_complement = if plain_is_min && plain_is_max {
            (lambda_hat - lambda_plain).abs() <= tolerance
        } else if plain_is_min {
            (max_alpha - lambda_hat).abs() <= tolerance
        } else {
            (min_alpha - lambda_hat).abs() <= tolerance
        };
        let nodal = nodal_report(g, cs, &plain_sd, level)?;
        let consistent_with_surplus = match (cs.betti(), nodal.surplus) {
            (1, Some(0)) => Some(plain_is_min),
            (1, Some(1)) => Some(plain_is_max),
            (1, Some(_)) => Some(false),
            _ => None,
        };
        levels.push(LevelExtrema {
            level,
            min_alpha,
            max_alpha,
            max_lower_cut,
            min_upper_cut,
            lambda_plain,
            lambda_hat,
            lower_error: (max_lower_cut - min_alpha).abs(),
            upper_error: (max_alpha - min_upper_cut).abs(),
            plain_is_min,
            plain_is_max,
            hat_is_complement,
            flat_band: (max_alpha - min_alpha).abs() <= tolerance,
            surplus: nodal.surplus,
            consistent_with_surplus,
        });
    }
    let (u, v) = cs.surplus_edges()[j];
    Ok(ExtremaReport {
        edge: (u, v),
        samples,
        tolerance,
        levels,
    })
}

/// Tabulated spectra over a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub schema_version: u32,
    pub kind: String,
    /// Names of the coordinate columns (`x`, or `alpha_1`, `alpha_2`, ...).
    pub coordinates: Vec<String>,
    /// Names of the value columns.
    pub columns: Vec<String>,
    pub rows: Vec<ScanRow>,
    pub metadata: ScanMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub coords: Vec<f64>,
    /// `None` where the value is undefined (cut at `gamma = 0` or infinity).
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanMetadata {
    pub graph_hash: String,
    pub n_vertices: usize,
    pub betti: usize,
    pub seed: Option<u64>,
    pub edge: Option<Edge>,
    pub grid: String,
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl ScanTable {
    /// CSV with one header row; 17 significant digits; empty cells for
    /// undefined values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self
            .coordinates
            .iter()
            .chain(&self.columns)
            .map(String::as_str)
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .coords
                .iter()
                .map(|&x| fmt17(x))
                .chain(row.values.iter().map(|v| v.map(fmt17).unwrap_or_default()))
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan table serializes")
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }
}

fn level_columns(prefix: &str, levels: &[usize]) -> Vec<String> {
    levels.iter().map(|l| format!("{prefix}_l{l}")).collect()
}

/// Spectra of the magnetic operator with `alpha = 2x` and of the cut operator
/// with `gamma = tan x` on surplus edge `edge`, for `x = -pi/2 + k pi / m`,
/// `k = 1..=m`, together with the reference levels of the plain graph and
/// of the graph with phase `pi`.
pub fn dual_scan(g: &Graph, cs: &CycleStructure, edge: Edge, samples: usize) -> Result<ScanTable> {
    if samples < 3 {
        return Err(Error::TooFewSamples { min: 3, got: samples });
    }
    let j = cs.require_surplus(g, edge)?;
    let d = g.n_vertices();
    let levels: Vec<usize> = (1..=d).collect();
    let plain = eigenvalues(&build_plain(g));
    let hat = single_phase(g, cs, j, PI)?;

    let mut columns = level_columns("mag", &levels);
    columns.extend(level_columns("cut", &levels));
    columns.extend(level_columns("ref_gamma", &levels));
    columns.extend(level_columns("ref_gammahat", &levels));

    let rows = (1..=samples)
        .map(|k| {
            let x = -FRAC_PI_2 + PI * k as f64 / samples as f64;
            let mag = single_phase(g, cs, j, 2.0 * x)?;
            let cut_defined = x.abs() > 1e-12 && FRAC_PI_2 - x.abs() > 1e-12;
            let cut = if cut_defined {
                Some(single_cut(g, cs, j, x.tan())?)
            } else {
                None
            };
            let mut values: Vec<Option<f64>> = mag.iter().map(|&v| Some(v)).collect();
            match &cut {
                Some(c) => values.extend(c.iter().map(|&v| Some(v))),
                None => values.extend(std::iter::repeat(None).take(d)),
            }
            values.extend(plain.iter().map(|&v| Some(v)));
            values.extend(hat.iter().map(|&v| Some(v)));
            Ok(ScanRow {
                coords: vec![x],
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (u, v) = cs.surplus_edges()[j];
    Ok(ScanTable {
        schema_version: crate::harness::SCHEMA_VERSION,
        kind: "dual".into(),
        coordinates: vec!["x".into()],
        columns,
        rows,
        metadata: ScanMetadata {
            graph_hash: graph_hash(g),
            n_vertices: d,
            betti: cs.betti(),
            seed: None,
            edge: Some((u, v)),
            grid: format!("x = -pi/2 + k*pi/{samples}, k = 1..={samples}; alpha = 2x, gamma = tan(x)"),
        },
    })
}

/// Bands `lambda_n(alpha)` on the grid `alpha = -pi + 2 pi k / m`,
/// `k = 1..=m` per axis: the full product grid for `beta <= 2`, one axis at a
/// time (others at zero) for larger `beta`. `level = None` tabulates every
/// level.
pub fn band_scan(
    g: &Graph,
    cs: &CycleStructure,
    level: Option<usize>,
    samples: usize,
) -> Result<ScanTable> {
    if samples < 1 {
        return Err(Error::TooFewSamples { min: 1, got: samples });
    }
    let d = g.n_vertices();
    let levels: Vec<usize> = match level {
        Some(l) if l == 0 || l > d => return Err(Error::LevelOutOfRange { level: l, dim: d }),
        Some(l) => vec![l],
        None => (1..=d).collect(),
    };
    let beta = cs.betti();
    let axis: Vec<f64> = (1..=samples)
        .map(|k| -PI + 2.0 * PI * k as f64 / samples as f64)
        .collect();
    let points: Vec<Vec<f64>> = match beta {
        0 => vec![Vec::new()],
        1 => axis.iter().map(|&a| vec![a]).collect(),
        2 => axis
            .iter()
            .flat_map(|&a| axis.iter().map(move |&b| vec![a, b]))
            .collect(),
        _ => (0..beta)
            .flat_map(|j| {
                axis.iter().map(move |&a| {
                    let mut p = vec![0.0; beta];
                    p[j] = a;
                    p
                })
            })
            .collect(),
    };
    let plain = eigenvalues(&build_plain(g));
    let mut columns = level_columns("mag", &levels);
    columns.extend(level_columns("ref_gamma", &levels));
    let rows = points
        .into_iter()
        .map(|alpha| {
            let modes: Vec<_> = alpha.iter().map(|&a| SurplusEdgeMode::Phase(a)).collect();
            let values = eigenvalues(&build_surgery(g, cs, &modes)?);
            let mut row: Vec<Option<f64>> = levels.iter().map(|&l| Some(values[l - 1])).collect();
            row.extend(levels.iter().map(|&l| Some(plain[l - 1])));
            Ok(ScanRow {
                coords: alpha,
                values: row,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = match beta {
        0 => "no surplus edges".to_string(),
        1 | 2 => format!("alpha_j = -pi + 2*pi*k/{samples}, k = 1..={samples}, full grid"),
        _ => format!("alpha_j = -pi + 2*pi*k/{samples}, k = 1..={samples}, axis slices"),
    };
    Ok(ScanTable {
        schema_version: crate::harness::SCHEMA_VERSION,
        kind: "band".into(),
        coordinates: (1..=beta).map(|j| format!("alpha_{j}")).collect(),
        columns,
        rows,
        metadata: ScanMetadata {
            graph_hash: graph_hash(g),
            n_vertices: d,
            betti: beta,
            seed: None,
            edge: None,
            grid,
        },
    })
}
