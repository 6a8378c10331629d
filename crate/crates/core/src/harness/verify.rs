//! Ensemble verification: for every level of every random instance, gate on
//! genericity, then check the Morse index against the nodal surplus together
//! with the supporting identities (vanishing gradient, eigenvalue transfer to
//! the cut tree, Hessian cross-check, interlacing).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use super::io::GraphFile;
use super::random::{random_instance, InstanceSpec};
use super::SCHEMA_VERSION;
use crate::criticality::{morse_report_with, CriticalityConfig, CriticalityReport};
use crate::duality::{interlace_slacks, transfer, TransferRecord, INTERLACE_TOL};
use crate::graph::{CycleStructure, Graph};
use crate::operators::build_plain;
use crate::spectral::eig;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub criticality: CriticalityConfig,
    pub transfer_tol: f64,
    pub interlace_tol: f64,
    /// `(gamma, alpha)` spot checks per surplus edge: an `m x m` grid.
    pub interlace_grid: usize,
    /// Worker threads; `None` reads `NODALMAG_THREADS`, else uses all cores.
    pub threads: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            criticality: CriticalityConfig::default(),
            transfer_tol: 1e-9,
            interlace_tol: INTERLACE_TOL,
            interlace_grid: 3,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub instance: usize,
    pub graph: GraphFile,
    pub level: usize,
    pub reasons: Vec<String>,
    pub report: CriticalityReport,
    pub transfer: Option<TransferRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceError {
    pub instance: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub schema_version: u32,
    pub spec: Option<InstanceSpec>,
    pub instances: usize,
    pub levels_checked: usize,
    pub generic_levels: usize,
    pub passes: usize,
    pub fails: usize,
    pub skipped: usize,
    pub skipped_by_reason: BTreeMap<String, usize>,
    /// Levels skipped for a degenerate Hessian whose raw count of negative
    /// Hessian eigenvalues nevertheless equals the nodal surplus.
    pub degenerate_hessian_sign_matches: usize,
    /// Count of checked levels by Morse index.
    pub morse_histogram: BTreeMap<usize, usize>,
    pub max_gradient: f64,
    pub max_transfer_error: f64,
    /// Largest Hessian discrepancy relative to its tolerance.
    pub max_hessian_discrepancy_ratio: f64,
    pub min_interlace_slack: f64,
    pub failures: Vec<FailureRecord>,
    pub instance_errors: Vec<InstanceError>,
}

impl VerificationSummary {
    fn empty(spec: Option<InstanceSpec>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            spec,
            instances: 0,
            levels_checked: 0,
            generic_levels: 0,
            passes: 0,
            fails: 0,
            skipped: 0,
            skipped_by_reason: BTreeMap::new(),
            degenerate_hessian_sign_matches: 0,
            morse_histogram: BTreeMap::new(),
            max_gradient: 0.0,
            max_transfer_error: 0.0,
            max_hessian_discrepancy_ratio: 0.0,
            min_interlace_slack: f64::INFINITY,
            failures: Vec::new(),
            instance_errors: Vec::new(),
        }
    }

    /// No failed level and no instance that could not be processed.
    pub fn ok(&self) -> bool {
        self.fails == 0 && self.instance_errors.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("summary serializes");
        // JSON has no infinity; no surplus edges means no interlacing data
        if !self.min_interlace_slack.is_finite() {
            v["min_interlace_slack"] = serde_json::Value::Null;
        }
        serde_json::to_string_pretty(&v).expect("summary serializes")
    }

    fn absorb(&mut self, outcome: InstanceOutcome) {
        self.instances += 1;
        let graph = outcome.graph;
        for level in outcome.levels {
            self.levels_checked += 1;
            match level.status {
                LevelStatus::Skipped(reason) => {
                    self.skipped += 1;
                    *self.skipped_by_reason.entry(reason).or_insert(0) += 1;
                    if level.report.generic {
                        self.generic_levels += 1;
                    }
                    if level.report.degenerate_hessian {
                        let negative = level.report.hessian_eigenvalues.iter().filter(|&&m| m < 0.0).count();
                        if level.report.surplus == Some(negative as i64) {
                            self.degenerate_hessian_sign_matches += 1;
                        }
                    }
                    continue;
                }
                LevelStatus::Passed => self.passes += 1,
                LevelStatus::Failed(ref reasons) => {
                    self.fails += 1;
                    self.failures.push(FailureRecord {
                        instance: outcome.instance,
                        graph: GraphFile::from_graph(graph.as_ref().expect("levels imply a graph")),
                        level: level.report.level,
                        reasons: reasons.clone(),
                        report: level.report.clone(),
                        transfer: level.transfer.clone(),
                    });
                }
            }
            self.generic_levels += 1;
            if let Some(m) = level.report.morse_index {
                *self.morse_histogram.entry(m).or_insert(0) += 1;
            }
            self.max_gradient = self.max_gradient.max(level.report.gradient_max_abs());
            if let Some(t) = &level.transfer {
                self.max_transfer_error = self.max_transfer_error.max(t.eigenvalue_error);
            }
            self.max_hessian_discrepancy_ratio =
                self.max_hessian_discrepancy_ratio.max(level.hessian_ratio);
            self.min_interlace_slack = self.min_interlace_slack.min(level.interlace_slack);
        }
        if let Some(message) = outcome.error {
            self.instance_errors.push(InstanceError {
                instance: outcome.instance,
                message,
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum LevelStatus {
    Passed,
    Failed(Vec<String>),
    Skipped(String),
}

#[derive(Debug, Clone)]
struct LevelOutcome {
    report: CriticalityReport,
    transfer: Option<TransferRecord>,
    hessian_ratio: f64,
    interlace_slack: f64,
    status: LevelStatus,
}

#[derive(Debug, Clone)]
struct InstanceOutcome {
    instance: usize,
    graph: Option<Graph>,
    levels: Vec<LevelOutcome>,
    error: Option<String>,
}

/// Leading word of a nodal skip reason, e.g. `DegenerateEigenvalue`.
fn reason_key(reason: &str) -> String {
    reason.split(':').next().unwrap_or(reason).trim().to_string()
}

/// Minimum interlacing slack per level over a grid of `(gamma, alpha)` pairs
/// on every surplus edge. Grid points avoid `gamma = 0` and `alpha = 0`.
fn interlace_minima(g: &Graph, cs: &CycleStructure, m: usize) -> Result<Vec<f64>> {
    let mut minima = vec![f64::INFINITY; g.n_vertices()];
    for j in 0..cs.betti() {
        for a in 0..m {
            let alpha = -PI + 2.0 * PI * (a as f64 + 0.5) / m as f64;
            for c in 0..m {
                let x = -FRAC_PI_2 + (c as f64 + 0.25) * PI / m as f64;
                let slacks = interlace_slacks(g, cs, j, x.tan(), alpha)?;
                for (lo, s) in minima.iter_mut().zip(slacks) {
                    *lo = lo.min(s);
                }
            }
        }
    }
    Ok(minima)
}

fn verify_levels(g: &Graph, config: &VerifyConfig) -> Result<Vec<LevelOutcome>> {
    let cs = CycleStructure::new(g, None);
    let sd = eig(&build_plain(g))?;
    let interlace = interlace_minima(g, &cs, config.interlace_grid)?;
    let crit = &config.criticality;
    let mut out = Vec::with_capacity(g.n_vertices());
    for level in 1..=g.n_vertices() {
        let report = morse_report_with(g, &cs, &sd, level, crit)?;
        let skip = if !report.generic {
            Some(reason_key(report.skip_reason.as_deref().unwrap_or("NonGeneric")))
        } else if report.degenerate_hessian {
            Some("DegenerateHessian".to_string())
        } else {
            None
        };
        if let Some(reason) = skip {
            out.push(LevelOutcome {
                report,
                transfer: None,
                hessian_ratio: 0.0,
                interlace_slack: f64::INFINITY,
                status: LevelStatus::Skipped(reason),
            });
            continue;
        }

        let mut reasons = Vec::new();
        if report.theorem_holds != Some(true) {
            reasons.push(format!(
                "morse index {:?} differs from nodal surplus {:?}",
                report.morse_index, report.surplus
            ));
        }
        let phi = report.phi.expect("generic level has a nodal count");
        if phi + 1 < level || phi + 1 > level + cs.betti() {
            reasons.push(format!("nodal count {phi} outside [n-1, n-1+beta]"));
        }
        let grad = report.gradient_max_abs();
        if grad > crit.gradient_tol {
            reasons.push(format!("finite-difference gradient {grad:e} exceeds {:e}", crit.gradient_tol));
        }
        if report.analytic_gradient.iter().any(|&x| x != 0.0) {
            reasons.push("analytic gradient is not exactly zero".into());
        }
        let hess_tol = crit
            .cross_check_abs
            .max(crit.cross_check_rel * frobenius(&report.hessian));
        if !report.hessian_cross_check_ok {
            reasons.push(format!(
                "Hessian cross-check discrepancy {:e} exceeds {hess_tol:e}",
                report.hessian_discrepancy
            ));
        }
        let tr = transfer(g, &cs, &sd, level)?;
        if tr.eigenvalue_error > config.transfer_tol {
            reasons.push(format!(
                "cut-tree eigenvalue differs by {:e} (tolerance {:e})",
                tr.eigenvalue_error, config.transfer_tol
            ));
        }
        let slack = interlace[level - 1];
        if slack < -config.interlace_tol {
            reasons.push(format!("interlacing violated by {:e}", -slack));
        }
        let status = if reasons.is_empty() {
            LevelStatus::Passed
        } else {
            LevelStatus::Failed(reasons)
        };
        out.push(LevelOutcome {
            hessian_ratio: report.hessian_discrepancy / hess_tol,
            report,
            transfer: Some(tr),
            interlace_slack: slack,
            status,
        });
    }
    Ok(out)
}

fn frobenius(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn verify_instance(instance: usize, graph: Result<Graph>, config: &VerifyConfig) -> InstanceOutcome {
    match graph {
        Err(e) => InstanceOutcome {
            instance,
            graph: None,
            levels: Vec::new(),
            error: Some(e.to_string()),
        },
        Ok(g) => match verify_levels(&g, config) {
            Ok(levels) => InstanceOutcome {
                instance,
                graph: Some(g),
                levels,
                error: None,
            },
            Err(e) => InstanceOutcome {
                instance,
                graph: Some(g),
                levels: Vec::new(),
                error: Some(e.to_string()),
            },
        },
    }
}

/// Verifies a single graph, e.g. one embedded in a failure record.
pub fn verify_graph(g: &Graph, config: &VerifyConfig) -> VerificationSummary {
    let mut summary = VerificationSummary::empty(None);
    summary.absorb(verify_instance(0, Ok(g.clone()), config));
    summary
}

fn thread_count(config: &VerifyConfig) -> Option<usize> {
    config.threads.or_else(|| {
        std::env::var("NODALMAG_THREADS")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .filter(|&t: &usize| t > 0)
    })
}

#[cfg(feature = "parallel")]
fn run_all(spec: &InstanceSpec, config: &VerifyConfig) -> Vec<InstanceOutcome> {
    use rayon::prelude::*;
    let work = || {
        (0..spec.count)
            .into_par_iter()
            .map(|k| verify_instance(k, random_instance(spec, k), config))
            .collect()
    };
    match thread_count(config) {
        Some(1) => run_serial(spec, config),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(work),
            Err(_) => run_serial(spec, config),
        },
        None => work(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_all(spec: &InstanceSpec, config: &VerifyConfig) -> Vec<InstanceOutcome> {
    let _ = thread_count(config);
    run_serial(spec, config)
}

fn run_serial(spec: &InstanceSpec, config: &VerifyConfig) -> Vec<InstanceOutcome> {
    (0..spec.count)
        .map(|k| verify_instance(k, random_instance(spec, k), config))
        .collect()
}

/// Runs the ensemble described by `spec`. Instances may be processed in
/// parallel; results are merged in instance order, so the summary does not
/// depend on scheduling.
pub fn run_verify(spec: &InstanceSpec, config: &VerifyConfig) -> Result<VerificationSummary> {
    spec.validate()?;
    let mut outcomes = run_all(spec, config);
    outcomes.sort_by_key(|o| o.instance);
    let mut summary = VerificationSummary::empty(Some(spec.clone()));
    for o in outcomes {
        summary.absorb(o);
    }
    Ok(summary)
}
