//! Element marking (greedy and Dörfler) and the adaptive
//! solve, estimate, mark, refine loop.

use std::fmt::Write as _;

use crate::assembly::SolverOptions;
use crate::conformity::update_gdof;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, NodeId};
use crate::poisson::{compute_exact_error, residuals, Problem};

/// Squared element indicators with their maximum and sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSummary {
    pub elements: Vec<(NodeId, f64)>,
    pub error_max: f64,
    pub error_glob: f64,
}

impl ErrorSummary {
    pub fn new(elements: Vec<(NodeId, f64)>) -> Self {
        let error_max = elements.iter().fold(0.0f64, |m, e| m.max(e.1));
        let error_glob = elements.iter().map(|e| e.1).sum();
        Self {
            elements,
            error_max,
            error_glob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkingStrategy {
    Greedy,
    Doerfler,
}

impl MarkingStrategy {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "greedy" => Some(Self::Greedy),
            "doerfler" | "dorfler" => Some(Self::Doerfler),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkingConfig {
    pub strategy: MarkingStrategy,
    pub perc: f64,
}

impl MarkingConfig {
    pub fn new(strategy: MarkingStrategy, perc: f64) -> Result<Self> {
        if !(perc > 0.0 && perc <= 1.0) {
            return Err(Error::Config(format!("marking coefficient {perc} outside (0,1]")));
        }
        Ok(Self { strategy, perc })
    }
}

/// Elements selected by the marking rule, in the rule's order.
pub fn select(summary: &ErrorSummary, config: &MarkingConfig) -> Result<Vec<NodeId>> {
    if summary.elements.is_empty() {
        return Err(Error::Mesh("no active elements to mark".into()));
    }
    match config.strategy {
        MarkingStrategy::Greedy => {
            let thr = config.perc * summary.error_max;
            Ok(summary.elements.iter().filter(|e| e.1 > thr).map(|e| e.0).collect())
        }
        MarkingStrategy::Doerfler => {
            let mut sorted = summary.elements.clone();
            sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let thr = config.perc * summary.error_glob;
            let mut acc = 0.0;
            let mut out = Vec::new();
            for (m, e) in sorted {
                out.push(m);
                acc += e;
                if acc > thr {
                    break;
                }
            }
            Ok(out)
        }
    }
}

/// Marked elements paired with their refinement flag.
pub fn mark_elements(mesh: &Mesh, summary: &ErrorSummary, config: &MarkingConfig) -> Result<Vec<(NodeId, u32)>> {
    select(summary, config)?
        .into_iter()
        .map(|m| Ok((m, mesh.get_isoref(m)?)))
        .collect()
}

/// Refine the marked elements, close the mesh and update geometry dofs.
pub fn refine_marked(mesh: &mut Mesh, marked: &[(NodeId, u32)]) -> Result<()> {
    for &(m, kref) in marked {
        mesh.refine_element_raw(m, kref)?;
    }
    mesh.refresh();
    mesh.close_mesh()?;
    update_gdof(mesh);
    Ok(())
}

/// Element indicators: DPG residuals, or exact element errors for Galerkin.
pub fn estimate(mesh: &Mesh, problem: &Problem) -> Result<ErrorSummary> {
    if problem.kind.is_dpg() {
        return Ok(ErrorSummary::new(residuals(mesh, problem)?));
    }
    if problem.exact.is_none() {
        return Err(Error::Config(
            "no error estimator: Galerkin problem without a manufactured solution".into(),
        ));
    }
    let e = compute_exact_error(mesh, problem)?;
    Ok(ErrorSummary::new(e.per_element.iter().map(|&(m, h1, _)| (m, h1)).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub step: usize,
    pub nreles: usize,
    pub ndof: usize,
    /// Square root of the global indicator.
    pub estimator: f64,
    pub exact_error: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct AdaptiveHistory {
    pub rows: Vec<HistoryRow>,
    /// Elements marked after each step.
    pub marked: Vec<Vec<NodeId>>,
}

impl AdaptiveHistory {
    pub fn to_csv(&self) -> String {
        history_csv(&self.rows)
    }
}

pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut s = String::from("step,nreles,ndof,estimator,exact_error\n");
    for r in rows {
        let ex = r.exact_error.map(|e| format!("{e:.6e}")).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{:.6e},{}", r.step, r.nreles, r.ndof, r.estimator, ex);
    }
    s
}

/// Adaptive loop: at most `max_steps` refinement rounds, stopping early once
/// the estimator drops to `tol`. `on_step` sees every solved mesh.
pub fn adaptive_loop(
    mesh: &mut Mesh,
    problem: &Problem,
    marking: &MarkingConfig,
    tol: f64,
    max_steps: usize,
    opts: &SolverOptions,
    mut on_step: impl FnMut(usize, &Mesh) -> Result<()>,
) -> Result<AdaptiveHistory> {
    if !problem.kind.is_dpg() && problem.exact.is_none() {
        return Err(Error::Config(
            "no error estimator: Galerkin problem without a manufactured solution".into(),
        ));
    }
    let mut hist = AdaptiveHistory::default();
    for step in 1.. {
        let rep = problem.solve(mesh, opts)?;
        let summary = estimate(mesh, problem)?;
        let exact = match problem.exact {
            Some(_) => Some(compute_exact_error(mesh, problem)?.h1),
            None => None,
        };
        let est = summary.error_glob.sqrt();
        log::info!(
            "step {step}: {} elements, {} dofs, estimator {est:.4e}",
            rep.nreles,
            rep.ndof
        );
        hist.rows.push(HistoryRow {
            step,
            nreles: rep.nreles,
            ndof: rep.ndof,
            estimator: est,
            exact_error: exact,
        });
        on_step(step, mesh)?;
        if est <= tol || step > max_steps {
            break;
        }
        let marked = mark_elements(mesh, &summary, marking)?;
        hist.marked.push(marked.iter().map(|m| m.0).collect());
        refine_marked(mesh, &marked)?;
    }
    Ok(hist)
}
