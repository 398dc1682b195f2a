//! Batch jobs.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::{bail, Context, Result};

use hpfem::adapt::adaptive_loop;
use hpfem::assembly::{SolverKind, SolverOptions};
use hpfem::conformity::update_gdof;
use hpfem::mesh::{RefinementKind, KREF_ISO};
use hpfem::poisson::{compute_exact_error, residuals, ManufacturedSolution, Problem, ProblemKind};

use crate::Session;

pub fn exec_job(job: i64, s: &mut Session, out: &mut dyn Write) -> Result<()> {
    match job {
        1 => uniform_study(s, out),
        2 => adaptive_run(s, out),
        3 => patch_tests(s, out),
        _ => bail!("unknown job {job} (expected 1, 2 or 3)"),
    }
}

/// Global h-refinement study: one CSV row per mesh.
fn uniform_study(s: &mut Session, out: &mut dyn Write) -> Result<()> {
    if s.problem.exact.is_none() {
        bail!("job 1 needs NEXACT=1 in the control file");
    }
    let mut csv = String::from("step,nreles,ndof,h1_error,l2_error,rate_h1,rate_l2,residual\n");
    let mut prev: Option<(f64, f64)> = None;
    for step in 1..=s.max_steps.max(1) {
        if step > 1 {
            s.mesh.global_refinement(RefinementKind::Href)?;
            update_gdof(&mut s.mesh);
        }
        let rep = s.problem.solve(&mut s.mesh, &s.opts)?;
        let e = compute_exact_error(&s.mesh, &s.problem)?;
        let rates = prev
            .map(|(h1, l2)| (format!("{:.4}", (h1 / e.h1).log2()), format!("{:.4}", (l2 / e.l2).log2())))
            .unwrap_or_default();
        let res = if s.problem.kind.is_dpg() {
            let r: f64 = residuals(&s.mesh, &s.problem)?.iter().map(|r| r.1).sum();
            format!("{:.6e}", r.sqrt())
        } else {
            String::new()
        };
        let _ = writeln!(
            csv,
            "{step},{},{},{:.6e},{:.6e},{},{},{res}",
            rep.nreles, rep.ndof, e.h1, e.l2, rates.0, rates.1
        );
        prev = Some((e.h1, e.l2));
        if let Some(pv) = s.paraview.as_mut() {
            pv.export(&s.mesh, &s.problem.physics, "uniform")?;
        }
    }
    s.solved = true;
    out.write_all(csv.as_bytes())?;
    Ok(())
}

fn adaptive_run(s: &mut Session, out: &mut dyn Write) -> Result<()> {
    let Session {
        problem,
        mesh,
        opts,
        marking,
        tol,
        max_steps,
        paraview,
        ..
    } = s;
    let hist = adaptive_loop(mesh, problem, marking, *tol, *max_steps, opts, |_, m| {
        if let Some(pv) = paraview.as_mut() {
            pv.export(m, &problem.physics, "adapt")?;
        }
        Ok(())
    })
    .context("adaptive run")?;
    s.solved = true;
    out.write_all(hist.to_csv().as_bytes())?;
    Ok(())
}

/// `u = x` on one element and on a 1-irregular mesh, all discretizations.
fn patch_tests(s: &Session, out: &mut dyn Write) -> Result<()> {
    let opts = SolverOptions {
        solver: SolverKind::Dense,
        exec: s.opts.exec,
        ..Default::default()
    };
    let mut failed = 0;
    for (kind, p) in [(ProblemKind::Galerkin, 1), (ProblemKind::PrimalDpg, 1), (ProblemKind::UwDpg, 2)] {
        let mut pr = Problem::new(kind, Some(ManufacturedSolution::Linear), s.problem.dp);
        pr.exec = s.problem.exec;
        for irregular in [false, true] {
            let n = if irregular { 2 } else { 1 };
            let mut m = pr.brick_mesh([n; 3], [0.0; 3], [1.0; 3], p)?;
            if irregular {
                let first = m.elem_order()[0];
                m.refine_element(first, KREF_ISO)?;
                m.close_mesh()?;
            }
            pr.solve(&mut m, &opts)?;
            let e = compute_exact_error(&m, &pr)?;
            let err = e.h1.max(e.l2);
            let ok = err < 1e-9;
            failed += usize::from(!ok);
            writeln!(
                out,
                "patch {:<8} {:<9} p={p} error {err:.3e} {}",
                kind.name(),
                if irregular { "irregular" } else { "single" },
                if ok { "PASS" } else { "FAIL" }
            )?;
        }
    }
    if failed > 0 {
        bail!("{failed} patch test(s) failed");
    }
    Ok(())
}
