//! Interactive menu (`-job 0`).

use std::io::{BufRead, Write};

use anyhow::Result;

use hpfem::conformity::update_gdof;
use hpfem::mesh::{NodeStatus, RefinementKind};
use hpfem::poisson::{compute_exact_error, residuals};

use crate::Session;

const MENU: &str = "
 SELECT
 QUIT....................................0
 HP3D graphics (unavailable).............1
 HP3D graphics, mesh only (unavailable)..2
 Paraview................................3
 Print node data structure..............10
 Print element data structure...........11
 Single uniform h-refinement............20
 Single uniform p-refinement............21
 Refine a single element................22
 Solve (built-in solver)................30
 Solve (external solvers, unavailable)..31
 Compute exact error....................40
 Compute residual.......................41
";

fn read_line(input: &mut dyn BufRead) -> Result<Option<String>> {
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    Ok(Some(line.trim().to_string()))
}

fn print_nodes(s: &Session, out: &mut dyn Write) -> Result<()> {
    let m = &s.mesh;
    writeln!(out, "NRELIS = {}  NRELES = {}  NRNODS = {}", m.nrelis(), m.nreles(), m.nrnods())?;
    writeln!(out, "{:>6} {:>7} {:>6} {:>14} {:>6}  sons", "node", "kind", "order", "status", "father")?;
    for id in 1..=m.nrnods() {
        let n = m.node(id);
        let status = match m.status(id) {
            NodeStatus::Unused => "unused".to_string(),
            NodeStatus::Free => "free".to_string(),
            NodeStatus::Constrained(f) => format!("constr({f})"),
            NodeStatus::Irregular(a) => format!("irreg({a})"),
        };
        let father = n.father.map(|f| f.to_string()).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{id:>6} {:>7} {:>6} {status:>14} {father:>6}  {:?}",
            format!("{:?}", n.kind).to_lowercase(),
            n.order,
            n.sons
        )?;
    }
    Ok(())
}

fn print_elements(s: &Session, out: &mut dyn Write) -> Result<()> {
    let m = &s.mesh;
    writeln!(out, "NRELES = {}", m.nreles())?;
    for &e in m.elem_order() {
        let x = m.element_xnod(e);
        writeln!(
            out,
            "mdle {e:>6}  level {}  order {}  x0 = ({:.4}, {:.4}, {:.4})  x6 = ({:.4}, {:.4}, {:.4})",
            m.level(e),
            m.node(e).order,
            x[0][0],
            x[0][1],
            x[0][2],
            x[6][0],
            x[6][1],
            x[6][2]
        )?;
    }
    Ok(())
}

fn after_refinement(s: &mut Session) {
    update_gdof(&mut s.mesh);
    s.solved = false;
}

fn dispatch(id: i64, s: &mut Session, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    match id {
        1 | 2 | 31 | 32 | 33 => writeln!(out, "option {id} is unavailable in this build")?,
        3 => match s.paraview.as_mut() {
            Some(pv) => {
                let path = pv.export(&s.mesh, &s.problem.physics, "hpfem")?;
                writeln!(out, "wrote {}", path.display())?;
            }
            None => writeln!(out, "no output directory (use -paraview-dir)")?,
        },
        10 => print_nodes(s, out)?,
        11 => print_elements(s, out)?,
        20 => {
            s.mesh.global_refinement(RefinementKind::Href)?;
            after_refinement(s);
            writeln!(out, "NRELES = {}", s.mesh.nreles())?;
        }
        21 => {
            s.mesh.global_refinement(RefinementKind::Pref)?;
            after_refinement(s);
            writeln!(out, "NRELES = {}", s.mesh.nreles())?;
        }
        22 => {
            write!(out, "element (middle node) to refine: ")?;
            out.flush()?;
            let Some(line) = read_line(input)? else {
                return Ok(());
            };
            match line.parse::<usize>() {
                Ok(mdle) => {
                    let kref = s.mesh.get_isoref(mdle)?;
                    s.mesh.refine_element(mdle, kref)?;
                    s.mesh.close_mesh()?;
                    after_refinement(s);
                    writeln!(out, "NRELES = {}", s.mesh.nreles())?;
                }
                Err(_) => writeln!(out, "invalid element '{line}'")?,
            }
        }
        30 => {
            let r = s.problem.solve(&mut s.mesh, &s.opts)?;
            s.solved = true;
            writeln!(
                out,
                "solved: {} dofs, {} elements, {} iterations, residual {:.3e}",
                r.ndof, r.nreles, r.iterations, r.residual
            )?;
        }
        40 => {
            if !s.solved {
                writeln!(out, "no solution yet (option 30)")?;
            } else {
                match compute_exact_error(&s.mesh, &s.problem) {
                    Ok(e) => writeln!(out, "H1 error = {:.6e}  L2 error = {:.6e}", e.h1, e.l2)?,
                    Err(e) => writeln!(out, "{e}")?,
                }
            }
        }
        41 => {
            if !s.problem.kind.is_dpg() {
                writeln!(out, "residual estimator unsupported for the Galerkin problem")?;
            } else if !s.solved {
                writeln!(out, "no solution yet (option 30)")?;
            } else {
                let r: f64 = residuals(&s.mesh, &s.problem)?.iter().map(|r| r.1).sum();
                writeln!(out, "residual = {:.6e}", r.sqrt())?;
            }
        }
        _ => {}
    }
    Ok(())
}

pub fn interactive_menu(s: &mut Session, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    loop {
        write!(out, "{MENU}")?;
        out.flush()?;
        let Some(line) = read_line(input)? else {
            break;
        };
        let Ok(id) = line.parse::<i64>() else {
            writeln!(out, "invalid selection '{line}'")?;
            continue;
        };
        if id == 0 {
            break;
        }
        if let Err(e) = dispatch(id, s, input, out) {
            writeln!(out, "error: {e:#}")?;
        }
    }
    writeln!(out, "NRELES = {}", s.mesh.nreles())?;
    Ok(())
}
