//! VTU (ASCII XML unstructured grid) and PVD export with element upscaling.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::conformity::gather_solution;
use crate::error::{Error, Result};
use crate::exec::{try_map_ordered, ExecMode};
use crate::geometry::{element_geometry, piola_transform};
use crate::masterel::{ShapeLayout, Space, VERTEX_COORDS};
use crate::mesh::{Mesh, NodeId};
use crate::physics::PhysicsTable;

pub const MAX_VLEVEL: u32 = 4;
/// VTK cell type of the linear hexahedron.
pub const VTK_HEXAHEDRON: u8 = 12;

/// Master-cube sample lattice and its hexahedral sub-cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    /// `(2^L + 1)^3` points, x fastest.
    pub points: Vec<[f64; 3]>,
    /// `8^L` cells in VTK hexahedron order.
    pub cells: Vec<[usize; 8]>,
}

pub fn upscale_samples(vlevel: u32) -> Result<Lattice> {
    if vlevel > MAX_VLEVEL {
        return Err(Error::Config(format!("VLEVEL {vlevel} exceeds {MAX_VLEVEL}")));
    }
    let n = 1usize << vlevel;
    let id = |i: usize, j: usize, k: usize| i + (n + 1) * (j + (n + 1) * k);
    let h = 1.0 / n as f64;
    let mut points = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                points.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    let mut cells = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                cells.push(VERTEX_COORDS.map(|c| id(i + c[0] as usize, j + c[1] as usize, k + c[2] as usize)));
            }
        }
    }
    Ok(Lattice { points, cells })
}

#[derive(Debug, Clone)]
pub struct ParaviewConfig {
    /// Output directory; must exist.
    pub dir: PathBuf,
    pub vlevel: u32,
    /// The mesh is always written; kept for configuration symmetry.
    pub dump_geom: bool,
    pub dump_attr: bool,
    /// Timestamp of the next snapshot; `Some` adds it to the PVD series.
    pub time: Option<f64>,
    /// Per-attribute selection (empty selects all).
    pub attr_mask: Vec<bool>,
    /// Per-attribute, per-component selection (empty selects all).
    pub comp_mask: Vec<Vec<bool>>,
    pub exec: ExecMode,
}

impl ParaviewConfig {
    pub fn new(dir: impl Into<PathBuf>, vlevel: u32) -> Self {
        Self {
            dir: dir.into(),
            vlevel,
            dump_geom: true,
            dump_attr: true,
            time: None,
            attr_mask: Vec::new(),
            comp_mask: Vec::new(),
            exec: ExecMode::default(),
        }
    }

    fn selected(&self, attr: usize, comp: usize) -> bool {
        self.attr_mask.get(attr).copied().unwrap_or(true)
            && self
                .comp_mask
                .get(attr)
                .and_then(|m| m.get(comp).copied())
                .unwrap_or(true)
    }
}

/// One output array: name, components per point, values.
struct PointArray {
    name: String,
    ncomp: usize,
    values: Vec<f64>,
}

/// Sampled values of one element.
struct ElementSample {
    points: Vec<[f64; 3]>,
    /// per output array, per point `ncomp` values
    arrays: Vec<Vec<f64>>,
}

/// `(attr, comp, values per point)` for every selected output array.
fn output_arrays(mesh: &Mesh, physics: &PhysicsTable, cfg: &ParaviewConfig) -> Vec<(usize, usize, String, usize)> {
    let mut out = Vec::new();
    if !cfg.dump_attr {
        return out;
    }
    for (a, pa) in physics.attrs.iter().enumerate() {
        let lay = mesh.attr_layout()[a];
        if lay.is_trace {
            continue;
        }
        let width = if lay.space.is_vector() { 3 } else { 1 };
        for c in 0..lay.ncomp {
            if cfg.selected(a, c) {
                out.push((a, c, format!("{}_{}", pa.nickname, c + 1), width));
            }
        }
    }
    out
}

fn sample_element(
    mesh: &Mesh,
    mdle: NodeId,
    lattice: &Lattice,
    arrays: &[(usize, usize, String, usize)],
) -> Result<ElementSample> {
    let info = mesh.element_info(mdle)?;
    let mut points = Vec::with_capacity(lattice.points.len());
    let mut values: Vec<Vec<f64>> = arrays
        .iter()
        .map(|a| Vec::with_capacity(a.3 * lattice.points.len()))
        .collect();
    let mut per_attr: Vec<Option<(ShapeLayout, Vec<f64>)>> = vec![None; mesh.attr_layout().len()];
    for &(a, ..) in arrays {
        if per_attr[a].is_none() {
            let layout = ShapeLayout::new(mesh.attr_layout()[a].space, &info.norder)?;
            per_attr[a] = Some((layout, gather_solution(mesh, mdle, a)?));
        }
    }
    for &xi in &lattice.points {
        let g = element_geometry(&info.xnod, xi)?;
        points.push(g.x);
        let mut sets: Vec<Option<crate::masterel::ShapeSet>> = vec![None; per_attr.len()];
        for (k, &(a, c, _, _)) in arrays.iter().enumerate() {
            let (layout, coef) = per_attr[a].as_ref().expect("gathered above");
            let set = sets[a].get_or_insert_with(|| piola_transform(&layout.eval(xi), &g));
            let nc = mesh.attr_layout()[a].ncomp;
            match layout.space {
                Space::H1 | Space::L2 => {
                    let v: f64 = set.val.iter().enumerate().map(|(i, s)| coef[i * nc + c] * s).sum();
                    values[k].push(v);
                }
                Space::HCurl | Space::HDiv => {
                    let mut v = [0.0; 3];
                    for (i, s) in set.vec_val.iter().enumerate() {
                        for d in 0..3 {
                            v[d] += coef[i * nc + c] * s[d];
                        }
                    }
                    values[k].extend_from_slice(&v);
                }
            }
        }
    }
    Ok(ElementSample { points, arrays: values })
}

fn write_data_array(s: &mut String, ty: &str, name: Option<&str>, ncomp: usize, vals: impl Iterator<Item = String>) {
    let name = name.map(|n| format!(" Name=\"{n}\"")).unwrap_or_default();
    let _ = writeln!(
        s,
        "        <DataArray type=\"{ty}\"{name} NumberOfComponents=\"{ncomp}\" format=\"ascii\">"
    );
    let mut line = String::from("         ");
    for (i, v) in vals.enumerate() {
        line.push(' ');
        line.push_str(&v);
        if i % 12 == 11 {
            s.push_str(&line);
            s.push('\n');
            line = String::from("         ");
        }
    }
    if !line.trim().is_empty() {
        s.push_str(&line);
        s.push('\n');
    }
    let _ = writeln!(s, "        </DataArray>");
}

/// VTU document for all active elements; each element gets its own points.
pub fn vtu_document(mesh: &Mesh, physics: &PhysicsTable, cfg: &ParaviewConfig) -> Result<String> {
    let lattice = upscale_samples(cfg.vlevel)?;
    let arrays = output_arrays(mesh, physics, cfg);
    let els = mesh.elem_order().to_vec();
    let samples = try_map_ordered(cfg.exec, &els, |&m| sample_element(mesh, m, &lattice, &arrays))?;
    let npe = lattice.points.len();
    let npts = npe * els.len();
    let ncells = lattice.cells.len() * els.len();

    let mut arr: Vec<PointArray> = arrays
        .iter()
        .map(|a| PointArray {
            name: a.2.clone(),
            ncomp: a.3,
            values: Vec::with_capacity(a.3 * npts),
        })
        .collect();
    for s in &samples {
        for (k, v) in s.arrays.iter().enumerate() {
            arr[k].values.extend_from_slice(v);
        }
    }

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n");
    s.push_str("<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n");
    s.push_str("  <UnstructuredGrid>\n");
    let _ = writeln!(s, "    <Piece NumberOfPoints=\"{npts}\" NumberOfCells=\"{ncells}\">");
    s.push_str("      <PointData>\n");
    for a in &arr {
        write_data_array(&mut s, "Float64", Some(&a.name), a.ncomp, a.values.iter().map(|v| v.to_string()));
    }
    s.push_str("      </PointData>\n");
    s.push_str("      <Points>\n");
    write_data_array(
        &mut s,
        "Float64",
        Some("Points"),
        3,
        samples.iter().flat_map(|e| e.points.iter().flatten()).map(|v| v.to_string()),
    );
    s.push_str("      </Points>\n");
    s.push_str("      <Cells>\n");
    write_data_array(
        &mut s,
        "Int64",
        Some("connectivity"),
        1,
        (0..els.len()).flat_map(|e| {
            lattice
                .cells
                .iter()
                .flat_map(move |c| c.iter().map(move |&p| (e * npe + p).to_string()))
        }),
    );
    write_data_array(&mut s, "Int64", Some("offsets"), 1, (1..=ncells).map(|c| (8 * c).to_string()));
    write_data_array(&mut s, "UInt8", Some("types"), 1, (0..ncells).map(|_| VTK_HEXAHEDRON.to_string()));
    s.push_str("      </Cells>\n");
    s.push_str("    </Piece>\n");
    s.push_str("  </UnstructuredGrid>\n");
    s.push_str("</VTKFile>\n");
    Ok(s)
}

/// PVD collection listing `(time, file)` entries in order.
pub fn pvd_document(entries: &[(f64, String)]) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n");
    s.push_str("<VTKFile type=\"Collection\" version=\"0.1\" byte_order=\"LittleEndian\">\n");
    s.push_str("  <Collection>\n");
    for (t, f) in entries {
        let _ = writeln!(s, "    <DataSet timestep=\"{t}\" group=\"\" part=\"0\" file=\"{f}\"/>");
    }
    s.push_str("  </Collection>\n");
    s.push_str("</VTKFile>\n");
    s
}

/// Snapshot writer: numbered VTU files plus a PVD index for timed snapshots.
#[derive(Debug, Clone)]
pub struct Paraview {
    pub config: ParaviewConfig,
    series: Vec<(f64, String)>,
    count: usize,
}

impl Paraview {
    pub fn new(config: ParaviewConfig) -> Result<Self> {
        if !config.dir.is_dir() {
            return Err(Error::Config(format!(
                "output directory {} does not exist",
                config.dir.display()
            )));
        }
        upscale_samples(config.vlevel)?;
        Ok(Self {
            config,
            series: Vec::new(),
            count: 0,
        })
    }

    pub fn series(&self) -> &[(f64, String)] {
        &self.series
    }

    /// Write `<basename>_<n>.vtu`; timed snapshots also rewrite `<basename>.pvd`.
    pub fn export(&mut self, mesh: &Mesh, physics: &PhysicsTable, basename: &str) -> Result<PathBuf> {
        let doc = vtu_document(mesh, physics, &self.config)?;
        let name = format!("{basename}_{:05}.vtu", self.count);
        let path = self.config.dir.join(&name);
        std::fs::write(&path, doc)?;
        self.count += 1;
        if let Some(t) = self.config.time {
            self.series.push((t, name));
            write_pvd(&self.config.dir.join(format!("{basename}.pvd")), &self.series)?;
        }
        log::debug!("wrote {}", path.display());
        Ok(path)
    }
}

fn write_pvd(path: &Path, entries: &[(f64, String)]) -> Result<()> {
    std::fs::write(path, pvd_document(entries))?;
    Ok(())
}
