//! Physics attributes, global parameters, boundary-condition flags and the
//! control/physics input files.
//!
//! Physics file layout:
//!
//! ```text
//! 100000              MAXNODS, nodes anticipated
//! 2                   NR_PHYSA, physics attributes
//! field   contin  1   H1 variable
//! trace   normal  1   H(div) variable
//! ```
//!
//! Control file layout: one `KEY VALUE` pair per line, `#` starts a comment.
//! Keys: `NEXACT`, `EXGEOM`, `NORD_ADD`, `ISTC_FLAG`, `STORE_STC`, `HERM_STC`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::masterel::{Space, MAXP};
use crate::mesh::Mesh;

/// One physics attribute (a variable with `ncomp` components).
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsAttr {
    pub nickname: String,
    pub space: Space,
    pub ncomp: usize,
    /// PHYSAi: discretized as a trace (interface dofs only).
    pub is_trace: bool,
    /// PHYSAm: participates in assembly.
    pub enabled: bool,
    /// PHYSAd: Dirichlet data is homogeneous, no interpolation needed.
    pub homogeneous_dirichlet: bool,
}

impl PhysicsAttr {
    pub fn new(nickname: &str, space: Space, ncomp: usize) -> Self {
        Self {
            nickname: nickname.to_string(),
            space,
            ncomp,
            is_trace: false,
            enabled: true,
            homogeneous_dirichlet: false,
        }
    }

    pub fn trace(mut self) -> Self {
        self.is_trace = true;
        self
    }
}

pub fn space_from_tag(tag: &str) -> Option<Space> {
    match tag {
        "contin" => Some(Space::H1),
        "tangen" => Some(Space::HCurl),
        "normal" => Some(Space::HDiv),
        "discon" => Some(Space::L2),
        _ => None,
    }
}

pub fn space_tag(space: Space) -> &'static str {
    match space {
        Space::H1 => "contin",
        Space::HCurl => "tangen",
        Space::HDiv => "normal",
        Space::L2 => "discon",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsTable {
    pub maxnods: usize,
    pub attrs: Vec<PhysicsAttr>,
}

impl PhysicsTable {
    pub fn new(maxnods: usize, attrs: Vec<PhysicsAttr>) -> Result<Self> {
        let t = Self { maxnods, attrs };
        t.validate()?;
        Ok(t)
    }

    /// NR_PHYSA
    pub fn nr_physa(&self) -> usize {
        self.attrs.len()
    }

    /// NR_COMP(i)
    pub fn nr_comp(&self, attr: usize) -> usize {
        self.attrs[attr].ncomp
    }

    /// NRINDEX: total number of components.
    pub fn nrindex(&self) -> usize {
        self.attrs.iter().map(|a| a.ncomp).sum()
    }

    /// Index of the first component of `attr` in the flat component list.
    pub fn comp_offset(&self, attr: usize) -> usize {
        self.attrs[..attr].iter().map(|a| a.ncomp).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let mut last = 0;
        for a in &self.attrs {
            if a.ncomp == 0 {
                return Err(Error::Config(format!("attribute {} has no components", a.nickname)));
            }
            if a.nickname.is_empty() || a.nickname.len() > 8 {
                return Err(Error::Config(format!("invalid nickname '{}'", a.nickname)));
            }
            if a.is_trace && a.space == Space::L2 {
                return Err(Error::Config(format!(
                    "attribute {} is discontinuous and cannot be a trace",
                    a.nickname
                )));
            }
            if a.space.rank() < last {
                return Err(Error::Config(format!(
                    "attribute {} ({}) is out of exact-sequence order",
                    a.nickname,
                    space_tag(a.space)
                )));
            }
            last = a.space.rank();
        }
        Ok(())
    }

    pub fn find(&self, nickname: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a.nickname == nickname)
    }

    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            file: file.to_string(),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut header = |what: &str| -> Result<usize> {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| perr(0, format!("missing {what} line")))?;
            l.split_whitespace()
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| perr(ln, format!("expected integer {what}")))
        };
        let maxnods = header("MAXNODS")?;
        let nr_physa = header("NR_PHYSA")?;
        let mut attrs = Vec::with_capacity(nr_physa);
        for (ln, l) in lines.by_ref() {
            if attrs.len() == nr_physa {
                return Err(perr(ln, format!("more attribute lines than NR_PHYSA={nr_physa}")));
            }
            let tok: Vec<&str> = l.split_whitespace().collect();
            if tok.len() < 3 {
                return Err(perr(ln, "expected '<nick> <space> <ncomp>'".into()));
            }
            let space = space_from_tag(tok[1])
                .ok_or_else(|| perr(ln, format!("unknown space tag '{}'", tok[1])))?;
            let ncomp: usize = tok[2]
                .parse()
                .map_err(|_| perr(ln, format!("invalid component count '{}'", tok[2])))?;
            attrs.push(PhysicsAttr::new(tok[0], space, ncomp));
        }
        if attrs.len() != nr_physa {
            return Err(perr(
                0,
                format!("NR_PHYSA={nr_physa} but {} attribute lines", attrs.len()),
            ));
        }
        let t = Self { maxnods, attrs };
        t.validate().map_err(|e| perr(0, e.to_string()))?;
        Ok(t)
    }
}

pub fn read_physics(path: impl AsRef<Path>) -> Result<PhysicsTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    PhysicsTable::parse(&text, &path.display().to_string())
}

/// Global parameters (control file plus fixed build parameters).
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    /// Working maximum order (at most MAXP).
    pub maxp: u32,
    pub nrcoms: u32,
    pub n_coms: u32,
    pub nrrhs: u32,
    pub istc_flag: bool,
    pub store_stc: bool,
    pub herm_stc: bool,
    /// Enrichment increment for the DPG test space.
    pub nord_add: u32,
    pub nexact: u32,
    pub exgeom: u32,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            maxp: MAXP,
            nrcoms: 1,
            n_coms: 1,
            nrrhs: 1,
            istc_flag: true,
            store_stc: false,
            herm_stc: true,
            nord_add: 1,
            nexact: 0,
            exgeom: 0,
        }
    }
}

impl Parameters {
    pub fn validate(&self) -> Result<()> {
        if self.nrcoms != 1 || self.n_coms != 1 || self.nrrhs != 1 {
            return Err(Error::Unsupported("NRCOMS = N_COMS = NRRHS = 1 only".into()));
        }
        if self.exgeom != 0 {
            return Err(Error::Unsupported("EXGEOM=1 (exact geometry)".into()));
        }
        if self.nexact > 1 {
            return Err(Error::Config(format!("NEXACT must be 0 or 1, got {}", self.nexact)));
        }
        if self.nord_add == 0 || self.nord_add > 3 {
            return Err(Error::Config(format!("NORD_ADD must be in 1..=3, got {}", self.nord_add)));
        }
        if self.maxp == 0 || self.maxp > MAXP {
            return Err(Error::Config(format!("MAXP must be in 1..={MAXP}")));
        }
        Ok(())
    }

    pub fn parse_control(text: &str, file: &str) -> Result<Self> {
        let mut p = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse {
                file: file.to_string(),
                line: i + 1,
                msg,
            };
            let mut tok = line.split_whitespace();
            let key = tok.next().unwrap_or_default();
            let val = tok
                .next()
                .ok_or_else(|| perr(format!("missing value for {key}")))?;
            let int = || -> Result<u32> {
                val.parse()
                    .map_err(|_| perr(format!("invalid value '{val}' for {key}")))
            };
            let flag = || -> Result<bool> {
                match val {
                    "1" | "true" | ".true." | "T" => Ok(true),
                    "0" | "false" | ".false." | "F" => Ok(false),
                    _ => Err(perr(format!("invalid flag '{val}' for {key}"))),
                }
            };
            match key {
                "NEXACT" => p.nexact = int()?,
                "EXGEOM" => p.exgeom = int()?,
                "NORD_ADD" => p.nord_add = int()?,
                "ISTC_FLAG" => p.istc_flag = flag()?,
                "STORE_STC" => p.store_stc = flag()?,
                "HERM_STC" => p.herm_stc = flag()?,
                _ => return Err(perr(format!("unknown key '{key}'"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

pub fn read_control(path: impl AsRef<Path>) -> Result<Parameters> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Parameters::parse_control(&text, &path.display().to_string())
}

/// Encode six face flags (face 1 = least significant digit).
pub fn encode_bc(flags: &[u8; 6]) -> Result<u32> {
    let mut code = 0u32;
    for &d in flags.iter().rev() {
        if d > 9 {
            return Err(Error::Config(format!("BC flag digit {d} outside 0..9")));
        }
        code = code * 10 + d as u32;
    }
    Ok(code)
}

pub fn decode_bc(code: u32) -> [u8; 6] {
    let mut out = [0u8; 6];
    let mut c = code;
    for d in out.iter_mut() {
        *d = (c % 10) as u8;
        c /= 10;
    }
    out
}

/// Set BC flag `flag` for component `comp` of attribute `attr` on all
/// exterior faces carrying `boundary_id`, then refresh node Dirichlet masks.
pub fn set_bcond(
    mesh: &mut Mesh,
    boundary_id: u8,
    attr: usize,
    comp: usize,
    flag: u8,
) -> Result<()> {
    let layout = mesh.attr_layout();
    if attr >= layout.len() || comp >= layout[attr].ncomp {
        return Err(Error::Config(format!(
            "invalid attribute/component ({attr},{comp})"
        )));
    }
    if flag > 9 || boundary_id > 9 {
        return Err(Error::Config("BC flag and boundary id must be digits".into()));
    }
    let index: usize = layout[..attr].iter().map(|a| a.ncomp).sum::<usize>() + comp;
    mesh.set_face_flags(boundary_id, index, flag);
    mesh.derive_dirichlet_masks();
    Ok(())
}
