use std::collections::HashSet;

use super::{
    cell_slot, fit_mesh, lattice_point, Cell, ElementKind, FitOptions, FittedMesh, Key, NodeKey,
    UnfittedMesh,
};
use crate::error::{Error, Result};
use crate::geometry::LevelSet;

/// Nested fitted meshes `F_0, ..., F_L`. Level `l` starts from the uniform
/// grid of resolution `n0 * 2^l` and is refined `L - l` times around the
/// interface, so every level carries the finest cells next to it.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    pub levels: Vec<FittedMesh>,
    pub unfitted: Vec<UnfittedMesh>,
    pub n0: usize,
    pub lattice_n: usize,
    /// `marked[e][slot]`: cell at resolution `n0 << e` is an interface cell
    /// or shares a vertex with one (`e < L`).
    marked: Vec<Vec<bool>>,
}

pub fn build_hierarchy(ls: &LevelSet, n0: usize, levels: usize) -> Result<MeshHierarchy> {
    MeshHierarchy::build(ls, n0, levels, &FitOptions::default())
}

impl MeshHierarchy {
    pub fn build(ls: &LevelSet, n0: usize, top: usize, opts: &FitOptions) -> Result<Self> {
        if n0 < 2 {
            return Err(Error::InvalidArgument(format!("coarse grid size {n0} < 2")));
        }
        let lattice_n = n0 << top;
        let interface = finest_interface_cells(ls, lattice_n, opts.roots.subdivisions)?;

        // ancestors of finest interface cells, resolution by resolution
        let mut iface_by_exp = vec![Vec::new(); top + 1];
        iface_by_exp[top] = interface;
        for e in (0..top).rev() {
            let r = n0 << e;
            let mut coarse = vec![false; 2 * r * r];
            let fine_n = n0 << (e + 1);
            for (slot, &on) in iface_by_exp[e + 1].iter().enumerate() {
                if on {
                    let c = slot_cell(fine_n, slot, 1);
                    let p = c.parent().unwrap();
                    coarse[cell_slot(r, p.i, p.j, p.upper)] = true;
                }
            }
            iface_by_exp[e] = coarse;
        }
        let marked: Vec<Vec<bool>> = (0..top)
            .map(|e| with_vertex_ring(&iface_by_exp[e], n0 << e))
            .collect();

        let mut levels = Vec::with_capacity(top + 1);
        let mut unfitted = Vec::with_capacity(top + 1);
        for l in 0..=top {
            let base_n = n0 << l;
            let rounds = (top - l) as u32;
            let mut leaves = Vec::new();
            let mut stack = Vec::new();
            for j in 0..base_n as i64 {
                for i in 0..base_n as i64 {
                    for upper in [false, true] {
                        stack.push(Cell::new(0, i, j, upper));
                        while let Some(c) = stack.pop() {
                            let refine = c.depth < rounds && {
                                let e = l + c.depth as usize;
                                marked[e][cell_slot(n0 << e, c.i, c.j, c.upper)]
                            };
                            if refine {
                                stack.extend(c.children().into_iter().rev());
                            } else {
                                leaves.push(c);
                            }
                        }
                    }
                }
            }
            let mesh = UnfittedMesh::from_cells(base_n, lattice_n, leaves);
            levels.push(fit_mesh(&mesh, ls, opts)?);
            unfitted.push(mesh);
        }

        Ok(Self {
            levels,
            unfitted,
            n0,
            lattice_n,
            marked,
        })
    }

    /// Index of the finest level.
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    /// Size of the uniform grid level `l` starts from.
    pub fn h(&self, l: usize) -> f64 {
        2.0 / (self.n0 << l) as f64
    }

    /// Whether `key` lies in the open interior of the one-ring interface
    /// region of the uniform grid one level below `l`. Always false on
    /// level 0.
    pub fn in_interface_region(&self, l: usize, key: &NodeKey) -> bool {
        if l == 0 {
            return false;
        }
        let r = self.n0 << (l - 1);
        let p = key.doubled();
        let m = 2 * self.lattice_n as i64;
        if p[0] <= 0 || p[1] <= 0 || p[0] >= m || p[1] >= m {
            return false;
        }
        let s = m / r as i64;
        covering_cells(p, s, r)
            .iter()
            .all(|&(i, j, upper)| self.marked[l - 1][cell_slot(r, i, j, upper)])
    }

    /// Checks that node sets increase with the level and that every element
    /// of a finer level lies inside one element of the level below.
    pub fn verify_nesting(&self) -> Result<()> {
        for l in 0..self.top() {
            let (coarse, fine) = (&self.levels[l], &self.levels[l + 1]);
            let fine_keys: HashSet<NodeKey> = fine.keys.iter().copied().collect();
            if let Some(k) = coarse.keys.iter().find(|k| !fine_keys.contains(k)) {
                return Err(Error::NonNested(format!("node {k:?} of level {l} missing above")));
            }

            let (cu, fu) = (&self.unfitted[l], &self.unfitted[l + 1]);
            let coarse_cells: HashSet<(usize, i64, i64, bool)> = cu
                .cells
                .iter()
                .map(|c| (l + c.depth as usize, c.i, c.j, c.upper))
                .collect();
            let coarse_elements: HashSet<Vec<NodeKey>> = coarse
                .elements
                .iter()
                .map(|el| el.nodes().iter().map(|&v| coarse.keys[v]).collect())
                .collect();
            for el in &fine.elements {
                let c = fu.cells[el.parent];
                let mut cur = Cell::new((l + 1) as u32 + c.depth, c.i, c.j, c.upper);
                loop {
                    if coarse_cells.contains(&(cur.depth as usize, cur.i, cur.j, cur.upper)) {
                        break;
                    }
                    match cur.parent() {
                        Some(p) if (p.depth as usize) >= l => cur = p,
                        _ => {
                            return Err(Error::NonNested(format!(
                                "cell {c:?} of level {} has no ancestor on level {l}",
                                l + 1
                            )))
                        }
                    }
                }
                // a cut piece must reappear unchanged below
                let whole = el.kind == ElementKind::Tri3
                    && el.nodes().iter().all(|&v| matches!(fine.keys[v], NodeKey::Lattice(_)));
                if !whole {
                    let ks: Vec<NodeKey> = el.nodes().iter().map(|&v| fine.keys[v]).collect();
                    if !coarse_elements.contains(&ks) {
                        return Err(Error::NonNested(format!(
                            "interface element {ks:?} of level {} differs on level {l}",
                            l + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn slot_cell(n: usize, slot: usize, depth: u32) -> Cell {
    let upper = slot % 2 == 1;
    let sq = slot / 2;
    Cell::new(depth, (sq % n) as i64, (sq / n) as i64, upper)
}

/// Finest cells with a sampled sign change or zero on one of their edges.
fn finest_interface_cells(ls: &LevelSet, n: usize, subdivisions: usize) -> Result<Vec<bool>> {
    let np = n + 1;
    let pt = |i: usize, j: usize| lattice_point([i as i64, j as i64], n);
    let mut vals = vec![0.0; np * np];
    for j in 0..np {
        for i in 0..np {
            vals[j * np + i] = ls.try_eval(pt(i, j))?;
        }
    }
    let m = subdivisions.max(1);
    let flagged = |(i0, j0): (usize, usize), (i1, j1): (usize, usize)| -> Result<bool> {
        let (a, b) = (pt(i0, j0), pt(i1, j1));
        let mut prev = vals[j0 * np + i0];
        let last = vals[j1 * np + i1];
        if prev == 0.0 || last == 0.0 {
            return Ok(true);
        }
        for k in 1..=m {
            let v = if k == m {
                last
            } else {
                ls.try_eval(a.lerp(b, k as f64 / m as f64))?
            };
            if v == 0.0 || v * prev < 0.0 {
                return Ok(true);
            }
            prev = v;
        }
        Ok(false)
    };
    // edge flags: horizontal (i,j)-(i+1,j), vertical (i,j)-(i,j+1),
    // diagonal (i,j)-(i+1,j+1)
    let mut horiz = vec![false; n * np];
    let mut vert = vec![false; n * np];
    let mut diag = vec![false; n * n];
    for j in 0..np {
        for i in 0..n {
            horiz[j * n + i] = flagged((i, j), (i + 1, j))?;
        }
    }
    for j in 0..n {
        for i in 0..np {
            vert[j * np + i] = flagged((i, j), (i, j + 1))?;
        }
    }
    for j in 0..n {
        for i in 0..n {
            diag[j * n + i] = flagged((i, j), (i + 1, j + 1))?;
        }
    }
    let mut out = vec![false; 2 * n * n];
    for j in 0..n {
        for i in 0..n {
            let d = diag[j * n + i];
            out[cell_slot(n, i as i64, j as i64, false)] =
                d || horiz[j * n + i] || vert[j * np + i + 1];
            out[cell_slot(n, i as i64, j as i64, true)] =
                d || horiz[(j + 1) * n + i] || vert[j * np + i];
        }
    }
    Ok(out)
}

/// Adds every cell that shares a vertex with a flagged cell.
fn with_vertex_ring(cells: &[bool], n: usize) -> Vec<bool> {
    let np = n + 1;
    let mut touched = vec![false; np * np];
    for (slot, &on) in cells.iter().enumerate() {
        if on {
            for k in slot_cell(n, slot, 0).keys(1) {
                touched[k[1] as usize * np + k[0] as usize] = true;
            }
        }
    }
    (0..cells.len())
        .map(|slot| {
            slot_cell(n, slot, 0)
                .keys(1)
                .iter()
                .any(|k| touched[k[1] as usize * np + k[0] as usize])
        })
        .collect()
}

/// Cells of the resolution-`r` grid whose closure contains the lattice
/// point `p` (lattice step `s` per cell).
fn covering_cells(p: Key, s: i64, r: usize) -> Vec<(i64, i64, bool)> {
    let (qx, rx) = (p[0].div_euclid(s), p[0].rem_euclid(s));
    let (qy, ry) = (p[1].div_euclid(s), p[1].rem_euclid(s));
    let cand: Vec<(i64, i64, bool)> = match (rx == 0, ry == 0) {
        (true, true) => vec![
            (qx, qy, false),
            (qx, qy, true),
            (qx - 1, qy, false),
            (qx - 1, qy - 1, false),
            (qx - 1, qy - 1, true),
            (qx, qy - 1, true),
        ],
        (false, true) => vec![(qx, qy, false), (qx, qy - 1, true)],
        (true, false) => vec![(qx, qy, true), (qx - 1, qy, false)],
        (false, false) => {
            if rx == ry {
                vec![(qx, qy, false), (qx, qy, true)]
            } else if rx > ry {
                vec![(qx, qy, false)]
            } else {
                vec![(qx, qy, true)]
            }
        }
    };
    let r = r as i64;
    cand.into_iter()
        .filter(|&(i, j, _)| i >= 0 && j >= 0 && i < r && j < r)
        .collect()
}
