//! Unfitted lattice triangulations, interface fitting and the nested
//! hierarchy used by the multigrid solver.
//!
//! All unfitted meshes live on an integer lattice of resolution `lattice_n`
//! over `[-1, 1]^2`. Vertex keys are lattice coordinates, so node identity is
//! exact across meshes that share a lattice.

mod fit;
mod hierarchy;
mod io;

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{orient, scan_roots, LevelSet, Point2, RegionId, RootOptions};

pub use fit::{cut_triangle, fit_mesh, CrossingPolicy, CutPiece, FitOptions, LocalNode};
pub use hierarchy::{build_hierarchy, MeshHierarchy};
pub use io::{write_listing, write_vtk};
pub(crate) use fit::strictly_convex;

pub type Key = [i64; 2];

/// A triangle of the structured grid at resolution `base_n << depth`.
///
/// Each square `(i, j)` is split along its `/` diagonal into a lower
/// triangle `(i,j) (i+1,j) (i+1,j+1)` and an upper triangle
/// `(i,j) (i+1,j+1) (i,j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub depth: u32,
    pub i: i64,
    pub j: i64,
    pub upper: bool,
}

impl Cell {
    pub fn new(depth: u32, i: i64, j: i64, upper: bool) -> Self {
        Self { depth, i, j, upper }
    }

    /// Vertex keys, counterclockwise, for a lattice step of `scale` per cell.
    pub fn keys(&self, scale: i64) -> [Key; 3] {
        let (x, y, s) = (self.i * scale, self.j * scale, scale);
        if self.upper {
            [[x, y], [x + s, y + s], [x, y + s]]
        } else {
            [[x, y], [x + s, y], [x + s, y + s]]
        }
    }

    /// The four congruent children of regular refinement.
    pub fn children(&self) -> [Cell; 4] {
        let (d, i, j) = (self.depth + 1, 2 * self.i, 2 * self.j);
        if self.upper {
            [
                Cell::new(d, i, j, true),
                Cell::new(d, i, j + 1, true),
                Cell::new(d, i + 1, j + 1, true),
                Cell::new(d, i, j + 1, false),
            ]
        } else {
            [
                Cell::new(d, i, j, false),
                Cell::new(d, i + 1, j, false),
                Cell::new(d, i + 1, j + 1, false),
                Cell::new(d, i + 1, j, true),
            ]
        }
    }

    pub fn parent(&self) -> Option<Cell> {
        if self.depth == 0 {
            return None;
        }
        let (a, b) = (self.i & 1, self.j & 1);
        let upper = match (a, b) {
            (0, 1) => true,
            (1, 0) => false,
            _ => self.upper,
        };
        Some(Cell::new(self.depth - 1, self.i >> 1, self.j >> 1, upper))
    }
}

/// Index of a cell in a flat per-resolution array of `2 n^2` triangles.
pub(crate) fn cell_slot(n: usize, i: i64, j: i64, upper: bool) -> usize {
    (j as usize * n + i as usize) * 2 + upper as usize
}

/// A vertex whose value is the mean of the endpoints of the coarser edge
/// it lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hanging {
    pub node: usize,
    pub parents: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct UnfittedMesh {
    pub vertices: Vec<Point2>,
    pub keys: Vec<Key>,
    /// Counterclockwise vertex triples, one per entry of `cells`.
    pub triangles: Vec<[usize; 3]>,
    pub cells: Vec<Cell>,
    /// Resolution of depth-0 cells; `h = 2 / base_n`.
    pub base_n: usize,
    pub lattice_n: usize,
    pub h: f64,
    /// Minimum angle of every triangle.
    pub alpha: f64,
    pub boundary: Vec<bool>,
    pub hanging: Vec<Hanging>,
}

pub fn lattice_point(k: Key, lattice_n: usize) -> Point2 {
    let n = lattice_n as f64;
    Point2::new(2.0 * k[0] as f64 / n - 1.0, 2.0 * k[1] as f64 / n - 1.0)
}

/// Structured `n x n` grid of squares on `[-1, 1]^2`, each split along the
/// same diagonal.
pub fn make_uniform_mesh(n: usize) -> Result<UnfittedMesh> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("grid size {n} < 2")));
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n as i64 {
        for i in 0..n as i64 {
            cells.push(Cell::new(0, i, j, false));
            cells.push(Cell::new(0, i, j, true));
        }
    }
    Ok(UnfittedMesh::from_cells(n, n, cells))
}

impl UnfittedMesh {
    /// Builds a mesh from leaf cells of a locally refined grid. Vertices are
    /// numbered row by row in lattice order.
    pub fn from_cells(base_n: usize, lattice_n: usize, cells: Vec<Cell>) -> Self {
        assert!(lattice_n.is_multiple_of(base_n));
        let scale_of = |d: u32| (lattice_n / (base_n << d)) as i64;

        let mut keys: Vec<Key> = cells
            .iter()
            .flat_map(|c| c.keys(scale_of(c.depth)))
            .collect();
        keys.sort_unstable_by_key(|k| (k[1], k[0]));
        keys.dedup();
        let index: HashMap<Key, usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();

        let triangles: Vec<[usize; 3]> = cells
            .iter()
            .map(|c| c.keys(scale_of(c.depth)).map(|k| index[&k]))
            .collect();

        let ln = lattice_n as i64;
        let boundary = keys
            .iter()
            .map(|k| k[0] == 0 || k[1] == 0 || k[0] == ln || k[1] == ln)
            .collect();
        let vertices = keys.iter().map(|&k| lattice_point(k, lattice_n)).collect();

        // A vertex strictly inside a leaf edge hangs off that edge; finer
        // hanging nodes on the same edge hang off its halves.
        let mut hanging = Vec::new();
        let mut seen = vec![false; keys.len()];
        let mut stack = Vec::new();
        for tri in &triangles {
            for e in 0..3 {
                stack.push((tri[e], tri[(e + 1) % 3]));
                while let Some((a, b)) = stack.pop() {
                    let (ka, kb) = (keys[a], keys[b]);
                    let sum = [ka[0] + kb[0], ka[1] + kb[1]];
                    if sum[0] % 2 != 0 || sum[1] % 2 != 0 {
                        continue;
                    }
                    if let Some(&m) = index.get(&[sum[0] / 2, sum[1] / 2]) {
                        if !seen[m] {
                            seen[m] = true;
                            hanging.push(Hanging {
                                node: m,
                                parents: [a.min(b), a.max(b)],
                            });
                        }
                        stack.push((a, m));
                        stack.push((m, b));
                    }
                }
            }
        }
        hanging.sort_by_key(|hn| hn.node);

        UnfittedMesh {
            vertices,
            keys,
            triangles,
            cells,
            base_n,
            lattice_n,
            h: 2.0 / base_n as f64,
            alpha: std::f64::consts::FRAC_PI_4,
            boundary,
            hanging,
        }
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                0.5 * orient(a, b, c)
            })
            .sum()
    }
}

/// Triangles of `mesh` that meet the interface in a set of positive length.
///
/// Uses the strict reading: an edge crossed twice, or crossed in its
/// interior while also touching the interface at an endpoint, is an error.
pub fn detect_interface_elements(mesh: &UnfittedMesh, ls: &LevelSet) -> Result<BTreeSet<usize>> {
    let opts = RootOptions::default();
    let mut edge_info: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut out = BTreeSet::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let mut interior_hits = 0;
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let (interior, _) = match edge_info.get(&key) {
                Some(&v) => v,
                None => {
                    let roots = scan_roots(ls, mesh.vertices[key.0], mesh.vertices[key.1], &opts)?;
                    let interior = roots.iter().filter(|&&t| t > 0.0 && t < 1.0).count();
                    let ends = roots.len() - interior;
                    if interior >= 2 || (interior >= 1 && ends >= 1) {
                        return Err(Error::MeshTooCoarse(format!(
                            "edge {:?}-{:?} meets the interface {} times",
                            mesh.keys[key.0],
                            mesh.keys[key.1],
                            roots.len()
                        )));
                    }
                    edge_info.insert(key, (interior, ends));
                    (interior, ends)
                }
            };
            interior_hits += interior;
        }
        let zeros = tri
            .iter()
            .filter(|&&v| ls.eval(mesh.vertices[v]) == 0.0)
            .count();
        if interior_hits > 0 || zeros >= 2 {
            out.insert(t);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Tri3,
    Quad4,
}

impl ElementKind {
    pub fn n_nodes(self) -> usize {
        match self {
            ElementKind::Tri3 => 3,
            ElementKind::Quad4 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    nodes: [usize; 4],
    pub region: RegionId,
    /// Index of the unfitted triangle this element came from.
    pub parent: usize,
}

impl Element {
    pub fn tri(nodes: [usize; 3], region: RegionId, parent: usize) -> Self {
        Self {
            kind: ElementKind::Tri3,
            nodes: [nodes[0], nodes[1], nodes[2], usize::MAX],
            region,
            parent,
        }
    }

    pub fn quad(nodes: [usize; 4], region: RegionId, parent: usize) -> Self {
        Self {
            kind: ElementKind::Quad4,
            nodes,
            region,
            parent,
        }
    }

    /// Counterclockwise node indices.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.kind.n_nodes()]
    }
}

/// Identity of a fitted-mesh node that is stable across meshes built on the
/// same lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKey {
    Lattice(Key),
    /// Interface point on the lattice edge between two keys (sorted).
    Edge(Key, Key),
}

impl NodeKey {
    /// Position on the doubled lattice; exact for lattice nodes, the edge
    /// midpoint for cut nodes.
    pub fn doubled(&self) -> Key {
        match *self {
            NodeKey::Lattice(k) => [2 * k[0], 2 * k[1]],
            NodeKey::Edge(a, b) => [a[0] + b[0], a[1] + b[1]],
        }
    }
}

#[derive(Debug, Clone)]
pub struct FittedMesh {
    /// Unfitted vertices first, then interface cut points.
    pub vertices: Vec<Point2>,
    pub keys: Vec<NodeKey>,
    pub elements: Vec<Element>,
    /// Nodes of `gamma_h`, chained into polylines.
    pub interface_nodes: Vec<usize>,
    pub gamma_h: Vec<[usize; 2]>,
    pub boundary: Vec<bool>,
    pub hanging: Vec<Hanging>,
    pub h: f64,
    pub lattice_n: usize,
    pub n_unfitted_vertices: usize,
}

impl FittedMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn element_points(&self, e: usize) -> Vec<Point2> {
        self.elements[e].nodes().iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn element_area(&self, e: usize) -> f64 {
        polygon_area(&self.element_points(e))
    }

    pub fn n_quads(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| e.kind == ElementKind::Quad4)
            .count()
    }

    pub fn is_interface_node(&self) -> Vec<bool> {
        let mut flag = vec![false; self.vertices.len()];
        for &v in &self.interface_nodes {
            flag[v] = true;
        }
        flag
    }

    pub fn key_index(&self) -> HashMap<NodeKey, usize> {
        self.keys.iter().enumerate().map(|(i, &k)| (k, i)).collect()
    }
}

pub fn polygon_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>()
}

/// Total element area per region tag.
pub fn region_areas(mesh: &FittedMesh) -> (f64, f64) {
    let mut areas = [0.0, 0.0];
    for (e, el) in mesh.elements.iter().enumerate() {
        areas[el.region.index()] += mesh.element_area(e);
    }
    (areas[0], areas[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circle, vertical_line};

    #[test]
    fn uniform_counts() {
        let m = make_uniform_mesh(2).unwrap();
        assert_eq!(m.vertices.len(), 9);
        assert_eq!(m.triangles.len(), 8);
        assert_eq!(m.h, 1.0);
        let m = make_uniform_mesh(4).unwrap();
        assert_eq!(m.vertices.len(), 25);
        assert_eq!(m.triangles.len(), 32);
        assert!(m.hanging.is_empty());
        assert!(make_uniform_mesh(1).is_err());
    }

    #[test]
    fn uniform_tiles_square() {
        for n in [2, 3, 7, 16] {
            let m = make_uniform_mesh(n).unwrap();
            assert!((m.total_area() - 4.0).abs() < 1e-12 * 4.0);
            for t in 0..m.triangles.len() {
                let [a, b, c] = m.triangle_points(t);
                assert!(orient(a, b, c) > 0.0);
            }
            let nb = m.boundary.iter().filter(|&&b| b).count();
            assert_eq!(nb, 4 * n);
        }
    }

    #[test]
    fn uniform_vertex_numbering_is_row_major() {
        let m = make_uniform_mesh(4).unwrap();
        assert_eq!(m.vertices[0], Point2::new(-1.0, -1.0));
        assert_eq!(m.vertices[6], Point2::new(-0.5, -0.5));
        assert_eq!(m.keys[24], [4, 4]);
    }

    #[test]
    fn children_tile_parent() {
        for upper in [false, true] {
            let c = Cell::new(0, 1, 2, upper);
            let parent_area = {
                let k = c.keys(2);
                let p = k.map(|k| Point2::new(k[0] as f64, k[1] as f64));
                0.5 * orient(p[0], p[1], p[2])
            };
            let mut sum = 0.0;
            for ch in c.children() {
                assert_eq!(ch.parent(), Some(c));
                let p = ch.keys(1).map(|k| Point2::new(k[0] as f64, k[1] as f64));
                let a = 0.5 * orient(p[0], p[1], p[2]);
                assert!(a > 0.0);
                sum += a;
            }
            assert_eq!(sum, parent_area);
        }
    }

    #[test]
    fn hanging_nodes_detected() {
        // refine one cell of a 2x2 grid on a 4-lattice
        let mut cells = Vec::new();
        for j in 0..2 {
            for i in 0..2 {
                for upper in [false, true] {
                    let c = Cell::new(0, i, j, upper);
                    if (i, j, upper) == (0, 0, false) {
                        cells.extend(c.children());
                    } else {
                        cells.push(c);
                    }
                }
            }
        }
        let m = UnfittedMesh::from_cells(2, 4, cells);
        assert!((m.total_area() - 4.0).abs() < 1e-12);
        // the midpoint of the diagonal (1,1) is shared with the upper cell
        // of square (0,0); the midpoint (2,1) of the right edge is shared
        // with lower (1,0); (1,0) is on the boundary
        let hk: Vec<Key> = m.hanging.iter().map(|h| m.keys[h.node]).collect();
        assert_eq!(hk.len(), 2);
        assert!(hk.contains(&[1, 1]) && hk.contains(&[2, 1]));
        for h in &m.hanging {
            let [a, b] = h.parents.map(|p| m.keys[p]);
            let k = m.keys[h.node];
            assert_eq!([a[0] + b[0], a[1] + b[1]], [2 * k[0], 2 * k[1]]);
        }
    }

    #[test]
    fn detect_examples() {
        let m = make_uniform_mesh(8).unwrap();
        let ls = circle(0.5);
        let found = detect_interface_elements(&m, &ls).unwrap();
        // lower triangle of square (5,5): (0.25,0.25),(0.5,0.25),(0.5,0.5)
        let t = m
            .cells
            .iter()
            .position(|c| *c == Cell::new(0, 5, 5, false))
            .unwrap();
        assert!(found.contains(&t));
        for &t in &found {
            let pts = m.triangle_points(t);
            let vals: Vec<f64> = pts.iter().map(|&p| ls.eval(p)).collect();
            assert!(vals.iter().any(|&v| v <= 0.0) && vals.iter().any(|&v| v >= 0.0));
        }
        // far away triangles are never flagged
        let far = m.cells.iter().position(|c| *c == Cell::new(0, 0, 0, false)).unwrap();
        assert!(!found.contains(&far));

        let outside = circle(5.0);
        assert!(detect_interface_elements(&m, &outside).unwrap().is_empty());

        let line = vertical_line(0.1);
        assert_eq!(detect_interface_elements(&m, &line).unwrap().len(), 16);
    }

    #[test]
    fn detect_rejects_double_crossing() {
        let m = make_uniform_mesh(2).unwrap();
        assert!(detect_interface_elements(&m, &circle(0.3)).is_ok());
        // thin ellipse lying across the bottom edge (0,-1)-(1,-1)
        let thin = LevelSet::new("thin", |p| {
            (p.x - 0.5).powi(2) / 0.09 + (p.y + 1.0).powi(2) / 1e-4 - 1.0
        });
        assert!(matches!(
            detect_interface_elements(&m, &thin),
            Err(Error::MeshTooCoarse(_))
        ));
    }
}
