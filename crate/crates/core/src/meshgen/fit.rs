use std::collections::HashMap;

use super::{Element, ElementKind, FittedMesh, Key, NodeKey, UnfittedMesh};
use crate::error::{Error, Result};
use crate::geometry::{scan_roots, LevelSet, Point2, RegionId, RootOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossingPolicy {
    /// Cut exactly the edges whose endpoint signs differ. Extra crossings
    /// inside an edge that leave the endpoint signs equal are not resolved.
    #[default]
    SignChange,
    /// Reject edges crossed more than once, or crossed in the interior while
    /// touching the interface at an endpoint.
    Strict,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub policy: CrossingPolicy,
    pub roots: RootOptions,
}

/// A node of a cut triangle: one of its vertices, or the cut point on edge
/// `k` (from vertex `k` to vertex `k + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalNode {
    Vertex(usize),
    Cut(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutPiece {
    pub kind: ElementKind,
    nodes: [LocalNode; 4],
    /// Sign of the region the piece belongs to; 0 when every vertex is on
    /// the interface.
    pub sign: i8,
}

impl CutPiece {
    pub fn nodes(&self) -> &[LocalNode] {
        &self.nodes[..self.kind.n_nodes()]
    }
}

/// Splits a counterclockwise triangle by the straight chord through the
/// zeros of its piecewise-linear sign pattern. Edges with opposite end signs
/// carry a cut point.
pub fn cut_triangle(signs: [i8; 3]) -> Vec<CutPiece> {
    let tri = |a, b, c, sign| CutPiece {
        kind: ElementKind::Tri3,
        nodes: [a, b, c, LocalNode::Vertex(usize::MAX)],
        sign,
    };
    let v = LocalNode::Vertex;
    let zeros = signs.iter().filter(|&&s| s == 0).count();
    let whole = |sign| vec![tri(v(0), v(1), v(2), sign)];

    match zeros {
        0 => {
            if signs[0] == signs[1] && signs[1] == signs[2] {
                return whole(signs[0]);
            }
            // the isolated vertex a; d on edge a->b, e on edge c->a
            let a = (0..3)
                .find(|&k| signs[k] != signs[(k + 1) % 3] && signs[k] != signs[(k + 2) % 3])
                .expect("one vertex differs from the other two");
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let d = LocalNode::Cut(a);
            let e = LocalNode::Cut(c);
            vec![
                tri(v(a), d, e, signs[a]),
                CutPiece {
                    kind: ElementKind::Quad4,
                    nodes: [d, v(b), v(c), e],
                    sign: signs[b],
                },
            ]
        }
        1 => {
            let a = (0..3).find(|&k| signs[k] == 0).unwrap();
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            if signs[b] == signs[c] {
                whole(signs[b])
            } else {
                let p = LocalNode::Cut(b);
                vec![tri(v(a), v(b), p, signs[b]), tri(v(a), p, v(c), signs[c])]
            }
        }
        2 => whole(signs.iter().copied().find(|&s| s != 0).unwrap()),
        _ => whole(0),
    }
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn region_of(sign: i8) -> Option<RegionId> {
    match sign {
        1 => Some(RegionId::Region1),
        -1 => Some(RegionId::Region2),
        _ => None,
    }
}

/// Root parameter on the edge oriented from the smaller key to the larger,
/// so that every mesh sharing the lattice computes bit-identical points.
fn edge_root(
    ls: &LevelSet,
    (ka, pa): (Key, Point2),
    (kb, pb): (Key, Point2),
    opts: &RootOptions,
) -> Result<(Key, Key, f64)> {
    let (k0, p0, k1, p1) = if ka <= kb {
        (ka, pa, kb, pb)
    } else {
        (kb, pb, ka, pa)
    };
    let roots = scan_roots(ls, p0, p1, opts)?;
    let t = if roots.is_empty() {
        // end signs differ, so the scan cannot miss; guard anyway
        0.5
    } else {
        roots[roots.len() / 2]
    };
    Ok((k0, k1, t))
}

/// Fits `mesh` to the zero set of `ls`.
pub fn fit_mesh(mesh: &UnfittedMesh, ls: &LevelSet, opts: &FitOptions) -> Result<FittedMesh> {
    let nv = mesh.vertices.len();
    let vals: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|&p| ls.try_eval(p))
        .collect::<Result<_>>()?;

    fn edges_of(tri: &[usize; 3]) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..3).map(move |e| {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            (a.min(b), a.max(b))
        })
    }

    if opts.policy == CrossingPolicy::Strict {
        let mut done = std::collections::HashSet::new();
        for tri in &mesh.triangles {
            for (a, b) in edges_of(tri) {
                if !done.insert((a, b)) {
                    continue;
                }
                let roots = scan_roots(ls, mesh.vertices[a], mesh.vertices[b], &opts.roots)?;
                let interior = roots.iter().filter(|&&t| t > 0.0 && t < 1.0).count();
                let ends = roots.len() - interior;
                if roots.len() > opts.roots.max_roots || interior >= 2 || (interior >= 1 && ends >= 1) {
                    return Err(Error::MeshTooCoarse(format!(
                        "edge {:?}-{:?} meets `{}` {} times",
                        mesh.keys[a],
                        mesh.keys[b],
                        ls.name(),
                        roots.len()
                    )));
                }
            }
        }
    }

    // Roots that snap onto an endpoint turn that vertex into an interface
    // vertex; decide this globally before cutting anything.
    let mut roots: HashMap<(usize, usize), (Key, Key, f64)> = HashMap::new();
    let mut zero: Vec<bool> = vals.iter().map(|&v| v == 0.0).collect();
    for tri in &mesh.triangles {
        for (a, b) in edges_of(tri) {
            if vals[a] * vals[b] >= 0.0 || roots.contains_key(&(a, b)) {
                continue;
            }
            let r = edge_root(
                ls,
                (mesh.keys[a], mesh.vertices[a]),
                (mesh.keys[b], mesh.vertices[b]),
                &opts.roots,
            )?;
            let (k0, _, t) = r;
            let at_start = if k0 == mesh.keys[a] { a } else { b };
            let at_end = if at_start == a { b } else { a };
            if t == 0.0 {
                zero[at_start] = true;
            } else if t == 1.0 {
                zero[at_end] = true;
            }
            roots.insert((a, b), r);
        }
    }
    let signs: Vec<i8> = (0..nv)
        .map(|v| if zero[v] { 0 } else { sign_of(vals[v]) })
        .collect();

    let mut vertices = mesh.vertices.clone();
    let mut keys: Vec<NodeKey> = mesh.keys.iter().map(|&k| NodeKey::Lattice(k)).collect();
    let mut cut_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut elements = Vec::with_capacity(mesh.triangles.len() + mesh.triangles.len() / 8);
    let mut near_gamma = Vec::new();

    for (t, tri) in mesh.triangles.iter().enumerate() {
        let s = tri.map(|v| signs[v]);
        let pieces = cut_triangle(s);
        let cut = s.contains(&0) || pieces.len() > 1;
        for piece in pieces {
            let mut nodes = [usize::MAX; 4];
            for (slot, ln) in piece.nodes().iter().enumerate() {
                nodes[slot] = match *ln {
                    LocalNode::Vertex(k) => tri[k],
                    LocalNode::Cut(e) => {
                        let (a, b) = (tri[e], tri[(e + 1) % 3]);
                        let key = (a.min(b), a.max(b));
                        *cut_index.entry(key).or_insert_with(|| {
                            let (k0, k1, tp) = roots[&key];
                            let p0 = super::lattice_point(k0, mesh.lattice_n);
                            let p1 = super::lattice_point(k1, mesh.lattice_n);
                            vertices.push(p0.lerp(p1, tp));
                            keys.push(NodeKey::Edge(k0, k1));
                            vertices.len() - 1
                        })
                    }
                };
            }
            let pts: Vec<Point2> = nodes[..piece.kind.n_nodes()]
                .iter()
                .map(|&v| vertices[v])
                .collect();
            let region = region_of(piece.sign).unwrap_or_else(|| {
                let c = centroid(&pts);
                ls.region(c).unwrap_or(RegionId::Region1)
            });
            let el = match piece.kind {
                ElementKind::Tri3 => Element::tri([nodes[0], nodes[1], nodes[2]], region, t),
                ElementKind::Quad4 => {
                    let q = [pts[0], pts[1], pts[2], pts[3]];
                    if !strictly_convex(&q) {
                        return Err(Error::NonConvexQuad(q));
                    }
                    Element::quad(nodes, region, t)
                }
            };
            if cut {
                near_gamma.push(elements.len());
            }
            elements.push(el);
        }
    }

    let gamma_h = collect_gamma(&elements, &near_gamma);
    let (gamma_h, interface_nodes) = chain(gamma_h);
    let boundary = vertices
        .iter()
        .map(|p| p.x.abs() == 1.0 || p.y.abs() == 1.0)
        .collect();

    Ok(FittedMesh {
        vertices,
        keys,
        elements,
        interface_nodes,
        gamma_h,
        boundary,
        hanging: mesh.hanging.clone(),
        h: mesh.h,
        lattice_n: mesh.lattice_n,
        n_unfitted_vertices: nv,
    })
}

fn centroid(pts: &[Point2]) -> Point2 {
    let n = pts.len() as f64;
    let s = pts.iter().fold(Point2::default(), |acc, &p| acc + p);
    Point2::new(s.x / n, s.y / n)
}

pub(crate) fn strictly_convex(q: &[Point2; 4]) -> bool {
    (0..4).all(|i| {
        let (a, b, c) = (q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        (b - a).cross(c - b) > 0.0
    })
}

/// Edges shared by two elements of different regions. Only elements next to
/// an interface node can carry such an edge.
fn collect_gamma(elements: &[Element], near: &[usize]) -> Vec<[usize; 2]> {
    let mut owner: HashMap<(usize, usize), (usize, bool)> = HashMap::new();
    for &e in near {
        let nodes = elements[e].nodes();
        for k in 0..nodes.len() {
            let (a, b) = (nodes[k], nodes[(k + 1) % nodes.len()]);
            let key = (a.min(b), a.max(b));
            owner
                .entry(key)
                .and_modify(|(first, differs)| {
                    *differs |= elements[*first].region != elements[e].region
                })
                .or_insert((e, false));
        }
    }
    let mut out: Vec<[usize; 2]> = owner
        .into_iter()
        .filter(|(_, (_, d))| *d)
        .map(|((a, b), _)| [a, b])
        .collect();
    out.sort_unstable();
    out
}

/// Orders segments into polylines; returns the reoriented segments and the
/// node sequence.
fn chain(segs: Vec<[usize; 2]>) -> (Vec<[usize; 2]>, Vec<usize>) {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, &[a, b]) in segs.iter().enumerate() {
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }
    let mut starts: Vec<usize> = adj.keys().copied().collect();
    // open ends first so boundary-terminated curves are walked end to end
    starts.sort_unstable_by_key(|v| (adj[v].len() != 1, *v));

    let mut used = vec![false; segs.len()];
    let mut placed: HashMap<usize, ()> = HashMap::new();
    let mut out_segs = Vec::with_capacity(segs.len());
    let mut nodes = Vec::new();
    for &start in &starts {
        let mut cur = start;
        loop {
            if placed.insert(cur, ()).is_none() {
                nodes.push(cur);
            }
            let next = adj[&cur].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            let other = if segs[s][0] == cur { segs[s][1] } else { segs[s][0] };
            out_segs.push([cur, other]);
            cur = other;
        }
    }
    (out_segs, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circle, vertical_line};
    use crate::meshgen::{make_uniform_mesh, polygon_area, region_areas};

    fn realize(pts: [Point2; 3], ls: &LevelSet, piece: &CutPiece) -> Vec<Point2> {
        piece
            .nodes()
            .iter()
            .map(|n| match *n {
                LocalNode::Vertex(k) => pts[k],
                LocalNode::Cut(e) => {
                    let (a, b) = (pts[e], pts[(e + 1) % 3]);
                    let r = scan_roots(ls, a, b, &RootOptions::default()).unwrap();
                    a.lerp(b, r[0])
                }
            })
            .collect()
    }

    fn same_cycle(a: &[Point2], b: &[Point2]) -> bool {
        let close = |p: Point2, q: Point2| p.dist(q) < 1e-12;
        a.len() == b.len()
            && (0..a.len()).any(|r| (0..a.len()).all(|i| close(a[(i + r) % a.len()], b[i])))
    }

    #[test]
    fn cut_by_vertical_line() {
        let pts = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let ls = vertical_line(0.5);
        let signs = pts.map(|p| sign_of(ls.eval(p)));
        let pieces = cut_triangle(signs);
        assert_eq!(pieces.len(), 2);
        let quad = pieces.iter().find(|p| p.kind == ElementKind::Quad4).unwrap();
        let tri = pieces.iter().find(|p| p.kind == ElementKind::Tri3).unwrap();
        let q = realize(pts, &ls, quad);
        let t = realize(pts, &ls, tri);
        assert!(same_cycle(
            &q,
            &[
                Point2::new(0.0, 0.0),
                Point2::new(0.5, 0.0),
                Point2::new(0.5, 0.5),
                Point2::new(0.0, 1.0)
            ]
        ));
        assert!(same_cycle(
            &t,
            &[Point2::new(0.5, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 0.5)]
        ));
        assert_eq!(quad.sign, -1);
        assert_eq!(tri.sign, 1);
        assert!(polygon_area(&q) > 0.0 && polygon_area(&t) > 0.0);
    }

    #[test]
    fn chord_through_vertex() {
        // chord from (0,0) to the midpoint of the opposite edge
        let pts = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let ls = LevelSet::new("diag", |p| p.x - p.y);
        let signs = pts.map(|p| sign_of(ls.eval(p)));
        assert_eq!(signs, [0, 1, -1]);
        let pieces = cut_triangle(signs);
        assert_eq!(pieces.len(), 2);
        let a = realize(pts, &ls, &pieces[0]);
        let b = realize(pts, &ls, &pieces[1]);
        assert!(same_cycle(
            &a,
            &[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 0.5)]
        ));
        assert!(same_cycle(
            &b,
            &[Point2::new(0.0, 0.0), Point2::new(0.5, 0.5), Point2::new(0.0, 1.0)]
        ));
    }

    #[test]
    fn touching_and_edge_aligned_triangles_are_kept() {
        assert_eq!(cut_triangle([0, 1, 1]).len(), 1);
        assert_eq!(cut_triangle([0, 0, -1])[0].sign, -1);
        assert_eq!(cut_triangle([1, 1, 1]).len(), 1);
        assert_eq!(cut_triangle([0, 0, 0])[0].sign, 0);
    }

    #[test]
    fn every_sign_pattern_tiles_the_triangle() {
        let pts = [Point2::new(0.1, -0.2), Point2::new(1.3, 0.1), Point2::new(0.4, 0.9)];
        let area = polygon_area(&pts);
        for code in 0..27 {
            let s = [(code % 3) as i8 - 1, ((code / 3) % 3) as i8 - 1, (code / 9) as i8 - 1];
            let sub: f64 = cut_triangle(s)
                .iter()
                .map(|p| {
                    let poly: Vec<Point2> = p
                        .nodes()
                        .iter()
                        .map(|n| match *n {
                            LocalNode::Vertex(k) => pts[k],
                            LocalNode::Cut(e) => pts[e].lerp(pts[(e + 1) % 3], 0.37),
                        })
                        .collect();
                    let a = polygon_area(&poly);
                    assert!(a > 0.0, "pattern {s:?}");
                    a
                })
                .sum();
            assert!((sub - area).abs() < 1e-14, "pattern {s:?}");
        }
    }

    #[test]
    fn no_interface_copies_mesh() {
        let m = make_uniform_mesh(4).unwrap();
        let f = fit_mesh(&m, &circle(5.0), &FitOptions::default()).unwrap();
        assert_eq!(f.elements.len(), m.triangles.len());
        assert_eq!(f.vertices.len(), m.vertices.len());
        assert!(f.elements.iter().all(|e| e.kind == ElementKind::Tri3));
        assert!(f.gamma_h.is_empty() && f.interface_nodes.is_empty());
        let (a1, a2) = region_areas(&f);
        assert_eq!((a1, a2), (0.0, 4.0));
    }

    #[test]
    fn line_interface_splits_area_evenly() {
        let m = make_uniform_mesh(7).unwrap();
        let f = fit_mesh(&m, &vertical_line(0.0), &FitOptions::default()).unwrap();
        let (a1, a2) = region_areas(&f);
        assert!((a1 - 2.0).abs() < 1e-12 && (a2 - 2.0).abs() < 1e-12);
        assert_eq!(f.n_quads(), 14);
        // one boundary-terminated polyline along x = 0
        assert_eq!(f.interface_nodes.len(), 15);
        assert!(f.interface_nodes.iter().all(|&v| f.vertices[v].x.abs() < 1e-11));
    }

    #[test]
    fn circle_fit_invariants() {
        let ls = circle(0.5);
        for n in [8, 16, 32] {
            let m = make_uniform_mesh(n).unwrap();
            let f = fit_mesh(&m, &ls, &FitOptions::default()).unwrap();
            let cuts = f.keys.iter().filter(|k| matches!(k, NodeKey::Edge(..))).count();
            assert_eq!(f.vertices.len(), m.vertices.len() + cuts);
            for &v in &f.interface_nodes {
                assert!(ls.eval(f.vertices[v]).abs() < 1e-10);
            }
            let total: f64 = (0..f.elements.len()).map(|e| f.element_area(e)).sum();
            assert!((total - 4.0).abs() < 1e-12);
            // closed curve: chained segments form one cycle
            assert_eq!(f.gamma_h.len(), f.interface_nodes.len());
            for w in f.gamma_h.windows(2) {
                assert_eq!(w[0][1], w[1][0]);
            }
            assert_eq!(f.gamma_h.last().unwrap()[1], f.gamma_h[0][0]);
            // elements lie on one side of gamma_h: non-interface nodes agree
            // in sign with the element tag
            let on = f.is_interface_node();
            for el in &f.elements {
                for &v in el.nodes() {
                    if !on[v] {
                        let s = ls.eval(f.vertices[v]);
                        assert_eq!(RegionId::from_sign(s), Some(el.region));
                    }
                }
            }
        }
    }

    #[test]
    fn strict_policy_rejects_double_crossing() {
        let m = make_uniform_mesh(2).unwrap();
        let thin = LevelSet::new("thin", |p| {
            (p.x - 0.5).powi(2) / 0.09 + (p.y + 1.0).powi(2) / 1e-4 - 1.0
        });
        let strict = FitOptions {
            policy: CrossingPolicy::Strict,
            ..Default::default()
        };
        assert!(matches!(fit_mesh(&m, &thin, &strict), Err(Error::MeshTooCoarse(_))));
        // the default policy sees no sign change and leaves the mesh alone
        let f = fit_mesh(&m, &thin, &FitOptions::default()).unwrap();
        assert_eq!(f.elements.len(), 8);
    }

    #[test]
    fn snapped_roots_become_interface_vertices() {
        let m = make_uniform_mesh(4).unwrap();
        // passes 1e-12 to the right of the grid line x = 0
        let ls = vertical_line(1e-12);
        let f = fit_mesh(&m, &ls, &FitOptions::default()).unwrap();
        assert_eq!(f.vertices.len(), m.vertices.len());
        assert_eq!(f.n_quads(), 0);
        assert_eq!(f.interface_nodes.len(), 5);
        let (a1, a2) = region_areas(&f);
        assert!((a1 - 2.0).abs() < 1e-14 && (a2 - 2.0).abs() < 1e-14);
    }
}
