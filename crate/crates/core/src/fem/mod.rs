//! Conforming P1/Q1 finite elements on fitted meshes, with the solution jump
//! carried by a Region2-side ghost layer at interface nodes.

mod quadrature;
mod shape;

pub use quadrature::{gauss_unit, QuadRule};
pub use shape::{
    for_each_qpoint, local_stiffness_quad, local_stiffness_tri, p1_gradients, q1_inverse, q1_jacobian,
    q1_map, q1_shape, q1_shape_grad, QPoint,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Point2, RegionId};
use crate::meshgen::{ElementKind, FittedMesh};
use crate::sparse::CsrMatrix;

pub type ScalarFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;
pub type RegionFn = Arc<dyn Fn(Point2, RegionId) -> f64 + Send + Sync>;

/// How the flux jump enters the load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GMode {
    /// Three-point Gauss rule on each segment of the discrete interface.
    Exact,
    /// Nodal interpolant through the interface nodes, integrated exactly.
    #[default]
    Nodal,
}

impl std::str::FromStr for GMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(GMode::Exact),
            "nodal" => Ok(GMode::Nodal),
            _ => Err(Error::InvalidArgument(format!("g mode '{s}' (expected exact or nodal)"))),
        }
    }
}

#[derive(Clone)]
pub struct ProblemData {
    pub beta1: f64,
    pub beta2: f64,
    pub f: RegionFn,
    pub g: ScalarFn,
    pub q: ScalarFn,
    pub g_mode: GMode,
    /// Boundary values; `None` means homogeneous.
    pub dirichlet: Option<RegionFn>,
}

impl std::fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemData")
            .field("beta1", &self.beta1)
            .field("beta2", &self.beta2)
            .field("g_mode", &self.g_mode)
            .finish_non_exhaustive()
    }
}

impl ProblemData {
    /// Zero source and zero jumps.
    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        if !(beta1 > 0.0 && beta2 > 0.0 && beta1.is_finite() && beta2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "coefficients must be positive, got beta1={beta1}, beta2={beta2}"
            )));
        }
        Ok(Self {
            beta1,
            beta2,
            f: Arc::new(|_, _| 0.0),
            g: Arc::new(|_| 0.0),
            q: Arc::new(|_| 0.0),
            g_mode: GMode::default(),
            dirichlet: None,
        })
    }

    pub fn with_f(mut self, f: impl Fn(Point2, RegionId) -> f64 + Send + Sync + 'static) -> Self {
        self.f = Arc::new(f);
        self
    }

    pub fn with_g(mut self, g: impl Fn(Point2) -> f64 + Send + Sync + 'static) -> Self {
        self.g = Arc::new(g);
        self
    }

    pub fn with_q(mut self, q: impl Fn(Point2) -> f64 + Send + Sync + 'static) -> Self {
        self.q = Arc::new(q);
        self
    }

    pub fn with_g_mode(mut self, mode: GMode) -> Self {
        self.g_mode = mode;
        self
    }

    pub fn with_dirichlet(mut self, u: impl Fn(Point2, RegionId) -> f64 + Send + Sync + 'static) -> Self {
        self.dirichlet = Some(Arc::new(u));
        self
    }

    pub fn beta(&self, r: RegionId) -> f64 {
        match r {
            RegionId::Region1 => self.beta1,
            RegionId::Region2 => self.beta2,
        }
    }
}

/// Degrees of freedom: one per vertex that is neither on the outer boundary
/// nor a hanging node. Hanging nodes are expanded into their master
/// vertices with interpolation weights.
#[derive(Debug, Clone)]
pub struct DofMap {
    dof: Vec<Option<usize>>,
    pub dirichlet: Vec<usize>,
    pub n_dofs: usize,
    pub interface_dofs: Vec<usize>,
    offsets: Vec<usize>,
    masters: Vec<(usize, f64)>,
}

impl DofMap {
    pub fn new(mesh: &FittedMesh) -> Result<Self> {
        let nv = mesh.n_vertices();
        let mut parents: Vec<Option<[usize; 2]>> = vec![None; nv];
        for h in &mesh.hanging {
            parents[h.node] = Some(h.parents);
        }
        let mut dof = vec![None; nv];
        let mut dirichlet = Vec::new();
        let mut n_dofs = 0;
        for v in 0..nv {
            if mesh.boundary[v] {
                dirichlet.push(v);
            } else if parents[v].is_none() {
                dof[v] = Some(n_dofs);
                n_dofs += 1;
            }
        }

        let mut expansion: Vec<Option<Vec<(usize, f64)>>> = vec![None; nv];
        for v in 0..nv {
            expand(v, &parents, &mut expansion, 0)?;
        }
        let mut offsets = Vec::with_capacity(nv + 1);
        let mut masters = Vec::with_capacity(nv);
        offsets.push(0);
        for e in expansion {
            masters.extend(e.expect("expanded above"));
            offsets.push(masters.len());
        }

        let interface_dofs = mesh.interface_nodes.iter().filter_map(|&v| dof[v]).collect();
        Ok(Self { dof, dirichlet, n_dofs, interface_dofs, offsets, masters })
    }

    pub fn dof(&self, v: usize) -> Option<usize> {
        self.dof[v]
    }

    pub fn n_vertices(&self) -> usize {
        self.dof.len()
    }

    /// Non-hanging vertices and weights that represent vertex `v`.
    pub fn masters(&self, v: usize) -> &[(usize, f64)] {
        &self.masters[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Vertex values from a dof vector, with boundary values from `bc`.
    pub fn expand(&self, x: &[f64], bc: impl Fn(usize) -> f64) -> Vec<f64> {
        assert_eq!(x.len(), self.n_dofs);
        let base: Vec<f64> = (0..self.n_vertices())
            .map(|v| match self.dof[v] {
                Some(d) => x[d],
                None => bc(v),
            })
            .collect();
        (0..self.n_vertices())
            .map(|v| self.masters(v).iter().map(|&(m, w)| w * base[m]).sum())
            .collect()
    }

    /// Dof vector from vertex values (hanging and boundary vertices dropped).
    pub fn restrict(&self, values: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dofs];
        for (v, d) in self.dof.iter().enumerate() {
            if let Some(d) = d {
                x[*d] = values[v];
            }
        }
        x
    }
}

fn expand(
    v: usize,
    parents: &[Option<[usize; 2]>],
    memo: &mut [Option<Vec<(usize, f64)>>],
    depth: usize,
) -> Result<()> {
    if memo[v].is_some() {
        return Ok(());
    }
    if depth > 64 {
        return Err(Error::InvalidArgument("cyclic hanging-node constraints".into()));
    }
    let Some([a, b]) = parents[v] else {
        memo[v] = Some(vec![(v, 1.0)]);
        return Ok(());
    };
    expand(a, parents, memo, depth + 1)?;
    expand(b, parents, memo, depth + 1)?;
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for p in [a, b] {
        for &(m, w) in memo[p].as_ref().unwrap() {
            *acc.entry(m).or_default() += 0.5 * w;
        }
    }
    memo[v] = Some(acc.into_iter().collect());
    Ok(())
}

/// A continuous piecewise P1/Q1 function on each of the two subdomains.
/// `values` holds the Region1-side value at every vertex; on Region2
/// elements an interface node `v` takes `values[v] + region2_offset[v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub values: Vec<f64>,
    pub region2_offset: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(n_vertices: usize) -> Self {
        Self { values: vec![0.0; n_vertices], region2_offset: vec![0.0; n_vertices] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len();
        Self { values, region2_offset: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, v: usize, region: RegionId) -> f64 {
        match region {
            RegionId::Region1 => self.values[v],
            RegionId::Region2 => self.values[v] + self.region2_offset[v],
        }
    }

    /// `u|_1 - u|_2` at vertex `v`.
    pub fn jump(&self, v: usize) -> f64 {
        -self.region2_offset[v]
    }

    pub fn element_values(&self, mesh: &FittedMesh, e: usize) -> [f64; 4] {
        let el = &mesh.elements[e];
        let mut out = [0.0; 4];
        for (k, &v) in el.nodes().iter().enumerate() {
            out[k] = self.value(v, el.region);
        }
        out
    }

    /// Value and gradient at a quadrature point of element `e`.
    pub fn eval_qpoint(&self, mesh: &FittedMesh, e: usize, qp: &QPoint) -> (f64, [f64; 2]) {
        let vals = self.element_values(mesh, e);
        let mut u = 0.0;
        let mut g = [0.0; 2];
        for k in 0..qp.n {
            u += vals[k] * qp.phi[k];
            g[0] += vals[k] * qp.grad[k][0];
            g[1] += vals[k] * qp.grad[k][1];
        }
        (u, g)
    }

    /// Value at an arbitrary point of element `e`.
    pub fn eval_in_element(&self, mesh: &FittedMesh, e: usize, p: Point2) -> Result<f64> {
        let pts = mesh.element_points(e);
        let vals = self.element_values(mesh, e);
        match pts.len() {
            3 => {
                let t = [pts[0], pts[1], pts[2]];
                let (g, _) = p1_gradients(&t)?;
                let d = p - t[0];
                let l1 = g[1][0] * d.x + g[1][1] * d.y;
                let l2 = g[2][0] * d.x + g[2][1] * d.y;
                Ok(vals[0] * (1.0 - l1 - l2) + vals[1] * l1 + vals[2] * l2)
            }
            _ => {
                let q = [pts[0], pts[1], pts[2], pts[3]];
                let r = q1_inverse(&q, p)?;
                let s = q1_shape(r);
                Ok((0..4).map(|k| vals[k] * s[k]).sum())
            }
        }
    }
}

/// The lifting of the solution jump: `-q(O_i)` at interface nodes, seen
/// only from Region2 elements.
pub fn build_z_gamma(mesh: &FittedMesh, q: &dyn Fn(Point2) -> f64) -> DiscreteField {
    let mut z = DiscreteField::zeros(mesh.n_vertices());
    for &v in &mesh.interface_nodes {
        z.region2_offset[v] = -q(mesh.vertices[v]);
    }
    z
}

pub fn reconstruct_uh(ubar: &DiscreteField, zgamma: &DiscreteField) -> Result<DiscreteField> {
    if ubar.len() != zgamma.len() || ubar.region2_offset.len() != zgamma.region2_offset.len() {
        return Err(Error::Dimension(format!(
            "fields live on different meshes ({} vs {} vertices)",
            ubar.len(),
            zgamma.len()
        )));
    }
    let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
    Ok(DiscreteField {
        values: add(&ubar.values, &zgamma.values),
        region2_offset: add(&ubar.region2_offset, &zgamma.region2_offset),
    })
}

/// The solution field for dof vector `x`, boundary values included.
pub fn field_from_dofs(mesh: &FittedMesh, data: &ProblemData, dofs: &DofMap, x: &[f64]) -> DiscreteField {
    let bc = boundary_values(mesh, data);
    DiscreteField::from_values(dofs.expand(x, |v| bc[v]))
}

fn boundary_values(mesh: &FittedMesh, data: &ProblemData) -> Vec<f64> {
    let mut bc = vec![0.0; mesh.n_vertices()];
    if let Some(u) = &data.dirichlet {
        // interface nodes store the Region1-side value
        let iface = mesh.is_interface_node();
        for e in &mesh.elements {
            for &v in e.nodes() {
                if mesh.boundary[v] {
                    let r = if iface[v] { RegionId::Region1 } else { e.region };
                    bc[v] = u(mesh.vertices[v], r);
                }
            }
        }
    }
    bc
}

/// Nodal interpolant of a function given per region. Hanging nodes take
/// their constrained values so the result is conforming.
pub fn interpolate(mesh: &FittedMesh, dofs: &DofMap, u: &dyn Fn(Point2, RegionId) -> f64) -> DiscreteField {
    let iface = mesh.is_interface_node();
    let mut field = DiscreteField::zeros(mesh.n_vertices());
    let mut done = vec![false; mesh.n_vertices()];
    for e in &mesh.elements {
        for &v in e.nodes() {
            if done[v] {
                continue;
            }
            done[v] = true;
            let p = mesh.vertices[v];
            if iface[v] {
                let u1 = u(p, RegionId::Region1);
                field.values[v] = u1;
                field.region2_offset[v] = u(p, RegionId::Region2) - u1;
            } else {
                field.values[v] = u(p, e.region);
            }
        }
    }
    let base = field.values.clone();
    for h in &mesh.hanging {
        field.values[h.node] = dofs.masters(h.node).iter().map(|&(m, w)| w * base[m]).sum();
    }
    field
}

/// Assembles the stiffness matrix and load vector on the free dofs.
pub fn assemble(mesh: &FittedMesh, data: &ProblemData, dofs: &DofMap) -> Result<(CsrMatrix, Vec<f64>)> {
    if dofs.n_vertices() != mesh.n_vertices() {
        return Err(Error::Dimension(format!(
            "dof map for {} vertices, mesh has {}",
            dofs.n_vertices(),
            mesh.n_vertices()
        )));
    }
    let n = dofs.n_dofs;
    let tri_rule = QuadRule::triangle_3();
    let quad_rule = QuadRule::square_gauss(2);
    let load_quad_rule = QuadRule::square_gauss(3);
    let z = build_z_gamma(mesh, &*data.q);
    let bc = boundary_values(mesh, data);

    let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(mesh.elements.len() * 16);
    let mut b = vec![0.0; n];
    let mut kloc = [[0.0; 4]; 4];

    for (e, el) in mesh.elements.iter().enumerate() {
        let pts = mesh.element_points(e);
        let beta = data.beta(el.region);
        let nodes = el.nodes();
        let m = nodes.len();
        match el.kind {
            ElementKind::Tri3 => {
                let k = local_stiffness_tri(&[pts[0], pts[1], pts[2]], beta)?;
                for a in 0..3 {
                    kloc[a][..3].copy_from_slice(&k[a]);
                }
            }
            ElementKind::Quad4 => {
                kloc = local_stiffness_quad(&[pts[0], pts[1], pts[2], pts[3]], beta, &quad_rule)?;
            }
        }

        let mut floc = [0.0; 4];
        for_each_qpoint(&pts, &tri_rule, &load_quad_rule, |qp| {
            let fx = (data.f)(qp.x, el.region);
            for a in 0..m {
                floc[a] += qp.weight * fx * qp.phi[a];
            }
        })?;

        // known part: jump lifting on Region2 plus boundary lifting
        let mut known = [0.0; 4];
        let mut any_known = false;
        for (a, &v) in nodes.iter().enumerate() {
            let mut val = 0.0;
            if el.region == RegionId::Region2 {
                val += z.region2_offset[v];
            }
            for &(mv, w) in dofs.masters(v) {
                if dofs.dof(mv).is_none() {
                    val += w * bc[mv];
                }
            }
            known[a] = val;
            any_known |= val != 0.0;
        }
        if any_known {
            for a in 0..m {
                for c in 0..m {
                    floc[a] -= kloc[a][c] * known[c];
                }
            }
        }

        for a in 0..m {
            for &(ma, wa) in dofs.masters(nodes[a]) {
                let Some(da) = dofs.dof(ma) else { continue };
                b[da] += wa * floc[a];
                for c in 0..m {
                    for &(mc, wc) in dofs.masters(nodes[c]) {
                        if let Some(dc) = dofs.dof(mc) {
                            trip.push((da, dc, wa * wc * kloc[a][c]));
                        }
                    }
                }
            }
        }
    }

    let (gx, gw) = gauss_unit(3);
    for &[i, j] in &mesh.gamma_h {
        let (pi, pj) = (mesh.vertices[i], mesh.vertices[j]);
        let len = pi.dist(pj);
        let (li, lj) = match data.g_mode {
            GMode::Nodal => {
                let (gi, gj) = ((data.g)(pi), (data.g)(pj));
                (len / 6.0 * (2.0 * gi + gj), len / 6.0 * (gi + 2.0 * gj))
            }
            GMode::Exact => {
                let mut acc = (0.0, 0.0);
                for (s, w) in gx.iter().zip(&gw) {
                    let gv = (data.g)(pi.lerp(pj, *s));
                    acc.0 += len * w * gv * (1.0 - s);
                    acc.1 += len * w * gv * s;
                }
                acc
            }
        };
        for (v, l) in [(i, li), (j, lj)] {
            for &(mv, w) in dofs.masters(v) {
                if let Some(d) = dofs.dof(mv) {
                    b[d] += w * l;
                }
            }
        }
    }

    Ok((CsrMatrix::from_triplets(n, n, &trip), b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circle, vertical_line};
    use crate::meshgen::{build_hierarchy, fit_mesh, make_uniform_mesh, FitOptions};

    fn fitted(n: usize, ls: &crate::geometry::LevelSet) -> FittedMesh {
        fit_mesh(&make_uniform_mesh(n).unwrap(), ls, &FitOptions::default()).unwrap()
    }

    #[test]
    fn poisson_matches_dense_oracle() {
        // dense assembly by brute force over the triangles of the grid
        let mesh = fitted(4, &circle(5.0));
        let data = ProblemData::new(1.0, 1.0).unwrap();
        let dofs = DofMap::new(&mesh).unwrap();
        let (a, b) = assemble(&mesh, &data, &dofs).unwrap();
        assert_eq!(dofs.n_dofs, 9);
        assert!(b.iter().all(|&x| x == 0.0));
        let nv = mesh.n_vertices();
        let mut dense = vec![vec![0.0; nv]; nv];
        for e in &mesh.elements {
            let t: Vec<Point2> = e.nodes().iter().map(|&v| mesh.vertices[v]).collect();
            let area = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]);
            for a in 0..3 {
                for c in 0..3 {
                    // grad lambda_a . grad lambda_c = (e_a . e_c) / (4 area^2)
                    let ea = t[(a + 2) % 3] - t[(a + 1) % 3];
                    let ec = t[(c + 2) % 3] - t[(c + 1) % 3];
                    dense[e.nodes()[a]][e.nodes()[c]] += ea.dot(ec) / (4.0 * area);
                }
            }
        }
        for u in 0..nv {
            for v in 0..nv {
                if let (Some(du), Some(dv)) = (dofs.dof(u), dofs.dof(v)) {
                    assert!((a.get(du, dv) - dense[u][v]).abs() < 1e-14);
                }
            }
        }
        // the usual five-point stencil on this triangulation
        let centre = mesh.keys.iter().position(|k| *k == crate::meshgen::NodeKey::Lattice([2, 2])).unwrap();
        let d = dofs.dof(centre).unwrap();
        assert!((a.get(d, d) - 4.0).abs() < 1e-14);
        let (cols, vals) = a.row(d);
        let off: f64 = cols.iter().zip(vals).filter(|(c, _)| **c != d).map(|(_, v)| v).sum();
        assert!((off + 4.0).abs() < 1e-14);
        assert!(a.asymmetry() < 1e-15);
    }

    #[test]
    fn zero_data_gives_zero_load() {
        let mesh = fitted(8, &circle(0.5));
        let data = ProblemData::new(1e4, 1.0).unwrap();
        let dofs = DofMap::new(&mesh).unwrap();
        let (a, b) = assemble(&mesh, &data, &dofs).unwrap();
        assert!(b.iter().all(|&x| x == 0.0));
        assert!(a.diagonal().iter().all(|&d| d > 0.0));
        assert!(a.asymmetry() < 1e-12);
    }

    #[test]
    fn linear_function_reproduced_with_lifting() {
        // u = 1 + 2x - y with beta = 1 and boundary data is in V_h on both
        // triangles and bilinear quads
        let mesh = fitted(8, &circle(0.5));
        let u = |p: Point2, _| 1.0 + 2.0 * p.x - p.y;
        let data = ProblemData::new(1.0, 1.0).unwrap().with_dirichlet(u);
        let dofs = DofMap::new(&mesh).unwrap();
        let (a, b) = assemble(&mesh, &data, &dofs).unwrap();
        let x = crate::linsolve::solve_direct(&a, &b).unwrap();
        let field = field_from_dofs(&mesh, &data, &dofs, &x);
        for (v, p) in mesh.vertices.iter().enumerate() {
            assert!((field.values[v] - u(*p, RegionId::Region1)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_jump_is_carried_by_lifting() {
        // u = 1 in Region1 (x > 0.1), 0 in Region2, beta arbitrary: the
        // discrete solution reproduces it exactly
        let mesh = fitted(8, &vertical_line(0.1));
        let data = ProblemData::new(3.0, 0.5)
            .unwrap()
            .with_q(|_| 1.0)
            .with_dirichlet(|_, r| if r == RegionId::Region1 { 1.0 } else { 0.0 });
        let dofs = DofMap::new(&mesh).unwrap();
        let (a, b) = assemble(&mesh, &data, &dofs).unwrap();
        let x = crate::linsolve::solve_direct(&a, &b).unwrap();
        let ubar = field_from_dofs(&mesh, &data, &dofs, &x);
        let uh = reconstruct_uh(&ubar, &build_z_gamma(&mesh, &*data.q)).unwrap();
        for (e, el) in mesh.elements.iter().enumerate() {
            let want = if el.region == RegionId::Region1 { 1.0 } else { 0.0 };
            for val in &uh.element_values(&mesh, e)[..el.nodes().len()] {
                assert!((val - want).abs() < 1e-12);
            }
        }
        for &v in &mesh.interface_nodes {
            assert!((uh.jump(v) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn z_gamma_examples() {
        let mesh = fitted(16, &circle(0.5));
        let z = build_z_gamma(&mesh, &|_| 0.0);
        assert!(z.values.iter().chain(&z.region2_offset).all(|&v| v == 0.0));

        let z = build_z_gamma(&mesh, &|_| 2.5);
        let ubar = DiscreteField::zeros(mesh.n_vertices());
        let uh = reconstruct_uh(&ubar, &z).unwrap();
        for &v in &mesh.interface_nodes {
            assert_eq!(uh.value(v, RegionId::Region2), -2.5);
            assert_eq!(uh.value(v, RegionId::Region1), 0.0);
            assert_eq!(uh.jump(v), 2.5);
        }

        let (b1, b2) = (10.0, 1.0);
        let q = move |p: Point2| {
            (1.0 / b1 - 1.0 / b2) * (std::f64::consts::PI * p.x).sin() * (std::f64::consts::PI * p.y).sin() - 5.0
        };
        let z = build_z_gamma(&mesh, &q);
        for &v in &mesh.interface_nodes {
            assert_eq!(z.region2_offset[v], -q(mesh.vertices[v]));
        }
        assert!(reconstruct_uh(&ubar, &DiscreteField::zeros(3)).is_err());
    }

    #[test]
    fn flux_jump_line_term_modes() {
        // constant g: both modes give len/2 per segment end
        let mesh = fitted(8, &circle(0.5));
        let dofs = DofMap::new(&mesh).unwrap();
        let total_len: f64 = mesh
            .gamma_h
            .iter()
            .map(|&[i, j]| mesh.vertices[i].dist(mesh.vertices[j]))
            .sum();
        for mode in [GMode::Nodal, GMode::Exact] {
            let data = ProblemData::new(1.0, 1.0).unwrap().with_g(|_| 1.0).with_g_mode(mode);
            let (_, b) = assemble(&mesh, &data, &dofs).unwrap();
            assert!((b.iter().sum::<f64>() - total_len).abs() < 1e-13);
        }
        // linear g along the segments is integrated exactly by both modes
        let g = |p: Point2| 1.0 + p.x - 2.0 * p.y;
        let nodal = assemble(&mesh, &ProblemData::new(1.0, 1.0).unwrap().with_g(g), &dofs).unwrap().1;
        let exact = assemble(
            &mesh,
            &ProblemData::new(1.0, 1.0).unwrap().with_g(g).with_g_mode(GMode::Exact),
            &dofs,
        )
        .unwrap()
        .1;
        for (x, y) in nodal.iter().zip(&exact) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn hanging_nodes_are_constrained() {
        let hier = build_hierarchy(&circle(0.5), 4, 2).unwrap();
        let mesh = &hier.levels[1];
        assert!(!mesh.hanging.is_empty());
        let dofs = DofMap::new(mesh).unwrap();
        for h in &mesh.hanging {
            assert!(dofs.dof(h.node).is_none());
            let w: f64 = dofs.masters(h.node).iter().map(|m| m.1).sum();
            assert!((w - 1.0).abs() < 1e-15);
            for &(m, _) in dofs.masters(h.node) {
                assert!(!mesh.hanging.iter().any(|g| g.node == m));
            }
        }
        // linear functions remain exact on the constrained space
        let u = |p: Point2, _| 0.3 - p.x + 0.7 * p.y;
        let data = ProblemData::new(1.0, 1.0).unwrap().with_dirichlet(u);
        let (a, b) = assemble(mesh, &data, &dofs).unwrap();
        let x = crate::linsolve::solve_direct(&a, &b).unwrap();
        let field = field_from_dofs(mesh, &data, &dofs, &x);
        for (v, p) in mesh.vertices.iter().enumerate() {
            assert!((field.values[v] - u(*p, RegionId::Region1)).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_is_exact_for_linear_pieces() {
        let mesh = fitted(16, &circle(0.5));
        let dofs = DofMap::new(&mesh).unwrap();
        let u = |p: Point2, r: RegionId| match r {
            RegionId::Region1 => 2.0 * p.x + 1.0,
            RegionId::Region2 => -p.y,
        };
        let field = interpolate(&mesh, &dofs, &u);
        let rule = QuadRule::triangle_7();
        let qrule = QuadRule::square_gauss(3);
        for (e, el) in mesh.elements.iter().enumerate() {
            if el.kind == ElementKind::Quad4 {
                continue;
            }
            for_each_qpoint(&mesh.element_points(e), &rule, &qrule, |qp| {
                let (val, _) = field.eval_qpoint(&mesh, e, qp);
                assert!((val - u(qp.x, el.region)).abs() < 1e-12);
            })
            .unwrap();
        }
    }
}
