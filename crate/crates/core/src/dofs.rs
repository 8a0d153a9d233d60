//! Degree-of-freedom numbering for P1, P2 and vector P2 spaces, and fields
//! as coefficient vectors over them.
//!
//! P2 nodes are the mesh vertices followed by the edge midpoints (node
//! `V + e` for edge `e`). The vector space interleaves components, so node
//! `k` owns dofs `2k` and `2k + 1`.

use std::io::{self, Write};
use std::sync::Arc;

use crate::elements::{eval_basis, Family};
use crate::error::{Error, Result};
use crate::expr::EvalError;
use crate::mesh::{BcKind, BoundaryPartition, Mesh, Point, Side, SideSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    P1,
    P2,
    P2Vec,
}

impl SpaceKind {
    pub fn family(self) -> Family {
        match self {
            SpaceKind::P1 => Family::P1,
            SpaceKind::P2 | SpaceKind::P2Vec => Family::P2,
        }
    }

    pub fn components(self) -> usize {
        match self {
            SpaceKind::P2Vec => 2,
            _ => 1,
        }
    }

    pub fn is_scalar(self) -> bool {
        self.components() == 1
    }
}

#[derive(Clone, Debug)]
pub struct DofMap {
    kind: SpaceKind,
    mesh: Arc<Mesh>,
    partition: BoundaryPartition,
    nodes: Vec<Point>,
    node_sides: Vec<SideSet>,
    /// Local-to-global dofs, `local_dofs()` entries per cell.
    cell_dofs: Vec<usize>,
    dirichlet: Vec<bool>,
}

pub fn build_dofmap(mesh: Arc<Mesh>, kind: SpaceKind, part: BoundaryPartition) -> DofMap {
    let rect = mesh.rect();
    let mut nodes: Vec<Point> = mesh.vertices().to_vec();
    if kind.family() == Family::P2 {
        nodes.extend((0..mesh.num_edges()).map(|e| mesh.edge_midpoint(e)));
    }
    let mut node_sides: Vec<SideSet> = vec![SideSet::empty(); nodes.len()];
    // only boundary edges and their endpoints can touch a side
    for be in mesh.boundary_edges() {
        let Some(side) = be.side else { continue };
        let [a, b] = mesh.edges()[be.edge].vertices;
        node_sides[a].insert(side);
        node_sides[b].insert(side);
        if kind.family() == Family::P2 {
            node_sides[mesh.num_vertices() + be.edge].insert(side);
        }
    }
    for (p, s) in nodes.iter().zip(node_sides.iter_mut()) {
        if !s.is_empty() {
            *s = s.union(rect.sides_of(*p));
        }
    }

    let ncomp = kind.components();
    let nv = mesh.num_vertices();
    let nb = kind.family().num_basis();
    let mut cell_dofs = Vec::with_capacity(mesh.num_cells() * nb * ncomp);
    for c in 0..mesh.num_cells() {
        let tri = mesh.triangles()[c];
        let mut local = [0usize; 6];
        local[..3].copy_from_slice(&tri);
        if nb == 6 {
            for (k, &e) in mesh.cell_edges()[c].iter().enumerate() {
                local[3 + k] = nv + e;
            }
        }
        for &node in &local[..nb] {
            for comp in 0..ncomp {
                cell_dofs.push(ncomp * node + comp);
            }
        }
    }

    let dsides = part.dirichlet_sides();
    let dirichlet = node_sides
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.intersects(dsides), ncomp))
        .collect();

    DofMap {
        kind,
        mesh,
        partition: part,
        nodes,
        node_sides,
        cell_dofs,
        dirichlet,
    }
}

impl DofMap {
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn partition(&self) -> &BoundaryPartition {
        &self.partition
    }

    pub fn components(&self) -> usize {
        self.kind.components()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.nodes.len() * self.components()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Sides whose closure contains the node; empty for interior nodes.
    pub fn node_sides(&self, node: usize) -> SideSet {
        self.node_sides[node]
    }

    pub fn node_of(&self, dof: usize) -> usize {
        dof / self.components()
    }

    /// Dofs per cell.
    pub fn local_dofs(&self) -> usize {
        self.kind.family().num_basis() * self.components()
    }

    /// Global dofs of a cell; for vector spaces local dof `2a + c` is
    /// component `c` at local node `a`.
    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        let n = self.local_dofs();
        &self.cell_dofs[cell * n..(cell + 1) * n]
    }

    /// Dirichlet flags per dof: the node lies on the closure of a Dirichlet side.
    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    pub fn num_dirichlet(&self) -> usize {
        self.dirichlet.iter().filter(|&&d| d).count()
    }

    /// Dofs whose node lies on the closure of `side`.
    pub fn dofs_on_side(&self, side: Side) -> Vec<usize> {
        let nc = self.components();
        (0..self.num_dofs())
            .filter(|&d| self.node_sides[d / nc].contains(side))
            .collect()
    }

    pub fn boundary_dofs(&self, which: BcKind) -> Vec<usize> {
        let sides = self.partition.sides(which);
        let nc = self.components();
        (0..self.num_dofs())
            .filter(|&d| self.node_sides[d / nc].intersects(sides))
            .collect()
    }

    /// Same numbering with a different Dirichlet partition.
    pub fn with_partition(&self, part: BoundaryPartition) -> DofMap {
        build_dofmap(self.mesh.clone(), self.kind, part)
    }
}

fn eval_at(f: &impl Fn(f64, f64) -> std::result::Result<f64, EvalError>, p: Point) -> Result<f64> {
    f(p[0], p[1]).map_err(|source| Error::Evaluation {
        x: p[0],
        y: p[1],
        source,
    })
}

#[derive(Clone, Debug)]
pub struct Field {
    dofmap: Arc<DofMap>,
    coeffs: Vec<f64>,
}

impl Field {
    pub fn new(dofmap: Arc<DofMap>, coeffs: Vec<f64>) -> Result<Field> {
        if coeffs.len() != dofmap.num_dofs() {
            return Err(Error::SpaceMismatch(format!(
                "{} coefficients for a space with {} dofs",
                coeffs.len(),
                dofmap.num_dofs()
            )));
        }
        Ok(Field { dofmap, coeffs })
    }

    pub fn zeros(dofmap: Arc<DofMap>) -> Field {
        let n = dofmap.num_dofs();
        Field {
            dofmap,
            coeffs: vec![0.0; n],
        }
    }

    pub fn constant(dofmap: Arc<DofMap>, value: f64) -> Field {
        assert!(dofmap.kind().is_scalar());
        let n = dofmap.num_dofs();
        Field {
            dofmap,
            coeffs: vec![value; n],
        }
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate_scalar(
        dofmap: Arc<DofMap>,
        f: impl Fn(f64, f64) -> std::result::Result<f64, EvalError>,
    ) -> Result<Field> {
        if !dofmap.kind().is_scalar() {
            return Err(Error::SpaceMismatch("scalar function on a vector space".into()));
        }
        let coeffs = dofmap.nodes().iter().map(|&p| eval_at(&f, p)).collect::<Result<_>>()?;
        Ok(Field { dofmap, coeffs })
    }

    /// Nodal interpolant of a vector function given componentwise.
    pub fn interpolate_vector(
        dofmap: Arc<DofMap>,
        fx: impl Fn(f64, f64) -> std::result::Result<f64, EvalError>,
        fy: impl Fn(f64, f64) -> std::result::Result<f64, EvalError>,
    ) -> Result<Field> {
        if dofmap.kind() != SpaceKind::P2Vec {
            return Err(Error::SpaceMismatch("vector function on a scalar space".into()));
        }
        let mut coeffs = Vec::with_capacity(dofmap.num_dofs());
        for &p in dofmap.nodes() {
            coeffs.push(eval_at(&fx, p)?);
            coeffs.push(eval_at(&fy, p)?);
        }
        Ok(Field { dofmap, coeffs })
    }

    pub fn dofmap(&self) -> &Arc<DofMap> {
        &self.dofmap
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.dofmap.mesh()
    }

    pub fn kind(&self) -> SpaceKind {
        self.dofmap.kind()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    fn check_same_space(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.dofmap, &other.dofmap)
            || (self.kind() == other.kind()
                && self.coeffs.len() == other.coeffs.len()
                && Arc::ptr_eq(self.mesh(), other.mesh()))
        {
            Ok(())
        } else {
            Err(Error::SpaceMismatch("fields live on different spaces".into()))
        }
    }

    /// `self + alpha * other` on the same space.
    pub fn axpy(&self, alpha: f64, other: &Field) -> Result<Field> {
        self.check_same_space(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(Field {
            dofmap: self.dofmap.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(-1.0, other)
    }

    pub fn scaled(&self, alpha: f64) -> Field {
        Field {
            dofmap: self.dofmap.clone(),
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
        }
    }

    pub fn add_constant(&self, c: f64) -> Result<Field> {
        if !self.kind().is_scalar() {
            return Err(Error::SpaceMismatch("constant shift of a vector field".into()));
        }
        Ok(Field {
            dofmap: self.dofmap.clone(),
            coeffs: self.coeffs.iter().map(|v| v + c).collect(),
        })
    }

    /// Coefficients of one cell in local dof order.
    pub fn local_coeffs(&self, cell: usize) -> Vec<f64> {
        self.dofmap.cell_dofs(cell).iter().map(|&d| self.coeffs[d]).collect()
    }

    /// Value (per component) and physical gradient (per component) at a
    /// reference point of a cell.
    pub fn eval_in_cell(&self, cell: usize, xi: Point) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
        let map = crate::elements::geometry_map(self.mesh(), cell)?;
        let basis = eval_basis(self.kind().family(), xi)?;
        let nc = self.dofmap.components();
        let dofs = self.dofmap.cell_dofs(cell);
        let mut val = vec![0.0; nc];
        let mut grad = vec![[0.0; 2]; nc];
        for (a, (&phi, &g)) in basis.values.iter().zip(&basis.gradients).enumerate() {
            let g = map.push_gradient(g);
            for c in 0..nc {
                let u = self.coeffs[dofs[nc * a + c]];
                val[c] += u * phi;
                grad[c][0] += u * g[0];
                grad[c][1] += u * g[1];
            }
        }
        Ok((val, grad))
    }

    /// Value and gradient at a physical point.
    pub fn eval_at(&self, p: Point) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
        let (cell, xi) = self
            .mesh()
            .locate(p)
            .ok_or_else(|| Error::InvalidData(format!("point ({}, {}) lies outside the mesh", p[0], p[1])))?;
        self.eval_in_cell(cell, xi)
    }

    pub fn value_at(&self, p: Point) -> Result<Vec<f64>> {
        Ok(self.eval_at(p)?.0)
    }

    /// `(1/|Ω|) ∫ field`, integrated exactly.
    pub fn mean_value(&self) -> Result<f64> {
        if !self.kind().is_scalar() {
            return Err(Error::SpaceMismatch("mean value of a vector field".into()));
        }
        let mesh = self.mesh();
        let mut total = 0.0;
        for c in 0..mesh.num_cells() {
            let area = mesh.signed_area(c);
            let u = self.local_coeffs(c);
            // ∫ of the P1 hat is area/3; P2 vertex functions integrate to 0, edge ones to area/3
            let s: f64 = match self.kind().family() {
                Family::P1 => u.iter().sum(),
                Family::P2 => u[3..].iter().sum(),
            };
            total += area * s / 3.0;
        }
        Ok(total / mesh.area())
    }

    /// `[p] = p − mean(p)`.
    pub fn subtract_mean(&self) -> Result<Field> {
        let m = self.mean_value()?;
        self.add_constant(-m)
    }

    /// Restriction to the nodes on the given sides: `(dof, value)` pairs.
    pub fn trace(&self, sides: SideSet) -> Vec<(usize, f64)> {
        let nc = self.dofmap.components();
        (0..self.coeffs.len())
            .filter(|&d| self.dofmap.node_sides(d / nc).intersects(sides))
            .map(|d| (d, self.coeffs[d]))
            .collect()
    }

    /// Values at every vertex and edge midpoint of the mesh: `[node][component]`.
    pub fn values_at_p2_nodes(&self) -> Vec<Vec<f64>> {
        let mesh = self.mesh();
        let nc = self.dofmap.components();
        let nv = mesh.num_vertices();
        let node_val = |n: usize| -> Vec<f64> { (0..nc).map(|c| self.coeffs[nc * n + c]).collect() };
        let mut out: Vec<Vec<f64>> = (0..nv).map(node_val).collect();
        for (e, edge) in mesh.edges().iter().enumerate() {
            if self.kind().family() == Family::P2 {
                out.push(node_val(nv + e));
            } else {
                let [a, b] = edge.vertices;
                out.push(
                    (0..nc)
                        .map(|c| 0.5 * (self.coeffs[nc * a + c] + self.coeffs[nc * b + c]))
                        .collect(),
                );
            }
        }
        out
    }
}

/// Writes fields on the refined point cloud (vertices + edge midpoints,
/// each triangle split in four) as legacy-VTK ASCII point data. All fields
/// must live on `mesh`.
pub fn write_vtk<W: Write>(mut w: W, mesh: &Mesh, fields: &[(&str, &Field)]) -> io::Result<()> {
    let nv = mesh.num_vertices();
    let npts = nv + mesh.num_edges();
    writeln!(w, "# vtk DataFile Version 2.0")?;
    writeln!(w, "estokes fields")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {npts} double")?;
    for p in mesh.vertices() {
        writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
    }
    for e in 0..mesh.num_edges() {
        let p = mesh.edge_midpoint(e);
        writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
    }
    let nc = 4 * mesh.num_cells();
    writeln!(w, "CELLS {} {}", nc, 4 * nc)?;
    for (t, ce) in mesh.triangles().iter().zip(mesh.cell_edges()) {
        let m = [nv + ce[0], nv + ce[1], nv + ce[2]];
        writeln!(w, "3 {} {} {}", t[0], m[0], m[2])?;
        writeln!(w, "3 {} {} {}", m[0], t[1], m[1])?;
        writeln!(w, "3 {} {} {}", m[2], m[1], t[2])?;
        writeln!(w, "3 {} {} {}", m[0], m[1], m[2])?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(w, "5")?;
    }
    if fields.is_empty() {
        return Ok(());
    }
    writeln!(w, "POINT_DATA {npts}")?;
    for (name, field) in fields {
        let vals = field.values_at_p2_nodes();
        if field.kind().is_scalar() {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in vals {
                writeln!(w, "{:e}", v[0])?;
            }
        } else {
            writeln!(w, "VECTORS {name} double")?;
            for v in vals {
                writeln!(w, "{:e} {:e} 0", v[0], v[1])?;
            }
        }
    }
    Ok(())
}
