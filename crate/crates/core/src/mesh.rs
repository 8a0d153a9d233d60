//! Structured triangulations of axis-aligned rectangles.
//!
//! A [`Mesh`] stores vertices, counter-clockwise triangles, the unique edge
//! list with incident cells, and the boundary edges tagged by the rectangle
//! side they lie on. Boundary conditions address the boundary by [`Side`],
//! grouped into a [`BoundaryPartition`] of Dirichlet and Neumann sides.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative tolerance used to decide whether a point lies on a rectangle side.
const ON_SIDE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    /// Outward unit normal of the side.
    pub fn normal(self) -> Point {
        match self {
            Side::Left => [-1.0, 0.0],
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Top => [0.0, 1.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "bottom" => Ok(Side::Bottom),
            "top" => Ok(Side::Top),
            other => Err(Error::Config(format!("unknown side `{other}`"))),
        }
    }
}

/// A set of rectangle sides.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SideSet(u8);

impl SideSet {
    pub const fn empty() -> Self {
        SideSet(0)
    }

    pub const fn all() -> Self {
        SideSet(0b1111)
    }

    pub fn contains(self, side: Side) -> bool {
        self.0 & side.bit() != 0
    }

    pub fn insert(&mut self, side: Side) {
        self.0 |= side.bit();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersects(self, other: SideSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: SideSet) -> SideSet {
        SideSet(self.0 | other.0)
    }

    pub fn complement(self) -> SideSet {
        SideSet(!self.0 & 0b1111)
    }

    pub fn iter(self) -> impl Iterator<Item = Side> {
        Side::ALL.into_iter().filter(move |s| self.contains(*s))
    }
}

impl FromIterator<Side> for SideSet {
    fn from_iter<I: IntoIterator<Item = Side>>(iter: I) -> Self {
        let mut set = SideSet::empty();
        for s in iter {
            set.insert(s);
        }
        set
    }
}

impl fmt::Debug for SideSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Which half of a [`BoundaryPartition`] to select.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// Split of the boundary sides into Γ_D (Dirichlet) and Γ_N (Neumann).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryPartition {
    dirichlet: SideSet,
    neumann: SideSet,
}

impl BoundaryPartition {
    /// Sides must be disjoint and together cover the whole boundary.
    pub fn new(dirichlet: SideSet, neumann: SideSet) -> Result<Self> {
        if dirichlet.intersects(neumann) {
            return Err(Error::InvalidData(format!(
                "Dirichlet sides {dirichlet:?} and Neumann sides {neumann:?} overlap"
            )));
        }
        if dirichlet.union(neumann) != SideSet::all() {
            return Err(Error::InvalidData(format!(
                "partition {dirichlet:?} / {neumann:?} does not cover all four sides"
            )));
        }
        Ok(BoundaryPartition { dirichlet, neumann })
    }

    pub fn pure_neumann() -> Self {
        BoundaryPartition {
            dirichlet: SideSet::empty(),
            neumann: SideSet::all(),
        }
    }

    pub fn pure_dirichlet() -> Self {
        BoundaryPartition {
            dirichlet: SideSet::all(),
            neumann: SideSet::empty(),
        }
    }

    /// Dirichlet on the given sides, Neumann on the rest.
    pub fn with_dirichlet(sides: SideSet) -> Self {
        BoundaryPartition {
            dirichlet: sides,
            neumann: sides.complement(),
        }
    }

    pub fn dirichlet_sides(&self) -> SideSet {
        self.dirichlet
    }

    pub fn neumann_sides(&self) -> SideSet {
        self.neumann
    }

    pub fn sides(&self, which: BcKind) -> SideSet {
        match which {
            BcKind::Dirichlet => self.dirichlet,
            BcKind::Neumann => self.neumann,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let finite = [x0, y0, x1, y1].iter().all(|v| v.is_finite());
        if !finite || x1 <= x0 || y1 <= y0 {
            return Err(Error::InvalidMesh(format!(
                "degenerate rectangle ({x0}, {y0}) - ({x1}, {y1})"
            )));
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn unit() -> Self {
        Rect {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Sides whose closure contains `p`.
    pub fn sides_of(&self, p: Point) -> SideSet {
        let tx = ON_SIDE_TOL * self.width();
        let ty = ON_SIDE_TOL * self.height();
        let mut set = SideSet::empty();
        if (p[0] - self.x0).abs() <= tx {
            set.insert(Side::Left);
        }
        if (p[0] - self.x1).abs() <= tx {
            set.insert(Side::Right);
        }
        if (p[1] - self.y0).abs() <= ty {
            set.insert(Side::Bottom);
        }
        if (p[1] - self.y1).abs() <= ty {
            set.insert(Side::Top);
        }
        set
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Vertex indices, smaller first.
    pub vertices: [usize; 2],
    /// Incident triangles in increasing order.
    pub cells: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub edge: usize,
    /// `None` for boundary edges that do not lie on a side of the bounding rectangle.
    pub side: Option<Side>,
    pub normal: Point,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Local edge `k` of a cell joins local vertices `k` and `(k + 1) % 3`.
    cell_edges: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    rect: Rect,
    grid: Option<(usize, usize)>,
}

/// Builds an `nx` by `ny` grid over `rect`, each cell split along its
/// lower-left to upper-right diagonal.
pub fn build_structured(nx: usize, ny: usize, rect: Rect) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh(format!(
            "subdivision counts must be positive, got nx = {nx}, ny = {ny}"
        )));
    }
    let rect = Rect::new(rect.x0, rect.y0, rect.x1, rect.y1)?;
    let hx = rect.width() / nx as f64;
    let hy = rect.height() / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = if j == ny { rect.y1 } else { rect.y0 + j as f64 * hy };
        for i in 0..=nx {
            let x = if i == nx { rect.x1 } else { rect.x0 + i as f64 * hx };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut mesh = Mesh::with_rect(vertices, triangles, rect);
    mesh.grid = Some((nx, ny));
    Ok(mesh)
}

impl Mesh {
    /// Builds connectivity for arbitrary vertex/triangle lists without
    /// checking any invariant; see [`Mesh::validate`]. The bounding box of
    /// the vertices plays the role of the rectangle.
    pub fn from_parts(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Mesh {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in &vertices {
            x0 = x0.min(p[0]);
            y0 = y0.min(p[1]);
            x1 = x1.max(p[0]);
            y1 = y1.max(p[1]);
        }
        Mesh::with_rect(vertices, triangles, Rect { x0, y0, x1, y1 })
    }

    fn with_rect(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, rect: Rect) -> Mesh {
        let nv = vertices.len();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(triangles.len());
        for (c, tri) in triangles.iter().enumerate() {
            let mut local = [0; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        cells: Vec::new(),
                    });
                    edges.len() - 1
                });
                edges[e].cells.push(c);
                local[k] = e;
            }
            cell_edges.push(local);
        }

        let mut boundary_edges = Vec::new();
        for (e, edge) in edges.iter().enumerate() {
            if edge.cells.len() != 1 {
                continue;
            }
            let [a, b] = edge.vertices;
            if a >= nv || b >= nv {
                continue;
            }
            let (pa, pb) = (vertices[a], vertices[b]);
            let tri = triangles[edge.cells[0]];
            let third = tri.iter().copied().find(|&v| v != a && v != b).unwrap_or(a);
            let pc = vertices.get(third).copied().unwrap_or(pa);
            let t = [pb[0] - pa[0], pb[1] - pa[1]];
            let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
            let mut n = [t[1] / len, -t[0] / len];
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            if n[0] * (mid[0] - pc[0]) + n[1] * (mid[1] - pc[1]) < 0.0 {
                n = [-n[0], -n[1]];
            }
            let common = rect.sides_of(pa);
            let common = SideSet(common.0 & rect.sides_of(pb).0);
            let side = common.iter().next();
            let normal = side.map(Side::normal).unwrap_or(n);
            boundary_edges.push(BoundaryEdge { edge: e, side, normal });
        }

        Mesh {
            vertices,
            triangles,
            edges,
            cell_edges,
            boundary_edges,
            rect,
            grid: None,
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cell_edges(&self) -> &[[usize; 3]] {
        &self.cell_edges
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_cells(&self) -> usize {
        self.triangles.len()
    }

    /// Grid dimensions for meshes produced by [`build_structured`].
    pub fn grid(&self) -> Option<(usize, usize)> {
        self.grid
    }

    pub fn cell_vertices(&self, cell: usize) -> [Point; 3] {
        let t = self.triangles[cell];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn signed_area(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cell_vertices(cell);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn edge_midpoint(&self, edge: usize) -> Point {
        let [a, b] = self.edges[edge].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let [a, b] = self.edges[edge].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        (pb[0] - pa[0]).hypot(pb[1] - pa[1])
    }

    /// Area of the meshed domain (sum of cell areas).
    pub fn area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.signed_area(c)).sum()
    }

    /// Finds a cell containing `p` and the reference coordinates of `p` in it.
    pub fn locate(&self, p: Point) -> Option<(usize, Point)> {
        if let Some((nx, ny)) = self.grid {
            let r = self.rect;
            let fx = (p[0] - r.x0) / r.width() * nx as f64;
            let fy = (p[1] - r.y0) / r.height() * ny as f64;
            if fx < -1e-9 || fy < -1e-9 || fx > nx as f64 + 1e-9 || fy > ny as f64 + 1e-9 {
                return None;
            }
            let i = (fx.floor().max(0.0) as usize).min(nx - 1);
            let j = (fy.floor().max(0.0) as usize).min(ny - 1);
            let base = 2 * (j * nx + i);
            for cell in [base, base + 1] {
                if let Some(xi) = self.reference_coords(cell, p) {
                    return Some((cell, xi));
                }
            }
        }
        (0..self.num_cells()).find_map(|c| self.reference_coords(c, p).map(|xi| (c, xi)))
    }

    fn reference_coords(&self, cell: usize, p: Point) -> Option<Point> {
        let [a, b, c] = self.cell_vertices(cell);
        let (j00, j01, j10, j11) = (b[0] - a[0], c[0] - a[0], b[1] - a[1], c[1] - a[1]);
        let det = j00 * j11 - j01 * j10;
        let (dx, dy) = (p[0] - a[0], p[1] - a[1]);
        let xi = (j11 * dx - j01 * dy) / det;
        let eta = (-j10 * dx + j00 * dy) / det;
        const TOL: f64 = 1e-10;
        if xi >= -TOL && eta >= -TOL && xi + eta <= 1.0 + TOL {
            Some([xi.clamp(0.0, 1.0), eta.clamp(0.0, 1.0 - xi.clamp(0.0, 1.0))])
        } else {
            None
        }
    }

    /// Checks every structural invariant and returns all violations.
    pub fn validate(&self) -> std::result::Result<(), Vec<Diagnostic>> {
        let mut out = Vec::new();
        let nv = self.vertices.len();
        for (c, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                out.push(Diagnostic::VertexOutOfRange { cell: c });
                continue;
            }
            let area = self.signed_area(c);
            if area <= 0.0 {
                out.push(Diagnostic::NonPositiveArea { cell: c, area });
            }
        }
        for edge in &self.edges {
            if edge.cells.len() > 2 {
                out.push(Diagnostic::EdgeValence {
                    vertices: edge.vertices,
                    count: edge.cells.len(),
                });
            }
        }
        let (v, e, t) = (nv as i64, self.edges.len() as i64, self.triangles.len() as i64);
        if v - e + t + 1 != 2 {
            out.push(Diagnostic::Euler {
                vertices: v as usize,
                edges: e as usize,
                triangles: t as usize,
            });
        }
        for be in &self.boundary_edges {
            let n = be.normal;
            let len = n[0].hypot(n[1]);
            let edge = &self.edges[be.edge];
            let cell = edge.cells[0];
            let centroid = {
                let [a, b, c] = self.cell_vertices(cell);
                [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
            };
            let mid = self.edge_midpoint(be.edge);
            let outward = n[0] * (mid[0] - centroid[0]) + n[1] * (mid[1] - centroid[1]) > 0.0;
            if (len - 1.0).abs() > 1e-14 || !outward {
                out.push(Diagnostic::BadNormal { edge: be.edge });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Writes the triangulation as a legacy-VTK ASCII unstructured grid.
    pub fn write_vtk<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# vtk DataFile Version 2.0")?;
        writeln!(w, "estokes mesh")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", self.vertices.len())?;
        for p in &self.vertices {
            writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
        }
        let nc = self.triangles.len();
        writeln!(w, "CELLS {} {}", nc, 4 * nc)?;
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "CELL_TYPES {nc}")?;
        for _ in 0..nc {
            writeln!(w, "5")?;
        }
        Ok(())
    }
}

/// Returns indices into [`Mesh::boundary_edges`] whose side lies in the
/// requested half of the partition.
pub fn boundary_edges_of(mesh: &Mesh, part: &BoundaryPartition, which: BcKind) -> Vec<usize> {
    let sides = part.sides(which);
    mesh.boundary_edges
        .iter()
        .enumerate()
        .filter(|(_, be)| be.side.is_some_and(|s| sides.contains(s)))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    VertexOutOfRange {
        cell: usize,
    },
    NonPositiveArea {
        cell: usize,
        area: f64,
    },
    EdgeValence {
        vertices: [usize; 2],
        count: usize,
    },
    Euler {
        vertices: usize,
        edges: usize,
        triangles: usize,
    },
    BadNormal {
        edge: usize,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::VertexOutOfRange { cell } => {
                write!(f, "vertex index out of range at cell {cell}")
            }
            Diagnostic::NonPositiveArea { cell, area } if *area < 0.0 => {
                write!(f, "negative area at cell {cell}")
            }
            Diagnostic::NonPositiveArea { cell, .. } => write!(f, "zero area at cell {cell}"),
            Diagnostic::EdgeValence { vertices, count } => write!(
                f,
                "edge ({}, {}) with {count} incident triangles",
                vertices[0], vertices[1]
            ),
            Diagnostic::Euler {
                vertices,
                edges,
                triangles,
            } => write!(
                f,
                "Euler relation violated: V - E + T + 1 = {} - {} + {} + 1 != 2",
                vertices, edges, triangles
            ),
            Diagnostic::BadNormal { edge } => {
                write!(f, "boundary normal of edge {edge} is not an outward unit vector")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts_on_small_grids() {
        let m = build_structured(1, 1, Rect::unit()).unwrap();
        assert_eq!((m.num_vertices(), m.num_cells(), m.num_edges()), (4, 2, 5));
        let m = build_structured(2, 2, Rect::unit()).unwrap();
        assert_eq!((m.num_vertices(), m.num_cells(), m.num_edges()), (9, 8, 16));
        assert_eq!(m.boundary_edges().len(), 8);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_structured(0, 3, Rect::unit()).is_err());
        assert!(build_structured(3, 0, Rect::unit()).is_err());
        let flat = Rect {
            x0: 0.0,
            y0: 1.0,
            x1: 1.0,
            y1: 1.0,
        };
        let err = build_structured(2, 2, flat).unwrap_err();
        assert!(err.to_string().contains("degenerate rectangle"));
    }

    #[test]
    fn partition_selection() {
        let m = build_structured(2, 2, Rect::unit()).unwrap();
        let part = BoundaryPartition::with_dirichlet([Side::Left].into_iter().collect());
        let d = boundary_edges_of(&m, &part, BcKind::Dirichlet);
        assert_eq!(d.len(), 2);
        for &i in &d {
            let [a, b] = m.edges()[m.boundary_edges()[i].edge].vertices;
            assert_eq!(m.vertices()[a][0], 0.0);
            assert_eq!(m.vertices()[b][0], 0.0);
        }
        let n = boundary_edges_of(&m, &part, BcKind::Neumann);
        assert_eq!(n.len(), 6);
        assert!(d.iter().all(|i| !n.contains(i)));

        let pure = BoundaryPartition::pure_neumann();
        assert!(boundary_edges_of(&m, &pure, BcKind::Dirichlet).is_empty());
    }

    #[test]
    fn partition_must_be_disjoint_and_cover() {
        let l: SideSet = [Side::Left].into_iter().collect();
        let lr: SideSet = [Side::Left, Side::Right].into_iter().collect();
        assert!(BoundaryPartition::new(l, lr).is_err());
        assert!(BoundaryPartition::new(l, SideSet::empty()).is_err());
        assert!(BoundaryPartition::new(l, l.complement()).is_ok());
    }

    #[test]
    fn validate_detects_orientation_and_duplicates() {
        let m = build_structured(2, 2, Rect::unit()).unwrap();
        assert!(m.validate().is_ok());

        let mut tris = m.triangles().to_vec();
        tris[3].swap(1, 2);
        let bad = Mesh::from_parts(m.vertices().to_vec(), tris);
        let diags = bad.validate().unwrap_err();
        assert!(diags.iter().any(|d| d.to_string() == "negative area at cell 3"));

        let mut tris = m.triangles().to_vec();
        tris.push(tris[0]);
        let bad = Mesh::from_parts(m.vertices().to_vec(), tris);
        let diags = bad.validate().unwrap_err();
        assert!(diags
            .iter()
            .any(|d| d.to_string().contains("with 3 incident triangles")));
    }

    #[test]
    fn locate_finds_points() {
        let m = build_structured(4, 3, Rect::new(0.0, 0.0, 2.0, 1.0).unwrap()).unwrap();
        for p in [[0.3, 0.2], [2.0, 1.0], [0.0, 0.0], [1.25, 0.999]] {
            let (c, xi) = m.locate(p).unwrap();
            let [a, b, cc] = m.cell_vertices(c);
            let x = a[0] + xi[0] * (b[0] - a[0]) + xi[1] * (cc[0] - a[0]);
            let y = a[1] + xi[0] * (b[1] - a[1]) + xi[1] * (cc[1] - a[1]);
            assert!((x - p[0]).abs() < 1e-12 && (y - p[1]).abs() < 1e-12);
        }
        assert!(m.locate([2.5, 0.5]).is_none());
    }

    proptest! {
        #[test]
        fn structured_invariants(nx in 1usize..=16, ny in 1usize..=16,
                                 x0 in -2.0f64..2.0, y0 in -2.0f64..2.0,
                                 w in 0.1f64..3.0, h in 0.1f64..3.0) {
            let rect = Rect::new(x0, y0, x0 + w, y0 + h).unwrap();
            let m = build_structured(nx, ny, rect).unwrap();
            prop_assert!(m.validate().is_ok());
            prop_assert_eq!(m.num_vertices(), (nx + 1) * (ny + 1));
            prop_assert_eq!(m.num_cells(), 2 * nx * ny);
            let euler = m.num_vertices() as i64 - m.num_edges() as i64 + m.num_cells() as i64 + 1;
            prop_assert_eq!(euler, 2);
            prop_assert!((m.area() - rect.area()).abs() <= 1e-13 * rect.area());
            prop_assert_eq!(m.boundary_edges().len(), 2 * (nx + ny));
            for be in m.boundary_edges() {
                let side = be.side.expect("structured boundary edges carry a side");
                prop_assert_eq!(be.normal, side.normal());
            }
            for e in m.edges() {
                let on_boundary = m.boundary_edges().iter().any(|b| m.edges()[b.edge] == *e);
                prop_assert_eq!(e.cells.len(), if on_boundary { 1 } else { 2 });
            }
        }
    }
}
