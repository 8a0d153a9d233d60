mod common;

use std::sync::Arc;

use common::{dense_assemble, max_entry_difference};
use estokes::assembly::{assemble_matrix, Form};
use estokes::dofs::{build_dofmap, SpaceKind};
use estokes::mesh::{build_structured, BoundaryPartition, Mesh, Rect};

fn meshes() -> Vec<Arc<Mesh>> {
    let mut out = Vec::new();
    for (nx, ny) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        out.push(Arc::new(build_structured(nx, ny, Rect::unit()).unwrap()));
    }
    out.push(Arc::new(
        build_structured(2, 2, Rect::new(-1.0, 0.5, 2.0, 1.25).unwrap()).unwrap(),
    ));
    out.push(Arc::new(Mesh::from_parts(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 1, 2]],
    )));
    out
}

#[test]
fn sparse_matches_dense_on_every_form() {
    let part = BoundaryPartition::pure_neumann();
    for mesh in meshes() {
        let p1 = build_dofmap(mesh.clone(), SpaceKind::P1, part);
        let p2 = build_dofmap(mesh.clone(), SpaceKind::P2, part);
        let v = build_dofmap(mesh.clone(), SpaceKind::P2Vec, part);
        let cases = [
            (&v, &v, Form::LaplacianVector),
            (&p1, &p1, Form::LaplacianScalar),
            (&p2, &p2, Form::LaplacianScalar),
            (&p1, &p1, Form::Mass),
            (&p2, &p2, Form::Mass),
            (&v, &p1, Form::GradPDotV),
            (&p1, &v, Form::DivUTimesQ),
        ];
        for (row, col, form) in cases {
            let sparse = assemble_matrix(row, col, form).unwrap();
            let dense = dense_assemble(row, col, form);
            let diff = max_entry_difference(&sparse, &dense);
            assert!(
                diff <= 1e-12,
                "{form:?} {:?}x{:?} on {} cells: {diff:e}",
                row.kind(),
                col.kind(),
                mesh.num_cells()
            );
        }
    }
}

#[test]
fn dense_oracle_reproduces_reference_triangle() {
    let mesh = Arc::new(Mesh::from_parts(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[0, 1, 2]],
    ));
    let p1 = build_dofmap(mesh, SpaceKind::P1, BoundaryPartition::pure_neumann());
    let k = dense_assemble(&p1, &p1, Form::LaplacianScalar);
    let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((k[i][j] - expect[i][j]).abs() < 1e-14);
        }
    }
}
