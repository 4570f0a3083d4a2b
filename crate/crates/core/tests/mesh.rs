use pharmonic::mesh::{build_annulus, build_rect, refine, TriMesh};
use pharmonic::Error;
use proptest::prelude::*;

proptest! {
    #[test]
    fn refinement_invariants(nx in 1usize..6, ny in 1usize..6, nr in 1usize..4, nt in 3usize..12) {
        for (m, chi) in [(build_rect(2.0, 1.0, nx, ny).unwrap(), 1), (build_annulus(1.0, 2.0, nr, nt).unwrap(), 0)] {
            prop_assert_eq!(m.euler_characteristic(), chi);
            let f = refine(&m).unwrap();
            prop_assert_eq!(f.num_triangles(), 4 * m.num_triangles());
            prop_assert_eq!(f.num_vertices(), m.num_vertices() + m.edge_count());
            prop_assert_eq!(f.euler_characteristic(), chi);
            prop_assert_eq!(f.boundary_edges().len(), 2 * m.boundary_edges().len());
            prop_assert!((f.total_area() - m.total_area()).abs() <= 1e-12 * m.total_area());
            prop_assert!((f.mesh_size() - 0.5 * m.mesh_size()).abs() <= 1e-12);
            prop_assert!(f.areas().iter().all(|&a| a > 0.0));
            prop_assert_eq!(&f.vertices()[..m.num_vertices()], m.vertices());
        }
    }
}

#[test]
fn rect_area_and_boundary() {
    let m = build_rect(3.0, 2.0, 6, 4).unwrap();
    assert!((m.total_area() - 6.0).abs() < 1e-12);
    assert_eq!(m.boundary_vertices().len(), 2 * (6 + 4));
    assert_eq!(m.interior_vertices().len(), 5 * 3);
}

#[test]
fn text_round_trip_is_exact() {
    let m = refine(&build_annulus(0.7, 2.3, 3, 11).unwrap()).unwrap();
    let back = TriMesh::from_text(&m.to_text()).unwrap();
    assert_eq!(back.vertices(), m.vertices());
    assert_eq!(back.triangles(), m.triangles());
    assert_eq!(back.boundary(), m.boundary());
    let dir = std::env::temp_dir().join(format!("pharmonic-mesh-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.txt");
    m.write(&path).unwrap();
    assert_eq!(TriMesh::read(&path).unwrap().to_text(), m.to_text());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_files_are_rejected() {
    for text in [
        "",
        "2 1\n0 0 1\n",
        "3 1\n0 0 1\n1 0 1\n0 1 2\n0 1 2\n",
        "3 1\n0 0 1\n1 0 1\n0 1 1\n0 1 2\n9 9 9\n",
    ] {
        assert!(
            matches!(TriMesh::from_text(text), Err(Error::Parse(_))),
            "{text:?}"
        );
    }
    // clockwise triangle
    assert!(TriMesh::from_text("3 1\n0 0 1\n1 0 1\n0 1 1\n0 2 1\n").is_err());
    // vertex index out of range
    assert!(TriMesh::from_text("3 1\n0 0 1\n1 0 1\n0 1 1\n0 1 5\n").is_err());
}
