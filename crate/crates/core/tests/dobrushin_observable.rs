use fkcorr::exact::fermionic_observable_dobrushin;
use fkcorr::lattice::{build_box, build_dobrushin, DobrushinDomain};
use fkcorr::Exec;

fn dobrushin_box(w: i64, h: i64) -> DobrushinDomain {
    let d = build_box(1.0, [[0.0, 0.0], [w as f64, h as f64]]).unwrap();
    // wired arc along the bottom row
    build_dobrushin(d, [0, 0], [w, 0]).unwrap()
}

fn check_all_probes(w: i64, h: i64) {
    let dob = dobrushin_box(w, h);
    let base = dob.base();
    let mut probes = 0;
    for i in 0..base.num_sites() as u32 {
        if dob.free_boundary_vertex(i).is_none() {
            continue;
        }
        let r = fermionic_observable_dobrushin(&dob, base.site(i), Exec::default()).unwrap();
        assert_eq!(r.event_mismatches, 0, "{w}x{h} at {:?}", base.site(i));
        assert_eq!(r.windings_minus.len(), 1);
        assert_eq!(r.windings_plus.len(), 1);
        assert!(r.residual <= 1e-10, "{w}x{h} at {:?}: residual {}", base.site(i), r.residual);
        assert!((r.passage_plus - r.probability).abs() < 1e-12);
        probes += 1;
    }
    assert!(probes > 0);
}

#[test]
fn identity_on_one_row_boxes() {
    for w in [2, 3, 4] {
        check_all_probes(w, 1);
    }
}

#[test]
fn identity_on_taller_boxes() {
    check_all_probes(2, 2);
    check_all_probes(3, 2);
}

#[test]
fn identity_on_three_by_three() {
    let dob = dobrushin_box(3, 3);
    let r = fermionic_observable_dobrushin(&dob, [3, 2], Exec::default()).unwrap();
    assert_eq!(r.event_mismatches, 0);
    assert!(r.residual <= 1e-10, "{}", r.residual);
}

#[test]
fn vertex_values_are_defined_off_the_marks() {
    let dob = dobrushin_box(2, 2);
    let r = fermionic_observable_dobrushin(&dob, [1, 2], Exec::default()).unwrap();
    let g = dob.medial();
    let defined = r.field.vertices.iter().filter(|v| v.is_some()).count();
    // the four excluded vertices: the marked ones and the outer corners
    assert_eq!(defined, g.num_vertices() - 4);
    assert!((r.field.sign_anchor.norm() - 1.0).abs() < 1e-15);
}
