use fkcorr::lattice::{ball_boundary, build_box, build_dobrushin, LatticeDomain, Point, ShapeTag};
use proptest::prelude::*;

/// Row-convex polyomino: each row an interval overlapping the row below.
fn row_convex() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0i64..6, 1i64..6), 1..7).prop_map(|rows| {
        let mut sites = Vec::new();
        let mut prev: Option<(i64, i64)> = None;
        for (y, (start, len)) in rows.into_iter().enumerate() {
            let (mut a, mut b) = (start, start + len - 1);
            if let Some((pa, pb)) = prev {
                // force an overlap with the previous row
                if b < pa {
                    b = pa;
                }
                if a > pb {
                    a = pb;
                }
            }
            for x in a..=b {
                sites.push([x, y as i64]);
            }
            prev = Some((a, b));
        }
        sites
    })
}

proptest! {
    #[test]
    fn hole_free_domains_are_planar(sites in row_convex()) {
        let d = LatticeDomain::from_sites(1.0, ShapeTag::Custom, sites).unwrap();
        prop_assert_eq!(d.euler_characteristic(), 2);
    }

    #[test]
    fn ring_is_rejected(w in 3i64..7, h in 3i64..7) {
        let ring: Vec<Point> = (0..w)
            .flat_map(|x| (0..h).map(move |y| [x, y]))
            .filter(|&[x, y]| x == 0 || y == 0 || x == w - 1 || y == h - 1)
            .collect();
        prop_assert!(LatticeDomain::from_sites(1.0, ShapeTag::Custom, ring).is_err());
    }

    #[test]
    fn dobrushin_forgets_back_to_domain(w in 2usize..6, h in 2usize..6, i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let d = build_box(1.0, [[0.0, 0.0], [w as f64 - 1.0, h as f64 - 1.0]]).unwrap();
        let b: Vec<u32> = d.boundary_sites().collect();
        let (x1, x2) = (b[i.index(b.len())], b[j.index(b.len())]);
        prop_assume!(x1 != x2);
        let dob = build_dobrushin(d.clone(), d.site(x1), d.site(x2)).unwrap();
        prop_assert_eq!(dob.into_base(), d);
    }

    #[test]
    fn nested_ball_boundaries_are_disjoint(cx in 5.0f64..15.0, cy in 5.0f64..15.0, r in 1.01f64..6.0, gap in 2.0f64..6.0) {
        let d = build_box(1.0, [[0.0, 0.0], [20.0, 20.0]]).unwrap();
        let inner = ball_boundary(&d, [cx, cy], r);
        let outer = ball_boundary(&d, [cx, cy], r + gap);
        prop_assert!(inner.iter().all(|s| outer.binary_search(s).is_err()));
    }
}
