use fkcorr::exact::trace_interfaces;
use fkcorr::lattice::{build_box, build_dobrushin};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    // windings are counted in quarter turns, so every step is ±1 and the
    // running total stays a whole number of quarter turns
    #[test]
    fn windings_are_quarter_turns(bits in prop::collection::vec(any::<bool>(), 24)) {
        let d = build_box(1.0, [[0.0, 0.0], [3.0, 3.0]]).unwrap();
        let dob = build_dobrushin(d, [0, 0], [3, 3]).unwrap();
        let ifs = trace_interfaces(&bits, &dob).unwrap();
        prop_assert_eq!(ifs.turns.len() + 1, ifs.path.len());
        prop_assert_eq!(ifs.winding[0], 0);
        for (i, &t) in ifs.turns.iter().enumerate() {
            prop_assert!(t == 1 || t == -1, "turn {t}");
            prop_assert_eq!(ifs.winding[i + 1] - ifs.winding[i], i32::from(t));
        }
    }
}
