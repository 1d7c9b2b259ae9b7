use khwall::atlas::{bundled_table, find};
use khwall::complex::{homology, BigradedGroups};
use khwall::khovanov::build_ckh;
use khwall::wallcross::{finite_type_report, graded_skein};
use khwall::{jones_unnormalized, LaurentPoly};

fn kh(name: &str) -> BigradedGroups {
    let table = bundled_table();
    homology(&build_ckh(&find(&table, name).unwrap().diagram).unwrap())
}

#[test]
fn figure_eight_homology() {
    let expected = BigradedGroups::from_rows([
        (-2, -5, 1, vec![]),
        (-1, -3, 0, vec![2]),
        (-1, -1, 1, vec![]),
        (0, -1, 1, vec![]),
        (0, 1, 1, vec![]),
        (1, 1, 1, vec![]),
        (2, 3, 0, vec![2]),
        (2, 5, 1, vec![]),
    ]);
    assert_eq!(kh("4_1"), expected);
}

#[test]
fn left_trefoil_is_dual() {
    let table = bundled_table();
    let t = &find(&table, "3_1").unwrap().diagram;
    let h = homology(&build_ckh(&t.mirror()).unwrap());
    let expected = BigradedGroups::from_rows([
        (-3, -9, 1, vec![]),
        (-2, -7, 0, vec![2]),
        (-2, -5, 1, vec![]),
        (0, -3, 1, vec![]),
        (0, -1, 1, vec![]),
    ]);
    assert_eq!(h, expected);
}

#[test]
fn cinquefoil_jones() {
    let table = bundled_table();
    let j = jones_unnormalized(&find(&table, "5_1").unwrap().diagram);
    let v = LaurentPoly::from_terms([(4, 1), (8, 1), (10, -1), (12, 1), (14, -1)]);
    let expected = &v * &LaurentPoly::circle();
    assert_eq!(j.to_string(), expected.to_string());
}

#[test]
fn trefoil_cone_at_crossing_zero() {
    let table = bundled_table();
    let t = &find(&table, "3_1").unwrap().diagram;
    let r = finite_type_report(&t.mark_singular(&[0]).unwrap()).unwrap();
    assert!(r.chi_check);
    assert_eq!(r.euler, graded_skein(&r.stratum));
    assert_eq!(r.euler.to_string(), "-q^2 + q^6");
}
