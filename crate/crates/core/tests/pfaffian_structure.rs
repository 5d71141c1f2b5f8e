use fkcorr::exact::enumerate_ising;
use fkcorr::lattice::{build_box, BoundarySpec, LatticeDomain, Point};
use fkcorr::model::beta_c;
use fkcorr::patterns::pfaffian;

fn idx(d: &LatticeDomain, pts: &[Point]) -> Vec<u32> {
    pts.iter().map(|&p| d.index_of(p).unwrap()).collect()
}

/// All one- and two-point functions of `pts`, then the full product.
fn correlations(d: &LatticeDomain, bc: &BoundarySpec, beta: f64, pts: &[Point]) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
    let ix = idx(d, pts);
    let n = ix.len();
    let mut sets: Vec<Vec<u32>> = ix.iter().map(|&i| vec![i]).collect();
    for a in 0..n {
        for b in a + 1..n {
            sets.push(vec![ix[a], ix[b]]);
        }
    }
    sets.push(ix.clone());
    let r: Vec<f64> = enumerate_ising(d, bc, beta, &sets).unwrap().into_iter().map(f64::from).collect();
    let one = r[..n].to_vec();
    let mut two = vec![vec![0.0; n]; n];
    let mut k = n;
    for a in 0..n {
        for b in a + 1..n {
            two[a][b] = r[k];
            two[b][a] = -r[k];
            k += 1;
        }
    }
    (one, two, r[k])
}

/// Pfaffian of the two-point matrix, bordered by the one-point functions
/// when the number of points is odd.
fn pfaffian_prediction(one: &[f64], two: &[Vec<f64>]) -> f64 {
    let n = one.len();
    if n % 2 == 0 {
        return pfaffian(two).unwrap();
    }
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    for a in 0..n {
        for b in 0..n {
            m[a][b] = two[a][b];
        }
        m[a][n] = one[a];
        m[n][a] = -one[a];
    }
    pfaffian(&m).unwrap()
}

#[test]
fn mixed_boundary_three_points() {
    let d = build_box(1.0, [[0.0, 0.0], [4.0, 1.0]]).unwrap();
    let pts = [[0, 0], [1, 0], [2, 0]];
    let bc = BoundarySpec::mixed_free_plus(vec![[0, 0], [1, 0], [2, 0], [3, 0], [4, 0]]);
    for beta in [0.2, beta_c(), 0.7] {
        let (one, two, full) = correlations(&d, &bc, beta, &pts);
        let expanded = one[2] * two[0][1] - one[1] * two[0][2] + one[0] * two[1][2];
        assert!((full - expanded).abs() < 1e-10, "beta {beta}: {full} vs {expanded}");
        assert!((full - pfaffian_prediction(&one, &two)).abs() < 1e-10);
    }
}

#[test]
fn mixed_boundary_two_and_four_points() {
    let d = build_box(1.0, [[0.0, 0.0], [4.0, 1.0]]).unwrap();
    // plus arc up the right side
    let pts = [[0, 0], [1, 0], [2, 0], [3, 0]];
    let bc = BoundarySpec::mixed_free_plus(vec![[0, 0], [1, 0], [2, 0], [3, 0], [4, 0], [4, 1]]);
    for beta in [0.3, beta_c()] {
        let (one, two, full) = correlations(&d, &bc, beta, &pts);
        assert!((full - pfaffian_prediction(&one, &two)).abs() < 1e-10, "beta {beta}");
        let (_, two2, full2) = correlations(&d, &bc, beta, &pts[1..3]);
        assert!((full2 - two2[0][1]).abs() < 1e-15);
    }
}

#[test]
fn mixed_boundary_five_points() {
    let d = build_box(1.0, [[0.0, 0.0], [5.0, 1.0]]).unwrap();
    let pts = [[0, 0], [1, 0], [2, 0], [3, 0], [4, 0]];
    let bc = BoundarySpec::mixed_free_plus(vec![[0, 0], [1, 0], [2, 0], [3, 0], [4, 0], [5, 0], [5, 1]]);
    let (one, two, full) = correlations(&d, &bc, beta_c(), &pts);
    assert!((full - pfaffian_prediction(&one, &two)).abs() < 1e-10);
}

#[test]
fn free_boundary_four_and_six_points() {
    let d = build_box(1.0, [[0.0, 0.0], [3.0, 2.0]]).unwrap();
    // counterclockwise along the boundary
    let ring: [Point; 6] = [[0, 0], [1, 0], [3, 0], [3, 2], [1, 2], [0, 1]];
    let free = BoundarySpec::free();
    let (one, two, full) = correlations(&d, &free, beta_c(), &ring);
    assert!(one.iter().all(|&m| m == 0.0));
    assert!((full - pfaffian(&two).unwrap()).abs() < 1e-10);
    let four = [ring[0], ring[2], ring[3], ring[5]];
    let (_, two4, full4) = correlations(&d, &free, beta_c(), &four);
    assert!((full4 - pfaffian(&two4).unwrap()).abs() < 1e-10);
}

#[test]
fn interior_points_break_pfaffian() {
    // the structure needs boundary points; an interior one spoils it
    let d = build_box(1.0, [[0.0, 0.0], [3.0, 2.0]]).unwrap();
    let pts = [[0, 0], [1, 1], [3, 0], [2, 2]];
    let (_, two, full) = correlations(&d, &BoundarySpec::free(), beta_c(), &pts);
    assert!((full - pfaffian(&two).unwrap()).abs() > 1e-6);
}
