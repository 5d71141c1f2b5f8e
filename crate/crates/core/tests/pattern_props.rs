use fkcorr::patterns::{connection_partition, enumerate_pair_partitions, pair_sign, pfaffian_expansion, pfaffian_pair_sum};
use proptest::prelude::*;

fn double_factorial_odd(n: usize) -> usize {
    (1..=n).map(|k| 2 * k - 1).product()
}

fn antisymmetric(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(-2.0f64..2.0, dim * (dim - 1) / 2).prop_map(move |upper| {
        let mut a = vec![vec![0.0; dim]; dim];
        let mut it = upper.into_iter();
        for i in 0..dim {
            for j in i + 1..dim {
                let v = it.next().unwrap();
                a[i][j] = v;
                a[j][i] = -v;
            }
        }
        a
    })
}

fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    d
}

#[test]
fn pair_partition_counts_and_signs() {
    for n in 1..=6 {
        let all = enumerate_pair_partitions(n).unwrap();
        assert_eq!(all.len(), double_factorial_odd(n));
        for p in &all {
            // sign of Π (c−e)(c−f)(d−e)(d−f) from the raw product
            let mut prod = 1i128;
            for (i, &(c, d)) in p.pairs.iter().enumerate() {
                for &(e, f) in &p.pairs[i + 1..] {
                    let (c, d, e, f) = (c as i128, d as i128, e as i128, f as i128);
                    prod *= (c - e) * (c - f) * (d - e) * (d - f);
                }
            }
            assert_eq!(p.sign, prod.signum() as i8);
            assert_eq!(p.sign, pair_sign(&p.pairs));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pfaffian_evaluations_agree(a in (1usize..5).prop_flat_map(|h| antisymmetric(2 * h))) {
        let s = pfaffian_pair_sum(&a).unwrap();
        let e = pfaffian_expansion(&a).unwrap();
        prop_assert!((s - e).abs() <= 1e-10 * s.abs().max(1.0), "{s} vs {e}");
        let d = det(a);
        prop_assert!((s * s - d).abs() <= 1e-8 * d.abs().max(1e-12), "{} vs {d}", s * s);
    }

    #[test]
    fn connection_partition_ignores_label_values(labels in prop::collection::vec(0u32..5, 1..9), perm in Just((0u32..5).collect::<Vec<_>>()).prop_shuffle()) {
        let relabeled: Vec<u32> = labels.iter().map(|&l| perm[l as usize] + 100).collect();
        prop_assert_eq!(connection_partition(&labels), connection_partition(&relabeled));
    }
}
