use super::*;
use crate::exactla::RationalMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn bi(n: i64) -> BigInt {
    BigInt::from(n)
}

fn rm(n: usize, e: &[i64]) -> RationalMatrix {
    RationalMatrix::from_int_entries(n, n, e)
}

fn sym(c: Vec<(u32, u32, i8, BlockType, u8)>) -> LocalSymbol {
    LocalSymbol {
        prime: bi(2),
        constituents: c
            .into_iter()
            .map(|(scale, rank, sign, kind, oddity)| Constituent { scale, rank, sign, kind, oddity })
            .collect(),
    }
}

#[test]
fn jordan_examples() {
    let blocks = jordan_decomposition(&rm(2, &[1, 0, 0, 1]), &bi(3)).unwrap();
    assert_eq!(blocks.len(), 1);
    assert_eq!(blocks[0].scale, 0);

    let blocks = jordan_decomposition(&rm(2, &[1, 0, 0, 3]), &bi(3)).unwrap();
    assert_eq!(blocks.len(), 2);
    assert_eq!((blocks[0].scale, blocks[0].unit_gram.rows), (0, 1));
    assert_eq!((blocks[1].scale, blocks[1].unit_gram.rows), (1, 1));

    let blocks = jordan_decomposition(&rm(2, &[2, 1, 1, 2]), &bi(2)).unwrap();
    assert_eq!(blocks.len(), 1);
    assert_eq!(blocks[0].scale, 0);
    // unit determinant 3 is odd
    let d = blocks[0].unit_gram.det().unwrap();
    assert!(d.is_odd());
}

#[test]
fn local_symbol_examples() {
    let s = local_symbol(&rm(2, &[1, 0, 0, 3]), &bi(3)).unwrap();
    assert_eq!(s.constituents.len(), 2);
    assert_eq!((s.constituents[0].scale, s.constituents[0].rank, s.constituents[0].sign), (0, 1, 1));
    assert_eq!((s.constituents[1].scale, s.constituents[1].rank, s.constituents[1].sign), (1, 1, 1));

    let s = local_symbol(&rm(2, &[1, 0, 0, 1]), &bi(2)).unwrap();
    assert_eq!(s.constituents.len(), 1);
    let c = s.constituents[0];
    assert_eq!((c.scale, c.rank, c.sign, c.kind, c.oddity), (0, 2, 1, BlockType::I, 2));

    let s = local_symbol(&rm(2, &[0, 1, 1, 0]), &bi(2)).unwrap();
    let c = s.constituents[0];
    assert_eq!((c.scale, c.rank, c.sign, c.kind, c.oddity), (0, 2, 1, BlockType::II, 0));

    let s = local_symbol(&rm(2, &[2, 1, 1, 2]), &bi(2)).unwrap();
    let c = s.constituents[0];
    assert_eq!((c.scale, c.rank, c.sign, c.kind, c.oddity), (0, 2, -1, BlockType::II, 0));
}

#[test]
fn local_symbol_valuation_sum() {
    for (n, entries, p) in [
        (2usize, vec![4i64, 0, 0, 6], 2i64),
        (2, vec![4, 0, 0, 6], 3),
        (3, vec![2, 1, 0, 1, 2, 0, 0, 0, 9], 3),
        (3, vec![2, 1, 0, 1, 2, 0, 0, 0, 8], 2),
    ] {
        let g = rm(n, &entries);
        let det = g.det().unwrap();
        let s = local_symbol(&g, &bi(p)).unwrap();
        assert_eq!(
            s.det_valuation() as i64,
            rat_valuation(&det, &bi(p)),
            "{entries:?} at {p}"
        );
    }
}

#[test]
fn odd_sign_product_matches_determinant() {
    for entries in [vec![2i64, 1, 1, 2], vec![3, 0, 0, 3], vec![1, 0, 0, 12], vec![6, 1, 1, 6]] {
        let g = rm(2, &entries);
        let det = g.det().unwrap().to_integer();
        let p = bi(3);
        let s = local_symbol(&g, &p).unwrap();
        let unit = &det / bi(3).pow(arith::valuation(&det, &p));
        let want = arith::legendre(&unit, &p).unwrap() as i8;
        assert_eq!(s.sign_product(), want, "{entries:?}");
    }
}

#[test]
fn canonicalize_identifies_equivalent_diagonals() {
    // diag(1,1) and diag(5,5) are Z_2-isometric
    let a = canonicalize_2adic(&local_symbol(&rm(2, &[1, 0, 0, 1]), &bi(2)).unwrap()).unwrap();
    let b = canonicalize_2adic(&local_symbol(&rm(2, &[5, 0, 0, 5]), &bi(2)).unwrap()).unwrap();
    assert_eq!(a, b);
    // diag(1,2) and diag(3,6) are Z_2-isometric (sign walk through scales)
    let a = canonicalize_2adic(&local_symbol(&rm(2, &[1, 0, 0, 2]), &bi(2)).unwrap()).unwrap();
    let b = canonicalize_2adic(&local_symbol(&rm(2, &[3, 0, 0, 6]), &bi(2)).unwrap()).unwrap();
    assert_eq!(a, b);
    // diag(1,2) and diag(1,6) are not
    let c = canonicalize_2adic(&local_symbol(&rm(2, &[1, 0, 0, 6]), &bi(2)).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn canonicalize_idempotent() {
    let symbols = vec![
        sym(vec![(0, 2, 1, BlockType::II, 0)]),
        sym(vec![(0, 1, 1, BlockType::I, 1), (1, 1, 1, BlockType::I, 1)]),
        sym(vec![(0, 2, -1, BlockType::II, 0), (2, 1, -1, BlockType::I, 3)]),
        sym(vec![(0, 1, -1, BlockType::I, 3), (1, 2, 1, BlockType::II, 0), (2, 1, 1, BlockType::I, 7)]),
    ];
    for s in symbols {
        s.validate().unwrap();
        let c1 = canonicalize_2adic(&s).unwrap();
        let c2 = canonicalize_2adic(&c1).unwrap();
        assert_eq!(c1, c2);
    }
}

#[test]
fn all_type2_symbol_is_fixed() {
    let s = sym(vec![(0, 2, 1, BlockType::II, 0), (1, 2, -1, BlockType::II, 0)]);
    let c = canonicalize_2adic(&s).unwrap();
    for (a, b) in s.constituents.iter().zip(&c.constituents) {
        assert_eq!((a.scale, a.rank, a.kind), (b.scale, b.rank, b.kind));
    }
}

#[test]
fn normal_form_odd_examples() {
    let (t, n) = normal_form(&rm(2, &[1, 0, 0, 1]), &bi(3)).unwrap();
    assert_eq!(n, crate::exactla::IntMatrix::from_i64(2, 2, &[1, 0, 0, 1]));
    assert!(!t.det().unwrap().is_zero());

    // legendre(2*3 unit part) : det 6, unit part at scale 0 is 2, class -1
    let (_, n) = normal_form(&rm(2, &[2, 0, 0, 3]), &bi(3)).unwrap();
    assert_eq!(n, crate::exactla::IntMatrix::from_i64(2, 2, &[2, 0, 0, 3]));

    // scales ascending
    let (_, n) = normal_form(&rm(2, &[3, 0, 0, 1]), &bi(3)).unwrap();
    assert_eq!(n, crate::exactla::IntMatrix::from_i64(2, 2, &[1, 0, 0, 3]));
}

#[test]
fn normal_form_2_small_examples() {
    // U stays U
    let (_, n) = normal_form(&rm(2, &[0, 1, 1, 0]), &bi(2)).unwrap();
    assert_eq!(n, crate::exactla::IntMatrix::from_i64(2, 2, &[0, 1, 1, 0]));
    // diag(5,5) normalizes to diag(1,1)
    let (_, n) = normal_form(&rm(2, &[5, 0, 0, 5]), &bi(2)).unwrap();
    assert_eq!(n, crate::exactla::IntMatrix::from_i64(2, 2, &[1, 0, 0, 1]));
    // V stays V
    let (_, n) = normal_form(&rm(2, &[2, 1, 1, 2]), &bi(2)).unwrap();
    assert_eq!(n, crate::exactla::IntMatrix::from_i64(2, 2, &[2, 1, 1, 2]));
}

#[test]
fn normal_form_matches_across_equivalent_grams() {
    // two Z-bases of the same lattice: symbols and normal forms agree
    let g = rm(3, &[2, 1, 0, 1, 4, 1, 0, 1, 6]);
    let a = rm(3, &[1, 1, 0, 0, 1, 0, 2, 1, 1]); // det ±1
    assert_eq!(a.det().unwrap(), BigRational::from(bi(1)));
    let g2 = a.mul(&g).mul(&a.transpose());
    for p in [2i64, 3, 5] {
        let (_, n1) = normal_form(&g, &bi(p)).unwrap();
        let (_, n2) = normal_form(&g2, &bi(p)).unwrap();
        assert_eq!(n1, n2, "p = {p}");
    }
}

#[test]
fn gram_from_symbol_roundtrip() {
    let s = sym(vec![(0, 2, 1, BlockType::II, 0), (1, 1, 1, BlockType::I, 1)]);
    let g = gram_from_symbol(&s).unwrap();
    let back = local_symbol(&RationalMatrix::from_int_matrix(&g), &bi(2)).unwrap();
    let canon_in = canonicalize_2adic(&s).unwrap();
    let canon_out = canonicalize_2adic(&back).unwrap();
    assert_eq!(canon_in, canon_out);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn base_change_invariance(seed in proptest::collection::vec(-3i64..=3, 9),
                              diag in proptest::collection::vec(1i64..=12, 3)) {
        // build an integral symmetric matrix with nonzero det
        let g0 = RationalMatrix::diagonal(&[
            BigRational::from(bi(diag[0])),
            BigRational::from(bi(diag[1])),
            BigRational::from(bi(diag[2])),
        ]);
        // unimodular from seed via row operations
        let mut a = RationalMatrix::identity(3);
        let mut k = 0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let f = BigRational::from(bi(seed[k]));
                    for c in 0..3 {
                        let x = &f * &a[(j, c)];
                        a[(i, c)] += x;
                    }
                }
                k += 1;
            }
        }
        let g1 = a.mul(&g0).mul(&a.transpose());
        for p in [2i64, 3] {
            let pb = bi(p);
            let s0 = local_symbol(&g0, &pb).unwrap();
            let s1 = local_symbol(&g1, &pb).unwrap();
            if p == 2 {
                let c0 = canonicalize_2adic(&s0).unwrap();
                let c1 = canonicalize_2adic(&s1).unwrap();
                prop_assert_eq!(c0, c1);
            } else {
                prop_assert_eq!(s0, s1);
            }
            let (_, n0) = normal_form(&g0, &pb).unwrap();
            let (_, n1) = normal_form(&g1, &pb).unwrap();
            prop_assert_eq!(n0, n1);
        }
    }
}
