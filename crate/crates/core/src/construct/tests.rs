use super::*;
use crate::genus::{enumerate, symbol_of, EnumerateOptions};

fn bi(x: i64) -> BigInt {
    BigInt::from(x)
}

fn lat(n: usize, e: &[i64]) -> Lattice {
    Lattice::from_gram(RationalMatrix::from_int_entries(n, n, e)).unwrap()
}

#[test]
fn op_overlattice_small_cases() {
    // dimension <= 1 at p: unchanged
    let l = lat(2, &[1, 0, 0, 3]).p_saturate(&bi(3)).unwrap();
    match op_overlattice(&l, &bi(3), 1).unwrap() {
        Err(cert) => assert_eq!(cert.witness, MaximalityWitness::DimensionAtMostOne),
        Ok(_) => panic!("expected a certificate"),
    }

    // diag(5, -5): q-classes give a residue ratio, index-5 overlattice exists
    let l = lat(2, &[5, 0, 0, -5]);
    let sat = l.p_saturate(&bi(5)).unwrap();
    match op_overlattice(&sat, &bi(5), 1).unwrap() {
        Ok(bigger) => {
            assert!(bigger.is_integral());
            assert!(bigger.contains_lattice(&l));
            assert_eq!(bigger.det().to_integer().abs(), bi(1));
        }
        Err(c) => panic!("expected an overlattice, got {c:?}"),
    }

    // diag(1, 9) is already handled by saturation
    let l = lat(2, &[1, 0, 0, 9]);
    let (m, _) = op_maximal(&l, &bi(3), 1).unwrap();
    assert_eq!(m.det().to_integer().abs(), bi(1));
    assert!(m.contains_lattice(&l));
}

#[test]
fn op_maximal_examples() {
    // p does not divide det: unchanged
    let l = lat(2, &[1, 0, 0, 2]);
    let (m, cert) = op_maximal(&l, &bi(5), 1).unwrap();
    assert_eq!(m, l);
    assert_eq!(cert.witness, MaximalityWitness::DimensionAtMostOne);

    let l = lat(2, &[5, 0, 0, -5]);
    let (m, _) = op_maximal(&l, &bi(5), 1).unwrap();
    assert_eq!(m.det().to_integer(), bi(-1));
}

#[test]
fn two_maximal_examples() {
    // diag(2,2): no isotropic vector, unchanged
    let l = lat(2, &[2, 0, 0, 2]);
    let (m, cert) = two_maximal(&l).unwrap();
    assert_eq!(m, l);
    assert_eq!(cert.witness, MaximalityWitness::NoIsotropicVector { exhaustive: true });
    assert_eq!(cert.group_size, bi(4));

    // diag(2,-2): even unimodular overlattice of det -1
    let l = lat(2, &[2, 0, 0, -2]);
    let (m, _) = two_maximal(&l).unwrap();
    assert!(m.is_integral());
    assert!(m.is_even());
    assert!(m.contains_lattice(&l));
    assert_eq!(m.det().to_integer(), bi(-1));

    // unimodular: unchanged
    let l = lat(2, &[0, 1, 1, 0]);
    let (m, _) = two_maximal(&l).unwrap();
    assert_eq!(m, l);
}

#[test]
fn maximal_overlattice_block_example() {
    let l = lat(4, &[2, 0, 0, 0, 0, -2, 0, 0, 0, 0, 5, 0, 0, 0, 0, -5]);
    let (m, certs) = maximal_overlattice(&l, 7, &[]).unwrap();
    assert!(m.is_integral());
    assert!(m.contains_lattice(&l));
    assert_eq!(m.det().to_integer().abs(), bi(1));
    // index^2 * |det out| = |det in|
    let idx = m.index_of(&l).unwrap();
    assert_eq!(&idx * &idx * m.det().to_integer().abs(), l.det().to_integer().abs());
    assert!(certs.len() >= 2);
    for c in &certs {
        if c.prime != bi(2) {
            // re-certify exhaustively
            certify_no_isotropic(&m, &c.prime).unwrap();
        }
    }
}

#[test]
fn gram_zp_representative_examples() {
    use crate::padic::{BlockType, Constituent};
    let s = LocalSymbol {
        prime: bi(3),
        constituents: vec![Constituent { scale: 0, rank: 1, sign: 1, kind: BlockType::I, oddity: 0 }],
    };
    assert_eq!(gram_zp_representative(&s).unwrap(), IntMatrix::from_i64(1, 1, &[1]));

    let s = LocalSymbol {
        prime: bi(3),
        constituents: vec![Constituent { scale: 0, rank: 1, sign: -1, kind: BlockType::I, oddity: 0 }],
    };
    assert_eq!(gram_zp_representative(&s).unwrap(), IntMatrix::from_i64(1, 1, &[2]));

    let s = LocalSymbol {
        prime: bi(2),
        constituents: vec![Constituent { scale: 0, rank: 2, sign: 1, kind: BlockType::II, oddity: 0 }],
    };
    let g = gram_zp_representative(&s).unwrap();
    assert_eq!(g, IntMatrix::from_i64(2, 2, &[0, 1, 1, 0]));
    let back = canonicalize_2adic(&local_symbol(&RationalMatrix::from_int_matrix(&g), &bi(2)).unwrap()).unwrap();
    let canon = canonicalize_2adic(&s).unwrap();
    assert_eq!(back, canon);
}

#[test]
fn rational_representative_examples() {
    // identity(2) genus
    let g = symbol_of(&lat(2, &[1, 0, 0, 1])).unwrap();
    let (l, _aux) = rational_representative(&g).unwrap();
    let gram = l.gram();
    assert_eq!(crate::genus::signature(&gram).unwrap(), (2, 0));
    assert_eq!(hasse_invariant(&gram, &bi(2)).unwrap(), 1);

    // hyperbolic plane: space isometric to diag(1,-1) over Q
    let h = symbol_of(&lat(2, &[0, 1, 1, 0])).unwrap();
    let (l, _) = rational_representative(&h).unwrap();
    let gram = l.gram();
    assert_eq!(crate::genus::signature(&gram).unwrap(), (1, 1));
    for p in [2i64, 3, 5, 7] {
        let want = hasse_invariant(
            &RationalMatrix::from_int_entries(2, 2, &[1, 0, 0, -1]),
            &bi(p),
        )
        .unwrap();
        assert_eq!(hasse_invariant(&gram, &bi(p)).unwrap(), want, "p={p}");
    }

    // a genus with a non-residue odd unit
    let g = symbol_of(&lat(2, &[1, 0, 0, 6])).unwrap();
    let (l, _) = rational_representative(&g).unwrap();
    let gram = l.gram();
    let want2 = hasse_invariant(&RationalMatrix::from_int_entries(2, 2, &[1, 0, 0, 6]), &bi(2)).unwrap();
    let want3 = hasse_invariant(&RationalMatrix::from_int_entries(2, 2, &[1, 0, 0, 6]), &bi(3)).unwrap();
    assert_eq!(hasse_invariant(&gram, &bi(2)).unwrap(), want2);
    assert_eq!(hasse_invariant(&gram, &bi(3)).unwrap(), want3);
}

#[test]
fn local_modification_identity() {
    // modifying a maximal lattice by its own local Gram returns the same genus
    let m0 = lat(2, &[1, 0, 0, 1]);
    let (m, _) = maximal_overlattice(&m0, 3, &[]).unwrap();
    let g = m.gram().to_int().unwrap();
    let out = local_modification(&m, &g, &bi(3), 3, &[]).unwrap();
    assert_eq!(symbol_of(&out).unwrap(), symbol_of(&m).unwrap());
}

#[test]
fn local_modification_imposes_3adic_symbol() {
    // M = Z^2 with identity form, G = diag(1, 9) at p = 3
    let m = lat(2, &[1, 0, 0, 1]);
    let g = IntMatrix::from_i64(2, 2, &[1, 0, 0, 9]);
    let out = local_modification(&m, &g, &bi(3), 5, &[]).unwrap();
    let s = symbol_of(&out).unwrap();
    let three = bi(3);
    let c3 = &s.locals[&three].constituents;
    assert_eq!(c3.len(), 2);
    assert_eq!((c3[0].scale, c3[0].rank, c3[0].sign), (0, 1, 1));
    assert_eq!((c3[1].scale, c3[1].rank, c3[1].sign), (2, 1, 1));
    // 2-adic symbol unchanged
    let two = bi(2);
    let m_sym = symbol_of(&m).unwrap();
    assert_eq!(s.locals[&two], m_sym.locals[&two]);
    assert_eq!(out.det().to_integer(), bi(9));
}

#[test]
fn local_modification_rejects_wrong_space() {
    // diag(1,1) and diag(1,3) are not Q_3-isometric (determinants differ)
    let m = lat(2, &[1, 0, 0, 1]);
    let g = IntMatrix::from_i64(2, 2, &[1, 0, 0, 3]);
    match local_modification(&m, &g, &bi(3), 5, &[]) {
        Err(Error::Precondition(_)) => {}
        other => panic!("expected precondition error, got {other:?}"),
    }
}

#[test]
fn representative_rank1() {
    let g = symbol_of(&lat(1, &[1])).unwrap();
    let l = representative(&g, 11).unwrap();
    assert_eq!(l.gram(), RationalMatrix::from_int_entries(1, 1, &[1]));

    let g = symbol_of(&lat(1, &[-3])).unwrap();
    let l = representative(&g, 11).unwrap();
    assert_eq!(symbol_of(&l).unwrap(), g);
}

#[test]
fn representative_hyperbolic_plane() {
    let h = symbol_of(&lat(2, &[0, 1, 1, 0])).unwrap();
    let l = representative(&h, 11).unwrap();
    assert!(l.is_even());
    assert_eq!(l.det().to_integer(), bi(-1));
    assert_eq!(symbol_of(&l).unwrap(), h);
}

#[test]
fn representative_roundtrip_small_grid() {
    let opts = EnumerateOptions::default();
    let mut count = 0;
    for n in 1..=2u32 {
        for d in 1..=10i64 {
            for g in enumerate(n, &bi(d), &opts).unwrap() {
                let l = representative(&g, 17).unwrap();
                assert_eq!(symbol_of(&l).unwrap(), g, "genus {}", g.format());
                count += 1;
            }
        }
    }
    assert!(count > 30, "only {count} genera in the grid");
}
