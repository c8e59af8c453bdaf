//! Realizability tables for unimodular 2-adic Jordan blocks, computed by
//! brute force over diagonal unit tuples and U/V assemblies rather than
//! transcribed from reference tables.

use std::sync::OnceLock;

use crate::error::{Error, Result};

use super::{BlockType, Constituent};

const UNITS: [u8; 4] = [1, 3, 5, 7];

fn unit_index(u: u8) -> usize {
    match u {
        1 => 0,
        3 => 1,
        5 => 2,
        7 => 3,
        _ => panic!("not a unit mod 8: {u}"),
    }
}

/// Bit index for a (det8, oddity) pair.
fn bit(d: u8, t: u8) -> u32 {
    1u32 << (unit_index(d) * 8 + usize::from(t))
}

/// Masks over (det8, oddity) pairs realizable by rank-r diagonal forms with
/// entries in {1,3,5,7}; index r, up to MAX_RANK.
fn type1_table() -> &'static Vec<u32> {
    static TABLE: OnceLock<Vec<u32>> = OnceLock::new();
    TABLE.get_or_init(|| {
        const MAX_RANK: usize = 128;
        let mut tab = vec![0u32; MAX_RANK + 1];
        tab[0] = bit(1, 0);
        for r in 1..=MAX_RANK {
            let mut m = 0u32;
            for d in UNITS {
                for t in 0..8u8 {
                    if tab[r - 1] & bit(d, t) == 0 {
                        continue;
                    }
                    for u in UNITS {
                        m |= bit((d * u) % 8, (t + u) % 8);
                    }
                }
            }
            tab[r] = m;
        }
        tab
    })
}

fn sign_of_det8(d: u8) -> i8 {
    match d % 8 {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => panic!("even det"),
    }
}

/// Is (rank, sign, oddity) realizable by an odd unimodular 2-adic block?
pub fn realizable_type1(rank: u32, sign: i8, oddity: u8) -> bool {
    if rank == 0 || rank as usize >= type1_table().len() {
        return false;
    }
    let m = type1_table()[rank as usize];
    UNITS
        .iter()
        .any(|&d| sign_of_det8(d) == sign && m & bit(d, oddity % 8) != 0)
}

/// Is (rank, sign) realizable by an even unimodular 2-adic block (U/V sums)?
pub fn realizable_type2(rank: u32, sign: i8) -> bool {
    rank > 0 && rank % 2 == 0 && (sign == 1 || sign == -1)
}

/// The determinant class mod 8 of a constituent, derived from
/// (rank, type, sign, oddity). Unique when the constituent is realizable.
pub fn det8_of_constituent(c: &Constituent) -> Result<u8> {
    match c.kind {
        BlockType::II => {
            if !realizable_type2(c.rank, c.sign) {
                return Err(Error::InvalidSymbol(format!(
                    "type II rank {} sign {}",
                    c.rank, c.sign
                )));
            }
            let delta = u32::from(c.sign == -1);
            let a = c.rank / 2 - delta;
            let mut d = 1u32;
            for _ in 0..a {
                d = (d * 7) % 8;
            }
            if delta == 1 {
                d = (d * 3) % 8;
            }
            Ok(d as u8)
        }
        BlockType::I => {
            let m = type1_table()
                .get(c.rank as usize)
                .copied()
                .ok_or_else(|| Error::InvalidSymbol("rank out of table range".into()))?;
            let mut found = None;
            for d in UNITS {
                if sign_of_det8(d) == c.sign && m & bit(d, c.oddity % 8) != 0 {
                    if found.is_some() {
                        return Err(Error::Verify(format!(
                            "det8 not unique for (r={}, sign={}, t={})",
                            c.rank, c.sign, c.oddity
                        )));
                    }
                    found = Some(d);
                }
            }
            found.ok_or_else(|| {
                Error::InvalidSymbol(format!(
                    "unrealizable type I constituent (r={}, sign={}, t={})",
                    c.rank, c.sign, c.oddity
                ))
            })
        }
    }
}

/// Oddities realizable at (rank, sign) for type I blocks.
pub fn oddity_set(rank: u32, sign: i8) -> Vec<u8> {
    (0..8u8).filter(|&t| realizable_type1(rank, sign, t)).collect()
}

/// Lexicographically smallest ascending diagonal in {1,3,5,7}^rank with the
/// given sign and oddity.
pub fn minimal_diagonal(rank: u32, sign: i8, oddity: u8) -> Result<Vec<u8>> {
    let target_d = det8_of_constituent(&Constituent {
        scale: 0,
        rank,
        sign,
        kind: BlockType::I,
        oddity,
    })?;
    fn feasible(r: u32, d: u8, t: u8) -> bool {
        if r == 0 {
            return d == 1 && t == 0;
        }
        (type1_table()[r as usize] & bit(d, t)) != 0
    }
    let mut out: Vec<u8> = Vec::with_capacity(rank as usize);
    let mut d = target_d;
    let mut t = oddity % 8;
    let mut min_entry = 1u8;
    for step in 0..rank {
        let rest = rank - step - 1;
        let mut chosen = None;
        for u in UNITS.iter().copied().filter(|&u| u >= min_entry) {
            let nd = (d * mod8_inv(u)) % 8;
            let nt = (t + 8 - u % 8) % 8;
            if feasible(rest, nd, nt) && (rest == 0 || tail_can_start_at(rest, nd, nt, u)) {
                chosen = Some((u, nd, nt));
                break;
            }
        }
        let Some((u, nd, nt)) = chosen else {
            return Err(Error::InvalidSymbol(format!(
                "no diagonal realizes (r={rank}, sign={sign}, t={oddity})"
            )));
        };
        out.push(u);
        min_entry = u;
        d = nd;
        t = nt;
    }
    Ok(out)
}

/// Can a rank-r diagonal with invariants (d, t) be chosen with all entries
/// at least `lo`? Checked by a small DFS; ranks here are tiny.
fn tail_can_start_at(r: u32, d: u8, t: u8, lo: u8) -> bool {
    if r == 0 {
        return d == 1 && t == 0;
    }
    for u in UNITS.iter().copied().filter(|&u| u >= lo) {
        let nd = (d * mod8_inv(u)) % 8;
        let nt = (t + 8 - u % 8) % 8;
        if tail_can_start_at(r - 1, nd, nt, u) {
            return true;
        }
    }
    false
}

fn mod8_inv(u: u8) -> u8 {
    // every odd residue is its own inverse mod 8
    u % 8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank1_diagonals() {
        assert!(realizable_type1(1, 1, 1));
        assert!(realizable_type1(1, 1, 7));
        assert!(realizable_type1(1, -1, 3));
        assert!(realizable_type1(1, -1, 5));
        assert!(!realizable_type1(1, 1, 3));
        assert!(!realizable_type1(1, -1, 1));
        assert!(!realizable_type1(1, 1, 0));
    }

    #[test]
    fn rank2_sets_match_enumeration() {
        for s in [1i8, -1] {
            for t in 0..8u8 {
                let mut want = false;
                for a in UNITS {
                    for b in UNITS {
                        let d = (a * b) % 8;
                        if sign_of_det8(d) == s && (a + b) % 8 == t {
                            want = true;
                        }
                    }
                }
                assert_eq!(realizable_type1(2, s, t), want, "sign {s} t {t}");
            }
        }
    }

    #[test]
    fn det8_unique_over_table() {
        for r in 1..=10u32 {
            for s in [1i8, -1] {
                for t in 0..8u8 {
                    if realizable_type1(r, s, t) {
                        let c = Constituent { scale: 0, rank: r, sign: s, kind: BlockType::I, oddity: t };
                        det8_of_constituent(&c).expect("unique det8");
                    }
                }
            }
        }
    }

    #[test]
    fn det8_character_formula() {
        // chi4(det) = (t - r)/2 mod 2, chi8(det) = [sign = -1]
        for r in 1..=9u32 {
            for s in [1i8, -1] {
                for t in 0..8u8 {
                    if !realizable_type1(r, s, t) {
                        continue;
                    }
                    let c = Constituent { scale: 0, rank: r, sign: s, kind: BlockType::I, oddity: t };
                    let d = det8_of_constituent(&c).unwrap();
                    assert_eq!(u32::from(t) % 2, r % 2, "parity");
                    let chi4 = u8::from(d == 3 || d == 7);
                    let chi8 = u8::from(d == 3 || d == 5);
                    let want_chi4 = ((i32::from(t) - r as i32) / 2).rem_euclid(2) as u8;
                    assert_eq!(chi4, want_chi4, "r={r} t={t}");
                    assert_eq!(chi8, u8::from(s == -1));
                }
            }
        }
    }

    #[test]
    fn minimal_diagonal_examples() {
        assert_eq!(minimal_diagonal(2, 1, 2).unwrap(), vec![1, 1]);
        assert_eq!(minimal_diagonal(2, 1, 0).unwrap(), vec![1, 7]);
        assert_eq!(minimal_diagonal(2, -1, 4).unwrap(), vec![1, 3]);
        assert_eq!(minimal_diagonal(1, -1, 3).unwrap(), vec![3]);
        let d = minimal_diagonal(3, 1, 3).unwrap();
        assert_eq!(d, vec![1, 1, 1]);
        assert!(minimal_diagonal(1, 1, 2).is_err());
    }

    #[test]
    fn minimal_diagonal_matches_invariants() {
        for r in 1..=6u32 {
            for s in [1i8, -1] {
                for t in 0..8u8 {
                    if !realizable_type1(r, s, t) {
                        continue;
                    }
                    let diag = minimal_diagonal(r, s, t).unwrap();
                    assert_eq!(diag.len() as u32, r);
                    let dd = diag.iter().fold(1u32, |a, &u| (a * u32::from(u)) % 8);
                    let tt = diag.iter().fold(0u32, |a, &u| (a + u32::from(u)) % 8);
                    assert_eq!(tt as u8, t);
                    assert_eq!(sign_of_det8(dd as u8), s);
                    assert!(diag.windows(2).all(|w| w[0] <= w[1]));
                }
            }
        }
    }
}

/// Is (det8, oddity) realizable by a rank-r odd diagonal? Used by the
/// canonicalization moves.
pub(crate) fn feasible_pair(rank: u32, det8: u8, t: u8) -> bool {
    if rank == 0 {
        return det8 % 8 == 1 && t % 8 == 0;
    }
    match type1_table().get(rank as usize) {
        Some(m) => m & bit(det8 % 8, t % 8) != 0,
        None => false,
    }
}
