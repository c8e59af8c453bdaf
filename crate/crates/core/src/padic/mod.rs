//! p-adic Jordan decomposition, p-adic normal form with transformation
//! matrix, and local genus-symbol extraction from a Gram matrix.

mod blocks2;
mod canon2;
mod jordan;
mod normal;

pub use blocks2::{det8_of_constituent, minimal_diagonal, oddity_set, realizable_type1, realizable_type2};
pub use normal::{gram_from_symbol, normal_form, stats};

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith;
use crate::error::{Error, Result};
use crate::exactla::{IntMatrix, RationalMatrix};

/// Type of a 2-adic Jordan constituent: I (some odd diagonal value) or II
/// (the form is even). At odd primes every constituent is recorded as I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockType {
    I,
    II,
}

/// One Jordan constituent of a local symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constituent {
    /// Scale exponent k: the block is p^k times a unimodular form.
    pub scale: u32,
    pub rank: u32,
    /// +1 or -1: the square-class of the unit determinant (at p = 2 the
    /// sign is + exactly when the unit determinant is ±1 mod 8).
    pub sign: i8,
    /// Only meaningful at p = 2; constituents at odd p carry I.
    pub kind: BlockType,
    /// Oddity (trace invariant) mod 8; zero for type II and at odd p.
    pub oddity: u8,
}

/// The local genus symbol at one prime: ordered Jordan constituents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalSymbol {
    pub prime: BigInt,
    pub constituents: Vec<Constituent>,
}

/// One block of a Jordan decomposition: scale and p-unimodular unit part,
/// entries reduced mod p^(nu_p(det) + 3).
#[derive(Debug, Clone)]
pub struct JordanBlock {
    pub scale: u32,
    pub unit_gram: IntMatrix,
}

impl LocalSymbol {
    pub fn rank(&self) -> u32 {
        self.constituents.iter().map(|c| c.rank).sum()
    }

    /// Sum of scale * rank over constituents: the p-valuation of the
    /// determinant.
    pub fn det_valuation(&self) -> u64 {
        self.constituents
            .iter()
            .map(|c| u64::from(c.scale) * u64::from(c.rank))
            .sum()
    }

    /// Product of constituent signs.
    pub fn sign_product(&self) -> i8 {
        let mut s = 1i8;
        for c in &self.constituents {
            s *= c.sign;
        }
        s
    }

    /// The determinant's unit class mod 8 implied by a 2-adic symbol.
    pub fn det8(&self) -> Result<u8> {
        let mut d = 1u32;
        for c in &self.constituents {
            d = (d * u32::from(det8_of_constituent(c)?)) % 8;
        }
        Ok(d as u8)
    }

    /// Conway–Sloane p-excess of an odd-prime symbol, mod 8.
    pub fn p_excess(&self) -> u64 {
        let p_mod8 = (&self.prime % BigInt::from(8u8)).to_u64_digits().1.first().copied().unwrap_or(0);
        let mut e = 0u64;
        for c in &self.constituents {
            // rank * (p^k - 1) mod 8, plus 4 for antisquare constituents
            let pk = mod8_pow(p_mod8, c.scale);
            e += u64::from(c.rank) * ((pk + 7) % 8);
            if c.scale % 2 == 1 && c.sign == -1 {
                e += 4;
            }
        }
        e % 8
    }

    /// Conway–Sloane oddity of a 2-adic symbol, mod 8.
    pub fn oddity(&self) -> u64 {
        let mut t = 0u64;
        for c in &self.constituents {
            t += u64::from(c.oddity);
            if c.scale % 2 == 1 && c.sign == -1 {
                t += 4;
            }
        }
        t % 8
    }

    /// Structural checks plus per-constituent realizability.
    pub fn validate(&self) -> Result<()> {
        let two = BigInt::from(2u8);
        for w in self.constituents.windows(2) {
            if w[0].scale >= w[1].scale {
                return Err(Error::InvalidSymbol("scales must be strictly increasing".into()));
            }
        }
        for c in &self.constituents {
            if c.rank == 0 {
                return Err(Error::InvalidSymbol("zero-rank constituent".into()));
            }
            if c.sign != 1 && c.sign != -1 {
                return Err(Error::InvalidSymbol("sign must be ±1".into()));
            }
            if self.prime == two {
                match c.kind {
                    BlockType::II => {
                        if c.oddity != 0 {
                            return Err(Error::InvalidSymbol("type II constituent with nonzero oddity".into()));
                        }
                        if !realizable_type2(c.rank, c.sign) {
                            return Err(Error::InvalidSymbol(format!(
                                "unrealizable type II constituent (rank {}, sign {})",
                                c.rank, c.sign
                            )));
                        }
                    }
                    BlockType::I => {
                        if !realizable_type1(c.rank, c.sign, c.oddity) {
                            return Err(Error::InvalidSymbol(format!(
                                "unrealizable type I constituent (rank {}, sign {}, oddity {})",
                                c.rank, c.sign, c.oddity
                            )));
                        }
                    }
                }
            } else if c.kind != BlockType::I || c.oddity != 0 {
                return Err(Error::InvalidSymbol("odd-prime constituents carry no 2-adic data".into()));
            }
        }
        Ok(())
    }
}

fn mod8_pow(base: u64, e: u32) -> u64 {
    let mut r = 1u64;
    for _ in 0..e {
        r = (r * base) % 8;
    }
    r
}

/// p-adic valuation of a nonzero rational.
pub fn rat_valuation(x: &BigRational, p: &BigInt) -> i64 {
    assert!(!x.is_zero());
    i64::from(arith::valuation(x.numer(), p)) - i64::from(arith::valuation(x.denom(), p))
}

/// Reduce a p-integral rational mod p^k into [0, p^k).
pub fn rat_mod_pk(x: &BigRational, p: &BigInt, k: u32) -> Result<BigInt> {
    let m = p.pow(k);
    let den = x.denom();
    if (den % p).is_zero() {
        return Err(Error::BadArgument("rational is not p-integral".into()));
    }
    let inv = arith::inv_mod(den, &m)?;
    Ok((x.numer() * inv).mod_floor(&m))
}

/// Unit class mod 8 of a 2-adic unit rational (odd numerator and denominator).
pub(crate) fn unit_mod8(x: &BigRational) -> u8 {
    let eight = BigInt::from(8u8);
    let n = x.numer().mod_floor(&eight);
    let d = x.denom().mod_floor(&eight);
    let inv = arith::inv_mod(&d, &eight).expect("odd denominator");
    let r = (n * inv).mod_floor(&eight);
    r.to_u64_digits().1.first().copied().unwrap_or(0) as u8
}

/// Legendre class (+1/-1) of a p-unit rational at an odd prime.
pub(crate) fn unit_class_odd(x: &BigRational, p: &BigInt) -> Result<i8> {
    let s = arith::legendre_rational(x.numer(), x.denom(), p)?;
    if s == 0 {
        return Err(Error::BadArgument("not a p-unit".into()));
    }
    Ok(s as i8)
}

/// Jordan decomposition of an integral symmetric matrix at p. Unit parts are
/// reduced mod p^(nu_p(det)+3).
pub fn jordan_decomposition(g: &RationalMatrix, p: &BigInt) -> Result<Vec<JordanBlock>> {
    let (_, blocks) = jordan::jordan_exact(g, p)?;
    let det = g.det()?;
    let nu = rat_valuation(&det, p).unsigned_abs() as u32;
    let prec = nu + 3;
    blocks
        .into_iter()
        .map(|(scale, unit)| {
            let m = IntMatrix::from_fn(unit.rows, unit.cols, |i, j| {
                rat_mod_pk(&unit[(i, j)], p, prec).expect("p-integral unit entry")
            });
            Ok(JordanBlock { scale, unit_gram: m })
        })
        .collect()
}

/// Split a 2-adically unimodular exact-rational symmetric block into odd
/// diagonal units and even 2x2 blocks. Returns (odd units, even 2x2 dets).
pub(crate) fn split_unimodular_2(w: &RationalMatrix) -> (Vec<BigRational>, Vec<BigRational>) {
    let two = BigInt::from(2u8);
    let mut a = w.clone();
    let mut odd_units = Vec::new();
    let mut even_dets = Vec::new();
    let mut live: Vec<usize> = (0..a.rows).collect();
    while !live.is_empty() {
        // odd diagonal entry first
        if let Some(pos) = live
            .iter()
            .position(|&i| !a[(i, i)].is_zero() && rat_valuation(&a[(i, i)], &two) == 0)
        {
            let i = live[pos];
            let pivot = a[(i, i)].clone();
            odd_units.push(pivot.clone());
            live.remove(pos);
            for &r in &live {
                if a[(r, i)].is_zero() {
                    continue;
                }
                let f = &a[(r, i)] / &pivot;
                for &c in &live {
                    let t = &f * &a[(i, c)];
                    a[(r, c)] -= t;
                }
                a[(r, i)] = BigRational::zero();
            }
            for &c in &live {
                a[(i, c)] = BigRational::zero();
            }
            continue;
        }
        // otherwise all live diagonals are even; find an odd off-diagonal
        let mut pair = None;
        'search: for (pi, &i) in live.iter().enumerate() {
            for &j in live.iter().skip(pi + 1) {
                if !a[(i, j)].is_zero() && rat_valuation(&a[(i, j)], &two) == 0 {
                    pair = Some((i, j));
                    break 'search;
                }
            }
        }
        let (i, j) = pair.expect("unimodular block must have an odd entry");
        let det = &a[(i, i)] * &a[(j, j)] - &a[(i, j)] * &a[(i, j)];
        even_dets.push(det.clone());
        let det_inv = det.recip();
        live.retain(|&x| x != i && x != j);
        // clear the two pivot rows against the rest with the 2x2 inverse
        let (aii, aij, ajj) = (a[(i, i)].clone(), a[(i, j)].clone(), a[(j, j)].clone());
        for &r in &live {
            let (ri, rj) = (a[(r, i)].clone(), a[(r, j)].clone());
            if ri.is_zero() && rj.is_zero() {
                continue;
            }
            // coefficients (c_i, c_j) = (ri, rj) * inv([[aii,aij],[aij,ajj]])
            let ci = (&ri * &ajj - &rj * &aij) * &det_inv;
            let cj = (&rj * &aii - &ri * &aij) * &det_inv;
            for &c in &live {
                let t = &ci * &a[(i, c)] + &cj * &a[(j, c)];
                a[(r, c)] -= t;
            }
            a[(r, i)] = BigRational::zero();
            a[(r, j)] = BigRational::zero();
        }
    }
    (odd_units, even_dets)
}

/// Invariants (rank, type, sign, oddity) of one unimodular 2-adic block.
pub(crate) fn invariants_2(w: &RationalMatrix) -> Result<(u32, BlockType, i8, u8)> {
    let (odds, evens) = split_unimodular_2(w);
    let rank = (odds.len() + 2 * evens.len()) as u32;
    let kind = if odds.is_empty() { BlockType::II } else { BlockType::I };
    let mut det8 = 1u32;
    for u in &odds {
        det8 = (det8 * u32::from(unit_mod8(u))) % 8;
    }
    let mut oddity = 0u32;
    for u in &odds {
        oddity = (oddity + u32::from(unit_mod8(u))) % 8;
    }
    // U and V sub-blocks contribute their determinant class and nothing to
    // the oddity: <7> + V and diag(1,1,5) are isometric, both of oddity 7.
    for d in &evens {
        let d8 = unit_mod8(d);
        match d8 {
            7 | 3 => {
                det8 = (det8 * u32::from(d8)) % 8;
            }
            _ => {
                return Err(Error::Verify(format!("even 2x2 block with det {d8} mod 8")));
            }
        }
    }
    let sign = if det8 == 1 || det8 == 7 { 1 } else { -1 };
    let oddity = if kind == BlockType::II { 0 } else { oddity as u8 };
    Ok((rank, kind, sign, oddity))
}

/// Raw local symbol read off a Jordan decomposition. At p = 2 the spelling
/// depends on the decomposition; use [`canonicalize_2adic`] for a canonical
/// representative.
pub fn local_symbol(g: &RationalMatrix, p: &BigInt) -> Result<LocalSymbol> {
    let (_, blocks) = jordan::jordan_exact(g, p)?;
    let two = BigInt::from(2u8);
    let mut constituents = Vec::new();
    for (scale, unit) in &blocks {
        if p == &two {
            let (rank, kind, sign, oddity) = invariants_2(unit)?;
            constituents.push(Constituent { scale: *scale, rank, sign, kind, oddity });
        } else {
            let det = unit.det()?;
            let sign = unit_class_odd(&det, p)?;
            constituents.push(Constituent {
                scale: *scale,
                rank: unit.rows as u32,
                sign,
                kind: BlockType::I,
                oddity: 0,
            });
        }
    }
    Ok(LocalSymbol { prime: p.clone(), constituents })
}

/// Canonical representative of a 2-adic symbol under sign walking and
/// oddity fusion.
pub fn canonicalize_2adic(s: &LocalSymbol) -> Result<LocalSymbol> {
    if s.prime != BigInt::from(2u8) {
        return Err(Error::BadArgument("canonicalize_2adic needs a 2-adic symbol".into()));
    }
    s.validate()?;
    canon2::canonicalize(s)
}

#[cfg(test)]
mod tests;
