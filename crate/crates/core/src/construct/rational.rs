//! A rational quadratic space with the invariants of a genus symbol:
//! signature, determinant class, and Hasse invariant at every prime dividing
//! twice the determinant, with +1 Hasse at every other prime.
//!
//! Entries are built one at a time. Each entry's square class is pinned at
//! the primes of interest by CRT and realized with a fresh auxiliary prime
//! found by scanning an arithmetic progression; Hilbert reciprocity settles
//! the last binary block, so auxiliary places end up with trivial Hasse
//! invariant and can be absorbed later by the maximal overlattice.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::exactla::RationalMatrix;
use crate::genus::GenusSymbol;
use crate::lattice::Lattice;

use super::hasse_invariant;

/// Exact diagonalization of a symmetric rational matrix (values only).
pub(crate) fn diagonalize(g: &RationalMatrix) -> Result<Vec<BigRational>> {
    if !g.is_symmetric() {
        return Err(Error::Shape("diagonalize needs a symmetric matrix".into()));
    }
    let mut a = g.clone();
    let n = a.rows;
    let mut live: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    while !live.is_empty() {
        if let Some(idx) = live.iter().position(|&i| !a[(i, i)].is_zero()) {
            let i = live[idx];
            let pivot = a[(i, i)].clone();
            out.push(pivot.clone());
            live.remove(idx);
            for &r in &live {
                if a[(r, i)].is_zero() {
                    continue;
                }
                let f = &a[(r, i)] / &pivot;
                for &c in &live {
                    let t = &f * &a[(i, c)];
                    a[(r, c)] -= t;
                }
            }
            continue;
        }
        let mut pair = None;
        'search: for (ii, &i) in live.iter().enumerate() {
            for &j in live.iter().skip(ii + 1) {
                if !a[(i, j)].is_zero() {
                    pair = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((i, j)) = pair else {
            return Err(Error::Singular);
        };
        // split the hyperbolic pair as <2b>, <-b/2> after a basis change
        let b = a[(i, j)].clone();
        let twob = BigRational::from(BigInt::from(2u8)) * &b;
        out.push(twob.clone());
        out.push(-&b / BigRational::from(BigInt::from(2u8)));
        live.retain(|&x| x != i && x != j);
        for &r in &live {
            let (ri, rj) = (a[(r, i)].clone(), a[(r, j)].clone());
            if ri.is_zero() && rj.is_zero() {
                continue;
            }
            let ci = &rj / &b;
            let cj = &ri / &b;
            for &c in &live {
                let t = &ci * &a[(i, c)] + &cj * &a[(j, c)];
                a[(r, c)] -= t;
            }
        }
    }
    Ok(out)
}

fn hilbert(a: &BigInt, b: &BigInt, p: &BigInt) -> i32 {
    arith::hilbert_symbol(a, b, p).expect("nonzero arguments")
}

/// Candidate square classes at p, cheapest first: (valuation in {0,1}, unit).
fn class_candidates(p: &BigInt) -> Vec<(u32, BigInt)> {
    if p == &BigInt::from(2u8) {
        let mut out = Vec::new();
        for v in [0u32, 1] {
            for u in [1i64, 3, 5, 7] {
                out.push((v, BigInt::from(u)));
            }
        }
        out
    } else {
        let nr = arith::nonresidue(p).expect("odd prime");
        vec![
            (0, BigInt::one()),
            (0, nr.clone()),
            (1, BigInt::one()),
            (1, nr),
        ]
    }
}

/// Is a rational number a square in Q_p?
fn is_local_square(x: &BigRational, p: &BigInt) -> bool {
    let num = x.numer();
    let den = x.denom();
    let v = i64::from(arith::valuation(num, p)) - i64::from(arith::valuation(den, p));
    if v % 2 != 0 {
        return false;
    }
    let u_num = num / p.pow(arith::valuation(num, p));
    let u_den = den / p.pow(arith::valuation(den, p));
    if p == &BigInt::from(2u8) {
        let eight = BigInt::from(8u8);
        let u = (u_num * arith::inv_mod(&u_den, &eight).unwrap()).mod_floor(&eight);
        u == BigInt::one()
    } else {
        arith::legendre(&(u_num * u_den), p).unwrap() == 1
    }
}

/// Find a prime (positive) congruent to `residue` mod `modulus`.
fn dirichlet_prime(residue: &BigInt, modulus: &BigInt) -> Result<BigInt> {
    let r = residue.mod_floor(modulus);
    if r.gcd(modulus) != BigInt::one() {
        return Err(Error::BadArgument("dirichlet residue not coprime to modulus".into()));
    }
    let mut candidate = r.clone();
    if candidate <= BigInt::one() {
        candidate += modulus;
    }
    for _ in 0..2_000_000u32 {
        if arith::is_prime(&candidate) {
            return Ok(candidate);
        }
        candidate += modulus;
    }
    Err(Error::ResourceLimit("no prime found in arithmetic progression".into()))
}

struct EntryBuilder {
    /// remaining Hasse targets per prime
    eps: BTreeMap<BigInt, i32>,
    /// remaining determinant (exact, signed)
    det: BigRational,
    /// remaining signature
    pos: u32,
    neg: u32,
    /// fresh primes introduced so far
    aux: Vec<BigInt>,
    entries: Vec<BigRational>,
}

impl EntryBuilder {
    fn remaining_rank(&self) -> u32 {
        self.pos + self.neg
    }

    /// Fix an entry: update determinant, signature and Hasse targets.
    fn push_entry(&mut self, a: BigRational) -> Result<()> {
        let a_int = a.numer() * a.denom();
        // register new primes of a with their forced targets
        let fac = arith::factorize_with_hints(
            &a_int.abs(),
            &self.eps.keys().cloned().collect::<Vec<_>>(),
        )?;
        let mut new_primes = Vec::new();
        for p in fac.primes() {
            if !self.eps.contains_key(p) {
                new_primes.push(p.clone());
            }
        }
        for p in &new_primes {
            // the finished form must have Hasse +1 at the fresh prime; the
            // entries built so far are all units at p except possibly a
            let built_det: BigRational =
                self.entries.iter().product::<BigRational>() * BigRational::one();
            let built_hasse = if self.entries.is_empty() {
                1
            } else {
                let m = RationalMatrix::diagonal(&self.entries);
                hasse_invariant(&m, p)?
            };
            let cross = if self.entries.is_empty() {
                1
            } else {
                hilbert(
                    &(built_det.numer() * built_det.denom()),
                    &a_int,
                    p,
                )
            };
            // H(built ⊥ <a> ⊥ rest) = H(built)·H(<a>)·H(rest)
            //   · (det built, a·det rest) · (a, det rest)
            // with H(<a>) = 1; solve for the rest's target so the total is +1
            let det_rest = &self.det / &a;
            let det_rest_int = det_rest.numer() * det_rest.denom();
            let t = built_hasse
                * cross
                * hilbert(&(built_det.numer() * built_det.denom()), &det_rest_int, p)
                * hilbert(&a_int, &det_rest_int, p);
            self.eps.insert(p.clone(), t);
            self.aux.push(p.clone());
        }
        // standard update at the existing primes
        let eps_keys: Vec<BigInt> = self.eps.keys().cloned().collect();
        for p in eps_keys {
            if new_primes.contains(&p) {
                continue;
            }
            let neg_det = -&self.det;
            let nd_int = neg_det.numer() * neg_det.denom();
            let upd = hilbert(&a_int, &nd_int, &p);
            let e = self.eps.get_mut(&p).unwrap();
            *e *= upd;
        }
        if a.is_positive() {
            self.pos -= 1;
        } else {
            self.neg -= 1;
        }
        self.det /= &a;
        self.entries.push(a);
        Ok(())
    }
}

/// Build a diagonal rational lattice whose quadratic space carries the
/// signature, determinant class, and Hasse invariants of the genus symbol.
/// Returns the lattice plus every auxiliary prime introduced.
pub fn rational_representative(g: &GenusSymbol) -> Result<(Lattice, Vec<BigInt>)> {
    g.validate()?;
    let two = BigInt::from(2u8);
    let mut eps: BTreeMap<BigInt, i32> = BTreeMap::new();
    for (p, s) in &g.locals {
        let gram = crate::padic::gram_from_symbol(s)?;
        eps.insert(p.clone(), hasse_invariant(&RationalMatrix::from_int_matrix(&gram), p)?);
    }
    eps.entry(two.clone()).or_insert(1);
    let mut b = EntryBuilder {
        eps,
        det: BigRational::from(g.det()),
        pos: g.pos,
        neg: g.neg,
        aux: Vec::new(),
        entries: Vec::new(),
    };

    let genus_primes: Vec<BigInt> = g.locals.keys().cloned().collect();
    while b.remaining_rank() > 2 {
        let sign_pos = b.pos > 0;
        // pin square classes only where constraints can bite: at the genus
        // primes, plus at the auxiliary primes once the rank-2 feasibility
        // guard is in play. Keeping auxiliary primes out of the early CRT
        // moduli keeps the Dirichlet primes small.
        let primes: Vec<BigInt> = if b.remaining_rank() == 3 {
            b.eps.keys().cloned().collect()
        } else {
            genus_primes.clone()
        };
        // choose a square class for the entry at each pinned prime
        let mut chosen: Vec<(BigInt, (u32, BigInt))> = Vec::new();
        for p in &primes {
            let mut pick = None;
            for cand in class_candidates(p) {
                if b.remaining_rank() == 3 {
                    // the rank-2 remainder must stay feasible at p:
                    // not(-det' a square with Hasse target -1).
                    // realize_class pins the signed value's unit residue, so
                    // the p-adic class of the entry is p^v * u with no sign.
                    let a_class = p.pow(cand.0) * &cand.1;
                    let det_rest = &b.det / BigRational::from(a_class.clone());
                    let neg_det_rest = -det_rest;
                    let eps_rest = b.eps[p]
                        * hilbert(
                            &a_class,
                            &((-&b.det).numer() * (-&b.det).denom()),
                            p,
                        );
                    if is_local_square(&neg_det_rest, p) && eps_rest == -1 {
                        continue;
                    }
                }
                pick = Some(cand);
                break;
            }
            let Some(c) = pick else {
                return Err(Error::Verify(format!("no feasible square class at {p}")));
            };
            chosen.push((p.clone(), c));
        }
        let a = realize_class(sign_pos, &chosen)?;
        b.push_entry(BigRational::from(a))?;
    }

    if b.remaining_rank() == 1 {
        // rank one: the determinant itself; all Hasse targets are trivial
        for (p, e) in &b.eps {
            if *e != 1 {
                return Err(Error::Verify(format!("rank-1 block with Hasse -1 at {p}")));
            }
        }
        b.entries.push(b.det.clone());
    } else {
        // rank-2 base: <a, det/a> with (a, -det) = eps at every prime of interest
        let primes: Vec<BigInt> = b.eps.keys().cloned().collect();
        let neg_det = -&b.det;
        let mut chosen: Vec<(BigInt, (u32, BigInt))> = Vec::new();
        let sign_pos = b.pos > 0;
        for p in &primes {
            let want = b.eps[&p.clone()];
            if is_local_square(&neg_det, p) {
                if want != 1 {
                    return Err(Error::Verify(format!(
                        "infeasible binary block at {p}: -det is a square but Hasse is -1"
                    )));
                }
                chosen.push((p.clone(), (0, BigInt::one())));
                continue;
            }
            let nd_int = neg_det.numer() * neg_det.denom();
            let mut pick = None;
            for cand in class_candidates(p) {
                let a_class = p.pow(cand.0) * &cand.1;
                if hilbert(&a_class, &nd_int, p) == want {
                    pick = Some(cand);
                    break;
                }
            }
            let Some(c) = pick else {
                return Err(Error::Verify(format!("no binary square class works at {p}")));
            };
            chosen.push((p.clone(), c));
        }
        let a = realize_class(sign_pos, &chosen)?;
        let a_rat = BigRational::from(a.clone());
        let rest = &b.det / &a_rat;
        // track the aux prime introduced by a
        let hint_primes: Vec<BigInt> = b.eps.keys().cloned().collect();
        let fac = arith::factorize_with_hints(&a.abs(), &hint_primes)?;
        for p in fac.primes() {
            if !b.eps.contains_key(p) {
                b.aux.push(p.clone());
            }
        }
        b.entries.push(a_rat);
        b.entries.push(rest);
    }

    // clear denominators by square scalings, keep entries integral
    let entries: Vec<BigRational> = b
        .entries
        .iter()
        .map(|e| {
            let d = e.denom().clone();
            e * BigRational::from(&d * &d)
        })
        .collect();
    let gram = RationalMatrix::diagonal(&entries);
    let lat = Lattice::from_gram(gram.clone())?;

    // internal verification: signature, determinant class, Hasse invariants
    let (pos, neg) = crate::genus::signature(&gram)?;
    if (pos, neg) != (g.pos, g.neg) {
        return Err(Error::Verify("rational representative signature mismatch".into()));
    }
    let det_ratio = gram.det()? / BigRational::from(g.det());
    let sq = det_ratio.numer() * det_ratio.denom();
    if !(sq.is_positive() && arith::factorize_with_hints(&sq, &all_primes(&b, g)).map(|f| {
        f.pairs.iter().all(|(_, e)| e % 2 == 0)
    })?) {
        return Err(Error::Verify("rational representative determinant class mismatch".into()));
    }
    for (p, s) in &g.locals {
        let want =
            hasse_invariant(&RationalMatrix::from_int_matrix(&crate::padic::gram_from_symbol(s)?), p)?;
        if hasse_invariant(&gram, p)? != want {
            return Err(Error::Verify(format!("Hasse invariant mismatch at {p}")));
        }
    }
    for p in &b.aux {
        if hasse_invariant(&gram, p)? != 1 {
            return Err(Error::Verify(format!("Hasse invariant at auxiliary prime {p} not trivial")));
        }
    }
    Ok((lat, b.aux))
}

fn all_primes(b: &EntryBuilder, g: &GenusSymbol) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = g.locals.keys().cloned().collect();
    v.extend(b.aux.iter().cloned());
    v.extend(b.eps.keys().cloned());
    v.sort();
    v.dedup();
    v
}

/// Realize a signed square class prescribed at finitely many primes as
/// sign * (product of prime powers) * ℓ with ℓ a fresh Dirichlet prime.
fn realize_class(sign_pos: bool, chosen: &[(BigInt, (u32, BigInt))]) -> Result<BigInt> {
    let sign = if sign_pos { BigInt::one() } else { -BigInt::one() };
    let mut p_part = BigInt::one();
    for (p, (v, _)) in chosen {
        p_part *= p.pow(*v);
    }
    // CRT residue so that sign * p_part * ℓ has the prescribed unit class
    let mut residues = Vec::new();
    let mut moduli = Vec::new();
    for (p, (_, u)) in chosen {
        let k = if p == &BigInt::from(2u8) { 3 } else { 1 };
        let pk = p.pow(k);
        let rest = (&sign * &p_part / p.pow(chosen.iter().find(|(q, _)| q == p).unwrap().1 .0))
            .mod_floor(&pk);
        let inv = arith::inv_mod(&rest, &pk)?;
        residues.push((u * inv).mod_floor(&pk));
        moduli.push(pk);
    }
    let (r, m) = (arith::crt(&residues, &moduli)?, moduli.iter().product::<BigInt>());
    let ell = dirichlet_prime(&r, &m)?;
    Ok(sign * p_part * ell)
}
