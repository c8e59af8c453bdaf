//! The constructive core: maximal overlattices, local modification, and the
//! genus-representative pipeline.

mod rational;

pub use rational::rational_representative;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::exactla::{IntMatrix, RationalMatrix};
use crate::genus::{symbol_of_with_hints, GenusSymbol};
use crate::lattice::{DiscriminantGroup, Lattice};
use crate::padic::{canonicalize_2adic, gram_from_symbol, local_symbol, normal_form, LocalSymbol};

/// Cumulative phase timers for performance investigation.
pub mod stats {
    use std::sync::atomic::AtomicU64;
    pub static SATURATE_NS: AtomicU64 = AtomicU64::new(0);
    pub static DISC_NS: AtomicU64 = AtomicU64::new(0);
    pub static TWOMAX_NS: AtomicU64 = AtomicU64::new(0);
    pub static OPMAX_NS: AtomicU64 = AtomicU64::new(0);
    pub static PRECOND_NS: AtomicU64 = AtomicU64::new(0);
    pub static GLUE_NS: AtomicU64 = AtomicU64::new(0);
    pub static VERIFY_NS: AtomicU64 = AtomicU64::new(0);
    pub static MAXOVER_NS: AtomicU64 = AtomicU64::new(0);
    pub static REDUCE_NS: AtomicU64 = AtomicU64::new(0);
    pub static RATREP_NS: AtomicU64 = AtomicU64::new(0);
    pub fn add(c: &AtomicU64, ns: u128) {
        c.fetch_add(ns as u64, std::sync::atomic::Ordering::Relaxed);
    }
    pub fn report() -> String {
        let g = |c: &AtomicU64| c.load(std::sync::atomic::Ordering::Relaxed) / 1_000_000;
        format!(
            "precond {} ms | glue {} ms | verify {} ms | maxover {} ms | reduce {} ms | ratrep {} ms",
            g(&PRECOND_NS), g(&GLUE_NS), g(&VERIFY_NS), g(&MAXOVER_NS), g(&REDUCE_NS), g(&RATREP_NS)
        ) + &format!(
            " | twomax {} ms | opmax {} ms | lll iters {}",
            g(&TWOMAX_NS), g(&OPMAX_NS),
            crate::lattice::LLL_ITERS.load(std::sync::atomic::Ordering::Relaxed)
        )
    }
}

/// Hard cap on exhaustive discriminant-group searches.
pub const ISOTROPY_SEARCH_CAP: u64 = 1 << 16;

/// Why a lattice is maximal at a prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaximalityWitness {
    /// The discriminant group at p has F_p-dimension at most one.
    DimensionAtMostOne,
    /// Binary case at an odd prime with a non-residue ratio.
    BinaryNonResidue,
    /// Exhaustive search over the discriminant group found nothing isotropic.
    NoIsotropicVector { exhaustive: bool },
}

/// Certificate attached to a claimed-maximal output at one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalityCertificate {
    pub prime: BigInt,
    pub group_size: BigInt,
    pub witness: MaximalityWitness,
}

/// Replace each entry by its least nonnegative residue mod p^k (entries
/// must be p-integral rationals). The result is congruent to the input mod
/// p^k entrywise.
fn truncate_mod_pk(m: &RationalMatrix, p: &BigInt, k: u32) -> Result<RationalMatrix> {
    let mut out = RationalMatrix::zero(m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out[(i, j)] = BigRational::from(crate::padic::rat_mod_pk(&m[(i, j)], p, k)?);
        }
    }
    Ok(out)
}

/// Is the class of B(v, v) zero in Q/2Z at p = 2, or p-integral at odd p?
/// This is the criterion for the preimage of v to extend the lattice while
/// keeping the quadratic form integral.
pub fn is_isotropic_value(value: &BigRational, p: &BigInt) -> bool {
    let two = BigInt::from(2u8);
    if p == &two {
        // B(v, v) in 2Z as a 2-local condition: even numerator, odd denominator
        if value.is_zero() {
            return true;
        }
        crate::padic::rat_valuation(value, &two) >= 1
    } else {
        value.is_integer() || !(value.denom() % p).is_zero()
    }
}

/// Exhaustively certify there is no isotropic vector in D_p(L). Errors with
/// ResourceLimit when the group is larger than the cap.
pub fn certify_no_isotropic(l: &Lattice, p: &BigInt) -> Result<MaximalityCertificate> {
    let disc = l.discriminant_group(p)?;
    let size = disc.order();
    if find_isotropic(&disc, p)?.is_some() {
        return Err(Error::Verify(format!("isotropic vector found at p = {p}")));
    }
    Ok(MaximalityCertificate {
        prime: p.clone(),
        group_size: size,
        witness: MaximalityWitness::NoIsotropicVector { exhaustive: true },
    })
}

/// First isotropic element of the discriminant group, as generator
/// coefficients, or None. The scan clears denominators once and walks the
/// group with machine integers; the group order is capped.
pub fn find_isotropic(disc: &DiscriminantGroup, p: &BigInt) -> Result<Option<Vec<BigInt>>> {
    let m = disc.num_generators();
    if m == 0 {
        return Ok(None);
    }
    let size = disc.order();
    if size > BigInt::from(ISOTROPY_SEARCH_CAP) {
        return Err(Error::ResourceLimit(format!(
            "discriminant group has {size} elements (cap {ISOTROPY_SEARCH_CAP})"
        )));
    }
    // generator gram B(g_i, g_j) = A[i][j] / den; isotropy of c is the
    // congruence c^T A c ≡ 0 mod den (odd p) or mod 2*den (p = 2)
    let mut den = BigInt::one();
    for i in 0..m {
        for j in 0..m {
            den = num_integer::lcm(den, disc.b_value(i, j).denom().clone());
        }
    }
    let two = BigInt::from(2u8);
    let modulus_big = if p == &two { &den * &two } else { den.clone() };
    let modulus = i128::try_from(&modulus_big)
        .map_err(|_| Error::ResourceLimit("discriminant modulus too large".into()))?;
    let a: Vec<Vec<i128>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let v = disc.b_value(i, j) * BigRational::from(den.clone());
                    i128::try_from(&v.to_integer().mod_floor(&modulus_big)).expect("reduced entry")
                })
                .collect()
        })
        .collect();
    let orders: Vec<i128> = disc
        .orders
        .iter()
        .map(|o| i128::try_from(o).expect("capped order"))
        .collect();
    let mut c = vec![0i128; m];
    loop {
        // advance odometer
        let mut i = 0;
        loop {
            if i == m {
                return Ok(None);
            }
            c[i] += 1;
            if c[i] < orders[i] {
                break;
            }
            c[i] = 0;
            i += 1;
        }
        let mut acc: i128 = 0;
        for i in 0..m {
            if c[i] == 0 {
                continue;
            }
            for j in 0..m {
                if c[j] == 0 {
                    continue;
                }
                acc = (acc + (c[i] % modulus) * ((c[j] * a[i][j]) % modulus)) % modulus;
            }
        }
        if acc % modulus == 0 {
            return Ok(Some(c.iter().map(|&x| BigInt::from(x)).collect()));
        }
    }
}

/// Torsion bilinear form of a p-elementary discriminant group, over F_p,
/// diagonalized: returns (diagonal unit values, generator combinations).
fn diagonalize_torsion(disc: &DiscriminantGroup, p: &BigInt) -> Result<(Vec<BigInt>, Vec<Vec<BigInt>>)> {
    let m = disc.num_generators();
    // p * b(g_i, g_j) mod p
    let mut mat = IntMatrix::zero(m, m);
    for i in 0..m {
        for j in 0..m {
            let v = disc.b_value(i, j) * BigRational::from(p.clone());
            if !(v.denom() % p).is_zero() {
                mat[(i, j)] = crate::padic::rat_mod_pk(&v, p, 1)?;
            } else {
                return Err(Error::Precondition("discriminant group not p-saturated".into()));
            }
        }
    }
    let mut c = IntMatrix::identity(m);
    let mut live: Vec<usize> = (0..m).collect();
    let mut order: Vec<usize> = Vec::new();
    while !live.is_empty() {
        // ensure a nonzero diagonal among live rows
        let diag_pos = live.iter().position(|&i| !(&mat[(i, i)] % p).is_zero());
        let pivot = match diag_pos {
            Some(pos) => live[pos],
            None => {
                let mut found = None;
                'search: for (ii, &i) in live.iter().enumerate() {
                    for &j in live.iter().skip(ii + 1) {
                        if !(&mat[(i, j)] % p).is_zero() {
                            found = Some((i, j));
                            break 'search;
                        }
                    }
                }
                let Some((i, j)) = found else {
                    return Err(Error::Verify("degenerate torsion form".into()));
                };
                // row/col add makes the diagonal nonzero (p odd)
                for k in 0..m {
                    let x = mat[(j, k)].clone();
                    mat[(i, k)] = (&mat[(i, k)] + x).mod_floor(p);
                }
                for k in 0..m {
                    let x = mat[(k, j)].clone();
                    mat[(k, i)] = (&mat[(k, i)] + x).mod_floor(p);
                }
                for k in 0..m {
                    let x = c[(j, k)].clone();
                    c[(i, k)] = (&c[(i, k)] + x).mod_floor(p);
                }
                i
            }
        };
        live.retain(|&x| x != pivot);
        order.push(pivot);
        let pinv = arith::inv_mod(&mat[(pivot, pivot)], p)?;
        for &r in &live {
            if (&mat[(r, pivot)] % p).is_zero() {
                continue;
            }
            let f = (&mat[(r, pivot)] * &pinv).mod_floor(p);
            for k in 0..m {
                let x = (&f * &mat[(pivot, k)]).mod_floor(p);
                mat[(r, k)] = (&mat[(r, k)] - x).mod_floor(p);
            }
            for k in 0..m {
                let x = (&f * &mat[(k, pivot)]).mod_floor(p);
                mat[(k, r)] = (&mat[(k, r)] - x).mod_floor(p);
            }
            for k in 0..m {
                let x = (&f * &c[(pivot, k)]).mod_floor(p);
                c[(r, k)] = (&c[(r, k)] - x).mod_floor(p);
            }
        }
    }
    let values: Vec<BigInt> = order.iter().map(|&i| mat[(i, i)].mod_floor(p)).collect();
    let combos: Vec<Vec<BigInt>> = order
        .iter()
        .map(|&i| (0..m).map(|k| c[(i, k)].mod_floor(p)).collect())
        .collect();
    Ok((values, combos))
}

fn adjoin_combination(l: &Lattice, disc: &DiscriminantGroup, coeffs: &[BigInt]) -> Lattice {
    let v = disc.combination_in_ambient(l, coeffs);
    let row = RationalMatrix::from_fn(1, l.rank(), |_, j| v[j].clone());
    l.adjoin(&row)
}

/// One pass of the odd-prime overlattice step on a p-saturated lattice:
/// returns a strictly larger lattice at p, or the input with a certificate
/// when it is already p-maximal.
pub fn op_overlattice(
    l: &Lattice,
    p: &BigInt,
    seed: u64,
) -> Result<std::result::Result<Lattice, MaximalityCertificate>> {
    if p.is_even() || !arith::is_prime(p) {
        return Err(Error::BadArgument("op_overlattice needs an odd prime".into()));
    }
    if !l.is_integral() {
        return Err(Error::NotIntegral("op_overlattice".into()));
    }
    let disc = l.discriminant_group(p)?;
    for o in &disc.orders {
        if o != p {
            return Err(Error::Precondition(format!(
                "op_overlattice needs a p-saturated lattice; generator of order {o}"
            )));
        }
    }
    let m = disc.num_generators();
    if m <= 1 {
        return Ok(Err(MaximalityCertificate {
            prime: p.clone(),
            group_size: disc.order(),
            witness: MaximalityWitness::DimensionAtMostOne,
        }));
    }
    let (values, combos) = diagonalize_torsion(&disc, p)?;
    let a = &values[0];
    let b = &values[1];
    let neg_ratio = ((-b) * arith::inv_mod(a, p)?).mod_floor(p);
    let combine = |parts: &[(BigInt, usize)]| -> Vec<BigInt> {
        let mut coeffs = vec![BigInt::zero(); m];
        for (scalar, idx) in parts {
            for k in 0..m {
                coeffs[k] = (&coeffs[k] + scalar * &combos[*idx][k]).mod_floor(p);
            }
        }
        coeffs
    };
    if m == 2 {
        if arith::legendre(&neg_ratio, p)? == -1 {
            return Ok(Err(MaximalityCertificate {
                prime: p.clone(),
                group_size: disc.order(),
                witness: MaximalityWitness::BinaryNonResidue,
            }));
        }
        let x = arith::sqrt_mod(&neg_ratio, p)?;
        let coeffs = combine(&[(x, 0), (BigInt::one(), 1)]);
        return Ok(Ok(adjoin_combination(l, &disc, &coeffs)));
    }
    // m >= 3: always isotropic
    let coeffs = if arith::legendre(&neg_ratio, p)? >= 0 {
        let x = arith::sqrt_mod(&neg_ratio, p)?;
        combine(&[(x, 0), (BigInt::one(), 1)])
    } else {
        let c = &values[2];
        let (x, y) = arith::solve_conic(a, b, c, p, seed)?;
        combine(&[(x, 0), (y, 1), (BigInt::one(), 2)])
    };
    Ok(Ok(adjoin_combination(l, &disc, &coeffs)))
}

/// p-maximal overlattice at an odd prime: saturate, then iterate the
/// overlattice step to a fixpoint.
pub fn op_maximal(l: &Lattice, p: &BigInt, seed: u64) -> Result<(Lattice, MaximalityCertificate)> {
    let _t = std::time::Instant::now();
    let r = op_maximal_inner(l, p, seed);
    stats::add(&stats::OPMAX_NS, _t.elapsed().as_nanos());
    r
}

fn op_maximal_inner(l: &Lattice, p: &BigInt, seed: u64) -> Result<(Lattice, MaximalityCertificate)> {
    if !l.is_integral() {
        return Err(Error::NotIntegral("op_maximal".into()));
    }
    let det = l.det().to_integer();
    // nu <= 1 means the discriminant group at p has F_p-dimension at most
    // one: nothing to saturate and nothing isotropic can exist
    if arith::valuation(&det, p) <= 1 {
        return Ok((
            l.clone(),
            MaximalityCertificate {
                prime: p.clone(),
                group_size: p.pow(arith::valuation(&det, p)),
                witness: MaximalityWitness::DimensionAtMostOne,
            },
        ));
    }
    let mut cur = l.p_saturate(p)?;
    let max_iter = arith::valuation(&det, p) + 2;
    for i in 0..=max_iter {
        match op_overlattice(&cur, p, seed.wrapping_add(u64::from(i)))? {
            Ok(bigger) => {
                debug_assert!(bigger.is_integral());
                debug_assert!(bigger.contains_lattice(&cur));
                cur = bigger.p_saturate(p)?;
            }
            Err(cert) => return Ok((cur, cert)),
        }
    }
    Err(Error::Verify("op_maximal failed to terminate".into()))
}

/// 2-maximal overlattice: generator rescaling, an isotropic-subgroup
/// adjunction, then exhaustive isotropic-vector adjunctions.
pub fn two_maximal(l: &Lattice) -> Result<(Lattice, MaximalityCertificate)> {
    let _t = std::time::Instant::now();
    let r = two_maximal_inner(l);
    stats::add(&stats::TWOMAX_NS, _t.elapsed().as_nanos());
    r
}

fn two_maximal_inner(l: &Lattice) -> Result<(Lattice, MaximalityCertificate)> {
    let two = BigInt::from(2u8);
    if !l.is_integral() {
        return Err(Error::NotIntegral("two_maximal".into()));
    }
    let mut cur = l.clone();
    // stage 1: rescale generators 2^(floor((v+1)/2) + delta) g
    loop {
        let disc = cur.discriminant_group(&two)?;
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        for (i, ord) in disc.orders.iter().enumerate() {
            let m = arith::valuation(ord, &two);
            if m < 2 {
                continue;
            }
            let q = disc.b_value(i, i);
            // delta = parity of q * order, a 2-integral rational
            let qe = &q * BigRational::from(ord.clone());
            let delta = if crate::padic::rat_mod_pk(&qe, &two, 1)?.is_zero() { 0u32 } else { 1u32 };
            let shift = (m + 1) / 2 + delta;
            if shift >= m {
                continue;
            }
            let scale = BigRational::from(BigInt::one() << shift);
            let coords = disc.generators.row(i);
            let vec_ambient: Vec<BigRational> = (0..cur.rank())
                .map(|j| {
                    (0..cur.rank())
                        .map(|k| &coords[k] * &cur.basis[(k, j)])
                        .sum::<BigRational>()
                        * &scale
                })
                .collect();
            rows.push(vec_ambient);
        }
        if rows.is_empty() {
            break;
        }
        let mat = RationalMatrix::from_fn(rows.len(), cur.rank(), |i, j| rows[i][j].clone());
        let next = cur.adjoin(&mat);
        if next == cur {
            break;
        }
        debug_assert!(next.is_integral());
        cur = next;
    }
    // stage 2: adjoin a maximal set of pairwise-orthogonal isotropic
    // generators in one shot (accelerator; the loop below is the authority)
    {
        let disc = cur.discriminant_group(&two)?;
        if disc.order() <= BigInt::from(ISOTROPY_SEARCH_CAP) {
            let coeffs = disc.element_coefficients(ISOTROPY_SEARCH_CAP)?;
            let mut chosen: Vec<Vec<BigInt>> = Vec::new();
            'cand: for c in &coeffs {
                if !is_isotropic_value(&disc.b_of_combination(c), &two) {
                    continue;
                }
                for prev in &chosen {
                    // pairwise integral b and isotropic sum
                    let sum: Vec<BigInt> = c.iter().zip(prev).map(|(x, y)| x + y).collect();
                    if !is_isotropic_value(&disc.b_of_combination(&sum), &two) {
                        continue 'cand;
                    }
                }
                chosen.push(c.clone());
                if chosen.len() >= cur.rank() || chosen.len() >= 3 {
                    break;
                }
            }
            // ambient vectors are taken against the lattice the group was
            // computed from; they stay valid as rows after each adjoin
            let mut next = cur.clone();
            for c in &chosen {
                let v = disc.combination_in_ambient(&cur, c);
                let row = RationalMatrix::from_fn(1, cur.rank(), |_, j| v[j].clone());
                let candidate = next.adjoin(&row);
                if candidate.is_integral() {
                    next = candidate;
                }
            }
            if next.is_integral() {
                cur = next;
            }
        }
    }
    // stage 3: adjoin isotropic vectors until none remain
    loop {
        let disc = cur.discriminant_group(&two)?;
        let size = disc.order();
        if size > BigInt::from(ISOTROPY_SEARCH_CAP) {
            return Err(Error::ResourceLimit(format!(
                "2-adic discriminant group has {size} elements"
            )));
        }
        let found = find_isotropic(&disc, &two)?;
        match found {
            Some(c) => {
                let next = adjoin_combination(&cur, &disc, &c);
                debug_assert!(next.is_integral());
                debug_assert!(next.contains_lattice(&cur));
                cur = next;
            }
            None => {
                return Ok((
                    cur,
                    MaximalityCertificate {
                        prime: two.clone(),
                        group_size: size,
                        witness: MaximalityWitness::NoIsotropicVector { exhaustive: true },
                    },
                ));
            }
        }
    }
}

/// Maximal overlattice at a single prime.
pub fn maximal_at(l: &Lattice, p: &BigInt, seed: u64) -> Result<(Lattice, MaximalityCertificate)> {
    if p == &BigInt::from(2u8) {
        two_maximal(l)
    } else {
        op_maximal(l, p, seed)
    }
}

/// Integral maximal overlattice: 2-maximal when 2 divides the determinant,
/// then p-maximal for every odd prime dividing the current determinant.
pub fn maximal_overlattice(
    l: &Lattice,
    seed: u64,
    det_prime_hints: &[BigInt],
) -> Result<(Lattice, Vec<MaximalityCertificate>)> {
    let two = BigInt::from(2u8);
    if !l.is_integral() {
        return Err(Error::NotIntegral("maximal_overlattice".into()));
    }
    let _t_max = std::time::Instant::now();
    let mut certs = Vec::new();
    let mut cur = l.clone();
    let det = cur.det().to_integer().abs();
    if det.is_even() {
        let (next, cert) = two_maximal(&cur)?;
        cur = next;
        certs.push(cert);
    }
    let det = cur.det().to_integer().abs();
    let fac = arith::factorize_with_hints(&det, det_prime_hints)?;
    for p in fac.primes() {
        if p == &two {
            continue;
        }
        let (next, cert) = op_maximal(&cur, p, seed)?;
        cur = next;
        certs.push(cert);
    }
    stats::add(&stats::MAXOVER_NS, _t_max.elapsed().as_nanos());
    Ok((cur, certs))
}

/// Gram matrix of a canonical representative of a local symbol.
pub fn gram_zp_representative(s: &LocalSymbol) -> Result<IntMatrix> {
    gram_from_symbol(s)
}

/// Hasse invariant at p of the quadratic space of a symmetric rational
/// matrix, computed from an exact diagonalization.
pub fn hasse_invariant(g: &RationalMatrix, p: &BigInt) -> Result<i32> {
    let diag = rational::diagonalize(g)?;
    let mut eps = 1;
    for i in 0..diag.len() {
        for j in (i + 1)..diag.len() {
            let a = clear_square(&diag[i]);
            let b = clear_square(&diag[j]);
            eps *= arith::hilbert_symbol(&a, &b, p)?;
        }
    }
    Ok(eps)
}

/// Integer of the same square class as a nonzero rational.
fn clear_square(x: &BigRational) -> BigInt {
    x.numer() * x.denom()
}

/// Local modification: a lattice agreeing with `m` away from p and having
/// Gram matrix `g` (up to Z_p-isometry) at p.
pub fn local_modification(
    m: &Lattice,
    g: &IntMatrix,
    p: &BigInt,
    seed: u64,
    prime_hints: &[BigInt],
) -> Result<Lattice> {
    let gram_m = m.gram();
    if !gram_m.is_integral() {
        return Err(Error::NotIntegral("local_modification target".into()));
    }
    if g.rows != m.rank() {
        return Err(Error::Shape("local modification rank mismatch".into()));
    }
    let g_rat = RationalMatrix::from_int_matrix(g);
    // precondition: rational isometry at p (same det class and Hasse)
    {
        let det_m = gram_m.det()?;
        let det_g = g_rat.det()?;
        let ratio = det_g / det_m;
        let v = crate::padic::rat_valuation(&ratio, p);
        let unit_num = ratio.numer() / p.pow(arith::valuation(ratio.numer(), p));
        let unit_den = ratio.denom() / p.pow(arith::valuation(ratio.denom(), p));
        let square_class_ok = if p == &BigInt::from(2u8) {
            let u8m = (unit_num * arith::inv_mod(&unit_den, &BigInt::from(8u8))?)
                .mod_floor(&BigInt::from(8u8));
            v % 2 == 0 && u8m == BigInt::one()
        } else {
            v % 2 == 0 && arith::legendre(&(unit_num * unit_den), p)? == 1
        };
        if !square_class_ok || hasse_invariant(&gram_m, p)? != hasse_invariant(&g_rat, p)? {
            return Err(Error::Precondition(format!(
                "local_modification: target Gram is not Q_{p}-isometric to the lattice"
            )));
        }
    }
    // precondition: m is p-maximal
    {
        let _t = std::time::Instant::now();
        let (mx, _) = maximal_at(m, p, seed)?;
        if !m.contains_lattice(&mx) {
            return Err(Error::Precondition(format!(
                "local_modification: lattice is not {p}-maximal"
            )));
        }
        stats::add(&stats::PRECOND_NS, _t.elapsed().as_nanos());
    }
    let d_power = {
        let ginv = g_rat.inverse()?;
        let den = ginv.denominator_lcm();
        p.pow(arith::valuation(&den, p))
    };
    // the target side depends only on (G, p) and recurs across genera
    let (l_max, t_l, n_l) = {
        type Key = (String, String);
        type Val = (RationalMatrix, RationalMatrix, IntMatrix);
        static CACHE: std::sync::OnceLock<std::sync::Mutex<std::collections::HashMap<Key, Val>>> =
            std::sync::OnceLock::new();
        let cache = CACHE.get_or_init(|| std::sync::Mutex::new(std::collections::HashMap::new()));
        let key = (format!("{g_rat}"), p.to_string());
        let hit = cache.lock().unwrap().get(&key).cloned();
        match hit {
            Some((basis, t, nf)) => {
                (Lattice::new(g_rat.clone(), basis)?, t, nf)
            }
            None => {
                let l = Lattice::from_gram(g_rat.clone())?;
                let (l_max, _) = maximal_at(&l, p, seed)?;
                let g_max = l_max.gram();
                let (t_l, n_l) = normal_form(&g_max, p)?;
                let mut c = cache.lock().unwrap();
                if c.len() < 4096 {
                    c.insert(key, (l_max.basis.clone(), t_l.clone(), n_l.clone()));
                }
                (l_max, t_l, n_l)
            }
        }
    };
    let (t_m, n_m) = normal_form(&gram_m, p)?;
    if n_l != n_m {
        return Err(Error::Precondition(
            "local_modification: maximal lattices have different normal forms".into(),
        ));
    }
    // the transforms only matter modulo a finite p-power: anything beyond
    // nu(G) + nu(M) + margin is absorbed by the d*M summand below, so
    // truncating keeps the glue arithmetic small
    let trunc_k = {
        let nu_g = arith::valuation(&g_rat.det()?.to_integer(), p);
        let det_m_int = gram_m.det()?.to_integer();
        let nu_m = arith::valuation(&det_m_int, p);
        nu_g + nu_m + 12
    };
    let t_l = truncate_mod_pk(&t_l, p, trunc_k)?;
    let t_m = truncate_mod_pk(&t_m, p, trunc_k)?;
    let _t_glue = std::time::Instant::now();
    let u_l = t_l.mul(&l_max.basis);
    let b = u_l.inverse()?;
    let b_prime = b.mul(&t_m).mul(&m.basis);
    let n_lat = Lattice::new(m.ambient_gram.clone(), b_prime)?;
    let inter = n_lat.intersect(m)?;
    let dm = m.rescale_basis(&BigRational::from(d_power.clone()))?;
    let result = inter.sum(&dm)?;
    stats::add(&stats::GLUE_NS, _t_glue.elapsed().as_nanos());
    // verification: symbol at p matches g, symbols elsewhere match m
    let _t_ver = std::time::Instant::now();
    verify_modification(&result, m, &g_rat, p, prime_hints)?;
    stats::add(&stats::VERIFY_NS, _t_ver.elapsed().as_nanos());
    Ok(result)
}

fn verify_modification(
    result: &Lattice,
    m: &Lattice,
    g: &RationalMatrix,
    p: &BigInt,
    prime_hints: &[BigInt],
) -> Result<()> {
    let two = BigInt::from(2u8);
    let canon = |s: &LocalSymbol| -> Result<LocalSymbol> {
        if s.prime == two {
            canonicalize_2adic(s)
        } else {
            Ok(s.clone())
        }
    };
    let got_p = canon(&local_symbol(&result.gram(), p)?)?;
    let want_p = canon(&local_symbol(g, p)?)?;
    if got_p != want_p {
        return Err(Error::Verify(format!(
            "local modification produced the wrong {p}-adic symbol"
        )));
    }
    // collect primes dividing both determinants
    let det_m = m.det().to_integer().abs();
    let det_g = g.det()?.to_integer().abs();
    let fac = arith::factorize_with_hints(&(det_m * det_g * BigInt::from(2u8)), prime_hints)?;
    for q in fac.primes() {
        if q == p {
            continue;
        }
        let got = canon(&local_symbol(&result.gram(), q)?)?;
        let want = canon(&local_symbol(&m.gram(), q)?)?;
        if got != want {
            return Err(Error::Verify(format!(
                "local modification changed the symbol at q = {q}"
            )));
        }
    }
    Ok(())
}

/// Construct a lattice in the genus, verifying the symbol round-trip.
pub fn representative(g: &GenusSymbol, seed: u64) -> Result<Lattice> {
    representative_with_options(g, seed, true)
}

/// Construct a lattice in the genus; `verify` re-derives the symbol of the
/// result and fails loudly on mismatch.
pub fn representative_with_options(g: &GenusSymbol, seed: u64, verify: bool) -> Result<Lattice> {
    g.validate()?;
    let two = BigInt::from(2u8);
    let _t_rr = std::time::Instant::now();
    let (rat, aux_primes) = rational_representative(g)?;
    stats::add(&stats::RATREP_NS, _t_rr.elapsed().as_nanos());
    let mut hints: Vec<BigInt> = g.locals.keys().cloned().collect();
    hints.extend(aux_primes);
    hints.push(two.clone());
    hints.sort();
    hints.dedup();

    // double the basis: the Gram picks up a factor of 4 and becomes even
    let doubled = rat.rescale_basis(&BigRational::from(BigInt::from(2u8)))?;
    let (mut cur, _) = maximal_overlattice(&doubled, seed, &hints)?;
    { let _t = std::time::Instant::now(); cur = cur.reduce_basis_size(); stats::add(&stats::REDUCE_NS, _t.elapsed().as_nanos()); }

    let s2 = &g.locals[&two];
    let g2 = gram_zp_representative(s2)?;
    if g.is_even() {
        cur = local_modification(&cur, &g2, &two, seed, &hints)?;
    } else {
        let g2_scaled = IntMatrix::from_fn(g2.rows, g2.cols, |i, j| &g2[(i, j)] * BigInt::from(4u8));
        cur = local_modification(&cur, &g2_scaled, &two, seed, &hints)?;
        cur = cur.rescale_basis(&BigRational::new(BigInt::one(), BigInt::from(2u8)))?;
    }
    { let _t = std::time::Instant::now(); cur = cur.reduce_basis_size(); stats::add(&stats::REDUCE_NS, _t.elapsed().as_nanos()); }
    for (p, sp) in &g.locals {
        if p == &two {
            continue;
        }
        let gp = gram_zp_representative(sp)?;
        cur = local_modification(&cur, &gp, p, seed, &hints)?;
        { let _t = std::time::Instant::now(); cur = cur.reduce_basis_size(); stats::add(&stats::REDUCE_NS, _t.elapsed().as_nanos()); }
    }
    if verify {
        let got = symbol_of_with_hints(&cur, &hints)?;
        if &got != g {
            return Err(Error::Verify(format!(
                "representative round-trip failed: built {} for {}",
                got.format(),
                g.format()
            )));
        }
        let det = cur.det().to_integer();
        if det != g.det() {
            return Err(Error::Verify("representative determinant mismatch".into()));
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests;
