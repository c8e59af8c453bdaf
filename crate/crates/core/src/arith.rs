//! Exact integer and modular arithmetic primitives.
//!
//! - [`factorize`]: trial division, exact for desk-scale inputs
//! - [`legendre`]: Legendre symbol by Euler's criterion
//! - [`sqrt_mod`]: deterministic Tonelli–Shanks using the canonical non-residue
//! - [`nonresidue`]: smallest positive quadratic non-residue mod p
//! - [`solve_conic`]: a point on a*x^2 + b*y^2 + c = 0 over F_p
//! - [`crt`]: Chinese remainder combination

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Prime factorization as sorted (prime, exponent) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub pairs: Vec<(BigInt, u32)>,
}

impl Factorization {
    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.pairs.len()
    }

    /// Total number of prime factors counted with multiplicity.
    pub fn big_omega(&self) -> u64 {
        self.pairs.iter().map(|(_, e)| u64::from(*e)).sum()
    }

    /// Valuation of the factored number at p.
    pub fn valuation(&self, p: &BigInt) -> u32 {
        self.pairs
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.pairs.iter().map(|(p, _)| p)
    }

    pub fn product(&self) -> BigInt {
        let mut n = BigInt::one();
        for (p, e) in &self.pairs {
            n *= p.pow(*e);
        }
        n
    }
}

/// Factor a positive integer by trial division.
pub fn factorize(n: &BigInt) -> Result<Factorization> {
    factorize_with_hints(n, &[])
}

/// Factor a positive integer, dividing out the hinted primes first.
///
/// The remaining cofactor is factored by trial division, so hints let the
/// caller factor numbers whose large prime factors are already known (for
/// example determinants assembled from a known prime support).
pub fn factorize_with_hints(n: &BigInt, hints: &[BigInt]) -> Result<Factorization> {
    if n.sign() != num_bigint::Sign::Plus {
        return Err(Error::BadArgument(format!("factorize: need n >= 1, got {n}")));
    }
    let mut rest = n.clone();
    let mut pairs: Vec<(BigInt, u32)> = Vec::new();
    let push = |p: BigInt, e: u32, pairs: &mut Vec<(BigInt, u32)>| {
        if e > 0 {
            pairs.push((p, e));
        }
    };
    for p in hints {
        if p <= &BigInt::one() {
            continue;
        }
        let mut e = 0u32;
        while (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        push(p.clone(), e, &mut pairs);
    }
    let mut d = BigInt::from(2);
    while &d * &d <= rest {
        let mut e = 0u32;
        while (&rest % &d).is_zero() {
            rest /= &d;
            e += 1;
        }
        push(d.clone(), e, &mut pairs);
        d += if d == BigInt::from(2) { 1 } else { 2 };
    }
    if rest > BigInt::one() {
        push(rest, 1, &mut pairs);
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Factorization { pairs })
}

/// Deterministic primality test by trial division.
pub fn is_prime(n: &BigInt) -> bool {
    if n < &BigInt::from(2) {
        return false;
    }
    if n < &BigInt::from(4) {
        return true;
    }
    if n.is_even() {
        return false;
    }
    let mut d = BigInt::from(3);
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            return false;
        }
        d += 2;
    }
    true
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let mut v = 0;
    let mut m = n.abs();
    while (&m % p).is_zero() {
        m /= p;
        v += 1;
    }
    v
}

/// b^e mod m with m > 0.
pub fn pow_mod(b: &BigInt, e: &BigInt, m: &BigInt) -> BigInt {
    b.modpow(e, m)
}

/// Multiplicative inverse of a mod m, when gcd(a, m) = 1.
pub fn inv_mod(a: &BigInt, m: &BigInt) -> Result<BigInt> {
    let a = a.mod_floor(m);
    let g = a.extended_gcd(m);
    if !g.gcd.is_one() {
        return Err(Error::BadArgument(format!("{a} not invertible mod {m}")));
    }
    Ok(g.x.mod_floor(m))
}

fn check_odd_prime(p: &BigInt) -> Result<()> {
    if p.is_even() || !is_prime(p) {
        return Err(Error::BadArgument(format!("{p} is not an odd prime")));
    }
    Ok(())
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: &BigInt, p: &BigInt) -> Result<i32> {
    check_odd_prime(p)?;
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Ok(0);
    }
    let e = (p - BigInt::one()) / BigInt::from(2);
    let s = pow_mod(&a, &e, p);
    Ok(if s.is_one() { 1 } else { -1 })
}

/// Legendre symbol of a rational number with p-coprime denominator.
pub fn legendre_rational(num: &BigInt, den: &BigInt, p: &BigInt) -> Result<i32> {
    Ok(legendre(num, p)? * legendre(den, p)?)
}

/// Smallest positive quadratic non-residue mod p. This is the canonical
/// non-residue used everywhere a normal form needs one.
pub fn nonresidue(p: &BigInt) -> Result<BigInt> {
    check_odd_prime(p)?;
    let mut u = BigInt::from(2);
    loop {
        if legendre(&u, p)? == -1 {
            return Ok(u);
        }
        u += 1;
    }
}

/// Square root of a mod p (odd prime) by Tonelli–Shanks, made deterministic
/// by using the canonical non-residue. Returns the root in [0, p).
pub fn sqrt_mod(a: &BigInt, p: &BigInt) -> Result<BigInt> {
    check_odd_prime(p)?;
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Ok(BigInt::zero());
    }
    if legendre(&a, p)? != 1 {
        return Err(Error::NoSquareRoot);
    }
    // p ≡ 3 mod 4: direct exponentiation
    if (p % BigInt::from(4)) == BigInt::from(3) {
        let e = (p + BigInt::one()) / BigInt::from(4);
        return Ok(pow_mod(&a, &e, p));
    }
    // write p - 1 = q * 2^s with q odd
    let mut q = p - BigInt::one();
    let mut s = 0u32;
    while q.is_even() {
        q /= 2;
        s += 1;
    }
    let z = nonresidue(p)?;
    let mut m = s;
    let mut c = pow_mod(&z, &q, p);
    let mut t = pow_mod(&a, &q, p);
    let mut r = pow_mod(&a, &((&q + BigInt::one()) / BigInt::from(2)), p);
    while !t.is_one() {
        let mut i = 0u32;
        let mut tt = t.clone();
        while !tt.is_one() {
            tt = (&tt * &tt) % p;
            i += 1;
            if i == m {
                return Err(Error::NoSquareRoot);
            }
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = (&b * &b) % p;
        }
        m = i;
        c = (&b * &b) % p;
        t = (&t * &c) % p;
        r = (&r * &b) % p;
    }
    Ok(r)
}

/// Square root of a unit mod p^k (odd prime), lifted from Tonelli–Shanks by
/// Hensel's lemma. Requires legendre(a, p) = 1.
pub fn sqrt_mod_pk(a: &BigInt, p: &BigInt, k: u32) -> Result<BigInt> {
    let pk = p.pow(k);
    let a = a.mod_floor(&pk);
    if (&a % p).is_zero() {
        return Err(Error::BadArgument("sqrt_mod_pk needs a unit".into()));
    }
    let mut x = sqrt_mod(&(&a % p), p)?;
    let mut prec = 1u32;
    let mut pj = p.clone();
    while prec < k {
        let next = (prec * 2).min(k);
        let pn = p.pow(next);
        // x <- x - (x^2 - a) / (2x) mod p^next
        let num = (&x * &x - &a).mod_floor(&pn);
        let den = inv_mod(&(BigInt::from(2) * &x), &pn)?;
        x = (&x - num * den).mod_floor(&pn);
        prec = next;
        pj = pn;
    }
    let _ = pj;
    Ok(x.mod_floor(&pk))
}

/// Square root of a 2-adic unit congruent to 1 mod 8, computed mod 2^k.
pub fn sqrt_mod_2k(a: &BigInt, k: u32) -> Result<BigInt> {
    let m = BigInt::one() << k;
    let a = a.mod_floor(&m);
    if (&a % BigInt::from(8)) != BigInt::one() {
        return Err(Error::NoSquareRoot);
    }
    if k <= 1 {
        return Ok(BigInt::one());
    }
    // lift x with x^2 ≡ a mod 2^j to mod 2^{j+1}; x is odd throughout
    let mut x = BigInt::one();
    for j in 3..=k {
        let mj = BigInt::one() << j;
        let r = (&x * &x - &a).mod_floor(&mj);
        if !r.is_zero() {
            // flipping the bit 2^{j-2} of x changes x^2 by 2^{j-1}x + 2^{2j-4}
            x = (&x + (BigInt::one() << (j - 2))).mod_floor(&mj);
            debug_assert!((&x * &x - &a).mod_floor(&mj).is_zero());
        }
    }
    Ok(x.mod_floor(&m))
}

/// A point (x, y) with a*x^2 + b*y^2 + c ≡ 0 mod p, for p odd and p ∤ abc.
///
/// Samples x from a seeded generator and solves for y; a solution always
/// exists because a nondegenerate ternary conic over F_p has points.
pub fn solve_conic(
    a: &BigInt,
    b: &BigInt,
    c: &BigInt,
    p: &BigInt,
    seed: u64,
) -> Result<(BigInt, BigInt)> {
    check_odd_prime(p)?;
    for v in [a, b, c] {
        if (v % p).is_zero() {
            return Err(Error::BadArgument("solve_conic: coefficient divisible by p".into()));
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let binv = inv_mod(b, p)?;
    // deterministic sweep fallback after enough random attempts
    let try_x = |x: BigInt| -> Result<Option<(BigInt, BigInt)>> {
        let rhs = ((-c - a * &x * &x) * &binv).mod_floor(p);
        if legendre(&rhs, p)? >= 0 {
            let y = sqrt_mod(&rhs, p)?;
            return Ok(Some((x, y)));
        }
        Ok(None)
    };
    for _ in 0..64 {
        let x = BigInt::from(rng.next_u64()).mod_floor(p);
        if let Some(sol) = try_x(x)? {
            return Ok(sol);
        }
    }
    let mut x = BigInt::zero();
    while &x < p {
        if let Some(sol) = try_x(x.clone())? {
            return Ok(sol);
        }
        x += 1;
    }
    unreachable!("ternary conic over F_p always has a point")
}

/// Chinese remainder combination for pairwise coprime moduli.
pub fn crt(residues: &[BigInt], moduli: &[BigInt]) -> Result<BigInt> {
    if residues.len() != moduli.len() {
        return Err(Error::BadArgument("crt: length mismatch".into()));
    }
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (r, mi) in residues.iter().zip(moduli) {
        if mi <= &BigInt::zero() {
            return Err(Error::BadArgument("crt: moduli must be positive".into()));
        }
        let g = m.gcd(mi);
        if !g.is_one() && !m.is_one() {
            return Err(Error::NotCoprime);
        }
        // x' ≡ x mod m, x' ≡ r mod mi
        let inv = inv_mod(&m, mi).map_err(|_| Error::NotCoprime)?;
        let t = ((r - &x) * inv).mod_floor(mi);
        x += &m * t;
        m *= mi;
        x = x.mod_floor(&m);
    }
    Ok(x)
}

/// Hilbert symbol (a, b)_p over Q_p, with p = 2 handled by the mod-8 formula
/// and the place at infinity available via [`hilbert_infinity`].
pub fn hilbert_symbol(a: &BigInt, b: &BigInt, p: &BigInt) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::BadArgument("hilbert symbol of zero".into()));
    }
    let two = BigInt::from(2);
    if p == &two {
        let alpha = valuation(a, &two);
        let beta = valuation(b, &two);
        let u = a / two.pow(alpha);
        let v = b / two.pow(beta);
        let eps = |x: &BigInt| -> i64 {
            // (x - 1)/2 mod 2 for odd x
            (((x.mod_floor(&BigInt::from(4))).to_string() == "3") as i64) & 1
        };
        let omega = |x: &BigInt| -> i64 {
            // (x^2 - 1)/8 mod 2 for odd x
            let r = x.mod_floor(&BigInt::from(8));
            i64::from(r == BigInt::from(3) || r == BigInt::from(5))
        };
        let e = eps(&u) * eps(&v) + i64::from(alpha) * omega(&v) + i64::from(beta) * omega(&u);
        return Ok(if e % 2 == 0 { 1 } else { -1 });
    }
    check_odd_prime(p)?;
    let alpha = valuation(a, p);
    let beta = valuation(b, p);
    let u = a / p.pow(alpha);
    let v = b / p.pow(beta);
    let mut s = 1i32;
    if alpha % 2 == 1 && beta % 2 == 1 {
        // (-1)^{(p-1)/2}
        if (p % BigInt::from(4)) == BigInt::from(3) {
            s = -s;
        }
    }
    if beta % 2 == 1 {
        s *= legendre(&u, p)?;
    }
    if alpha % 2 == 1 {
        s *= legendre(&v, p)?;
    }
    Ok(s)
}

/// Hilbert symbol at the real place.
pub fn hilbert_infinity(a: &BigInt, b: &BigInt) -> i32 {
    if a.is_negative() && b.is_negative() {
        -1
    } else {
        1
    }
}
