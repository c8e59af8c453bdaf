//! Counting machinery for local genus symbols: exact generating-function
//! coefficients, partition numbers, the dyadic recurrence and bounds, the
//! odd-prime asymptotic, and the product function f(D).
//!
//! - [`c_coeffs`]: coefficients of prod (1+x^i)/(1-x^i), exact integers
//! - [`partition_count`]: p(k) by the pentagonal-number recurrence
//! - [`s0`]: the dyadic bound recurrence S0(k) = 3 S0(k-1) + 2 S0(k-2)
//! - [`odd_asymptotic`], [`dyadic_bounds`]: interval evaluations
//! - [`f_of_d`]: prod over p | D of exp(pi sqrt(nu_p)) / nu_p
//! - [`exact_local_count`]: ground truth by direct symbol enumeration

pub mod interval;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer as _;
use num_traits::{One, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::genus::{odd_candidates, two_adic_candidates, Parity};
use interval::{exp_interval, sqrt, Interval, DIGITS};
use std::sync::OnceLock;

/// Shared high-precision bracket for pi.
fn pi_cached() -> &'static Interval {
    static PI: OnceLock<Interval> = OnceLock::new();
    PI.get_or_init(|| interval::pi(DIGITS))
}

/// Coefficients c_0..c_K of prod_{i>=1} (1+x^i)/(1-x^i) as exact integers.
pub fn c_coeffs(k_max: usize) -> Vec<BigInt> {
    // multiply (1 + x^i) factors, then divide by (1 - x^i) via the
    // equivalent multiplication by 1 + x^i + x^{2i} + ...
    let mut c = vec![BigInt::zero(); k_max + 1];
    c[0] = BigInt::one();
    for i in 1..=k_max {
        // c *= (1 + x^i)
        for k in (i..=k_max).rev() {
            let add = c[k - i].clone();
            c[k] += add;
        }
        // c *= 1/(1 - x^i) = sum_j x^{ij}
        for k in i..=k_max {
            let add = c[k - i].clone();
            c[k] += add;
        }
    }
    c
}

/// Partition numbers p(0..=k_max) by Euler's pentagonal recurrence.
pub fn partition_table(k_max: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); k_max + 1];
    p[0] = BigInt::one();
    for n in 1..=k_max {
        let mut acc = BigInt::zero();
        let mut k = 1i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > n {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            if sign == 1 {
                acc += &p[n - g1];
            } else {
                acc -= &p[n - g1];
            }
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= n {
                if sign == 1 {
                    acc += &p[n - g2];
                } else {
                    acc -= &p[n - g2];
                }
            }
            k += 1;
        }
        p[n] = acc;
    }
    p
}

/// p(k).
pub fn partition_count(k: usize) -> BigInt {
    partition_table(k).pop().unwrap()
}

/// The dyadic bound sequence: S0(0) = 0, S0(1) = 6,
/// S0(k) = 3 S0(k-1) + 2 S0(k-2).
pub fn s0(k: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::from(6u8));
    if k == 0 {
        return a;
    }
    for _ in 1..k {
        let next = BigInt::from(3u8) * &b + BigInt::from(2u8) * &a;
        a = b;
        b = next;
    }
    b
}

/// S0(k) from the closed form (6/sqrt(17)) (lambda1^k - lambda2^k),
/// evaluated exactly in Z[sqrt(17)] / 2^k. Used as an independent check.
pub fn s0_closed_form(k: u32) -> BigInt {
    // lambda1^k = (a_k + b_k sqrt17) / 2^k with integer components
    let mut a = BigInt::one();
    let mut b = BigInt::zero();
    let seventeen = BigInt::from(17u8);
    for _ in 0..k {
        // multiply by (3 + sqrt17)/2: (a + b s)(3 + s) = (3a + 17b) + (a + 3b) s
        let na = BigInt::from(3u8) * &a + &seventeen * &b;
        let nb = &a + BigInt::from(3u8) * &b;
        a = na;
        b = nb;
        // the /2 accumulates in the exponent; components stay integral in pairs
    }
    // lambda1^k - lambda2^k = 2 b_k sqrt17 / 2^k, so
    // (6/sqrt17)(lambda1^k - lambda2^k) = 12 b_k / 2^k
    let num = BigInt::from(12u8) * b;
    let den = BigInt::one() << k;
    let q = BigRational::new(num, den);
    assert!(q.is_integer(), "closed form must be integral");
    q.to_integer()
}

/// The odd-prime asymptotic exp(pi sqrt(k)) / (8k) as an interval.
pub fn odd_asymptotic(k: u32) -> Result<Interval> {
    if k == 0 {
        return Err(Error::BadArgument("odd_asymptotic needs k >= 1".into()));
    }
    let pi_i = pi_cached().clone();
    let sk = sqrt(&BigRational::from(BigInt::from(k)), DIGITS);
    let arg = pi_i.mul_pos(&sk);
    let e = exp_interval(&arg, DIGITS);
    let den = Interval::point(BigRational::from(BigInt::from(8 * i64::from(k))));
    Ok(e.div_pos(&den))
}

/// The dyadic lower and upper bounds:
/// lower = exp(pi sqrt(2k/3)) / (4 sqrt(3) k),
/// upper = (3 / (2 sqrt(51) k)) * ((3 + sqrt(17))/2)^k * exp(pi sqrt(2k/3)).
pub fn dyadic_bounds(k: u32) -> Result<(Interval, Interval)> {
    if k == 0 {
        return Err(Error::BadArgument("dyadic_bounds needs k >= 1".into()));
    }
    let pi_i = pi_cached().clone();
    let arg = pi_i.mul_pos(&sqrt(
        &BigRational::new(BigInt::from(2 * i64::from(k)), BigInt::from(3u8)),
        DIGITS,
    ));
    let e = exp_interval(&arg, DIGITS);
    let k_rat = BigRational::from(BigInt::from(i64::from(k)));
    let sqrt3 = sqrt(&BigRational::from(BigInt::from(3u8)), DIGITS);
    let lower_den = sqrt3.scale(&(BigRational::from(BigInt::from(4u8)) * &k_rat));
    let lower = e.div_pos(&lower_den);

    let sqrt17 = sqrt(&BigRational::from(BigInt::from(17u8)), DIGITS);
    let lambda1 = sqrt17
        .add(&Interval::from_int(3))
        .scale(&BigRational::new(BigInt::one(), BigInt::from(2u8)));
    let mut lam_pow = Interval::from_int(1);
    for _ in 0..k {
        lam_pow = lam_pow.mul_pos(&lambda1);
    }
    let sqrt51 = sqrt(&BigRational::from(BigInt::from(51u8)), DIGITS);
    let upper_den = sqrt51.scale(&(BigRational::from(BigInt::from(2u8)) * &k_rat));
    let upper = Interval::from_int(3)
        .div_pos(&upper_den)
        .mul_pos(&lam_pow)
        .mul_pos(&e);
    Ok((lower, upper))
}

/// f(D) = prod over p | D of exp(pi sqrt(nu_p(D))) / nu_p(D), D >= 2.
pub fn f_of_d(d: &BigInt) -> Result<Interval> {
    if d < &BigInt::from(2u8) {
        return Err(Error::BadArgument("f(D) needs D >= 2".into()));
    }
    let fac = arith::factorize(d)?;
    let pi_i = pi_cached().clone();
    let mut acc = Interval::from_int(1);
    for (_, e) in &fac.pairs {
        let nu = BigRational::from(BigInt::from(*e));
        let arg = pi_i.mul_pos(&sqrt(&nu, DIGITS));
        let term = exp_interval(&arg, DIGITS).div_pos(&Interval::point(nu));
        acc = acc.mul_pos(&term);
    }
    Ok(acc)
}

/// Ground truth: the number of valid local symbols at p of total rank n and
/// determinant valuation k, counted by the genus module's generators.
/// At p = 2 the count is of canonical (genus-distinct) symbols with the
/// determinant's unit class fixed to 1 mod 8; at odd p the unit class is a
/// quadratic residue (the count does not depend on the class).
pub fn exact_local_count(n: u32, p: &BigInt, k: u32) -> Result<BigInt> {
    if p == &BigInt::from(2u8) {
        let symbols = two_adic_candidates(n, k, 1, Parity::Any)?;
        Ok(BigInt::from(symbols.len()))
    } else {
        if p.is_even() || !arith::is_prime(p) {
            return Err(Error::BadArgument("exact_local_count needs 2 or an odd prime".into()));
        }
        let symbols = odd_candidates(n, k, 1, p);
        Ok(BigInt::from(symbols.len()))
    }
}

/// One row of the counting report.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub n: u32,
    pub p: BigInt,
    pub k: u32,
    /// valuation-k part of a determinant, for context in the output
    pub d: BigInt,
    pub exact: BigInt,
    pub series: BigInt,
    pub asymptotic: Option<Interval>,
    pub lower: Option<Interval>,
    pub upper: Option<Interval>,
    pub f_d: Option<Interval>,
}

impl CountReport {
    pub fn build(n: u32, p: &BigInt, k: u32) -> Result<CountReport> {
        let exact = exact_local_count(n, p, k)?;
        let series = c_coeffs(k as usize).pop().unwrap();
        let d = p.pow(k);
        let two = BigInt::from(2u8);
        let (asymptotic, lower, upper) = if k >= 1 {
            if p == &two {
                let (lo, hi) = dyadic_bounds(k)?;
                (None, Some(lo), Some(hi))
            } else {
                (Some(odd_asymptotic(k)?), None, None)
            }
        } else {
            (None, None, None)
        };
        let f_d = if d >= BigInt::from(2u8) { Some(f_of_d(&d)?) } else { None };
        Ok(CountReport { n, p: p.clone(), k, d, exact, series, asymptotic, lower, upper, f_d })
    }

    pub fn csv_header() -> &'static str {
        "n,D,p,k,exact,series,asym,lower,upper,fD"
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: &Option<Interval>| x.as_ref().map(|i| i.to_decimal(50)).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.d,
            self.p,
            self.k,
            self.exact,
            self.series,
            opt(&self.asymptotic),
            opt(&self.lower),
            opt(&self.upper),
            opt(&self.f_d),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let opt = |x: &Option<Interval>| match x {
            Some(i) => serde_json::Value::String(i.to_decimal(50)),
            None => serde_json::Value::Null,
        };
        serde_json::json!({
            "n": self.n,
            "D": self.d.to_string(),
            "p": self.p.to_string(),
            "k": self.k,
            "exact": self.exact.to_string(),
            "series": self.series.to_string(),
            "asym": opt(&self.asymptotic),
            "lower": opt(&self.lower),
            "upper": opt(&self.upper),
            "fD": opt(&self.f_d),
        })
    }
}
