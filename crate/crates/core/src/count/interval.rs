//! Exact rational interval arithmetic with directed bounds, used for every
//! real-number comparison in the counting module. Bounds are exact
//! rationals, so comparisons can never be decided by rounding error.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Default denominator scale: bounds are kept within 10^-60 of each other.
pub const DIGITS: u32 = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

fn pow10(d: u32) -> BigInt {
    BigInt::from(10u8).pow(d)
}

impl Interval {
    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn from_int(n: i64) -> Self {
        Self::point(BigRational::from(BigInt::from(n)))
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Interval { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Interval { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }

    /// Product of intervals with nonnegative lower bounds.
    pub fn mul_pos(&self, rhs: &Self) -> Self {
        assert!(!self.lo.is_negative() && !rhs.lo.is_negative(), "mul_pos needs nonnegative bounds");
        Interval { lo: &self.lo * &rhs.lo, hi: &self.hi * &rhs.hi }
    }

    /// Quotient of positive intervals.
    pub fn div_pos(&self, rhs: &Self) -> Self {
        assert!(rhs.lo.is_positive(), "div_pos needs a positive divisor");
        Interval { lo: &self.lo / &rhs.hi, hi: &self.hi / &rhs.lo }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        assert!(!c.is_negative());
        Interval { lo: &self.lo * c, hi: &self.hi * c }
    }

    /// Strictly below every point of the other interval.
    pub fn lt(&self, rhs: &Self) -> bool {
        self.hi < rhs.lo
    }

    /// At most: certified self ≤ rhs pointwise.
    pub fn le(&self, rhs: &Self) -> bool {
        self.hi <= rhs.lo
    }

    /// Decimal rendering of the midpoint with `sig` significant digits.
    pub fn to_decimal(&self, sig: usize) -> String {
        let mid = (&self.lo + &self.hi) / BigRational::from(BigInt::from(2u8));
        render_decimal(&mid, sig)
    }
}

fn render_decimal(x: &BigRational, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    // find exponent e with 10^e <= ax < 10^(e+1)
    let mut e: i64 = 0;
    let ten = BigRational::from(BigInt::from(10u8));
    let mut t = ax.clone();
    while t >= ten {
        t /= &ten;
        e += 1;
    }
    while t < BigRational::one() {
        t *= &ten;
        e -= 1;
    }
    // digits = round(ax * 10^(sig-1-e))
    let shift = sig as i64 - 1 - e;
    let scaled = if shift >= 0 {
        ax * BigRational::from(pow10(shift as u32))
    } else {
        ax / BigRational::from(pow10((-shift) as u32))
    };
    let digits = scaled.round().to_integer().to_string();
    let mut mantissa: Vec<char> = digits.chars().collect();
    // rounding may add a digit
    let e = if mantissa.len() > sig { e + 1 } else { e };
    mantissa.truncate(sig);
    while mantissa.len() < sig {
        mantissa.push('0');
    }
    let m: String = mantissa.iter().collect();
    let body = if (0..16).contains(&e) {
        let ei = e as usize;
        if ei + 1 >= m.len() {
            format!("{}{}", &m, "0".repeat(ei + 1 - m.len()))
        } else {
            format!("{}.{}", &m[..=ei], &m[ei + 1..])
        }
    } else if (-4..0).contains(&e) {
        format!("0.{}{}", "0".repeat((-e - 1) as usize), m)
    } else {
        format!("{}.{}e{}", &m[..1], &m[1..], e)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Interval containing pi, via Machin's formula with alternating tails.
pub fn pi(digits: u32) -> Interval {
    // pi = 16 atan(1/5) - 4 atan(1/239)
    let a5 = atan_inv(5, digits + 5);
    let a239 = atan_inv(239, digits + 5);
    let sixteen = BigRational::from(BigInt::from(16u8));
    let four = BigRational::from(BigInt::from(4u8));
    Interval {
        lo: &a5.lo * &sixteen - &a239.hi * &four,
        hi: &a5.hi * &sixteen - &a239.lo * &four,
    }
}

/// atan(1/x) for integer x >= 2, bracketed by alternating partial sums.
fn atan_inv(x: i64, digits: u32) -> Interval {
    let xb = BigRational::from(BigInt::from(x));
    let x2 = &xb * &xb;
    let tol = BigRational::new(BigInt::one(), pow10(digits));
    let mut term = BigRational::one() / &xb;
    let mut k = 0u32;
    let mut sum = BigRational::zero();
    loop {
        // term = 1 / ((2k+1) x^(2k+1)) with alternating signs
        let signed = &term / BigRational::from(BigInt::from(2 * i64::from(k) + 1));
        if k % 2 == 0 {
            sum += &signed;
        } else {
            sum -= &signed;
        }
        term /= &x2;
        k += 1;
        let next = &term / BigRational::from(BigInt::from(2 * i64::from(k) + 1));
        if next < tol {
            // alternating series: truncation error bounded by the next term
            return if k % 2 == 0 {
                Interval { lo: sum.clone(), hi: sum + next }
            } else {
                Interval { lo: &sum - &next, hi: sum }
            };
        }
    }
}

/// Interval for the square root of a nonnegative rational.
pub fn sqrt(x: &BigRational, digits: u32) -> Interval {
    assert!(!x.is_negative());
    if x.is_zero() {
        return Interval::point(BigRational::zero());
    }
    let m = pow10(digits);
    // floor(sqrt(x * m^2)) / m is a lower bound
    let scaled = (x.numer() * &m * &m) / x.denom();
    let root = scaled.sqrt();
    let lo = BigRational::new(root.clone(), m.clone());
    let hi = BigRational::new(root + BigInt::one(), m);
    debug_assert!(&lo * &lo <= *x && *x <= &hi * &hi);
    Interval { lo, hi }
}

/// Interval square root of an interval with nonnegative bounds.
pub fn sqrt_interval(x: &Interval, digits: u32) -> Interval {
    let lo = sqrt(&x.lo, digits);
    let hi = sqrt(&x.hi, digits);
    Interval { lo: lo.lo, hi: hi.hi }
}

/// Interval for exp of a rational (any sign), by a Taylor series in
/// fixed-point arithmetic with directed rounding and an explicit tail bound.
pub fn exp(x: &BigRational, digits: u32) -> Interval {
    if x.is_negative() {
        let pos = exp(&-x, digits + 10);
        let one = Interval::point(BigRational::one());
        return one.div_pos(&pos);
    }
    let guard = digits + 20;
    let m = pow10(guard);
    // directed fixed-point bracket of x: x_lo/m <= x <= x_hi/m
    let x_lo = (x.numer() * &m).div_floor(x.denom());
    let x_hi = &x_lo + 1;
    // terms and sums as scaled integers, rounded down for lo and up for hi
    let mut t_lo = m.clone();
    let mut t_hi = m.clone();
    let mut s_lo = m.clone();
    let mut s_hi = m.clone();
    let mut k = BigInt::one();
    let two_x = BigInt::from(2u8) * &x_hi;
    loop {
        t_lo = (&t_lo * &x_lo) / (&m * &k);
        t_hi = (&t_hi * &x_hi + &m * &k - 1) / (&m * &k) + 1;
        s_lo += &t_lo;
        s_hi += &t_hi;
        k += 1;
        // once m*k exceeds 2*x_hi the terms at least halve
        if &m * &k > two_x && &t_hi * 2 < pow10(guard - digits - 5) {
            let tail = &t_hi * 2 + 2;
            return Interval {
                lo: BigRational::new(s_lo, m.clone()),
                hi: BigRational::new(s_hi + tail, m),
            };
        }
    }
}

/// exp over an interval argument.
pub fn exp_interval(x: &Interval, digits: u32) -> Interval {
    let lo = exp(&x.lo, digits);
    let hi = exp(&x.hi, digits);
    Interval { lo: lo.lo, hi: hi.hi }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn br(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn pi_brackets() {
        let p = pi(40);
        assert!(p.lo < p.hi);
        assert!(p.width() < br(1, 1_000_000_000));
        // 3.14159265358979 < pi < 3.1415926536
        assert!(p.lo > br(314159265358979, 100000000000000));
        assert!(p.hi < br(31415926536, 10000000000));
    }

    #[test]
    fn sqrt_brackets() {
        let s = sqrt(&br(2, 1), 40);
        assert!(&s.lo * &s.lo <= br(2, 1));
        assert!(&s.hi * &s.hi >= br(2, 1));
        assert!(s.width() < br(1, 1_000_000_000));
        let s17 = sqrt(&br(17, 1), 40);
        assert!(s17.lo > br(41231, 10000) && s17.hi < br(41232, 10000));
    }

    #[test]
    fn exp_brackets() {
        let e1 = exp(&br(1, 1), 40);
        assert!(e1.lo > br(27182, 10000) && e1.hi < br(27183, 10000));
        let em1 = exp(&br(-1, 1), 40);
        assert!(em1.lo > br(36787, 100000) && em1.hi < br(36789, 100000));
        // exp(pi) ~ 23.1406926
        let p = pi(50);
        let ep = exp_interval(&p, 45);
        assert!(ep.lo > br(231406, 10000) && ep.hi < br(231407, 10000));
    }

    #[test]
    fn decimal_rendering() {
        let p = pi(60);
        let s = p.to_decimal(20);
        assert!(s.starts_with("3.141592653589793238"), "{s}");
        assert_eq!(Interval::from_int(42).to_decimal(4), "42.00");
        assert_eq!(Interval::point(br(1, 1000000)).to_decimal(3), "1.00e-6");
    }
}
