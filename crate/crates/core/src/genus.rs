//! Global genus symbols: validity, textual format, enumeration for fixed
//! rank and determinant, and symbol extraction from a lattice.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::exactla::RationalMatrix;
use crate::lattice::Lattice;
use crate::padic::{
    self, canonicalize_2adic, local_symbol, BlockType, Constituent, LocalSymbol,
};

/// A genus symbol: signature plus local symbols at every prime dividing
/// twice the determinant (the 2-adic symbol is always present and stored
/// canonicalized).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenusSymbol {
    pub pos: u32,
    pub neg: u32,
    pub locals: BTreeMap<BigInt, LocalSymbol>,
}

/// Parity filter for enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Any,
    Even,
    Odd,
}

/// Enumeration options: optional fixed signature and parity restriction.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnumerateOptions {
    pub signature: Option<(u32, u32)>,
    pub parity: Parity,
}

impl Default for Parity {
    fn default() -> Self {
        Parity::Any
    }
}

impl GenusSymbol {
    pub fn rank(&self) -> u32 {
        self.pos + self.neg
    }

    /// Absolute value of the determinant.
    pub fn det_abs(&self) -> BigInt {
        let mut d = BigInt::one();
        for (p, s) in &self.locals {
            d *= p.pow(u32::try_from(s.det_valuation()).expect("desk-scale valuation"));
        }
        d
    }

    /// Signed determinant: (-1)^neg times the absolute value.
    pub fn det(&self) -> BigInt {
        let d = self.det_abs();
        if self.neg % 2 == 1 {
            -d
        } else {
            d
        }
    }

    /// Even means the 2-adic scale-0 constituent is absent or type II.
    pub fn is_even(&self) -> bool {
        let two = BigInt::from(2u8);
        match self.locals.get(&two) {
            None => true,
            Some(s) => s
                .constituents
                .iter()
                .find(|c| c.scale == 0)
                .is_none_or(|c| c.kind == BlockType::II),
        }
    }

    /// Full validity: structure, realizability, determinant consistency at
    /// every prime, and the global oddity formula.
    pub fn validate(&self) -> Result<()> {
        let n = self.rank();
        if n == 0 {
            return Err(Error::InvalidSymbol("rank zero".into()));
        }
        let two = BigInt::from(2u8);
        let s2 = self
            .locals
            .get(&two)
            .ok_or_else(|| Error::InvalidSymbol("missing 2-adic symbol".into()))?;
        let det = self.det();
        for (p, s) in &self.locals {
            if &s.prime != p {
                return Err(Error::InvalidSymbol("local symbol filed under wrong prime".into()));
            }
            s.validate()?;
            if s.rank() != n {
                return Err(Error::InvalidSymbol(format!(
                    "local rank at {p} is {} but the signature gives {n}",
                    s.rank()
                )));
            }
            let nu = u32::try_from(s.det_valuation()).unwrap();
            let unit = &det / p.pow(nu);
            if p == &two {
                let want = mod8(&unit);
                if s.det8()? != want {
                    return Err(Error::InvalidSymbol(format!(
                        "2-adic determinant class is {want} but the symbol encodes {}",
                        s.det8()?
                    )));
                }
            } else {
                if (&unit % p).is_zero() {
                    return Err(Error::InvalidSymbol(format!(
                        "scale data at {p} does not exhaust the determinant"
                    )));
                }
                let want = arith::legendre(&unit, p)? as i8;
                if s.sign_product() != want {
                    return Err(Error::InvalidSymbol(format!(
                        "sign product at {p} disagrees with the determinant"
                    )));
                }
            }
        }
        for p in self.locals.keys() {
            if p != &two && !(&det % p).is_zero() {
                return Err(Error::InvalidSymbol(format!("{p} does not divide the determinant")));
            }
        }
        // oddity formula: signature + sum of p-excesses ≡ oddity mod 8
        let mut lhs = i64::from(self.pos) - i64::from(self.neg);
        for (p, s) in &self.locals {
            if p != &two {
                lhs += s.p_excess() as i64;
            }
        }
        let rhs = s2.oddity() as i64;
        if (lhs - rhs).rem_euclid(8) != 0 {
            return Err(Error::InvalidSymbol(format!(
                "oddity formula fails: signature-plus-excess {lhs} ≢ oddity {rhs} mod 8"
            )));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Bit-exact text form; see the grammar in the CLI documentation.
    pub fn format(&self) -> String {
        let mut out = format!("sig({},{})", self.pos, self.neg);
        let two = BigInt::from(2u8);
        for (p, s) in &self.locals {
            out.push_str(&format!("; {p}:["));
            let parts: Vec<String> = s
                .constituents
                .iter()
                .map(|c| {
                    let sign = if c.sign == 1 { '+' } else { '-' };
                    if p == &two {
                        let kind = if c.kind == BlockType::II { "II" } else { "I" };
                        format!("{}^{}{}_{}:{}", c.scale, sign, c.rank, c.oddity, kind)
                    } else {
                        format!("{}^{}{}", c.scale, sign, c.rank)
                    }
                })
                .collect();
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        out
    }

    /// Parse the bit-exact text form; positions in errors are byte offsets.
    pub fn parse(text: &str) -> Result<GenusSymbol> {
        Parser { s: text.as_bytes(), pos: 0 }.genus()
    }

    /// JSON mirror of the fields.
    pub fn to_json(&self) -> serde_json::Value {
        let mut locals = serde_json::Map::new();
        for (p, s) in &self.locals {
            let cons: Vec<serde_json::Value> = s
                .constituents
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "scale": c.scale,
                        "rank": c.rank,
                        "sign": c.sign,
                        "type": if c.kind == BlockType::II { "II" } else { "I" },
                        "oddity": c.oddity,
                    })
                })
                .collect();
            locals.insert(p.to_string(), serde_json::Value::Array(cons));
        }
        serde_json::json!({
            "signature": [self.pos, self.neg],
            "det": self.det().to_string(),
            "even": self.is_even(),
            "locals": locals,
        })
    }
}

fn mod8(x: &BigInt) -> u8 {
    let r = x.mod_floor(&BigInt::from(8u8));
    r.to_u64_digits().1.first().copied().unwrap_or(0) as u8
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, lit: &str) -> Result<()> {
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            Ok(())
        } else {
            self.err(&format!("expected '{lit}'"))
        }
    }

    fn number(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse { pos: start, msg: "number out of range".into() })
    }

    fn genus(&mut self) -> Result<GenusSymbol> {
        self.eat("sig(")?;
        let pos_count = self.number()? as u32;
        self.eat(",")?;
        let neg_count = self.number()? as u32;
        self.eat(")")?;
        let mut locals = BTreeMap::new();
        while self.peek().is_some() {
            self.eat("; ")?;
            let p_start = self.pos;
            let p = BigInt::from(self.number()?);
            if !arith::is_prime(&p) {
                self.pos = p_start;
                return self.err("not a prime");
            }
            self.eat(":[")?;
            let mut constituents = Vec::new();
            loop {
                constituents.push(self.constituent(&p)?);
                if self.peek() == Some(b',') {
                    self.eat(", ")?;
                } else {
                    break;
                }
            }
            self.eat("]")?;
            if locals
                .insert(p.clone(), LocalSymbol { prime: p, constituents })
                .is_some()
            {
                return self.err("duplicate prime");
            }
        }
        if self.pos != self.s.len() {
            return self.err("trailing input");
        }
        let g = GenusSymbol { pos: pos_count, neg: neg_count, locals };
        g.validate()?;
        Ok(g)
    }

    fn constituent(&mut self, p: &BigInt) -> Result<Constituent> {
        let scale = self.number()? as u32;
        self.eat("^")?;
        let sign = match self.peek() {
            Some(b'+') => 1i8,
            Some(b'-') => -1i8,
            _ => return self.err("expected sign"),
        };
        self.pos += 1;
        let rank = self.number()? as u32;
        if p == &BigInt::from(2u8) {
            self.eat("_")?;
            let oddity = self.number()? as u8;
            self.eat(":")?;
            let kind = if self.s[self.pos..].starts_with(b"II") {
                self.pos += 2;
                BlockType::II
            } else if self.s[self.pos..].starts_with(b"I") {
                self.pos += 1;
                BlockType::I
            } else {
                return self.err("expected I or II");
            };
            Ok(Constituent { scale, rank, sign, kind, oddity })
        } else {
            Ok(Constituent { scale, rank, sign, kind: BlockType::I, oddity: 0 })
        }
    }
}

/// Exact signature (positive, negative eigenvalue counts) of a nonsingular
/// symmetric rational matrix, by symmetric elimination with pivoting.
pub fn signature(g: &RationalMatrix) -> Result<(u32, u32)> {
    if !g.is_symmetric() {
        return Err(Error::Shape("signature of non-symmetric matrix".into()));
    }
    let mut a = g.clone();
    let n = a.rows;
    let mut live: Vec<usize> = (0..n).collect();
    let (mut pos, mut neg) = (0u32, 0u32);
    while !live.is_empty() {
        if let Some(idx) = live.iter().position(|&i| !a[(i, i)].is_zero()) {
            let i = live[idx];
            let pivot = a[(i, i)].clone();
            if pivot.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
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
                a[(r, i)] = num_rational::BigRational::zero();
            }
            continue;
        }
        // all live diagonal entries vanish: a nonzero off-diagonal pair
        // contributes one positive and one negative eigenvalue
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
        pos += 1;
        neg += 1;
        let b = a[(i, j)].clone();
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
    Ok((pos, neg))
}

/// The genus symbol of an integral lattice.
pub fn symbol_of(l: &Lattice) -> Result<GenusSymbol> {
    symbol_of_with_hints(l, &[])
}

/// Like [`symbol_of`], with known prime factors of the determinant passed
/// through to the factorizer.
pub fn symbol_of_with_hints(l: &Lattice, hints: &[BigInt]) -> Result<GenusSymbol> {
    let gram = l.gram();
    if !gram.is_integral() {
        return Err(Error::NotIntegral("symbol_of".into()));
    }
    let (pos, neg) = signature(&gram)?;
    let det = gram.det()?.to_integer();
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let two = BigInt::from(2u8);
    let fac = arith::factorize_with_hints(&det.abs(), hints)?;
    let mut locals = BTreeMap::new();
    let s2 = canonicalize_2adic(&local_symbol(&gram, &two)?)?;
    locals.insert(two.clone(), s2);
    for p in fac.primes() {
        if p == &two {
            continue;
        }
        locals.insert(p.clone(), local_symbol(&gram, p)?);
    }
    Ok(GenusSymbol { pos, neg, locals })
}

/// All genera of rank n and |det| = d matching the options, canonically
/// spelled, sorted by their text form, duplicate-free.
pub fn enumerate(n: u32, d: &BigInt, opts: &EnumerateOptions) -> Result<Vec<GenusSymbol>> {
    if n == 0 || !d.is_positive() {
        return Err(Error::BadArgument("enumerate needs n ≥ 1 and d ≥ 1".into()));
    }
    let two = BigInt::from(2u8);
    let fac = arith::factorize(d)?;
    let mut out = Vec::new();
    let signatures: Vec<(u32, u32)> = match opts.signature {
        Some((p, q)) => {
            if p + q != n {
                return Err(Error::BadArgument("signature does not sum to the rank".into()));
            }
            vec![(p, q)]
        }
        None => (0..=n).map(|p| (p, n - p)).collect(),
    };
    for (pos, neg) in signatures {
        let det_signed = if neg % 2 == 1 { -d.clone() } else { d.clone() };
        let mut per_prime: Vec<Vec<LocalSymbol>> = Vec::new();
        let mut primes: Vec<BigInt> = Vec::new();
        {
            let nu2 = fac.valuation(&two);
            let unit2 = mod8(&(&det_signed / two.pow(nu2)));
            per_prime.push(two_adic_candidates(n, nu2, unit2, opts.parity)?);
            primes.push(two.clone());
        }
        for (p, e) in &fac.pairs {
            if p == &two {
                continue;
            }
            let unit = &det_signed / p.pow(*e);
            let want = arith::legendre(&unit, p)? as i8;
            per_prime.push(odd_candidates(n, *e, want, p));
            primes.push(p.clone());
        }
        if per_prime.iter().any(|v| v.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; per_prime.len()];
        'odometer: loop {
            let mut locals = BTreeMap::new();
            for (k, p) in primes.iter().enumerate() {
                locals.insert(p.clone(), per_prime[k][idx[k]].clone());
            }
            let g = GenusSymbol { pos, neg, locals };
            if g.validate().is_ok() {
                out.push(g);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break 'odometer;
                }
                idx[k] += 1;
                if idx[k] < per_prime[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
    out.sort_by(|a, b| a.format().cmp(&b.format()));
    out.dedup();
    Ok(out)
}

/// Stream of (d, symbols) for d = 1..=d_max in ascending d.
pub fn enumerate_upto<'a>(
    n: u32,
    d_max: &BigInt,
    opts: &'a EnumerateOptions,
) -> impl Iterator<Item = Result<(BigInt, Vec<GenusSymbol>)>> + 'a {
    let d_max = d_max.clone();
    let mut d = BigInt::zero();
    std::iter::from_fn(move || {
        d += 1;
        if d > d_max {
            return None;
        }
        Some(enumerate(n, &d, opts).map(|v| (d.clone(), v)))
    })
}

/// Valid 2-adic local symbols of total rank n, det valuation nu2 and unit
/// class `unit8`, canonicalized and deduplicated.
pub fn two_adic_candidates(
    n: u32,
    nu2: u32,
    unit8: u8,
    parity: Parity,
) -> Result<Vec<LocalSymbol>> {
    let two = BigInt::from(2u8);
    let mut set = std::collections::BTreeSet::new();
    for shape in scale_shapes(n, nu2) {
        let mut options: Vec<Vec<(BlockType, i8, u8)>> = Vec::new();
        for &(_, r) in &shape {
            let mut opts_c = Vec::new();
            for sign in [1i8, -1] {
                if padic::realizable_type2(r, sign) {
                    opts_c.push((BlockType::II, sign, 0u8));
                }
                for t in padic::oddity_set(r, sign) {
                    opts_c.push((BlockType::I, sign, t));
                }
            }
            options.push(opts_c);
        }
        if options.iter().any(|o| o.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; shape.len()];
        'odometer: loop {
            let constituents: Vec<Constituent> = shape
                .iter()
                .zip(idx.iter())
                .map(|(&(k, r), &i)| {
                    let (kind, sign, oddity) = options[shape.iter().position(|&(s, _)| s == k).unwrap()][i];
                    Constituent { scale: k, rank: r, sign, kind, oddity }
                })
                .collect();
            let s = LocalSymbol { prime: two.clone(), constituents };
            let ok_parity = match parity {
                Parity::Any => true,
                Parity::Even => s
                    .constituents
                    .iter()
                    .find(|c| c.scale == 0)
                    .is_none_or(|c| c.kind == BlockType::II),
                Parity::Odd => s
                    .constituents
                    .iter()
                    .find(|c| c.scale == 0)
                    .is_some_and(|c| c.kind == BlockType::I),
            };
            if ok_parity && s.validate().is_ok() && s.det8()? == unit8 {
                set.insert(canonicalize_2adic(&s)?);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break 'odometer;
                }
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Valid odd-p local symbols of total rank n and det valuation nu whose
/// sign product matches the determinant class.
pub fn odd_candidates(n: u32, nu: u32, want_product: i8, p: &BigInt) -> Vec<LocalSymbol> {
    let mut out = Vec::new();
    for shape in scale_shapes(n, nu) {
        let m = shape.len();
        for mask in 0u32..(1 << m) {
            let signs: Vec<i8> = (0..m).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            let prod: i8 = signs.iter().product();
            if prod != want_product {
                continue;
            }
            let constituents: Vec<Constituent> = shape
                .iter()
                .zip(&signs)
                .map(|(&(k, r), &sign)| Constituent {
                    scale: k,
                    rank: r,
                    sign,
                    kind: BlockType::I,
                    oddity: 0,
                })
                .collect();
            out.push(LocalSymbol { prime: p.clone(), constituents });
        }
    }
    out
}

/// All (scale, rank) shapes: a scale-0 filler plus higher scales with
/// sum of scale*rank = nu and total rank at most n. Scales ascending.
fn scale_shapes(n: u32, nu: u32) -> Vec<Vec<(u32, u32)>> {
    fn rec(
        out: &mut Vec<Vec<(u32, u32)>>,
        current: &mut Vec<(u32, u32)>,
        next_scale: u32,
        nu_left: u32,
        rank_left: u32,
        n: u32,
    ) {
        if nu_left == 0 {
            let used: u32 = current.iter().map(|&(_, r)| r).sum();
            let r0 = n - used;
            let mut shape = Vec::with_capacity(current.len() + 1);
            if r0 > 0 {
                shape.push((0, r0));
            }
            shape.extend(current.iter().copied());
            if !shape.is_empty() {
                out.push(shape);
            }
            return;
        }
        if rank_left == 0 || next_scale > nu_left {
            return;
        }
        for k in next_scale..=nu_left {
            for r in 1..=(nu_left / k).min(rank_left) {
                current.push((k, r));
                rec(out, current, k + 1, nu_left - k * r, rank_left - r, n);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    rec(&mut out, &mut current, 1, nu, n, n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn lat(n: usize, e: &[i64]) -> Lattice {
        Lattice::from_gram(RationalMatrix::from_int_entries(n, n, e)).unwrap()
    }

    #[test]
    fn signature_examples() {
        let g = RationalMatrix::from_int_entries(3, 3, &[1, 0, 0, 0, 1, 0, 0, 0, 1]);
        assert_eq!(signature(&g).unwrap(), (3, 0));
        let g = RationalMatrix::from_int_entries(2, 2, &[1, 0, 0, -1]);
        assert_eq!(signature(&g).unwrap(), (1, 1));
        let g = RationalMatrix::from_int_entries(2, 2, &[0, 1, 1, 0]);
        assert_eq!(signature(&g).unwrap(), (1, 1));
        let g = RationalMatrix::from_int_entries(2, 2, &[-2, 1, 1, -2]);
        assert_eq!(signature(&g).unwrap(), (0, 2));
    }

    #[test]
    fn symbol_of_examples() {
        let s = symbol_of(&lat(3, &[1, 0, 0, 0, 1, 0, 0, 0, 1])).unwrap();
        assert_eq!((s.pos, s.neg), (3, 0));
        let two = bi(2);
        let c = &s.locals[&two].constituents[0];
        assert_eq!((c.scale, c.rank, c.sign, c.kind, c.oddity), (0, 3, 1, BlockType::I, 3));

        let s = symbol_of(&lat(2, &[1, 0, 0, -1])).unwrap();
        assert_eq!((s.pos, s.neg), (1, 1));
        assert_eq!(s.det(), bi(-1));

        let s = symbol_of(&lat(2, &[2, 0, 0, -2])).unwrap();
        assert!(s.is_even());
        assert_eq!(s.det(), bi(-4));
    }

    #[test]
    fn validity_examples() {
        let s = symbol_of(&lat(2, &[1, 0, 0, 1])).unwrap();
        assert!(s.is_valid());

        // determinant sign must be (-1)^neg: flipping the signature breaks it
        let good = symbol_of(&lat(1, &[1])).unwrap();
        let bad = GenusSymbol { pos: 0, neg: 1, locals: good.locals.clone() };
        assert!(!bad.is_valid());

        // type II with nonzero oddity
        let mut s = symbol_of(&lat(2, &[0, 1, 1, 0])).unwrap();
        let two = bi(2);
        s.locals.get_mut(&two).unwrap().constituents[0].oddity = 2;
        assert!(!s.is_valid());
    }

    #[test]
    fn format_parse_examples() {
        let s = symbol_of(&lat(2, &[1, 0, 0, 1])).unwrap();
        assert_eq!(s.format(), "sig(2,0); 2:[0^+2_2:I]");
        let back = GenusSymbol::parse(&s.format()).unwrap();
        assert_eq!(back, s);

        let h = symbol_of(&lat(2, &[0, 1, 1, 0])).unwrap();
        assert_eq!(h.format(), "sig(1,1); 2:[0^+2_0:II]");
        assert_eq!(GenusSymbol::parse(&h.format()).unwrap(), h);

        assert!(GenusSymbol::parse("sig(2,0); 4:[0^+2]").is_err());
        assert!(GenusSymbol::parse("sig(2,0)x").is_err());
        match GenusSymbol::parse("sig(2,0); 2:[0^?2_2:I]") {
            Err(Error::Parse { pos, .. }) => assert!(pos > 0),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn enumerate_rank1_det1() {
        let got = enumerate(1, &bi(1), &EnumerateOptions::default()).unwrap();
        assert_eq!(got.len(), 2);
        assert!(got.iter().all(|g| g.is_valid()));
        let sigs: Vec<(u32, u32)> = got.iter().map(|g| (g.pos, g.neg)).collect();
        assert!(sigs.contains(&(1, 0)) && sigs.contains(&(0, 1)));
    }

    #[test]
    fn enumerate_contains_hyperbolic_plane() {
        let opts = EnumerateOptions { signature: Some((1, 1)), parity: Parity::Even };
        let got = enumerate(2, &bi(1), &opts).unwrap();
        let h = symbol_of(&lat(2, &[0, 1, 1, 0])).unwrap();
        assert!(got.contains(&h), "{:?}", got.iter().map(|g| g.format()).collect::<Vec<_>>());
    }

    #[test]
    fn enumerate_matches_symbols_of_small_lattices() {
        for entries in [
            vec![1i64, 0, 0, 2],
            vec![2, 0, 0, 3],
            vec![1, 0, 0, -4],
            vec![2, 1, 1, 2],
            vec![3, 0, 0, 5],
            vec![2, 0, 0, -2],
        ] {
            let l = lat(2, &entries);
            let s = symbol_of(&l).unwrap();
            let d = s.det().abs();
            let got = enumerate(2, &d, &EnumerateOptions::default()).unwrap();
            assert!(got.contains(&s), "missing {} for {entries:?}", s.format());
        }
    }

    #[test]
    fn enumerate_upto_consistency() {
        let opts = EnumerateOptions::default();
        let stream: Vec<_> =
            enumerate_upto(2, &bi(12), &opts).collect::<Result<Vec<_>>>().unwrap();
        assert_eq!(stream.len(), 12);
        for (d, symbols) in stream {
            let direct = enumerate(2, &d, &opts).unwrap();
            assert_eq!(symbols, direct, "d = {d}");
        }
    }

    #[test]
    fn parse_roundtrip_enumerated() {
        let opts = EnumerateOptions::default();
        for n in 1..=3u32 {
            for d in 1..=20i64 {
                for g in enumerate(n, &bi(d), &opts).unwrap() {
                    let text = g.format();
                    assert_eq!(GenusSymbol::parse(&text).unwrap(), g, "{text}");
                }
            }
        }
    }
}
