//! Lattices inside a fixed rational quadratic space: duals, sums,
//! intersections, rescalings, discriminant groups, and p-saturation.
//!
//! A lattice is stored as a full-rank rational basis matrix together with
//! the Gram matrix of the ambient bilinear form. The polarization convention
//! is B(v, v) = 2 Q(v), so an even lattice has an even Gram diagonal.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::exactla::RationalMatrix;

/// A full-rank lattice in a rational quadratic space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    /// Gram matrix of the bilinear form on the ambient space.
    pub ambient_gram: RationalMatrix,
    /// Rows span the lattice; always square and invertible.
    pub basis: RationalMatrix,
}

/// The p-part of the discriminant group L^vee / L of an integral lattice,
/// with its torsion bilinear form (values in Q/Z) and quadratic form
/// (values in Q/2Z, the even convention).
#[derive(Debug, Clone)]
pub struct DiscriminantGroup {
    pub p: BigInt,
    /// Generator coordinates over the lattice basis, one row per generator.
    pub generators: RationalMatrix,
    /// Order of each generator: a power of p, descending.
    pub orders: Vec<BigInt>,
    /// Gram matrix of the lattice the group was computed from.
    gram: RationalMatrix,
}

impl Lattice {
    pub fn new(ambient_gram: RationalMatrix, basis: RationalMatrix) -> Result<Self> {
        if !ambient_gram.is_symmetric() {
            return Err(Error::Shape("ambient gram must be symmetric".into()));
        }
        if basis.rows != basis.cols || basis.rows != ambient_gram.rows {
            return Err(Error::Shape("basis must be square of ambient dimension".into()));
        }
        let l = Lattice { ambient_gram, basis };
        if l.basis.det()?.is_zero() {
            return Err(Error::Shape("basis is rank deficient".into()));
        }
        if l.gram().det()?.is_zero() {
            return Err(Error::Shape("form is degenerate on the lattice".into()));
        }
        Ok(l)
    }

    /// Standard lattice Z^n with the given Gram matrix as ambient form.
    pub fn from_gram(gram: RationalMatrix) -> Result<Self> {
        let n = gram.rows;
        Lattice::new(gram, RationalMatrix::identity(n))
    }

    pub fn rank(&self) -> usize {
        self.basis.rows
    }

    /// Gram matrix of the lattice basis: basis * ambient * basis^T.
    pub fn gram(&self) -> RationalMatrix {
        self.basis.mul(&self.ambient_gram).mul(&self.basis.transpose())
    }

    pub fn det(&self) -> BigRational {
        self.gram().det().expect("lattice gram is square")
    }

    pub fn is_integral(&self) -> bool {
        self.gram().is_integral()
    }

    /// Even means the quadratic form Q = B/2 is integer valued, i.e. the
    /// Gram matrix is integral with even diagonal.
    pub fn is_even(&self) -> bool {
        let g = self.gram();
        if !g.is_integral() {
            return false;
        }
        (0..g.rows).all(|i| g[(i, i)].to_integer().is_even())
    }

    /// Dual lattice with respect to the ambient form.
    pub fn dual(&self) -> Lattice {
        let dual_basis = self
            .gram()
            .inverse()
            .expect("nondegenerate gram")
            .mul(&self.basis);
        Lattice { ambient_gram: self.ambient_gram.clone(), basis: dual_basis }
    }

    /// Rescale every basis vector by c (Gram scales by c^2).
    pub fn rescale_basis(&self, c: &BigRational) -> Result<Lattice> {
        if c.is_zero() {
            return Err(Error::BadArgument("rescale by zero".into()));
        }
        Ok(Lattice { ambient_gram: self.ambient_gram.clone(), basis: self.basis.scale(c) })
    }

    fn same_ambient(&self, other: &Lattice) -> Result<()> {
        if self.ambient_gram != other.ambient_gram {
            return Err(Error::Shape("lattices live in different ambient spaces".into()));
        }
        Ok(())
    }

    /// Lattice generated by both inputs, computed as the HNF of the stacked
    /// bases after clearing denominators.
    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        self.same_ambient(other)?;
        let stacked = self.basis.stack_rows(&other.basis);
        Ok(Lattice {
            ambient_gram: self.ambient_gram.clone(),
            basis: row_saturate(&stacked),
        })
    }

    /// Adjoin extra vectors (rows, in ambient coordinates) to the lattice.
    pub fn adjoin(&self, vectors: &RationalMatrix) -> Lattice {
        let stacked = self.basis.stack_rows(vectors);
        Lattice { ambient_gram: self.ambient_gram.clone(), basis: row_saturate(&stacked) }
    }

    /// Intersection, via the dual of the sum of the duals.
    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        self.same_ambient(other)?;
        Ok(self.dual().sum(&other.dual())?.dual())
    }

    /// Does the lattice contain v (a row vector in ambient coordinates)?
    pub fn contains(&self, v: &[BigRational]) -> bool {
        let binv = self.basis.inverse().expect("full rank");
        let coords = RationalMatrix::from_fn(1, v.len(), |_, j| v[j].clone()).mul(&binv);
        (0..coords.cols).all(|j| coords[(0, j)].is_integer())
    }

    /// Does the lattice contain every vector of the other lattice?
    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        let binv = self.basis.inverse().expect("full rank");
        let coords = other.basis.mul(&binv);
        coords.is_integral()
    }

    /// Index of a sublattice inside self.
    pub fn index_of(&self, sub: &Lattice) -> Result<BigInt> {
        if !self.contains_lattice(sub) {
            return Err(Error::BadArgument("not a sublattice".into()));
        }
        let q = sub.basis.det()?.clone() / self.basis.det()?.clone();
        Ok(q.to_integer().abs())
    }

    /// The p-part of the discriminant group L^vee / L.
    pub fn discriminant_group(&self, p: &BigInt) -> Result<DiscriminantGroup> {
        let gram = self.gram();
        let gram_int = gram
            .to_int()
            .map_err(|_| Error::NotIntegral("discriminant group needs an integral lattice".into()))?;
        let snf = gram_int.snf();
        // Quotient Z^n / rowspan(gram) in dual-basis coordinates; generators
        // pull back to the rows of V^{-1} * gram^{-1} over the lattice basis.
        let vinv = RationalMatrix::from_int_matrix(&snf.v).inverse()?;
        let gram_inv = gram.inverse()?;
        let gen_all = vinv.mul(&gram_inv);
        let mut gens: Vec<Vec<BigRational>> = Vec::new();
        let mut orders: Vec<BigInt> = Vec::new();
        for i in (0..snf.d.len()).rev() {
            let d = &snf.d[i];
            if d.is_zero() {
                continue;
            }
            let e = arith::valuation(d, p);
            if e == 0 {
                continue;
            }
            let pe = p.pow(e);
            let cof = d / &pe;
            let row: Vec<BigRational> = (0..gen_all.cols)
                .map(|j| &gen_all[(i, j)] * BigRational::from(cof.clone()))
                .collect();
            gens.push(row);
            orders.push(pe);
        }
        let generators = RationalMatrix::from_fn(gens.len(), self.rank(), |i, j| gens[i][j].clone());
        Ok(DiscriminantGroup { p: p.clone(), generators, orders, gram })
    }

    /// Smallest overlattice M with L ⊆ M, M = L away from p, and p·D_p(M) = 0.
    pub fn p_saturate(&self, p: &BigInt) -> Result<Lattice> {
        if !self.is_integral() {
            return Err(Error::NotIntegral("p_saturate".into()));
        }
        let mut cur = self.clone();
        loop {
            let disc = cur.discriminant_group(p)?;
            let mut adjoin_rows: Vec<Vec<BigRational>> = Vec::new();
            for (i, ord) in disc.orders.iter().enumerate() {
                let e = arith::valuation(ord, p);
                if e >= 2 {
                    // p^{ceil(e/2)} times a dual preimage of the generator
                    let scale = BigRational::from(p.pow(e.div_ceil(2)));
                    let coords = disc.generators.row(i);
                    let vec_ambient: Vec<BigRational> = (0..cur.rank())
                        .map(|j| {
                            (0..cur.rank())
                                .map(|k| &coords[k] * &cur.basis[(k, j)])
                                .sum::<BigRational>()
                                * &scale
                        })
                        .collect();
                    adjoin_rows.push(vec_ambient);
                }
            }
            if adjoin_rows.is_empty() {
                return Ok(cur);
            }
            let m = RationalMatrix::from_fn(adjoin_rows.len(), cur.rank(), |i, j| {
                adjoin_rows[i][j].clone()
            });
            let next = cur.adjoin(&m);
            debug_assert!(next.is_integral());
            cur = next;
        }
    }

    /// Serialize as JSON with exact "num/den" strings.
    pub fn to_json(&self) -> serde_json::Value {
        let enc = |m: &RationalMatrix| -> serde_json::Value {
            let mut rows = Vec::new();
            for i in 0..m.rows {
                for j in 0..m.cols {
                    rows.push(serde_json::Value::String(format!(
                        "{}/{}",
                        m[(i, j)].numer(),
                        m[(i, j)].denom()
                    )));
                }
            }
            serde_json::Value::Array(rows)
        };
        serde_json::json!({
            "rank": self.rank(),
            "ambient_gram": enc(&self.ambient_gram),
            "basis": enc(&self.basis),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Lattice> {
        let bad = |m: &str| Error::Parse { pos: 0, msg: m.to_string() };
        let rank = v["rank"].as_u64().ok_or_else(|| bad("missing rank"))? as usize;
        let dec = |val: &serde_json::Value| -> Result<RationalMatrix> {
            let arr = val.as_array().ok_or_else(|| bad("expected array"))?;
            if arr.len() != rank * rank {
                return Err(bad("wrong entry count"));
            }
            let mut m = RationalMatrix::zero(rank, rank);
            for (idx, e) in arr.iter().enumerate() {
                let s = e.as_str().ok_or_else(|| bad("expected string entry"))?;
                let (num, den) = s.split_once('/').ok_or_else(|| bad("expected num/den"))?;
                let n: BigInt = num.parse().map_err(|_| bad("bad numerator"))?;
                let d: BigInt = den.parse().map_err(|_| bad("bad denominator"))?;
                if d.is_zero() {
                    return Err(bad("zero denominator"));
                }
                m[(idx / rank, idx % rank)] = BigRational::new(n, d);
            }
            Ok(m)
        };
        Lattice::new(dec(&v["ambient_gram"])?, dec(&v["basis"])?)
    }
}

/// Canonical basis (HNF after clearing denominators) for the row span of a
/// possibly redundant generating set. Keeps exactly the nonzero rows.
fn row_saturate(stacked: &RationalMatrix) -> RationalMatrix {
    let l = stacked.denominator_lcm();
    let scaled = stacked.scale(&BigRational::from(l.clone()));
    let int = scaled.to_int().expect("cleared denominators");
    let (h, _) = int.hnf();
    let n = stacked.cols;
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for i in 0..h.rows {
        if (0..h.cols).any(|j| !h[(i, j)].is_zero()) {
            rows.push((0..h.cols).map(|j| h[(i, j)].clone()).collect());
        }
    }
    assert_eq!(rows.len(), n, "row span lost rank");
    let linv = BigRational::new(BigInt::one(), l);
    RationalMatrix::from_fn(n, n, |i, j| BigRational::from(rows[i][j].clone()) * &linv)
}

impl DiscriminantGroup {
    /// Number of generators.
    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    /// Group order (product of generator orders).
    pub fn order(&self) -> BigInt {
        let mut n = BigInt::one();
        for o in &self.orders {
            n *= o;
        }
        n
    }

    /// Bilinear value B(g_i, g_j) as an exact rational (lift of Q/Z class).
    pub fn b_value(&self, i: usize, j: usize) -> BigRational {
        let gi = self.generators.row(i);
        let gj = self.generators.row(j);
        let mut acc = BigRational::zero();
        for a in 0..self.gram.rows {
            for b in 0..self.gram.cols {
                acc += &gi[a] * &self.gram[(a, b)] * &gj[b];
            }
        }
        acc
    }

    /// B(x, x) for a combination x = sum coeffs[i] * g_i, exact rational.
    pub fn b_of_combination(&self, coeffs: &[BigInt]) -> BigRational {
        let n = self.gram.rows;
        let mut x = vec![BigRational::zero(); n];
        for (i, c) in coeffs.iter().enumerate() {
            let gi = self.generators.row(i);
            for a in 0..n {
                x[a] += &gi[a] * BigRational::from(c.clone());
            }
        }
        let mut acc = BigRational::zero();
        for a in 0..n {
            for b in 0..n {
                acc += &x[a] * &self.gram[(a, b)] * &x[b];
            }
        }
        acc
    }

    /// Quadratic value of generator i in the even convention: a lift of
    /// B(g, g) in Q/2Z.
    pub fn q_value(&self, i: usize) -> BigRational {
        reduce_mod_2z(&self.b_value(i, i))
    }

    /// Iterate over all nonzero element coefficient vectors. Errors out when
    /// the group is larger than the cap.
    pub fn element_coefficients(&self, cap: u64) -> Result<Vec<Vec<BigInt>>> {
        let total = self.order();
        if total > BigInt::from(cap) {
            return Err(Error::ResourceLimit(format!(
                "discriminant group has {total} elements (cap {cap})"
            )));
        }
        let mut out = Vec::new();
        let k = self.orders.len();
        let mut cur = vec![BigInt::zero(); k];
        loop {
            // advance odometer
            let mut i = 0;
            loop {
                if i == k {
                    return Ok(out);
                }
                cur[i] += 1;
                if cur[i] < self.orders[i] {
                    break;
                }
                cur[i] = BigInt::zero();
                i += 1;
            }
            out.push(cur.clone());
        }
    }

    /// The vector for a coefficient combination, in ambient coordinates,
    /// given the lattice it was computed from.
    pub fn combination_in_ambient(&self, lattice: &Lattice, coeffs: &[BigInt]) -> Vec<BigRational> {
        let n = lattice.rank();
        let mut coords = vec![BigRational::zero(); n];
        for (i, c) in coeffs.iter().enumerate() {
            let gi = self.generators.row(i);
            for a in 0..n {
                coords[a] += &gi[a] * BigRational::from(c.clone());
            }
        }
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| &coords[k] * &lattice.basis[(k, j)])
                    .sum::<BigRational>()
            })
            .collect()
    }
}

/// Reduce a rational into [0, 2).
pub fn reduce_mod_2z(x: &BigRational) -> BigRational {
    let two = BigRational::from(BigInt::from(2));
    let q = (x / &two).floor();
    x - q * two
}

/// Reduce a rational into [0, 1).
pub fn reduce_mod_z(x: &BigRational) -> BigRational {
    x - x.floor()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }
    fn br(n: i64) -> BigRational {
        BigRational::from(bi(n))
    }
    fn gram_lattice(n: usize, entries: &[i64]) -> Lattice {
        Lattice::from_gram(RationalMatrix::from_int_entries(n, n, entries)).unwrap()
    }

    #[test]
    fn gram_examples() {
        let l = gram_lattice(2, &[1, 0, 0, 1]);
        assert_eq!(l.gram(), RationalMatrix::identity(2));

        let doubled = l.rescale_basis(&br(2)).unwrap();
        assert_eq!(doubled.gram(), RationalMatrix::identity(2).scale(&br(4)));

        let skew = Lattice::new(
            RationalMatrix::identity(2),
            RationalMatrix::from_int_entries(2, 2, &[1, 1, 0, 1]),
        )
        .unwrap();
        assert_eq!(skew.gram(), RationalMatrix::from_int_entries(2, 2, &[2, 1, 1, 1]));
    }

    #[test]
    fn dual_examples() {
        let l = gram_lattice(2, &[1, 0, 0, 1]);
        assert_eq!(l.dual().gram(), l.gram());

        let two = gram_lattice(1, &[2]);
        let d = two.dual();
        assert_eq!(d.gram()[(0, 0)], BigRational::new(bi(1), bi(2)));

        let l = gram_lattice(2, &[1, 0, 0, 9]);
        let d = l.dual();
        // B(dual basis, basis) is integral
        let pairing = d.basis.mul(&l.ambient_gram).mul(&l.basis.transpose());
        assert!(pairing.is_integral());
        assert_eq!(l.det() * d.det(), BigRational::one());
    }

    #[test]
    fn dual_dual_roundtrip() {
        for entries in [
            vec![2i64, 1, 1, 2],
            vec![1, 0, 0, 9],
            vec![2, 0, 0, -2],
            vec![4, 1, 1, 3],
        ] {
            let l = gram_lattice(2, &entries);
            let dd = l.dual().dual();
            assert!(l.contains_lattice(&dd) && dd.contains_lattice(&l));
        }
    }

    #[test]
    fn sum_and_intersect() {
        let z2 = gram_lattice(2, &[1, 0, 0, 1]);
        let two_z2 = z2.rescale_basis(&br(2)).unwrap();
        assert!(z2.sum(&z2).unwrap().contains_lattice(&z2));
        assert!(z2.contains_lattice(&z2.sum(&z2).unwrap()));

        let inter = z2.intersect(&two_z2).unwrap();
        assert!(inter.contains_lattice(&two_z2) && two_z2.contains_lattice(&inter));

        // 2Z^2 + span{(1,1),(0,2)} has index 2 in Z^2
        let diag = Lattice::new(
            RationalMatrix::identity(2),
            RationalMatrix::from_int_entries(2, 2, &[1, 1, 0, 2]),
        )
        .unwrap();
        let s = two_z2.sum(&diag).unwrap();
        assert_eq!(z2.index_of(&s).unwrap(), bi(2));
    }

    #[test]
    fn index_multiplicativity() {
        let z2 = gram_lattice(2, &[1, 0, 0, 1]);
        let a = Lattice::new(
            RationalMatrix::identity(2),
            RationalMatrix::from_int_entries(2, 2, &[2, 0, 0, 1]),
        )
        .unwrap();
        let b = Lattice::new(
            RationalMatrix::identity(2),
            RationalMatrix::from_int_entries(2, 2, &[1, 1, 0, 3]),
        )
        .unwrap();
        let _ = z2;
        let s = a.sum(&b).unwrap();
        let i = a.intersect(&b).unwrap();
        assert_eq!(s.det() * i.det(), a.det() * b.det());
    }

    #[test]
    fn discriminant_group_examples() {
        let uni = gram_lattice(2, &[1, 0, 0, 1]);
        let d = uni.discriminant_group(&bi(2)).unwrap();
        assert_eq!(d.order(), bi(1));

        let l = gram_lattice(2, &[1, 0, 0, 9]);
        let d = l.discriminant_group(&bi(3)).unwrap();
        assert_eq!(d.orders, vec![bi(9)]);
        // q(g) = 1/9 mod 2Z
        assert_eq!(d.q_value(0), BigRational::new(bi(1), bi(9)));

        let l = gram_lattice(2, &[2, 0, 0, -2]);
        let d = l.discriminant_group(&bi(2)).unwrap();
        assert_eq!(d.orders, vec![bi(2), bi(2)]);
        let mut qs: Vec<BigRational> = (0..2).map(|i| d.q_value(i)).collect();
        qs.sort();
        assert_eq!(qs, vec![BigRational::new(bi(1), bi(2)), BigRational::new(bi(3), bi(2))]);
    }

    #[test]
    fn discriminant_group_order_matches_det() {
        for (entries, p) in [
            (vec![2i64, 1, 1, 2], 3i64),
            (vec![4, 0, 0, 6], 2),
            (vec![4, 0, 0, 6], 3),
            (vec![1, 0, 0, 12], 2),
        ] {
            let l = gram_lattice(2, &entries);
            let det = l.det().to_integer().abs();
            let pb = bi(p);
            let d = l.discriminant_group(&pb).unwrap();
            let e = if (&det % &pb).is_zero() { arith::valuation(&det, &pb) } else { 0 };
            assert_eq!(d.order(), pb.pow(e), "entries {entries:?} p {p}");
        }
    }

    #[test]
    fn p_saturate_examples() {
        let l = gram_lattice(2, &[1, 0, 0, 3]);
        let s = l.p_saturate(&bi(3)).unwrap();
        assert!(s.contains_lattice(&l) && l.contains_lattice(&s));

        // diag(1, 9) saturates to a unimodular lattice by adjoining e2/3
        let l = gram_lattice(2, &[1, 0, 0, 9]);
        let s = l.p_saturate(&bi(3)).unwrap();
        assert!(s.contains_lattice(&l));
        assert_eq!(l.index_of(&l.intersect(&s).unwrap()).unwrap(), bi(1));
        assert_eq!(s.index_of(&l).unwrap(), bi(3));
        assert!(s.is_integral());
        assert_eq!(s.det().to_integer().abs(), bi(1));

        // diag(p, p^3) for p = 5
        let l = gram_lattice(2, &[5, 0, 0, 125]);
        let s = l.p_saturate(&bi(5)).unwrap();
        assert!(s.is_integral());
        let d = s.discriminant_group(&bi(5)).unwrap();
        for o in &d.orders {
            assert_eq!(o, &bi(5));
        }
        // index is a power of p
        let idx = s.index_of(&l).unwrap();
        let f = arith::factorize(&idx).unwrap();
        assert!(f.pairs.iter().all(|(q, _)| q == &bi(5)));
    }

    #[test]
    fn json_roundtrip() {
        let l = gram_lattice(2, &[2, 1, 1, 2]).rescale_basis(&BigRational::new(bi(1), bi(3))).unwrap();
        let j = l.to_json();
        let back = Lattice::from_json(&j).unwrap();
        assert_eq!(l, back);
    }
}

impl Lattice {
    /// Shrink basis entries without changing the lattice: LLL-reduce the
    /// basis rows with respect to the Euclidean inner product on their
    /// coordinates. The spanned lattice is unchanged (row operations are
    /// unimodular); only the coefficients shrink. Reduction of the form
    /// itself is out of scope, but small coordinates keep every later exact
    /// computation cheap.
    pub fn reduce_basis_size(&self) -> Lattice {
        // skip when the coefficients are already small
        let max_bits = (0..self.basis.rows)
            .flat_map(|i| (0..self.basis.cols).map(move |j| (i, j)))
            .map(|(i, j)| self.basis[(i, j)].numer().bits() + self.basis[(i, j)].denom().bits())
            .max()
            .unwrap_or(0);
        if max_bits < 48 {
            return self.clone();
        }
        // Hermite form first bounds entries by the pivots, then LLL shrinks
        let basis = euclidean_lll(&row_saturate(&self.basis));
        Lattice { ambient_gram: self.ambient_gram.clone(), basis }
    }
}

pub static LLL_ITERS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

/// LLL on the rows of a rational matrix under the Euclidean inner product.
/// Decisions (size reduction and swaps) are taken with f64 Gram-Schmidt
/// data; every row operation is applied exactly, so the span never changes
/// and the float part only affects how small the entries end up.
fn euclidean_lll(m: &RationalMatrix) -> RationalMatrix {
    let n = m.rows;
    let mut b = m.clone();
    // float copy, prescaled to avoid overflow
    let to_f64 = |x: &BigRational| -> f64 {
        let num = x.numer().to_string().parse::<f64>().unwrap_or(f64::MAX);
        let den = x.denom().to_string().parse::<f64>().unwrap_or(f64::MAX);
        num / den
    };
    let mut fb: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..b.cols).map(|j| to_f64(&b[(i, j)])).collect())
        .collect();
    let gso = |fb: &[Vec<f64>]| -> (Vec<Vec<f64>>, Vec<f64>) {
        let cols = fb[0].len();
        let mut mu = vec![vec![0.0; n]; n];
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut norms = vec![0.0; n];
        for i in 0..n {
            let mut v = fb[i].clone();
            for j in 0..i {
                if norms[j] <= 0.0 {
                    continue;
                }
                let num: f64 = (0..cols).map(|c| fb[i][c] * star[j][c]).sum();
                let f = num / norms[j];
                mu[i][j] = f;
                for c in 0..cols {
                    v[c] -= f * star[j][c];
                }
            }
            norms[i] = v.iter().map(|x| x * x).sum();
            star.push(v);
        }
        (mu, norms)
    };
    let mut k = 1usize;
    let mut guard = 0usize;
    while k < n && guard < 1000 {
        guard += 1;
        let (mu, _) = gso(&fb);
        for j in (0..k).rev() {
            let t = mu[k][j].round();
            if t != 0.0 && t.is_finite() {
                let tb = BigRational::from(BigInt::from(t as i64));
                for c in 0..b.cols {
                    let x = &tb * &b[(j, c)];
                    b[(k, c)] -= x;
                }
                for c in 0..b.cols {
                    fb[k][c] -= t * fb[j][c];
                }
            }
        }
        let (mu2, norms2) = gso(&fb);
        if norms2[k - 1] <= 0.0
            || norms2[k] + mu2[k][k - 1] * mu2[k][k - 1] * norms2[k - 1] >= 0.75 * norms2[k - 1]
        {
            k += 1;
        } else {
            b.swap_rows(k, k - 1);
            fb.swap(k, k - 1);
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    b
}
