//! Exact p-adic Jordan decomposition over rationals with p-coprime
//! denominators. The transform and the blocks are exact; no precision
//! truncation happens here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::rat_valuation;
use crate::error::{Error, Result};
use crate::exactla::RationalMatrix;

/// Returns (T, blocks) with T * G * T^T exactly block diagonal; blocks are
/// (scale, unit_gram) sorted by ascending scale, one entry per scale, and
/// unit grams are p-unimodular exact rational matrices.
pub(crate) fn jordan_exact(
    g: &RationalMatrix,
    p: &BigInt,
) -> Result<(RationalMatrix, Vec<(u32, RationalMatrix)>)> {
    if !g.is_symmetric() {
        return Err(Error::Shape("jordan: matrix must be symmetric".into()));
    }
    if g.det()?.is_zero() {
        return Err(Error::Singular);
    }
    let n = g.rows;
    let two = BigInt::from(2u8);
    let is_two = p == &two;
    let mut a = g.clone();
    let mut t = RationalMatrix::identity(n);
    // pieces: (scale, list of row indices) in reduction order
    let mut pieces: Vec<(u32, Vec<usize>)> = Vec::new();
    let mut start = 0usize;

    while start < n {
        // minimal valuation over the trailing block
        let mut vmin: Option<i64> = None;
        let mut at = (start, start);
        let mut diag_hit = false;
        for i in start..n {
            for j in i..n {
                if a[(i, j)].is_zero() {
                    continue;
                }
                let v = rat_valuation(&a[(i, j)], p);
                let better = match vmin {
                    None => true,
                    Some(m) => v < m || (v == m && !diag_hit && i == j),
                };
                if better {
                    vmin = Some(v);
                    at = (i, j);
                    diag_hit = i == j;
                } else if vmin == Some(v) && i == j && !diag_hit {
                    at = (i, j);
                    diag_hit = true;
                }
            }
        }
        let vmin = vmin.ok_or(Error::Singular)?;
        let (pi, pj) = at;

        if diag_hit {
            // 1x1 pivot at (pi, pi)
            swap_sym(&mut a, &mut t, start, pi);
            let pivot = a[(start, start)].clone();
            for r in (start + 1)..n {
                if a[(r, start)].is_zero() {
                    continue;
                }
                let f = &a[(r, start)] / &pivot;
                row_sub(&mut a, &mut t, r, start, &f, n);
            }
            pieces.push((u32::try_from(vmin).expect("integral gram"), vec![start]));
            start += 1;
        } else if !is_two {
            // odd p: a row combination makes a diagonal entry of the same
            // valuation; one of +/- works
            let (i, j) = (pi, pj);
            let plus = &a[(i, i)] + &a[(j, j)] + BigRational::from(BigInt::from(2)) * &a[(i, j)];
            let f = if !plus.is_zero() && rat_valuation(&plus, p) == vmin {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            row_add(&mut a, &mut t, i, j, &f, n);
            debug_assert_eq!(rat_valuation(&a[(i, i)], p), vmin);
            continue;
        } else {
            // p = 2: 2x2 block pivot at rows (pi, pj)
            swap_sym(&mut a, &mut t, start, pi);
            let pj = if pj == start { pi } else { pj };
            swap_sym(&mut a, &mut t, start + 1, pj);
            let (i, j) = (start, start + 1);
            let det = &a[(i, i)] * &a[(j, j)] - &a[(i, j)] * &a[(i, j)];
            debug_assert_eq!(rat_valuation(&det, p), 2 * vmin);
            let det_inv = det.recip();
            let (aii, aij, ajj) = (a[(i, i)].clone(), a[(i, j)].clone(), a[(j, j)].clone());
            for r in (start + 2)..n {
                let (ri, rj) = (a[(r, i)].clone(), a[(r, j)].clone());
                if ri.is_zero() && rj.is_zero() {
                    continue;
                }
                let ci = (&ri * &ajj - &rj * &aij) * &det_inv;
                let cj = (&rj * &aii - &ri * &aij) * &det_inv;
                row_sub(&mut a, &mut t, r, i, &ci, n);
                row_sub(&mut a, &mut t, r, j, &cj, n);
            }
            pieces.push((u32::try_from(vmin).expect("integral gram"), vec![start, start + 1]));
            start += 2;
        }
    }

    // merge pieces per scale, ascending
    let mut scales: Vec<u32> = pieces.iter().map(|(s, _)| *s).collect();
    scales.sort_unstable();
    scales.dedup();
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    let mut blocks = Vec::new();
    for s in scales {
        let mut idx = Vec::new();
        for (ps, rows) in &pieces {
            if *ps == s {
                idx.extend_from_slice(rows);
            }
        }
        let pk = BigRational::from(p.pow(s));
        let unit = RationalMatrix::from_fn(idx.len(), idx.len(), |x, y| {
            &a[(idx[x], idx[y])] / &pk
        });
        blocks.push((s, unit));
        perm.extend_from_slice(&idx);
    }
    let tp = RationalMatrix::from_fn(n, n, |i, j| t[(perm[i], j)].clone());

    #[cfg(debug_assertions)]
    {
        let conj = tp.mul(g).mul(&tp.transpose());
        let mut off = 0usize;
        for (s, unit) in &blocks {
            let pk = BigRational::from(p.pow(*s));
            for x in 0..unit.rows {
                for y in 0..unit.rows {
                    debug_assert_eq!(conj[(off + x, off + y)], &unit[(x, y)] * &pk);
                }
            }
            off += unit.rows;
        }
    }
    Ok((tp, blocks))
}

fn swap_sym(a: &mut RationalMatrix, t: &mut RationalMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap_rows(i, j);
    a.swap_cols(i, j);
    t.swap_rows(i, j);
}

/// row_r -= f * row_s (and the symmetric column operation) on a; row op on t.
fn row_sub(a: &mut RationalMatrix, t: &mut RationalMatrix, r: usize, s: usize, f: &BigRational, n: usize) {
    for c in 0..n {
        let x = f * &a[(s, c)];
        a[(r, c)] -= x;
    }
    for c in 0..n {
        let x = f * &a[(c, s)];
        a[(c, r)] -= x;
    }
    for c in 0..n {
        let x = f * &t[(s, c)];
        t[(r, c)] -= x;
    }
}

/// row_i += f * row_j symmetric update (used to surface a diagonal pivot).
fn row_add(a: &mut RationalMatrix, t: &mut RationalMatrix, i: usize, j: usize, f: &BigRational, n: usize) {
    for c in 0..n {
        let x = f * &a[(j, c)];
        a[(i, c)] += x;
    }
    for c in 0..n {
        let x = f * &a[(c, j)];
        a[(c, i)] += x;
    }
    for c in 0..n {
        let x = f * &t[(j, c)];
        t[(i, c)] += x;
    }
}
