//! Canonicalization of 2-adic symbols.
//!
//! Two spellings of the same 2-adic genus differ by sequences of elementary
//! moves between constituents at nearby scales. Each move used here is
//! backed by an explicit Z_2 change of basis on a two-generator sublattice:
//!
//! - adjacent scales k, k+1, both type I: a diagonal entry a of the first
//!   and b of the second turn into a+2b and a*b*(a+2b) (splitting off the
//!   vector e1 + e2 and its orthogonal complement);
//! - scales k, k+2, both type I: entries a, b turn into a+4b and a*b*(a+4b),
//!   i.e. both oddities gain 4 and both signs flip;
//! - adjacent scales with a type II side: a unit a on the type I side turns
//!   into a+4 (borrowing an isotropic pair coordinate), flipping both signs;
//!   for two adjacent type II constituents both signs flip.
//!
//! The canonical spelling is the lexicographically smallest member of the
//! closure of the input under these moves, with per-constituent data
//! (sign, oddity) compared scale by scale.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Mutex;

use super::blocks2::{det8_of_constituent, feasible_pair};
use super::{BlockType, Constituent, LocalSymbol};
use crate::error::{Error, Result};

const UNITS: [u8; 4] = [1, 3, 5, 7];

/// Orbit cache: every spelling visited by a BFS maps to the same canonical
/// data, so one exploration pays for the whole equivalence class.
type CacheKey = Vec<(u32, u32, bool, i8, u8)>;
type CacheVal = Vec<(i8, u8)>;
fn cache() -> &'static Mutex<HashMap<CacheKey, CacheVal>> {
    static CACHE: std::sync::OnceLock<Mutex<HashMap<CacheKey, CacheVal>>> =
        std::sync::OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cache_key(items: &[Constituent], node: &Node) -> CacheKey {
    items
        .iter()
        .zip(node)
        .map(|(c, &(s, t))| (c.scale, c.rank, c.kind == BlockType::II, s, t))
        .collect()
}

fn sign_of_det8(d: u8) -> i8 {
    match d % 8 {
        1 | 7 => 1,
        _ => -1,
    }
}

/// Spelling state: (sign, oddity) per constituent; scales/ranks/types fixed.
type Node = Vec<(i8, u8)>;

/// Can a diagonal spelling of (rank, sign, oddity) contain the unit `a`?
fn entry_allowed(rank: u32, sign: i8, t: u8, a: u8) -> bool {
    let Ok(d) = det8_of_constituent(&Constituent {
        scale: 0,
        rank,
        sign,
        kind: BlockType::I,
        oddity: t,
    }) else {
        return false;
    };
    if rank == 1 {
        return t == a;
    }
    let d_rest = (u32::from(d) * u32::from(a)) % 8; // a^{-1} = a mod 8
    let t_rest = (t + 8 - a % 8) % 8;
    feasible_pair(rank - 1, d_rest as u8, t_rest)
}

fn apply_entry_change(rank: u32, sign: i8, t: u8, from: u8, to: u8) -> (i8, u8) {
    let d = det8_of_constituent(&Constituent {
        scale: 0,
        rank,
        sign,
        kind: BlockType::I,
        oddity: t,
    })
    .expect("realizable source constituent");
    let d_new = (u32::from(d) * u32::from(from) * u32::from(to)) % 8;
    let t_new = (t + 8 - from % 8 + to % 8) % 8;
    (sign_of_det8(d_new as u8), t_new)
}

pub(crate) fn canonicalize(s: &LocalSymbol) -> Result<LocalSymbol> {
    let items = &s.constituents;
    let m = items.len();
    if m == 0 {
        return Ok(s.clone());
    }
    let start: Node = items.iter().map(|c| (c.sign, c.oddity)).collect();
    if let Some(best) = cache().lock().unwrap().get(&cache_key(items, &start)) {
        let mut out = items.clone();
        for (c, &(sign, t)) in out.iter_mut().zip(best.iter()) {
            c.sign = sign;
            c.oddity = if c.kind == BlockType::II { 0 } else { t };
        }
        return Ok(LocalSymbol { prime: s.prime.clone(), constituents: out });
    }

    // pairs of constituents that can interact, with their scale distance
    let mut pairs: Vec<(usize, usize, u32)> = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let d = items[j].scale - items[i].scale;
            if d == 1 || d == 2 {
                pairs.push((i, j, d));
            }
        }
    }

    let mut seen: BTreeSet<Node> = BTreeSet::new();
    seen.insert(start.clone());
    let mut queue: VecDeque<Node> = VecDeque::new();
    queue.push_back(start);
    while let Some(node) = queue.pop_front() {
        if seen.len() > 1 << 16 {
            return Err(Error::ResourceLimit("2-adic spelling orbit too large".into()));
        }
        for &(i, j, dist) in &pairs {
            let (ki, kj) = (items[i].kind, items[j].kind);
            let mut nexts: Vec<Node> = Vec::new();
            match (ki, kj, dist) {
                (BlockType::I, BlockType::I, 1) => {
                    // transfer move for every admissible pair of units
                    for a in UNITS {
                        if !entry_allowed(items[i].rank, node[i].0, node[i].1, a) {
                            continue;
                        }
                        for b in UNITS {
                            if !entry_allowed(items[j].rank, node[j].0, node[j].1, b) {
                                continue;
                            }
                            let a_new = (a + 2 * b) % 8;
                            let b_new = (u32::from(a) * u32::from(b) * u32::from(a_new) % 8) as u8;
                            let mut next = node.clone();
                            next[i] =
                                apply_entry_change(items[i].rank, node[i].0, node[i].1, a, a_new);
                            next[j] =
                                apply_entry_change(items[j].rank, node[j].0, node[j].1, b, b_new);
                            nexts.push(next);
                        }
                    }
                }
                (BlockType::I, BlockType::I, 2) => {
                    let mut next = node.clone();
                    next[i] = (-node[i].0, (node[i].1 + 4) % 8);
                    next[j] = (-node[j].0, (node[j].1 + 4) % 8);
                    nexts.push(next);
                }
                (BlockType::I, BlockType::II, 1) => {
                    let mut next = node.clone();
                    next[i] = (-node[i].0, (node[i].1 + 4) % 8);
                    next[j] = (-node[j].0, 0);
                    nexts.push(next);
                }
                (BlockType::II, BlockType::I, 1) => {
                    let mut next = node.clone();
                    next[i] = (-node[i].0, 0);
                    next[j] = (-node[j].0, (node[j].1 + 4) % 8);
                    nexts.push(next);
                }
                // two adjacent type II constituents admit no walk on their
                // own: there is no oddity to absorb the compensation
                // (V ⊥ 2V and U ⊥ 2U are distinct genera)
                _ => {}
            }
            for next in nexts {
                if valid_node(items, &next) && seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }

    let best = seen.iter().min_by_key(|n| encode(n)).expect("orbit nonempty");
    {
        let mut c = cache().lock().unwrap();
        if c.len() < 1 << 20 {
            for node in &seen {
                c.insert(cache_key(items, node), best.clone());
            }
        }
    }
    let mut out = items.clone();
    for (c, &(sign, t)) in out.iter_mut().zip(best.iter()) {
        c.sign = sign;
        c.oddity = if c.kind == BlockType::II { 0 } else { t };
    }
    let result = LocalSymbol { prime: s.prime.clone(), constituents: out };

    #[cfg(debug_assertions)]
    {
        let prod = |sym: &LocalSymbol| -> u32 {
            sym.constituents
                .iter()
                .map(|c| u32::from(det8_of_constituent(c).expect("realizable")))
                .product::<u32>()
                % 8
        };
        debug_assert_eq!(prod(s), prod(&result), "canonicalization changed det class");
    }
    Ok(result)
}

fn valid_node(items: &[Constituent], node: &Node) -> bool {
    items.iter().zip(node).all(|(c, &(sign, t))| match c.kind {
        BlockType::II => t == 0,
        BlockType::I => {
            det8_of_constituent(&Constituent {
                scale: c.scale,
                rank: c.rank,
                sign,
                kind: BlockType::I,
                oddity: t,
            })
            .is_ok()
        }
    })
}

/// Comparison key: minus signs late, then small oddities.
fn encode(n: &Node) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 * n.len());
    for &(s, _) in n {
        out.push(u8::from(s == -1));
    }
    for &(_, t) in n {
        out.push(t);
    }
    out
}
