//! Bohr sets in abelian groups and the multiplicative systems they generate.
//!
//! Characters are evaluated through a computed decomposition of the group
//! into cyclic factors; a frequency is a tuple of residues against that
//! decomposition.

use crate::error::{Error, Result};
use crate::group::GroupTable;
use crate::msys::{verify_system, MultiplicativeSystem, SystemLevel};
use crate::subset::{product_set, Subset};

/// A cyclic-factor decomposition of an abelian group: generators with orders
/// whose internal direct product is the whole group, plus the exponent
/// vector of every element.
#[derive(Debug, Clone)]
pub struct CyclicDecomposition {
    pub generators: Vec<usize>,
    pub orders: Vec<usize>,
    /// exponents[x] = (a_1, ..., a_k) with x = prod g_i^{a_i}.
    pub exponents: Vec<Vec<usize>>,
}

/// Bohr set parameters: frequency tuples against the computed decomposition
/// and a width delta in (0, 2].
#[derive(Debug, Clone)]
pub struct BohrSpec {
    pub frequencies: Vec<Vec<usize>>,
    pub width: f64,
}

fn elem_order(group: &GroupTable, x: usize) -> usize {
    let mut p = x;
    let mut k = 1;
    while p != group.id() {
        p = group.mul(p, x);
        k += 1;
    }
    k
}

/// Decompose an abelian group into cyclic factors.
///
/// Recursive splitting: a maximal-order element generates a direct summand,
/// and a basis of the quotient lifts to a complement after correcting each
/// representative by a power of the summand generator.
pub fn cyclic_decomposition(group: &GroupTable) -> Result<CyclicDecomposition> {
    if !group.is_abelian() {
        return Err(Error::NotAbelian);
    }
    let n = group.order();
    let mul_table: Vec<Vec<usize>> = (0..n)
        .map(|a| (0..n).map(|b| group.mul(a, b)).collect())
        .collect();
    let basis = decompose_local(&mul_table);
    let generators: Vec<usize> = basis.iter().map(|&(g, _)| g).collect();
    let orders: Vec<usize> = basis.iter().map(|&(_, o)| o).collect();

    // Enumerate all products to map each element to its exponent vector.
    let mut exponents: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut stack = vec![(group.id(), vec![0usize; generators.len()])];
    exponents[group.id()] = Some(vec![0; generators.len()]);
    while let Some((x, exps)) = stack.pop() {
        for (i, (&g, &o)) in generators.iter().zip(&orders).enumerate() {
            if exps[i] + 1 < o {
                let y = group.mul(x, g);
                if exponents[y].is_none() {
                    let mut e = exps.clone();
                    e[i] += 1;
                    exponents[y] = Some(e.clone());
                    stack.push((y, e));
                }
            }
        }
    }
    let exponents: Vec<Vec<usize>> = exponents
        .into_iter()
        .map(|e| e.expect("decomposition does not cover the group"))
        .collect();
    Ok(CyclicDecomposition {
        generators,
        orders,
        exponents,
    })
}

/// Basis of an abelian group given by a local multiplication table, as
/// (element, order) pairs. Deterministic: ties broken by smallest id.
fn decompose_local(mul: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let n = mul.len();
    if n == 1 {
        return Vec::new();
    }
    let ord = |x: usize| -> usize {
        let mut p = x;
        let mut k = 1;
        while p != 0 {
            p = mul[p][x];
            k += 1;
        }
        k
    };
    let powl = |x: usize, e: usize| -> usize {
        let mut acc = 0;
        for _ in 0..e {
            acc = mul[acc][x];
        }
        acc
    };
    let g = (0..n).max_by_key(|&x| (ord(x), std::cmp::Reverse(x))).unwrap();
    let ng = ord(g);
    // Cyclic subgroup of g and the position of each of its elements.
    let mut cyc_index = vec![usize::MAX; n];
    let mut p = 0;
    for s in 0..ng {
        cyc_index[p] = s;
        p = mul[p][g];
    }
    // Quotient by <g>: canonical coset representative is the minimal member.
    let mut coset_of = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for x in 0..n {
        if coset_of[x] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..ng).scan(x, |acc, _| {
            let cur = *acc;
            *acc = mul[*acc][g];
            Some(cur)
        })
        .collect();
        let id = reps.len();
        reps.push(*members.iter().min().unwrap());
        for m in members {
            coset_of[m] = id;
        }
    }
    // Make the identity coset local id 0.
    let zero = coset_of[0];
    if zero != 0 {
        reps.swap(0, zero);
        for c in coset_of.iter_mut() {
            if *c == zero {
                *c = 0;
            } else if *c == 0 {
                *c = zero;
            }
        }
    }
    let m = reps.len();
    let qmul: Vec<Vec<usize>> = (0..m)
        .map(|a| (0..m).map(|b| coset_of[mul[reps[a]][reps[b]]]).collect())
        .collect();
    let mut out = vec![(g, ng)];
    for (hq, mh) in decompose_local(&qmul) {
        let h = reps[hq];
        let hm = powl(h, mh);
        let s = cyc_index[hm];
        debug_assert!(s != usize::MAX && s % mh == 0);
        let u = s / mh;
        // h' = h g^{-u} has exact order mh and stays independent of <g>.
        let h2 = mul[h][powl(g, (ng - u % ng) % ng)];
        out.push((h2, mh));
    }
    out
}

/// |gamma(x) - 1| for the character indexed by the residue tuple `freq`.
fn char_distance(dec: &CyclicDecomposition, freq: &[usize], x: usize) -> f64 {
    // phase = sum a_i t_i / n_i mod 1; |e^{2 pi i phase} - 1| = 2 |sin(pi phase)|
    let mut phase = 0.0f64;
    for ((&a, &t), &o) in dec.exponents[x].iter().zip(freq).zip(&dec.orders) {
        phase += (a * t) as f64 / o as f64;
    }
    2.0 * (std::f64::consts::PI * phase.fract()).sin().abs()
}

/// Bohr(Gamma, delta) = {x : |gamma(x) - 1| <= delta for all gamma in Gamma}.
pub fn bohr_set(group: &GroupTable, dec: &CyclicDecomposition, spec: &BohrSpec) -> Result<Subset> {
    if !group.is_abelian() {
        return Err(Error::NotAbelian);
    }
    for f in &spec.frequencies {
        if f.len() != dec.orders.len() {
            return Err(Error::BadDescriptor(format!(
                "frequency tuple has length {}, expected {}",
                f.len(),
                dec.orders.len()
            )));
        }
    }
    let mut out = Subset::empty(group);
    for x in 0..group.order() {
        if spec
            .frequencies
            .iter()
            .all(|f| char_distance(dec, f, x) <= spec.width + 1e-9)
        {
            out.insert(x);
        }
    }
    Ok(out)
}

/// Build a 1-step epsilon-closed system out of Bohr-set dilates by the
/// pigeonhole of the Bohr example: scan l upward, j upward, accept the first
/// (l, j) whose dilate sandwich passes the exact verifier.
///
/// With B_1 = Bohr(Gamma, delta/l) and M_j = j*B_1 + Bohr(Gamma, delta) the
/// emitted system is (M_{j+2}, M_j, B_{0-}; B_1): M_{j+2} absorbs the
/// two-sided translation by B_1, and B_{0-} is the largest dilate M_{j'}
/// (j' scanned downward) that still satisfies closure, falling back to the
/// exact translate intersection {z : z + 2 B_1 within M_j}.
pub fn bohr_system(
    group: &GroupTable,
    spec: &BohrSpec,
    epsilon: f64,
) -> Result<(MultiplicativeSystem, usize, usize)> {
    if !group.is_abelian() {
        return Err(Error::NotAbelian);
    }
    assert!(epsilon > 0.0 && epsilon <= 1.0);
    let dec = cyclic_decomposition(group)?;
    let outer = bohr_set(group, &dec, spec)?;
    let fits = |big: usize, small: usize| big as f64 <= (1.0 + epsilon) * small as f64 + 1e-12;

    for l in 1..=group.order() {
        let inner = bohr_set(
            group,
            &dec,
            &BohrSpec {
                frequencies: spec.frequencies.clone(),
                width: spec.width / l as f64,
            },
        )?;
        // dilates[j] = j*inner + outer
        let mut dilates = vec![outer.clone()];
        let max_j = group.order().min(4 * l + 4);
        for _ in 0..max_j + 2 {
            let next = product_set(group, dilates.last().unwrap(), &inner)?;
            dilates.push(next);
        }
        for j in 2..=max_j {
            if !fits(dilates[j + 1].card(), dilates[j].card())
                || !fits(dilates[j + 2].card(), dilates[j].card())
            {
                continue;
            }
            let minus = (0..=j.saturating_sub(2))
                .rev()
                .map(|jp| dilates[jp].clone())
                .find(|c| fits(dilates[j].card(), c.card()))
                .or_else(|| {
                    let cand = translate_core(group, &dilates[j], &inner).ok()?;
                    (!cand.is_empty() && fits(dilates[j].card(), cand.card())).then_some(cand)
                });
            let Some(minus) = minus else { continue };
            let sys = MultiplicativeSystem::new(
                vec![SystemLevel {
                    plus: dilates[j + 2].clone(),
                    mid: dilates[j].clone(),
                    minus,
                }],
                inner.clone(),
                epsilon,
            );
            if verify_system(group, &sys).passed() {
                return Ok((sys, l, j));
            }
        }
    }
    Err(Error::PigeonholeExhausted {
        max_l: group.order(),
    })
}

/// {z : z B B within M} for symmetric B — the exact translate intersection.
fn translate_core(group: &GroupTable, m: &Subset, b: &Subset) -> Result<Subset> {
    let bb = product_set(group, b, b)?;
    let mut out = Subset::empty(group);
    'z: for z in 0..group.order() {
        for w in bb.iter() {
            if !m.contains(group.mul(z, w)) {
                continue 'z;
            }
        }
        out.insert(z);
    }
    Ok(out)
}

/// Convenience: order of an element (used by tests and the CLI catalog).
pub fn order_of(group: &GroupTable, x: usize) -> usize {
    elem_order(group, x)
}
