//! Exact solution counting for xz = y^2 (and its invariant twin), searches
//! for large solution-free sets, and the structural helpers the bounds are
//! measured against (coset translates, abelian subgroups).

use crate::error::{Error, Result};
use crate::group::GroupTable;
use crate::subset::Subset;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Which equation to count solutions of over A^3.
///
/// `Square`: x z = y^2, i.e. z = x^{-1} y^2.
/// `Invariant`: the conjugation-invariant form z = y x^{-1} y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    Square,
    Invariant,
}

impl EquationKind {
    pub fn parse(s: &str) -> Result<EquationKind> {
        match s {
            "square" => Ok(EquationKind::Square),
            "invariant" => Ok(EquationKind::Invariant),
            _ => Err(Error::Parse(format!(
                "unknown equation `{s}` (expected square | invariant)"
            ))),
        }
    }

    /// The z determined by (x, y).
    #[inline]
    pub fn solve_z(&self, group: &GroupTable, x: usize, y: usize) -> usize {
        match self {
            EquationKind::Square => group.mul(group.inv(x), group.sq(y)),
            EquationKind::Invariant => group.mul(group.mul(y, group.inv(x)), y),
        }
    }
}

/// Solution counts over A^3; a solution is trivial when x = y (which
/// forces z = x for both equations, so total - nontrivial = |A|).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleCounts {
    pub total: u64,
    pub nontrivial: u64,
}

/// Count (x, y, z) in A^3 satisfying the equation, by a pair loop:
/// z is determined by (x, y), so only membership of z needs testing.
pub fn count_triples(group: &GroupTable, a: &Subset, eq: EquationKind) -> Result<TripleCounts> {
    a.check_group(group)?;
    let mut total = 0u64;
    let mut nontrivial = 0u64;
    for x in a.iter() {
        for y in a.iter() {
            if a.contains(eq.solve_z(group, x, y)) {
                total += 1;
                if x != y {
                    nontrivial += 1;
                }
            }
        }
    }
    Ok(TripleCounts { total, nontrivial })
}

/// No non-trivial solutions.
pub fn is_solution_free(group: &GroupTable, a: &Subset, eq: EquationKind) -> Result<bool> {
    Ok(count_triples(group, a, eq)?.nontrivial == 0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub group: String,
    pub equation: EquationKind,
    pub best_set: String,
    pub best_elems: Vec<usize>,
    pub best_size: usize,
    /// True when the search proved optimality (full branch and bound).
    pub exhaustive: bool,
    pub nodes_explored: u64,
    pub elapsed_ms: u128,
}

/// Largest solution-free subset. Exhaustive branch and bound with
/// remaining-count pruning for small groups; greedy start plus single-swap
/// local search once the node budget gives out.
pub fn max_solution_free(
    group: &GroupTable,
    eq: EquationKind,
    node_budget: u64,
) -> Result<SearchReport> {
    let start = Instant::now();
    let n = group.order();
    let mut nodes = 0u64;
    let mut best: Vec<usize> = Vec::new();

    // Depth-first over element ids: at depth d decide whether to include d.
    // A partial set stays feasible iff adding each element keeps the set
    // free; we check incrementally against the chosen prefix.
    fn feasible(group: &GroupTable, eq: EquationKind, chosen: &[usize], cand: usize) -> bool {
        let probe = |x: usize, y: usize, z_set: &dyn Fn(usize) -> bool| {
            z_set(eq.solve_z(group, x, y))
        };
        let member = |e: usize| chosen.contains(&e) || e == cand;
        // Any new non-diagonal solution must involve the candidate.
        for &x in chosen.iter().chain(std::iter::once(&cand)) {
            for &y in chosen.iter().chain(std::iter::once(&cand)) {
                if probe(x, y, &|z| member(z)) {
                    let z = eq.solve_z(group, x, y);
                    if !(x == y && y == z) && (x == cand || y == cand || z == cand) {
                        return false;
                    }
                }
            }
        }
        true
    }

    let mut exhaustive = true;
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
    while let Some((next, chosen)) = stack.pop() {
        nodes += 1;
        if nodes > node_budget {
            exhaustive = false;
            break;
        }
        if chosen.len() > best.len() {
            best = chosen.clone();
        }
        if next >= n || chosen.len() + (n - next) <= best.len() {
            continue;
        }
        // Explore "include next" after "skip next" so includes pop first.
        stack.push((next + 1, chosen.clone()));
        if feasible(group, eq, &chosen, next) {
            let mut with = chosen;
            with.push(next);
            stack.push((next + 1, with));
        }
    }

    if !exhaustive {
        local_search(group, eq, &mut best, &mut nodes);
    }

    let best_subset = Subset::from_elems(group, &best);
    debug_assert!(is_solution_free(group, &best_subset, eq)?);
    Ok(SearchReport {
        group: group.name().to_string(),
        equation: eq,
        best_set: best_subset.to_hex(),
        best_elems: best,
        best_size: best_subset.card(),
        exhaustive,
        nodes_explored: nodes,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// Greedy completion plus single-element swaps until a fixed point.
fn local_search(group: &GroupTable, eq: EquationKind, best: &mut Vec<usize>, nodes: &mut u64) {
    let n = group.order();
    let free_with = |set: &[usize]| {
        let s = Subset::from_elems(group, set);
        is_solution_free(group, &s, eq).unwrap_or(false)
    };
    loop {
        let mut improved = false;
        for e in 0..n {
            if best.contains(&e) {
                continue;
            }
            *nodes += 1;
            let mut cand = best.clone();
            cand.push(e);
            if free_with(&cand) {
                *best = cand;
                improved = true;
            }
        }
        if improved {
            continue;
        }
        'swap: for out in 0..best.len() {
            for e1 in 0..n {
                for e2 in e1 + 1..n {
                    if best.contains(&e1) || best.contains(&e2) {
                        continue;
                    }
                    *nodes += 1;
                    let mut cand = best.clone();
                    cand.remove(out);
                    cand.push(e1);
                    cand.push(e2);
                    if free_with(&cand) {
                        *best = cand;
                        improved = true;
                        break 'swap;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    best.sort_unstable();
}

/// The translate t H with the most mass of A, together with that mass.
/// Averaging over cosets guarantees the maximum is at least
/// ceil(|A| |H| / |G|), which the function asserts.
pub fn best_coset_translate(
    group: &GroupTable,
    h: &Subset,
    a: &Subset,
) -> Result<(usize, Subset, usize)> {
    h.check_group(group)?;
    a.check_group(group)?;
    if !crate::subset::is_subgroup(group, h) {
        return Err(Error::NotSubgroup { index: 0 });
    }
    let mut best_t = 0;
    let mut best_hits = 0;
    for t in 0..group.order() {
        let th = crate::subset::left_translate(group, t, h)?;
        let hits = th.intersect(a)?.card();
        if hits > best_hits {
            best_t = t;
            best_hits = hits;
        }
    }
    let bound = (a.card() * h.card()).div_ceil(group.order());
    if best_hits < bound {
        return Err(Error::BoundViolated {
            hits: best_hits,
            bound,
        });
    }
    Ok((best_t, crate::subset::left_translate(group, best_t, h)?, best_hits))
}

/// A maximum-cardinality abelian subgroup, by depth-first search over
/// commuting generator sets pruned by centralizers.
pub fn largest_abelian_subgroup(group: &GroupTable) -> Result<Subset> {
    let n = group.order();
    let commutes = |a: usize, b: usize| group.mul(a, b) == group.mul(b, a);
    if group.is_abelian() {
        return Ok(group.full_subset());
    }

    fn span(group: &GroupTable, gens: &[usize]) -> Subset {
        let mut s = group.singleton(group.id());
        let mut frontier = vec![group.id()];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = group.mul(x, g);
                if !s.contains(y) {
                    s.insert(y);
                    frontier.push(y);
                }
            }
        }
        s
    }

    let mut best = group.singleton(group.id());
    // Stack entries: (generators, current span, candidate pool, next id).
    let full_pool: Vec<usize> = (1..n).collect();
    let mut stack: Vec<(Vec<usize>, Subset, Vec<usize>)> =
        vec![(Vec::new(), group.singleton(group.id()), full_pool)];
    while let Some((gens, sp, pool)) = stack.pop() {
        if sp.card() > best.card() {
            best = sp.clone();
        }
        for (i, &g) in pool.iter().enumerate() {
            if sp.contains(g) {
                continue;
            }
            let mut gens2 = gens.clone();
            gens2.push(g);
            let sp2 = span(group, &gens2);
            // The span must stay abelian: all generators commute pairwise
            // and hence so do their products.
            let pool2: Vec<usize> = pool[i + 1..]
                .iter()
                .copied()
                .filter(|&h| commutes(h, g))
                .collect();
            // Upper bound: span times remaining candidates cannot beat best.
            if sp2.card() * (pool2.len() + 1) > best.card() {
                stack.push((gens2, sp2, pool2));
            }
        }
    }
    Ok(best)
}

/// CSV row output for count results.
pub fn counts_to_csv(rows: &[(String, usize, u64, u64)]) -> String {
    let mut out = String::from("group,set_size,solutions,trivial\n");
    for (g, s, c, t) in rows {
        out.push_str(&format!("{g},{s},{c},{t}\n"));
    }
    out
}
