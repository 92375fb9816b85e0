//! Finite groups as explicit multiplication tables.
//!
//! Element ids are dense integers `0..|G|-1` with id 0 the identity, so every
//! group operation is a table lookup and subsets can live in bit-vectors.

use crate::error::{Error, Result};
use crate::subset::Subset;
use sha2::{Digest, Sha256};

/// Full associativity check up to this order; sampled above.
pub const FULL_CHECK_CAP: usize = 512;
/// Hard cap on group order (and permutation closures).
pub const ORDER_CAP: usize = 5040;

const ASSOC_SAMPLES: usize = 200_000;

/// A finite group given by its Cayley table, with precomputed inverses and
/// squares. Immutable after construction.
#[derive(Debug, Clone)]
pub struct GroupTable {
    name: String,
    order: usize,
    mul: Vec<u16>,
    inv: Vec<u16>,
    sq: Vec<u16>,
    abelian: bool,
    fingerprint: u64,
    hash: [u8; 32],
}

impl PartialEq for GroupTable {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash
    }
}

impl GroupTable {
    /// Build and validate a group from a raw table. The identity may sit at
    /// any id in `mul`; elements are relabelled so the identity becomes 0.
    pub fn from_table(name: &str, mul_rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = mul_rows.len();
        if n == 0 || n > ORDER_CAP {
            return Err(Error::BadDescriptor(format!("bad order {n}")));
        }
        for (r, row) in mul_rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::BadDescriptor(format!("row {r} has wrong length")));
            }
            for &v in row {
                if v >= n {
                    return Err(Error::BadDescriptor(format!("entry {v} out of range")));
                }
            }
        }
        // Find the two-sided identity.
        let mut id = None;
        'outer: for e in 0..n {
            for x in 0..n {
                if mul_rows[e][x] != x || mul_rows[x][e] != x {
                    continue 'outer;
                }
            }
            id = Some(e);
            break;
        }
        let id = id.ok_or_else(|| Error::BadDescriptor("no identity element".into()))?;
        // Relabel so the identity is id 0 (swap labels 0 <-> id).
        let relabel = |x: usize| -> usize {
            if x == id {
                0
            } else if x == 0 {
                id
            } else {
                x
            }
        };
        let mut mul = vec![0u16; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[relabel(a) * n + relabel(b)] = relabel(mul_rows[a][b]) as u16;
            }
        }
        Self::finish(name, n, mul)
    }

    fn finish(name: &str, n: usize, mul: Vec<u16>) -> Result<Self> {
        // Latin square: each row and column is a permutation.
        for r in 0..n {
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for c in 0..n {
                let rv = mul[r * n + c] as usize;
                let cv = mul[c * n + r] as usize;
                if seen_row[rv] {
                    return Err(Error::NotLatinSquare { row: r, col: c });
                }
                if seen_col[cv] {
                    return Err(Error::NotLatinSquare { row: c, col: r });
                }
                seen_row[rv] = true;
                seen_col[cv] = true;
            }
        }
        // Associativity: full scan at small orders, sampled above.
        let m = |a: usize, b: usize| mul[a * n + b] as usize;
        if n <= FULL_CHECK_CAP {
            for a in 0..n {
                for b in 0..n {
                    let ab = m(a, b);
                    for c in 0..n {
                        if m(ab, c) != m(a, m(b, c)) {
                            return Err(Error::NonAssociative { a, b, c });
                        }
                    }
                }
            }
        } else {
            let mut state = 0x9e3779b97f4a7c15u64;
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state as usize % n
            };
            for _ in 0..ASSOC_SAMPLES {
                let (a, b, c) = (next(), next(), next());
                if m(m(a, b), c) != m(a, m(b, c)) {
                    return Err(Error::NonAssociative { a, b, c });
                }
            }
        }
        let mut inv = vec![0u16; n];
        for a in 0..n {
            let mut found = false;
            for b in 0..n {
                if m(a, b) == 0 && m(b, a) == 0 {
                    inv[a] = b as u16;
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::BadDescriptor(format!("element {a} has no inverse")));
            }
        }
        let sq: Vec<u16> = (0..n).map(|a| mul[a * n + a]).collect();
        let abelian = (0..n).all(|a| (0..a).all(|b| m(a, b) == m(b, a)));
        let mut hasher = Sha256::new();
        hasher.update((n as u64).to_le_bytes());
        for &v in &mul {
            hasher.update(v.to_le_bytes());
        }
        let hash: [u8; 32] = hasher.finalize().into();
        let fingerprint = u64::from_le_bytes(hash[..8].try_into().unwrap());
        Ok(GroupTable {
            name: name.to_string(),
            order: n,
            mul,
            inv,
            sq,
            abelian,
            fingerprint,
            hash,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    /// SHA-256 of the multiplication table, hex-encoded. Used to bind
    /// certificates to the exact group they were produced on.
    pub fn table_hash(&self) -> String {
        hex::encode(self.hash)
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    #[inline]
    pub fn id(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    #[inline]
    pub fn sq(&self, a: usize) -> usize {
        self.sq[a] as usize
    }

    pub(crate) fn mul_row(&self, a: usize) -> &[u16] {
        &self.mul[a * self.order..(a + 1) * self.order]
    }

    /// The cyclic group Z/n (written multiplicatively: id k is the residue k).
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadDescriptor("cyclic(0)".into()));
        }
        let mut mul = vec![0u16; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = ((a + b) % n) as u16;
            }
        }
        Self::finish(&format!("cyclic({n})"), n, mul)
    }

    /// The dihedral group of order 2n (symmetries of the n-gon).
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadDescriptor("dihedral(0)".into()));
        }
        // ids 0..n are rotations r^k, ids n..2n are reflections s r^k.
        let ord = 2 * n;
        let enc = |flip: usize, k: usize| flip * n + k;
        let mut mul = vec![0u16; ord * ord];
        for f1 in 0..2 {
            for k1 in 0..n {
                for f2 in 0..2 {
                    for k2 in 0..n {
                        // (s^f1 r^k1)(s^f2 r^k2) = s^(f1+f2) r^(±k1+k2)
                        let k = if f2 == 0 { (k1 + k2) % n } else { (n - k1 % n + k2) % n };
                        let f = (f1 + f2) % 2;
                        mul[enc(f1, k1) * ord + enc(f2, k2)] = enc(f, k) as u16;
                    }
                }
            }
        }
        Self::finish(&format!("dihedral({n})"), ord, mul)
    }

    /// The quaternion group {±1, ±i, ±j, ±k} of order 8.
    pub fn quaternion8() -> Result<Self> {
        // encode q = (-1)^s u with u in {1, i, j, k}: id = 4*s + u.
        // i*j = k, j*k = i, k*i = j, i*i = j*j = k*k = -1.
        let unit_mul = |a: usize, b: usize| -> (usize, usize) {
            // returns (sign flip, unit) for unit product a*b, units 0=1,1=i,2=j,3=k
            match (a, b) {
                (0, u) => (0, u),
                (u, 0) => (0, u),
                (1, 1) | (2, 2) | (3, 3) => (1, 0),
                (1, 2) => (0, 3),
                (2, 3) => (0, 1),
                (3, 1) => (0, 2),
                (2, 1) => (1, 3),
                (3, 2) => (1, 1),
                (1, 3) => (1, 2),
                _ => unreachable!(),
            }
        };
        let mut mul = vec![0u16; 64];
        for s1 in 0..2 {
            for u1 in 0..4 {
                for s2 in 0..2 {
                    for u2 in 0..4 {
                        let (sf, u) = unit_mul(u1, u2);
                        let s = (s1 + s2 + sf) % 2;
                        mul[(4 * s1 + u1) * 8 + (4 * s2 + u2)] = (4 * s + u) as u16;
                    }
                }
            }
        }
        Self::finish("quaternion8", 8, mul)
    }

    /// The symmetric group S_n for n <= 5.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 5 {
            return Err(Error::BadDescriptor(format!("symmetric({n}) unsupported")));
        }
        let perms = all_permutations(n);
        Self::from_permutations(&format!("symmetric({n})"), &perms)
    }

    /// Closure of a set of generator permutations (on points `0..deg`).
    pub fn from_perm_generators(name: &str, gens: &[Vec<usize>], cap: usize) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::BadDescriptor("no generators".into()));
        }
        let deg = gens[0].len();
        for g in gens {
            if g.len() != deg || !is_permutation(g) {
                return Err(Error::BadDescriptor("generator is not a permutation".into()));
            }
        }
        let identity: Vec<usize> = (0..deg).collect();
        let mut elems: Vec<Vec<usize>> = vec![identity];
        let mut frontier = vec![0usize];
        while let Some(idx) = frontier.pop() {
            let cur = elems[idx].clone();
            for g in gens {
                let prod: Vec<usize> = (0..deg).map(|i| g[cur[i]]).collect();
                if !elems.contains(&prod) {
                    if elems.len() >= cap {
                        return Err(Error::ClosureTooLarge { cap });
                    }
                    elems.push(prod);
                    frontier.push(elems.len() - 1);
                }
            }
        }
        elems.sort();
        Self::from_permutations(name, &elems)
    }

    fn from_permutations(name: &str, perms: &[Vec<usize>]) -> Result<Self> {
        let n = perms.len();
        let deg = perms[0].len();
        let index = |p: &[usize]| perms.iter().position(|q| q == p);
        let mut mul = vec![0u16; n * n];
        for (a, pa) in perms.iter().enumerate() {
            for (b, pb) in perms.iter().enumerate() {
                let prod: Vec<usize> = (0..deg).map(|i| pa[pb[i]]).collect();
                let c = index(&prod)
                    .ok_or_else(|| Error::BadDescriptor("permutation set not closed".into()))?;
                mul[a * n + b] = c as u16;
            }
        }
        // from_table handles relabelling the identity to id 0.
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).map(|b| mul[a * n + b] as usize).collect())
            .collect();
        Self::from_table(name, rows)
    }

    /// Direct product G x H, element (g, h) encoded as g * |H| + h.
    pub fn direct_product(&self, other: &GroupTable) -> Result<Self> {
        let n = self.order * other.order;
        if n > ORDER_CAP {
            return Err(Error::ClosureTooLarge { cap: ORDER_CAP });
        }
        let m = other.order;
        let mut mul = vec![0u16; n * n];
        for a1 in 0..self.order {
            for a2 in 0..m {
                for b1 in 0..self.order {
                    for b2 in 0..m {
                        let a = a1 * m + a2;
                        let b = b1 * m + b2;
                        mul[a * n + b] = (self.mul(a1, b1) * m + other.mul(a2, b2)) as u16;
                    }
                }
            }
        }
        Self::finish(&format!("product({},{})", self.name, other.name), n, mul)
    }

    /// Parse a descriptor like `cyclic(12)`, `dihedral(6)`, `quaternion8`,
    /// `symmetric(4)` or `product(a,b)`.
    pub fn from_descriptor(desc: &str) -> Result<Self> {
        let desc = desc.trim();
        if desc == "quaternion8" {
            return Self::quaternion8();
        }
        if let Some(arg) = strip_call(desc, "cyclic") {
            return Self::cyclic(parse_num(arg)?);
        }
        if let Some(arg) = strip_call(desc, "dihedral") {
            return Self::dihedral(parse_num(arg)?);
        }
        if let Some(arg) = strip_call(desc, "symmetric") {
            return Self::symmetric(parse_num(arg)?);
        }
        if let Some(arg) = strip_call(desc, "product") {
            let (l, r) = split_top_level(arg)
                .ok_or_else(|| Error::BadDescriptor(desc.to_string()))?;
            return Self::from_descriptor(l)?.direct_product(&Self::from_descriptor(r)?);
        }
        Err(Error::BadDescriptor(desc.to_string()))
    }

    /// Parse the line-oriented group file format: a `group <name> <order>`
    /// header followed by either `table` and |G| rows of ids, or `perm` and
    /// one generator per line in cycle notation.
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("group") {
            return Err(Error::Parse("expected `group <name> <order>` header".into()));
        }
        let name = parts
            .next()
            .ok_or_else(|| Error::Parse("missing group name".into()))?;
        let order: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse("missing group order".into()))?;
        match lines.next() {
            Some("table") => {
                let mut rows = Vec::with_capacity(order);
                for _ in 0..order {
                    let line = lines
                        .next()
                        .ok_or_else(|| Error::Parse("truncated table".into()))?;
                    let row: Vec<usize> = line
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad id {t}"))))
                        .collect::<Result<_>>()?;
                    rows.push(row);
                }
                Self::from_table(name, rows)
            }
            Some("perm") => {
                let gens: Vec<Vec<usize>> = lines
                    .map(parse_cycles)
                    .collect::<Result<Vec<_>>>()?;
                let g = Self::from_perm_generators(name, &gens, ORDER_CAP)?;
                if g.order() != order {
                    return Err(Error::Parse(format!(
                        "closure has order {} but header says {order}",
                        g.order()
                    )));
                }
                Ok(g)
            }
            _ => Err(Error::Parse("expected `table` or `perm` section".into())),
        }
    }

    /// Write the group in the `table` file format.
    pub fn to_file(&self) -> String {
        let mut out = format!("group {} {}\ntable\n", self.name, self.order);
        for a in 0..self.order {
            let row: Vec<String> = (0..self.order).map(|b| self.mul(a, b).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn full_subset(&self) -> Subset {
        let mut s = Subset::empty(self);
        for x in 0..self.order {
            s.insert(x);
        }
        s
    }

    pub fn singleton(&self, x: usize) -> Subset {
        let mut s = Subset::empty(self);
        s.insert(x);
        s
    }
}

/// The built-in catalog used by the test suites and the CLI.
pub fn catalog() -> Vec<GroupTable> {
    let mut gs = vec![
        GroupTable::cyclic(1).unwrap(),
        GroupTable::cyclic(4).unwrap(),
        GroupTable::cyclic(5).unwrap(),
        GroupTable::cyclic(7).unwrap(),
        GroupTable::cyclic(8).unwrap(),
        GroupTable::cyclic(12).unwrap(),
        GroupTable::cyclic(16).unwrap(),
        GroupTable::cyclic(24).unwrap(),
        GroupTable::symmetric(3).unwrap(),
        GroupTable::dihedral(4).unwrap(),
        GroupTable::dihedral(6).unwrap(),
        GroupTable::quaternion8().unwrap(),
        GroupTable::symmetric(4).unwrap(),
    ];
    gs.push(
        GroupTable::cyclic(3)
            .unwrap()
            .direct_product(&GroupTable::quaternion8().unwrap())
            .unwrap(),
    );
    gs
}

fn strip_call<'a>(s: &'a str, head: &str) -> Option<&'a str> {
    s.strip_prefix(head)?
        .strip_prefix('(')?
        .strip_suffix(')')
}

fn parse_num(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::BadDescriptor(format!("bad number `{s}`")))
}

/// Split `a,b` at the top-level comma (arguments may themselves contain
/// parenthesised products).
fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

/// Parse cycle notation like `(0 1 2)(3 4)` over points 0..deg, where deg is
/// one past the largest point mentioned.
fn parse_cycles(line: &str) -> Result<Vec<usize>> {
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut rest = line.trim();
    while !rest.is_empty() {
        let open = rest
            .find('(')
            .ok_or_else(|| Error::Parse(format!("bad cycle notation `{line}`")))?;
        let close = rest[open..]
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unbalanced cycle in `{line}`")))?
            + open;
        let cyc: Vec<usize> = rest[open + 1..close]
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad point {t}"))))
            .collect::<Result<_>>()?;
        cycles.push(cyc);
        rest = rest[close + 1..].trim();
    }
    let deg = cycles
        .iter()
        .flat_map(|c| c.iter())
        .max()
        .map(|&m| m + 1)
        .unwrap_or(1);
    let mut perm: Vec<usize> = (0..deg).collect();
    for cyc in &cycles {
        for w in 0..cyc.len() {
            perm[cyc[w]] = cyc[(w + 1) % cyc.len()];
        }
    }
    Ok(perm)
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&v| {
        if v >= p.len() || seen[v] {
            false
        } else {
            seen[v] = true;
            true
        }
    })
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn rec(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(cur, k + 1, out);
            cur.swap(k, i);
        }
    }
    rec(&mut cur, 0, &mut out);
    out.sort();
    out
}
