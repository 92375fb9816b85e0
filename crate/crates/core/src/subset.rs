//! Dense bit-vector subsets of a group and the product-set algebra on them.

use crate::error::{Error, Result};
use crate::group::GroupTable;

/// A subset of a group's elements, stored as a bit-vector indexed by element
/// id. Carries a fingerprint of the owning group so that cross-group set
/// algebra is rejected rather than silently computed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    order: usize,
    fingerprint: u64,
    words: Vec<u64>,
    card: usize,
}

impl Subset {
    pub fn empty(group: &GroupTable) -> Self {
        let order = group.order();
        Subset {
            order,
            fingerprint: group.fingerprint(),
            words: vec![0; order.div_ceil(64)],
            card: 0,
        }
    }

    pub fn from_elems(group: &GroupTable, elems: &[usize]) -> Self {
        let mut s = Self::empty(group);
        for &e in elems {
            s.insert(e);
        }
        s
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.words[x / 64] >> (x % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, x: usize) {
        debug_assert!(x < self.order);
        if !self.contains(x) {
            self.words[x / 64] |= 1 << (x % 64);
            self.card += 1;
        }
    }

    #[inline]
    pub fn remove(&mut self, x: usize) {
        if self.contains(x) {
            self.words[x / 64] &= !(1 << (x % 64));
            self.card -= 1;
        }
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn is_empty(&self) -> bool {
        self.card == 0
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.order).filter(move |&x| self.contains(x))
    }

    pub fn elems(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn check_same(&self, other: &Subset) -> Result<()> {
        if self.fingerprint != other.fingerprint {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    pub(crate) fn check_group(&self, group: &GroupTable) -> Result<()> {
        if self.fingerprint != group.fingerprint() {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    fn recount(&mut self) {
        self.card = self.words.iter().map(|w| w.count_ones() as usize).sum();
    }

    pub fn union(&self, other: &Subset) -> Result<Subset> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
        out.recount();
        Ok(out)
    }

    pub fn intersect(&self, other: &Subset) -> Result<Subset> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
        out.recount();
        Ok(out)
    }

    pub fn difference(&self, other: &Subset) -> Result<Subset> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
        out.recount();
        Ok(out)
    }

    pub fn is_subset_of(&self, other: &Subset) -> Result<bool> {
        self.check_same(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(w, o)| w & !o == 0))
    }

    /// Hex serialization `"<order>:<hex>"`, little-endian within bytes.
    pub fn to_hex(&self) -> String {
        let mut bytes = Vec::with_capacity(self.order.div_ceil(8));
        for i in 0..self.order.div_ceil(8) {
            bytes.push((self.words[i / 8] >> (8 * (i % 8))) as u8);
        }
        format!("{}:{}", self.order, hex::encode(bytes))
    }

    pub fn from_hex(group: &GroupTable, s: &str) -> Result<Subset> {
        let (ord, hx) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("bad subset `{s}`")))?;
        let ord: usize = ord
            .parse()
            .map_err(|_| Error::Parse(format!("bad subset order `{ord}`")))?;
        if ord != group.order() {
            return Err(Error::GroupMismatch);
        }
        let bytes = hex::decode(hx).map_err(|e| Error::Parse(format!("bad hex: {e}")))?;
        if bytes.len() != ord.div_ceil(8) {
            return Err(Error::Parse("subset hex has wrong length".into()));
        }
        let mut out = Subset::empty(group);
        for (i, &b) in bytes.iter().enumerate() {
            out.words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        for x in ord..out.words.len() * 64 {
            if x < out.words.len() * 64 && out.words[x / 64] >> (x % 64) & 1 == 1 {
                return Err(Error::Parse("subset has bits beyond the group order".into()));
            }
        }
        out.recount();
        Ok(out)
    }
}

/// {ab : a in A, b in B}.
pub fn product_set(group: &GroupTable, a: &Subset, b: &Subset) -> Result<Subset> {
    a.check_group(group)?;
    b.check_group(group)?;
    let mut out = Subset::empty(group);
    for x in a.iter() {
        let row = group.mul_row(x);
        for y in b.iter() {
            out.insert(row[y] as usize);
        }
    }
    Ok(out)
}

/// A^k by repeated products; A^1 = A.
pub fn power_set_k(group: &GroupTable, a: &Subset, k: usize) -> Result<Subset> {
    assert!(k >= 1, "power_set_k requires k >= 1");
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut out = a.clone();
    for _ in 1..k {
        out = product_set(group, &out, a)?;
    }
    Ok(out)
}

pub fn inverse_set(group: &GroupTable, a: &Subset) -> Result<Subset> {
    a.check_group(group)?;
    let mut out = Subset::empty(group);
    for x in a.iter() {
        out.insert(group.inv(x));
    }
    Ok(out)
}

/// {gag^{-1} : a in A}.
pub fn conjugate_set(group: &GroupTable, g: usize, a: &Subset) -> Result<Subset> {
    a.check_group(group)?;
    let gi = group.inv(g);
    let mut out = Subset::empty(group);
    for x in a.iter() {
        out.insert(group.mul(group.mul(g, x), gi));
    }
    Ok(out)
}

/// gA.
pub fn left_translate(group: &GroupTable, g: usize, a: &Subset) -> Result<Subset> {
    a.check_group(group)?;
    let mut out = Subset::empty(group);
    for x in a.iter() {
        out.insert(group.mul(g, x));
    }
    Ok(out)
}

/// Ag.
pub fn right_translate(group: &GroupTable, a: &Subset, g: usize) -> Result<Subset> {
    a.check_group(group)?;
    let mut out = Subset::empty(group);
    for x in a.iter() {
        out.insert(group.mul(x, g));
    }
    Ok(out)
}

/// gAh^{-1}.
pub fn two_sided_translate(group: &GroupTable, g: usize, a: &Subset, h: usize) -> Result<Subset> {
    let ga = left_translate(group, g, a)?;
    right_translate(group, &ga, group.inv(h))
}

/// Contains the identity and is closed under inverses.
pub fn is_symmetric_neighbourhood(group: &GroupTable, a: &Subset) -> bool {
    a.contains(group.id()) && a.iter().all(|x| a.contains(group.inv(x)))
}

pub fn is_subgroup(group: &GroupTable, a: &Subset) -> bool {
    if !a.contains(group.id()) {
        return false;
    }
    a.iter()
        .all(|x| a.contains(group.inv(x)) && a.iter().all(|y| a.contains(group.mul(x, y))))
}

/// {a^2 : a in A} as a set.
pub fn square_image(group: &GroupTable, a: &Subset) -> Result<Subset> {
    a.check_group(group)?;
    let mut out = Subset::empty(group);
    for x in a.iter() {
        out.insert(group.sq(x));
    }
    Ok(out)
}

/// True iff the squaring map is injective on A.
pub fn has_distinct_squares(group: &GroupTable, a: &Subset) -> bool {
    let mut seen = vec![false; group.order()];
    for x in a.iter() {
        let s = group.sq(x);
        if seen[s] {
            return false;
        }
        seen[s] = true;
    }
    true
}
