//! Multiplicative systems: the data type, its exact axiom verifier and the
//! basic constructions (subgroup chains, truncation, gluing, conjugation).

use crate::error::{Error, Result};
use crate::group::GroupTable;
use crate::subset::{
    self, is_subgroup, is_symmetric_neighbourhood, left_translate, right_translate, Subset,
};
use serde::{Deserialize, Serialize};

/// One level (B_{i+}, B_i, B_{i-}) of a system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemLevel {
    pub plus: Subset,
    pub mid: Subset,
    pub minus: Subset,
}

/// An (r+1)-step epsilon-closed multiplicative system
/// (B_{0+},B_0,B_{0-}; ...; B_{r+},B_r,B_{r-}; B_{r+1}).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeSystem {
    pub levels: Vec<SystemLevel>,
    pub tail: Subset,
    pub epsilon: f64,
}

/// Outcome of checking one axiom, with a witness on failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<AxiomCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.pass)
    }

    fn push(&mut self, axiom: impl Into<String>, pass: bool, witness: Option<String>) {
        self.checks.push(AxiomCheck {
            axiom: axiom.into(),
            pass,
            witness,
        });
    }
}

impl MultiplicativeSystem {
    pub fn new(levels: Vec<SystemLevel>, tail: Subset, epsilon: f64) -> Self {
        assert!(!levels.is_empty());
        MultiplicativeSystem {
            levels,
            tail,
            epsilon,
        }
    }

    /// Step count r; the system has r+1 levels plus a tail.
    pub fn r(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn mid(&self, i: usize) -> &Subset {
        &self.levels[i].mid
    }

    pub fn plus(&self, i: usize) -> &Subset {
        &self.levels[i].plus
    }

    pub fn minus(&self, i: usize) -> &Subset {
        &self.levels[i].minus
    }

    /// B_{i+1}: the middle set of the next level, or the tail at i = r.
    pub fn level_after(&self, i: usize) -> &Subset {
        if i < self.r() {
            &self.levels[i + 1].mid
        } else {
            &self.tail
        }
    }

    fn components(&self) -> Vec<(String, &Subset)> {
        let mut out = Vec::new();
        for (i, l) in self.levels.iter().enumerate() {
            out.push((format!("B_{i}+"), &l.plus));
            out.push((format!("B_{i}"), &l.mid));
            out.push((format!("B_{i}-"), &l.minus));
        }
        out.push((format!("B_{}", self.levels.len()), &self.tail));
        out
    }
}

/// Check the three axioms exactly: symmetric neighbourhoods, nesting, and
/// two-sided closure with cardinality ratios within 1 + epsilon.
pub fn verify_system(group: &GroupTable, sys: &MultiplicativeSystem) -> VerificationReport {
    let mut report = VerificationReport { checks: Vec::new() };
    let eps = sys.epsilon;

    for (name, s) in sys.components() {
        let ok = is_symmetric_neighbourhood(group, s);
        report.push(
            format!("symmetric neighbourhood: {name}"),
            ok,
            (!ok).then(|| format!("{name} fails symmetry or misses the identity")),
        );
    }

    let comps = sys.components();
    for w in comps.windows(2) {
        let (ref n0, s0) = w[0];
        let (ref n1, s1) = w[1];
        let ok = s1.is_subset_of(s0).unwrap_or(false);
        let witness = (!ok).then(|| {
            let x = s1
                .iter()
                .find(|&x| !s0.contains(x))
                .map(|x| x.to_string())
                .unwrap_or_else(|| "group mismatch".into());
            format!("{n1} not contained in {n0}; witness element {x}")
        });
        report.push(format!("nesting: {n1} subset of {n0}"), ok, witness);
    }

    for i in 0..=sys.r() {
        let next = sys.level_after(i);
        let lvl = &sys.levels[i];
        let mut witness = None;
        'pairs: for y in next.iter() {
            let y_mid = match left_translate(group, y, &lvl.mid) {
                Ok(s) => s,
                Err(_) => {
                    witness = Some("group mismatch".to_string());
                    break 'pairs;
                }
            };
            for x in next.iter() {
                let ymx = right_translate(group, &y_mid, x).unwrap();
                if !lvl.minus.is_subset_of(&ymx).unwrap_or(false) {
                    let e = lvl.minus.iter().find(|&e| !ymx.contains(e)).unwrap();
                    witness = Some(format!("x={x}, y={y}, i={i}: {e} in B_{i}- but not yB_{i}x"));
                    break 'pairs;
                }
                if !ymx.is_subset_of(&lvl.plus).unwrap_or(false) {
                    let e = ymx.iter().find(|&e| !lvl.plus.contains(e)).unwrap();
                    witness = Some(format!("x={x}, y={y}, i={i}: {e} in yB_{i}x but not B_{i}+"));
                    break 'pairs;
                }
            }
        }
        report.push(format!("closure: level {i}"), witness.is_none(), witness);

        let ratio_ok = |big: usize, small: usize| big as f64 <= (1.0 + eps) * small as f64 + 1e-12;
        let up = ratio_ok(lvl.plus.card(), lvl.mid.card());
        report.push(
            format!("cardinality: |B_{i}+| <= (1+eps)|B_{i}|"),
            up,
            (!up).then(|| format!("|B_{i}+| = {}, |B_{i}| = {}", lvl.plus.card(), lvl.mid.card())),
        );
        let down = ratio_ok(lvl.mid.card(), lvl.minus.card());
        report.push(
            format!("cardinality: |B_{i}| <= (1+eps)|B_{i}-|"),
            down,
            (!down).then(|| format!("|B_{i}| = {}, |B_{i}-| = {}", lvl.mid.card(), lvl.minus.card())),
        );
    }
    report
}

/// Keep levels l..=m and attach a new tail B*.
pub fn truncate(
    group: &GroupTable,
    sys: &MultiplicativeSystem,
    l: usize,
    m: usize,
    bstar: &Subset,
) -> Result<MultiplicativeSystem> {
    if l > m || m > sys.r() {
        return Err(Error::BadIndices);
    }
    if !is_symmetric_neighbourhood(group, bstar) {
        return Err(Error::TailNotSymmetric);
    }
    if !bstar.is_subset_of(sys.level_after(m))? {
        return Err(Error::TailNotContained);
    }
    Ok(MultiplicativeSystem::new(
        sys.levels[l..=m].to_vec(),
        bstar.clone(),
        sys.epsilon,
    ))
}

/// Concatenate two systems when B'_{0+} fits inside the first tail.
/// Mismatched epsilons take the max (sound by monotonicity).
pub fn glue(
    sys: &MultiplicativeSystem,
    sys2: &MultiplicativeSystem,
) -> Result<MultiplicativeSystem> {
    if !sys2.levels[0].plus.is_subset_of(&sys.tail)? {
        return Err(Error::GlueConditionViolated);
    }
    let mut levels = sys.levels.clone();
    levels.extend(sys2.levels.iter().cloned());
    Ok(MultiplicativeSystem::new(
        levels,
        sys2.tail.clone(),
        sys.epsilon.max(sys2.epsilon),
    ))
}

/// Componentwise conjugation g B g^{-1}.
pub fn conjugate_system(
    group: &GroupTable,
    g: usize,
    sys: &MultiplicativeSystem,
) -> Result<MultiplicativeSystem> {
    let conj = |s: &Subset| subset::conjugate_set(group, g, s);
    let levels = sys
        .levels
        .iter()
        .map(|l| {
            Ok(SystemLevel {
                plus: conj(&l.plus)?,
                mid: conj(&l.mid)?,
                minus: conj(&l.minus)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiplicativeSystem::new(
        levels,
        conj(&sys.tail)?,
        sys.epsilon,
    ))
}

/// The 0-closed system (H_0,H_0,H_0; ...; H_r,H_r,H_r; H_{r+1}) of a nested
/// descending chain of subgroups.
pub fn subgroup_chain_system(
    group: &GroupTable,
    chain: &[Subset],
) -> Result<MultiplicativeSystem> {
    if chain.len() < 2 {
        return Err(Error::BadIndices);
    }
    for (i, h) in chain.iter().enumerate() {
        if !is_subgroup(group, h) {
            return Err(Error::NotSubgroup { index: i });
        }
    }
    for w in chain.windows(2) {
        if !w[1].is_subset_of(&w[0])? {
            return Err(Error::NotNested);
        }
    }
    let levels = chain[..chain.len() - 1]
        .iter()
        .map(|h| SystemLevel {
            plus: h.clone(),
            mid: h.clone(),
            minus: h.clone(),
        })
        .collect();
    Ok(MultiplicativeSystem::new(
        levels,
        chain.last().unwrap().clone(),
        0.0,
    ))
}

/// JSON wire format for systems (components as hex bitsets).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemJson {
    pub group: String,
    pub epsilon: f64,
    pub r: usize,
    pub levels: Vec<[String; 3]>,
    pub tail: String,
}

impl MultiplicativeSystem {
    pub fn to_json(&self, group: &GroupTable) -> SystemJson {
        SystemJson {
            group: group.name().to_string(),
            epsilon: self.epsilon,
            r: self.r(),
            levels: self
                .levels
                .iter()
                .map(|l| [l.plus.to_hex(), l.mid.to_hex(), l.minus.to_hex()])
                .collect(),
            tail: self.tail.to_hex(),
        }
    }

    pub fn from_json(group: &GroupTable, json: &SystemJson) -> Result<Self> {
        let levels = json
            .levels
            .iter()
            .map(|[p, m, n]| {
                Ok(SystemLevel {
                    plus: Subset::from_hex(group, p)?,
                    mid: Subset::from_hex(group, m)?,
                    minus: Subset::from_hex(group, n)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiplicativeSystem::new(
            levels,
            Subset::from_hex(group, &json.tail)?,
            json.epsilon,
        ))
    }
}
