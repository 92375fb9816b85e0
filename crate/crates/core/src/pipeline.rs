//! The density-increment state machine and its self-contained certificates.
//!
//! A run either terminates with a TRIPLE_COUNT certificate — an exact lower
//! bound on solutions of x z = y^2 in A, backed by a pointwise-verified
//! injection — or exhausts its iteration cap and emits the full chain of
//! measured increments for diagnosis.

use crate::config::RunConfig;
use crate::counting::{count_triples, EquationKind};
use crate::croot_sisask::{build_system, conjugate_intersection};
use crate::error::{Error, Result};
use crate::group::GroupTable;
use crate::increment::{u1_step, u2_step, Increment, U1Outcome, U2Outcome};
use crate::msys::MultiplicativeSystem;
use crate::subset::{left_translate, right_translate, square_image, Subset};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One recorded step of the increment chain. For increment outcomes,
/// `b0_hex` / `b1_hex` are the middle and tail sets of the 1-step system
/// the increment ran on, so a checker can recompute the witnessed density
/// by direct counting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainStep {
    pub index: usize,
    pub outcome: String,
    pub alpha: f64,
    pub g: usize,
    pub h: usize,
    pub x_hex: String,
    pub y_hex: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_z: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub new_density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b0_hex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b1_hex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<usize>,
    pub measured: BTreeMap<String, f64>,
}

/// A self-contained, independently checkable run record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    /// Group descriptor, parseable by `GroupTable::from_descriptor`.
    pub group: String,
    pub group_order: usize,
    /// SHA-256 of the multiplication table.
    pub group_hash: String,
    pub equation: String,
    pub subset_hex: String,
    pub alpha0: f64,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_hex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_hex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_hex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triples_lower_bound: Option<u64>,
    pub iterations: usize,
    pub chain: Vec<ChainStep>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization")
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad certificate: {e}")))
    }
}

#[allow(clippy::too_many_arguments)]
fn increment_step(
    index: usize,
    outcome: &str,
    alpha: f64,
    g: usize,
    h: usize,
    x: &Subset,
    y: &Subset,
    inc: &Increment,
    sys: &MultiplicativeSystem,
    anchor: Option<usize>,
) -> ChainStep {
    ChainStep {
        index,
        outcome: outcome.to_string(),
        alpha,
        g,
        h,
        x_hex: x.to_hex(),
        y_hex: y.to_hex(),
        side: Some(inc.side.clone()),
        witness_z: Some(inc.z),
        new_density: Some(inc.new_density),
        b0_hex: Some(sys.mid(0).to_hex()),
        b1_hex: Some(sys.tail.to_hex()),
        anchor,
        measured: inc.measured.clone(),
    }
}

/// Trim the larger of the two sets to the size of the smaller by removing
/// elements in ascending id order (deterministic).
fn trim_to_equal(u: &mut Subset, v: &mut Subset) {
    while u.card() > v.card() {
        let e = u.iter().next().unwrap();
        u.remove(e);
    }
    while v.card() > u.card() {
        let e = v.iter().next().unwrap();
        v.remove(e);
    }
}

/// Run the density-increment iteration for x z = y^2 on A.
pub fn run_iteration(group: &GroupTable, a: &Subset, cfg: &RunConfig) -> Result<Certificate> {
    a.check_group(group)?;
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let alpha0 = a.card() as f64 / group.order() as f64;
    let cap = cfg.iteration_cap(alpha0);
    let mut cert = Certificate {
        kind: String::new(),
        group: group.name().to_string(),
        group_order: group.order(),
        group_hash: group.table_hash(),
        equation: "square".into(),
        subset_hex: a.to_hex(),
        alpha0,
        config: cfg.clone(),
        anchor: None,
        u_hex: None,
        v_hex: None,
        w_hex: None,
        triples_lower_bound: None,
        iterations: 0,
        chain: Vec::new(),
    };

    let mut x = group.full_subset();
    let mut g = group.id();
    let mut h = group.id();
    let mut alpha_cur = alpha0;

    for i in 0..=cap {
        cert.iterations = i + 1;
        let eps = cfg.epsilon(alpha_cur);
        let y = conjugate_intersection(group, &x, g, h, cfg)?;
        let (sys2, s_frame, _) = build_system(group, &y, 1, eps, cfg)?;
        // 1-step view for U1: (B'_0+, B'_0, B'_0-; B'_1-).
        let sys_u1 =
            MultiplicativeSystem::new(sys2.levels[..1].to_vec(), sys2.minus(1).clone(), eps);
        match u1_step(group, &sys_u1, a, &s_frame, cfg.c, cfg)? {
            U1Outcome::LeftIncrement(inc) => {
                cert.chain.push(increment_step(
                    i,
                    "LEFT_INCREMENT",
                    alpha_cur,
                    g,
                    h,
                    &x,
                    &y,
                    &inc,
                    &sys_u1,
                    None,
                ));
                g = group.id();
                h = group.inv(inc.z);
                alpha_cur = inc.new_density;
                x = s_frame;
            }
            U1Outcome::RightIncrement(inc) => {
                cert.chain.push(increment_step(
                    i,
                    "RIGHT_INCREMENT",
                    alpha_cur,
                    g,
                    h,
                    &x,
                    &y,
                    &inc,
                    &sys_u1,
                    None,
                ));
                g = inc.z;
                h = group.id();
                alpha_cur = inc.new_density;
                x = s_frame;
            }
            U1Outcome::AnchorFound { anchor, .. } => {
                let anc = anchor.anchor;
                let anc_inv = group.inv(anc);
                let mut u_set = left_translate(group, anc_inv, a)?.intersect(sys2.minus(0))?;
                let mut v_set = right_translate(group, a, anc_inv)?.intersect(sys2.minus(0))?;
                trim_to_equal(&mut u_set, &mut v_set);
                if u_set.is_empty() {
                    return Err(Error::EmptySet);
                }
                let mut w_set = Subset::empty(group);
                for s in a.iter() {
                    let w = group.mul(group.mul(anc_inv, group.sq(s)), anc_inv);
                    if sys2.minus(1).contains(w) {
                        w_set.insert(w);
                    }
                }
                if w_set.is_empty() {
                    return Err(Error::EmptyW);
                }
                // omega: the density of W in B'_1, the natural scale for
                // the count threshold.
                let omega = w_set.card() as f64 / sys2.mid(1).card() as f64;
                match u2_step(
                    group, &sys2, &s_frame, a, &u_set, &v_set, &w_set, omega, cfg,
                )? {
                    U2Outcome::CountLowerBound { n, ip, threshold } => {
                        verify_injection(group, a, anc, &u_set, &v_set, &w_set)?;
                        let brute = count_triples(group, a, EquationKind::Square)?;
                        if n > brute.total {
                            return Err(Error::PreconditionViolated(format!(
                                "claimed bound {n} exceeds brute-force count {}",
                                brute.total
                            )));
                        }
                        let mut measured = BTreeMap::new();
                        measured.insert("ip".to_string(), ip);
                        measured.insert("threshold".to_string(), threshold);
                        measured.insert("omega".to_string(), omega);
                        cert.chain.push(ChainStep {
                            index: i,
                            outcome: "COUNT_LOWER_BOUND".into(),
                            alpha: alpha_cur,
                            g,
                            h,
                            x_hex: x.to_hex(),
                            y_hex: y.to_hex(),
                            side: None,
                            witness_z: None,
                            new_density: None,
                            b0_hex: Some(sys2.mid(0).to_hex()),
                            b1_hex: Some(sys2.mid(1).to_hex()),
                            anchor: Some(anc),
                            measured,
                        });
                        cert.kind = "TRIPLE_COUNT".into();
                        cert.anchor = Some(anc);
                        cert.u_hex = Some(u_set.to_hex());
                        cert.v_hex = Some(v_set.to_hex());
                        cert.w_hex = Some(w_set.to_hex());
                        cert.triples_lower_bound = Some(n);
                        return Ok(cert);
                    }
                    U2Outcome::LeftSystemIncrement { inc, system, s_set } => {
                        let sub = MultiplicativeSystem::new(
                            sys2.levels[..1].to_vec(),
                            system.mid(0).clone(),
                            eps,
                        );
                        cert.chain.push(increment_step(
                            i,
                            "LEFT_SYSTEM_INCREMENT",
                            alpha_cur,
                            g,
                            h,
                            &x,
                            &y,
                            &inc,
                            &sub,
                            Some(anc),
                        ));
                        g = anc;
                        h = group.inv(inc.z);
                        alpha_cur = inc.new_density;
                        x = s_set;
                    }
                    U2Outcome::RightSystemIncrement { inc, system, s_set } => {
                        let sub = MultiplicativeSystem::new(
                            sys2.levels[..1].to_vec(),
                            system.mid(0).clone(),
                            eps,
                        );
                        cert.chain.push(increment_step(
                            i,
                            "RIGHT_SYSTEM_INCREMENT",
                            alpha_cur,
                            g,
                            h,
                            &x,
                            &y,
                            &inc,
                            &sub,
                            Some(anc),
                        ));
                        g = inc.z;
                        h = group.inv(anc);
                        alpha_cur = inc.new_density;
                        x = s_set;
                    }
                }
            }
        }
    }
    cert.kind = "INCREMENT_CHAIN_EXHAUSTED".into();
    Ok(cert)
}

/// The injection behind a TRIPLE_COUNT certificate, verified pointwise:
/// every (r, t) in U x V with s := r t in W yields the solution
/// (a r) (t a) = a s a with a r in A, t a in A, and a s a a square of A.
pub fn verify_injection(
    group: &GroupTable,
    a: &Subset,
    anchor: usize,
    u: &Subset,
    v: &Subset,
    w: &Subset,
) -> Result<()> {
    let squares = square_image(group, a)?;
    for r in u.iter() {
        for t in v.iter() {
            let s = group.mul(r, t);
            if !w.contains(s) {
                continue;
            }
            let ar = group.mul(anchor, r);
            let ta = group.mul(t, anchor);
            let asa = group.mul(group.mul(anchor, s), anchor);
            if !a.contains(ar) || !a.contains(ta) {
                return Err(Error::InclusionViolated(format!(
                    "injection image ({ar}, {ta}) escapes A"
                )));
            }
            if !squares.contains(asa) {
                return Err(Error::InclusionViolated(format!(
                    "injection product {asa} is not a square of A"
                )));
            }
            if group.mul(ar, ta) != asa {
                return Err(Error::PreconditionViolated(
                    "injection identity (a r)(t a) = a s a fails".into(),
                ));
            }
        }
    }
    Ok(())
}
