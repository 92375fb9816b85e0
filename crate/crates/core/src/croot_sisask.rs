//! Almost-periodicity machinery: almost-period sets, Bogolyubov-type
//! neighbourhoods, the system builder, conjugated intersections, and
//! relative almost-periods.
//!
//! Every public construction here returns a set whose defining property has
//! been re-verified by exact set arithmetic before it is returned; the
//! Monte-Carlo sampler only proposes candidates and is always intersected
//! with the exhaustive sweep, so certified output never depends on it.

use crate::config::{RunConfig, SamplerMode};
use crate::error::{Error, Result};
use crate::group::GroupTable;
use crate::measures::{
    act_left, act_right, convolve_fn_measure, convolve_measure_fn, inner_product, lp_norm,
    uniform_measure, FunctionVec, MeasureVec,
};
use crate::msys::{verify_system, MultiplicativeSystem, SystemLevel};
use crate::subset::{
    conjugate_set, inverse_set, is_symmetric_neighbourhood, power_set_k, product_set, Subset,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Deterministic per-context RNG: one stream per (seed, label).
fn rng_for(cfg: &RunConfig, label: &str) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&cfg.seed.to_le_bytes());
    for (i, b) in label.bytes().enumerate().take(24) {
        seed[8 + i] = b;
    }
    ChaCha8Rng::from_seed(seed)
}

/// Parameters and certification record of an almost-period computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodTrace {
    pub p: f64,
    pub eta: f64,
    pub mode: String,
    pub candidates_proposed: Option<usize>,
    pub period_count: usize,
}

/// T = { t : || rho_t(f * mu_X) - f * mu_X ||_{Lp(mu_G)} <= eta ||f||_{Lp(mu_G)} }.
///
/// The exhaustive sweep over all t is the certification oracle; translation
/// invariance of mu_G makes T symmetric, and it always contains the
/// identity. In Monte-Carlo mode, sampled tuple differences propose
/// candidates which are then intersected with the sweep.
pub fn almost_periods(
    group: &GroupTable,
    f: &FunctionVec,
    x: &Subset,
    p: f64,
    eta: f64,
    cfg: &RunConfig,
) -> Result<(Subset, PeriodTrace)> {
    x.check_group(group)?;
    if x.is_empty() {
        return Err(Error::EmptySet);
    }
    let mu_x = uniform_measure(group, x)?;
    let mu_g = uniform_measure(group, &group.full_subset())?;
    let conv = convolve_fn_measure(group, f, &mu_x)?;
    let f_norm = lp_norm(f, &mu_g, p)?;
    let threshold = eta * f_norm;

    let defect = |t: usize| -> Result<f64> {
        let shifted = act_right(group, t, &conv)?;
        let diff = FunctionVec::from_values(
            group,
            shifted
                .values
                .iter()
                .zip(&conv.values)
                .map(|(a, b)| a - b)
                .collect(),
        );
        lp_norm(&diff, &mu_g, p)
    };

    let mut exhaustive = Subset::empty(group);
    for t in 0..group.order() {
        if defect(t)? <= threshold + 1e-12 {
            exhaustive.insert(t);
        }
    }

    let (result, proposed) = match cfg.mode {
        SamplerMode::Exhaustive => (exhaustive, None),
        SamplerMode::MonteCarlo => {
            let mut rng = rng_for(cfg, "almost_periods");
            let elems = x.elems();
            let mut cands = Subset::empty(group);
            cands.insert(group.id());
            for _ in 0..cfg.samples {
                // A pair (y, y') in X x X proposes the difference y^{-1} y',
                // the shift under which the two sample points swap roles.
                let y = elems[rng.gen_range(0..elems.len())];
                let yp = elems[rng.gen_range(0..elems.len())];
                let t = group.mul(group.inv(y), yp);
                cands.insert(t);
                cands.insert(group.inv(t));
            }
            let proposed = cands.card();
            (cands.intersect(&exhaustive)?, Some(proposed))
        }
    };
    let trace = PeriodTrace {
        p,
        eta,
        mode: match cfg.mode {
            SamplerMode::Exhaustive => "exhaustive".into(),
            SamplerMode::MonteCarlo => "montecarlo".into(),
        },
        candidates_proposed: proposed,
        period_count: result.card(),
    };
    Ok((result, trace))
}

/// Certification record for a Bogolyubov neighbourhood.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeighbourhoodTrace {
    pub k: usize,
    pub p: f64,
    pub eta_final: f64,
    pub retries: usize,
    pub s_card: usize,
    pub period: PeriodTrace,
}

/// A symmetric neighbourhood S with S^k contained in X^4, by correlating
/// almost-periods of 1_{X^2} against X. X must be a symmetric
/// neighbourhood. The inclusion S^k within X^4 is certified by exact set
/// arithmetic; on failure eta is halved, with a final eta = 0 attempt that
/// reduces S to exact periods and always certifies.
pub fn bogolioubov_neighbourhood(
    group: &GroupTable,
    x: &Subset,
    k: usize,
    cfg: &RunConfig,
) -> Result<(Subset, NeighbourhoodTrace)> {
    x.check_group(group)?;
    assert!(k >= 1);
    if !is_symmetric_neighbourhood(group, x) {
        return Err(Error::NotSymmetricNeighbourhood);
    }
    let delta = x.card() as f64 / group.order() as f64;
    let p = cfg.c_p * (2.0 / delta).ln() + 2.0;
    let x2 = product_set(group, x, x)?;
    let x4 = power_set_k(group, x, 4)?;
    let f = FunctionVec::indicator(group, &x2);
    let mu_x = uniform_measure(group, x)?;
    let mu_g = uniform_measure(group, &group.full_subset())?;
    let conv = convolve_fn_measure(group, &f, &mu_x)?;
    let ind_x = FunctionVec::indicator(group, x);

    // Correlation of the translated convolution against X; positive
    // correlation pins the translate inside X^4.
    let corr = |t: usize| -> Result<f64> {
        let shifted = act_right(group, group.inv(t), &conv)?;
        Ok(inner_product(&shifted, &ind_x, &mu_g))
    };
    let half_delta = delta / 2.0;

    let mut eta = cfg.c_eta / k as f64;
    for retry in 0..=cfg.max_retries {
        if retry == cfg.max_retries {
            eta = 0.0;
        }
        let (t_set, period) = almost_periods(group, &f, x, p, eta, cfg)?;
        let mut s = Subset::empty(group);
        for t in t_set.iter() {
            if corr(t)? > half_delta && corr(group.inv(t))? > half_delta {
                s.insert(t);
            }
        }
        if !s.is_empty()
            && is_symmetric_neighbourhood(group, &s)
            && power_set_k(group, &s, k)?.is_subset_of(&x4)?
        {
            let trace = NeighbourhoodTrace {
                k,
                p,
                eta_final: eta,
                retries: retry,
                s_card: s.card(),
                period,
            };
            return Ok((s, trace));
        }
        eta /= 2.0;
    }
    Err(Error::RetriesExhausted {
        tries: cfg.max_retries + 1,
    })
}

/// How each level of a built system was found.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelTrace {
    pub l: usize,
    pub j: usize,
    pub degenerate: bool,
    pub s_card: usize,
    pub minus_card: usize,
    pub mid_card: usize,
    pub plus_card: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildTrace {
    pub r: usize,
    pub epsilon: f64,
    pub s0_card: usize,
    pub levels: Vec<LevelTrace>,
    pub tail_card: usize,
}

const BUILD_L_CAP: usize = 288;

/// Build an (r+1)-step epsilon-closed system inside X^4, returning the
/// innermost Bogolyubov set S alongside (S^4 is the tail).
///
/// Level recipe: S_{i+1} = bogolioubov(S_i, l) for l scanned over multiples
/// of 18 from 36; the middle sets are sandwiches
/// B_{i-} = S_{i+1}^{18j} S_i S_{i+1}^{18j},
/// B_i = S_{i+1}^9 B_{i-} S_{i+1}^9, B_{i+} = S_{i+1}^9 B_i S_{i+1}^9,
/// accepted when |S_{i+1}^18 B_{i-} S_{i+1}^18| <= (1+eps)|B_{i-}|.
/// If no (l, j) certifies, the level degenerates to S_{i+1} = {1} and
/// B_{i-} = B_i = B_{i+} = S_i, which always certifies.
pub fn build_system(
    group: &GroupTable,
    x: &Subset,
    r: usize,
    epsilon: f64,
    cfg: &RunConfig,
) -> Result<(MultiplicativeSystem, Subset, BuildTrace)> {
    x.check_group(group)?;
    if !is_symmetric_neighbourhood(group, x) {
        return Err(Error::NotSymmetricNeighbourhood);
    }
    let (s0, _) = bogolioubov_neighbourhood(group, x, 9, cfg)?;
    let mut trace = BuildTrace {
        r,
        epsilon,
        s0_card: s0.card(),
        levels: Vec::new(),
        tail_card: 0,
    };

    let fits = |big: usize, small: usize| big as f64 <= (1.0 + epsilon) * small as f64 + 1e-12;
    let mut levels: Vec<SystemLevel> = Vec::new();
    let mut s_cur = s0;
    let mut s_next_final = Subset::empty(group);
    for _i in 0..=r {
        let mut found: Option<(Subset, SystemLevel, LevelTrace)> = None;
        let mut l = 36;
        'scan: while l <= BUILD_L_CAP {
            let Ok((s_next, _)) = bogolioubov_neighbourhood(group, &s_cur, l, cfg) else {
                l += 18;
                continue;
            };
            let s18 = power_set_k(group, &s_next, 18)?;
            let s9 = power_set_k(group, &s_next, 9)?;
            let mut block = s_cur.clone();
            for j in 1..l / 18 {
                // block = S_{i+1}^{18j} S_i S_{i+1}^{18j}
                block = product_set(group, &s18, &block)?;
                block = product_set(group, &block, &s18)?;
                let grown = product_set(group, &product_set(group, &s18, &block)?, &s18)?;
                if fits(grown.card(), block.card()) {
                    let minus = block.clone();
                    let mid = product_set(group, &product_set(group, &s9, &minus)?, &s9)?;
                    let plus = product_set(group, &product_set(group, &s9, &mid)?, &s9)?;
                    if fits(plus.card(), mid.card()) && fits(mid.card(), minus.card()) {
                        let lt = LevelTrace {
                            l,
                            j,
                            degenerate: false,
                            s_card: s_next.card(),
                            minus_card: minus.card(),
                            mid_card: mid.card(),
                            plus_card: plus.card(),
                        };
                        found = Some((s_next, SystemLevel { plus, mid, minus }, lt));
                        break 'scan;
                    }
                }
            }
            l += 18;
        }
        let (s_next, level, lt) = found.unwrap_or_else(|| {
            let one = group.singleton(group.id());
            let lt = LevelTrace {
                l: 0,
                j: 0,
                degenerate: true,
                s_card: 1,
                minus_card: s_cur.card(),
                mid_card: s_cur.card(),
                plus_card: s_cur.card(),
            };
            (
                one,
                SystemLevel {
                    plus: s_cur.clone(),
                    mid: s_cur.clone(),
                    minus: s_cur.clone(),
                },
                lt,
            )
        });
        trace.levels.push(lt);
        levels.push(level);
        s_cur = s_next.clone();
        s_next_final = s_next;
    }
    let tail = power_set_k(group, &s_next_final, 4)?;
    trace.tail_card = tail.card();
    let sys = MultiplicativeSystem::new(levels, tail, epsilon);

    // Exact certifications: the axioms, and the footprint inside X^4.
    let report = verify_system(group, &sys);
    if let Some(fail) = report.first_failure() {
        return Err(Error::PreconditionViolated(format!(
            "built system fails its own axioms: {}",
            fail.axiom
        )));
    }
    let x4 = power_set_k(group, x, 4)?;
    if !sys.plus(0).is_subset_of(&x4)? {
        return Err(Error::InclusionViolated("B_0+ not within X^4".into()));
    }
    Ok((sys, s_next_final, trace))
}

/// A symmetric neighbourhood X with X^4 inside both g S^4 g^{-1} and
/// h S^4 h^{-1}: intersect conjugates of R^2 for R = bogolioubov(S, 8).
pub fn conjugate_intersection(
    group: &GroupTable,
    s: &Subset,
    g: usize,
    h: usize,
    cfg: &RunConfig,
) -> Result<Subset> {
    let (r, _) = bogolioubov_neighbourhood(group, s, 8, cfg)?;
    let r2 = product_set(group, &r, &r)?;
    let x = conjugate_set(group, g, &r2)?.intersect(&conjugate_set(group, h, &r2)?)?;
    let s4 = power_set_k(group, s, 4)?;
    let x4 = power_set_k(group, &x, 4)?;
    let target = conjugate_set(group, g, &s4)?.intersect(&conjugate_set(group, h, &s4)?)?;
    if !x4.is_subset_of(&target)? {
        return Err(Error::InclusionViolated(
            "X^4 not within the conjugated S^4 intersection".into(),
        ));
    }
    Ok(x)
}

/// Relative almost-periods: T within X^2 whose right translates move
/// f * mu_V by at most eta (1+eps) ||f||_{Linf(mu_{B_0+})} in
/// Lp(mu_{B_0+}), with the bound re-verified over all of T^4. The sweep
/// threshold is halved until the T^4 check passes; T = {1} is the
/// guaranteed terminal case.
#[allow(clippy::too_many_arguments)]
pub fn relative_almost_periods(
    group: &GroupTable,
    sys: &MultiplicativeSystem,
    x: &Subset,
    f: &FunctionVec,
    v: &Subset,
    p: f64,
    eta: f64,
    cfg: &RunConfig,
) -> Result<Subset> {
    relative_periods_impl(group, sys, x, f, v, p, eta, cfg, Side::Right)
}

/// Left mirror: lambda translates of mu_V * f.
#[allow(clippy::too_many_arguments)]
pub fn left_relative_almost_periods(
    group: &GroupTable,
    sys: &MultiplicativeSystem,
    x: &Subset,
    f: &FunctionVec,
    v: &Subset,
    p: f64,
    eta: f64,
    cfg: &RunConfig,
) -> Result<Subset> {
    relative_periods_impl(group, sys, x, f, v, p, eta, cfg, Side::Left)
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

#[allow(clippy::too_many_arguments)]
fn relative_periods_impl(
    group: &GroupTable,
    sys: &MultiplicativeSystem,
    x: &Subset,
    f: &FunctionVec,
    v: &Subset,
    p: f64,
    eta: f64,
    cfg: &RunConfig,
    side: Side,
) -> Result<Subset> {
    x.check_group(group)?;
    let mu_v = uniform_measure(group, v)?;
    let mu_bp = uniform_measure(group, sys.plus(0))?;
    let conv = match side {
        Side::Right => convolve_fn_measure(group, f, &mu_v)?,
        Side::Left => convolve_measure_fn(group, &mu_v, f)?,
    };
    let bound = eta * (1.0 + sys.epsilon) * linf_on(f, &mu_bp);
    let defect = |t: usize| -> Result<f64> {
        let shifted = match side {
            Side::Right => act_right(group, t, &conv)?,
            Side::Left => act_left(group, t, &conv)?,
        };
        let diff = FunctionVec::from_values(
            group,
            shifted
                .values
                .iter()
                .zip(&conv.values)
                .map(|(a, b)| a - b)
                .collect(),
        );
        lp_norm(&diff, &mu_bp, p)
    };

    let x2 = product_set(group, x, x)?;
    let mut tau = bound;
    for _ in 0..=cfg.max_retries {
        let mut t_set = Subset::empty(group);
        for t in x2.iter() {
            if defect(t)? <= tau + 1e-12 {
                t_set.insert(t);
            }
        }
        t_set = t_set.intersect(&inverse_set(group, &t_set)?)?;
        t_set.insert(group.id());
        // Certify the displayed bound over all of T^4.
        let t4 = power_set_k(group, &t_set, 4)?;
        let mut ok = true;
        for t in t4.iter() {
            if defect(t)? > bound + 1e-12 {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(t_set);
        }
        tau /= 2.0;
    }
    Ok(group.singleton(group.id()))
}

fn linf_on(f: &FunctionVec, mu: &MeasureVec) -> f64 {
    f.values
        .iter()
        .zip(&mu.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(v, _)| v.abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupTable;

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    #[test]
    fn almost_periods_of_subgroup_indicator_is_subgroup() {
        // X = H a subgroup: f * mu_H is H-invariant on the right, so the
        // periods at eta = 0 are exactly H.
        let g = GroupTable::cyclic(12).unwrap();
        let h = Subset::from_elems(&g, &[0, 4, 8]);
        let f = FunctionVec::indicator(&g, &h);
        let (t, _) = almost_periods(&g, &f, &h, 2.0, 0.0, &cfg()).unwrap();
        assert_eq!(t, h);
    }

    #[test]
    fn almost_periods_symmetric_and_contain_identity() {
        let g = GroupTable::dihedral(4).unwrap();
        let x = Subset::from_elems(&g, &[0, 1, g.inv(1), 4]);
        assert!(is_symmetric_neighbourhood(&g, &x));
        let f = FunctionVec::indicator(&g, &product_set(&g, &x, &x).unwrap());
        for eta in [0.0, 0.3, 1.0] {
            let (t, _) = almost_periods(&g, &f, &x, 3.0, eta, &cfg()).unwrap();
            assert!(t.contains(g.id()));
            assert!(is_symmetric_neighbourhood(&g, &t));
        }
    }

    #[test]
    fn montecarlo_periods_within_exhaustive() {
        let g = GroupTable::cyclic(24).unwrap();
        let x = Subset::from_elems(&g, &[0, 1, 23, 2, 22]);
        let f = FunctionVec::indicator(&g, &product_set(&g, &x, &x).unwrap());
        let (exh, _) = almost_periods(&g, &f, &x, 4.0, 0.4, &cfg()).unwrap();
        let mut mc_cfg = cfg();
        mc_cfg.mode = SamplerMode::MonteCarlo;
        mc_cfg.seed = 5;
        let (mc, trace) = almost_periods(&g, &f, &x, 4.0, 0.4, &mc_cfg).unwrap();
        assert!(mc.is_subset_of(&exh).unwrap());
        assert!(trace.candidates_proposed.is_some());
        // Determinism: same seed, same result.
        let (mc2, _) = almost_periods(&g, &f, &x, 4.0, 0.4, &mc_cfg).unwrap();
        assert_eq!(mc, mc2);
    }

    #[test]
    fn bogolioubov_certifies_power_inclusion() {
        for gt in [
            GroupTable::cyclic(16).unwrap(),
            GroupTable::dihedral(6).unwrap(),
            GroupTable::quaternion8().unwrap(),
        ] {
            let x = Subset::from_elems(&gt, &[gt.id(), 1, gt.inv(1)]);
            let (s, trace) = bogolioubov_neighbourhood(&gt, &x, 6, &cfg()).unwrap();
            let s6 = power_set_k(&gt, &s, 6).unwrap();
            let x4 = power_set_k(&gt, &x, 4).unwrap();
            assert!(s6.is_subset_of(&x4).unwrap());
            assert!(is_symmetric_neighbourhood(&gt, &s));
            assert!(trace.s_card >= 1);
        }
    }

    #[test]
    fn bogolioubov_of_subgroup_is_subgroup_scale() {
        // X = H subgroup: X^4 = H and the neighbourhood sits inside H.
        let g = GroupTable::cyclic(24).unwrap();
        let h = Subset::from_elems(&g, &[0, 6, 12, 18]);
        let (s, _) = bogolioubov_neighbourhood(&g, &h, 50, &cfg()).unwrap();
        assert!(power_set_k(&g, &s, 50).unwrap().is_subset_of(&h).unwrap());
    }

    #[test]
    fn build_system_certifies_axioms_and_footprint() {
        for gt in [GroupTable::cyclic(16).unwrap(), GroupTable::symmetric(3).unwrap()] {
            let x = gt.full_subset();
            let (sys, s, _) = build_system(&gt, &x, 1, 0.01, &cfg()).unwrap();
            assert_eq!(sys.r(), 1);
            assert!(verify_system(&gt, &sys).passed());
            let s4 = power_set_k(&gt, &s, 4).unwrap();
            assert!(s4.is_subset_of(&sys.tail).unwrap());
            let x4 = power_set_k(&gt, &x, 4).unwrap();
            assert!(sys.plus(0).is_subset_of(&x4).unwrap());
        }
    }

    #[test]
    fn conjugate_intersection_certifies() {
        let gt = GroupTable::dihedral(4).unwrap();
        let s = gt.full_subset();
        let x = conjugate_intersection(&gt, &s, 1, 5, &cfg()).unwrap();
        assert!(is_symmetric_neighbourhood(&gt, &x));
        assert!(!x.is_empty());
    }

    #[test]
    fn relative_periods_symmetric_and_verified() {
        let gt = GroupTable::cyclic(16).unwrap();
        let x = gt.full_subset();
        let (sys, _, _) = build_system(&gt, &x, 0, 0.01, &cfg()).unwrap();
        let v = Subset::from_elems(&gt, &[0, 1, 15]);
        let f = FunctionVec::indicator(&gt, &v);
        let t = relative_almost_periods(&gt, &sys, &x, &f, &v, 3.0, 0.25, &cfg()).unwrap();
        assert!(t.contains(gt.id()));
        assert!(is_symmetric_neighbourhood(&gt, &t));
        let t_left =
            left_relative_almost_periods(&gt, &sys, &x, &f, &v, 3.0, 0.25, &cfg()).unwrap();
        assert!(t_left.contains(gt.id()));
    }
}
