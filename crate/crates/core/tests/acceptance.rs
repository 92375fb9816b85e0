//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see them on success).

use groth_core::bohr::{bohr_system, BohrSpec};
use groth_core::check::check_certificate;
use groth_core::counting::{
    best_coset_translate, count_triples, largest_abelian_subgroup, max_solution_free,
    EquationKind,
};
use groth_core::croot_sisask::{bogolioubov_neighbourhood, build_system, conjugate_intersection};
use groth_core::group::catalog;
use groth_core::measures::{
    convolve_fn_measure, convolve_measures, pair_fn_measure, tilde_fn, tv_haar_defect,
    uniform_measure, FunctionVec,
};
use groth_core::msys::{
    conjugate_system, glue, subgroup_chain_system, truncate, verify_system,
    MultiplicativeSystem,
};
use groth_core::pipeline::run_iteration;
use groth_core::subset::{
    has_distinct_squares, is_symmetric_neighbourhood, left_translate, power_set_k, product_set,
    Subset,
};
use groth_core::{GroupTable, RunConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_subset(group: &GroupTable, rng: &mut ChaCha8Rng, p: f64) -> Subset {
    let mut s = Subset::empty(group);
    for e in 0..group.order() {
        if rng.gen::<f64>() < p {
            s.insert(e);
        }
    }
    s
}

/// Random symmetric neighbourhood of the identity with density >= target.
fn random_symmetric(group: &GroupTable, rng: &mut ChaCha8Rng, target: f64) -> Subset {
    let mut s = group.singleton(group.id());
    let mut elems: Vec<usize> = (1..group.order()).collect();
    elems.shuffle(rng);
    for e in elems {
        if (s.card() as f64) >= target * group.order() as f64 {
            break;
        }
        s.insert(e);
        s.insert(group.inv(e));
    }
    s
}

/// Independent triple-loop oracle, testing the defining relation directly.
fn oracle_counts(group: &GroupTable, a: &Subset, eq: EquationKind) -> (u64, u64) {
    let (mut total, mut nontrivial) = (0u64, 0u64);
    for x in a.iter() {
        for y in a.iter() {
            for z in a.iter() {
                let holds = match eq {
                    EquationKind::Square => group.mul(x, z) == group.mul(y, y),
                    EquationKind::Invariant => z == group.mul(y, group.mul(group.inv(x), y)),
                };
                if holds {
                    total += 1;
                    if x != y {
                        nontrivial += 1;
                    }
                }
            }
        }
    }
    (total, nontrivial)
}

/// Cyclic subgroup generated by one element.
fn cyclic_closure(group: &GroupTable, g: usize) -> Subset {
    let mut s = group.singleton(group.id());
    let mut cur = g;
    while !s.contains(cur) {
        s.insert(cur);
        cur = group.mul(cur, g);
    }
    s
}

fn pass(n: usize, what: &str, start: Instant) {
    println!(
        "criterion {n}: PASS — {what} ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_01_counting_oracle_equivalence() {
    let start = Instant::now();
    let mut r = rng(101);
    for group in catalog().iter().filter(|g| g.order() <= 24) {
        for trial in 0..200 {
            let a = random_subset(group, &mut r, 0.1 + 0.8 * (trial % 10) as f64 / 10.0);
            for eq in [EquationKind::Square, EquationKind::Invariant] {
                let c = count_triples(group, &a, eq).unwrap();
                let (total, nontrivial) = oracle_counts(group, &a, eq);
                assert_eq!((c.total, c.nontrivial), (total, nontrivial), "{}", group.name());
            }
        }
        let full = count_triples(group, &group.full_subset(), EquationKind::Square).unwrap();
        assert_eq!(full.total, (group.order() * group.order()) as u64);
    }
    assert!(start.elapsed().as_secs() < 10, "over 10s budget");
    pass(1, "pair-loop counts match the triple-loop oracle exactly", start);
}

#[test]
fn criterion_02_solution_free_baseline() {
    let start = Instant::now();
    for group in catalog().iter().filter(|g| g.order() <= 24) {
        let report = max_solution_free(group, EquationKind::Square, 1 << 26).unwrap();
        assert!(report.exhaustive, "{} search not exhaustive", group.name());
        let a = Subset::from_hex(group, &report.best_set).unwrap();
        let c = count_triples(group, &a, EquationKind::Square).unwrap();
        assert_eq!(c.nontrivial, 0, "{} best set not solution-free", group.name());
        assert_eq!(c.total, a.card() as u64, "{} total != |A|", group.name());
        // Distinct squares make the diagonal triples pairwise distinct.
        if has_distinct_squares(group, &a) {
            assert_eq!(c.total, a.card() as u64);
        }
    }
    assert!(start.elapsed().as_secs() < 60, "over 60s budget");
    pass(2, "exhaustive maximum solution-free sets count exactly |A| triples", start);
}

#[test]
fn criterion_03_system_axioms() {
    let start = Instant::now();
    let mut r = rng(303);
    let cfg = RunConfig::default();
    let mut built = 0usize;
    let check = |group: &GroupTable, sys: &MultiplicativeSystem, what: &str| {
        let rep = verify_system(group, sys);
        assert!(rep.passed(), "{} {what}: {:?}", group.name(), rep.first_failure());
    };

    for group in catalog() {
        // Subgroup chains, their conjugates, truncations and glued splits.
        for _ in 0..3 {
            let g = r.gen_range(0..group.order());
            let h1 = cyclic_closure(&group, g);
            let h2 = cyclic_closure(&group, group.mul(g, g));
            let chain = vec![
                group.full_subset(),
                h1.clone(),
                h2.clone(),
                group.singleton(group.id()),
            ];
            let sys = subgroup_chain_system(&group, &chain).unwrap();
            check(&group, &sys, "chain");
            built += 1;

            let conj = conjugate_system(&group, r.gen_range(0..group.order()), &sys).unwrap();
            check(&group, &conj, "conjugate");
            built += 1;

            let trunc = truncate(&group, &sys, 1, sys.r(), &sys.tail).unwrap();
            check(&group, &trunc, "truncate");
            built += 1;
        }
        let g = r.gen_range(0..group.order());
        let h = cyclic_closure(&group, g);
        let front = subgroup_chain_system(&group, &[group.full_subset(), h.clone()]).unwrap();
        let back =
            subgroup_chain_system(&group, &[h.clone(), group.singleton(group.id())]).unwrap();
        let glued = glue(&front, &back).unwrap();
        check(&group, &glued, "glue");
        built += 1;
    }

    // Bohr systems on abelian groups, orders up to 96.
    let abelians = [
        "cyclic(12)",
        "cyclic(16)",
        "cyclic(24)",
        "cyclic(60)",
        "product(cyclic(8),cyclic(12))",
    ];
    for desc in abelians {
        let group = GroupTable::from_descriptor(desc).unwrap();
        for _ in 0..2 {
            let dec = groth_core::bohr::cyclic_decomposition(&group).unwrap();
            let freq: Vec<usize> = dec.orders.iter().map(|&m| r.gen_range(0..m)).collect();
            let spec = BohrSpec {
                frequencies: vec![freq],
                width: 0.5 + r.gen::<f64>(),
            };
            let (sys, _, _) = bohr_system(&group, &spec, 0.05 + r.gen::<f64>() * 0.5).unwrap();
            check(&group, &sys, "bohr");
            built += 1;
        }
    }

    // Built systems from random symmetric sets in small groups.
    for desc in ["cyclic(12)", "cyclic(16)", "dihedral(4)", "quaternion8", "symmetric(3)"] {
        let group = GroupTable::from_descriptor(desc).unwrap();
        for _ in 0..2 {
            let x = random_symmetric(&group, &mut r, 0.5);
            let (sys, _, _) = build_system(&group, &x, 1, 0.25, &cfg).unwrap();
            check(&group, &sys, "build");
            built += 1;
        }
    }

    assert!(built >= 100, "only {built} constructions");
    assert!(start.elapsed().as_secs() < 120, "over 120s budget");
    pass(3, &format!("{built} constructed systems all satisfy the axioms"), start);
}

#[test]
fn criterion_04_certified_inclusions() {
    let start = Instant::now();
    let mut r = rng(404);
    let cfg = RunConfig::default();
    let groups = [
        "cyclic(16)",
        "cyclic(24)",
        "dihedral(6)",
        "quaternion8",
        "symmetric(4)",
        "product(cyclic(8),cyclic(8))",
    ];
    let mut neighbourhoods = 0usize;
    for desc in groups {
        let group = GroupTable::from_descriptor(desc).unwrap();
        for k in [2usize, 3, 9] {
            for _ in 0..3 {
                let x = random_symmetric(&group, &mut r, 0.25);
                let (s, trace) = bogolioubov_neighbourhood(&group, &x, k, &cfg).unwrap();
                assert!(trace.retries <= 8, "{desc}: {} retries", trace.retries);
                assert!(is_symmetric_neighbourhood(&group, &s));
                let sk = power_set_k(&group, &s, k).unwrap();
                let x4 = power_set_k(&group, &x, 4).unwrap();
                assert!(sk.is_subset_of(&x4).unwrap(), "{desc}: S^{k} outside X^4");
                neighbourhoods += 1;
            }
        }
    }
    assert!(neighbourhoods >= 50);

    let mut intersections = 0usize;
    for desc in groups {
        let group = GroupTable::from_descriptor(desc).unwrap();
        for _ in 0..9 {
            let s = random_symmetric(&group, &mut r, 0.3);
            let g = r.gen_range(0..group.order());
            let h = r.gen_range(0..group.order());
            let x = conjugate_intersection(&group, &s, g, h, &cfg).unwrap();
            let x4 = power_set_k(&group, &x, 4).unwrap();
            let s4 = power_set_k(&group, &s, 4).unwrap();
            for c in [g, h] {
                let conj = groth_core::subset::conjugate_set(&group, c, &s4).unwrap();
                assert!(x4.is_subset_of(&conj).unwrap(), "{desc}: X^4 escapes conjugate");
            }
            intersections += 1;
        }
    }
    assert!(intersections >= 50);
    pass(
        4,
        &format!("{neighbourhoods} neighbourhoods and {intersections} intersections certified"),
        start,
    );
}

#[test]
fn criterion_05_measure_calculus_identities() {
    let start = Instant::now();
    let mut r = rng(505);
    let groups: Vec<GroupTable> = catalog().into_iter().filter(|g| g.order() <= 24).collect();

    // Adjoint identity <f * mu, nu> = <mu, f~ * nu>.
    for i in 0..500 {
        let group = &groups[i % groups.len()];
        let f = FunctionVec::from_values(
            group,
            (0..group.order()).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect(),
        );
        let a = loop {
            let a = random_subset(group, &mut r, 0.5);
            if !a.is_empty() {
                break a;
            }
        };
        let b = loop {
            let b = random_subset(group, &mut r, 0.5);
            if !b.is_empty() {
                break b;
            }
        };
        let mu = uniform_measure(group, &a).unwrap();
        let nu = uniform_measure(group, &b).unwrap();
        let lhs = pair_fn_measure(&convolve_fn_measure(group, &f, &mu).unwrap(), &nu);
        let ft = tilde_fn(group, &f).unwrap();
        let rhs = pair_fn_measure(&convolve_fn_measure(group, &ft, &nu).unwrap(), &mu);
        assert!((lhs - rhs).abs() <= 1e-9, "adjoint: {lhs} vs {rhs}");
    }

    // Support identity supp(mu_A * mu_A') = AA'.
    for i in 0..500 {
        let group = &groups[i % groups.len()];
        let a = loop {
            let a = random_subset(group, &mut r, 0.4);
            if !a.is_empty() {
                break a;
            }
        };
        let b = loop {
            let b = random_subset(group, &mut r, 0.4);
            if !b.is_empty() {
                break b;
            }
        };
        let conv = convolve_measures(
            group,
            &uniform_measure(group, &a).unwrap(),
            &uniform_measure(group, &b).unwrap(),
        )
        .unwrap();
        let mut supp = Subset::empty(group);
        for (e, &w) in conv.weights.iter().enumerate() {
            if w > 0.0 {
                supp.insert(e);
            }
        }
        let ab = product_set(group, &a, &b).unwrap();
        assert_eq!(supp.to_hex(), ab.to_hex(), "support identity");
    }

    // Haar defect bound over a pool of systems.
    let cfg = RunConfig::default();
    let mut pool: Vec<(GroupTable, MultiplicativeSystem)> = Vec::new();
    for desc in ["cyclic(12)", "cyclic(16)", "dihedral(4)", "quaternion8", "symmetric(3)"] {
        let group = GroupTable::from_descriptor(desc).unwrap();
        let g = r.gen_range(0..group.order());
        let chain = vec![
            group.full_subset(),
            cyclic_closure(&group, g),
            group.singleton(group.id()),
        ];
        let sys = subgroup_chain_system(&group, &chain).unwrap();
        pool.push((group.clone(), sys));
        let x = random_symmetric(&group, &mut r, 0.5);
        let (sys, _, _) = build_system(&group, &x, 1, 0.25, &cfg).unwrap();
        pool.push((group, sys));
    }
    let mut checked = 0usize;
    while checked < 500 {
        let (group, sys) = &pool[checked % pool.len()];
        let i = r.gen_range(0..=sys.r());
        let next = sys.level_after(i);
        let elems = next.elems();
        let x = elems[r.gen_range(0..elems.len())];
        let defect = tv_haar_defect(group, sys, i, x).unwrap();
        let bound = 2.0 * sys.epsilon / (1.0 + sys.epsilon);
        assert!(defect <= bound + 1e-9, "defect {defect} > bound {bound}");
        checked += 1;
    }
    pass(5, "adjoint, support and Haar-defect identities hold on 1500 instances", start);
}

#[test]
fn criterion_06_increment_recomputation() {
    let start = Instant::now();
    let mut r = rng(606);
    let cfg = RunConfig::default();
    let groups = ["cyclic(7)", "cyclic(12)", "cyclic(16)", "dihedral(4)", "quaternion8", "symmetric(3)", "dihedral(6)"];
    let mut runs = 0usize;
    while runs < 20 {
        let group = GroupTable::from_descriptor(groups[runs % groups.len()]).unwrap();
        let a = loop {
            let p = 0.35 + 0.4 * r.gen::<f64>();
            let a = random_subset(&group, &mut r, p);
            if a.card() >= 2 {
                break a;
            }
        };
        let cert = run_iteration(&group, &a, &cfg).unwrap();
        // The checker recomputes every measured map with direct loops and
        // re-derives each witness as the exhaustive argmax.
        let report = check_certificate(&cert, false);
        assert!(
            report.passed(),
            "{}: {:?}",
            group.name(),
            report.items.iter().find(|i| !i.pass)
        );
        runs += 1;
    }
    pass(6, "measured maps and argmax witnesses reproduced in 20 pipeline runs", start);
}

#[test]
fn criterion_07_end_to_end_certificates() {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let mut r = rng(707);
    let mut certified = 0usize;

    let run_and_check = |group: &GroupTable, a: &Subset| {
        let cert = run_iteration(group, a, &cfg).unwrap();
        let cap = cfg.iteration_cap(a.card() as f64 / group.order() as f64);
        assert!(cert.iterations <= cap, "{}: over iteration cap", group.name());
        let report = check_certificate(&cert, false);
        assert!(
            report.passed(),
            "{}: {:?}",
            group.name(),
            report.items.iter().find(|i| !i.pass)
        );
    };

    // (a) Full group in odd cyclic groups.
    for n in (1..=31usize).step_by(2) {
        let group = GroupTable::cyclic(n).unwrap();
        run_and_check(&group, &group.full_subset());
        certified += 1;
    }

    // (b) Exhaustive maximum solution-free sets.
    let mut descs: Vec<String> = (2..=24).map(|n| format!("cyclic({n})")).collect();
    descs.push("quaternion8".into());
    for desc in descs {
        let group = GroupTable::from_descriptor(&desc).unwrap();
        let report = max_solution_free(&group, EquationKind::Square, 1 << 26).unwrap();
        assert!(report.exhaustive);
        let a = Subset::from_hex(&group, &report.best_set).unwrap();
        run_and_check(&group, &a);
        certified += 1;
    }

    // (c) Random distinct-squares sets of density >= 1/4, order <= 64.
    let pool = [
        ("cyclic(63)", 5),
        ("cyclic(64)", 5),
        ("product(cyclic(8),cyclic(8))", 4),
        ("cyclic(49)", 4),
        ("quaternion8", 2),
    ];
    for (desc, reps) in pool {
        let group = GroupTable::from_descriptor(desc).unwrap();
        for _ in 0..reps {
            // Greedy over a shuffled order: keep an element iff its square
            // is still unused.
            let mut elems: Vec<usize> = (0..group.order()).collect();
            elems.shuffle(&mut r);
            let mut a = Subset::empty(&group);
            let mut used = vec![false; group.order()];
            for e in elems {
                let sq = group.sq(e);
                if !used[sq] {
                    used[sq] = true;
                    a.insert(e);
                }
            }
            assert!(has_distinct_squares(&group, &a));
            assert!(4 * a.card() >= group.order(), "{desc}: density below 1/4");
            run_and_check(&group, &a);
            certified += 1;
        }
    }

    assert!(start.elapsed().as_secs() < 600, "over 10min budget");
    pass(7, &format!("{certified} end-to-end certificates emitted and checked"), start);
}

#[test]
fn criterion_08_translation_invariance() {
    let start = Instant::now();
    let mut r = rng(808);
    for group in catalog() {
        if group.order() == 1 {
            continue;
        }
        if group.is_abelian() {
            for _ in 0..20 {
                let a = random_subset(&group, &mut r, 0.5);
                let sq = count_triples(&group, &a, EquationKind::Square).unwrap();
                let inv = count_triples(&group, &a, EquationKind::Invariant).unwrap();
                assert_eq!((sq.total, sq.nontrivial), (inv.total, inv.nontrivial));
            }
        } else {
            for _ in 0..20 {
                let a = random_subset(&group, &mut r, 0.5);
                let t = r.gen_range(0..group.order());
                let ta = left_translate(&group, t, &a).unwrap();
                let before = count_triples(&group, &a, EquationKind::Invariant).unwrap();
                let after = count_triples(&group, &ta, EquationKind::Invariant).unwrap();
                assert_eq!(
                    (before.total, before.nontrivial),
                    (after.total, after.nontrivial),
                    "{} t={t}",
                    group.name()
                );
            }
        }
    }
    pass(8, "invariant counts survive left translation; abelian counts coincide", start);
}

#[test]
fn criterion_09_coset_translate_bound() {
    let start = Instant::now();
    let mut r = rng(909);
    for group in catalog().iter().filter(|g| !g.is_abelian()) {
        let h = largest_abelian_subgroup(group).unwrap();
        for _ in 0..100 {
            let p = r.gen::<f64>();
            let a = random_subset(group, &mut r, p);
            let (_, th, hits) = best_coset_translate(group, &h, &a).unwrap();
            let bound = (a.card() * h.card()).div_ceil(group.order());
            assert!(hits >= bound, "{}: {hits} < {bound}", group.name());
            assert_eq!(hits, a.intersect(&th).unwrap().card());
        }
    }
    pass(9, "coset translates meet the averaging bound in 100 trials per group", start);
}

#[test]
fn criterion_10_determinism_replay() {
    let start = Instant::now();
    let mut r = rng(1010);
    let cfg = RunConfig::default();
    for desc in ["cyclic(9)", "cyclic(15)", "dihedral(4)", "quaternion8", "symmetric(4)"] {
        let group = GroupTable::from_descriptor(desc).unwrap();
        let a = loop {
            let a = random_subset(&group, &mut r, 0.5);
            if a.card() >= 2 {
                break a;
            }
        };
        let cert = run_iteration(&group, &a, &cfg).unwrap();
        let again = run_iteration(&group, &a, &cert.config).unwrap();
        assert_eq!(cert.to_json(), again.to_json(), "{desc}: replay differs");
    }
    pass(10, "re-running with the embedded config reproduces identical bytes", start);
}
