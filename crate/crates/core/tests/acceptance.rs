//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hyperlab::hyperspace::FiniteClosedSet;
use hyperlab::limits::{
    ap_set_test, cluster_set, d_star_estimate, quasifactor_check, recurrence_report, timenet_for_idempotent,
    RecurrenceVerdict, TimeNet,
};
use hyperlab::symbolic::{quasi_order, OffOrbitPanel, QuasiOrder};
use hyperlab::torus::{SkewSystem, TorusPoint};
use hyperlab::{harness, Base, IdempotentTable, Point, SymbolicPoint, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const RADII: [u32; 5] = [2, 4, 8, 16, 32];
const NET_HORIZON: u64 = 1 << 24;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn morse() -> Arc<SystemSpec> {
    Arc::new(SystemSpec::morse_square())
}

fn set(sys: &Arc<SystemSpec>, pts: &[(Base, i64)], eps: f64) -> FiniteClosedSet {
    FiniteClosedSet::from_orbit_points(sys.clone(), pts, eps).unwrap()
}

fn net(table: &IdempotentTable) -> TimeNet {
    let s = SystemSpec::morse_square();
    timenet_for_idempotent(s.subshift().unwrap(), table, &RADII, NET_HORIZON, &OffOrbitPanel::standard())
        .expect("shipped nets exist")
}

fn idempotent_algebra() -> Check {
    let [u1, v1, u2, v2] = IdempotentTable::minimal();
    let all = IdempotentTable::minimal();
    let mut products = 0;
    for s in &all {
        for t in &all {
            let st = s.compose(t);
            for b in Base::ALL {
                ensure(st.image(b) == s.image(t.image(b)), format!("{} on {b}", st.name))?;
            }
            products += 1;
        }
    }
    ensure(u1.compose(&v1).same_action(&v1), "u1v1 != v1")?;
    ensure(v1.compose(&u1).same_action(&u1), "v1u1 != u1")?;
    ensure(u2.compose(&v2).same_action(&v2), "u2v2 != v2")?;
    ensure(v2.compose(&u2).same_action(&u2), "v2u2 != u2")?;
    ensure(quasi_order(&u1, &v1) == QuasiOrder::Equivalent, "u1 !~ v1")?;
    ensure(quasi_order(&u2, &v2) == QuasiOrder::Equivalent, "u2 !~ v2")?;
    ensure(quasi_order(&u1, &u2) == QuasiOrder::Incomparable, "u1, u2 comparable")?;
    let s = SystemSpec::morse_square();
    let q = s.subshift().unwrap();
    let fixed = |t: &IdempotentTable, b: Base| t.fixes(q, &SymbolicPoint::orbit(b, 0));
    for (t, inside, outside) in [
        (&u1, [Base::B, Base::BBar], [Base::A, Base::ABar]),
        (&v1, [Base::B, Base::BBar], [Base::A, Base::ABar]),
        (&u2, [Base::A, Base::ABar], [Base::B, Base::BBar]),
        (&v2, [Base::A, Base::ABar], [Base::B, Base::BBar]),
    ] {
        for b in inside {
            ensure(fixed(t, b), format!("{b} not in F_{}", t.name))?;
        }
        for b in outside {
            ensure(!fixed(t, b), format!("{b} in F_{}", t.name))?;
        }
    }
    Ok(format!("{products} products checked on 4 bases"))
}

fn finite_set_images() -> Check {
    let sys = morse();
    let ab = set(&sys, &[(Base::A, 0), (Base::B, 0)], 0.01);
    let u = IdempotentTable::u1().apply_to_set(&ab).map_err(|e| e.to_string())?;
    let v = IdempotentTable::v1().apply_to_set(&ab).map_err(|e| e.to_string())?;
    ensure(u == set(&sys, &[(Base::B, 0)], 0.01), "u1({a,b}) != {b}")?;
    ensure(v == set(&sys, &[(Base::B, 0), (Base::BBar, 0)], 0.01), "v1({a,b}) != {b,bbar}")?;
    Ok("u1({a,b}) = {b}, v1({a,b}) = {b,bbar}".into())
}

fn finite_set_rule() -> Check {
    let sys = morse();
    let eps = 2f64.powi(-6);
    let u1 = IdempotentTable::u1();
    let net = net(&u1);
    let pool: Vec<(Base, i64)> = Base::ALL.iter().flat_map(|&b| (-2..=2).map(move |k| (b, k))).collect();
    let mut subsets: Vec<Vec<(Base, i64)>> = Vec::new();
    for i in 0..pool.len() {
        subsets.push(vec![pool[i]]);
        for j in i + 1..pool.len() {
            subsets.push(vec![pool[i], pool[j]]);
            for k in j + 1..pool.len() {
                subsets.push(vec![pool[i], pool[j], pool[k]]);
            }
        }
    }
    for a in &subsets {
        let a = set(&sys, a, eps);
        let c = cluster_set(&a, &net, eps).map_err(|e| e.to_string())?;
        let image = u1.apply_to_set(&a).map_err(|e| e.to_string())?;
        ensure(c.converged, format!("not converged on {:?}", a.points()))?;
        ensure(c.result == image, format!("mismatch on {:?}", a.points()))?;
    }
    Ok(format!("{} subsets match point-for-point", subsets.len()))
}

fn idempotency() -> Check {
    let sys = morse();
    let eps = 2f64.powi(-5);
    let inputs: Vec<FiniteClosedSet> = vec![
        set(&sys, &[(Base::A, 0)], eps),
        set(&sys, &[(Base::A, 0), (Base::B, 0)], eps),
        set(&sys, &[(Base::A, 1), (Base::ABar, -2), (Base::BBar, 0)], eps),
        set(&sys, &Base::ALL.map(|b| (b, 0)), eps),
    ];
    let mut worst = 0.0f64;
    for table in IdempotentTable::minimal() {
        let net = net(&table);
        for a in &inputs {
            let once = cluster_set(a, &net, eps).map_err(|e| e.to_string())?;
            let twice = cluster_set(&once.result, &net, eps).map_err(|e| e.to_string())?;
            let d = once.result.hausdorff(&twice.result).map_err(|e| e.to_string())?;
            worst = worst.max(d);
            ensure(d <= eps, format!("{}: d_H = {d}", table.name))?;
        }
    }
    Ok(format!("max d_H = {worst}"))
}

fn group_elements() -> Check {
    let sys = morse();
    let torus = Arc::new(SystemSpec::golden_furstenberg());
    let sets = [
        set(&sys, &[(Base::A, 0), (Base::BBar, 5)], 0.01),
        FiniteClosedSet::new(
            torus.clone(),
            vec![Point::torus(0.1, 0.2), Point::torus(0.7, 0.35)],
            0.01,
        )
        .unwrap(),
    ];
    for a in &sets {
        for t in -8..=8 {
            let c = cluster_set(a, &TimeNet::constant(t), 1e-3).map_err(|e| e.to_string())?;
            let d = c.result.hausdorff(&a.induced_step(t)).map_err(|e| e.to_string())?;
            ensure(d == 0.0 && c.converged, format!("t = {t}: d_H = {d}"))?;
        }
    }
    Ok("d_H = 0 for |t| <= 8".into())
}

fn recurrence_dichotomy() -> Check {
    let sys = morse();
    let eps = 2f64.powi(-4);
    let horizon = 4u64.pow(8);
    let bb = recurrence_report(&set(&sys, &[(Base::B, 0), (Base::BBar, 0)], eps), eps, horizon)
        .map_err(|e| e.to_string())?;
    let ab = recurrence_report(&set(&sys, &[(Base::A, 0), (Base::B, 0)], eps), eps, horizon)
        .map_err(|e| e.to_string())?;
    ensure(bb.verdict == RecurrenceVerdict::SyndeticAtHorizon, "{b,bbar} not syndetic")?;
    ensure(bb.max_gap <= 4u64.pow(5), format!("{{b,bbar}} max gap {}", bb.max_gap))?;
    ensure(ab.verdict == RecurrenceVerdict::GapGrowth, "{a,b} not gap-growth")?;
    ensure(
        ab.second_half_max_gap >= 4 * ab.first_half_max_gap,
        format!("{{a,b}} gaps {} vs {}", ab.second_half_max_gap, ab.first_half_max_gap),
    )?;
    let tuple = ap_set_test(&sys, &[Point::orbit(Base::B, 0), Point::orbit(Base::BBar, 0)], eps, horizon)
        .map_err(|e| e.to_string())?;
    ensure(tuple.verdict == RecurrenceVerdict::SyndeticAtHorizon, "(b,bbar) tuple not syndetic")?;
    Ok(format!(
        "{{b,bbar}} max gap {}; {{a,b}} halves {} / {}",
        bb.max_gap, ab.first_half_max_gap, ab.second_half_max_gap
    ))
}

fn proximality_rates() -> Check {
    let sys = SystemSpec::morse_square();
    let a = Point::orbit(Base::A, 0);
    let b = Point::orbit(Base::B, 0);
    let abar = Point::orbit(Base::ABar, 0);
    for n in 1..=32i64 {
        let d = sys.point_distance(&sys.act(&a, n), &sys.act(&b, n)).unwrap().value();
        ensure(d == 2f64.powi(-(n as i32 + 1)), format!("n = {n}: {d}"))?;
    }
    for n in 0..=10_000i64 {
        let d = sys.point_distance(&sys.act(&a, n), &sys.act(&abar, n)).unwrap().value();
        ensure(d == 1.0, format!("n = {n}: {d}"))?;
    }
    Ok("2^-(n+1) for n <= 32, 1 for n <= 10^4".into())
}

fn proximal_absorption() -> Check {
    let sys = morse();
    let eps = 2f64.powi(-5);
    let net = net(&IdempotentTable::u1());
    let b = cluster_set(&set(&sys, &[(Base::B, 0)], eps), &net, eps).map_err(|e| e.to_string())?;
    let ab = cluster_set(&set(&sys, &[(Base::A, 0), (Base::B, 0)], eps), &net, eps).map_err(|e| e.to_string())?;
    let d = b.result.hausdorff(&ab.result).map_err(|e| e.to_string())?;
    ensure(d <= eps, format!("d_H = {d}"))?;
    Ok(format!("d_H = {d}"))
}

fn skew_closed_form() -> Check {
    let s = SkewSystem::golden();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let start = TorusPoint::new(rng.gen(), rng.gen());
        let mut p = start;
        for n in 1..=10_000u64 {
            p = s.step(p);
            worst = worst.max(s.power(n, start).distance(&p));
        }
    }
    ensure(worst <= 1e-6, format!("max deviation {worst}"))?;
    Ok(format!("max deviation {worst}"))
}

fn furstenberg_density() -> Check {
    let s = SkewSystem::golden();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let targets: Vec<TorusPoint> = (0..20).map(|_| TorusPoint::new(rng.gen(), rng.gen())).collect();
    let report = s.verify_density(&targets, 10_000_000, 0.02).map_err(|e| e.to_string())?;
    let worst = report.worst_approach().unwrap_or(f64::INFINITY);
    ensure(report.all_within(0.05), format!("worst approach {worst}"))?;
    Ok(format!("worst approach {worst:.3e} over 20 targets"))
}

fn quasifactor() -> Check {
    let sys = morse();
    let eps = 2f64.powi(-4);
    let horizon = 4u64.pow(8);
    let bb = d_star_estimate(&set(&sys, &[(Base::B, 0), (Base::BBar, 0)], eps), horizon, eps)
        .map_err(|e| e.to_string())?;
    for m in &bb {
        let pts = m.points();
        let [Point::Symbolic(x), Point::Symbolic(y)] = pts else {
            return Err(format!("member of size {}", pts.len()));
        };
        ensure(x.complement() == *y, "member is not a complement pair")?;
    }
    let rep = quasifactor_check(&bb, eps, horizon).map_err(|e| e.to_string())?;
    ensure(rep.minimal, format!("{{b,bbar}} witness {:?}", rep.witness))?;
    let ab = d_star_estimate(&set(&sys, &[(Base::A, 0), (Base::B, 0)], eps), horizon, eps)
        .map_err(|e| e.to_string())?;
    let rep_ab = quasifactor_check(&ab, eps, horizon).map_err(|e| e.to_string())?;
    let w = rep_ab.witness.clone().ok_or("{a,b} reported minimal")?;
    Ok(format!(
        "{} pair members minimal; {{a,b}}: {} members, member {} misses member {} (best d_H {})",
        bb.len(),
        ab.len(),
        w.from,
        w.unreached,
        w.best_distance
    ))
}

fn random_symbolic_set(rng: &mut ChaCha8Rng, sys: &Arc<SystemSpec>) -> FiniteClosedSet {
    let n = rng.gen_range(1..=32);
    let pts: Vec<(Base, i64)> = (0..n)
        .map(|_| (Base::ALL[rng.gen_range(0..4)], rng.gen_range(-1_000_000..1_000_000)))
        .collect();
    set(sys, &pts, 0.01)
}

fn random_torus_set(rng: &mut ChaCha8Rng, sys: &Arc<SystemSpec>) -> FiniteClosedSet {
    let n = rng.gen_range(1..=32);
    let pts = (0..n).map(|_| Point::torus(rng.gen(), rng.gen())).collect();
    FiniteClosedSet::new(sys.clone(), pts, 0.01).unwrap()
}

fn metric_axioms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let morse = morse();
    let torus = Arc::new(SystemSpec::golden_furstenberg());
    for i in 0..10_000 {
        let (tol, [a, b, c]) = if i % 2 == 0 {
            (0.0, [(); 3].map(|_| random_symbolic_set(&mut rng, &morse)))
        } else {
            (1e-9, [(); 3].map(|_| random_torus_set(&mut rng, &torus)))
        };
        let d = |x: &FiniteClosedSet, y: &FiniteClosedSet| x.hausdorff(y).unwrap();
        let (ab, ba, bc, ac) = (d(&a, &b), d(&b, &a), d(&b, &c), d(&a, &c));
        ensure(ab == ba, format!("asymmetric: {ab} vs {ba}"))?;
        ensure(ac <= ab + bc + tol, format!("triangle: {ac} > {ab} + {bc}"))?;
        ensure(d(&a, &a) == 0.0, "d_H(A, A) != 0")?;
    }
    Ok("10^4 triples (half symbolic, half torus)".into())
}

fn digest(r: &harness::RunRecord) -> Result<Vec<u8>, String> {
    let text = harness::render_machine(r).map_err(|e| e.to_string())?;
    Ok(Sha256::digest(text.as_bytes()).to_vec())
}

fn determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("hyperlab-acceptance-{}", std::process::id()));
    let mut names = Vec::new();
    for scenario in harness::shipped_scenarios().map_err(|e| e.to_string())? {
        let a = harness::run_scenario(&scenario).map_err(|e| e.to_string())?;
        let b = harness::run_scenario(&scenario).map_err(|e| e.to_string())?;
        let (ha, hb) = (digest(&a)?, digest(&b)?);
        ensure(ha == hb, format!("{} differs between runs", scenario.name))?;
        harness::emit_report(&a, &dir.join(&scenario.name)).map_err(|e| e.to_string())?;
        names.push(scenario.name.clone());
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} scenarios hash identically: {}", names.len(), names.join(", ")))
}

type Criterion = (u32, &'static str, Duration, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        (1, "idempotent algebra", Duration::from_secs(1), idempotent_algebra),
        (2, "finite-set table images", Duration::from_secs(1), finite_set_images),
        (3, "finite-set prolongation rule", Duration::from_secs(60), finite_set_rule),
        (4, "idempotency of D_u", Duration::from_secs(60), idempotency),
        (5, "group-element exactness", Duration::from_secs(1), group_elements),
        (6, "recurrence dichotomy", Duration::from_secs(120), recurrence_dichotomy),
        (7, "proximality rates", Duration::from_secs(1), proximality_rates),
        (8, "proximal absorption", Duration::from_secs(60), proximal_absorption),
        (9, "skew-power closed form", Duration::from_secs(10), skew_closed_form),
        (10, "furstenberg density", Duration::from_secs(300), furstenberg_density),
        (11, "quasifactor minimality", Duration::from_secs(300), quasifactor),
        (12, "hyperspace metric axioms", Duration::from_secs(60), metric_axioms),
        (13, "determinism", Duration::from_secs(300), determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over budget {budget:?}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {id:>2} {status} {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
