//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.
//!
//! The oracles here are written independently of the library code paths
//! they check.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use la_nav::artifacts::{emit_artifacts, PROBS_FILE, SUMMARY_FILE, TRAJECTORY_FILE};
use la_nav::automata::*;
use la_nav::kinematics::*;
use la_nav::runner::*;
use la_nav::world::Point;

type Outcome = Result<String, String>;

const SEEDS: std::ops::RangeInclusive<u64> = 1..=100;

// ---------------------------------------------------------------------------
// Independent oracles

/// Reward rule written as a convex blend: p' = (1 − a)·p + a·e_i.
fn oracle_favorable(p: &[f64], i: usize, a: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len());
    for (j, v) in p.iter().enumerate() {
        let indicator = if j == i { 1.0 } else { 0.0 };
        out.push((1.0 - a) * v + a * indicator);
    }
    out
}

/// Penalty rule: p' = (1 − b)·p + b/(r − 1)·(1 − e_i).
fn oracle_unfavorable(p: &[f64], i: usize, b: f64) -> Vec<f64> {
    let r = p.len() as f64;
    let mut out = Vec::with_capacity(p.len());
    for (j, v) in p.iter().enumerate() {
        let others = if j == i { 0.0 } else { 1.0 };
        out.push((1.0 - b) * v + b * others / (r - 1.0));
    }
    out
}

/// Continuous rule: a reward step of size a·(1 − β).
fn oracle_s_model(p: &[f64], i: usize, beta: f64, a: f64) -> Vec<f64> {
    oracle_favorable(p, i, a * (1.0 - beta))
}

/// Cumulative-sum selection exactly as a straight loop: first index whose
/// running sum reaches z.
fn oracle_select(p: &[f64], z: f64) -> usize {
    let mut sum = 0.0;
    for (ind, v) in p.iter().enumerate() {
        sum += v;
        if sum >= z {
            return ind;
        }
    }
    p.len() - 1
}

fn random_vector<R: Rng>(rng: &mut R, r: usize) -> ProbabilityVector {
    let raw: Vec<f64> = (0..r).map(|_| rng.gen_range(1e-3..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    ProbabilityVector::new(raw.into_iter().map(|v| v / sum).collect()).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn median(mut v: Vec<u32>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    }
}

// ---------------------------------------------------------------------------
// Criteria

fn ac1_update_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let r = rng.gen_range(2..=10);
        let p = random_vector(&mut rng, r);
        let i = rng.gen_range(0..r);
        let a: f64 = rng.gen();
        let b: f64 = rng.gen();
        let beta: f64 = rng.gen();
        let s_a = rng.gen_range(1e-6..1.0 - 1e-6);
        let ps = p.as_slice();
        worst = worst
            .max(max_abs_diff(
                update_p_favorable(&p, i, a).unwrap().as_slice(),
                &oracle_favorable(ps, i, a),
            ))
            .max(max_abs_diff(
                update_p_unfavorable(&p, i, b).unwrap().as_slice(),
                &oracle_unfavorable(ps, i, b),
            ))
            .max(max_abs_diff(
                update_s_model(&p, i, beta, s_a).unwrap().as_slice(),
                &oracle_s_model(ps, i, beta, s_a),
            ));
    }
    let elapsed = start.elapsed();
    let detail = format!("max |diff| {worst:.3e} over 1e5 tuples x 3 rules, {elapsed:.2?}");
    if worst <= 1e-12 && elapsed < Duration::from_secs(10) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac2_normalization() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B);
    let mut p = init_uniform(6).unwrap();
    let mut worst_sum: f64 = 0.0;
    let mut out_of_range = 0usize;
    for _ in 0..1_000_000 {
        let i = rng.gen_range(0..6);
        let (raw, next) = match rng.gen_range(0..3) {
            0 => {
                let a: f64 = rng.gen();
                (favorable_components(&p, i, a), update_p_favorable(&p, i, a))
            }
            1 => {
                let b: f64 = rng.gen();
                (
                    unfavorable_components(&p, i, b),
                    update_p_unfavorable(&p, i, b),
                )
            }
            _ => {
                let beta: f64 = rng.gen();
                let a = rng.gen_range(1e-6..1.0 - 1e-6);
                (
                    s_model_components(&p, i, beta, a),
                    update_s_model(&p, i, beta, a),
                )
            }
        };
        worst_sum = worst_sum.max((raw.unwrap().iter().sum::<f64>() - 1.0).abs());
        p = next.unwrap();
        if p.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
            out_of_range += 1;
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "max |sum-1| before renormalization {worst_sum:.3e}, {out_of_range} out-of-range, {elapsed:.2?}"
    );
    if worst_sum <= 1e-9 && out_of_range == 0 && elapsed < Duration::from_secs(30) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac3_selection() -> Outcome {
    let target = [0.05, 0.10, 0.15, 0.20, 0.22, 0.28];
    let p = ProbabilityVector::new(target.to_vec()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5E1EC7);
    let n = 100_000;
    let mut counts = [0u64; 6];
    for _ in 0..n {
        counts[select_action(&p, rng.gen()).unwrap()] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(target)
        .map(|(&c, q)| {
            let expected = q * n as f64;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new(5.0).unwrap().cdf(chi2);

    let uniform = init_uniform(6).unwrap();
    let mut ucounts = [0u64; 6];
    for _ in 0..n {
        ucounts[select_action(&uniform, rng.gen()).unwrap()] += 1;
    }
    let uniform_dev = ucounts
        .iter()
        .map(|&c| (c as f64 / n as f64 - 1.0 / 6.0).abs())
        .fold(0.0, f64::max);

    let mut mismatches = 0;
    for _ in 0..10_000 {
        let r = rng.gen_range(2..=10);
        let q = random_vector(&mut rng, r);
        let z: f64 = rng.gen();
        if select_action(&q, z).unwrap() != oracle_select(q.as_slice(), z) {
            mismatches += 1;
        }
    }

    let detail = format!(
        "chi2 {chi2:.3} (df 5) p-value {p_value:.4}; uniform max dev {uniform_dev:.4}; {mismatches}/10000 scan mismatches"
    );
    if p_value > 0.01 && uniform_dev <= 0.01 && mismatches == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac4_kinematic_closure() -> Outcome {
    let base = RobotParams::default();
    let turn = RobotParams {
        action_duration: base.full_turn_duration(),
        ..base
    };
    let mut closure: f64 = 0.0;
    for action in [
        Action::RightForward,
        Action::LeftForward,
        Action::RightBackward,
        Action::LeftBackward,
    ] {
        let end = integrate_action(&RobotPose::ORIGIN, action, &turn);
        closure = closure.max(end.x.hypot(end.y));
    }

    let expected = base.wheel_radius * base.wheel_speed * base.action_duration;
    let mut straight: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let start = RobotPose::new(
            rng.gen_range(-50.0..50.0),
            rng.gen_range(-50.0..50.0),
            rng.gen_range(-7.0..7.0),
        );
        for action in [Action::Forward, Action::Backward] {
            let end = integrate_action(&start, action, &base);
            straight = straight.max((start.distance_to(&end) - expected).abs());
            // Heading is along (−sin θ, cos θ).
            let sign = if action == Action::Forward { 1.0 } else { -1.0 };
            let ex = start.x - sign * expected * start.theta.sin();
            let ey = start.y + sign * expected * start.theta.cos();
            straight = straight.max((end.x - ex).abs()).max((end.y - ey).abs());
        }
    }
    let detail = format!(
        "full-circle closure {closure:.3e} cm (substeps {}), straight-line error {straight:.3e} cm",
        base.substeps
    );
    if closure <= 1e-4 && straight <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Campaign {
    batches: Vec<(u8, BatchResult, Duration)>,
}

impl Campaign {
    fn run() -> Self {
        let seeds: Vec<u64> = SEEDS.collect();
        let batches = PRESET_IDS
            .iter()
            .map(|&id| {
                let cfg = preset(id).unwrap();
                let start = Instant::now();
                let batch = run_batch(&cfg, &seeds, 4).unwrap();
                (id, batch, start.elapsed())
            })
            .collect();
        Self { batches }
    }

    fn get(&self, id: u8) -> (&BatchResult, Duration) {
        let (_, b, t) = self.batches.iter().find(|(i, _, _)| *i == id).unwrap();
        (b, *t)
    }

    fn steps(&self, id: u8) -> Vec<u32> {
        self.get(id).0.records().map(|r| r.total_steps).collect()
    }
}

fn ac5_convergence(c: &Campaign) -> Outcome {
    let (batch, elapsed) = c.get(1);
    let cfg = preset(1).unwrap();
    let close_goals = batch
        .records()
        .filter(|r| r.world.goal.distance(&Point::ORIGIN) < 20.0)
        .count();
    let rate = batch.summary.success_rate;
    let detail = format!(
        "preset 1: {}/{} reached goal ({:.0}%), max_steps {}, {} goals closer than 20 cm, {elapsed:.2?}",
        batch.summary.goal_reached,
        batch.summary.runs,
        100.0 * rate,
        cfg.max_steps,
        close_goals
    );
    if rate >= 0.90
        && batch.summary.runs == 100
        && cfg.max_steps == 5000
        && close_goals == 0
        && elapsed < Duration::from_secs(60)
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac6_ordinal_difficulty(c: &Campaign) -> Outcome {
    let goals = |id| -> Vec<Point> { c.get(id).0.records().map(|r| r.world.goal).collect() };
    let shared = goals(1) == goals(2) && goals(2) == goals(3);
    let (m1, m2, m3) = (median(c.steps(1)), median(c.steps(2)), median(c.steps(3)));
    let detail =
        format!("median steps: preset 1 {m1}, preset 2 {m2}, preset 3 {m3}; shared goals {shared}");
    if shared && m1 < m2 && m1 < m3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac7_obstacle_avoidance(c: &Campaign) -> Outcome {
    let (batch, _) = c.get(4);
    let mut inside = 0usize;
    let mut points = 0usize;
    for r in batch.records() {
        if r.world.obstacles.len() != 2 {
            return Err(format!(
                "seed {} has {} obstacles",
                r.seed,
                r.world.obstacles.len()
            ));
        }
        for pose in std::iter::once(&r.start).chain(r.steps.iter().map(|s| &s.pose_after)) {
            points += 1;
            if r.world.in_obstacle(&Point::from(pose)) {
                inside += 1;
            }
        }
    }
    let rate = batch.summary.success_rate;
    let (m1, m4) = (median(c.steps(1)), median(c.steps(4)));
    let detail = format!(
        "{inside}/{points} trajectory points inside obstacles; success {:.0}%; median steps preset 4 {m4} vs preset 1 {m1}",
        100.0 * rate
    );
    if inside == 0 && batch.summary.runs == 100 && rate >= 0.70 && m4 >= m1 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac8_determinism() -> Outcome {
    let mut compared = 0;
    for id in PRESET_IDS {
        for seed in [1u64, 8, 55] {
            let cfg = preset(id).unwrap().with_seed(seed);
            let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
            for d in &dirs {
                let record = run_episode(&cfg).unwrap();
                emit_artifacts(&record, &cfg, d.path()).unwrap();
            }
            for f in [TRAJECTORY_FILE, PROBS_FILE, SUMMARY_FILE] {
                let a = fs::read(dirs[0].path().join(f)).unwrap();
                let b = fs::read(dirs[1].path().join(f)).unwrap();
                if a != b {
                    return Err(format!("preset {id} seed {seed}: {f} differs"));
                }
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} file pairs byte-identical"))
}

fn ac9_s_p_coincidence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5AFE);
    let mut worst: f64 = 0.0;
    let mut identity_breaks = 0;
    for _ in 0..10_000 {
        let r = rng.gen_range(2..=10);
        let p = random_vector(&mut rng, r);
        let i = rng.gen_range(0..r);
        let a = rng.gen_range(1e-6..1.0 - 1e-6);
        let s = update_s_model(&p, i, 0.0, a).unwrap();
        let f = update_p_favorable(&p, i, a).unwrap();
        worst = worst.max(max_abs_diff(s.as_slice(), f.as_slice()));
        let same = update_s_model(&p, i, 1.0, a).unwrap();
        let bits =
            |v: &ProbabilityVector| v.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        if bits(&same) != bits(&p) {
            identity_breaks += 1;
        }
    }
    let detail =
        format!("max |S(β=0) − favorable| {worst:.3e}; {identity_breaks} bitwise breaks at β=1");
    if worst <= 1e-12 && identity_breaks == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("[PASS] {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("[FAIL] {name}: {detail}");
        }
    };

    report("AC1 update-rule oracle equivalence", ac1_update_oracle());
    report("AC2 normalization invariant", ac2_normalization());
    report("AC3 selection fidelity", ac3_selection());
    report("AC4 kinematic closure", ac4_kinematic_closure());
    let campaign = Campaign::run();
    report("AC5 reward-penalty convergence", ac5_convergence(&campaign));
    report("AC6 ordinal difficulty", ac6_ordinal_difficulty(&campaign));
    report("AC7 obstacle avoidance", ac7_obstacle_avoidance(&campaign));
    report("AC8 determinism", ac8_determinism());
    report("AC9 S/P coincidence", ac9_s_p_coincidence());

    if failed == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
