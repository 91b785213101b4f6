// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Exits non-zero when any criterion fails.

use std::time::{Duration, Instant};

use slh_core::check::{
    check_bcc, check_spec_obs_equiv, check_step_ni, check_unwinding, check_wl_preservation, gen_labeling,
    gen_program, gen_secret_variant, gen_state, random_feasible_dirs, Bounds, NamePools, State,
};
use slh_core::cli::run_cli_with;
use slh_core::fixtures::{fixture, Property};
use slh_core::flow::{flow_track, well_labeled};
use slh_core::harden::{harden, HardenVariant, Protection};
use slh_core::ideal::{IdealConfig, IdealKind};
use slh_core::ifc::{wt_cct, wt_ifc};
use slh_core::label::{Label, Labeling};
use slh_core::lang::{parse_com, pretty_com, Com};
use slh_core::machine::{feasible, Machine, OutcomeKind, Step};
use slh_core::seq::{seq_run, SeqKind};
use slh_core::speculative::{spec_run, SpecConfig};
use slh_core::state::{ArrayState, Dir, Obs, ScalarState};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gadget_state(i: u64, secret: u64) -> State {
    let rho = ScalarState::new().with("i", i).with("a1_size", 4);
    let mu = ArrayState::new()
        .with("a1", vec![0, 7, 1, 2])
        .with("a2", vec![0; 1000])
        .with("a3", vec![secret]);
    (rho, mu)
}

fn read(a: &str, i: u64) -> Obs {
    Obs::Read(a.into(), i)
}

fn c1_sequential_traces() -> Outcome {
    let c = fixture(1).unwrap().com();
    for (i, expected) in [
        (1, vec![Obs::Branch(true), read("a1", 1), read("a2", 7)]),
        (4, vec![Obs::Branch(false)]),
    ] {
        let (rho, mu) = gadget_state(i, 42);
        let out = seq_run(&c, &rho, &mu, 200);
        ensure(out.kind == SeqKind::Terminated && out.trace == expected, || {
            format!("i={i}: {:?} {:?}", out.kind, out.trace)
        })?;
    }
    Ok("both traces exact".into())
}

fn c2_speculative_attack() -> Outcome {
    let c = fixture(1).unwrap().com();
    let dirs = vec![Dir::Force, Dir::Load("a3".into(), 0), Dir::Step];
    let mut last = Vec::new();
    for secret in [42, 43] {
        let (rho, mu) = gadget_state(4, secret);
        let out = spec_run(SpecConfig::new(c.clone(), rho, mu), &dirs, 200);
        ensure(out.consumed == 3, || format!("consumed {} directives", out.consumed))?;
        last.push(out.trace.last().cloned());
    }
    ensure(last == [Some(read("a2", 42)), Some(read("a2", 43))], || format!("final observations {last:?}"))?;

    let (e, v) = fixture(1).unwrap().repro();
    ensure(e.property == Property::RelSec && e.protection == Protection::None, || format!("{e:?}"))?;
    let v = v.map_err(|e| e.to_string())?;
    let w = v.witness().ok_or("repro holds")?;
    ensure(w.dirs == dirs && w.diverges_at == 3, || format!("witness {:?} at {}", w.dirs, w.diverges_at))?;
    ensure(w.trace1.last() == Some(&read("a2", 42)) && w.trace2.last() == Some(&read("a2", 43)), || {
        format!("{:?} vs {:?}", w.trace1, w.trace2)
    })?;

    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli_with(["slh", "repro", "--listing", "1"], &mut std::io::empty(), &mut out, &mut err);
    let text = String::from_utf8_lossy(&out);
    ensure(code == 1 && text.contains("violated") && text.contains("force load a3 0 step"), || {
        format!("cli exit {code}: {text}")
    })?;
    Ok("witness force; load a3 0; step observes read a2 42 vs 43".into())
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect()
}

fn c3_index_masking() -> Outcome {
    let l1 = fixture(1).unwrap();
    let l2 = fixture(2).unwrap();
    let h = harden(HardenVariant::PlainIslh, &l1.com(), &l1.labels(), "b").map_err(|e| e.to_string())?;
    ensure(squash(&pretty_com(&h)) == squash(l2.program), || pretty_com(&h))?;
    let (s1, s2) = (gadget_state(4, 42), gadget_state(4, 43));
    let v = check_spec_obs_equiv(&l2.com(), &s1, &l2.com(), &s2, false, Bounds { max_dirs: 10, fuel: 200 });
    ensure(v.holds(), || v.to_string())?;
    Ok("masked gadget prints as expected and holds at max-dirs 10".into())
}

fn run_fixture(id: usize, max_dirs: usize) -> Result<usize, String> {
    let f = fixture(id).unwrap();
    let bounds = Bounds { max_dirs, fuel: f.bounds.fuel };
    for e in f.expected {
        let v = f.evaluate(e, bounds).map_err(|err| format!("listing {id} {} {}: {err}", e.property, e.protection))?;
        ensure(v.holds() == e.holds, || format!("listing {id} {} {}: {v}", e.property, e.protection))?;
    }
    Ok(f.expected.len())
}

fn c4_store_masking() -> Outcome {
    let f = fixture(3).unwrap();
    let want = [
        (Protection::Static(HardenVariant::Sislh { mask_stores: false }), false),
        (Protection::Static(HardenVariant::Sislh { mask_stores: true }), true),
        (Protection::Static(HardenVariant::Svslh), true),
    ];
    for (p, holds) in want {
        ensure(f.expected.iter().any(|e| e.property == Property::Sct && e.protection == p && e.holds == holds), || {
            format!("fixture lacks {p}")
        })?;
    }
    let n = run_fixture(3, 6)?;
    Ok(format!("{n} verdicts as expected"))
}

fn c5_dead_code_leaks() -> Outcome {
    let mut n = 0;
    for id in 4..=6 {
        n += run_fixture(id, 6)?;
    }
    Ok(format!("{n} verdicts as expected"))
}

fn c6_equalities() -> Outcome {
    let pools = NamePools::default();
    let sislh = HardenVariant::Sislh { mask_stores: true };
    let mut typed = 0;
    let mut seed = 0;
    while typed < 100 {
        let c = gen_program(seed, 15, &pools);
        let l = gen_labeling(seed, &pools);
        seed += 1;
        if !wt_cct(&l, &c) {
            continue;
        }
        typed += 1;
        let (f, s) = (harden(HardenVariant::Fislh, &c, &l, "b"), harden(sislh, &c, &l, "b"));
        ensure(f == s, || format!("flexible vs selective differ on {}", pretty_com(&c)))?;
    }

    let all_secret = Labeling::all_secret();
    let (mut fi, mut fv) = (0, 0);
    let mut first = None;
    for seed in 0..100 {
        let c = gen_program(seed, 15, &pools);
        let u = harden(HardenVariant::Uslh, &c, &all_secret, "b");
        for (v, count) in [(HardenVariant::Fislh, &mut fi), (HardenVariant::Fvslh, &mut fv)] {
            if harden(v, &c, &all_secret, "b") != u {
                *count += 1;
                first.get_or_insert_with(|| pretty_com(&c));
            }
        }
    }
    ensure(fi == 0 && fv == 0, || {
        format!(
            "{typed} typed programs agree; all-secret mismatches against uslh: fislh {fi}/100, fvslh {fv}/100; \
             first: {}",
            first.unwrap_or_default().replace('\n', " ")
        )
    })?;
    Ok(format!("{typed} typed programs and 100 all-secret programs agree"))
}

fn bcc_trials(kind: IdealKind, trials: u64) -> Result<usize, String> {
    let pools = NamePools::default();
    let mut total = 0;
    let protection = match kind {
        IdealKind::Fislh => Protection::Static(HardenVariant::Fislh),
        IdealKind::Fvslh => Protection::Static(HardenVariant::Fvslh),
        IdealKind::Fs => Protection::FlowSensitive,
    };
    for seed in 0..trials {
        let c = gen_program(seed, 15, &pools);
        let l = gen_labeling(seed ^ 0x5a5a, &pools);
        let flag = seed % 2 == 1;
        let (mut rho, mu) = gen_state(seed, &pools);
        rho.set("b", u64::from(flag));
        let target = protection.apply(&c, &l, "b").map_err(|e| e.to_string())?;
        let cfg = SpecConfig { com: target, rho: rho.clone(), mu: mu.clone(), flag };
        let dirs = random_feasible_dirs(seed, cfg, 8, 200);
        total += dirs.len();
        let ok = check_bcc(kind, &c, &l, &(rho, mu), flag, &dirs, 200, "b").map_err(|e| e.to_string())?;
        ensure(ok, || format!("{kind} seed {seed}: {}", pretty_com(&c).replace('\n', " ")))?;
    }
    Ok(total)
}

fn c7_bcc() -> Outcome {
    let mut dirs = 0;
    for kind in [IdealKind::Fislh, IdealKind::Fvslh, IdealKind::Fs] {
        dirs += bcc_trials(kind, 1000)?;
    }
    Ok(format!("1000 trials per variant, {dirs} directives in total"))
}

fn c8_flow_track_well_labeled() -> Outcome {
    let pools = NamePools::default();
    let mut n = 0;
    for seed in 0..1000 {
        let c = gen_program(seed, 15, &pools);
        for k in 0..3 {
            let l = gen_labeling(seed * 3 + k, &pools);
            let (a, fin) = flow_track(&c, &l, Label::Public);
            ensure(well_labeled(&a, &l, Label::Public, &fin), || pretty_com(&c))?;
            n += 1;
        }
    }
    Ok(format!("{n} analyses well labeled"))
}

fn random_dir<M: Machine>(rng: &mut ChaCha8Rng, m: &M) -> Option<Dir> {
    if m.pending().is_none() {
        return Some(Dir::Step);
    }
    let opts = feasible(m);
    (!opts.is_empty()).then(|| opts[rng.gen_range(0..opts.len())].0.clone())
}

fn fs_config(c: &Com, l: &Labeling, s: &State, flag: bool) -> IdealConfig {
    let (a, _) = flow_track(c, l, Label::Public);
    IdealConfig::flow_sensitive(a, l.clone(), Label::Public, s.0.clone(), s.1.clone(), flag)
}

fn c9_wl_preservation() -> Outcome {
    let pools = NamePools::default();
    let mut steps = 0;
    let mut seed = 0;
    while steps < 1000 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = gen_program(seed, 15, &pools);
        let l = gen_labeling(seed, &pools);
        let (_, fin) = flow_track(&c, &l, Label::Public);
        let mut cfg = fs_config(&c, &l, &gen_state(seed, &pools), rng.gen());
        seed += 1;
        for _ in 0..40 {
            if cfg.is_final() {
                break;
            }
            let Some(d) = random_dir(&mut rng, &cfg) else { break };
            let ok = check_wl_preservation(&cfg, &fin, &d).map_err(|e| format!("seed {}: {e}", seed - 1))?;
            ensure(ok, || format!("seed {}: {} on {d}", seed - 1, pretty_com(&c)))?;
            steps += 1;
            match cfg.step(Some(&d)) {
                Step::Silent(n) | Step::Observed(n, _) => cfg = n,
                _ => break,
            }
        }
    }
    Ok(format!("{steps} steps preserve well-labeledness"))
}

fn ideal_config(kind: IdealKind, c: &Com, l: &Labeling, s: &State, flag: bool) -> IdealConfig {
    match kind {
        IdealKind::Fs => fs_config(c, l, s, flag),
        _ => IdealConfig::of_com(kind, c, l, s.0.clone(), s.1.clone(), flag),
    }
}

fn c10_noninterference() -> Outcome {
    let pools = NamePools::default();
    let bounds = Bounds { max_dirs: 5, fuel: 200 };
    let (mut ni_steps, mut unwound) = (0, 0);
    for kind in [IdealKind::Fislh, IdealKind::Fvslh, IdealKind::Fs] {
        let mut programs = 0;
        let mut seed = 0;
        while programs < 300 {
            let c = gen_program(seed, 12, &pools);
            let l = gen_labeling(seed, &pools);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            seed += 1;
            if kind != IdealKind::Fs && !wt_ifc(&l, Label::Public, &c) {
                continue;
            }
            programs += 1;
            let s1 = gen_state(seed, &pools);
            let s2 = gen_secret_variant(seed, &s1, &l, &pools);

            let flag = rng.gen();
            let (mut m1, mut m2) = (ideal_config(kind, &c, &l, &s1, flag), ideal_config(kind, &c, &l, &s2, flag));
            for _ in 0..40 {
                if m1.is_final() {
                    break;
                }
                let Some(d) = random_dir(&mut rng, &m1) else { break };
                let ok = check_step_ni(&m1, &m2, &d).map_err(|e| format!("{kind} seed {}: {e}", seed - 1))?;
                ensure(ok, || format!("{kind} step seed {}: {}", seed - 1, pretty_com(&c)))?;
                ni_steps += 1;
                match (m1.step(Some(&d)), m2.step(Some(&d))) {
                    (Step::Silent(n1), Step::Silent(n2)) => (m1, m2) = (n1, n2),
                    (Step::Observed(n1, o1), Step::Observed(n2, o2)) if o1 == o2 => (m1, m2) = (n1, n2),
                    _ => break,
                }
            }

            let v = check_unwinding(kind, &c, &l, &s1, &s2, bounds).map_err(|e| e.to_string())?;
            ensure(v.holds(), || format!("{kind} unwinding seed {}: {v}", seed - 1))?;
            unwound += 1;
        }
    }
    Ok(format!("{ni_steps} paired steps, {unwound} unwinding checks"))
}

fn c11_erasure_and_transparency() -> Outcome {
    let pools = NamePools::default();
    let steps = vec![Dir::Step; 200];
    for seed in 0..1000 {
        let c = gen_program(seed, 15, &pools);
        let (rho, mu) = gen_state(seed, &pools);
        let seq = seq_run(&c, &rho, &mu, 200);
        let spec = spec_run(SpecConfig::new(c.clone(), rho.clone(), mu.clone()), &steps, 200);
        let kinds_agree = matches!(
            (seq.kind, spec.kind),
            (SeqKind::Terminated, OutcomeKind::Terminated)
                | (SeqKind::Stuck, OutcomeKind::Stuck)
                | (SeqKind::FuelExhausted, OutcomeKind::FuelExhausted)
        );
        ensure(
            kinds_agree && seq.trace == spec.trace && seq.rho == spec.config.rho && seq.mu == spec.config.mu,
            || format!("erasure seed {seed}: {}", pretty_com(&c)),
        )?;

        let l = gen_labeling(seed, &pools);
        let src = seq_run(&c, &rho, &mu, 1000);
        for p in Protection::ALL.into_iter().filter(|p| *p != Protection::None) {
            let h = p.apply(&c, &l, "b").map_err(|e| e.to_string())?;
            let out = seq_run(&h, &rho, &mu, 10_000);
            let mut rho_h = out.rho.clone();
            rho_h.set("b", rho.get("b"));
            let ok = match src.kind {
                SeqKind::Terminated => {
                    out.kind == SeqKind::Terminated && out.trace == src.trace && rho_h == src.rho && out.mu == src.mu
                }
                SeqKind::Stuck => out.kind == SeqKind::Stuck && out.trace == src.trace,
                SeqKind::FuelExhausted => slh_core::check::prefix_of(&out.trace, &src.trace),
            };
            ensure(ok, || format!("{p} seed {seed}: {}", pretty_com(&c)))?;
        }
    }
    Ok("1000 programs, 8 protections each".into())
}

fn c12_round_trip() -> Outcome {
    let pools = NamePools::default();
    for seed in 0..1000 {
        let c = gen_program(seed, 5 + (seed as usize % 30), &pools);
        let text = pretty_com(&c);
        let back = parse_com(&text).map_err(|e| format!("{text}: {e}"))?;
        ensure(back == c, || text.clone())?;
    }
    Ok("1000 programs".into())
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("gadget sequential traces", Duration::from_secs(1), c1_sequential_traces),
        ("gadget speculative attack and repro witness", Duration::from_secs(1), c2_speculative_attack),
        ("index-masked gadget", Duration::from_secs(10), c3_index_masking),
        ("store masking is necessary", Duration::from_secs(60), c4_store_masking),
        ("leaks from dead code", Duration::from_secs(120), c5_dead_code_leaks),
        ("hardening equalities", Duration::from_secs(30), c6_equalities),
        ("backwards compiler correctness", Duration::from_secs(300), c7_bcc),
        ("flow analysis is well labeled", Duration::from_secs(60), c8_flow_track_well_labeled),
        ("flow-sensitive steps keep well-labeledness", Duration::from_secs(60), c9_wl_preservation),
        ("noninterference and unwinding", Duration::from_secs(300), c10_noninterference),
        ("erasure and sequential transparency", Duration::from_secs(60), c11_erasure_and_transparency),
        ("parser round trip", Duration::from_secs(10), c12_round_trip),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = run();
        let took = start.elapsed();
        let res = res.and_then(|m| {
            if took <= *limit {
                Ok(m)
            } else {
                Err(format!("{m}, but over the {}s limit", limit.as_secs()))
            }
        });
        let (tag, msg) = match res {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {:>2} {tag} [{:.2}s] {name}: {msg}", k + 1, took.as_secs_f64());
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
