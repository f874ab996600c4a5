//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use qvar_core::circuit::generators;
use qvar_core::compiler::{check_semantics, compile_on_region};
use qvar_core::device::synthetic::{degrading_link_series, ibm_q20_reference_snapshot, GeneratorParams, REFERENCE_SEED};
use qvar_core::device::{catalog, load_series_dir, load_snapshot_file, CouplingLink, QubitCalibration};
use qvar_core::reliability::{mibf_from_probs, monte_carlo_probs, pst_from_probs, NON_TERMINATING_PST};
use qvar_core::router::brute_force_best_route;
use qvar_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn ids(v: &[usize]) -> Vec<QubitId> {
    v.iter().map(|&i| QubitId(i)).collect()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Random connected graph with ideal qubits: random spanning tree plus extra links.
fn random_device(rng: &mut ChaCha8Rng, min_n: usize, max_n: usize, max_error: f64) -> CalibrationSnapshot {
    let n = rng.random_range(min_n..=max_n);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for _ in 0..rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let e = (a.min(b), a.max(b));
        if a != b && !edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == e) {
            edges.push(e);
        }
    }
    let links = edges.iter().map(|&(a, b)| CouplingLink::new(a, b, rng.random_range(0.0..max_error))).collect();
    CalibrationSnapshot::new("random", "acceptance", vec![QubitCalibration::ideal(); n], links).unwrap()
}

/// Exhaustive simple-path search, independent of the router.
fn oracle_best(s: &CalibrationSnapshot, src: usize, dst: usize, max_hops: usize, model: CostModel) -> f64 {
    fn walk(s: &CalibrationSnapshot, path: &mut Vec<QubitId>, dst: QubitId, max_hops: usize, model: CostModel, best: &mut f64) {
        let here = *path.last().unwrap();
        if here == dst {
            // One multiply per operation, in path order.
            let mut p = 1.0;
            for (i, w) in path.windows(2).enumerate() {
                let last = i + 2 == path.len();
                let ops = if model == CostModel::Cnot3 && !last { 3 } else { 1 };
                let success = s.link_between(w[0], w[1]).unwrap().success();
                for _ in 0..ops {
                    p *= success;
                }
            }
            *best = best.max(p);
            return;
        }
        if path.len() > max_hops {
            return;
        }
        let next: Vec<QubitId> = s.neighbors(here).filter(|q| !path.contains(q)).collect();
        for q in next {
            path.push(q);
            walk(s, path, dst, max_hops, model, best);
            path.pop();
        }
    }
    let mut best = 0.0;
    walk(s, &mut vec![QubitId(src)], QubitId(dst), max_hops, model, &mut best);
    best
}

fn criterion_1() -> Outcome {
    let ring = load_snapshot_file(data_dir().join("snapshots/ring-5.toml")).map_err(|e| e.to_string())?;
    ensure(ring == catalog::five_qubit_ring(), "bundled ring differs from the catalog")?;
    let short = Route::new(&ring, ids(&[0, 1, 2])).map_err(|e| e.to_string())?;
    let long = Route::new(&ring, ids(&[0, 4, 3, 2])).map_err(|e| e.to_string())?;
    let ps = route_success_probability(&short, &ring, CostModel::UnitEdge);
    let pl = route_success_probability(&long, &ring, CostModel::UnitEdge);
    ensure(close(ps, 0.42, 1e-12), format!("A-B-C success {ps}"))?;
    ensure(close(pl, 0.567, 1e-12), format!("A-E-D-C success {pl}"))?;
    for mah in 1..=4 {
        for model in [CostModel::UnitEdge, CostModel::Cnot3] {
            let r = find_route_vqm(&ring, QubitId(0), QubitId(2), mah, model).map_err(|e| e.to_string())?;
            ensure(r == long, format!("mah {mah} {model:?} chose {:?}", r.path()))?;
        }
    }
    Ok(format!("A-B-C {ps:.12}, A-E-D-C {pl:.12}, VQM picks A-E-D-C for mah 1..4"))
}

fn criterion_2() -> Outcome {
    let grid = load_snapshot_file(data_dir().join("snapshots/grid-6.toml")).map_err(|e| e.to_string())?;
    ensure(grid == catalog::six_qubit_grid(), "bundled grid differs from the catalog")?;
    let r = find_route_vqm(&grid, QubitId(0), QubitId(5), 4, CostModel::UnitEdge).map_err(|e| e.to_string())?;
    ensure(r.path() == ids(&[0, 3, 2, 5]).as_slice(), format!("VQM route {:?}", r.path()))?;
    let program = LogicalCircuit::new("pair", 2, 0, vec![Instruction::cx(0, 1)]).unwrap();
    let mapping = allocate(&program, &grid, AllocPolicy::default()).map_err(|e| e.to_string())?;
    let mut placed = vec![mapping.physical(ProgramQubit(0)), mapping.physical(ProgramQubit(1))];
    placed.sort();
    ensure(placed == ids(&[2, 3]), format!("VQA placed on {placed:?}"))?;
    let strength = grid.connectivity_strength(QubitId(3));
    ensure(strength == 2.4, format!("strength of D {strength}"))?;
    Ok("route A-D-C-F, placement {D,C}, strength(D) = 2.4".into())
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut queries = 0;
    for g in 0..200 {
        let s = random_device(&mut rng, 3, 10, 0.3);
        let n = s.num_qubits();
        for src in 0..n {
            for dst in 0..n {
                if src == dst {
                    continue;
                }
                let shortest = s.distance(QubitId(src), QubitId(dst)) as usize;
                let base = find_route_baseline(&s, QubitId(src), QubitId(dst)).map_err(|e| e.to_string())?;
                for model in [CostModel::UnitEdge, CostModel::Cnot3] {
                    let base_p = route_success_probability(&base, &s, model);
                    let mut prev = 0.0;
                    for mah in [0u32, 1, 2, 4] {
                        let budget = shortest + mah as usize;
                        let r = find_route_vqm(&s, QubitId(src), QubitId(dst), mah, model).map_err(|e| e.to_string())?;
                        let bf = brute_force_best_route(&s, QubitId(src), QubitId(dst), budget, model, false).map_err(|e| e.to_string())?;
                        let p = route_success_probability(&r, &s, model);
                        let p_bf = route_success_probability(&bf, &s, model);
                        let p_oracle = oracle_best(&s, src, dst, budget, model);
                        let tag = format!("graph {g} {src}->{dst} mah {mah} {model:?}");
                        ensure(p == p_bf, format!("{tag}: vqm {p} brute force {p_bf}"))?;
                        ensure(p == p_oracle, format!("{tag}: vqm {p} oracle {p_oracle}"))?;
                        ensure(r.hop_count() <= budget, format!("{tag}: {} hops over budget", r.hop_count()))?;
                        ensure(p >= base_p, format!("{tag}: below baseline"))?;
                        ensure(p >= prev, format!("{tag}: not monotone in mah"))?;
                        prev = p;
                        queries += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{queries} route queries over 200 graphs match brute force exactly"))
}

/// Expected instructions before failure by direct enumeration of restart count
/// and failure position.
fn brute_force_mibf(probs: &[f64]) -> f64 {
    let pst = pst_from_probs(probs);
    let len = probs.len() as f64;
    let mut total = 0.0;
    let mut weight = 1.0;
    for r in 0..200_000 {
        let mut survive = weight;
        for (k, &e) in probs.iter().enumerate() {
            total += survive * e * (r as f64 * len + k as f64);
            survive *= 1.0 - e;
        }
        weight *= pst;
        if weight < 1e-300 {
            break;
        }
    }
    total
}

fn criterion_4() -> Outcome {
    const TRIALS: u64 = 1_000_000;
    let mut fixtures: Vec<Vec<f64>> = Vec::new();
    let mesh = catalog::six_qubit_mesh();
    let chain = LogicalCircuit::new("chain", 3, 0, vec![Instruction::cx(0, 1), Instruction::cx(1, 2)]).unwrap();
    let physical = compile(&chain, &mesh, AllocPolicy::Trivial, RoutePolicy::Baseline).map_err(|e| e.to_string())?;
    fixtures.push(ErrorModel::new(&mesh).failure_probs(&physical));
    let reference = ibm_q20_reference_snapshot(REFERENCE_SEED).unwrap().scale_error_rates(10.0).unwrap();
    for circuit in [generators::qft(5), generators::ising(6, 3), generators::random(8, 60, 4)] {
        let physical = compile(&circuit, &reference, AllocPolicy::default(), RoutePolicy::default()).unwrap();
        fixtures.push(ErrorModel::new(&reference).failure_probs(&physical));
    }
    fixtures.push(vec![0.1]);
    fixtures.push(vec![0.5, 0.5]);

    let mut within = 0;
    for run in 0..100u64 {
        let probs = &fixtures[run as usize % fixtures.len()];
        let stats = monte_carlo_probs(probs, MonteCarloConfig::new(TRIALS, 1000 + run).pst_only());
        let p = pst_from_probs(probs);
        let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
        if (stats.pst - p).abs() <= 3.0 * sigma {
            within += 1;
        }
    }
    ensure(within >= 99, format!("only {within}/100 runs within 3 sigma"))?;

    let analytic_single = mibf_from_probs(&[0.1]).value();
    let analytic_pair = mibf_from_probs(&[0.5, 0.5]).value();
    ensure(close(analytic_single, 9.0, 1e-9), format!("closed form for e=0.1 is {analytic_single}"))?;
    ensure(close(analytic_pair, 1.0, 1e-9), format!("closed form for L=2, e=0.5 is {analytic_pair}"))?;
    let mut worst: f64 = 0.0;
    for (i, probs) in fixtures.iter().enumerate() {
        let analytic = mibf_from_probs(probs).value();
        let oracle = brute_force_mibf(probs);
        ensure(close(analytic, oracle, 1e-9 * oracle.max(1.0)), format!("fixture {i}: closed form {analytic} oracle {oracle}"))?;
        let stats = monte_carlo_probs(probs, MonteCarloConfig::new(TRIALS, 77 + i as u64));
        ensure(!stats.mibf_from_analytic, format!("fixture {i}: MIBF fell back to the closed form"))?;
        let rel = (stats.mibf.value() - analytic).abs() / analytic;
        ensure(rel <= 0.02, format!("fixture {i}: MC MIBF {} vs {analytic}", stats.mibf))?;
        worst = worst.max(rel);
    }
    Ok(format!("{within}/100 PST runs within 3 sigma; worst MIBF deviation {:.3}%", worst * 100.0))
}

fn criterion_5() -> Outcome {
    let mesh = load_snapshot_file(data_dir().join("snapshots/mesh-6.toml")).map_err(|e| e.to_string())?;
    ensure(mesh == catalog::six_qubit_mesh(), "bundled mesh differs from the catalog")?;
    let text = std::fs::read_to_string(data_dir().join("benchmarks/chain-3.qasm")).map_err(|e| e.to_string())?;
    let chain = parse_qasm("chain-3", &text).map_err(|e| e.to_string())?;
    let r = evaluate_partitioning(&chain, &mesh, AllocPolicy::default(), RoutePolicy::default(), &ErrorModel::new(&mesh), None)
        .map_err(|e| e.to_string())?;
    // Each copy is a path through its column: product of its two links.
    let success = |a: usize, b: usize| mesh.link_between(QubitId(a), QubitId(b)).unwrap().success();
    let x = success(1, 3) * success(3, 5);
    let y = success(0, 2) * success(2, 4);
    for (name, got, want, oracle) in [
        ("PST_X", r.pst_x, 0.32, x),
        ("PST_Y", r.pst_y, 0.12, y),
        ("sum", r.stpt_two, 0.44, x + y),
        ("gain ratio", r.gain_ratio, 1.375, (x + y) / x),
    ] {
        ensure(close(got, want, 1e-9) && close(got, oracle, 1e-9), format!("{name} = {got}"))?;
    }
    Ok(format!("PST_X {:.9}, PST_Y {:.9}, sum {:.9}, gain {:.9}", r.pst_x, r.pst_y, r.stpt_two, r.gain_ratio))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut partitions = 0;
    let mut instances = 0;
    let mut inst = 0;
    while instances < 100 {
        inst += 1;
        let s = random_device(&mut rng, 4, 8, 0.3);
        let k = rng.random_range(2..=s.num_qubits() / 2);
        let circuit = generators::random(k, rng.random_range(2..12), inst);
        let model = ErrorModel::new(&s);
        let r = evaluate_partitioning(&circuit, &s, AllocPolicy::default(), RoutePolicy::default(), &model, None);
        let r = match r {
            Ok(r) => r,
            Err(PartitionError::NoPartition(_)) => continue,
            Err(e) => return Err(format!("instance {inst}: {e}")),
        };
        instances += 1;
        for (a, b) in enumerate_partitions(&s, k).map_err(|e| e.to_string())? {
            for region in [a, b] {
                let physical =
                    compile_on_region(&circuit, &s, &region, AllocPolicy::default(), RoutePolicy::default()).map_err(|e| e.to_string())?;
                let p = analytic_pst(&physical, &model);
                ensure(r.stpt_one >= p, format!("instance {inst}: one copy {} below region {region:?} at {p}", r.stpt_one))?;
            }
            partitions += 1;
        }
        ensure(r.stpt_two <= 2.0 * r.stpt_one, format!("instance {inst}: two copies exceed twice one copy"))?;
    }
    Ok(format!("{partitions} partitions over {instances} instances dominated by the single copy"))
}

/// Weak-link benchmark: with identity placement, qubit `a` sits on one end of the
/// worst link and its two partners sit two hops away on opposite sides, each
/// reached by the baseline router across that link.
fn weak_link_benchmark(s: &CalibrationSnapshot, reps: usize) -> Result<LogicalCircuit, String> {
    let worst = s.links().iter().max_by(|a, b| a.two_qubit_error.total_cmp(&b.two_qubit_error)).unwrap().endpoints();
    let across = |from: QubitId, mid: QubitId| -> Result<Option<usize>, String> {
        for b in 0..s.num_qubits() {
            if s.distance(from, QubitId(b)) == 2 {
                let route = find_route_baseline(s, from, QubitId(b)).map_err(|e| e.to_string())?;
                if route.path()[1] == mid {
                    return Ok(Some(b));
                }
            }
        }
        Ok(None)
    };
    for (u, v) in [worst, (worst.1, worst.0)] {
        if let (Some(b), Some(c)) = (across(u, v)?, across(v, u)?) {
            return Ok(generators::shuttle(s.num_qubits(), u.0, b, c, reps));
        }
    }
    Err("no qubit pair is routed across the worst link".into())
}

fn criterion_7() -> Outcome {
    const TRIALS: u64 = 100_000;
    let reference = ibm_q20_reference_snapshot(REFERENCE_SEED).unwrap();
    let bundled = load_snapshot_file(data_dir().join("snapshots/ibmq20-reference.toml")).map_err(|e| e.to_string())?;
    ensure(bundled == reference, "bundled reference snapshot differs from the generator")?;
    let s = reference.scale_error_rates(10.0).unwrap();
    let model = ErrorModel::new(&s);
    let vqm = RoutePolicy::Vqm { mah: 4, cost_model: CostModel::Cnot3 };
    let mut suite = generators::standard_suite();
    let weak = weak_link_benchmark(&s, 10)?;
    let weak_name = weak.name().to_string();
    suite.push(weak);

    let mut lines = Vec::new();
    let mut failures = Vec::new();
    let mut weak_ratio = 0.0;
    let mut nonterminating = 0;
    for circuit in &suite {
        let b = compile(circuit, &s, AllocPolicy::Trivial, RoutePolicy::Baseline).map_err(|e| e.to_string())?;
        let v = compile(circuit, &s, AllocPolicy::Trivial, vqm).map_err(|e| e.to_string())?;
        let (pb, pv) = (analytic_pst(&b, &model), analytic_pst(&v, &model));
        let mc_b = monte_carlo(&b, &model, MonteCarloConfig::new(TRIALS, 7));
        let mc_v = monte_carlo(&v, &model, MonteCarloConfig::new(TRIALS, 7));
        if pv < pb || mc_v.pst_ci_high < mc_b.pst_ci_low {
            failures.push(format!("{}: PST {pv:.3e} vs baseline {pb:.3e}", circuit.name()));
        }
        let mut line = circuit.name().to_string();
        if pb >= NON_TERMINATING_PST {
            line += &format!(" PST x{:.3}", pv / pb);
        } else {
            nonterminating += 1;
            let ratio = mc_v.mibf.value() / mc_b.mibf.value();
            let analytic = analytic_mibf(&v, &model).value() / analytic_mibf(&b, &model).value();
            if ratio < 1.0 || analytic < 1.0 {
                failures.push(format!("{}: MIBF ratio {ratio:.3} (analytic {analytic:.3})", circuit.name()));
            }
            line += &format!(" MIBF x{ratio:.3}");
        }
        if circuit.name() == weak_name {
            weak_ratio = mc_v.pst / mc_b.pst;
            if weak_ratio < 1.2 || pv / pb < 1.2 {
                failures.push(format!("{weak_name}: improvement {weak_ratio:.3} below 1.2"));
            }
        }
        lines.push(line);
    }
    ensure(nonterminating > 0, "no non-terminating benchmark")?;
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok(format!("{} benchmarks ({nonterminating} non-terminating), weak link x{weak_ratio:.2}; {}", suite.len(), lines.join(", ")))
}

fn coefficient_of_variation(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt() / mean
}

/// Per-day analytic MIBF under each router, recompiling every day.
fn mibf_cv(series: &CalibrationSeries, circuit: &LogicalCircuit) -> Result<(f64, f64), String> {
    let mut base = Vec::new();
    let mut vqm = Vec::new();
    for day in series.snapshots() {
        let s = day.scale_error_rates(10.0).map_err(|e| e.to_string())?;
        let model = ErrorModel::new(&s);
        for (route, out) in [(RoutePolicy::Baseline, &mut base), (RoutePolicy::default(), &mut vqm)] {
            let physical = compile(circuit, &s, AllocPolicy::default(), route).map_err(|e| e.to_string())?;
            out.push(analytic_mibf(&physical, &model).value());
        }
    }
    Ok((coefficient_of_variation(&vqm), coefficient_of_variation(&base)))
}

fn criterion_8() -> Outcome {
    let reference = ibm_q20_reference_snapshot(REFERENCE_SEED).unwrap();
    let params = GeneratorParams::ibm_q20();
    let series = degrading_link_series(&reference, &params, 7, REFERENCE_SEED, (7, 12), 0.15).map_err(|e| e.to_string())?;
    let bundled = load_series_dir(data_dir().join("series/ibmq20-degrading")).map_err(|e| e.to_string())?;
    ensure(bundled == series, "bundled series differs from the generator")?;
    let ising = generators::ising(20, 10);
    let (cv_vqm, cv_base) = mibf_cv(&series, &ising)?;
    ensure(cv_vqm <= cv_base, format!("bundled series: VQM CV {cv_vqm:.4} above baseline {cv_base:.4}"))?;
    let mut worse = Vec::new();
    for seed in 1..=20 {
        let series = degrading_link_series(&reference, &params, 7, seed, (7, 12), 0.15).map_err(|e| e.to_string())?;
        let (v, b) = mibf_cv(&series, &ising)?;
        if v > b {
            worse.push(format!("seed {seed}: {v:.4} > {b:.4}"));
        }
    }
    ensure(worse.is_empty(), worse.join("; "))?;
    Ok(format!("bundled series CV VQM {cv_vqm:.4} vs baseline {cv_base:.4}; also holds on 20 further seeds"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let allocs = [AllocPolicy::Trivial, AllocPolicy::SwapMinimizing, AllocPolicy::Vqa { first_n: 5 }, AllocPolicy::default()];
    for i in 0..500u64 {
        let s = random_device(&mut rng, 2, 12, 0.3);
        let n = rng.random_range(2..=s.num_qubits());
        let circuit = generators::random(n, rng.random_range(0..80), i);
        let alloc = allocs[rng.random_range(0..allocs.len())];
        let route = if rng.random_bool(0.5) {
            RoutePolicy::Baseline
        } else {
            let model = if rng.random_bool(0.5) { CostModel::UnitEdge } else { CostModel::Cnot3 };
            RoutePolicy::Vqm { mah: rng.random_range(0..5), cost_model: model }
        };
        let physical = compile(&circuit, &s, alloc, route).map_err(|e| format!("case {i}: {e}"))?;
        check_semantics(&circuit, &physical).map_err(|e| format!("case {i} ({alloc:?}, {route:?}): {e}"))?;
        ensure(verify_semantics(&circuit, &physical), format!("case {i}: semantics"))?;
        physical.check_against(&s).map_err(|e| format!("case {i}: {e}"))?;
    }
    Ok("500 fuzzed compilations preserve semantics on adjacent pairs".into())
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qvar")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("qvar {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_10() -> Outcome {
    let data = data_dir();
    let reference = data.join("snapshots/ibmq20-reference.toml");
    let mesh = data.join("snapshots/mesh-6.toml");
    let chain = data.join("benchmarks/chain-3.qasm");
    let series = data.join("series/ibmq20-degrading");
    let [reference, mesh, chain, series] = [&reference, &mesh, &chain, &series].map(|p| p.to_str().unwrap().to_string());
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("compile", vec!["compile", "--snapshot", &reference, "--circuit", "qft:8", "--format", "report"]),
        ("simulate", vec!["simulate", "--snapshot", &reference, "--circuit", "ising:10:3", "--trials", "100000"]),
        (
            "simulate csv",
            vec!["simulate", "--snapshot", &mesh, "--circuit", &chain, "--scale", "1", "--trials", "100000", "--format", "csv"],
        ),
        ("sweep", vec!["sweep", "--series-dir", &series, "--circuit", "ising:20:10", "--trials", "20000"]),
        ("partition", vec!["partition", "--snapshot", &mesh, "--circuit", &chain, "--scale", "1"]),
        ("stats", vec!["stats", "--series-dir", &series]),
    ]
    .into_iter()
    .map(|(name, args)| (name, args.into_iter().map(String::from).collect()))
    .collect();
    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for workers in ["1", "8"] {
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            a.extend(["--workers", workers]);
            outputs.push(run_cli(&a)?);
        }
        ensure(outputs[0] == outputs[1], format!("{name}: output differs between 1 and 8 workers"))?;
        ensure(!outputs[0].is_empty(), format!("{name}: empty output"))?;
    }
    let compiled: Vec<Vec<(PathBuf, Vec<u8>)>> = ["1", "8"]
        .iter()
        .map(|w| {
            let out = tmp.path().join(format!("w{w}/out.qasm"));
            run_cli(&["compile", "--snapshot", &reference, "--circuit", "qft:8", "--workers", w, "--out", out.to_str().unwrap()])
                .map(|_| read_tree(&tmp.path().join(format!("w{w}"))))
        })
        .collect::<Result<_, _>>()?;
    ensure(compiled[0] == compiled[1], "compile files differ between 1 and 8 workers")?;
    let generated: Vec<Vec<(PathBuf, Vec<u8>)>> = ["g1", "g2"]
        .iter()
        .map(|d| {
            let dir = tmp.path().join(d);
            run_cli(&["generate", "--out", dir.to_str().unwrap()]).map(|_| read_tree(&dir))
        })
        .collect::<Result<_, _>>()?;
    ensure(generated[0] == generated[1], "generate is not reproducible")?;
    ensure(generated[0] == read_tree(&data), "bundled data is out of date with generate")?;
    Ok(format!("{} commands byte-identical at 1 and 8 workers; generate reproduces the bundled data", runs.len() + 2))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("route arithmetic on the 5-qubit ring", criterion_1),
        ("policy picks on the 6-qubit grid", criterion_2),
        ("router equals brute force on random graphs", criterion_3),
        ("Monte Carlo converges to the analytic engine", criterion_4),
        ("two-copy numbers on the 6-qubit mesh", criterion_5),
        ("single copy dominates every partition", criterion_6),
        ("variation-aware routing never loses on the 20-qubit device", criterion_7),
        ("variation-aware MIBF varies less across days", criterion_8),
        ("fuzzed compilations are correct", criterion_9),
        ("CLI output independent of worker count", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS ({secs:.1}s) {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL ({secs:.1}s) {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
