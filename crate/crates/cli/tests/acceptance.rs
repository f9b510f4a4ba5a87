//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use baryclust::coding::{barycentric_tuple, decode_tuple, OrdinalScale};
use baryclust::data::{Column, ColumnSpec};
use baryclust::eval::ari;
use baryclust::pipeline::hierarchy;
use baryclust::simgen::{generate, replicate_seed, run_grid, Density, SimDesign};
use baryclust::ward::{default_k_range, inertia_gains, select_k};
use baryclust::{
    build_coded_matrix, ward_cluster, CodingMethod, ColumnData, CorrespondenceView, Dataset, Method, Partition,
    VariableKind, VariableSchema,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

fn single_column(values: &[f64], n: usize) -> (Dataset, VariableSchema) {
    let ds = Dataset::new(vec![Column {
        name: "x".into(),
        data: ColumnData::Continuous(values.to_vec()),
    }])
    .unwrap();
    let schema =
        VariableSchema::new(vec![ColumnSpec::new("x", VariableKind::Continuous).with_n_categories(n)]).unwrap();
    (ds, schema)
}

const TABLE_X: [f64; 7] = [40.0, 33.0, 32.5, 32.0, 55.2, 60.1, 32.0];

fn golden_table() -> Outcome {
    let three = [
        [0.711, 0.193, 0.096],
        [0.956, 0.029, 0.015],
        [0.974, 0.018, 0.009],
        [0.991, 0.006, 0.003],
        [0.061, 0.123, 0.816],
        [0.003, 0.006, 0.991],
        [0.991, 0.006, 0.003],
    ];
    let five = [
        [0.184, 0.667, 0.099, 0.033, 0.017],
        [0.927, 0.049, 0.016, 0.005, 0.003],
        [0.956, 0.029, 0.010, 0.003, 0.002],
        [0.985, 0.010, 0.003, 0.001, 5e-4],
        [0.011, 0.023, 0.068, 0.205, 0.693],
        [5e-4, 0.001, 0.003, 0.010, 0.985],
        [0.985, 0.01, 0.003, 0.001, 5e-4],
    ];
    let (ds3, s3) = single_column(&TABLE_X, 3);
    let (ds5, s5) = single_column(&TABLE_X, 5);
    let start = Instant::now();
    let z3 = build_coded_matrix(&ds3, &s3, CodingMethod::Barycentric).map_err(|e| e.to_string())?;
    let z5 = build_coded_matrix(&ds5, &s5, CodingMethod::Barycentric).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let mut worst: f64 = 0.0;
    for i in 0..7 {
        for (j, want) in three[i].iter().enumerate() {
            worst = worst.max((z3.get(i, j) - want).abs());
        }
        for (j, want) in five[i].iter().enumerate() {
            worst = worst.max((z5.get(i, j) - want).abs());
        }
    }
    ensure(worst <= 5e-4, || format!("max deviation {worst:e} > 5e-4"))?;
    ensure(took < Duration::from_millis(1), || format!("coding took {took:?}"))?;
    Ok(format!("70 cells, max deviation {worst:.2e}, {took:?}"))
}

fn step_one_example() -> Outcome {
    let s = OrdinalScale::fit(&TABLE_X).map_err(|e| e.to_string())?;
    ensure(s.d0 == 0.5, || format!("d0 = {}", s.d0))?;
    ensure(s.m == 57, || format!("m = {}", s.m))?;
    ensure(s.level(40.0) == 17, || format!("T(40) = {}", s.level(40.0)))?;
    ensure(s.level(33.0) == 3, || format!("T(33) = {}", s.level(33.0)))?;
    Ok("d0 = 0.5, m = 57, T(40) = 17, T(33) = 3".into())
}

// Port of the reference R routine; bound equality is tolerant because the
// bounds are accumulated in floating point.
fn reference_split(s: f64, p: &[f64]) -> Vec<f64> {
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let at = |i: usize| p[i - 1];
    let len = p.len();
    let mut x = vec![0.0; len - 1];
    let mut flag = false;
    let (mut base, mut base_a) = (0usize, 0usize);
    for u in 1..len {
        if eq(s, at(u)) {
            flag = true;
            base = u;
            base_a = base - 1;
        } else if s > at(u) && s < at(u + 1) && !eq(s, at(u + 1)) {
            base = u;
            base_a = base;
        }
    }
    let low = |s: f64, sx: f64, a: f64, b: f64| sx * (b - s) / (b - a);
    let mut a = at(base_a);
    let mut b = at(base + 1);
    let mut xb = 1.0 - low(s, 1.0, a, b);
    if flag {
        a = at(base);
    }
    for i in base + 1..=len - 1 {
        let a2 = (b + a) / 2.0;
        let b2 = at(i + 1);
        let xa2 = low(b, xb, a2, b2);
        x[i - 2] = xa2;
        a = b;
        b = b2;
        xb -= xa2;
    }
    x[len - 2] = xb;
    let mut a = at(base_a);
    let mut b = at(base + 1);
    let mut xa = low(s, 1.0, a, b);
    if flag {
        b = at(base);
    }
    if base_a >= 2 {
        for k in (2..=base_a).rev() {
            let b2 = (a + b) / 2.0;
            let a2 = at(k - 1);
            let xa2 = low(a, xa, a2, b2);
            x[k - 1] += xa - xa2;
            b = a;
            a = a2;
            xa = xa2;
        }
    }
    x[0] += xa;
    x
}

fn reference_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=500u64);
        let l = rng.gen_range(1..=m);
        let n = rng.gen_range(2..=7usize);
        let mut p = vec![0.5; n + 1];
        for c in 1..=n {
            p[c] = p[c - 1] + m as f64 / n as f64;
        }
        let theirs = reference_split(l as f64, &p);
        let ours = barycentric_tuple(l, m, n).map_err(|e| e.to_string())?;
        for (a, b) in ours.values().iter().zip(&theirs) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("1000 draws, max deviation {worst:.2e}"))
}

fn coding_properties() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    for n in 2..=7usize {
        for m in 1..=200u64 {
            for l in 1..=m {
                let t = barycentric_tuple(l, m, n).map_err(|e| e.to_string())?;
                let v = t.values();
                let sum: f64 = v.iter().sum();
                ensure((sum - 1.0).abs() <= 1e-12, || format!("sum {sum} at l={l} m={m} n={n}"))?;
                ensure(v.iter().all(|&x| x >= 0.0), || format!("negative entry at l={l} m={m} n={n}"))?;
                let mirror = barycentric_tuple(m + 1 - l, m, n).map_err(|e| e.to_string())?;
                for (a, b) in v.iter().zip(mirror.values().iter().rev()) {
                    ensure((a - b).abs() <= 1e-12, || format!("asymmetric at l={l} m={m} n={n}"))?;
                }
                let q = (2 * l - 1) as u128 * n as u128;
                let d = 2 * m as u128;
                let idx = (q / d) as usize;
                if !q.is_multiple_of(d) && idx > 0 && idx + 1 < n {
                    ensure(v[idx] == 2.0 / 3.0, || format!("center {} at l={l} m={m} n={n}", v[idx]))?;
                }
                ensure(decode_tuple(&t) == Ok(l), || format!("decode failed at l={l} m={m} n={n}"))?;
                checked += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let len = rng.gen_range(3..50);
        let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0..300) as f64 * 0.1).collect();
        if raw.iter().all(|&v| v == raw[0]) {
            continue;
        }
        let mean = raw.iter().sum::<f64>() / len as f64;
        let sd = (raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1) as f64).sqrt();
        let z: Vec<f64> = raw.iter().map(|v| (v - mean) / sd).collect();
        let n = rng.gen_range(2..=7);
        let (a, sa) = single_column(&raw, n);
        let (b, sb) = single_column(&z, n);
        let za = build_coded_matrix(&a, &sa, CodingMethod::Barycentric).map_err(|e| e.to_string())?;
        let zb = build_coded_matrix(&b, &sb, CodingMethod::Barycentric).map_err(|e| e.to_string())?;
        for (x, y) in za.entries().iter().zip(zb.entries()) {
            worst = worst.max((x - y).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("standardization changed codes by {worst:e}"))?;
    within(Duration::from_secs(10), start, "coding suite")?;
    Ok(format!(
        "{checked} tuples (m <= 200, n = 2..7), standardization deviation {worst:.1e}, {:?}",
        start.elapsed()
    ))
}

fn random_table(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<f64> {
    (0..rows * cols).map(|_| rng.gen_range(0.05..3.0)).collect()
}

fn pair_distances(v: &CorrespondenceView) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..v.rows() {
        for j in i + 1..v.rows() {
            out.push(v.chi2_distance_sq(i, j));
        }
    }
    out
}

fn chi_square_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_merge: f64 = 0.0;
    for _ in 0..100 {
        let (rows, cols) = (rng.gen_range(3..12), rng.gen_range(2..8));
        let mut z = random_table(&mut rng, rows, cols);
        let src = rng.gen_range(0..cols);
        let factor = rng.gen_range(0.1..5.0);
        let mut wide = Vec::with_capacity(rows * (cols + 1));
        for i in 0..rows {
            wide.extend_from_slice(&z[i * cols..(i + 1) * cols]);
            wide.push(factor * z[i * cols + src]);
        }
        let before = pair_distances(&CorrespondenceView::new(rows, cols + 1, &wide).map_err(|e| e.to_string())?);
        for i in 0..rows {
            z[i * cols + src] *= 1.0 + factor;
        }
        let after = pair_distances(&CorrespondenceView::new(rows, cols, &z).map_err(|e| e.to_string())?);
        for (a, b) in before.iter().zip(&after) {
            worst_merge = worst_merge.max((a - b).abs());
        }
    }
    ensure(worst_merge <= 1e-10, || format!("column merge changed distances by {worst_merge:e}"))?;

    let mut worst_prop: f64 = 0.0;
    for _ in 0..100 {
        let (rows, cols) = (rng.gen_range(3..12), rng.gen_range(2..8));
        let mut z = random_table(&mut rng, rows, cols);
        for j in 0..cols {
            let s: f64 = (0..rows).map(|i| z[i * cols + j]).sum();
            for i in 0..rows {
                z[i * cols + j] /= s;
            }
        }
        let v = CorrespondenceView::new(rows, cols, &z).map_err(|e| e.to_string())?;
        for i in 0..rows {
            for k in i + 1..rows {
                let e: f64 = v.profile(i).iter().zip(v.profile(k)).map(|(a, b)| (a - b).powi(2)).sum();
                worst_prop = worst_prop.max((v.chi2_distance_sq(i, k) - cols as f64 * e).abs());
            }
        }
    }
    ensure(worst_prop <= 1e-10, || format!("equal-mass proportionality off by {worst_prop:e}"))?;
    Ok(format!(
        "merge invariance {worst_merge:.1e}, proportionality {worst_prop:.1e} (100 tables each)"
    ))
}

struct Group {
    members: Vec<usize>,
    mass: f64,
    profile: Vec<f64>,
}

/// Ward by full recomputation of every pairwise cost at every step; merges
/// reported as sorted member lists.
fn naive_ward(rows: usize, cols: usize, z: &[f64]) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let total: f64 = z.iter().sum();
    let c: Vec<f64> = (0..cols).map(|j| (0..rows).map(|i| z[i * cols + j]).sum::<f64>() / total).collect();
    let mut groups: Vec<Group> = (0..rows)
        .map(|i| {
            let row = &z[i * cols..(i + 1) * cols];
            let s: f64 = row.iter().sum();
            Group {
                members: vec![i],
                mass: s / total,
                profile: row.iter().map(|v| v / s).collect(),
            }
        })
        .collect();
    let mut out = Vec::new();
    while groups.len() > 1 {
        let mut best = (0, 1, f64::INFINITY);
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let (g, h) = (&groups[a], &groups[b]);
                let d: f64 = g.profile.iter().zip(&h.profile).zip(&c).map(|((x, y), w)| (x - y).powi(2) / w).sum();
                let cost = g.mass * h.mass / (g.mass + h.mass) * d;
                if cost < best.2 {
                    best = (a, b, cost);
                }
            }
        }
        let (a, b, cost) = best;
        let h = groups.remove(b);
        let g = groups.remove(a);
        let mass = g.mass + h.mass;
        let profile = g.profile.iter().zip(&h.profile).map(|(x, y)| (g.mass * x + h.mass * y) / mass).collect();
        let mut members: Vec<usize> = g.members.iter().chain(&h.members).copied().collect();
        members.sort_unstable();
        out.push((g.members, h.members, cost));
        groups.push(Group { members, mass, profile });
        groups.sort_by_key(|g| g.members[0]);
    }
    out
}

fn ward_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_sum, mut worst_naive): (f64, f64) = (0.0, 0.0);
    for trial in 0..40 {
        let rows = rng.gen_range(2..=50);
        let cols = rng.gen_range(2..8);
        let z = random_table(&mut rng, rows, cols);
        let view = CorrespondenceView::new(rows, cols, &z).map_err(|e| e.to_string())?;
        let d = ward_cluster(&view).map_err(|e| e.to_string())?;
        let costs = d.costs();
        worst_sum = worst_sum.max((costs.iter().sum::<f64>() - view.total_inertia()).abs());
        for w in costs.windows(2) {
            ensure(w[1] >= w[0] - 1e-12 * w[0].max(1.0), || format!("trial {trial}: costs decrease {} -> {}", w[0], w[1]))?;
        }
        let mut members: Vec<Vec<usize>> = (0..rows).map(|i| vec![i]).collect();
        for (m, (na, nb, nc)) in d.merges().iter().zip(naive_ward(rows, cols, &z)) {
            let (mut a, mut b) = (members[m.left].clone(), members[m.right].clone());
            a.sort_unstable();
            b.sort_unstable();
            let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
            all.sort_unstable();
            members.push(all);
            let same = (a == na && b == nb) || (a == nb && b == na);
            ensure(same, || format!("trial {trial}: merge {} differs from recomputation", m.node))?;
            worst_naive = worst_naive.max((m.cost - nc).abs());
        }
    }
    ensure(worst_sum <= 1e-9, || format!("cost sum off total inertia by {worst_sum:e}"))?;
    ensure(worst_naive <= 1e-10, || format!("recurrence off recomputation by {worst_naive:e}"))?;
    within(Duration::from_secs(30), start, "Ward suite")?;
    Ok(format!(
        "40 tables, inertia {worst_sum:.1e}, recomputation {worst_naive:.1e}, monotone, {:?}",
        start.elapsed()
    ))
}

fn adjusted_rand() -> Outcome {
    let p = Partition::new(vec![1, 1, 2, 2]).unwrap();
    let q = Partition::new(vec![1, 2, 1, 2]).unwrap();
    let hand = ari(&p, &q).map_err(|e| e.to_string())?;
    ensure(hand == -0.5, || format!("hand example gave {hand}"))?;
    let r = Partition::new(vec![1, 2, 2, 3, 1, 3]).unwrap();
    ensure(ari(&r, &r) == Ok(1.0), || "identical partitions did not give 1".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws = 500;
    let mut sum = 0.0;
    for _ in 0..draws {
        let a: Vec<usize> = (0..200).map(|_| rng.gen_range(0..4)).collect();
        let b: Vec<usize> = (0..200).map(|_| rng.gen_range(0..4)).collect();
        sum += ari(&Partition::from_labels(&a).unwrap(), &Partition::from_labels(&b).unwrap()).unwrap();
    }
    let mean = sum / draws as f64;
    ensure(mean.abs() <= 0.02, || format!("random mean {mean}"))?;
    Ok(format!("hand example -0.5, identity 1, random mean {mean:+.4}"))
}

fn simulation_trends() -> Outcome {
    let start = Instant::now();
    let overlaps = [0.001, 0.01, 0.02];
    let designs: Vec<SimDesign> = overlaps
        .iter()
        .map(|&w| SimDesign::new(4, 500, Density::Equal, w, 0.5))
        .collect();
    let rows = run_grid(&designs, &[Method::MixedHierarchicalB], 10, 2024).map_err(|e| e.to_string())?;
    let means: Vec<f64> = overlaps
        .iter()
        .map(|&w| {
            let v: Vec<f64> = rows.iter().filter(|r| r.overlap == w).map(|r| r.ari).collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect();
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);

    let mut hits = 0;
    let mut picks = Vec::new();
    for r in 0..25 {
        let design = SimDesign::new(3, 300, Density::Equal, 0.001, 0.5).with_seed(replicate_seed(2024, 99, r));
        let sim = generate(&design).map_err(|e| e.to_string())?;
        let d = hierarchy(&sim.dataset, &sim.schema, CodingMethod::Barycentric).map_err(|e| e.to_string())?;
        let (lo, hi) = default_k_range(d.leaves());
        let k = select_k(&inertia_gains(&d), lo, hi).map_err(|e| e.to_string())?.k;
        hits += (k == 3) as usize;
        picks.push(k);
    }
    let detail = format!(
        "mean ARI {:.3} > {:.3} > {:.3}; K=3 recovered {hits}/25; {:?}",
        means[0],
        means[1],
        means[2],
        start.elapsed()
    );
    ensure(decreasing, || format!("(a) not strictly decreasing: {detail}"))?;
    ensure(means[0] >= 0.65, || format!("(b) mean ARI below 0.65: {detail}"))?;
    ensure(hits * 100 >= 80 * 25, || format!("(c) picks {picks:?}: {detail}"))?;
    within(Duration::from_secs(300), start, "simulation")?;
    Ok(detail)
}

fn run(bin: &Path, dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin)
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
                files.push((path.strip_prefix(dir).unwrap().display().to_string(), bytes));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let bin = Path::new(env!("CARGO_BIN_EXE_baryclust"));
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let commands: Vec<Vec<&str>> = vec![
        vec!["simulate", "--k", "3", "--n", "90", "--overlap", "0.01", "--seed", "5", "--out", "sim"],
        vec!["code", "--input", "sim/data.csv", "--schema", "sim/schema.json", "--out", "coded"],
        vec!["cluster", "--input", "sim/data.csv", "--schema", "sim/schema.json", "--out", "clu"],
        vec!["cut", "--input", "clu/dendrogram.json", "--k", "4", "--out", "cut"],
        vec!["selectk", "--input", "clu/dendrogram.json", "--out", "sel"],
        vec!["ari", "clu/partition.csv", "sim/truth.csv", "--out", "ari"],
        vec!["bench", "--k", "2,3", "--n", "60", "--overlap", "0.01,0.02", "--replicates", "2", "--seed", "9", "--out", "bench"],
    ];
    for c in &commands {
        run(bin, dir, c)?;
    }
    let first = snapshot(dir)?;
    for c in &commands {
        run(bin, dir, c)?;
    }
    let second = snapshot(dir)?;
    ensure(first.len() == second.len(), || "file sets differ between runs".into())?;
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        ensure(a == b, || format!("{name} differs between runs"))?;
    }
    let manifests = first.iter().filter(|(n, _)| n.ends_with("manifest.json")).count();
    ensure(manifests == commands.len(), || format!("{manifests} manifests for {} commands", commands.len()))?;
    Ok(format!("{} commands, {} files byte-identical on rerun", commands.len(), first.len()))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("worked example golden values", golden_table),
        ("ordinal scale worked example", step_one_example),
        ("reference implementation equivalence", reference_oracle),
        ("coding property suite", coding_properties),
        ("chi-square geometry", chi_square_geometry),
        ("Ward identities", ward_identities),
        ("adjusted Rand index", adjusted_rand),
        ("simulation trends", simulation_trends),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
