use crate::io::{self, Manifest};
use crate::tree::{newick, DendrogramFile};
use crate::{plot, AriArgs, BenchArgs, ClusterArgs, CodeArgs, CutArgs, SelectkArgs, SimulateArgs, TableArgs, UsageError};
use anyhow::{Context, Result};
use baryclust::coding::CodedMatrix;
use baryclust::data::VariableKind;
use baryclust::eval::{ari_detailed, cluster_profile};
use baryclust::simgen::{self, SimDesign};
use baryclust::ward::{self, default_k_range, inertia_gains, select_k, KSelection};
use baryclust::{build_coded_matrix, ColumnData, CorrespondenceView, Dataset, Partition, VariableSchema};
use serde_json::json;
use std::collections::HashMap;
use std::path::Path;

struct Loaded {
    data: Dataset,
    schema: VariableSchema,
    row_ids: Vec<usize>,
}

fn load(t: &TableArgs) -> Result<Loaded> {
    let mut schema = io::read_schema(&t.schema)?;
    if let Some(n) = t.n_categories {
        if n < 2 {
            return Err(UsageError(format!("--n-categories must be at least 2, got {n}")).into());
        }
        schema = schema.with_default_categories(n);
    }
    let (data, row_ids) = io::read_table(&t.input, &schema, t.drop_incomplete)?;
    Ok(Loaded { data, schema, row_ids })
}

fn table_config(t: &TableArgs) -> serde_json::Value {
    json!({
        "input": t.input.display().to_string(),
        "schema": t.schema.display().to_string(),
        "coding": t.coding.as_str(),
        "n_categories": t.n_categories,
        "drop_incomplete": t.drop_incomplete,
        "prune_empty_columns": t.prune_empty_columns,
    })
}

fn coded(t: &TableArgs, loaded: &Loaded) -> Result<(CodedMatrix, Vec<String>)> {
    let mut z = build_coded_matrix(&loaded.data, &loaded.schema, t.coding)?;
    let pruned = if t.prune_empty_columns { z.prune_empty_columns() } else { Vec::new() };
    for w in &z.warnings {
        eprintln!("warning: {w}");
    }
    if !pruned.is_empty() {
        eprintln!("warning: removed empty coded columns {}", pruned.join(", "));
    }
    Ok((z, pruned))
}

pub fn code(a: &CodeArgs, argv: &[String]) -> Result<()> {
    let loaded = load(&a.table)?;
    let (z, pruned) = coded(&a.table, &loaded)?;
    io::create_dir(&a.out)?;
    let mut manifest = Manifest::new("code", argv, json!({ "table": table_config(&a.table), "out": a.out.display().to_string() }));
    manifest.input(&a.table.input)?;
    manifest.input(&a.table.schema)?;

    let mut header = vec!["row_id"];
    header.extend(z.column_labels.iter().map(String::as_str));
    let rows = (0..z.rows()).map(|i| {
        let mut r = vec![loaded.row_ids[i].to_string()];
        r.extend(z.row(i).iter().map(|v| v.to_string()));
        r
    });
    manifest.output(&io::write(&a.out, "coded.csv", io::csv_text(&header, rows)?)?);
    let meta = json!({
        "method": z.method.as_str(),
        "rows": z.rows(),
        "columns": z.column_labels,
        "blocks": z.blocks,
        "warnings": z.warnings,
        "pruned_columns": pruned,
    });
    manifest.output(&io::write_json(&a.out, "coding.json", &meta)?);
    manifest.write(&a.out)
}

fn k_range(rows: usize, k_min: Option<usize>, k_max: Option<usize>) -> (usize, usize) {
    let (lo, hi) = default_k_range(rows);
    (k_min.unwrap_or(lo), k_max.unwrap_or(hi))
}

fn selection_csv(s: &KSelection, gains: &[(usize, f64)]) -> Result<String> {
    let gain: HashMap<usize, f64> = gains.iter().copied().collect();
    io::csv_text(
        &["k", "gain", "next_gain", "ratio", "selected"],
        s.ratios.iter().map(|&(k, r)| {
            vec![
                k.to_string(),
                gain[&k].to_string(),
                gain[&(k + 1)].to_string(),
                r.to_string(),
                (k == s.k).to_string(),
            ]
        }),
    )
}

fn print_selection(s: &KSelection) {
    println!("{:>4}  {:>14}", "K", "gain ratio");
    for &(k, r) in &s.ratios {
        let mark = if k == s.k { "  <-" } else { "" };
        println!("{k:>4}  {r:>14.6}{mark}");
    }
    if s.degenerate {
        println!("some gains are zero; K = {} is the first K followed by a zero gain", s.k);
    }
    println!("selected K = {}", s.k);
}

pub fn cluster(a: &ClusterArgs, argv: &[String]) -> Result<()> {
    if !a.table.coding.is_nonnegative() {
        return Err(UsageError(format!(
            "{} coding can produce negative entries and cannot be clustered with the chi-square metric",
            a.table.coding.as_str()
        ))
        .into());
    }
    let loaded = load(&a.table)?;
    let (z, _) = coded(&a.table, &loaded)?;
    let view = CorrespondenceView::from_coded(&z)?;
    let d = ward::ward_cluster(&view)?;
    let gains = inertia_gains(&d);
    let rows = d.leaves();

    io::create_dir(&a.out)?;
    let mut manifest = Manifest::new(
        "cluster",
        argv,
        json!({
            "table": table_config(&a.table),
            "k": a.k,
            "k_min": a.k_min,
            "k_max": a.k_max,
            "out": a.out.display().to_string(),
        }),
    );
    manifest.input(&a.table.input)?;
    manifest.input(&a.table.schema)?;

    let (k_min, k_max) = k_range(rows, a.k_min, a.k_max);
    let k = match a.k {
        Some(k) => k,
        None if rows < 3 => {
            eprintln!("warning: {rows} rows leave no K to compare; reporting a single cluster");
            1
        }
        None => {
            let s = select_k(&gains, k_min, k_max)?;
            print_selection(&s);
            manifest.output(&io::write(&a.out, "selectk.csv", selection_csv(&s, &gains)?)?);
            s.k
        }
    };
    let p = d.cut(k)?;

    manifest.output(&io::write_json(&a.out, "dendrogram.json", &DendrogramFile::new(&d, &loaded.row_ids))?);
    manifest.output(&io::write(&a.out, "dendrogram.nwk", newick(&d, &loaded.row_ids))?);
    manifest.output(&io::write(&a.out, "partition.csv", io::partition_csv(&loaded.row_ids, &p)?)?);
    manifest.output(&io::write(
        &a.out,
        "gains.csv",
        io::csv_text(&["k", "gain"], gains.iter().map(|(k, g)| vec![k.to_string(), g.to_string()]))?,
    )?);
    manifest.output(&io::write(&a.out, "dendrogram.svg", plot::dendrogram_svg(&d, &loaded.row_ids, Some(&p)))?);
    manifest.output(&io::write(
        &a.out,
        "gains.svg",
        plot::gains_svg(&gains, Some(k), k_max.max(k).max(2) + 1),
    )?);
    manifest.output(&io::write_json(&a.out, "clusters.json", &cluster_profile(&p, &loaded.data)?)?);
    manifest.write(&a.out)?;
    println!("{} rows in {k} clusters, sizes {:?}", rows, p.sizes());
    Ok(())
}

pub fn cut(a: &CutArgs, argv: &[String]) -> Result<()> {
    let (d, row_ids) = DendrogramFile::load(&a.input)?;
    let p = d.cut(a.k)?;
    io::create_dir(&a.out)?;
    let mut manifest = Manifest::new(
        "cut",
        argv,
        json!({ "input": a.input.display().to_string(), "k": a.k, "out": a.out.display().to_string() }),
    );
    manifest.input(&a.input)?;
    manifest.output(&io::write(&a.out, "partition.csv", io::partition_csv(&row_ids, &p)?)?);
    manifest.output(&io::write(&a.out, "dendrogram.svg", plot::dendrogram_svg(&d, &row_ids, Some(&p)))?);
    manifest.write(&a.out)
}

pub fn selectk(a: &SelectkArgs, argv: &[String]) -> Result<()> {
    let (d, _) = DendrogramFile::load(&a.input)?;
    let gains = inertia_gains(&d);
    let (k_min, k_max) = k_range(d.leaves(), a.k_min, a.k_max);
    let s = select_k(&gains, k_min, k_max)?;
    print_selection(&s);
    if let Some(out) = &a.out {
        io::create_dir(out)?;
        let mut manifest = Manifest::new(
            "selectk",
            argv,
            json!({
                "input": a.input.display().to_string(),
                "k_min": k_min,
                "k_max": k_max,
                "out": out.display().to_string(),
            }),
        );
        manifest.input(&a.input)?;
        manifest.output(&io::write(out, "selectk.csv", selection_csv(&s, &gains)?)?);
        manifest.output(&io::write(out, "gains.svg", plot::gains_svg(&gains, Some(s.k), k_max + 1))?);
        manifest.write(out)?;
    }
    Ok(())
}

fn aligned(first: &Path, second: &Path) -> Result<(Partition, Partition)> {
    let (ids_a, la) = io::read_partition(first)?;
    let (ids_b, lb) = io::read_partition(second)?;
    let index: HashMap<usize, usize> = ids_b.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    if ids_a.len() != ids_b.len() || index.len() != ids_b.len() {
        return Err(UsageError("partition files must list the same row ids once each".into()).into());
    }
    let mut matched = Vec::with_capacity(ids_a.len());
    for id in &ids_a {
        let &i = index
            .get(id)
            .ok_or_else(|| UsageError(format!("row id {id} missing from {}", second.display())))?;
        matched.push(lb[i]);
    }
    let p = Partition::from_labels(&la)?;
    let q = Partition::from_labels(&matched)?;
    Ok((p, q))
}

pub fn ari(a: &AriArgs, argv: &[String]) -> Result<()> {
    let (p, q) = aligned(&a.first, &a.second)?;
    let o = ari_detailed(&p, &q)?;
    println!("{}", o.value);
    if o.degenerate {
        eprintln!("note: both partitions are trivial; the index is set by identity");
    }
    if let Some(out) = &a.out {
        io::create_dir(out)?;
        let mut manifest = Manifest::new(
            "ari",
            argv,
            json!({
                "first": a.first.display().to_string(),
                "second": a.second.display().to_string(),
                "out": out.display().to_string(),
            }),
        );
        manifest.input(&a.first)?;
        manifest.input(&a.second)?;
        let body = json!({ "ari": o.value, "degenerate": o.degenerate, "rows": p.len(), "k_first": p.k(), "k_second": q.k() });
        manifest.output(&io::write_json(out, "ari.json", &body)?);
        manifest.write(out)?;
    }
    Ok(())
}

fn categorical_kind(ordinal: bool) -> VariableKind {
    if ordinal {
        VariableKind::Ordinal
    } else {
        VariableKind::Nominal
    }
}

fn data_csv(data: &Dataset) -> Result<String> {
    let header: Vec<&str> = data.columns().iter().map(|c| c.name.as_str()).collect();
    let rows = (0..data.rows()).map(|i| {
        data.columns()
            .iter()
            .map(|c| match &c.data {
                ColumnData::Continuous(v) => v[i].to_string(),
                ColumnData::Ordinal(v) => v[i].to_string(),
                ColumnData::Nominal(v) => v[i].clone(),
            })
            .collect()
    });
    io::csv_text(&header, rows)
}

pub fn simulate(a: &SimulateArgs, argv: &[String]) -> Result<()> {
    let design = SimDesign {
        k: a.k,
        n: a.n,
        density: a.density,
        overlap: a.overlap,
        cat_fraction: a.cat_fraction,
        dims: a.dims,
        cat_levels: a.cat_levels,
        categorical_kind: categorical_kind(a.ordinal),
        seed: a.seed,
    };
    let sim = simgen::generate(&design)?;
    io::create_dir(&a.out)?;
    let mut manifest = Manifest::new("simulate", argv, json!({ "design": design, "out": a.out.display().to_string() }));
    manifest.seeds(json!({ "seed": a.seed }));
    manifest.output(&io::write(&a.out, "data.csv", data_csv(&sim.dataset)?)?);
    manifest.output(&io::write_json(&a.out, "schema.json", &sim.schema)?);
    let ids: Vec<usize> = (0..design.n).collect();
    manifest.output(&io::write(&a.out, "truth.csv", io::partition_csv(&ids, &sim.true_labels)?)?);
    manifest.output(&io::write_json(&a.out, "simulation.json", &sim.metadata)?);
    manifest.write(&a.out)?;
    println!("{} rows, {} clusters of sizes {:?}, separation {}", design.n, design.k, sim.metadata.sizes, sim.metadata.separation);
    Ok(())
}

pub fn bench(a: &BenchArgs, argv: &[String]) -> Result<()> {
    if a.methods.is_empty() {
        return Err(UsageError("--methods must name at least one method".into()).into());
    }
    let mut designs = Vec::new();
    for &k in &a.k {
        for &n in &a.n {
            for &density in &a.density {
                for &overlap in &a.overlap {
                    for &cat_fraction in &a.cat_fraction {
                        designs.push(SimDesign {
                            k,
                            n,
                            density,
                            overlap,
                            cat_fraction,
                            dims: a.dims,
                            cat_levels: a.cat_levels,
                            categorical_kind: categorical_kind(a.ordinal),
                            seed: 0,
                        });
                    }
                }
            }
        }
    }
    let outcomes = simgen::run_replicates(&designs, &a.methods, a.replicates, a.seed)
        .context("running the simulation grid")?;
    let rows = simgen::result_rows(&designs, &outcomes);

    io::create_dir(&a.out)?;
    let methods: Vec<&str> = a.methods.iter().map(|m| m.as_str()).collect();
    let mut manifest = Manifest::new(
        "bench",
        argv,
        json!({
            "designs": designs,
            "methods": methods,
            "replicates": a.replicates,
            "out": a.out.display().to_string(),
        }),
    );
    manifest.seeds(json!({
        "master": a.seed,
        "replicates": outcomes
            .iter()
            .map(|o| json!({ "scenario": o.scenario, "replicate": o.replicate, "seed": o.seed }))
            .collect::<Vec<_>>(),
    }));

    let table = io::csv_text(
        &["k", "n", "density", "overlap", "cat_fraction", "dims", "cat_levels", "method", "replicate", "ari"],
        rows.iter().map(|r| {
            vec![
                r.k.to_string(),
                r.n.to_string(),
                r.density.as_str().to_string(),
                r.overlap.to_string(),
                r.cat_fraction.to_string(),
                r.dims.to_string(),
                r.cat_levels.to_string(),
                r.method.clone(),
                r.replicate.to_string(),
                r.ari.to_string(),
            ]
        }),
    )?;
    manifest.output(&io::write(&a.out, "ari.csv", table)?);

    // mean pairwise agreement between methods over all replicates
    let m = a.methods.len();
    let mut sums = vec![0.0; m * m];
    for o in &outcomes {
        for i in 0..m {
            for j in 0..m {
                sums[i * m + j] += baryclust::eval::ari(&o.partitions[i].1, &o.partitions[j].1)?;
            }
        }
    }
    let count = outcomes.len().max(1) as f64;
    let mut header = vec!["method"];
    header.extend(methods.iter().copied());
    let agreement = io::csv_text(
        &header,
        (0..m).map(|i| {
            let mut r = vec![methods[i].to_string()];
            r.extend((0..m).map(|j| (sums[i * m + j] / count).to_string()));
            r
        }),
    )?;
    manifest.output(&io::write(&a.out, "agreement.csv", agreement)?);
    manifest.write(&a.out)?;

    for (s, d) in designs.iter().enumerate() {
        for method in &methods {
            let v: Vec<f64> = rows
                .iter()
                .zip(outcomes.iter().flat_map(|o| std::iter::repeat_n(o.scenario, m)))
                .filter(|(r, sc)| *sc == s && r.method == *method)
                .map(|(r, _)| r.ari)
                .collect();
            let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
            println!(
                "K={} N={} {} overlap={} cat={} {method}: mean ARI {mean:.4}",
                d.k,
                d.n,
                d.density.as_str(),
                d.overlap,
                d.cat_fraction
            );
        }
    }
    Ok(())
}
