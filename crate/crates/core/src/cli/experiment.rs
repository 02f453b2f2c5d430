//! Experiment drivers behind the CLI subcommands: the VRF tables, the
//! error-vs-paths curves, and the timing/efficiency report.

use std::path::PathBuf;

use serde_json::json;

use crate::cli::config::ExperimentConfig;
use crate::cli::format::{fmt_sig, write_csv, write_markdown_table, write_text};
use crate::engine::{run_method, run_method_reference, Method, MethodRun, MethodSpec};
use crate::error::{Error, Result};
use crate::products::{MarketParams, ProductKind, ProductSpec};
use crate::stats::{aggregate, efficiency, vrf, Greek};

/// Methods for the tables: the LR baseline is always present (its column
/// is identically 1 and anchors every VRF), followed by the configured
/// methods in canonical order.
pub fn table_methods(cfg: &ExperimentConfig) -> Vec<Method> {
    Method::ALL
        .iter()
        .copied()
        .filter(|m| *m == Method::LrMc || cfg.methods.contains(m))
        .collect()
}

/// One grid cell: every configured method run on one (product, K, d).
pub struct CellRuns {
    pub product: ProductKind,
    pub strike: f64,
    pub steps: usize,
    pub runs: Vec<MethodRun>,
}

impl CellRuns {
    pub fn sigma(&self, method: Method, greek: Greek) -> Result<f64> {
        let run = self
            .runs
            .iter()
            .find(|r| r.method == method)
            .ok_or_else(|| Error::Config(format!("method {method} missing from cell")))?;
        let means: Vec<f64> = run.summaries.iter().map(|s| s.greek(greek)).collect();
        Ok(aggregate(&means)?.sigma)
    }

    pub fn seconds_per_run(&self, method: Method) -> Result<f64> {
        self.runs
            .iter()
            .find(|r| r.method == method)
            .map(|r| r.seconds_per_run)
            .ok_or_else(|| Error::Config(format!("method {method} missing from cell")))
    }
}

/// Runs `methods` over the whole (product, strike, steps) grid.
pub fn run_grid(
    cfg: &ExperimentConfig,
    mp: &MarketParams,
    methods: &[Method],
    reference: bool,
) -> Result<Vec<CellRuns>> {
    let mut cells = Vec::new();
    for &product in &cfg.products {
        for &strike in &cfg.strikes {
            for &steps in &cfg.steps {
                let spec = ProductSpec::new(product, strike, steps)?;
                let mut runs = Vec::with_capacity(methods.len());
                for &method in methods {
                    let mut ms =
                        MethodSpec::new(method, cfg.paths, cfg.runs, cfg.seed, steps)?;
                    ms.block_size = cfg.block_size;
                    runs.push(if reference {
                        run_method_reference(mp, &spec, &ms)?
                    } else {
                        run_method(mp, &spec, &ms)?
                    });
                }
                cells.push(CellRuns {
                    product,
                    strike,
                    steps,
                    runs,
                });
            }
        }
    }
    Ok(cells)
}

fn manifest_entry(cfg: &ExperimentConfig, file: &str, methods: &[Method]) -> serde_json::Value {
    json!({
        "file": file,
        "strikes": cfg.strikes.clone(),
        "steps": cfg.steps.clone(),
        "methods": methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "greeks": Greek::ALL.iter().map(|g| g.name()).collect::<Vec<_>>(),
        "paths": cfg.paths,
        "runs": cfg.runs,
        "seed": cfg.seed,
    })
}

fn write_manifest(
    cfg: &ExperimentConfig,
    command: &str,
    entries: Vec<serde_json::Value>,
) -> Result<PathBuf> {
    let manifest = json!({
        "command": command,
        "market": {
            "s0": cfg.s0,
            "sigma": cfg.sigma,
            "rate": cfg.rate,
            "maturity": cfg.maturity,
        },
        "seed": cfg.seed,
        "paths": cfg.paths,
        "runs": cfg.runs,
        "workers": cfg.workers,
        "block_size": cfg.block_size,
        "files": entries,
    });
    let path = cfg.out_dir.join(format!("manifest_{command}.json"));
    write_text(&path, &format!("{:#}\n", manifest))?;
    Ok(path)
}

/// Writes one VRF table (CSV + markdown mirror) per product. Every cell is
/// σ₀²/σ² against the LR+MC baseline at the same (product, Greek, K, d).
pub fn run_tables(cfg: &ExperimentConfig, mp: &MarketParams) -> Result<Vec<PathBuf>> {
    let methods = table_methods(cfg);
    let cells = run_grid(cfg, mp, &methods, false)?;
    write_vrf_tables(cfg, &methods, &cells)
}

/// Table writer split out so the acceptance suite can reuse grid results.
pub fn write_vrf_tables(
    cfg: &ExperimentConfig,
    methods: &[Method],
    cells: &[CellRuns],
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut entries = Vec::new();
    for &product in &cfg.products {
        let mut header: Vec<String> = vec!["greek".into(), "K".into(), "d".into()];
        header.extend(methods.iter().map(|m| m.label().to_string()));
        let mut rows = Vec::new();
        for greek in Greek::ALL {
            for &strike in &cfg.strikes {
                for &steps in &cfg.steps {
                    let cell = cells
                        .iter()
                        .find(|c| c.product == product && c.strike == strike && c.steps == steps)
                        .ok_or_else(|| Error::Config("missing grid cell".into()))?;
                    let baseline = cell.sigma(Method::LrMc, greek)?;
                    let mut row = vec![
                        greek.name().to_string(),
                        fmt_sig(strike),
                        steps.to_string(),
                    ];
                    for &method in methods {
                        let sigma = cell.sigma(method, greek)?;
                        row.push(fmt_sig(vrf(baseline, sigma)));
                    }
                    rows.push(row);
                }
            }
        }
        let csv_path = cfg.out_dir.join(format!("vrf_{}.csv", product.name()));
        let md_path = cfg.out_dir.join(format!("vrf_{}.md", product.name()));
        write_csv(&csv_path, &header, &rows)?;
        write_markdown_table(&md_path, &header, &rows)?;
        entries.push(manifest_entry(
            cfg,
            &format!("vrf_{}.csv", product.name()),
            methods,
        ));
        entries.push(manifest_entry(
            cfg,
            &format!("vrf_{}.md", product.name()),
            methods,
        ));
        written.push(csv_path);
        written.push(md_path);
    }
    written.push(write_manifest(cfg, "tables", entries)?);
    Ok(written)
}

/// Error-vs-paths curves: one CSV row per (product, K, d, method, greek, P)
/// with σ and log₂ columns for straight-line fits.
pub fn run_curves(cfg: &ExperimentConfig, mp: &MarketParams) -> Result<Vec<PathBuf>> {
    let sweep = cfg.effective_sweep();
    if sweep.is_empty() {
        return Err(Error::Config(
            "path sweep is empty (check path_sweep and sweep_cap)".into(),
        ));
    }
    let header: Vec<String> = [
        "product", "K", "d", "method", "greek", "paths", "log2_paths", "sigma", "log2_sigma",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::new();
    for &product in &cfg.products {
        for &strike in &cfg.strikes {
            for &steps in &cfg.steps {
                let spec = ProductSpec::new(product, strike, steps)?;
                for &method in &cfg.methods {
                    for &paths in &sweep {
                        let mut ms = MethodSpec::new(method, paths, cfg.runs, cfg.seed, steps)?;
                        ms.block_size = cfg.block_size;
                        let run = run_method(mp, &spec, &ms)?;
                        for greek in Greek::ALL {
                            let means: Vec<f64> =
                                run.summaries.iter().map(|s| s.greek(greek)).collect();
                            let sigma = aggregate(&means)?.sigma;
                            rows.push(vec![
                                product.name().to_string(),
                                fmt_sig(strike),
                                steps.to_string(),
                                method.name().to_string(),
                                greek.name().to_string(),
                                paths.to_string(),
                                fmt_sig((paths as f64).log2()),
                                fmt_sig(sigma),
                                fmt_sig(sigma.log2()),
                            ]);
                        }
                    }
                }
            }
        }
    }
    let path = cfg.out_dir.join("curves.csv");
    write_csv(&path, &header, &rows)?;
    let manifest = write_manifest(
        cfg,
        "curves",
        vec![manifest_entry(cfg, "curves.csv", &cfg.methods)],
    )?;
    Ok(vec![path, manifest])
}

/// Timing report: wall clock per run for the parallel engine and the
/// bundled single-worker reference loop, their ratio, and a bit-exactness
/// check, per (method, P). A second file carries the cost-adjusted
/// efficiency (σ₀²b₀)/(σ²b) per grid cell, since measured cost lives here
/// rather than in the byte-deterministic VRF tables.
pub fn run_speed(cfg: &ExperimentConfig, mp: &MarketParams) -> Result<Vec<PathBuf>> {
    let methods = table_methods(cfg);
    let parallel = run_grid(cfg, mp, &methods, false)?;
    let reference = run_grid(cfg, mp, &methods, true)?;

    // Timing rows per (method, P): costs averaged over the grid cells that
    // share the method (they differ only in strike/steps).
    let header: Vec<String> = [
        "method",
        "paths",
        "parallel_seconds_per_run",
        "reference_seconds_per_run",
        "ratio",
        "estimates_identical",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::new();
    for &method in &methods {
        let mut par_cost = 0.0;
        let mut ref_cost = 0.0;
        let mut identical = true;
        let mut n = 0usize;
        for (pc, rc) in parallel.iter().zip(&reference) {
            par_cost += pc.seconds_per_run(method)?;
            ref_cost += rc.seconds_per_run(method)?;
            let pr = pc.runs.iter().find(|r| r.method == method).unwrap();
            let rr = rc.runs.iter().find(|r| r.method == method).unwrap();
            identical &= pr.summaries == rr.summaries;
            n += 1;
        }
        par_cost /= n as f64;
        ref_cost /= n as f64;
        rows.push(vec![
            method.name().to_string(),
            cfg.paths.to_string(),
            fmt_sig(par_cost),
            fmt_sig(ref_cost),
            fmt_sig(ref_cost / par_cost),
            if identical { "1" } else { "0" }.to_string(),
        ]);
    }
    let speed_path = cfg.out_dir.join("speed.csv");
    write_csv(&speed_path, &header, &rows)?;

    // Cost-adjusted efficiency against the LR baseline, using the parallel
    // wall clock per run as the cost b.
    let eff_header: Vec<String> = [
        "product", "greek", "K", "d", "method", "sigma", "vrf", "seconds_per_run", "efficiency",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut eff_rows = Vec::new();
    for cell in &parallel {
        let base_cost = cell.seconds_per_run(Method::LrMc)?;
        for greek in Greek::ALL {
            let base_sigma = cell.sigma(Method::LrMc, greek)?;
            for &method in &methods {
                let sigma = cell.sigma(method, greek)?;
                let cost = cell.seconds_per_run(method)?;
                eff_rows.push(vec![
                    cell.product.name().to_string(),
                    greek.name().to_string(),
                    fmt_sig(cell.strike),
                    cell.steps.to_string(),
                    method.name().to_string(),
                    fmt_sig(sigma),
                    fmt_sig(vrf(base_sigma, sigma)),
                    fmt_sig(cost),
                    fmt_sig(efficiency(base_sigma, base_cost, sigma, cost)),
                ]);
            }
        }
    }
    let eff_path = cfg.out_dir.join("efficiency.csv");
    write_csv(&eff_path, &eff_header, &eff_rows)?;

    let manifest = write_manifest(
        cfg,
        "speed",
        vec![
            manifest_entry(cfg, "speed.csv", &methods),
            manifest_entry(cfg, "efficiency.csv", &methods),
        ],
    )?;
    Ok(vec![speed_path, eff_path, manifest])
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
