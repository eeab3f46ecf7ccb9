use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use qofc::comb::{extract_wires, wire_graph, wires_to_json, WireGraph};
use qofc::entanglement::{vlf_report, VlfReport};
use qofc::gaussian::{build_comb_state_with, build_graph_state_with, GaussianState};
use qofc::homodyne::phase_scan;
use qofc::imperfect::{imbalance_sweep, loglog_slope, ImbalanceReport};
use qofc::nullifier::{graph_table, nullifier_table, write_table_csv, NullifierRow};
use qofc::{format_sig9, CombSpec, PumpConfig};

use crate::config::{Format, RunConfig};
use crate::error::{io_error, CliError};

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(io_error(&path))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(io_error(&path))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("reports are plain data");
        self.write(name, |w| writeln!(w, "{text}"))
    }
}

/// Symmetry and purity checks that work on either storage.
fn verify(state: &GaussianState) -> Result<(), CliError> {
    state.check_symmetry()?;
    let residual = state.purity_residual();
    if residual > state.tolerances().purity {
        return Err(qofc::Error::Invariant(format!("purity residual {residual:e}")).into());
    }
    Ok(())
}

fn comb_state(cfg: &RunConfig) -> Result<GaussianState, CliError> {
    let state = build_comb_state_with(&cfg.pumps, &cfg.comb, &cfg.build)?;
    verify(&state)?;
    Ok(state)
}

fn graph_state(cfg: &RunConfig) -> Result<Option<GaussianState>, CliError> {
    if cfg.pumps.p_z % 2 == 0 {
        log::info!("even pump indices: no graph-state output");
        return Ok(None);
    }
    let state = build_graph_state_with(&cfg.pumps, &cfg.comb, &cfg.build)?;
    verify(&state)?;
    Ok(Some(state))
}

/// Wires that carry at least one edge; isolated boundary lines are dropped.
fn linked_wires(pumps: &PumpConfig, comb: &CombSpec) -> Vec<Vec<i64>> {
    extract_wires(pumps, comb).into_iter().filter(|w| w.len() > 1).collect()
}

pub fn wires(cfg: &RunConfig) -> Result<(), CliError> {
    let graphs: Vec<WireGraph> = wire_graph(&cfg.pumps, &cfg.comb);
    log::info!("{} wire(s), {} expected", graphs.len(), cfg.pumps.wire_count());
    let out = Output::new(&cfg.out_dir)?;
    match cfg.format {
        Format::Json => {
            let text = wires_to_json(&graphs);
            out.write("wires.json", |w| writeln!(w, "{text}"))
        }
        Format::Csv => {
            out.write("wires.csv", |w| {
                writeln!(w, "wire,position,n")?;
                for (k, g) in graphs.iter().enumerate() {
                    for (pos, n) in g.sequence.iter().enumerate() {
                        writeln!(w, "{},{},{}", k + 1, pos, n)?;
                    }
                }
                Ok(())
            })?;
            out.write("edges.csv", |w| {
                writeln!(w, "wire,n_a,pol_a,n_b,pol_b,weight")?;
                for (k, g) in graphs.iter().enumerate() {
                    for e in &g.edges {
                        writeln!(
                            w,
                            "{},{},{},{},{},{}",
                            k + 1,
                            e.a.n,
                            e.a.pol,
                            e.b.n,
                            e.b.pol,
                            e.weight.as_str()
                        )?;
                    }
                }
                Ok(())
            })
        }
    }
}

#[derive(Serialize)]
struct WireTable {
    wire: usize,
    sequence: Option<Vec<i64>>,
    rows: Vec<NullifierRow>,
}

#[derive(Serialize)]
struct NullifierExport<'a> {
    comb: &'a CombSpec,
    pumps: &'a PumpConfig,
    tables: Vec<WireTable>,
    graph: Option<Vec<NullifierRow>>,
}

pub fn nullifiers(cfg: &RunConfig, covariance: bool) -> Result<(), CliError> {
    let state = comb_state(cfg)?;
    let tables = if cfg.pumps.wire_count() == 1 {
        vec![WireTable {
            wire: 1,
            sequence: None,
            rows: nullifier_table(&state, &cfg.pumps, &cfg.comb, None)?,
        }]
    } else {
        linked_wires(&cfg.pumps, &cfg.comb)
            .into_iter()
            .enumerate()
            .map(|(k, seq)| {
                let rows = nullifier_table(&state, &cfg.pumps, &cfg.comb, Some(&seq))?;
                Ok(WireTable { wire: k + 1, sequence: Some(seq), rows })
            })
            .collect::<Result<Vec<_>, CliError>>()?
    };
    let graph = match graph_state(cfg)? {
        Some(g) => Some(graph_table(&g, &cfg.pumps, &cfg.comb)?),
        None => None,
    };

    let out = Output::new(&cfg.out_dir)?;
    match cfg.format {
        Format::Json => out.json(
            "nullifiers.json",
            &NullifierExport { comb: &cfg.comb, pumps: &cfg.pumps, tables, graph },
        )?,
        Format::Csv => {
            if let [single] = tables.as_slice() {
                out.write("nullifiers.csv", |w| write_table_csv(&single.rows, w))?;
            } else {
                for t in &tables {
                    out.write(&format!("nullifiers_wire{}.csv", t.wire), |w| write_table_csv(&t.rows, w))?;
                }
            }
            if let Some(rows) = &graph {
                out.write("graph_nullifiers.csv", |w| write_table_csv(rows, w))?;
            }
        }
    }
    if covariance {
        out.write("covariance.csv", |w| state.write_covariance_csv(w))?;
        let meta = state.covariance_metadata_json();
        out.write("covariance.json", |w| writeln!(w, "{meta}"))?;
    }
    Ok(())
}

pub fn scan(cfg: &RunConfig) -> Result<(), CliError> {
    let state = comb_state(cfg)?;
    let trace = phase_scan(&state, &cfg.bhd, &cfg.pumps, &cfg.comb, &cfg.scan_grid)?;
    log::info!(
        "scan: corrected {:.4} .. {:.4} dB",
        trace.min_corrected_db(),
        trace.max_corrected_db()
    );
    let out = Output::new(&cfg.out_dir)?;
    match cfg.format {
        Format::Json => out.json("scan.json", &trace),
        Format::Csv => out.write("scan.csv", |w| trace.write_csv(w)),
    }
}

fn write_vlf_csv(report: &VlfReport, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "wire,center,n3,n4,bipartition,pairing,sum,bound,violated")?;
    for (k, wire) in report.wires.iter().enumerate() {
        for cell in &wire.cells {
            for b in &cell.bipartitions {
                writeln!(
                    w,
                    "{},{},{},{},\"{}\",{},{},{},{}",
                    k + 1,
                    cell.cell.center,
                    cell.cell.n3,
                    cell.cell.n4,
                    b.bipartition,
                    b.pairing,
                    format_sig9(b.sum),
                    format_sig9(b.bound),
                    b.violated
                )?;
            }
        }
    }
    Ok(())
}

pub fn vlf(cfg: &RunConfig) -> Result<(), CliError> {
    let state = comb_state(cfg)?;
    let report = vlf_report(&state, &cfg.pumps, &cfg.comb)?;
    log::info!("vlf: all wires inseparable = {}", report.all_inseparable());
    let out = Output::new(&cfg.out_dir)?;
    match cfg.format {
        Format::Json => {
            let text = report.to_json();
            out.write("vlf.json", |w| writeln!(w, "{text}"))
        }
        Format::Csv => out.write("vlf.csv", |w| write_vlf_csv(&report, w)),
    }
}

#[derive(Serialize)]
struct ImbalanceExport {
    r: f64,
    reports: Vec<ImbalanceReport>,
    /// Log-log slope of |residual| against |ε|, over nonzero ε.
    residual_slope: Option<f64>,
    /// Log-log slope of |Cov(Q^z_0, Q^y_0)| against |ε|.
    correlation_slope: Option<f64>,
}

fn slope(reports: &[ImbalanceReport], y: impl Fn(&ImbalanceReport) -> f64) -> Option<f64> {
    let used: Vec<&ImbalanceReport> = reports.iter().filter(|r| r.epsilon != 0.0 && y(r) != 0.0).collect();
    let xs: Vec<f64> = used.iter().map(|r| r.epsilon).collect();
    let ys: Vec<f64> = used.iter().map(|r| y(r)).collect();
    let mut distinct: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return None;
    }
    loglog_slope(&xs, &ys).ok()
}

pub fn imperfect(cfg: &RunConfig) -> Result<(), CliError> {
    let reports = imbalance_sweep(cfg.imperfect_r, &cfg.epsilons, &cfg.comb)?;
    let export = ImbalanceExport {
        r: cfg.imperfect_r,
        residual_slope: slope(&reports, |r| r.residual),
        correlation_slope: slope(&reports, |r| r.zy_correlation),
        reports,
    };
    let out = Output::new(&cfg.out_dir)?;
    match cfg.format {
        Format::Json => out.json("imperfect.json", &export),
        Format::Csv => out.write("imperfect.csv", |w| {
            writeln!(
                w,
                "r,epsilon,first_order_variance,exact_variance,residual,exact_variance_y,zy_correlation,degradation"
            )?;
            for r in &export.reports {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    format_sig9(r.r),
                    format_sig9(r.epsilon),
                    format_sig9(r.first_order_variance),
                    format_sig9(r.exact_variance),
                    format_sig9(r.residual),
                    format_sig9(r.exact_variance_y),
                    format_sig9(r.zy_correlation),
                    format_sig9(r.degradation)
                )?;
            }
            Ok(())
        }),
    }
}

#[derive(Serialize)]
struct Timings {
    build_s: f64,
    nullifiers_s: f64,
    total_s: f64,
}

#[derive(Serialize)]
struct BenchReport {
    modes: usize,
    frequencies: usize,
    n_min: i64,
    n_max: i64,
    storage: &'static str,
    nullifiers: usize,
    min_db: f64,
    max_db: f64,
    storage_bytes: usize,
    dense_bytes: usize,
    memory_ratio: f64,
    timings: Timings,
}

/// Always JSON; the timings make this the one output that is not
/// reproducible byte for byte.
pub fn bench(cfg: &RunConfig) -> Result<(), CliError> {
    let frequencies = cfg.bench_modes / 2;
    let n_min = -(frequencies as i64 / 2);
    let n_max = n_min + frequencies as i64 - 1;
    let comb = CombSpec::new(cfg.comb.delta_omega, cfg.comb.omega0, n_min, n_max)?;

    let start = Instant::now();
    let state = build_comb_state_with(&cfg.pumps, &comb, &cfg.build)?;
    let built = start.elapsed();
    let rows = nullifier_table(&state, &cfg.pumps, &comb, None)?;
    let total = start.elapsed();
    verify(&state)?;

    let dbs = rows.iter().map(|r| r.db);
    let report = BenchReport {
        modes: state.mode_count(),
        frequencies,
        n_min,
        n_max,
        storage: if state.is_dense() { "dense" } else { "sparse" },
        nullifiers: rows.len(),
        min_db: dbs.clone().fold(f64::INFINITY, f64::min),
        max_db: dbs.fold(f64::NEG_INFINITY, f64::max),
        storage_bytes: state.storage_bytes(),
        dense_bytes: state.dense_bytes(),
        memory_ratio: state.dense_bytes() as f64 / state.storage_bytes() as f64,
        timings: Timings {
            build_s: built.as_secs_f64(),
            nullifiers_s: (total - built).as_secs_f64(),
            total_s: total.as_secs_f64(),
        },
    };
    log::info!("bench: {} modes in {:.3} s", report.modes, report.timings.total_s);
    Output::new(&cfg.out_dir)?.json("bench.json", &report)
}
