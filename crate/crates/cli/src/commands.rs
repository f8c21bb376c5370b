//! Subcommand implementations.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use floquet_core::export::{fmt_sig, peaks_json, series_csv, susceptibility_csv, PeakSummary};
use floquet_core::observables::uniform_grid;
use floquet_core::propagator::magnus_residual;
use floquet_core::{
    compile_sequence, default_m, detect_peaks, fs_scan, magnus_zeroth, one_period_operator,
    run_protocol, stroboscopic_evolve, DriveAssignment, DrivePreset, LatticeConfig,
    ObservableSeries, PropagatorOptions, UnitaryCache, UnitaryMatrix,
};

use crate::config::RunConfig;
use crate::plot;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn write(cfg: &RunConfig, name: &str, contents: &str) -> Result<()> {
    let path = cfg.out_path(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Records wall-clock timings unless the run is deterministic.
fn write_timings(cfg: &RunConfig, timings: &[(&str, f64)]) -> Result<()> {
    if cfg.output.deterministic {
        return Ok(());
    }
    let map: serde_json::Map<String, serde_json::Value> = timings
        .iter()
        .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
        .collect();
    let text = serde_json::to_string_pretty(&map).expect("timings serialize");
    write(cfg, "timings.json", &(text + "\n"))
}

fn build_unitary(
    cfg: &RunConfig,
    lattice: &LatticeConfig,
    drive: &DriveAssignment,
    opts: &PropagatorOptions,
) -> Result<UnitaryMatrix> {
    let u = match &cfg.propagator.cache_dir {
        Some(dir) => UnitaryCache::new(dir).get_or_build(lattice, drive, opts)?,
        None => one_period_operator(lattice, drive, opts)?,
    };
    Ok(u)
}

fn series_plots(cfg: &RunConfig, stem: &str, title: &str, series: &ObservableSeries) -> Result<()> {
    if !cfg.output.svg {
        return Ok(());
    }
    let xs: Vec<f64> = match &series.periods {
        Some(p) => p.iter().map(|&n| n as f64).collect(),
        None => series.times.clone(),
    };
    let xlabel = if series.periods.is_some() { "n (periods)" } else { "t (1/g)" };
    let l = series.num_sites;
    let sz: Vec<(String, Vec<f64>)> = (1..=l).map(|j| (format!("sz_{j}"), series.site(j))).collect();
    write(
        cfg,
        &format!("{stem}_sz.svg"),
        &plot::line_plot(&format!("{title}: magnetization"), xlabel, "<sigma^z_j>", &xs, &sz),
    )?;
    let mut corr: Vec<(String, Vec<f64>)> =
        (1..l).map(|j| (format!("C_{j}"), series.bond(j))).collect();
    if let Some(f) = &series.fidelity {
        corr.push(("fidelity".into(), f.clone()));
    }
    write(
        cfg,
        &format!("{stem}_corr.svg"),
        &plot::line_plot(&format!("{title}: bond correlations"), xlabel, "C_j", &xs, &corr),
    )?;
    let bonds: Vec<f64> = (1..l).map(|j| j as f64).collect();
    let by_bond: Vec<Vec<f64>> = (1..l).map(|j| series.bond(j)).collect();
    write(
        cfg,
        &format!("{stem}_corr_map.svg"),
        &plot::heatmap(
            &format!("{title}: C_j over time"),
            xlabel,
            "bond j",
            &xs,
            &bonds,
            &by_bond,
            false,
            "C_j",
        ),
    )
}

pub fn fs_scan_cmd(cfg: &RunConfig) -> Result<()> {
    let lattice = cfg.lattice()?;
    let drive = cfg.drive()?;
    let opts = cfg.propagator_options()?;
    let s = &cfg.scan;
    let omegas = uniform_grid(s.omega_min, s.omega_max, s.omega_step)?;
    let times = uniform_grid(s.t_min, s.t_max, s.t_step)?;
    prepare_out_dir(cfg.out_dir())?;
    log::info!(
        "scanning {} frequencies x {} times, L={}, multipliers {:?}",
        omegas.len(),
        times.len(),
        lattice.num_sites,
        drive.multipliers()
    );
    let start = Instant::now();
    let map = fs_scan(&lattice, &drive, &omegas, &times, s.delta_omega, &opts)?;
    let elapsed = start.elapsed().as_secs_f64();
    let peaks = detect_peaks(&map, s.prominence);
    write(cfg, "fs_scan.csv", &susceptibility_csv(&map))?;
    let one_sided: Vec<f64> = map
        .omegas
        .iter()
        .zip(&map.one_sided)
        .filter(|(_, &b)| b)
        .map(|(w, _)| *w)
        .collect();
    let summary = PeakSummary {
        num_sites: lattice.num_sites,
        coupling: lattice.coupling,
        multipliers: drive.multipliers(),
        delta_omega: map.delta_omega,
        omega_range: [omegas[0], omegas[omegas.len() - 1]],
        time_range: [times[0], times[times.len() - 1]],
        min_chi_f: map.min_value(),
        one_sided_frequencies: one_sided,
        peaks: &peaks,
    };
    write(cfg, "peaks.json", &(peaks_json(&summary) + "\n"))?;
    if cfg.output.svg {
        let by_time: Vec<Vec<f64>> = (0..times.len())
            .map(|k| map.values.iter().map(|row| row[k]).collect())
            .collect();
        write(
            cfg,
            "fs_scan.svg",
            &plot::heatmap(
                "fidelity susceptibility",
                "Omega (g)",
                "t (1/g)",
                &omegas,
                &times,
                &by_time,
                true,
                "chi_F",
            ),
        )?;
        write(
            cfg,
            "fs_profile.svg",
            &plot::line_plot(
                "max over t of chi_F",
                "Omega (g)",
                "chi_F (1/g^2)",
                &omegas,
                &[("max_t chi_F".into(), map.profile())],
            ),
        )?;
    }
    write_timings(cfg, &[("fs_scan_seconds", elapsed)])?;
    println!("{} resonance line(s):", peaks.len());
    for p in &peaks {
        println!(
            "  Omega = {} g  height {}  prominence {}  width {}",
            fmt_sig(p.omega),
            fmt_sig(p.height),
            fmt_sig(p.prominence),
            fmt_sig(p.width)
        );
    }
    Ok(())
}

pub fn evolve_cmd(cfg: &RunConfig) -> Result<()> {
    let lattice = cfg.lattice()?;
    let drive = cfg.drive()?;
    let opts = cfg.propagator_options()?;
    let psi0 = cfg.initial_state()?;
    prepare_out_dir(cfg.out_dir())?;
    let eff = magnus_zeroth(&lattice, &drive)?;
    log::info!("zeroth-order effective Hamiltonian: {} term(s)", eff.operator()?.terms().len());
    let start = Instant::now();
    let u = build_unitary(cfg, &lattice, &drive, &opts)?;
    let build = start.elapsed().as_secs_f64();
    let states = stroboscopic_evolve(&psi0, &u, cfg.protocol.periods)?;
    let series = ObservableSeries::stroboscopic(drive.period(), &states, Some(&psi0))?;
    series.validate()?;
    write(cfg, "evolve.csv", &series_csv(&series))?;
    series_plots(cfg, "evolve", "stroboscopic evolution", &series)?;
    write_timings(cfg, &[("unitary_build_seconds", build)])?;
    let last = series.len() - 1;
    println!(
        "evolved {} period(s) of T = {}; final fidelity {}",
        cfg.protocol.periods,
        fmt_sig(drive.period()),
        fmt_sig(series.fidelity.as_ref().map_or(f64::NAN, |f| f[last]))
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct SteerSummary {
    sequence: String,
    operator: String,
    periods_per_block: u32,
    total_periods: usize,
    center_bond: usize,
    max_center_correlation: f64,
    max_center_correlation_period: usize,
    final_fidelity: f64,
}

pub fn steer_cmd(cfg: &RunConfig) -> Result<()> {
    let lattice = cfg.lattice()?;
    let opts = cfg.propagator_options()?;
    let psi0 = cfg.initial_state()?;
    let m = match cfg.protocol.m {
        Some(m) => m,
        None => default_m(&lattice, cfg.protocol.strict)?,
    };
    let seq = compile_sequence(&cfg.protocol.sequence, m)?;
    let d1 = cfg.drive_with_preset(DrivePreset::OddOmega1EvenOmega0)?;
    let d2 = cfg.drive_with_preset(DrivePreset::OddOmega0EvenOmega1)?;
    prepare_out_dir(cfg.out_dir())?;
    log::info!("protocol {seq}: {}", seq.operator_string());
    let start = Instant::now();
    let (u1, u2) = {
        let (a, b) = rayon::join(
            || build_unitary(cfg, &lattice, &d1, &opts),
            || build_unitary(cfg, &lattice, &d2, &opts),
        );
        (a?.with_label("U1"), b?.with_label("U2"))
    };
    let build = start.elapsed().as_secs_f64();
    let series = run_protocol(&psi0, &u1, &u2, &seq, d1.period())?;
    series.validate()?;
    write(cfg, "steer.csv", &series_csv(&series))?;
    series_plots(cfg, "steer", "steering protocol", &series)?;
    let center = (lattice.num_sites / 2).max(1);
    let c = series.bond(center);
    let (best_k, best) = c
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let fidelity = series.fidelity.as_ref().map_or(f64::NAN, |f| f[f.len() - 1]);
    let summary = SteerSummary {
        sequence: cfg.protocol.sequence.clone(),
        operator: seq.operator_string(),
        periods_per_block: m,
        total_periods: seq.total_periods(),
        center_bond: center,
        max_center_correlation: best,
        max_center_correlation_period: series.periods.as_ref().map_or(best_k, |p| p[best_k]),
        final_fidelity: fidelity,
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write(cfg, "summary.json", &(text + "\n"))?;
    write_timings(cfg, &[("unitary_build_seconds", build)])?;
    println!("sequence {seq}, {} periods", seq.total_periods());
    println!(
        "max C_{},{} = {} at n = {}",
        center,
        center + 1,
        fmt_sig(summary.max_center_correlation),
        summary.max_center_correlation_period
    );
    println!("final fidelity = {}", fmt_sig(fidelity));
    Ok(())
}

pub fn magnus_check_cmd(cfg: &RunConfig) -> Result<()> {
    let drive = cfg.drive()?;
    let opts = cfg.propagator_options()?;
    if cfg.scan.couplings.is_empty() {
        return Err(CliError::Usage("scan.couplings must list at least one coupling".into()));
    }
    prepare_out_dir(cfg.out_dir())?;
    let period = drive.period();
    let mut out = String::from(
        "# J0 in units of g; residual = max |exp(i H0 T) U(T) - exp(-i H_F T)|; ratio = previous residual / this residual\n",
    );
    out.push_str("J0,residual,ratio,residual_over_J0T,effective_terms\n");
    let mut previous: Option<f64> = None;
    println!("T = {}", fmt_sig(period));
    for &j0 in &cfg.scan.couplings {
        let lattice = LatticeConfig::new(cfg.lattice.num_sites, cfg.lattice.g, j0)?;
        let terms = magnus_zeroth(&lattice, &drive)?.operator()?.terms().len();
        let u = build_unitary(cfg, &lattice, &drive, &opts)?;
        let r = magnus_residual(&lattice, &drive, &u)?;
        let ratio = previous.map(|p| p / r);
        let scaled = if j0 > 0.0 { r / (j0 * period) } else { f64::NAN };
        out.push_str(&format!(
            "{},{},{},{},{terms}\n",
            fmt_sig(j0),
            fmt_sig(r),
            ratio.map_or(String::new(), fmt_sig),
            if j0 > 0.0 { fmt_sig(scaled) } else { String::new() }
        ));
        println!(
            "J0 = {}  residual = {}{}",
            fmt_sig(j0),
            fmt_sig(r),
            ratio.map_or(String::new(), |q| format!("  ratio = {}", fmt_sig(q)))
        );
        previous = Some(r);
    }
    write(cfg, "magnus.csv", &out)
}
