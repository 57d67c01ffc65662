//! One function per command. Each builds its tables fully in memory and
//! writes every file after the computation has finished.

use std::path::Path;

use otto_core::cycle::{
    cutoff_non_markovianity, ift_reference, run_cycle, sweep_cutoff, sweep_population, CycleConfig, CycleResult,
    PopulationSweep,
};
use otto_core::dynamics::adiabaticity_with;
use otto_core::measures::NonMarkovReport;
use otto_core::model::beta_from_population;
use otto_core::{Execution, Result as CoreResult};

use crate::config::{RunConfig, TTilde};
use crate::output::{flag, num, opt_num, output_path, us, Table, VERSION};
use crate::{CliError, Command, Status};

pub fn dispatch(command: Command, cfg: &RunConfig, stem: &Path) -> Result<Status, CliError> {
    let exec = Execution::default();
    let header = metadata(command, cfg)?;
    match command {
        Command::Rates => rates(cfg, &header, stem, exec),
        Command::Nonmarkov => nonmarkov(cfg, &header, stem, exec),
        Command::Simulate => simulate(cfg, &header, stem, exec),
        Command::SweepCutoff => cutoff(cfg, &header, stem, exec),
        Command::SweepPopulation => population(cfg, &header, stem, exec),
        Command::Ift => ift(cfg, &header, stem),
    }
}

/// Local maxima listed in the simulate summary.
const SUMMARY_PEAKS: usize = 3;

/// Comment lines shared by every file of a run.
fn metadata(command: Command, cfg: &RunConfig) -> CoreResult<Vec<String>> {
    let c = &cfg.cycle;
    let mut h = vec![format!("otto {VERSION}"), format!("command: {}", command.name())];
    h.extend(cfg.entries.iter().map(|(k, v)| format!("config: {k} = {v}")));
    let derived = [
        ("omega", c.system.omega()),
        ("omega_tilde", c.system.omega_tilde()),
        ("epsilon_hot", c.epsilon_hot()?),
        ("epsilon_cold", c.epsilon_cold()?),
        ("beta_hot", c.beta_hot()?),
        ("beta_cold", c.beta_cold()?),
        ("xi", adiabaticity_with(&c.system, c.unitary_steps)?),
    ];
    h.extend(derived.iter().map(|(k, v)| format!("derived: {k} = {}", num(*v))));
    h.push("units: time in us; energies, frequencies and rates in rad/ms; hbar = k_B = 1".into());
    Ok(h)
}

fn rates(cfg: &RunConfig, header: &[String], stem: &Path, exec: Execution) -> Result<Status, CliError> {
    let r = otto_core::cycle::hot_rates(&cfg.cycle, cfg.rates_t_end, exec)?;
    let mut t = Table::new(header, &["t_us", "gamma", "gamma_tilde", "big_gamma"])?;
    for (time, rate) in r.samples() {
        t.row([us(time), num(rate.gamma), num(rate.gamma_tilde), num(rate.big_gamma)])?;
    }
    for w in r.warnings() {
        eprintln!("warning: {w}");
    }
    t.write_to(&output_path(stem, None))?;
    Ok(Status::Ok)
}

fn nonmarkov(cfg: &RunConfig, header: &[String], stem: &Path, exec: Execution) -> Result<Status, CliError> {
    let c = &cfg.cycle;
    let (t0, t1) = c.q_window;
    let rates = otto_core::cycle::hot_rates(c, t1.max(c.heating.t_max), exec)?;
    let report = NonMarkovReport::new(&rates, t0, t1)?;
    let w = &report.witness;
    let mut witness = Table::new(header, &["t_us", "big_gamma", "gamma_tilde", "f"])?;
    for i in 0..w.times.len() {
        witness.row([us(w.times[i]), num(w.lambda_big_gamma[i]), num(w.lambda_gamma_tilde[i]), num(w.f[i])])?;
    }

    let qs: Vec<CoreResult<NonMarkovReport>> = exec.map(&cfg.nonmarkov_omega_c_list, |&wc| {
        cutoff_non_markovianity(c, wc, Execution::Sequential)
    });
    let mut q = Table::new(header, &["omega_c", "Q"])?;
    for (wc, r) in cfg.nonmarkov_omega_c_list.iter().zip(qs) {
        q.row([num(*wc), num(r?.q)])?;
    }
    println!("Q(omega_c = {}) = {}", c.hot.omega_c, num(report.q));
    witness.write_to(&output_path(stem, Some("witness")))?;
    q.write_to(&output_path(stem, Some("q")))?;
    Ok(Status::Ok)
}

fn summary_lines(r: &CycleResult) -> Vec<(String, String)> {
    let mut s = vec![];
    let mut put = |k: &str, v: String| s.push((k.to_string(), v));
    match &r.eta_max {
        Some(w) => {
            put("eta_max", num(w.peak.eta));
            put("t_tilde_max_us", us(w.peak.t));
            put("window_lo_us", us(w.t_lo));
            put("window_hi_us", us(w.t_hi));
        }
        None => {
            for k in ["eta_max", "t_tilde_max_us", "window_lo_us", "window_hi_us"] {
                put(k, String::new());
            }
        }
    }
    for (i, p) in r.peaks.iter().take(SUMMARY_PEAKS).enumerate() {
        put(&format!("peak{}_eta", i + 1), num(p.eta));
        put(&format!("peak{}_t_us", i + 1), us(p.t));
    }
    put("eta_sat", opt_num(r.eta_sat));
    put("t_eq_us", opt_num(r.t_eq.map(|t| t * 1e3)));
    put("O_p", num(r.o_p));
    put("Q", num(r.q()));
    put("W1", num(r.w1));
    put("max_trace_deviation", num(r.heating.max_trace_deviation()));
    put("min_eigenvalue", num(r.heating.min_eigenvalue()));
    s
}

fn simulate(cfg: &RunConfig, header: &[String], stem: &Path, exec: Execution) -> Result<Status, CliError> {
    let r = run_cycle(&cfg.cycle, exec)?;
    let mut t = Table::new(header, &["t_us", "eta", "W1", "W2", "Q_hot", "valid"])?;
    for (time, e) in r.times.iter().zip(&r.energetics) {
        t.row([us(*time), opt_num(e.eta), num(e.w1), num(e.w2), num(e.q_hot), flag(e.valid_engine)])?;
    }
    let lines = summary_lines(&r);
    let mut s = Table::new(header, &["quantity", "value"])?;
    for (k, v) in &lines {
        println!("{k} = {v}");
        s.row([k, v])?;
    }
    for d in &r.diagnostics {
        eprintln!("diagnostic: {d}");
    }
    let dump = if cfg.dump_trajectory {
        let tr = &r.heating;
        let mut d = Table::new(
            header,
            &["t_us", "rho00_re", "rho01_re", "rho01_im", "rho11_re", "trace_dev", "min_eig"],
        )?;
        for i in 0..tr.len() {
            let m = tr.states()[i].matrix().0;
            d.row([
                us(tr.times()[i]),
                num(m[0][0].re),
                num(m[0][1].re),
                num(m[0][1].im),
                num(m[1][1].re),
                num(tr.trace_deviations()[i]),
                num(tr.min_eigenvalues()[i]),
            ])?;
        }
        Some(d)
    } else {
        None
    };
    t.write_to(&output_path(stem, None))?;
    s.write_to(&output_path(stem, Some("summary")))?;
    if let Some(d) = dump {
        d.write_to(&output_path(stem, Some("trajectory")))?;
    }
    Ok(if r.no_engine() { Status::NoEngine } else { Status::Ok })
}

fn cutoff(cfg: &RunConfig, header: &[String], stem: &Path, exec: Execution) -> Result<Status, CliError> {
    let rows = sweep_cutoff(&cfg.cycle, &cfg.omega_c_list, exec)?;
    let mut t = Table::new(
        header,
        &[
            "omega_c",
            "eta_max",
            "t_tilde_max_us",
            "window_lo_us",
            "window_hi_us",
            "eta_sat",
            "t_eq_us",
            "O_p",
            "Q",
            "error",
        ],
    )?;
    for row in &rows {
        match &row.result {
            Ok(s) => {
                let w = s.eta_max.as_ref();
                t.row([
                    num(row.omega_c),
                    opt_num(w.map(|w| w.peak.eta)),
                    opt_num(w.map(|w| w.peak.t * 1e3)),
                    opt_num(w.map(|w| w.t_lo * 1e3)),
                    opt_num(w.map(|w| w.t_hi * 1e3)),
                    opt_num(s.eta_sat),
                    opt_num(s.t_eq.map(|t| t * 1e3)),
                    num(s.o_p),
                    num(s.q),
                    String::new(),
                ])?;
            }
            Err(e) => {
                eprintln!("omega_c = {}: {e}", row.omega_c);
                let mut fields = vec![num(row.omega_c)];
                fields.extend(std::iter::repeat_n(String::new(), 8));
                fields.push(e.to_string());
                t.row(fields)?;
            }
        }
    }
    t.write_to(&output_path(stem, None))?;
    Ok(Status::Ok)
}

fn population_rows(t: &mut Table, prefix: &[String], sweep: &PopulationSweep) -> Result<(), CliError> {
    for row in &sweep.rows {
        let e = &row.energetics;
        let mut fields = prefix.to_vec();
        fields.extend([
            num(row.p_plus_hot),
            opt_num(e.eta),
            num(e.w),
            num(e.q_hot),
            flag(e.valid_engine),
        ]);
        t.row(fields)?;
    }
    Ok(())
}

fn population(cfg: &RunConfig, header: &[String], stem: &Path, exec: Execution) -> Result<Status, CliError> {
    let configs: Vec<CycleConfig> = cfg
        .population_omega_c_list
        .iter()
        .map(|&wc| cfg.cycle.with_omega_c(wc))
        .collect();
    let t_tildes: Vec<f64> = match &cfg.t_tilde {
        TTilde::Fixed(v) if v.len() == 1 => vec![v[0]; configs.len()],
        TTilde::Fixed(v) => v.clone(),
        TTilde::Auto => exec
            .map(&configs, |c| -> CoreResult<f64> {
                let r = run_cycle(c, Execution::Sequential)?;
                r.eta_max.map(|w| w.peak.t).ok_or_else(|| {
                    otto_core::Error::Consistency(format!(
                        "no engine operation at omega_c = {}; set t_tilde_us explicitly",
                        c.hot.omega_c
                    ))
                })
            })
            .into_iter()
            .collect::<CoreResult<_>>()?,
    };
    let mut table = Table::new(
        header,
        &["omega_c", "t_tilde_us", "p_plus_hot", "eta", "W", "Q_hot", "valid"],
    )?;
    let mut onset = Table::new(header, &["omega_c", "t_tilde_us", "onset_p_plus_hot"])?;
    for (c, &tt) in configs.iter().zip(&t_tildes) {
        let sweep = sweep_population(c, &cfg.p_hot_grid, tt, exec)?;
        let prefix = [num(c.hot.omega_c), us(tt)];
        population_rows(&mut table, &prefix, &sweep)?;
        onset.row([prefix[0].clone(), prefix[1].clone(), opt_num(sweep.onset)])?;
        println!(
            "omega_c = {}, t_tilde = {} us: onset p_plus_hot = {}",
            c.hot.omega_c,
            us(tt),
            opt_num(sweep.onset)
        );
    }
    table.write_to(&output_path(stem, None))?;
    onset.write_to(&output_path(stem, Some("onset")))?;
    Ok(Status::Ok)
}

fn ift(cfg: &RunConfig, header: &[String], stem: &Path) -> Result<Status, CliError> {
    let sweep = ift_reference(&cfg.cycle, &cfg.p_hot_grid)?;
    let h_hot = cfg.cycle.h_hot()?;
    let mut t = Table::new(header, &["p_plus_hot", "beta_hot", "eta", "W", "Q_hot", "valid"])?;
    for row in &sweep.rows {
        let e = &row.energetics;
        t.row([
            num(row.p_plus_hot),
            num(beta_from_population(&h_hot, row.p_plus_hot)?),
            opt_num(e.eta),
            num(e.w),
            num(e.q_hot),
            flag(e.valid_engine),
        ])?;
    }
    let mut onset = Table::new(header, &["onset_p_plus_hot"])?;
    onset.row([opt_num(sweep.onset)])?;
    println!("onset p_plus_hot = {}", opt_num(sweep.onset));
    if let Some(last) = sweep.rows.last() {
        println!("eta(p_plus_hot = {}) = {}", last.p_plus_hot, opt_num(last.eta()));
    }
    t.write_to(&output_path(stem, None))?;
    onset.write_to(&output_path(stem, Some("onset")))?;
    Ok(Status::Ok)
}
