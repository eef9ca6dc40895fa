//! The runner's subcommands. Each writes its files into the configured output directory and
//! returns a flat summary that scans merge into one table.

use std::path::{Path, PathBuf};

use noiseharvest_core::bath::{discretize_closed, fit_pseudomodes_detailed, pm_hyb_check, HybridizationSpec, PseudomodeFit};
use noiseharvest_core::circuit::{dump_schedule, gate_counts, make_layout, schedule, GateDurations, Timing};
use noiseharvest_core::lindblad::{
    build_lindblad, closed_bath_gf, eps_tot, gf_freq, initial_rdm, pm_greater_series, prep_error, relaxation_rate, rlm_reference_gf,
    steady_state, GreenSeries, QuadraticLindblad, SteadyRDM,
};
use noiseharvest_core::measurement::{
    assemble_gf, execute_plans_block, prepared_state, EstimateMode, ExperimentCircuit, GFEstimate, SampleMode,
};
use noiseharvest_core::simulator::{dissipation_rate_check, NoiseModel};
use serde_json::{json, Value};

use crate::config::{BathMode, Engine, ExperimentConfig};
use crate::error::{HarvestError, Result};
use crate::io::{write_freq, write_json, write_results, write_series, write_table, BathJson};

/// Named scalar results of one command, in a fixed order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub fields: Vec<(String, f64)>,
    pub files: Vec<PathBuf>,
}

impl Summary {
    fn push(&mut self, key: &str, v: f64) {
        self.fields.push((key.to_string(), v));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

fn hyb_spec(cfg: &ExperimentConfig) -> Result<HybridizationSpec> {
    let m = &cfg.model;
    Ok(HybridizationSpec::new(m.gamma, m.d, m.beta, m.epsilon)?)
}

fn require_pseudomode(cfg: &ExperimentConfig, cmd: &str) -> Result<()> {
    if cfg.bath.mode != BathMode::Pseudomode {
        return Err(HarvestError::Config(format!("{cmd} needs mode = pseudomode")));
    }
    Ok(())
}

struct PmModel {
    fit: PseudomodeFit,
    ql: QuadraticLindblad,
    rdm: SteadyRDM,
}

fn pm_model(cfg: &ExperimentConfig, spec: &HybridizationSpec) -> Result<PmModel> {
    let fit = fit_pseudomodes_detailed(spec, cfg.bath.n_b)?;
    let ql = build_lindblad(spec.epsilon_imp, &fit.bath);
    let rdm = steady_state(&ql)?;
    Ok(PmModel { fit, ql, rdm })
}

struct Out<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Out<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Out { dir: &cfg.run.output, files: Vec::new() }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }
}

fn frequency_grid(d: f64) -> Vec<f64> {
    (0..=800).map(|i| -d + 2.0 * d * i as f64 / 800.0).collect()
}

/// Fits (or discretizes) the bath and writes it with spectra and a fit report.
pub fn cmd_fit(cfg: &ExperimentConfig) -> Result<Summary> {
    cfg.validate()?;
    let spec = hyb_spec(cfg)?;
    let mut out = Out::new(cfg);
    let mut s = Summary::default();
    let n_b = cfg.bath.n_b;
    match cfg.bath.mode {
        BathMode::Closed => {
            let b = discretize_closed(&spec, n_b)?;
            write_json(&out.path(&format!("bath_Nb{n_b}.json")), &BathJson::from(&b))?;
            s.push("N_b", n_b as f64);
        }
        BathMode::Pseudomode => {
            let m = pm_model(cfg, &spec)?;
            let f = &m.fit;
            write_json(&out.path(&format!("bath_Nb{n_b}.json")), &BathJson::from(&f.bath))?;
            let grid = frequency_grid(spec.half_bandwidth);
            let rows: Vec<Vec<String>> = grid
                .iter()
                .map(|&w| {
                    let tl = 2.0 * std::f64::consts::PI * spec.lesser_spectrum(w);
                    let tg = 2.0 * std::f64::consts::PI * spec.greater_spectrum(w);
                    vec![w.to_string(), tl.to_string(), f.emitters.model(w).to_string(), tg.to_string(), f.absorbers.model(w).to_string()]
                })
                .collect();
            write_table(
                &out.path(&format!("spectra_Nb{n_b}.csv")),
                &["omega", "target_lesser", "fit_lesser", "target_greater", "fit_greater"],
                &rows,
            )?;
            let hyb: Vec<_> = grid.iter().map(|&w| pm_hyb_check(&f.bath, w).0).collect();
            write_freq(&out.path(&format!("pm_hybridization_retarded_Nb{n_b}.csv")), &grid, &hyb)?;
            let rate = relaxation_rate(&m.ql)?;
            let sum_emit: f64 = f.bath.emitters().map(|p| f.bath.couplings[p].powi(2)).sum();
            let report = json!({
                "N_b": n_b,
                "lambda": f.bath.rate,
                "chi2": f.chi2(),
                "chi": f.chi2().sqrt(),
                "chi2_emitters": f.emitters.chi2,
                "chi2_absorbers": f.absorbers.chi2,
                "window_lesser": [f.window_lesser.0, f.window_lesser.1],
                "window_greater": [f.window_greater.0, f.window_greater.1],
                "emitter_weight": sum_emit,
                "hybridization_weight": spec.total_weight(),
                "relaxation_rate": rate,
                "steady_state_residual": m.rdm.residual(&m.ql),
            });
            write_json(&out.path(&format!("fit_report_Nb{n_b}.json")), &report)?;
            s.push("N_b", n_b as f64);
            s.push("lambda", f.bath.rate);
            s.push("chi2", f.chi2());
            s.push("relaxation_rate", rate);
        }
    }
    s.files = out.files;
    Ok(s)
}

/// Exact reference curves: the original model, and the pseudomode or closed-bath model.
pub fn cmd_exact(cfg: &ExperimentConfig) -> Result<Summary> {
    cfg.validate()?;
    let spec = hyb_spec(cfg)?;
    let times = cfg.time_grid_with_origin();
    let mut out = Out::new(cfg);
    let mut s = Summary::default();
    let original = rlm_reference_gf(&spec, &times)?;
    write_series(&out.path("exact_original.csv"), &original)?;
    match cfg.bath.mode {
        BathMode::Closed => {
            let b = discretize_closed(&spec, cfg.bath.n_b)?;
            let g = closed_bath_gf(&spec, &b, &times)?;
            write_series(&out.path("closed_bath.csv"), &g)?;
            s.push("eps_vs_original", eps_tot(&g, &original)?);
            s.push("max_deviation", max_deviation(&g, &original));
        }
        BathMode::Pseudomode if spec.gamma == 0.0 => {}
        BathMode::Pseudomode => {
            let m = pm_model(cfg, &spec)?;
            let g = pm_greater_series(&m.ql, &m.rdm, &times)?;
            write_series(&out.path("exact_pm.csv"), &g)?;
            let grid = frequency_grid(spec.half_bandwidth);
            let mut gr = Vec::with_capacity(grid.len());
            for &w in &grid {
                gr.push(gf_freq(&m.ql, &m.rdm, w)?.retarded[(0, 0)]);
            }
            write_freq(&out.path("exact_pm_retarded_freq.csv"), &grid, &gr)?;
            let t_preps: Vec<f64> = (0..=12).map(|k| 5.0 * k as f64).collect();
            let errs = prep_error(&m.ql, &initial_rdm(&m.fit.bath), &t_preps)?;
            let rows: Vec<Vec<String>> = t_preps.iter().zip(&errs).map(|(t, e)| vec![t.to_string(), e.to_string()]).collect();
            write_table(&out.path("prep_error.csv"), &["t_prep", "error"], &rows)?;
            let rate = relaxation_rate(&m.ql)?;
            write_json(
                &out.path("exact_report.json"),
                &json!({
                    "N_b": cfg.bath.n_b,
                    "lambda": m.fit.bath.rate,
                    "relaxation_rate": rate,
                    "occupation": m.rdm.occupation(),
                    "eps_pm_vs_original": eps_tot(&g, &original)?,
                }),
            )?;
            s.push("eps_vs_original", eps_tot(&g, &original)?);
            s.push("max_deviation", max_deviation(&g, &original));
            s.push("relaxation_rate", rate);
        }
    }
    s.files = out.files;
    Ok(s)
}

fn max_deviation(a: &GreenSeries, b: &GreenSeries) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn experiment_circuit(cfg: &ExperimentConfig, spec: &HybridizationSpec, fit: &PseudomodeFit) -> Result<ExperimentCircuit> {
    Ok(ExperimentCircuit {
        imp_energy: spec.epsilon_imp,
        bath: fit.bath.clone(),
        layout: make_layout(cfg.bath.n_b, cfg.bath.n_anc)?,
        tau: cfg.circuit.tau,
        t1: cfg.noise.t1,
        durations: GateDurations { one_qubit: cfg.noise.t_1q, two_qubit: cfg.noise.t_2q },
    })
}

/// Circuit (or exact pseudomode) Green's function on the configured grid, with ε_tot against
/// both references. `state_dump` receives the prepared encoded-frame state.
pub fn cmd_simulate(cfg: &ExperimentConfig, state_dump: Option<&Path>) -> Result<Summary> {
    cfg.validate()?;
    require_pseudomode(cfg, "simulate")?;
    let spec = hyb_spec(cfg)?;
    let m = pm_model(cfg, &spec)?;
    let mut out = Out::new(cfg);
    let mut s = Summary::default();
    let (series, estimates, meta) = match cfg.run.engine {
        Engine::Exact => {
            let g = pm_greater_series(&m.ql, &m.rdm, &cfg.time_grid())?;
            let est = g
                .times
                .iter()
                .zip(&g.values)
                .map(|(&t, &value)| GFEstimate { t, value, mode: EstimateMode::ExactExpectation, n_shots: None, stderr: None })
                .collect();
            (g, est, Value::Null)
        }
        Engine::Circuit => {
            let circ = experiment_circuit(cfg, &spec, &m.fit)?;
            let mode = match cfg.run.shots {
                Some(n) => SampleMode::Shots { n, seed: cfg.run.seed },
                None => SampleMode::Exact,
            };
            let prog = circ.program(cfg.circuit.t_prep, cfg.circuit.t_max)?;
            if let Some(p) = state_dump {
                crate::io::write_state(p, &prepared_state(&circ, cfg.circuit.t_prep)?)?;
            }
            let results = execute_plans_block(&circ, cfg.circuit.t_prep, &cfg.time_grid(), mode)?;
            let gf = assemble_gf(&results)?;
            let meta = json!({
                "lambda": prog.meta.lambda,
                "t_trotter": prog.meta.t_trotter,
                "t_wait": prog.meta.t_wait,
                "n_prep": prog.meta.n_prep,
                "t_prep_realized": prog.meta.t_prep(),
            });
            (gf.series, gf.estimates, meta)
        }
    };
    let pm = pm_greater_series(&m.ql, &m.rdm, &series.times)?;
    let original = rlm_reference_gf(&spec, &series.times)?;
    let name = if cfg.run.engine == Engine::Circuit { "circuit_gf.csv" } else { "exact_pm.csv" };
    write_series(&out.path(name), &series)?;
    write_results(&out.path("results.csv"), &estimates)?;
    let (e_pm, e_orig) = (eps_tot(&series, &pm)?, eps_tot(&series, &original)?);
    write_json(
        &out.path("simulate_report.json"),
        &json!({
            "engine": match cfg.run.engine { Engine::Exact => "exact", Engine::Circuit => "circuit" },
            "eps_tot_vs_exact_pm": e_pm,
            "eps_tot_vs_exact_original": e_orig,
            "eps_pm_vs_original": eps_tot(&pm, &original)?,
            "times": series.times,
            "schedule": meta,
        }),
    )?;
    s.push("eps_pm", e_pm);
    s.push("eps_original", e_orig);
    s.files = out.files;
    Ok(s)
}

/// Gate-count table and text dump of the full schedule.
pub fn cmd_report_circuit(cfg: &ExperimentConfig) -> Result<Summary> {
    cfg.validate()?;
    require_pseudomode(cfg, "report-circuit")?;
    let spec = hyb_spec(cfg)?;
    let fit = fit_pseudomodes_detailed(&spec, cfg.bath.n_b)?;
    let layout = make_layout(cfg.bath.n_b, cfg.bath.n_anc)?;
    let timing = Timing {
        tau: cfg.circuit.tau,
        t_prep: cfg.circuit.t_prep,
        t: cfg.circuit.t_max,
        t1: cfg.noise.t1,
        durations: GateDurations { one_qubit: cfg.noise.t_1q, two_qubit: cfg.noise.t_2q },
    };
    let sched = schedule(spec.epsilon_imp, &fit.bath, &layout, &timing)?;
    let c = gate_counts(&sched);
    let nm = NoiseModel::for_schedule(&sched, cfg.noise.t1)?;
    let realized = dissipation_rate_check(&sched, &nm)?;
    let meta = sched.meta.clone().expect("program schedules carry metadata");
    let mut out = Out::new(cfg);
    let rows: Vec<(&str, f64)> = vec![
        ("n_qubits", sched.n_qubits as f64),
        ("block_size", layout.block_size() as f64),
        ("init", c.init as f64),
        ("encoding_two_qubit", c.encoding_two_qubit as f64),
        ("encoding_one_qubit", c.encoding_one_qubit as f64),
        ("decoding_two_qubit", c.decoding_two_qubit as f64),
        ("coupling_two_qubit", c.coupling_two_qubit as f64),
        ("cz_trick", c.cz_trick as f64),
        ("trotter_one_qubit", c.trotter_one_qubit as f64),
        ("n_steps", c.n_steps as f64),
        ("two_qubit_per_step", c.two_qubit_per_step as f64),
        ("one_qubit_per_step", c.one_qubit_per_step as f64),
        ("t_trotter", c.t_trotter),
        ("t_wait", meta.t_wait),
        ("lambda", meta.lambda),
        ("lambda_realized", realized),
        ("total", c.total as f64),
    ];
    let table: Vec<Vec<String>> = rows.iter().map(|(k, v)| vec![k.to_string(), v.to_string()]).collect();
    write_table(&out.path("gate_counts.csv"), &["quantity", "value"], &table)?;
    crate::io::write_atomic(&out.path("circuit.txt"), dump_schedule(&sched).as_bytes())?;
    let mut s = Summary::default();
    for (k, v) in rows {
        s.push(k, v);
    }
    s.files = out.files;
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Fit,
    Exact,
    Simulate,
    ReportCircuit,
}

impl Command {
    pub fn run(self, cfg: &ExperimentConfig) -> Result<Summary> {
        match self {
            Command::Fit => cmd_fit(cfg),
            Command::Exact => cmd_exact(cfg),
            Command::Simulate => cmd_simulate(cfg, None),
            Command::ReportCircuit => cmd_report_circuit(cfg),
        }
    }
}

/// Runs `command` once per value of `key`, each into `<output>/<key>=<value>/`, and merges the
/// summaries into `<output>/scan_<key>.csv`.
pub fn cmd_scan(cfg: &ExperimentConfig, key: &str, values: &[String], command: Command) -> Result<Summary> {
    if values.is_empty() {
        return Err(HarvestError::Config(String::from("scan needs at least one value")));
    }
    let base = cfg.run.output.clone();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::with_capacity(values.len());
    let mut files = Vec::new();
    for v in values {
        let mut c = cfg.clone();
        c.set(key, v)?;
        c.run.output = base.join(format!("{key}={v}"));
        let s = command.run(&c)?;
        let keys: Vec<String> = s.fields.iter().map(|(k, _)| k.clone()).collect();
        match &header {
            None => header = Some(keys),
            Some(h) if *h != keys => return Err(HarvestError::Config(format!("scan point {key}={v} produced different columns"))),
            _ => {}
        }
        let mut row = vec![v.clone()];
        row.extend(s.fields.iter().map(|(_, x)| x.to_string()));
        rows.push(row);
        files.extend(s.files);
    }
    let mut h = vec![key.to_string()];
    h.extend(header.unwrap_or_default());
    let path = base.join(format!("scan_{key}.csv"));
    let hr: Vec<&str> = h.iter().map(String::as_str).collect();
    write_table(&path, &hr, &rows)?;
    files.push(path);
    Ok(Summary { fields: Vec::new(), files })
}
