//! On-disk formats: instances, estimates, scenarios, and augmentation plans
//! as JSON; traces as JSON lines; experiment reports as CSV with a frozen
//! column order.
//!
//! Decision lists in files omit the null decision: the entry at position p
//! becomes decision id p + 1, and id 0 is inserted as the all-zero null on
//! read. A leading explicit null (v = 0, a all zero) is accepted and
//! normalized away, so writing and re-reading is idempotent.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::augmentation::AugmentationPlan;
use crate::byzantine::{ByzantineScenario, RedRequest};
use crate::domain::{Decision, Instance, RequestDistribution, RequestType, Trace, TraceStep};
use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, TrialRow};
use crate::pricing::Estimates;

#[derive(Debug, Serialize, Deserialize)]
struct RawDecision {
    v: f64,
    a: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawType {
    p: f64,
    decisions: Vec<RawDecision>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawInstance {
    m: usize,
    budgets: Vec<f64>,
    distributions: Vec<Vec<RawType>>,
}

fn encode_menu(menu: &[Decision]) -> Vec<RawDecision> {
    menu.iter()
        .filter(|d| d.id != 0)
        .map(|d| RawDecision { v: d.value, a: d.consumption.clone() })
        .collect()
}

fn decode_menu(m: usize, raw: &[RawDecision]) -> Result<Vec<Decision>> {
    let mut menu = vec![Decision::null(m)];
    let explicit_null =
        raw.first().map_or(false, |d| d.v == 0.0 && d.a.len() == m && d.a.iter().all(|&x| x == 0.0));
    for rd in raw.iter().skip(explicit_null as usize) {
        if rd.a.len() != m {
            return Err(Error::Malformed(format!(
                "decision consumption has {} entries, expected {}",
                rd.a.len(),
                m
            )));
        }
        menu.push(Decision::new(menu.len(), rd.v, rd.a.clone())?);
    }
    Ok(menu)
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let raw = RawInstance {
        m: inst.m,
        budgets: inst.budgets.clone(),
        distributions: inst
            .distributions
            .iter()
            .map(|dist| {
                dist.types
                    .iter()
                    .map(|t| RawType { p: t.probability, decisions: encode_menu(&t.decisions) })
                    .collect()
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&raw)?)
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let raw: RawInstance = serde_json::from_str(text)?;
    let distributions = raw
        .distributions
        .iter()
        .map(|types| {
            let types = types
                .iter()
                .map(|t| RequestType::new(t.p, decode_menu(raw.m, &t.decisions)?))
                .collect::<Result<Vec<_>>>()?;
            RequestDistribution::new(types)
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(raw.m, raw.budgets, distributions)
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRed {
    t: f64,
    menu: Vec<RawDecision>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawScenario {
    m: usize,
    budgets: Vec<f64>,
    n_green: usize,
    green: Vec<Vec<RawDecision>>,
    red: Vec<RawRed>,
    opt_hat: f64,
    beta: f64,
}

pub fn scenario_to_json(scenario: &ByzantineScenario) -> Result<String> {
    let raw = RawScenario {
        m: scenario.m,
        budgets: scenario.budgets.clone(),
        n_green: scenario.greens.len(),
        green: scenario.greens.iter().map(|menu| encode_menu(menu)).collect(),
        red: scenario
            .reds
            .iter()
            .map(|r| RawRed { t: r.time, menu: encode_menu(&r.menu) })
            .collect(),
        opt_hat: scenario.opt_hat,
        beta: scenario.beta,
    };
    Ok(serde_json::to_string_pretty(&raw)?)
}

pub fn scenario_from_json(text: &str) -> Result<ByzantineScenario> {
    let raw: RawScenario = serde_json::from_str(text)?;
    if raw.n_green != raw.green.len() {
        return Err(Error::Malformed(format!(
            "n_green = {} but {} green menus listed",
            raw.n_green,
            raw.green.len()
        )));
    }
    let scenario = ByzantineScenario {
        m: raw.m,
        budgets: raw.budgets,
        greens: raw
            .green
            .iter()
            .map(|menu| decode_menu(raw.m, menu))
            .collect::<Result<Vec<_>>>()?,
        reds: raw
            .red
            .iter()
            .map(|r| Ok(RedRequest { time: r.t, menu: decode_menu(raw.m, &r.menu)? }))
            .collect::<Result<Vec<_>>>()?,
        opt_hat: raw.opt_hat,
        beta: raw.beta,
    };
    scenario.check()?;
    Ok(scenario)
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPlanEntry {
    i: usize,
    k: usize,
    theta: usize,
    r: f64,
}

pub fn plan_to_json(plan: &AugmentationPlan) -> Result<String> {
    let raw: Vec<RawPlanEntry> = plan
        .entries()
        .map(|(i, k, theta, r)| RawPlanEntry { i, k, theta, r })
        .collect();
    Ok(serde_json::to_string_pretty(&raw)?)
}

pub fn plan_from_json(text: &str) -> Result<AugmentationPlan> {
    let raw: Vec<RawPlanEntry> = serde_json::from_str(text)?;
    AugmentationPlan::from_entries(raw.into_iter().map(|e| (e.i, e.k, e.theta, e.r)))
}

pub fn estimates_to_json(est: &Estimates) -> Result<String> {
    Ok(serde_json::to_string_pretty(est)?)
}

pub fn estimates_from_json(text: &str) -> Result<Estimates> {
    Ok(serde_json::from_str(text)?)
}

/// One JSON object per executed step.
pub fn write_trace_jsonl(trace: &Trace, mut w: impl Write) -> Result<()> {
    for step in &trace.steps {
        serde_json::to_writer(&mut w, step)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_steps(r: impl Read) -> Result<Vec<TraceStep>> {
    let mut steps = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        steps.push(serde_json::from_str(&line)?);
    }
    Ok(steps)
}

/// Run-level digest of a trace as a two-line CSV.
pub fn trace_summary_csv(trace: &Trace, budgets: &[f64]) -> String {
    format!(
        "stop_time,total_value,max_utilization\n{},{},{}\n",
        trace.stop_time,
        trace.total_value,
        trace.max_utilization(budgets)
    )
}

fn csv_err(e: csv::Error) -> Error {
    Error::Malformed(format!("csv: {e}"))
}

/// Report rows with the frozen column order given by `TrialRow`'s fields.
pub fn write_report_csv(rows: &[TrialRow], w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_report_csv(r: impl Read) -> Result<Vec<TrialRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn config_from_json(text: &str) -> Result<ExperimentConfig> {
    Ok(serde_json::from_str(text)?)
}

pub fn config_to_json(cfg: &ExperimentConfig) -> Result<String> {
    Ok(serde_json::to_string_pretty(cfg)?)
}

pub fn read_instance_file(path: impl AsRef<Path>) -> Result<Instance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_instance_file(path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)?)?;
    Ok(())
}

pub fn read_scenario_file(path: impl AsRef<Path>) -> Result<ByzantineScenario> {
    scenario_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_scenario_file(path: impl AsRef<Path>, scenario: &ByzantineScenario) -> Result<()> {
    std::fs::write(path, scenario_to_json(scenario)?)?;
    Ok(())
}

pub fn read_plan_file(path: impl AsRef<Path>) -> Result<AugmentationPlan> {
    plan_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_plan_file(path: impl AsRef<Path>, plan: &AugmentationPlan) -> Result<()> {
    std::fs::write(path, plan_to_json(plan)?)?;
    Ok(())
}

pub fn read_estimates_file(path: impl AsRef<Path>) -> Result<Estimates> {
    estimates_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_estimates_file(path: impl AsRef<Path>, est: &Estimates) -> Result<()> {
    std::fs::write(path, estimates_to_json(est)?)?;
    Ok(())
}

pub fn read_config_file(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    config_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_trace_file(path: impl AsRef<Path>, trace: &Trace) -> Result<()> {
    let file = File::create(path)?;
    write_trace_jsonl(trace, BufWriter::new(file))
}

pub fn write_report_file(path: impl AsRef<Path>, rows: &[TrialRow]) -> Result<()> {
    let file = File::create(path)?;
    write_report_csv(rows, BufWriter::new(file))
}

pub fn read_report_file(path: impl AsRef<Path>) -> Result<Vec<TrialRow>> {
    read_report_csv(File::open(path)?)
}
