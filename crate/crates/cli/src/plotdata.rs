//! Long-form plot tables (`agent,t,mean,stderr`) recomputed from a bundle's
//! per-seed CSVs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use neorl::runner::{aggregate_seeds, mean_stderr, AStarReference, RunLog, StepRecord};

use crate::csvio::read_steps;
use crate::experiment::{csv_path, read_json, Manifest};

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub agent: String,
    pub t: Vec<usize>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub avg_cost: Vec<Curve>,
    pub regret: Vec<Curve>,
    /// Cumulative reset count.
    pub resets: Vec<Curve>,
    pub seeds_used: Vec<(String, Vec<u64>)>,
}

/// Complete step logs per agent in a bundle; runs shorter than the
/// configured length are skipped.
pub fn load_bundle(dir: &Path) -> Result<(Manifest, Vec<(String, Vec<(u64, Vec<StepRecord>)>)>)> {
    let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
    let mut out = Vec::new();
    for agent in &manifest.agents {
        let mut runs = Vec::new();
        for &seed in &manifest.seeds {
            let p = csv_path(dir, agent, seed);
            if !p.exists() {
                continue;
            }
            let steps = read_steps(&p)?;
            if steps.len() == manifest.steps {
                runs.push((seed, steps));
            }
        }
        out.push((agent.clone(), runs));
    }
    Ok((manifest, out))
}

fn keep(t: usize, stride: usize) -> bool {
    (t + 1) % stride == 0
}

pub fn emit_plot_data(dir: &Path, stride: usize) -> Result<PlotData> {
    if stride == 0 {
        bail!("stride must be at least 1");
    }
    let (manifest, agents) = load_bundle(dir)?;
    if agents.iter().all(|(_, runs)| runs.is_empty()) {
        bail!("bundle {} has no complete runs", dir.display());
    }
    let mut data = PlotData {
        avg_cost: vec![],
        regret: vec![],
        resets: vec![],
        seeds_used: vec![],
    };
    for (agent, runs) in agents {
        if runs.is_empty() {
            continue;
        }
        let logs: Vec<RunLog<f64>> = runs
            .iter()
            .map(|(_, steps)| RunLog {
                steps: steps.clone(),
                refits: vec![],
                data: neorl::data::TransitionDataset::new(0, 0),
                reset_count: 0,
                a_star: AStarReference::default(),
                failure: None,
                total_steps: manifest.steps,
            })
            .collect();
        let s = aggregate_seeds(&logs)?;
        let ts: Vec<usize> = (0..manifest.steps).filter(|t| keep(*t, stride)).collect();
        let pick = |v: &[f64]| ts.iter().map(|t| v[*t]).collect::<Vec<f64>>();
        data.avg_cost.push(Curve {
            agent: agent.clone(),
            t: ts.clone(),
            mean: pick(&s.avg_cost_mean),
            stderr: pick(&s.avg_cost_stderr),
        });
        data.regret.push(Curve {
            agent: agent.clone(),
            t: ts.clone(),
            mean: pick(&s.regret_mean),
            stderr: pick(&s.regret_stderr),
        });
        let cumulative: Vec<Vec<f64>> = runs
            .iter()
            .map(|(_, steps)| {
                let mut c = 0.0;
                steps
                    .iter()
                    .map(|r| {
                        c += f64::from(u8::from(r.did_reset));
                        c
                    })
                    .collect()
            })
            .collect();
        let (mut m, mut e) = (Vec::new(), Vec::new());
        for t in &ts {
            let (a, b) = mean_stderr(cumulative.iter().map(|c| c[*t]));
            m.push(a);
            e.push(b);
        }
        data.resets.push(Curve {
            agent: agent.clone(),
            t: ts.clone(),
            mean: m,
            stderr: e,
        });
        data.seeds_used.push((agent, runs.iter().map(|r| r.0).collect()));
    }
    Ok(data)
}

fn write_curves(path: &Path, curves: &[Curve]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(["agent", "t", "mean", "stderr"])?;
    for c in curves {
        for i in 0..c.t.len() {
            w.write_record([c.agent.clone(), c.t[i].to_string(), c.mean[i].to_string(), c.stderr[i].to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `avg_cost.csv`, `regret.csv` and `resets.csv` into `out`.
pub fn write_plot_data(data: &PlotData, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let mut paths = Vec::new();
    for (name, curves) in [("avg_cost.csv", &data.avg_cost), ("regret.csv", &data.regret), ("resets.csv", &data.resets)] {
        let p = out.join(name);
        write_curves(&p, curves)?;
        paths.push(p);
    }
    Ok(paths)
}

pub fn read_curves(path: &Path) -> Result<Vec<Curve>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut curves: Vec<Curve> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let agent = rec[0].to_string();
        if curves.last().is_none_or(|c| c.agent != agent) {
            curves.push(Curve {
                agent,
                t: vec![],
                mean: vec![],
                stderr: vec![],
            });
        }
        let c = curves.last_mut().unwrap();
        c.t.push(rec[1].parse()?);
        c.mean.push(rec[2].parse()?);
        c.stderr.push(rec[3].parse()?);
    }
    Ok(curves)
}
