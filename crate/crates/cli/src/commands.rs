use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};

use recur_core::compactness::compactness_certificate;
use recur_core::format::g17;
use recur_core::recurrence::{furstenberg_average, recurrence_set, syndeticity, szemeredi_average};
use recur_core::{
    verify_system, AlgebraElement, DynamicalSystem, Error, RecurrenceQuery, Syndeticity,
};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A mathematical check did not pass; maps to exit code 1.
    CheckFailed,
}

/// 1 for invariant violations raised during computation, 2 for everything
/// else (unreadable or invalid configs, rejected constructions).
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let violated = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<Error>(),
            Some(Error::InvariantViolation(_))
        )
    });
    if violated {
        1
    } else {
        2
    }
}

pub struct RunContext {
    pub config: ExperimentConfig,
    pub system: DynamicalSystem,
    pub out_dir: PathBuf,
    pub tol: f64,
}

impl RunContext {
    /// Validates the config and builds the system before anything runs.
    pub fn new(config: ExperimentConfig, out: Option<PathBuf>, tol: f64) -> anyhow::Result<Self> {
        if tol.is_nan() || tol <= 0.0 {
            bail!("--tol must be positive");
        }
        let system = config.system.build().context("system rejected")?;
        let out_dir = out
            .or_else(|| config.output.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(RunContext {
            config,
            system,
            out_dir,
            tol,
        })
    }

    fn element(&self) -> anyhow::Result<AlgebraElement> {
        self.config
            .element
            .as_ref()
            .ok_or_else(|| anyhow!("config has no [element] table"))?
            .build(&self.system)
            .context("element rejected")
    }

    fn writer(&self, file: &str) -> anyhow::Result<(csv::Writer<fs::File>, PathBuf)> {
        fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("cannot create {}", self.out_dir.display()))?;
        let path = self.out_dir.join(file);
        let w = csv::Writer::from_path(&path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok((w, path))
    }
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> anyhow::Result<()> {
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))
}

pub fn verify(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let params = &ctx.config.verify;
    let report = verify_system(&ctx.system, params.samples, ctx.tol, params.seed)?;
    let (mut w, path) = ctx.writer("verify.csv")?;
    w.write_record(["axiom", "max_violation", "tol", "passed"])?;
    for (name, v) in report.axioms() {
        let passed = v <= report.tol;
        w.write_record([
            name.to_string(),
            g17(v),
            g17(report.tol),
            passed.to_string(),
        ])?;
        println!(
            "{name:<18} {:<24} {}",
            g17(v),
            if passed { "ok" } else { "FAILED" }
        );
    }
    finish(w, &path)?;
    Ok(if report.passed() {
        Outcome::Success
    } else {
        Outcome::CheckFailed
    })
}

pub fn compactness(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let params = ctx
        .config
        .compactness
        .as_ref()
        .ok_or_else(|| anyhow!("config has no [compactness] table"))?;
    if params.windows.is_empty() || params.epsilons.is_empty() {
        bail!("compactness needs nonempty epsilons and windows");
    }
    let a = ctx.element()?;
    let report = compactness_certificate(
        &ctx.system,
        &a,
        &params.epsilons,
        &params.windows,
        params.metric,
    )?;
    let (mut w, path) = ctx.writer("compactness.csv")?;
    w.write_record(["epsilon", "window_N", "net_size", "stabilized"])?;
    for row in &report.rows {
        w.write_record([
            g17(row.epsilon),
            row.window_n.to_string(),
            row.net_size.to_string(),
            row.stabilized.to_string(),
        ])?;
    }
    finish(w, &path)?;
    for &eps in &params.epsilons {
        println!(
            "epsilon {}: net sizes {:?}",
            g17(eps),
            report.net_sizes(eps)
        );
    }
    Ok(if report.all_stabilized() {
        Outcome::Success
    } else {
        Outcome::CheckFailed
    })
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

pub fn recurrence(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let params = ctx
        .config
        .recurrence
        .as_ref()
        .ok_or_else(|| anyhow!("config has no [recurrence] table"))?;
    let a = ctx.element()?;
    let window = ctx.system.semigroup().folner_window(params.window)?;
    let query = RecurrenceQuery::new(a, params.exponents.clone(), params.epsilon, window.clone())?;
    let set = recurrence_set(&ctx.system, &query)?;
    let (mut w, path) = ctx.writer("recurrence.csv")?;
    w.write_record(["g", "max_deviation", "member"])?;
    for row in &set.rows {
        w.write_record([
            row.g.to_string(),
            g17(row.max_deviation),
            row.member.to_string(),
        ])?;
    }
    finish(w, &path)?;

    let members = set.members();
    let synd = syndeticity(ctx.system.semigroup(), &members, &window, params.max_r)?;
    let (mut w, path) = ctx.writer("syndeticity.csv")?;
    w.write_record(["found", "r", "witnesses", "max_gap"])?;
    match &synd {
        Syndeticity::Found(rep) => {
            w.write_record([
                "true".to_string(),
                rep.r.to_string(),
                join(&rep.witnesses),
                rep.max_gap.map(|g| g.to_string()).unwrap_or_default(),
            ])?;
            println!(
                "{} of {} in E; syndetic with r = {}",
                members.len(),
                set.rows.len(),
                rep.r
            );
        }
        Syndeticity::Failed { reason } => {
            w.write_record(["false", "", "", ""])?;
            println!(
                "{} of {} in E; not syndetic: {reason}",
                members.len(),
                set.rows.len()
            );
        }
    }
    finish(w, &path)?;
    Ok(Outcome::Success)
}

pub fn average(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let params = ctx
        .config
        .average
        .as_ref()
        .ok_or_else(|| anyhow!("config has no [average] table"))?;
    let sizes = params.windows.sizes();
    if sizes.is_empty() {
        bail!("average needs at least one window");
    }
    let rows: Vec<(usize, f64, f64)> = match &params.furstenberg {
        Some(f) => {
            if params.exponents.is_some() {
                bail!("furstenberg averages fix the exponents; drop average.exponents");
            }
            let v: BTreeSet<usize> = f.set.iter().copied().collect();
            let mut inf = f64::INFINITY;
            sizes
                .iter()
                .map(|&n| {
                    let x = furstenberg_average(&ctx.system, &v, f.k, n)?;
                    inf = inf.min(x);
                    Ok((n, x, inf))
                })
                .collect::<anyhow::Result<_>>()?
        }
        None => {
            let exps = params
                .exponents
                .as_ref()
                .ok_or_else(|| anyhow!("average needs exponents or a furstenberg table"))?;
            let a = ctx.element()?;
            szemeredi_average(&ctx.system, &a, exps, &sizes)?
                .rows
                .iter()
                .map(|r| (r.n, r.average, r.running_infimum))
                .collect()
        }
    };
    let (mut w, path) = ctx.writer("average.csv")?;
    w.write_record(["N", "average", "running_infimum"])?;
    for (n, avg, inf) in &rows {
        w.write_record([n.to_string(), g17(*avg), g17(*inf)])?;
    }
    finish(w, &path)?;
    let (n, avg, inf) = rows.last().expect("nonempty windows");
    println!(
        "N = {n}: average {}, running infimum {}",
        g17(*avg),
        g17(*inf)
    );
    Ok(Outcome::Success)
}
