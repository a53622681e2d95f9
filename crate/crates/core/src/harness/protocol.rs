//! The two evaluation protocols: target-space comparison across downstream
//! heads, and the exposure-window sweep against baselines.

use log::info;

use super::config::Config;
use super::grid::{grid_search, Family, Frozen, GridSpec};
use super::hygiene::SealedHoldout;
use super::pipeline::{featurize_trials, fit, fit_chemvise_heads, Context, Fitted, HeadKind, Sample};
use super::report::{ExperimentReport, Provenance, ReportRow};
use crate::classify::{accuracy, confusion, mcc};
use crate::seed::{derive_seed, derived_rng};
use crate::signals::{AffinityModel, Split, Trial, TrialDataset};
use crate::targets::{build_one_hot, build_simplex, gen_synthetic_semantic, load_semantic, TargetKind, TargetSpace};
use crate::{Error, Result};

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Simulated sensor array and the study drawn from it. Both depend only on the
/// simulator section, so every master seed sees the same data.
#[derive(Debug, Clone)]
pub struct World {
    pub model: AffinityModel,
    pub dataset: TrialDataset,
}

pub fn build_world(config: &Config) -> Result<World> {
    let design = &config.simulator.design;
    let model = AffinityModel::generate(&design.analytes, &config.simulator.sensors)?;
    let dataset = design.generate(&model)?;
    Ok(World { model, dataset })
}

pub fn build_target_space(kind: TargetKind, config: &Config) -> Result<TargetSpace> {
    let analytes = &config.simulator.design.analytes;
    let t = &config.targets;
    match kind {
        TargetKind::OneHot => build_one_hot(analytes, t.dimension),
        TargetKind::Simplex => build_simplex(analytes, t.dimension, t.simplex_seed),
        TargetKind::Semantic => match &t.embeddings {
            Some(path) => {
                let space = load_semantic(path)?;
                for a in analytes {
                    space.get(a)?;
                }
                Ok(space)
            }
            None => gen_synthetic_semantic(analytes, t.dimension, &t.semantic),
        },
    }
}

fn seeds(config: &Config) -> Vec<u64> {
    let m = config.harness.master_seed;
    (0..config.harness.grid.n_repeats as u64)
        .map(|r| m.wrapping_add(r))
        .collect()
}

/// Grid search, or a single seeded draw when the budget is one.
fn select(family: Family, grid: &GridSpec, train: &[Sample], ctx: &Context, seed: u64) -> Result<Frozen> {
    if grid.budget == 1 {
        grid.validate()?;
        let params = grid.sample(family, &mut derived_rng(seed, "sample"));
        return Ok(Frozen::without_search(params));
    }
    let (frozen, table) = grid_search(family, grid, train, ctx, seed)?;
    info!(
        "{family}: searched {} fold fits, best mean CV MCC {:.3} with {}",
        table.len(),
        frozen.mean_cv_mcc().unwrap_or(f64::NAN),
        frozen.params()
    );
    Ok(frozen)
}

struct Study {
    singles: Vec<Trial>,
    holdout: SealedHoldout,
}

fn study(config: &Config) -> Result<Study> {
    let world = build_world(config)?;
    let (test, singles): (Vec<Trial>, Vec<Trial>) = world
        .dataset
        .trials
        .into_iter()
        .partition(|t| t.split == Split::Test);
    if test.is_empty() {
        return Err(Error::Config("the design has no holdout doubles".into()));
    }
    Ok(Study {
        singles,
        holdout: SealedHoldout::seal(test),
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    protocol: &str,
    family: &str,
    kind: &str,
    window: f64,
    seed: u64,
    fitted: &Fitted,
    holdout: &[Sample],
    frozen: &Frozen,
    ctx: &Context,
) -> Result<ReportRow> {
    let xs: Vec<_> = holdout.iter().map(|s| &s.features).collect();
    let preds = fitted.predict(&xs)?;
    let truth: Vec<bool> = holdout.iter().map(|s| ctx.label(&s.mix)).collect();
    let c = confusion(&preds, &truth)?;
    Ok(ReportRow {
        protocol: protocol.into(),
        family: family.into(),
        target_kind: kind.into(),
        window_length_s: window,
        seed,
        fold: None,
        n_samples: c.total(),
        tp: c.tp,
        fp: c.fp,
        tn: c.tn,
        r#fn: c.r#fn,
        mcc: mcc(&c),
        accuracy: accuracy(&c),
        hyperparameters: frozen.params().to_string(),
    })
}

/// Every target geometry crossed with every downstream head, per master seed.
pub fn run_representation_protocol(config: &Config) -> Result<ExperimentReport> {
    config.validate()?;
    let study = study(config)?;
    let h = &config.harness;
    let window = h.representation_window_s;
    let train = featurize_trials(&study.singles, h.pre_onset_s, window)?;
    let heads = [
        (HeadKind::Knn, Family::ChemviseKnn),
        (HeadKind::Svc, Family::ChemviseSvc),
        (HeadKind::PcaSvc, Family::ChemvisePcaSvc),
    ];
    let seeds = seeds(config);
    let mut rows = Vec::new();
    for &seed in &seeds {
        for kind in TargetKind::ALL {
            info!("representation protocol: seed {seed}, {kind} targets");
            let ctx = Context::from_config(config, Some(build_target_space(kind, config)?));
            let label = format!("representation/{kind}");
            let frozen = select(
                Family::ChemviseSvc,
                &h.grid,
                &train,
                &ctx,
                derive_seed(seed, &format!("{label}/search")),
            )?;
            let kinds: Vec<HeadKind> = heads.iter().map(|(k, _)| *k).collect();
            let fitted = fit_chemvise_heads(
                &kinds,
                frozen.params(),
                &train,
                &ctx,
                derive_seed(seed, &format!("{label}/fit")),
            )?;
            let holdout = featurize_trials(&study.holdout.open(&frozen)?, h.pre_onset_s, window)?;
            for ((_, family), model) in heads.iter().zip(&fitted) {
                rows.push(evaluate(
                    "representation",
                    &family.to_string(),
                    &kind.to_string(),
                    window,
                    seed,
                    model,
                    &holdout,
                    &frozen,
                    &ctx,
                )?);
            }
        }
    }
    let mut report = ExperimentReport {
        rows,
        provenance: Provenance::new(config, seeds),
    };
    report.sort();
    Ok(report)
}

/// ChemVise with an SVC head against the FFNN and raw-feature SVC baselines
/// at every window length, per master seed.
pub fn run_window_sweep(config: &Config) -> Result<ExperimentReport> {
    config.validate()?;
    let h = &config.harness;
    if h.windows_s.is_empty() {
        return Err(Error::Config("window list is empty".into()));
    }
    let study = study(config)?;
    let space = build_target_space(TargetKind::Semantic, config)?;
    let ctx = Context::from_config(config, Some(space));
    let families = [Family::ChemviseSvc, Family::Ffnn, Family::RawSvc];
    let seeds = seeds(config);
    let mut rows = Vec::new();
    for &seed in &seeds {
        for &window in &h.windows_s {
            let train = featurize_trials(&study.singles, h.pre_onset_s, window)?;
            for family in families {
                info!("window sweep: seed {seed}, window {window:.3} s, {family}");
                let label = format!("window/{window}/{family}");
                let frozen = select(
                    family,
                    &h.grid,
                    &train,
                    &ctx,
                    derive_seed(seed, &format!("{label}/search")),
                )?;
                let model = fit(
                    family,
                    frozen.params(),
                    &train,
                    &ctx,
                    derive_seed(seed, &format!("{label}/fit")),
                )?;
                let holdout =
                    featurize_trials(&study.holdout.open(&frozen)?, h.pre_onset_s, window)?;
                let kind = if family == Family::ChemviseSvc {
                    TargetKind::Semantic.to_string()
                } else {
                    "none".to_string()
                };
                rows.push(evaluate(
                    "window",
                    &family.to_string(),
                    &kind,
                    window,
                    seed,
                    &model,
                    &holdout,
                    &frozen,
                    &ctx,
                )?);
            }
        }
    }
    let mut report = ExperimentReport {
        rows,
        provenance: Provenance::new(config, seeds),
    };
    report.sort();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_windows() {
        let w = linspace(2.4, 4.0, 7);
        assert_eq!(w.len(), 7);
        assert_eq!(w[0], 2.4);
        assert_eq!(w[6], 4.0);
        for pair in w.windows(2) {
            assert!((pair[1] - pair[0] - 0.8 / 3.0).abs() < 1e-12);
        }
        assert!((w[1] - 2.667).abs() < 1e-3);
    }

    #[test]
    fn spaces_for_every_kind() {
        let config = Config::default();
        for kind in TargetKind::ALL {
            let s = build_target_space(kind, &config).unwrap();
            assert_eq!(s.kind(), kind);
            assert_eq!(s.dimension(), 512);
            assert_eq!(s.len(), 4);
        }
    }
}
