//! Stratified k-fold splitting and nested cross-validated search over
//! hidden sizes.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::data::{accuracy, Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::learner::{train, Init, TrainConfig};
use crate::matrix::sse;
use crate::network::{forward, NetworkSpec, ReceptiveField};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvPlan {
    pub folds: usize,
    pub trials: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for CvPlan {
    fn default() -> Self {
        CvPlan {
            folds: 10,
            trials: 10,
            seed: 0,
            stratified: true,
        }
    }
}

pub type Fold = (Vec<usize>, Vec<usize>);

/// Splits `ds` into `plan.folds` (train, test) index pairs. Each class is
/// shuffled and dealt round-robin, the fold pointer carrying on from one
/// class to the next, so fold sizes differ by at most one and so do the
/// per-fold counts of every class. Regression data, or `stratified =
/// false`, deals all indices as one group.
pub fn stratified_kfold(ds: &Dataset, plan: &CvPlan) -> Result<Vec<Fold>> {
    let m = ds.len();
    if plan.folds < 2 {
        return Err(Error::invalid(format!("folds must be >= 2, got {}", plan.folds)));
    }
    if plan.folds > m {
        return Err(Error::invalid(format!("{} folds for only {m} samples", plan.folds)));
    }
    let groups: Vec<Vec<usize>> = if plan.stratified && ds.kind == TaskKind::Classification {
        let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, c) in ds.class_indices().into_iter().enumerate() {
            by_class.entry(c).or_default().push(i);
        }
        by_class.into_values().collect()
    } else {
        vec![(0..m).collect()]
    };
    let mut rng = seed::rng(plan.seed);
    let mut assignment = vec![0; m];
    let mut next = 0;
    for mut group in groups {
        group.shuffle(&mut rng);
        for i in group {
            assignment[i] = next;
            next = (next + 1) % plan.folds;
        }
    }
    Ok((0..plan.folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..m).partition(|&i| assignment[i] == f);
            (train, test)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Width {
    /// `k * h`
    Hidden(usize),
    Fixed(usize),
    /// Number of target columns.
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateLayer {
    pub width: Width,
    pub receptive_field: ReceptiveField,
}

/// Structure parameterized by a hidden size `h`, e.g. `"8h-4h-2h-h-q"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureTemplate {
    pub layers: Vec<TemplateLayer>,
}

impl StructureTemplate {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::invalid("empty structure template"));
        }
        let layers = s
            .split('-')
            .map(|part| {
                let bad = || Error::invalid(format!("bad layer {part:?} in template {s:?}"));
                let (width, field) = match part.split_once('^') {
                    None => (part, ReceptiveField::Full),
                    Some((w, band)) => {
                        let r: usize = band.strip_prefix('r').ok_or_else(bad)?.parse().map_err(|_| bad())?;
                        if r.is_multiple_of(2) {
                            return Err(bad());
                        }
                        (w, ReceptiveField::Banded(r))
                    }
                };
                let width = match width {
                    "q" => Width::Output,
                    "h" => Width::Hidden(1),
                    w => match w.strip_suffix('h') {
                        Some(k) => Width::Hidden(k.parse().map_err(|_| bad())?),
                        None => Width::Fixed(w.parse().map_err(|_| bad())?),
                    },
                };
                if matches!(width, Width::Hidden(0) | Width::Fixed(0)) {
                    return Err(bad());
                }
                Ok(TemplateLayer {
                    width,
                    receptive_field: field,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StructureTemplate { layers })
    }

    pub fn widths(&self, h: usize, q: usize) -> Vec<usize> {
        self.layers
            .iter()
            .map(|l| match l.width {
                Width::Hidden(k) => k * h,
                Width::Fixed(w) => w,
                Width::Output => q,
            })
            .collect()
    }

    pub fn structure_string(&self, h: usize, q: usize) -> String {
        self.widths(h, q)
            .into_iter()
            .zip(&self.layers)
            .map(|(w, l)| match l.receptive_field {
                ReceptiveField::Full => w.to_string(),
                ReceptiveField::Banded(r) => format!("{w}^r{r}"),
            })
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn expand(
        &self,
        h: usize,
        input_dim: usize,
        q: usize,
        activation: ActivationKind,
        linear_output: bool,
    ) -> Result<NetworkSpec> {
        NetworkSpec::from_structure(&self.structure_string(h, q), input_dim, activation, linear_output)
    }
}

impl std::fmt::Display for StructureTemplate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .layers
            .iter()
            .map(|l| {
                let w = match l.width {
                    Width::Hidden(1) => "h".to_string(),
                    Width::Hidden(k) => format!("{k}h"),
                    Width::Fixed(w) => w.to_string(),
                    Width::Output => "q".to_string(),
                };
                match l.receptive_field {
                    ReceptiveField::Full => w,
                    ReceptiveField::Banded(r) => format!("{w}^r{r}"),
                }
            })
            .collect();
        f.write_str(&parts.join("-"))
    }
}

pub const DEFAULT_H_GRID: [usize; 12] = [1, 2, 3, 5, 10, 20, 30, 50, 80, 100, 200, 500];

/// Network settings shared by every candidate in a search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub activation: ActivationKind,
    pub linear_output: bool,
    pub train: TrainConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    /// Mean squared error per sample; lower is better.
    Mse,
}

impl Metric {
    pub fn for_task(kind: TaskKind) -> Self {
        match kind {
            TaskKind::Classification => Metric::Accuracy,
            TaskKind::Regression => Metric::Mse,
        }
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self {
            Metric::Accuracy => a > b,
            Metric::Mse => a < b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub template: usize,
    pub h: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub metric: Metric,
    /// `scores[trial][fold]` on the outer test folds.
    pub scores: Vec<Vec<f64>>,
    /// Candidate picked by the inner search for each outer fold.
    pub selected: Vec<Vec<Candidate>>,
    pub per_trial_mean: Vec<f64>,
    pub mean_score: f64,
    /// Most frequently selected hidden size, smallest on ties.
    pub best_h: usize,
    pub best_template: usize,
}

fn fold_seed(cfg: &TrainConfig, salt: u64) -> TrainConfig {
    let mut cfg = cfg.clone();
    if let Init::Random { seed: s, scale } = cfg.init.init {
        cfg.init.init = Init::Random {
            seed: seed::derive_index(s, salt),
            scale,
        };
    }
    cfg
}

/// Trains on `train_idx` and scores on `test_idx`.
fn evaluate(
    ds: &Dataset,
    template: &StructureTemplate,
    h: usize,
    settings: &ModelSettings,
    cfg: &TrainConfig,
    train_idx: &[usize],
    test_idx: &[usize],
    metric: Metric,
) -> Result<f64> {
    let train_set = ds.subset(train_idx)?;
    let test_set = ds.subset(test_idx)?;
    let spec = template.expand(h, ds.x.cols(), ds.y.cols(), settings.activation, settings.linear_output)?;
    let report = train(&spec, &train_set.x, &train_set.y, cfg)?;
    let pred = forward(&spec, &report.weights, &test_set.x)?;
    match metric {
        Metric::Accuracy => accuracy(&pred, &test_set),
        Metric::Mse => Ok(sse(&pred, &test_set.y)? / test_set.len() as f64),
    }
}

fn select(
    ds: &Dataset,
    templates: &[StructureTemplate],
    h_grid: &[usize],
    settings: &ModelSettings,
    plan: &CvPlan,
    train_idx: &[usize],
    salt: u64,
    metric: Metric,
) -> Result<Candidate> {
    let mut candidates: Vec<Candidate> = Vec::new();
    for (t, _) in templates.iter().enumerate() {
        for &h in h_grid {
            candidates.push(Candidate { template: t, h });
        }
    }
    if candidates.len() == 1 {
        return Ok(candidates.remove(0));
    }
    let inner_ds = ds.subset(train_idx)?;
    let inner_plan = CvPlan {
        seed: seed::derive_index(plan.seed, salt),
        folds: plan.folds.min(inner_ds.len()),
        ..plan.clone()
    };
    let folds = stratified_kfold(&inner_ds, &inner_plan)?;
    let mut best: Option<(f64, Candidate)> = None;
    // ties keep the earlier candidate; order candidates by (h, template)
    candidates.sort_by_key(|c| (c.h, c.template));
    for c in candidates {
        let mut total = 0.0;
        for (f, (tr, te)) in folds.iter().enumerate() {
            let cfg = fold_seed(&settings.train, seed::derive_index(salt, f as u64));
            total += evaluate(&inner_ds, &templates[c.template], c.h, settings, &cfg, tr, te, metric)?;
        }
        let score = total / folds.len() as f64;
        if best.as_ref().is_none_or(|(b, _)| metric.better(score, *b)) {
            best = Some((score, c));
        }
    }
    Ok(best.unwrap().1)
}

/// Nested cross-validation: for every trial and outer fold an inner CV on
/// the training part picks `(template, h)`, which is then retrained on the
/// whole training part and scored on the held-out fold.
pub fn cv_search(
    ds: &Dataset,
    templates: &[StructureTemplate],
    h_grid: &[usize],
    plan: &CvPlan,
    settings: &ModelSettings,
) -> Result<CvReport> {
    if h_grid.is_empty() {
        return Err(Error::invalid("hidden-size grid is empty"));
    }
    if templates.is_empty() {
        return Err(Error::invalid("no structure templates given"));
    }
    if plan.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let metric = Metric::for_task(ds.kind);
    let mut jobs = Vec::new();
    for trial in 0..plan.trials {
        let trial_plan = CvPlan {
            seed: seed::derive_index(plan.seed, trial as u64),
            ..plan.clone()
        };
        for (f, fold) in stratified_kfold(ds, &trial_plan)?.into_iter().enumerate() {
            jobs.push((trial, f, fold));
        }
    }
    let results = jobs
        .par_iter()
        .map(|(trial, f, (tr, te))| {
            let salt = (*trial as u64) << 32 | *f as u64;
            let choice = select(ds, templates, h_grid, settings, plan, tr, salt, metric)?;
            let cfg = fold_seed(&settings.train, salt);
            let score = evaluate(ds, &templates[choice.template], choice.h, settings, &cfg, tr, te, metric)?;
            Ok((choice, score))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut scores = vec![Vec::new(); plan.trials];
    let mut selected = vec![Vec::new(); plan.trials];
    for ((trial, _, _), (choice, score)) in jobs.iter().zip(results) {
        scores[*trial].push(score);
        selected[*trial].push(choice);
    }
    let per_trial_mean: Vec<f64> = scores.iter().map(|s| s.iter().sum::<f64>() / s.len() as f64).collect();
    let mean_score = per_trial_mean.iter().sum::<f64>() / per_trial_mean.len() as f64;
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for c in selected.iter().flatten() {
        *counts.entry((c.h, c.template)).or_default() += 1;
    }
    let (&(best_h, best_template), _) = counts.iter().rev().max_by_key(|(_, &n)| n).unwrap();
    Ok(CvReport {
        metric,
        scores,
        selected,
        per_trial_mean,
        mean_score,
        best_h,
        best_template,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{encode_targets, TargetEncoding};
    use crate::matrix::Matrix;

    fn labelled(labels: &[&str]) -> Dataset {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let (y, classes) = encode_targets(&labels, TargetEncoding::OneHot01).unwrap();
        let x = Matrix::from_fn(labels.len(), 1, |i, _| i as f64);
        Dataset::new(x, y, Some(classes), TaskKind::Classification).unwrap()
    }

    #[test]
    fn one_sample_per_fold() {
        let ds = labelled(&["a", "b", "a", "b", "a", "b", "a", "b", "a", "b"]);
        let folds = stratified_kfold(&ds, &CvPlan::default()).unwrap();
        assert!(folds.iter().all(|(tr, te)| te.len() == 1 && tr.len() == 9));
    }

    #[test]
    fn two_balanced_folds() {
        let ds = labelled(&["a", "a", "a", "b", "b", "b"]);
        let plan = CvPlan {
            folds: 2,
            ..Default::default()
        };
        for (_, te) in stratified_kfold(&ds, &plan).unwrap() {
            let a = te.iter().filter(|&&i| i < 3).count();
            assert!((1..=2).contains(&a));
            assert!((1..=2).contains(&(te.len() - a)));
        }
    }

    #[test]
    fn uneven_classes_stay_within_one() {
        let ds = labelled(&["a", "a", "a", "a", "a", "b", "b", "b", "c", "c"]);
        let plan = CvPlan {
            folds: 5,
            ..Default::default()
        };
        let classes = ds.class_indices();
        for (_, te) in stratified_kfold(&ds, &plan).unwrap() {
            for (c, share) in [(0, 1.0), (1, 0.6), (2, 0.4)] {
                let n = te.iter().filter(|&&i| classes[i] == c).count() as f64;
                assert!((n - share).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn too_many_folds() {
        let ds = labelled(&["a", "b", "a"]);
        let plan = CvPlan {
            folds: 4,
            ..Default::default()
        };
        assert!(stratified_kfold(&ds, &plan).is_err());
    }

    #[test]
    fn template_expansion() {
        let t = StructureTemplate::parse("h-q").unwrap();
        assert_eq!(t.widths(3, 2), vec![3, 2]);
        let t = StructureTemplate::parse("8h-4h-2h-h-q").unwrap();
        assert_eq!(t.widths(5, 3), vec![40, 20, 10, 5, 3]);
        assert_eq!(t.to_string(), "8h-4h-2h-h-q");
        let t = StructureTemplate::parse("2h^r3-h-q").unwrap();
        assert_eq!(t.structure_string(4, 2), "8^r3-4-2");
        assert!(StructureTemplate::parse("xh-q").is_err());
        assert!(StructureTemplate::parse("0h-q").is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        let ds = labelled(&["a", "b", "a", "b"]);
        let settings = ModelSettings {
            activation: ActivationKind::Softplus08,
            linear_output: true,
            train: TrainConfig::random(1, 1.0),
        };
        let t = [StructureTemplate::parse("h-q").unwrap()];
        assert!(cv_search(&ds, &t, &[], &CvPlan::default(), &settings).is_err());
    }
}
