use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use tailratio::data::ScoreDataset;
use tailratio::evidence::{self, EvidenceReport, Hypothesis, Ratio, TippingPoint, ToyScenario};
use tailratio::experiments::pvalues::rejection_rate;
use tailratio::experiments::toy::median_overstatement;
use tailratio::experiments::{
    generate_synthetic, pvalue_study, table_fixture_check, tail_audit, threshold_study, toy_study, uniformity_distance,
    PSource, PValueStudyConfig, SynthConfig, TailAudit, ThresholdInput, ThresholdTable, Violation,
};
use tailratio::fit::{fit_mixture, split_dataset, FitConfig, RestartSummary};
use tailratio::gof::{gof_test, EmpiricalDistribution, GofOutcome, PMethod, StatisticKind};
use tailratio::io::{self, ModelFile};
use tailratio::report::{render_report, ReportOptions};
use tailratio::rng::derive_seed;
use tailratio::{Logistic, MixtureModel, Origin};

use crate::args::*;
use crate::output::{num, Outputs};

pub const REFERENCE_MODEL_ID: &str = "reference:nonmated_15";

fn load_model(path: &Path) -> Result<MixtureModel> {
    io::load_model(path).with_context(|| format!("loading model {}", path.display()))
}

fn model_or_reference(path: Option<&PathBuf>) -> Result<(MixtureModel, String)> {
    match path {
        Some(p) => Ok((load_model(p)?, p.display().to_string())),
        None => Ok((MixtureModel::frstat_nonmated_15(), REFERENCE_MODEL_ID.to_string())),
    }
}

fn load_scores(path: &Path) -> Result<ScoreDataset> {
    Ok(io::load_scores(path).with_context(|| format!("loading scores {}", path.display()))?.1)
}

fn select(data: &ScoreDataset, origin: Origin, feature_count: Option<u8>) -> Result<Vec<f64>> {
    let v = data.scores(origin, feature_count);
    if v.is_empty() {
        bail!(tailratio::Error::EmptySample);
    }
    Ok(v)
}

fn fit_config(s: &FitSettings, seed: u64) -> FitConfig {
    FitConfig { k: s.k, max_iter: s.max_iter, tol: s.tol, restarts: s.restarts, seed }
}

pub fn gen(a: &GenArgs, out: &mut Outputs) -> Result<()> {
    let defaults = SynthConfig::default();
    let cfg = SynthConfig {
        mated: match &a.mated_model {
            Some(p) => load_model(p)?,
            None => defaults.mated.clone(),
        },
        nonmated_core: match &a.nonmated_model {
            Some(p) => load_model(p)?,
            None => defaults.nonmated_core.clone(),
        },
        contamination_weight: a.contamination_weight,
        contamination: Logistic::new(a.contamination_location, a.contamination_scale)?,
        n_mated: a.n_mated,
        n_nonmated: a.n_nonmated,
        feature_count: a.feature_count,
        seed: out.info.seed,
        ..defaults
    };
    let data = generate_synthetic(&cfg)?;
    let text = io::format_scores(&out.info.metadata(), &data)?;
    out.write_text("scores.csv", &text)?;
    Ok(())
}

#[derive(Serialize)]
struct FitReport {
    origin: Origin,
    feature_count: Option<u8>,
    n_scores: usize,
    n_train: usize,
    config: FitConfig,
    log_likelihood: f64,
    init_log_likelihood: f64,
    best_restart: usize,
    restarts: Vec<RestartSummary>,
    model: ModelFile,
}

pub fn fit(a: &FitArgs, out: &mut Outputs) -> Result<()> {
    let seed = out.info.seed;
    let origin: Origin = a.origin.into();
    let data = load_scores(&a.scores)?;
    let scores = select(&data, origin, a.feature_count)?;
    let train = match a.train_fraction {
        Some(f) => split_dataset(&scores, f, derive_seed(seed, 0))?.train,
        None => scores.clone(),
    };
    let cfg = fit_config(&a.fit, seed);
    let outcome = fit_mixture(&train, &cfg)?;

    let feature_count = a.feature_count.or_else(|| {
        let mut fcs = data.records().iter().filter(|r| r.origin == origin).map(|r| r.feature_count);
        let first = fcs.next()?;
        fcs.all(|f| f == first).then_some(first)
    });
    let mut model = outcome.model.with_origin(origin);
    if let Some(fc) = feature_count {
        model = model.with_feature_count(fc)?;
    }
    let file = ModelFile::from_model(&model, out.info.provenance());
    out.write_text("model.json", &file.to_json()?)?;
    out.write_json(
        "fit.json",
        &FitReport {
            origin,
            feature_count,
            n_scores: scores.len(),
            n_train: train.len(),
            config: cfg,
            log_likelihood: outcome.log_likelihood,
            init_log_likelihood: outcome.init_log_likelihood,
            best_restart: outcome.best_restart,
            restarts: outcome.restarts,
            model: file,
        },
    )?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
pub struct EvalOutput {
    #[serde(flatten)]
    pub report: EvidenceReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tipping_point: Option<TippingPoint>,
}

fn evaluate(mated: &Path, nonmated: Option<&PathBuf>, score: f64) -> Result<(EvidenceReport, MixtureModel, MixtureModel)> {
    if !score.is_finite() {
        bail!(tailratio::Error::Domain(format!("score must be finite, got {score}")));
    }
    let mated_model = load_model(mated)?;
    let (nonmated_model, nonmated_id) = model_or_reference(nonmated)?;
    let mut report = evidence::evaluate(&mated_model, &nonmated_model, score);
    report.mated_model = Some(mated.display().to_string());
    report.nonmated_model = Some(nonmated_id);
    Ok((report, mated_model, nonmated_model))
}

pub fn eval(a: &EvalArgs, out: &mut Outputs) -> Result<()> {
    let (report, mated, nonmated) = evaluate(&a.mated, a.nonmated.as_ref(), a.score)?;
    let tipping_point = if a.tipping { Some(evidence::tipping_score(&mated, &nonmated)?) } else { None };
    out.write_json("eval.json", &EvalOutput { report, tipping_point })?;
    Ok(())
}

#[derive(Serialize)]
struct GofReport<'a> {
    model: String,
    origin: Origin,
    feature_count: Option<u8>,
    n: usize,
    outcomes: &'a [GofOutcome],
}

pub fn gof(a: &GofArgs, out: &mut Outputs) -> Result<()> {
    let seed = out.info.seed;
    let model = load_model(&a.model)?;
    let origin: Origin = a.origin.into();
    let scores = select(&load_scores(&a.scores)?, origin, a.feature_count)?;
    let emp = EmpiricalDistribution::new(&scores)?;
    let kinds: &[StatisticKind] = match a.statistic {
        StatArg::Ks => &[StatisticKind::Ks],
        StatArg::Ad => &[StatisticKind::Ad],
        StatArg::Both => &[StatisticKind::Ks, StatisticKind::Ad],
    };
    let outcomes = kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let method = match a.method {
                MethodArg::Asymptotic => PMethod::Asymptotic,
                MethodArg::Bootstrap => {
                    PMethod::Bootstrap { replicates: a.replicates, seed: derive_seed(seed, i as u64), refit: a.refit }
                }
            };
            gof_test(&emp, &model, kind, method)
        })
        .collect::<tailratio::Result<Vec<_>>>()?;
    out.write_json(
        "gof.json",
        &GofReport {
            model: a.model.display().to_string(),
            origin,
            feature_count: a.feature_count,
            n: emp.n(),
            outcomes: &outcomes,
        },
    )?;
    Ok(())
}

pub fn tails(a: &TailsArgs, out: &mut Outputs) -> Result<()> {
    let (model, model_id) = model_or_reference(a.model.as_ref())?;
    let audit: Option<TailAudit> = match (&a.scores, &a.counts, a.total) {
        (Some(p), _, _) => {
            let observed = select(&load_scores(p)?, Origin::NonMated, a.feature_count)?;
            Some(tail_audit(&model, &observed, &a.cutpoints)?)
        }
        (None, Some(counts), Some(total)) => Some(TailAudit::from_counts(&model, &a.cutpoints, counts, total)?),
        _ => None,
    };
    let rows: Vec<Vec<String>> = a
        .cutpoints
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let expected = evidence::beta_tail(&model, c);
            let mut row = vec![num(c), num(expected), num(1e5 * expected)];
            match &audit {
                Some(t) => row.extend([
                    t.observed_count[i].to_string(),
                    t.observed_total.to_string(),
                    num(t.observed_per_100k[i]),
                ]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
            row
        })
        .collect();
    out.write_csv(
        "tails.csv",
        &[("model".into(), model_id)],
        &["cutpoint", "model_expected_fraction", "model_expected_per_100k", "observed_count", "observed_total", "observed_per_100k"],
        rows,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct FourWay {
    ks_observed: f64,
    ad_observed: f64,
    ks_null: f64,
    ad_null: f64,
}

#[derive(Serialize)]
struct PValueSummary {
    data: String,
    n_scores: usize,
    config: PValueStudyConfig,
    completed: usize,
    missing: Vec<usize>,
    rejection_rate_at_0_05: FourWay,
    uniformity_distance: Option<FourWay>,
}

fn p_source(m: MethodArg, replicates: usize) -> PSource {
    match m {
        MethodArg::Asymptotic => PSource::Asymptotic,
        MethodArg::Bootstrap => PSource::Bootstrap { replicates, refit: false },
    }
}

pub fn sim_pvalues(a: &SimPvaluesArgs, out: &mut Outputs) -> Result<()> {
    let seed = out.info.seed;
    let (scores, data_id) = match &a.scores {
        Some(p) => (select(&load_scores(p)?, Origin::NonMated, a.feature_count)?, p.display().to_string()),
        None => {
            let cfg = SynthConfig { contamination_weight: a.contamination_weight, n_mated: 0, seed, ..SynthConfig::default() };
            (generate_synthetic(&cfg)?.scores(Origin::NonMated, None), "synthetic".to_string())
        }
    };
    let cfg = PValueStudyConfig {
        reps: a.reps,
        fraction: a.fraction,
        resample_n: a.resample_n,
        fit: fit_config(&a.fit, 0),
        ks: p_source(a.ks_method, a.replicates),
        ad: p_source(a.ad_method, a.replicates),
        seed,
    };
    let res = pvalue_study(&scores, &cfg)?;

    let mut by_rep: BTreeMap<usize, Option<_>> = (0..res.reps).map(|r| (r, None)).collect();
    for row in &res.rows {
        by_rep.insert(row.replicate, Some(*row));
    }
    let rows = by_rep.into_iter().map(|(r, row)| match row {
        Some(p) => vec![r.to_string(), "ok".into(), num(p.ks_observed), num(p.ad_observed), num(p.ks_null), num(p.ad_null)],
        None => vec![r.to_string(), "missing".into(), String::new(), String::new(), String::new(), String::new()],
    });
    out.write_csv(
        "sim_pvalues.csv",
        &[],
        &["replicate", "status", "ks_observed", "ad_observed", "ks_null", "ad_null"],
        rows,
    )?;

    let uniformity = if res.rows.is_empty() {
        None
    } else {
        Some(FourWay {
            ks_observed: uniformity_distance(&res.ks_observed())?,
            ad_observed: uniformity_distance(&res.ad_observed())?,
            ks_null: uniformity_distance(&res.ks_null())?,
            ad_null: uniformity_distance(&res.ad_null())?,
        })
    };
    out.write_json(
        "sim_pvalues.json",
        &PValueSummary {
            data: data_id,
            n_scores: scores.len(),
            config: cfg,
            completed: res.rows.len(),
            missing: res.missing.clone(),
            rejection_rate_at_0_05: FourWay {
                ks_observed: rejection_rate(&res.ks_observed(), 0.05),
                ad_observed: rejection_rate(&res.ad_observed(), 0.05),
                ks_null: rejection_rate(&res.ks_null(), 0.05),
                ad_null: rejection_rate(&res.ad_null(), 0.05),
            },
            uniformity_distance: uniformity,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ToyMedian {
    scenario: String,
    hypothesis: Hypothesis,
    median_frstat_over_true_lr: Option<f64>,
}

#[derive(Serialize)]
struct ToySummary {
    reps: usize,
    scenarios: Vec<ToyScenario>,
    medians: Vec<ToyMedian>,
}

fn ratio_cell(r: Ratio) -> String {
    r.to_string()
}

pub fn sim_toy(a: &SimToyArgs, out: &mut Outputs) -> Result<()> {
    let scenarios = ToyScenario::standard_set_for(a.pop_mean, a.between_sd)?;
    let records = toy_study(&scenarios, a.reps, out.info.seed)?;
    let rows = records.iter().map(|r| {
        vec![
            r.scenario.clone(),
            r.hypothesis.to_string(),
            r.replicate.to_string(),
            num(r.x),
            num(r.alpha),
            num(r.beta),
            ratio_cell(r.true_lr),
            ratio_cell(r.frstat_like),
            num(r.ln_true_lr),
            num(r.ln_frstat_like),
        ]
    });
    out.write_csv(
        "sim_toy.csv",
        &[],
        &["scenario", "hypothesis", "replicate", "x", "alpha", "beta", "true_lr", "frstat_like", "ln_true_lr", "ln_frstat_like"],
        rows,
    )?;
    let medians = scenarios
        .iter()
        .flat_map(|sc| [Hypothesis::H0, Hypothesis::H1].map(|h| (sc.name.clone(), h)))
        .map(|(scenario, hypothesis)| ToyMedian {
            median_frstat_over_true_lr: median_overstatement(&records, &scenario, hypothesis),
            scenario,
            hypothesis,
        })
        .collect();
    out.write_json("sim_toy.json", &ToySummary { reps: a.reps, scenarios, medians })?;
    Ok(())
}

#[derive(Serialize)]
struct FixtureCheck {
    exclusion: String,
    error: String,
    tolerance: f64,
    cells: usize,
    violations: Vec<Violation>,
}

fn table_rows(t: &ThresholdTable) -> Vec<Vec<String>> {
    t.rows
        .iter()
        .map(|r| {
            let mut row = vec![r.feature_count.to_string(), r.pairs.to_string()];
            row.extend(r.rates.iter().map(|&v| num(v)));
            row
        })
        .collect()
}

pub fn thresholds(a: &ThresholdsArgs, out: &mut Outputs) -> Result<()> {
    if let (Some(exc_path), Some(err_path)) = (&a.exclusion, &a.error) {
        let exc = io::load_threshold_table(exc_path).with_context(|| format!("loading {}", exc_path.display()))?;
        let err = io::load_threshold_table(err_path).with_context(|| format!("loading {}", err_path.display()))?;
        let violations = table_fixture_check(&exc, &err, a.tolerance)?;
        out.write_json(
            "thresholds_check.json",
            &FixtureCheck {
                exclusion: exc_path.display().to_string(),
                error: err_path.display().to_string(),
                tolerance: a.tolerance,
                cells: exc.rows.len() * exc.thresholds.len(),
                violations,
            },
        )?;
        return Ok(());
    }
    let Some(scores_path) = &a.scores else {
        bail!(tailratio::Error::Domain("give either --exclusion and --error, or --scores".into()));
    };
    let data = load_scores(scores_path)?;
    let mut cache: BTreeMap<(Origin, u8), MixtureModel> = BTreeMap::new();
    let mut model_for = |origin: Origin, fc: u8| -> Result<MixtureModel> {
        let fixed = match origin {
            Origin::Mated => &a.mated,
            Origin::NonMated => &a.nonmated,
        };
        if let Some(p) = fixed {
            return load_model(p);
        }
        if let Some(m) = cache.get(&(origin, fc)) {
            return Ok(m.clone());
        }
        let Some(dir) = &a.models_dir else {
            bail!(tailratio::Error::Domain(format!("no {origin} model: give --{origin} or --models-dir")));
        };
        let m = load_model(&dir.join(format!("{origin}_{fc}.json")))?;
        cache.insert((origin, fc), m.clone());
        Ok(m)
    };
    let mut inputs = Vec::new();
    let mut models: BTreeMap<u8, (MixtureModel, MixtureModel)> = BTreeMap::new();
    for r in data.records().iter().filter(|r| r.origin == Origin::NonMated) {
        if !models.contains_key(&r.feature_count) {
            let pair = (model_for(Origin::Mated, r.feature_count)?, model_for(Origin::NonMated, r.feature_count)?);
            models.insert(r.feature_count, pair);
        }
        let (m, n) = &models[&r.feature_count];
        let ratio = evidence::frstat_numbers(m, n, r.score).ratio;
        inputs.push(ThresholdInput { feature_count: r.feature_count, origin: r.origin, ratio });
    }
    let (exc, err) = threshold_study(&inputs, &a.thresholds)?;
    let mut header = vec!["feature_count".to_string(), "pairs".to_string()];
    header.extend(a.thresholds.iter().map(|&t| num(t)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let unit = [("unit".to_string(), "fraction".to_string())];
    out.write_csv("thresholds_exclusion.csv", &unit, &header, table_rows(&exc))?;
    out.write_csv("thresholds_error.csv", &unit, &header, table_rows(&err))?;
    Ok(())
}

pub fn report(a: &ReportArgs, out: &mut Outputs) -> Result<String> {
    let evidence = match (&a.evidence, &a.mated, a.score) {
        (Some(p), _, _) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<EvalOutput>(&text).with_context(|| format!("parsing {}", p.display()))?.report
        }
        (None, Some(m), Some(s)) => evaluate(m, a.nonmated.as_ref(), s)?.0,
        _ => bail!(tailratio::Error::Domain("give --evidence, or --mated with --score".into())),
    };
    let sentence = render_report(&evidence, ReportOptions { sig_figs: a.sig_figs });
    let mut text = String::new();
    for (k, v) in out.info.metadata() {
        text.push_str(&format!("# {k}: {v}\n"));
    }
    text.push_str(&format!("# observed_score: {}\n", evidence.observed_score));
    text.push_str(&sentence);
    text.push('\n');
    out.write_text("report.txt", &text)?;
    Ok(sentence)
}
