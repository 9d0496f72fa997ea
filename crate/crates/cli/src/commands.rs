use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use flrd::selection::default_grid;
use flrd::{
    build_basis, fit_flr_ridge, fit_flrd, generate, gram_matrices, grid_search, mean_squared_error, polynomial_spectrum,
    predict_dataset, smooth_many, smooth_truth, BasisSpec, FittedModel, FlrdError, FunctionalDataset, GramPair,
    Predictor, SyntheticSpec,
};

use crate::config::RunConfig;
use crate::csv_io::{fmt_f64, read_column, read_curves, read_text, render_column, render_curves, write_text};
use crate::error::{CliError, CliResult};

const DEFAULT_K: usize = 100;
const DEFAULT_DEGREE: usize = 3;
const PLOT_POINTS: usize = 512;

/// Everything a command prints on success.
pub struct Report {
    pub stdout: String,
    pub warnings: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self { stdout: String::new(), warnings: Vec::new() }
    }

    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.stdout, "{key} {value}");
    }
}

fn basis_from_config(config: &RunConfig, abscissae: &[f64]) -> CliResult<(GramPair, BasisSpec)> {
    let k = config.get_or("k", DEFAULT_K)?;
    let degree = config.get_or("degree", DEFAULT_DEGREE)?;
    let lo = config.get_or("domain_min", abscissae[0])?;
    let hi = config.get_or("domain_max", abscissae[abscissae.len() - 1])?;
    let basis = build_basis((lo, hi), k, degree)?;
    let grams = gram_matrices(&basis)?;
    Ok((grams, basis.spec()))
}

fn smooth_file(path: &Path, spec: BasisSpec) -> CliResult<Vec<flrd::Curve>> {
    let (_, raw) = read_curves(path)?;
    Ok(smooth_many(&raw, &spec.build()?)?)
}

fn check_counts(curves: usize, curves_path: &Path, responses: usize, responses_path: &Path) -> CliResult<()> {
    if curves != responses {
        return Err(CliError::Mismatch(format!(
            "{} has {curves} curves but {} has {responses} responses",
            curves_path.display(),
            responses_path.display()
        )));
    }
    Ok(())
}

fn load_dataset(config: &RunConfig, curves_key: &str, responses_key: &str, spec: BasisSpec) -> CliResult<FunctionalDataset> {
    let cp = config.input_path(curves_key)?;
    let rp = config.input_path(responses_key)?;
    let curves = smooth_file(&cp, spec)?;
    let responses = read_column(&rp)?;
    check_counts(curves.len(), &cp, responses.len(), &rp)?;
    Ok(FunctionalDataset::new(curves, responses)?)
}

/// Training data on the basis described by the configuration.
fn load_training(config: &RunConfig) -> CliResult<(FunctionalDataset, GramPair)> {
    let cp = config.input_path("curves")?;
    let (abscissae, _) = read_curves(&cp)?;
    let (grams, spec) = basis_from_config(config, &abscissae)?;
    Ok((load_dataset(config, "curves", "responses", spec)?, grams))
}

fn rms(fit: &dyn Predictor, ds: &FunctionalDataset) -> CliResult<f64> {
    let pred = predict_dataset(fit, ds)?;
    Ok(mean_squared_error(&pred, ds.responses())?.sqrt())
}

fn validation_msep(config: &RunConfig, model: &FittedModel, report: &mut Report) -> CliResult<()> {
    if config.raw("validation_curves").is_none() {
        return Ok(());
    }
    let ds = load_dataset(config, "validation_curves", "validation_responses", model.spec())?;
    let pred = predict_dataset(model, &ds)?;
    report.line("validation_msep", fmt_f64(mean_squared_error(&pred, ds.responses())?));
    Ok(())
}

fn plot_csv(model: &FittedModel) -> CliResult<String> {
    let (lo, hi) = model.spec().domain;
    let ts: Vec<f64> = (0..PLOT_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (PLOT_POINTS - 1) as f64)
        .collect();
    let (header, columns) = match model {
        FittedModel::Flrd(f) => ("t,phi,psi", vec![f.phi_hat().values_at(&ts)?, f.psi_hat().values_at(&ts)?]),
        FittedModel::Ridge(f) => ("t,theta", vec![f.theta_hat().values_at(&ts)?]),
    };
    let mut out = format!("{header}\n");
    for (i, t) in ts.iter().enumerate() {
        out.push_str(&fmt_f64(*t));
        for c in &columns {
            out.push(',');
            out.push_str(&fmt_f64(c[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

fn fit_model(config: &RunConfig, ds: &FunctionalDataset, grams: &GramPair) -> CliResult<FittedModel> {
    let beta = config.require("beta")?;
    match config.raw("method").unwrap_or("flrd") {
        "flrd" => Ok(FittedModel::Flrd(fit_flrd(ds, grams, config.require("alpha")?, beta)?)),
        "ridge" => Ok(FittedModel::Ridge(fit_flr_ridge(ds, grams, beta)?)),
        other => Err(CliError::Config(format!("unknown method `{other}`; expected flrd or ridge"))),
    }
}

fn output_path(config: &RunConfig, key: &str) -> CliResult<PathBuf> {
    config
        .path(key)
        .ok_or_else(|| CliError::Config(format!("missing required output path `{key}`")))
}

fn finish_fit(config: &RunConfig, model: &FittedModel, ds: &FunctionalDataset, report: &mut Report) -> CliResult<()> {
    let spec = model.spec();
    report.line("n", ds.len());
    report.line("k", spec.k);
    report.line("degree", spec.degree);
    match model {
        FittedModel::Flrd(f) => {
            report.line("method", "flrd");
            report.line("alpha", fmt_f64(f.alpha()));
            report.line("beta", fmt_f64(f.beta()));
            if f.degenerate_design() {
                report.warnings.push("design curves are constant after centering; the fit is zero".into());
            }
        }
        FittedModel::Ridge(f) => {
            report.line("method", "ridge");
            report.line("beta", fmt_f64(f.beta()));
        }
    }
    report.line("in_sample_rms", fmt_f64(rms(model, ds)?));
    validation_msep(config, model, report)?;
    if let Some(p) = config.path("model") {
        write_text(&p, &model.to_text())?;
    }
    if let Some(p) = config.path("plot_out") {
        write_text(&p, &plot_csv(model)?)?;
    }
    Ok(())
}

pub fn cmd_fit(config: &RunConfig) -> CliResult<Report> {
    output_path(config, "model")?;
    let (ds, grams) = load_training(config)?;
    let model = fit_model(config, &ds, &grams)?;
    let mut report = Report::new();
    finish_fit(config, &model, &ds, &mut report)?;
    Ok(report)
}

pub fn cmd_cv(config: &RunConfig) -> CliResult<Report> {
    let (ds, grams) = load_training(config)?;
    let alphas = config.grid("alpha_grid")?.unwrap_or_else(default_grid);
    let betas = config.grid("beta_grid")?.unwrap_or_else(default_grid);
    let cv = grid_search(&ds, &grams, &alphas, &betas)?;
    let mut report = Report::new();
    match config.path("out") {
        Some(p) => write_text(&p, &cv.to_csv())?,
        None => report.stdout.push_str(&cv.to_csv()),
    }
    report.line("chosen_alpha", fmt_f64(cv.best_alpha));
    report.line("chosen_beta", fmt_f64(cv.best_beta));
    report.line("chosen_cvmsep", fmt_f64(cv.best_score));
    if config.raw("model").is_some() || config.raw("validation_curves").is_some() {
        let model = FittedModel::Flrd(fit_flrd(&ds, &grams, cv.best_alpha, cv.best_beta)?);
        validation_msep(config, &model, &mut report)?;
        if let Some(p) = config.path("model") {
            write_text(&p, &model.to_text())?;
        }
    }
    Ok(report)
}

fn load_model(config: &RunConfig) -> CliResult<FittedModel> {
    let path = config.input_path("model")?;
    let (model, _) = FittedModel::from_text(&read_text(&path)?)?;
    Ok(model)
}

/// Spec used to smooth new curves: the model's, unless the configuration
/// names a different basis, which then fails at prediction time.
fn prediction_spec(config: &RunConfig, model: &FittedModel) -> CliResult<BasisSpec> {
    let own = model.spec();
    Ok(BasisSpec::new(
        (config.get_or("domain_min", own.domain.0)?, config.get_or("domain_max", own.domain.1)?),
        config.get_or("k", own.k)?,
        config.get_or("degree", own.degree)?,
    ))
}

fn model_predictions(config: &RunConfig, model: &FittedModel) -> CliResult<Vec<f64>> {
    let spec = prediction_spec(config, model)?;
    if spec != model.spec() {
        return Err(FlrdError::BasisMismatch { expected: model.spec(), found: spec }.into());
    }
    let curves = smooth_file(&config.input_path("curves")?, spec)?;
    Ok(curves.iter().map(|c| model.predict(c)).collect::<flrd::Result<Vec<f64>>>()?)
}

pub fn cmd_predict(config: &RunConfig) -> CliResult<Report> {
    let model = load_model(config)?;
    let predictions = model_predictions(config, &model)?;
    let mut report = Report::new();
    let csv = render_column(&predictions);
    match config.path("out").or_else(|| config.path("predictions")) {
        Some(p) => {
            write_text(&p, &csv)?;
            report.line("predictions", predictions.len());
        }
        None => report.stdout = csv,
    }
    Ok(report)
}

pub fn cmd_eval(config: &RunConfig) -> CliResult<Report> {
    let rp = config.input_path("responses")?;
    let truth = read_column(&rp)?;
    let (predictions, source) = match config.raw("predictions") {
        Some(_) => {
            let pp = config.input_path("predictions")?;
            (read_column(&pp)?, pp)
        }
        None => {
            let model = load_model(config)?;
            (model_predictions(config, &model)?, config.input_path("curves")?)
        }
    };
    check_counts(predictions.len(), &source, truth.len(), &rp)?;
    let mut report = Report::new();
    report.line("n", truth.len());
    report.line("msep", fmt_f64(mean_squared_error(&predictions, &truth)?));
    Ok(report)
}

pub fn cmd_simulate(config: &RunConfig) -> CliResult<Report> {
    let n: usize = config.require("n")?;
    let k = config.get_or("k", 8usize)?;
    let degree = config.get_or("degree", DEFAULT_DEGREE)?;
    let points = config.get_or("points", 256usize)?;
    let decay = config.get_or("decay", 2.0f64)?;
    let sigma_eps = config.get_or("sigma_eps", 0.1f64)?;
    let seed = config.get_or("seed", 1u64)?;
    let domain = (config.get_or("domain_min", 0.0)?, config.get_or("domain_max", 1.0)?);
    if points < 2 {
        return Err(CliError::Config("`points` must be at least 2".into()));
    }
    let dir = output_path(config, "out")?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let basis = build_basis(domain, k, degree)?;
    let grams = gram_matrices(&basis)?;
    let eigenvalues = polynomial_spectrum(k, decay);
    let (true_phi, true_psi) = smooth_truth(&grams, &eigenvalues)?;
    let spec = SyntheticSpec { n, eigenvalues: eigenvalues.clone(), true_phi, true_psi, sigma_eps, seed };
    let (ds, oracle) = generate(&spec, &grams)?;

    let abscissae: Vec<f64> = (0..points)
        .map(|i| domain.0 + (domain.1 - domain.0) * i as f64 / (points - 1) as f64)
        .collect();
    let rows = ds
        .curves()
        .iter()
        .map(|c| c.values_at(&abscissae))
        .collect::<flrd::Result<Vec<_>>>()?;
    write_text(&dir.join("curves.csv"), &render_curves(&abscissae, &rows))?;
    write_text(&dir.join("responses.csv"), &render_column(ds.responses()))?;
    write_text(&dir.join("oracle.csv"), &render_column(&oracle))?;

    let mut manifest = String::new();
    for (key, value) in [
        ("n", n.to_string()),
        ("k", k.to_string()),
        ("degree", degree.to_string()),
        ("points", points.to_string()),
        ("domain_min", fmt_f64(domain.0)),
        ("domain_max", fmt_f64(domain.1)),
        ("decay", fmt_f64(decay)),
        ("sigma_eps", fmt_f64(sigma_eps)),
        ("seed", seed.to_string()),
        ("eigenvalues", eigenvalues.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")),
    ] {
        let _ = writeln!(manifest, "{key} = {value}");
    }
    write_text(&dir.join("manifest.txt"), &manifest)?;

    let mut report = Report::new();
    report.line("n", n);
    report.line("out", dir.display());
    Ok(report)
}
