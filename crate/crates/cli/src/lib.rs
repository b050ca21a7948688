//! Command implementations behind the `ccca` binary.

pub mod args;
pub mod csvio;
pub mod report;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, ensure, Context, Result};
use ccca::metrics::{isr, matched_snr_db};
use ccca::regression::{coefficients_from_text, coefficients_to_text, train, RegressionCoefficients, TrainingGrid};
use ccca::separation::{cca_separate, ccca_separate, SeparationResult};
use ccca::special::normal_quantile;
use ccca::{cos_index, CopulaFamily, CopulaModel, Error, Matrix, SeparationConfig, SignalMatrix, SignalRole};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use args::{Cli, Command, CosArgs, MarginChoice, Method, OutputArgs, SeparateArgs, SynthArgs, TrainArgs};
use report::{CoefficientsEcho, ConfigEcho, ExperimentEcho, FileEcho, MixtureEcho, Report, RunEcho};

/// How a command finished; mapped to the process exit code by the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Converged,
    Unconverged,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Done | Outcome::Converged => 0,
            Outcome::Unconverged => 2,
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::TrainRegression(a) => train_regression(&a),
        Command::Synth(a) => synth(&a).map(|r| r.0),
        Command::Separate(a) => separate(&a).map(|r| r.0),
        Command::Cos(a) => cos(&a, &mut std::io::stdout()),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_echo(path: &Path) -> Result<FileEcho> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileEcho {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

pub fn train_regression(a: &TrainArgs) -> Result<Outcome> {
    let families: Vec<CopulaFamily> = if a.family.is_empty() {
        CopulaFamily::PARAMETRIC.to_vec()
    } else {
        a.family.clone()
    };
    let records = families
        .iter()
        .map(|&f| {
            let grid = TrainingGrid::standard(f, a.grid_points, a.samples, a.seed)?;
            train::<f64>(&grid)
        })
        .collect::<ccca::Result<Vec<_>>>()?;
    csvio::write_text(&a.coeffs, &coefficients_to_text(&records))?;
    Ok(Outcome::Done)
}

/// Loads the record for `family` and the file's digest.
pub fn load_coefficients(path: &Path, family: CopulaFamily) -> Result<(RegressionCoefficients<f64>, CoefficientsEcho)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading coefficients {}", path.display()))?;
    let text = String::from_utf8(bytes.clone()).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let records: Vec<RegressionCoefficients<f64>> =
        coefficients_from_text(&text).with_context(|| format!("parsing {}", path.display()))?;
    let record = records
        .into_iter()
        .find(|r| r.family == family)
        .ok_or_else(|| anyhow!("{} has no [{family}] record", path.display()))?;
    let echo = CoefficientsEcho {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
        a1: record.a1,
        a2: record.a2,
        a3: record.a3,
        alpha_min: record.alpha_min,
        alpha_max: record.alpha_max,
    };
    Ok((record, echo))
}

/// Copula sources with the chosen margins, standardised per channel.
pub fn synth_sources(
    family: CopulaFamily,
    alpha: f64,
    t: usize,
    seed: u64,
    margins: MarginChoice,
) -> Result<SignalMatrix<f64>> {
    let model = CopulaModel::<f64>::new(family, alpha)?;
    let s = model.sample(t, seed);
    let warp = |x: Vec<f64>| -> Vec<f64> {
        match margins {
            MarginChoice::Uniform => x,
            MarginChoice::Gaussian => x.into_iter().map(normal_quantile).collect(),
        }
    };
    Ok(SignalMatrix::new(vec![warp(s.u), warp(s.v)], SignalRole::Sources)?.standardized()?)
}

/// `A S + n` with `n ~ N(0, noise_std²)` drawn from its own stream.
pub fn mix(a: &Matrix<f64>, s: &SignalMatrix<f64>, noise_std: f64, seed: u64) -> Result<SignalMatrix<f64>> {
    let x = a.apply(s, SignalRole::Observations);
    if noise_std == 0.0 {
        return Ok(x);
    }
    let normal = Normal::new(0.0, noise_std).map_err(|e| anyhow!("noise: {e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6E6F_6973_6500_0000);
    let rows = x
        .into_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|v| v + normal.sample(&mut rng)).collect())
        .collect();
    Ok(SignalMatrix::new(rows, SignalRole::Observations)?)
}

fn mixing_matrix(values: &[f64]) -> Result<Matrix<f64>> {
    ensure!(
        values.len() == 4,
        "--mixing needs 4 values (a11,a12,a21,a22), got {}",
        values.len()
    );
    ensure!(values.iter().all(|v| v.is_finite()), "--mixing values must be finite");
    let a = Matrix::from_rows(&[values[..2].to_vec(), values[2..].to_vec()])?;
    ensure!(a.det().abs() > 1e-12, "mixing matrix is singular");
    Ok(a)
}

fn run_echo(
    method: &str,
    r: &SeparationResult<f64>,
    truth: Option<&SignalMatrix<f64>>,
    mixing: Option<&Matrix<f64>>,
    seconds: f64,
) -> Result<RunEcho> {
    let (snr, gain) = match truth {
        Some(s) => {
            let (_, snr) = matched_snr_db(&r.y, s)?;
            let g = match mixing {
                Some(a) => r.w.matmul(a),
                None => regression_gain(&r.y, s)?,
            };
            (Some(snr), Some(g))
        }
        None => (None, None),
    };
    Ok(RunEcho {
        method: method.to_string(),
        status: if r.converged() { "converged" } else { "unconverged" }.to_string(),
        iterations: r.iterations(),
        final_kl: r.kl,
        final_alpha: r.alpha,
        final_cos: cos_index(r.y.row(0), r.y.row(1))?,
        demixing: r.w.to_rows(),
        isr: gain.as_ref().map(isr),
        gain: gain.map(|g| g.to_rows()),
        snr_db: snr,
        wall_time_s: seconds,
        trace: r.trace.records.iter().map(report::TraceRow::from).collect(),
    })
}

/// Least-squares gain `G` in `Y ≈ G S`.
fn regression_gain(y: &SignalMatrix<f64>, s: &SignalMatrix<f64>) -> Result<Matrix<f64>> {
    let p = s.channels();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut yst = Matrix::zeros(p);
    let mut sst = Matrix::zeros(p);
    for i in 0..p {
        for j in 0..p {
            yst.set(i, j, dot(y.row(i), s.row(j)));
            sst.set(i, j, dot(s.row(i), s.row(j)));
        }
    }
    Ok(yst.matmul(&sst.inverse()?))
}

fn timed<T>(f: impl FnOnce() -> ccca::Result<T>) -> Result<(T, f64)> {
    let t0 = Instant::now();
    let v = f()?;
    Ok((v, t0.elapsed().as_secs_f64()))
}

fn outcome_of(runs: &[RunEcho]) -> Outcome {
    if runs.iter().all(|r| r.status == "converged") {
        Outcome::Converged
    } else {
        Outcome::Unconverged
    }
}

/// Writes the report to `--report`, or to stdout when no path is given.
fn emit(report: &Report, output: &OutputArgs) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match &output.report {
        Some(path) => csvio::write_text(path, &text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let Some(path) = &output.trace {
        csvio::write_text(path, &report::trace_csv(&report.runs))?;
    }
    Ok(())
}

fn check_family(family: CopulaFamily) -> Result<()> {
    if family == CopulaFamily::Independence {
        bail!("separation needs a parametric family (gumbel, clayton, frank or gaussian)");
    }
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result<(Outcome, Report)> {
    check_family(a.family)?;
    ensure!(
        a.samples >= ccca::signal::MIN_SAMPLES,
        "--samples must be at least {}",
        ccca::signal::MIN_SAMPLES
    );
    ensure!(
        a.noise_std >= 0.0 && a.noise_std.is_finite(),
        "--noise-std must be a finite value >= 0"
    );
    let mixing = mixing_matrix(&a.mixing)?;
    let config: SeparationConfig<f64> = a.descent.config(a.family);
    config.validate()?;
    let wants_ccca = matches!(a.method, Method::Ccca | Method::Both);
    let coeffs = match (&a.coeffs, wants_ccca) {
        (Some(p), true) => Some(load_coefficients(p, a.family)?),
        (None, true) => bail!("--coeffs is required when the method includes ccca"),
        _ => None,
    };
    let s = synth_sources(a.family, a.alpha, a.samples, a.seed, a.margins)?;
    let x = mix(&mixing, &s, a.noise_std, a.seed)?;

    let mut runs = Vec::new();
    if let Some((c, _)) = &coeffs {
        let (r, secs) = timed(|| ccca_separate(&x, &config, c, Some(&s)))?;
        runs.push(run_echo("ccca", &r, Some(&s), Some(&mixing), secs)?);
    }
    if matches!(a.method, Method::Cca | Method::Both) {
        let (r, secs) = timed(|| cca_separate(&x, &config, Some(&s)))?;
        runs.push(run_echo("cca", &r, Some(&s), Some(&mixing), secs)?);
    }
    let report = Report {
        tool: "ccca",
        version: env!("CARGO_PKG_VERSION"),
        command: "synth",
        experiment: Some(ExperimentEcho {
            family: a.family.to_string(),
            alpha: a.alpha,
            samples: a.samples,
            mixing: mixing.to_rows(),
            noise_std: a.noise_std,
            seed: a.seed,
            margins: format!("{:?}", a.margins).to_lowercase(),
            method: format!("{:?}", a.method).to_lowercase(),
        }),
        input: None,
        truth: None,
        config: ConfigEcho::from(&config),
        coefficients: coeffs.map(|c| c.1),
        observations: MixtureEcho {
            cos: cos_index(x.row(0), x.row(1))?,
            snr_db: Some(matched_snr_db(&x, &s)?.1),
        },
        runs,
    };
    emit(&report, &a.output)?;
    Ok((outcome_of(&report.runs), report))
}

fn read_signals(path: &Path, header: bool, role: SignalRole) -> Result<SignalMatrix<f64>> {
    let rows = csvio::read_matrix(path, header)?;
    if rows.len() != 2 {
        return Err(Error::UnsupportedDimension { p: rows.len() }).with_context(|| {
            format!(
                "{} has {} channels; separation is pairwise, pass one pair of channels per file",
                path.display(),
                rows.len()
            )
        });
    }
    SignalMatrix::new(rows, role).with_context(|| format!("validating {}", path.display()))
}

pub fn separate(a: &SeparateArgs) -> Result<(Outcome, Report)> {
    check_family(a.family)?;
    let x = read_signals(&a.input, a.header, SignalRole::Observations)?;
    let truth = match &a.truth {
        Some(p) => {
            let s = read_signals(p, a.header, SignalRole::Sources)?;
            ensure!(
                s.samples() == x.samples(),
                "truth has {} samples but the input has {}",
                s.samples(),
                x.samples()
            );
            Some(s)
        }
        None => None,
    };
    let config = a.descent.config(a.family);
    config.validate()?;
    let (coeffs, echo) = load_coefficients(&a.coeffs, a.family)?;
    let (r, secs) = timed(|| ccca_separate(&x, &config, &coeffs, truth.as_ref()))?;
    let run = run_echo("ccca", &r, truth.as_ref(), None, secs)?;
    let observations = MixtureEcho {
        cos: cos_index(x.row(0), x.row(1))?,
        snr_db: truth.as_ref().map(|s| matched_snr_db(&x, s).map(|m| m.1)).transpose()?,
    };
    let report = Report {
        tool: "ccca",
        version: env!("CARGO_PKG_VERSION"),
        command: "separate",
        experiment: None,
        input: Some(file_echo(&a.input)?),
        truth: a.truth.as_deref().map(file_echo).transpose()?,
        config: ConfigEcho::from(&config),
        coefficients: Some(echo),
        observations,
        runs: vec![run],
    };
    emit(&report, &a.output)?;
    Ok((outcome_of(&report.runs), report))
}

/// `θ_ij = CoS(x_i, x_j)` for every ordered pair, with a unit diagonal.
pub fn cos_matrix(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let p = rows.len();
    ensure!(p >= 2, "need at least two channels, got {p}");
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    if i == j {
                        Ok(1.0)
                    } else {
                        cos_index(&rows[i], &rows[j]).map_err(Into::into)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn cos(a: &CosArgs, out: &mut impl std::io::Write) -> Result<Outcome> {
    let rows = csvio::read_matrix(&a.input, a.header)?;
    let m = cos_matrix(&rows)?;
    let text = csvio::format_matrix(&m);
    out.write_all(text.as_bytes())?;
    if let Some(path) = &a.output {
        csvio::write_text(path, &text)?;
    }
    Ok(Outcome::Done)
}
