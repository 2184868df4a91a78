use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fractal_curvatures::estimators::boxcount::default_box_sizes;
use fractal_curvatures::estimators::periodogram::{detrend, estimate_period, periodogram};
use fractal_curvatures::estimators::report::{format_report, write_periodogram_csv, write_result_csv};
use fractal_curvatures::estimators::{
    box_count_dimension, estimate, estimate_m, EstimateOptions, EstimationResult, HarmonicCount, Method,
    NreMode,
};
use fractal_curvatures::estimators::nre::even_step;
use fractal_curvatures::ifs::{
    classify_arithmeticity, rasterize, similarity_dimension, ArithmeticityKind, DepthPolicy, IfsSystem,
    RasterOptions, DEFAULT_ARITHMETICITY_TOL,
};
use fractal_curvatures::image::{read_image, write_image, PbmFormat};
use fractal_curvatures::lab::{
    simulate_lre, simulate_normality, write_trial_csv, ErrorModel, LabConfig, ScheduleFamily, Truth,
};
use fractal_curvatures::series::{
    build_schedule, measure_series, read_series_csv, to_regression, validate_signs, write_series_csv,
    CurvatureSeries, RadiiSchedule, ScheduleKind, SignRule, SignStatus,
};
use fractal_curvatures::{BinaryImage, Error, RegressionData};

use crate::args::{
    ConsistencyArgs, EstimateArgs, EstimateFlags, FamilyChoice, GenerateArgs, LabArgs, LabExperiment,
    MeasureArgs, MethodChoice, ModeChoice, NormalityArgs, PeriodogramArgs, ReportArgs, ScheduleArgs,
    ScheduleChoice, SignRuleChoice, SyntheticArgs,
};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

/// Runs `write` against the file at `path`, or standard output.
fn with_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> fractal_curvatures::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush().with_context(|| format!("cannot write {}", p.display()))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn load_image(path: &Path) -> Result<BinaryImage> {
    read_image(path).with_context(|| format!("reading {}", path.display()))
}

fn load_series(path: &Path) -> Result<CurvatureSeries> {
    let file = File::open(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    read_series_csv(file).with_context(|| format!("reading {}", path.display()))
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let sys = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io { path: path.clone(), source: e })?;
            IfsSystem::parse_config(a.name.as_str(), &text)?
        }
        None => IfsSystem::preset(&a.name)?,
    };
    let mut opts = RasterOptions::new(a.side).with_margin(a.margin);
    if let Some(d) = a.depth {
        opts = opts.with_depth(DepthPolicy::Fixed(d));
    }
    let img = rasterize(&sys, &opts)?;
    let out = a
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}_{}.pbm", sys.name, a.side)));
    let format = if a.plain { PbmFormat::Plain } else { PbmFormat::Raw };
    write_image(&img, &out, format)?;
    let class = classify_arithmeticity(&sys, DEFAULT_ARITHMETICITY_TOL);
    println!("wrote {}", out.display());
    println!("black pixels: {}", img.count_black());
    println!("similarity dimension: {:.6}", similarity_dimension(&sys));
    match class.kind {
        ArithmeticityKind::Arithmetic { h } => println!("arithmetic with period h = {h:.6}"),
        ArithmeticityKind::NonArithmetic => println!("non-arithmetic"),
    }
    Ok(())
}

fn radius_range(v: Option<&[f64]>) -> Result<Option<(f64, f64)>> {
    match v {
        None => Ok(None),
        Some(&[lo, hi]) if lo <= hi => Ok(Some((lo, hi))),
        Some(_) => Err(usage("--truncate takes two radii lo,hi with lo <= hi")),
    }
}

fn schedule(a: &ScheduleArgs) -> Result<RadiiSchedule> {
    let kind = match (&a.radii, a.schedule) {
        (Some(r), _) => ScheduleKind::Explicit(r.clone()),
        (None, ScheduleChoice::Log) => {
            if a.x_step.is_nan() || a.x_step <= 0.0 || a.x_last < a.x_first {
                return Err(usage("need --x-step > 0 and --x-last >= --x-first"));
            }
            ScheduleKind::log_range(a.x_first, a.x_last, a.x_step)
        }
        (None, ScheduleChoice::EqualArea) => ScheduleKind::EqualArea { n: a.count },
    };
    let sched = build_schedule(kind, a.min_radius)?;
    match radius_range(a.truncate.as_deref())? {
        Some((lo, hi)) => Ok(sched.truncated(lo, hi)?),
        None => Ok(sched),
    }
}

fn warn_series(series: &CurvatureSeries) {
    let contacts = series.border_contacts();
    if contacts.len() == series.len() && !contacts.is_empty() {
        eprintln!("warning: the set lies within {:.2} px of the image border; every dilation is clipped by the canvas",
            series.border_distance.unwrap_or(0.0));
    } else if let Some(first) = contacts.iter().copied().reduce(f64::min) {
        eprintln!(
            "warning: {} dilation(s) with radius >= {first:.3} reach the image border and are clipped",
            contacts.len()
        );
    }
    let screened = validate_signs(series, SignRule::Strict);
    for (k, reason) in &screened.excluded {
        eprintln!("warning: C{k} violates the constant-sign requirement ({reason:?}); it will be excluded");
    }
    let zeros = screened.dropped.len();
    if zeros > 0 {
        eprintln!("warning: {zeros} zero sample(s) will be dropped from the regression");
    }
}

fn measure_image(image: &Path, sched: &ScheduleArgs) -> Result<CurvatureSeries> {
    let img = load_image(image)?;
    let sched = schedule(sched)?;
    let series = measure_series(&img, &sched)?;
    warn_series(&series);
    Ok(series)
}

pub fn measure(a: MeasureArgs) -> Result<()> {
    let series = measure_image(&a.image, &a.schedule)?;
    with_output(a.out.as_deref(), |w| write_series_csv(&series, w))?;
    if let Some(p) = &a.out {
        eprintln!("wrote {} radii to {}", series.len(), p.display());
    }
    Ok(())
}

fn harmonics(m: &str) -> Result<HarmonicCount> {
    match m {
        "auto" => Ok(HarmonicCount::Estimated),
        _ => m
            .parse()
            .map(HarmonicCount::Fixed)
            .map_err(|_| usage(format!("--m must be a non-negative integer or 'auto', got '{m}'"))),
    }
}

fn sign_rule(r: SignRuleChoice) -> SignRule {
    match r {
        SignRuleChoice::Strict => SignRule::Strict,
        SignRuleChoice::Majority => SignRule::Majority,
    }
}

fn indices(v: &Option<Vec<u8>>) -> Option<Vec<usize>> {
    v.as_ref().map(|v| v.iter().map(|&k| k as usize).collect())
}

fn options(f: &EstimateFlags) -> Result<EstimateOptions> {
    Ok(EstimateOptions {
        method: match f.method {
            MethodChoice::Lre => Method::Lre,
            MethodChoice::Nre => Method::Nre,
            MethodChoice::Auto => Method::Auto,
        },
        m: harmonics(&f.m)?,
        h0: f.h0,
        mode: match f.mode {
            ModeChoice::Simultaneous => NreMode::Simultaneous,
            ModeChoice::Separate => NreMode::Separate,
        },
        fixed_s: f.fixed_s,
        period_indices: indices(&f.period_indices),
        pad: f.pad,
        threshold: f.threshold,
    })
}

fn regression(series: &CurvatureSeries, rule: SignRuleChoice, j: Option<Vec<usize>>) -> Result<RegressionData> {
    let screened = validate_signs(series, sign_rule(rule));
    for (k, reason) in &screened.excluded {
        if j.as_ref().is_none_or(|j| j.contains(k)) {
            eprintln!("note: C{k} excluded ({reason:?})");
        }
    }
    Ok(to_regression(&screened, j.as_deref())?)
}

fn run_estimate(series: &CurvatureSeries, f: &EstimateFlags) -> Result<(RegressionData, EstimationResult)> {
    let data = regression(series, f.sign_rule, indices(&f.indices))?;
    let res = estimate(&data, &options(f)?)?;
    Ok((data, res))
}

fn truncate_series(series: CurvatureSeries, range: Option<&[f64]>) -> Result<CurvatureSeries> {
    match radius_range(range)? {
        Some((lo, hi)) => {
            let entries = series.entries.into_iter().filter(|e| e.eps >= lo && e.eps <= hi).collect();
            Ok(CurvatureSeries::from_entries(entries)?)
        }
        None => Ok(series),
    }
}

fn print_box_count(img: &BinaryImage) -> Result<()> {
    let sizes = default_box_sizes(img);
    let d = box_count_dimension(img, &sizes)?;
    println!("box-counting dimension (boxes {sizes:?}): {d:.4}");
    Ok(())
}

pub fn estimate_cmd(a: EstimateArgs) -> Result<()> {
    let series = truncate_series(load_series(&a.series)?, a.truncate.as_deref())?;
    let (_, res) = run_estimate(&series, &a.flags)?;
    print!("{}", format_report(&res));
    if let Some(img) = &a.image {
        print_box_count(&load_image(img)?)?;
    }
    if let Some(out) = &a.out {
        with_output(Some(out), |w| write_result_csv(&res, w))?;
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}

pub fn periodogram_cmd(a: PeriodogramArgs) -> Result<()> {
    let series = load_series(&a.series)?;
    let j: Vec<usize> = a.indices.iter().map(|&k| k as usize).collect();
    let data = regression(&series, a.sign_rule, Some(j))?;
    let p = periodogram(&detrend(&data)?, a.pad)?;
    if let Some(out) = &a.out {
        with_output(Some(out), |w| write_periodogram_csv(&p, w))?;
        eprintln!("wrote {} frequencies to {}", p.len(), out.display());
    }
    let m = match harmonics(&a.m)? {
        HarmonicCount::Fixed(m) => m,
        HarmonicCount::Estimated => estimate_m(&p),
    };
    println!("harmonic count estimate: {}", estimate_m(&p));
    let step = even_step(&data.x)
        .ok_or_else(|| usage("period estimation needs an evenly spaced schedule"))?
        .abs();
    let est = estimate_period(&p, m.max(1), step, a.threshold)?;
    println!("period h0: {:.6}", est.h0);
    println!("frequency: {:.6} rad/sample", est.t);
    println!("peak/median ratio: {:.2}", est.ratio);
    Ok(())
}

fn truth_and_family(s: &SyntheticArgs) -> (Truth, ScheduleFamily) {
    let family = match s.family {
        FamilyChoice::Power => ScheduleFamily::Power { c: s.c, delta: s.delta },
        FamilyChoice::Arithmetic => ScheduleFamily::Arithmetic { a0: s.a0, a: s.a },
    };
    (Truth { s: s.s, beta: s.beta.clone() }, family)
}

fn error_model(text: &str) -> Result<ErrorModel> {
    match text.strip_prefix("cov:") {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io { path: PathBuf::from(path), source: e })?;
            let rows = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| {
                    l.split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|f| !f.is_empty())
                        .map(|f| f.parse::<f64>())
                        .collect::<std::result::Result<Vec<f64>, _>>()
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidErrorModel(format!("{path}: {e}")))?;
            Ok(ErrorModel::from_covariance_rows(rows)?)
        }
        None => Ok(text.parse()?),
    }
}

fn consistency(a: ConsistencyArgs) -> Result<()> {
    let (truth, family) = truth_and_family(&a.synthetic);
    let cfg = LabConfig {
        truth,
        family,
        error: error_model(&a.error)?,
        n_values: a.n,
        trials: a.synthetic.trials,
        eps: a.eps,
        seed: a.synthetic.seed,
    };
    let report = simulate_lre(&cfg)?;
    println!("{:>6} {:>12} {:>8} {:>10} {:>12}", "n", "rmse_s", "eps", "exceed", "bound");
    for r in &report.rows {
        for &(eps, freq, bound) in &r.exceedance {
            println!("{:>6} {:>12.6} {:>8} {:>10.4} {:>12.4e}", r.n, r.rmse_s, eps, freq, bound);
        }
    }
    if !report.exceedance_monotone() {
        eprintln!("warning: exceedance frequencies are not monotone in n");
    }
    if let Some(out) = &a.out {
        with_output(Some(out), |w| write_trial_csv(&report, w))?;
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}

fn normality(a: NormalityArgs) -> Result<()> {
    let (truth, family) = truth_and_family(&a.synthetic);
    let t = a.t.unwrap_or_else(|| {
        let mut t = vec![0.0; truth.beta.len() + 1];
        *t.last_mut().expect("non-empty") = 1.0;
        t
    });
    let r = simulate_normality(&truth, family, a.sigma, a.n, a.synthetic.trials, &t, a.synthetic.seed)?;
    println!("KS statistic {:.4}, p-value {:.4}", r.ks_statistic, r.ks_p_value);
    println!("{:>8} {:>10} {:>10}", "decile", "normal", "empirical");
    for (i, (q, e)) in r.deciles.iter().enumerate() {
        println!("{:>8} {:>10.4} {:>10.4}", format!("{}%", 10 * (i + 1)), q, e);
    }
    println!("max decile error: {:.4}", r.max_decile_error());
    if let Some(out) = &a.out {
        let mut w = BufWriter::new(File::create(out).with_context(|| format!("cannot create {}", out.display()))?);
        writeln!(w, "trial,statistic")?;
        for (i, v) in r.statistics.iter().enumerate() {
            writeln!(w, "{i},{v:.16e}")?;
        }
        w.flush()?;
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}

pub fn lab(a: LabArgs) -> Result<()> {
    match a.experiment {
        LabExperiment::Consistency(c) => consistency(c),
        LabExperiment::Normality(n) => normality(n),
    }
}

pub fn report(a: ReportArgs) -> Result<()> {
    let img = load_image(&a.image)?;
    let sched = schedule(&a.schedule)?;
    let series = measure_series(&img, &sched)?;
    warn_series(&series);
    let (data, res) = run_estimate(&series, &a.flags)?;
    println!("image: {} ({}x{}, {} black pixels)", a.image.display(), img.width(), img.height(), img.count_black());
    println!("radii: {} from {:.3} to {:.3}", sched.len(), sched.radii()[0], sched.radii()[sched.len() - 1]);
    let signs: Vec<String> = series_signs(&series, a.flags.sign_rule);
    println!("signs of C0, C1, C2: {}", signs.join(" "));
    print!("{}", format_report(&res));
    print_box_count(&img)?;
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        with_output(Some(&dir.join("series.csv")), |w| write_series_csv(&series, w))?;
        with_output(Some(&dir.join("result.csv")), |w| write_result_csv(&res, w))?;
        if let Ok(resid) = detrend(&data) {
            let p = periodogram(&resid, a.flags.pad)?;
            with_output(Some(&dir.join("periodogram.csv")), |w| write_periodogram_csv(&p, w))?;
        }
        eprintln!("wrote artifacts to {}", dir.display());
    }
    Ok(())
}

fn series_signs(series: &CurvatureSeries, rule: SignRuleChoice) -> Vec<String> {
    validate_signs(series, sign_rule(rule))
        .signs
        .iter()
        .map(|s: &SignStatus| s.to_string())
        .collect()
}
