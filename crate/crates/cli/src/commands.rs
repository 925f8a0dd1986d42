//! Subcommand implementations.
//!
//! `Err` from a command means the invocation itself was invalid (exit 2);
//! per-image problems are recorded and counted in [`Outcome::failed`].

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use dehaze_core::{
    assess, dark_channel, dcp_dehaze, dcp_transmission, dehaze_pipeline, estimate_airlight_dcp, neglected_term_score,
    synthesize_haze, DehazeResult, Field, HazeSynthesisParams, RgbImage,
};
use rayon::prelude::*;

use crate::config::{Method, Settings};
use crate::io::{is_image_path, load_gray, load_image, save_gray, save_image};
use crate::report::{
    write_report, AssessPair, AssessReport, Metrics, RunRecord, RunReport, Status, SynthRecord, SynthReport,
    ValidatePair, ValidateReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Outcome {
    pub processed: usize,
    pub failed: usize,
}

impl Outcome {
    fn count(statuses: impl Iterator<Item = Status>) -> Self {
        statuses.fold(Outcome::default(), |o, s| Outcome {
            processed: o.processed + 1,
            failed: o.failed + usize::from(s == Status::Failed),
        })
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn prepare_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))
}

fn report_path(out: &Path, name: &str, s: &Settings) -> PathBuf {
    out.join(format!("{name}.{}", s.format.extension()))
}

/// Expands directories into their image files (sorted by name); plain paths
/// are kept as given so that unreadable ones surface as failed records.
pub fn expand_inputs(inputs: &[PathBuf]) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = match std::fs::read_dir(input) {
                Ok(entries) => entries
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.is_file() && is_image_path(p))
                    .collect(),
                Err(e) => {
                    eprintln!("warning: cannot list {}: {e}", input.display());
                    Vec::new()
                }
            };
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    files
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "image".to_owned())
}

fn dehaze(img: &RgbImage, s: &Settings) -> dehaze_core::Result<DehazeResult> {
    match s.method {
        Method::Kmap => dehaze_pipeline(img, &s.dehaze_params()),
        Method::Dcp => dcp_dehaze(img, &s.dcp_params()),
    }
}

fn run_one(input: &Path, out: &Path, stem: &str, s: &Settings, with_metrics: bool) -> Result<(Vec<String>, Option<Metrics>)> {
    let img = load_image(input)?;
    let result = dehaze(&img, s).with_context(|| format!("{}: dehazing failed", input.display()))?;
    let outputs = [
        out.join(format!("{stem}.dehazed.png")),
        out.join(format!("{stem}.t.png")),
        out.join(format!("{stem}.k.png")),
    ];
    save_image(&result.radiance, &outputs[0])?;
    save_gray(&result.transmission, &outputs[1])?;
    save_gray(&result.k_map, &outputs[2])?;
    let metrics = if with_metrics {
        Some(assess(&img, &result.radiance, &s.metric_params())?.into())
    } else {
        None
    };
    Ok((outputs.iter().map(|p| display(p)).collect(), metrics))
}

pub fn cmd_run(inputs: &[PathBuf], out: &Path, s: &Settings, with_metrics: bool) -> Result<Outcome> {
    prepare_out(out)?;
    let files = expand_inputs(inputs);
    if files.is_empty() {
        bail!("no input images");
    }
    // the first input claiming a stem owns its output names
    let mut seen = HashSet::new();
    let jobs: Vec<(PathBuf, String, bool)> = files
        .into_iter()
        .map(|f| {
            let stem = file_stem(&f);
            let fresh = seen.insert(stem.clone());
            (f, stem, fresh)
        })
        .collect();
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|(input, stem, fresh)| {
            let start = Instant::now();
            let result = if *fresh {
                run_one(input, out, stem, s, with_metrics)
            } else {
                Err(anyhow::anyhow!("output name {stem:?} already used by an earlier input"))
            };
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let (status, error, outputs, metrics) = match result {
                Ok((outputs, metrics)) => (Status::Ok, None, outputs, metrics),
                Err(e) => (Status::Failed, Some(format!("{e:#}")), Vec::new(), None),
            };
            RunRecord {
                input: display(input),
                method: s.method,
                status,
                error,
                params: s.clone(),
                wall_ms,
                outputs,
                metrics,
            }
        })
        .collect();
    for r in &records {
        match &r.error {
            Some(e) => eprintln!("failed {}: {e}", r.input),
            None => println!("ok {} ({:.0} ms)", r.input, r.wall_ms),
        }
    }
    let report = RunReport { records };
    write_report(&report_path(out, "run", s), s.format, &report, RunReport::to_csv)?;
    Ok(Outcome::count(report.records.iter().map(|r| r.status)))
}

fn assess_one(hazy: &Path, dehazed: &Path, s: &Settings) -> Result<Metrics> {
    let h = load_image(hazy)?;
    let d = load_image(dehazed)?;
    if h.dims() != d.dims() {
        bail!(
            "dimension mismatch: {} is {}x{}, {} is {}x{}",
            hazy.display(),
            h.width(),
            h.height(),
            dehazed.display(),
            d.width(),
            d.height()
        );
    }
    Ok(assess(&h, &d, &s.metric_params())?.into())
}

pub fn cmd_assess(hazy: &Path, dehazed: &[PathBuf], out: &Path, s: &Settings) -> Result<Outcome> {
    prepare_out(out)?;
    let pairs: Vec<AssessPair> = dehazed
        .par_iter()
        .map(|d| {
            let (status, error, metrics) = match assess_one(hazy, d, s) {
                Ok(m) => (Status::Ok, None, Some(m)),
                Err(e) => (Status::Failed, Some(format!("{e:#}")), None),
            };
            AssessPair { hazy: display(hazy), dehazed: display(d), status, error, metrics }
        })
        .collect();
    for p in pairs.iter().filter_map(|p| p.error.as_ref().map(|e| (p, e))) {
        eprintln!("failed {} vs {}: {}", p.0.hazy, p.0.dehazed, p.1);
    }
    let report = AssessReport { params: s.clone(), pairs };
    print!("{}", report.comparison_table());
    write_report(&report_path(out, "assess", s), s.format, &report, AssessReport::to_csv)?;
    Ok(Outcome::count(report.pairs.iter().map(|p| p.status)))
}

/// How the synthetic transmission is specified.
#[derive(Debug, Clone)]
pub enum SynthTransmission {
    Scalar(f64),
    Depth { path: PathBuf, scatter: f64 },
}

fn in_unit(v: f64) -> bool {
    v > 0.0 && v <= 1.0
}

/// Output base name for a clean input: `x.clean.png` and `x.png` both give `x`.
pub fn synth_name(input: &Path) -> String {
    let stem = file_stem(input);
    match stem.strip_suffix(".clean") {
        Some(base) if !base.is_empty() => base.to_owned(),
        _ => stem,
    }
}

pub fn cmd_synth(inputs: &[PathBuf], t: &SynthTransmission, k: f64, out: &Path, s: &Settings) -> Result<Outcome> {
    if !in_unit(k) {
        bail!("invalid parameter k = {k}, expected a value in (0, 1]");
    }
    let transmission = match t {
        SynthTransmission::Scalar(t) => {
            if !in_unit(*t) {
                bail!("invalid parameter t = {t}, expected a value in (0, 1]");
            }
            Field::Scalar(*t)
        }
        SynthTransmission::Depth { path, scatter } => {
            let depth = load_gray(path)?;
            let p = HazeSynthesisParams::from_depth(&depth, *scatter, Field::Scalar(k))
                .with_context(|| format!("invalid depth-derived transmission from {}", path.display()))?;
            p.validate(depth.dims())
                .with_context(|| format!("transmission from {} leaves (0, 1]", path.display()))?;
            p.transmission
        }
    };
    let params = HazeSynthesisParams { transmission, airlight_k: Field::Scalar(k) };
    prepare_out(out)?;
    let files = expand_inputs(inputs);
    if files.is_empty() {
        bail!("no input images");
    }
    let records: Vec<SynthRecord> = files
        .par_iter()
        .map(|input| {
            let result = (|| -> Result<Vec<String>> {
                let clean = load_image(input)?;
                let hazy = synthesize_haze(&clean, &params).with_context(|| format!("{}", input.display()))?;
                let t_map = params.transmission.to_map(clean.width(), clean.height())?;
                let name = synth_name(input);
                let outputs = [out.join(format!("{name}.hazy.png")), out.join(format!("{name}.t.png"))];
                save_image(&hazy, &outputs[0])?;
                save_gray(&t_map, &outputs[1])?;
                Ok(outputs.iter().map(|p| display(p)).collect())
            })();
            let (status, error, outputs) = match result {
                Ok(o) => (Status::Ok, None, o),
                Err(e) => (Status::Failed, Some(format!("{e:#}")), Vec::new()),
            };
            let (t, depth, scatter) = match t {
                SynthTransmission::Scalar(t) => (Some(*t), None, None),
                SynthTransmission::Depth { path, scatter } => (None, Some(display(path)), Some(*scatter)),
            };
            SynthRecord { input: display(input), status, error, t, depth, scatter, k, outputs }
        })
        .collect();
    for r in &records {
        if let Some(e) = &r.error {
            eprintln!("failed {}: {e}", r.input);
        }
    }
    let report = SynthReport { records };
    write_report(&report_path(out, "synth", s), s.format, &report, SynthReport::to_csv)?;
    Ok(Outcome::count(report.records.iter().map(|r| r.status)))
}

/// `NAME.hazy.png` / `NAME.clean.png` pairs found in `dirs`, keyed by NAME.
/// Files matching only one side are reported and skipped.
pub fn discover_pairs(dirs: &[PathBuf]) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let mut hazy = BTreeMap::new();
    let mut clean = BTreeMap::new();
    for dir in dirs {
        let entries = std::fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))?;
        for entry in entries.filter_map(|e| e.ok()) {
            let path = entry.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
            if let Some(base) = name.strip_suffix(".hazy.png") {
                hazy.insert(base.to_owned(), path.clone());
            } else if let Some(base) = name.strip_suffix(".clean.png") {
                clean.insert(base.to_owned(), path.clone());
            }
        }
    }
    let mut pairs = Vec::new();
    for (name, h) in &hazy {
        match clean.remove(name) {
            Some(c) => pairs.push((name.clone(), h.clone(), c)),
            None => eprintln!("warning: {} has no matching {name}.clean.png; skipped", h.display()),
        }
    }
    for (name, c) in clean {
        eprintln!("warning: {} has no matching {name}.hazy.png; skipped", c.display());
    }
    Ok(pairs)
}

fn validate_one(hazy: &Path, clean: &Path, s: &Settings) -> Result<f64> {
    let h = load_image(hazy)?;
    let c = load_image(clean)?;
    let p = s.dcp_params();
    let dark = dark_channel(&h, p.patch_radius);
    let a = estimate_airlight_dcp(&h, &dark, p.top_fraction)?;
    let t = dcp_transmission(&h, &a, &p)?;
    neglected_term_score(&c, &t).with_context(|| format!("{} and {} differ in size", hazy.display(), clean.display()))
}

pub fn cmd_validate(dirs: &[PathBuf], out: &Path, s: &Settings) -> Result<Outcome> {
    let found = discover_pairs(dirs)?;
    if found.is_empty() {
        bail!("no NAME.hazy.png / NAME.clean.png pairs found");
    }
    prepare_out(out)?;
    let pairs: Vec<ValidatePair> = found
        .par_iter()
        .map(|(name, h, c)| {
            let (status, error, score) = match validate_one(h, c, s) {
                Ok(v) => (Status::Ok, None, Some(v)),
                Err(e) => (Status::Failed, Some(format!("{e:#}")), None),
            };
            ValidatePair { pair_name: name.clone(), hazy: display(h), clean: display(c), status, error, score }
        })
        .collect();
    let scores: Vec<f64> = pairs.iter().filter_map(|p| p.score).collect();
    let mean = (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64);
    for p in &pairs {
        match (&p.score, &p.error) {
            (Some(v), _) => println!("{} {v}", p.pair_name),
            (None, Some(e)) => eprintln!("failed {}: {e}", p.pair_name),
            _ => {}
        }
    }
    match mean {
        Some(m) => println!("mean {m}"),
        None => println!("mean undefined"),
    }
    let report = ValidateReport { params: s.clone(), pairs, mean };
    write_report(&report_path(out, "validate", s), s.format, &report, ValidateReport::to_csv)?;
    Ok(Outcome::count(report.pairs.iter().map(|p| p.status)))
}
