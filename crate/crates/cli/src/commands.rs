//! The seven subcommands. Every command writes its outputs through a
//! [`RunManifest`] so that a failing run leaves no partial files and a
//! successful one records a content hash for everything it produced.

use anyhow::{Context, Result};
use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};

use hecke_resonance::afe::{afe_central_value_detailed, completed_lambda};
use hecke_resonance::chars::make_characters;
use hecke_resonance::field::build_field;
use hecke_resonance::ideals::Ideal;
use hecke_resonance::kernels::kernel_check_suite;
use hecke_resonance::resonance::{
    brute_xi, euler_xi, extreme_value_search, moment_denominator, moment_numerator,
    offdiagonal_probe, rankin_diagnostics, support_products, MomentReport, ResonatorSpec,
};

use crate::config::ExperimentConfig;
use crate::manifest::RunManifest;

/// Resolve the primary output file: `--out` with an extension names it
/// directly, otherwise it is `<out_dir>/<default_name>`.
fn primary_path(cfg: &ExperimentConfig, default_name: &str) -> (PathBuf, PathBuf) {
    if cfg.out_dir.extension().is_some() {
        let dir = cfg.out_dir.parent().unwrap_or(Path::new(".")).to_path_buf();
        (cfg.out_dir.clone(), dir)
    } else {
        (cfg.out_dir.join(default_name), cfg.out_dir.clone())
    }
}

fn config_json(cfg: &ExperimentConfig) -> String {
    serde_json::to_string(cfg).expect("config serializes")
}

fn finish(manifest: RunManifest, dir: &Path, result: Result<()>) -> Result<i32> {
    match result {
        Ok(()) => {
            manifest.finish(dir)?;
            Ok(0)
        }
        Err(e) => {
            manifest.discard();
            Err(e)
        }
    }
}

pub fn field_info(cfg: &ExperimentConfig) -> Result<i32> {
    let ctx = build_field(cfg.d)?;
    #[derive(Serialize)]
    struct FieldDump {
        d: i64,
        #[serde(rename = "D")]
        disc: i64,
        omega_k: u32,
        h_k: usize,
        class_reps: Vec<[i64; 3]>,
        composition: Vec<Vec<usize>>,
        c_k: String,
    }
    let dump = FieldDump {
        d: ctx.d,
        disc: ctx.disc,
        omega_k: ctx.omega_k,
        h_k: ctx.h_k,
        class_reps: ctx.class_reps.iter().map(|f| [f.a, f.b, f.c]).collect(),
        composition: (0..ctx.h_k)
            .map(|i| (0..ctx.h_k).map(|j| ctx.compose_classes(i, j)).collect())
            .collect(),
        c_k: format!("{}", ctx.c_k),
    };
    let text = serde_json::to_string_pretty(&dump)?;
    println!("{text}");
    let (path, dir) = primary_path(cfg, "field_info.json");
    let mut manifest = RunManifest::new("field-info", &config_json(cfg));
    let res = manifest.write(&path, text.as_bytes());
    finish(manifest, &dir, res)
}

pub fn verify_kernels(cfg: &ExperimentConfig) -> Result<i32> {
    let kernel_cfg = cfg.kernel_config()?;
    let rows = kernel_check_suite(&kernel_cfg)?;
    let (path, dir) = primary_path(cfg, "kernel_checks.csv");
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        wtr.serialize(r)?;
    }
    let bytes = wtr.into_inner().context("csv flush")?;
    let mut manifest = RunManifest::new("verify-kernels", &config_json(cfg));
    let res = manifest.write(&path, &bytes);
    let code = finish(manifest, &dir, res)?;
    let failures: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    for f in &failures {
        eprintln!(
            "kernel check failed: {} at (x={}, y_or_t={}): measured {} > bound {}",
            f.check_name, f.x, f.y_or_t, f.measured, f.bound
        );
    }
    println!("verify-kernels: {}/{} checks passed", rows.len() - failures.len(), rows.len());
    Ok(if failures.is_empty() { code } else { 2 })
}

#[derive(Serialize)]
struct LRow {
    ell: i64,
    class_index: usize,
    #[serde(rename = "L_half")]
    l_half: f64,
    #[serde(rename = "log_abs_L")]
    log_abs_l: f64,
    lambda_log_abs: f64,
    n_terms: usize,
    est_err: f64,
}

pub fn compute_l(cfg: &ExperimentConfig, ell_range: Option<Vec<i64>>) -> Result<i32> {
    let ctx = build_field(cfg.d)?;
    let afe = cfg.afe_config();
    let (lo, hi) = match ell_range {
        Some(r) => (r[0], r[1]),
        None => (cfg.x.0.round() as i64, (2.0 * cfg.x.0).round() as i64),
    };
    let w = ctx.omega_k as i64;
    let ells: Vec<i64> = (lo..=hi).filter(|e| e % w == 0 && *e != 0).collect();
    let rows: Vec<Result<Vec<LRow>>> = hecke_resonance::exec::map_collect(ells, |ell| {
        make_characters(&ctx, ell)
            .iter()
            .map(|xi| {
                let eval = afe_central_value_detailed(xi, &ctx, &afe)?;
                let lam = completed_lambda(xi, &ctx, &afe)?;
                Ok(LRow {
                    ell,
                    class_index: xi.class_char_index,
                    l_half: eval.value,
                    log_abs_l: lam.log_abs_l,
                    lambda_log_abs: lam.log_abs,
                    n_terms: eval.n_terms,
                    est_err: eval.est_err,
                })
            })
            .collect()
    });
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for group in rows {
        for row in group? {
            wtr.serialize(row)?;
        }
    }
    let bytes = wtr.into_inner().context("csv flush")?;
    let (path, dir) = primary_path(cfg, "l_values.csv");
    let mut manifest = RunManifest::new("compute-l", &config_json(cfg));
    let res = manifest.write(&path, &bytes);
    println!("compute-l: wrote {}", path.display());
    finish(manifest, &dir, res)
}

#[derive(Serialize)]
struct EulerRow {
    d: i64,
    alpha1: f64,
    alpha2: f64,
    support_size: usize,
    support_norms: String,
    euler: f64,
    brute: f64,
    rel_err: f64,
    pass: bool,
}

pub fn euler_check(cfg: &ExperimentConfig) -> Result<i32> {
    let ctx = build_field(cfg.d)?;
    let full = ResonatorSpec::canonical(100.0f64.exp(), &ctx)?;
    let base: Vec<_> = full.support.iter().take(4).cloned().collect();
    let alpha = full.alpha.expect("canonical spec has positive alpha");
    let mut rows = Vec::new();
    for mask in 0u32..(1 << base.len()) {
        let sub = ResonatorSpec {
            support: base
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << *i) != 0)
                .map(|(_, s)| s.clone())
                .collect(),
            ..full.clone()
        };
        let norms = sub.support.iter().map(|s| s.norm.to_string()).collect::<Vec<_>>().join("+");
        for (a1, a2) in [(0.0, 0.0), (alpha, 0.0), (alpha, alpha)] {
            let e = euler_xi(a1, a2, &sub)?;
            let b = brute_xi(a1, a2, &sub)?;
            let rel = (e - b).abs() / e.abs();
            rows.push(EulerRow {
                d: cfg.d,
                alpha1: a1,
                alpha2: a2,
                support_size: sub.support.len(),
                support_norms: norms.clone(),
                euler: e,
                brute: b,
                rel_err: rel,
                pass: rel <= 1e-10,
            });
        }
    }
    let all_pass = rows.iter().all(|r| r.pass);
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        wtr.serialize(r)?;
    }
    let bytes = wtr.into_inner().context("csv flush")?;
    let (path, dir) = primary_path(cfg, "euler_check.csv");
    let mut manifest = RunManifest::new("euler-check", &config_json(cfg));
    let res = manifest.write(&path, &bytes);
    let code = finish(manifest, &dir, res)?;
    println!("euler-check: {} rows, all_pass = {all_pass}", rows.len());
    Ok(if all_pass { code } else { 2 })
}

#[derive(Serialize)]
struct MomentDump {
    report: MomentReport,
    rankin: Option<hecke_resonance::RankinDiagnostics>,
    resonator_length: f64,
    support_norms: Vec<u64>,
}

pub fn moment(cfg: &ExperimentConfig) -> Result<i32> {
    let ctx = build_field(cfg.d)?;
    let afe = cfg.afe_config();
    let x = cfg.x.0;
    let eps = cfg.epsilon.0;
    let spec = ResonatorSpec::desk_default(cfg.resonator_length(), &ctx)?;
    let (den_direct, den_model) = moment_denominator(x, &spec, &ctx, eps)?;
    let num = moment_numerator(x, &spec, &ctx, &afe, eps, true)?;
    let report = MomentReport {
        x,
        numerator_direct: num.direct,
        numerator_diagonal: num.diagonal_lower.unwrap_or(f64::NAN),
        denominator_direct: den_direct,
        denominator_diagonal: den_model,
        offdiag_mass: num.offdiag_mass,
        ratio_lower_bound: num.direct / den_direct,
        predicted_gain: spec.predicted_gain(),
    };
    let dump = MomentDump {
        report,
        rankin: spec.alpha.map(|_| rankin_diagnostics(&spec)).transpose()?,
        resonator_length: spec.n_length,
        support_norms: spec.support.iter().map(|s| s.norm).collect(),
    };
    let text = serde_json::to_string_pretty(&dump)?;
    println!("{text}");
    let (path, dir) = primary_path(cfg, "moment.json");
    let mut manifest = RunManifest::new("moment", &config_json(cfg));
    let res = manifest.write(&path, text.as_bytes());
    finish(manifest, &dir, res)
}

#[derive(Serialize)]
struct ProbeRow {
    nu: u32,
    m: u32,
    norm_lo: f64,
    norm_hi: f64,
    arg_lo: f64,
    arg_hi: f64,
    count: u64,
    bound: f64,
    eta: f64,
}

pub fn probe_offdiag(cfg: &ExperimentConfig, nu_max: u32, m_max: u32, samples: usize) -> Result<i32> {
    let ctx = build_field(cfg.d)?;
    let spec = ResonatorSpec::desk_default(cfg.resonator_length(), &ctx)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let products = support_products(&spec, spec.n_length)?;
    let mut pairs: Vec<(Ideal, Ideal)> = vec![(Ideal::unit(), Ideal::unit())];
    for _ in 0..samples {
        let a = products.choose(&mut rng).map(|p| p.ideal.clone()).unwrap_or_default();
        let b = products.choose(&mut rng).map(|p| p.ideal.clone()).unwrap_or_default();
        pairs.push((a, b));
    }
    let probes = offdiagonal_probe(cfg.x.0, &ctx, nu_max, m_max, &pairs, 1.0)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for p in &probes {
        wtr.serialize(ProbeRow {
            nu: p.nu,
            m: p.m,
            norm_lo: p.window_norm_lo,
            norm_hi: p.window_norm_hi,
            arg_lo: p.window_arg_lo,
            arg_hi: p.window_arg_hi,
            count: p.count,
            bound: p.bound,
            eta: p.eta,
        })?;
    }
    let bytes = wtr.into_inner().context("csv flush")?;
    let (path, dir) = primary_path(cfg, "offdiag_probe.csv");
    let mut manifest = RunManifest::new("probe-offdiag", &config_json(cfg));
    let res = manifest.write(&path, &bytes);
    println!("probe-offdiag: {} windows over {} pairs", probes.len(), pairs.len());
    finish(manifest, &dir, res)
}

#[derive(Serialize)]
struct SearchRowOut {
    ell: i64,
    class_index: usize,
    l_value: f64,
    log_abs_l: f64,
    floored: bool,
    resonator_sq: f64,
}

pub fn search(cfg: &ExperimentConfig) -> Result<i32> {
    let ctx = build_field(cfg.d)?;
    let afe = cfg.afe_config();
    let spec = ResonatorSpec::desk_default(cfg.resonator_length(), &ctx)?;
    let out = extreme_value_search(cfg.x.0, &spec, &ctx, &afe, cfg.epsilon.0)?;
    let report = serde_json::to_string_pretty(&out)?;
    let (path, dir) = primary_path(cfg, "report.json");
    let sidecar = path.with_extension("csv");
    let mut manifest = RunManifest::new("search", &config_json(cfg));
    let res = (|| -> Result<()> {
        manifest.write(&path, report.as_bytes())?;
        let mut wtr = csv::Writer::from_writer(Vec::new());
        for r in &out.rows {
            wtr.serialize(SearchRowOut {
                ell: r.ell,
                class_index: r.class_index,
                l_value: r.l_value,
                log_abs_l: r.log_abs_l,
                floored: r.floored,
                resonator_sq: r.resonator_sq,
            })?;
        }
        let bytes = wtr.into_inner().context("csv flush")?;
        manifest.write(&sidecar, &bytes)?;
        Ok(())
    })();
    println!(
        "search: max log|L| = {:.6} at ell = {}, class {} (ratio bound {:.6}, predicted gain {:.6})",
        out.log_abs_l_star,
        out.ell_star,
        out.class_index_star,
        out.weighted_avg_bound,
        out.predicted_gain
    );
    finish(manifest, &dir, res)
}
