//! `L(1/2, xi_ell)` as a rapidly truncating smoothed series over ideals,
//! evaluated as one lattice sum per ideal class, together with an
//! independent smoothed-series oracle and the completed function.

use num_complex::Complex64;
use serde::Serialize;

use crate::chars::AngularCharacter;
use crate::field::FieldContext;
use crate::kernels::{gamma_q, log_gamma};
use crate::lattice::Lattice;
use crate::{Error, Result};

/// Truncation and accuracy policy for the central-value evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct AfeConfig {
    /// Truncation multiplier on the transition norm `|ell| |D|^{1/2} / 4pi`.
    pub slack: f64,
    /// The truncated tail must be provably below this.
    pub target_abs_err: f64,
    /// Smoothing scale of the oracle series.
    pub oracle_t: f64,
}

impl Default for AfeConfig {
    fn default() -> Self {
        AfeConfig { slack: 6.0, target_abs_err: 1e-8, oracle_t: 1e4 }
    }
}

impl AfeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.slack >= 2.0) {
            return Err(Error::Domain("afe slack must be at least 2".into()));
        }
        if !(self.target_abs_err > 0.0) {
            return Err(Error::Domain("afe target_abs_err must be positive".into()));
        }
        if !(self.oracle_t >= 10.0) {
            return Err(Error::Domain("oracle_t must be at least 10".into()));
        }
        Ok(())
    }
}

/// Central value plus evaluation metadata.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AfeEvaluation {
    pub value: f64,
    pub n_terms: usize,
    /// Proven bound on the discarded tail.
    pub est_err: f64,
    /// Effective norm cutoff actually used.
    pub cutoff: f64,
}

/// Norm cutoff for frequency `ell_abs`: starts at `slack * ell / c_K` and
/// grows until the rigorous tail bound drops below `target / 2`, so that
/// doubling the slack moves the value by less than `target`.
pub(crate) fn effective_cutoff(ctx: &FieldContext, ell_abs: f64, cfg: &AfeConfig) -> Result<(i128, f64)> {
    let a = (ell_abs + 1.0) / 2.0;
    let mut m = (cfg.slack * ell_abs / ctx.c_k).max(8.0);
    for _ in 0..400 {
        let n_max = m.floor() as i128;
        let est = tail_bound(ctx, a, n_max);
        if est <= cfg.target_abs_err / 2.0 {
            return Ok((n_max, est));
        }
        m *= 1.25;
    }
    Err(Error::Domain("AFE cutoff search failed to converge".into()))
}

/// Rigorous bound on `sum_{n > n_max} (#ideals of norm n) n^{-1/2} * 2 Q(a, c_K n/2)`
/// via `#ideals of norm n <= d(n) <= 2 sqrt(n)` and an upper geometric
/// envelope for the incomplete-Gamma tail.
fn tail_bound(ctx: &FieldContext, a: f64, n_max: i128) -> f64 {
    let n1 = (n_max + 1) as f64;
    let lam = ctx.c_k * n1 / 2.0;
    if lam < 2.0 * a {
        return f64::INFINITY;
    }
    let kappa = 1.0 / (1.0 - (a - 1.0) / lam);
    let ratio = (-ctx.c_k / 2.0 + (a - 1.0) * (1.0 / n1).ln_1p()).exp();
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let ln_gamma_a = log_gamma(Complex64::new(a, 0.0)).map(|v| v.re).unwrap_or(f64::INFINITY);
    let ln_env = -lam + (a - 1.0) * lam.ln() - ln_gamma_a;
    4.0 * kappa * ln_env.exp() / (1.0 - ratio)
}

/// One complex lattice sum per ideal class:
/// `z_m = sum_{beta in c_m / units} e^{i ell arg beta} (N beta / N c_m)^{-1/2} W_K(N beta / N c_m, |ell|)`.
/// `L(1/2, xi) = 2 Re sum_m xi(c_m)^{-1} z_m`.
pub(crate) fn class_sums(ctx: &FieldContext, ell: i64, n_cut: i128) -> Result<(Vec<Complex64>, usize)> {
    let rp = ctx.ring();
    let a = (ell.unsigned_abs() as f64 + 1.0) / 2.0;
    let skip_y = a - 12.0 * a.sqrt();
    let disc_quarter = (rp.disc.unsigned_abs() as f64) / 4.0;
    let mut sums = Vec::with_capacity(ctx.h_k);
    let mut terms = 0usize;
    for rep in ctx.class_prime_reps() {
        let lat: Lattice = rep.z_basis(ctx)?;
        let nc = lat.index();
        let bound = n_cut
            .checked_mul(nc)
            .ok_or(Error::Overflow("afe lattice bound"))?;
        let (la, lb, lc) = (lat.a, lat.b, lat.c);
        let mut z = Complex64::new(0.0, 0.0);
        // points (u, w) = x*(la, 0) + y*(lb, lc); |w| <= sqrt(4 B / |D|)
        let wmax = (4.0 * bound as f64 / rp.disc.unsigned_abs() as f64).sqrt().floor() as i128;
        let ymax = wmax / lc;
        let t_half = rp.t as f64 / 2.0;
        for y in -ymax..=ymax {
            let w = y * lc;
            let rem = bound as f64 - disc_quarter * (w * w) as f64;
            if rem < 0.0 {
                continue;
            }
            let r = rem.sqrt();
            let center = -t_half * w as f64;
            let u_lo = (center - r).ceil() as i128;
            let u_hi = (center + r).floor() as i128;
            // u = x*la + y*lb
            let x_lo = div_ceil_i128(u_lo - y * lb, la);
            let x_hi = div_floor_i128(u_hi - y * lb, la);
            for x in x_lo..=x_hi {
                let u = x * la + y * lb;
                if u == 0 && w == 0 {
                    continue;
                }
                if !rp.in_arg_window((u, w)) {
                    continue;
                }
                let norm = rp.norm((u, w));
                if norm > bound {
                    continue;
                }
                let nk = (norm / nc) as f64;
                debug_assert_eq!(norm % nc, 0);
                let yv = ctx.c_k * nk / 2.0;
                let weight = if yv < skip_y { 1.0 } else { gamma_q(a, yv)? };
                if weight == 0.0 {
                    continue;
                }
                let theta = rp.arg((u, w));
                let phase = ell as f64 * theta;
                z += Complex64::from_polar(weight / nk.sqrt(), phase);
                terms += 1;
            }
        }
        sums.push(z);
    }
    Ok((sums, terms))
}

fn div_ceil_i128(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b) + if a.rem_euclid(b) > 0 { 1 } else { 0 }
}

fn div_floor_i128(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

/// `xi(c_m)^{-1}` for each class representative.
pub(crate) fn class_rep_weights(ctx: &FieldContext, xi: &AngularCharacter) -> Result<Vec<Complex64>> {
    ctx.class_prime_reps()
        .iter()
        .map(|c| Ok(xi.eval(c, ctx)?.conj()))
        .collect()
}

/// `L(1/2, xi_ell)` by the approximate functional equation, with metadata.
pub fn afe_central_value_detailed(
    xi: &AngularCharacter,
    ctx: &FieldContext,
    cfg: &AfeConfig,
) -> Result<AfeEvaluation> {
    cfg.validate()?;
    if xi.ell == 0 {
        return Err(Error::Domain(
            "the trivial frequency ell = 0 is excluded (the L-function has a pole)".into(),
        ));
    }
    let (n_cut, est_err) = effective_cutoff(ctx, xi.ell.unsigned_abs() as f64, cfg)?;
    let (sums, n_terms) = class_sums(ctx, xi.ell, n_cut)?;
    let weights = class_rep_weights(ctx, xi)?;
    let total: Complex64 = sums.iter().zip(&weights).map(|(z, w)| z * w).sum();
    let value = 2.0 * total;
    if value.im.abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "AFE imaginary residue {:.3e} exceeds 1e-9",
            value.im
        )));
    }
    Ok(AfeEvaluation { value: value.re, n_terms, est_err, cutoff: n_cut as f64 })
}

/// `L(1/2, xi_ell)` as a signed real.
pub fn afe_central_value(xi: &AngularCharacter, ctx: &FieldContext, cfg: &AfeConfig) -> Result<f64> {
    Ok(afe_central_value_detailed(xi, ctx, cfg)?.value)
}

/// Independent oracle: the Gaussian-smoothed series
/// `sum_k xi(k) (N k)^{-s} exp(-(N k / T)^2)`, summed over `N k <= 50 T`
/// (terms with damping below 1e-22 are dropped; they are invisible at f64).
/// For nontrivial `xi` this converges to `L(s, xi)` as `T -> infinity`, with
/// empirical error ~ `(conductor/T)^2` at `s = 1/2`.
pub fn smoothed_series_value(
    s: Complex64,
    xi: &AngularCharacter,
    ctx: &FieldContext,
    t_scale: f64,
) -> Result<Complex64> {
    if !(t_scale >= 10.0) {
        return Err(Error::Domain("smoothed series requires T >= 10".into()));
    }
    if s.re < 0.5 {
        return Err(Error::Domain("smoothed series requires Re s >= 1/2".into()));
    }
    let rp = ctx.ring();
    let n_cap = (50.0 * t_scale).min(7.12 * t_scale);
    let disc_quarter = (rp.disc.unsigned_abs() as f64) / 4.0;
    let weights = class_rep_weights(ctx, xi)?;
    let mut total = Complex64::new(0.0, 0.0);
    for (rep, wj) in ctx.class_prime_reps().iter().zip(&weights) {
        let lat = rep.z_basis(ctx)?;
        let nc = lat.index();
        let bound = (n_cap * nc as f64).floor() as i128;
        let (la, lb, lc) = (lat.a, lat.b, lat.c);
        let wmax = (4.0 * bound as f64 / rp.disc.unsigned_abs() as f64).sqrt().floor() as i128;
        let ymax = wmax / lc;
        let t_half = rp.t as f64 / 2.0;
        let mut z = Complex64::new(0.0, 0.0);
        for y in -ymax..=ymax {
            let w = y * lc;
            let rem = bound as f64 - disc_quarter * (w * w) as f64;
            if rem < 0.0 {
                continue;
            }
            let r = rem.sqrt();
            let center = -t_half * w as f64;
            let x_lo = div_ceil_i128((center - r).ceil() as i128 - y * lb, la);
            let x_hi = div_floor_i128((center + r).floor() as i128 - y * lb, la);
            for x in x_lo..=x_hi {
                let u = x * la + y * lb;
                if u == 0 && w == 0 {
                    continue;
                }
                if !rp.in_arg_window((u, w)) {
                    continue;
                }
                let norm = rp.norm((u, w));
                if norm > bound {
                    continue;
                }
                let nk = (norm / nc) as f64;
                let damp = (-(nk / t_scale) * (nk / t_scale)).exp();
                if damp < 1e-22 {
                    continue;
                }
                let theta = rp.arg((u, w));
                let mag = (-s * Complex64::new(nk.ln(), 0.0)).exp();
                z += Complex64::from_polar(1.0, xi.ell as f64 * theta) * mag * damp;
            }
        }
        total += z * wj;
    }
    Ok(total)
}

/// The completed value `Lambda(1/2, xi_ell)`, reported in log-magnitude form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LambdaValue {
    /// `log |Lambda(1/2, xi)|` (floored together with `log_abs_l`).
    pub log_abs: f64,
    /// Sign of `L(1/2, xi)`.
    pub sign: f64,
    /// `log |L(1/2, xi)|`, floored at `ln(1e-12)` when `|L|` underruns it.
    pub log_abs_l: f64,
    /// Set when `|L| < 1e-12` and the logs were floored.
    pub floored: bool,
}

pub const LOG_FLOOR: f64 = -27.631021115928547; // ln(1e-12)

/// `Lambda(1/2, xi) = |D|^{1/4} (2 pi)^{-1/2} Gamma(1/2 + |ell|/2) L(1/2, xi)`
/// computed in the log domain.
pub fn completed_lambda(xi: &AngularCharacter, ctx: &FieldContext, cfg: &AfeConfig) -> Result<LambdaValue> {
    let l = afe_central_value(xi, ctx, cfg)?;
    let prefix = 0.25 * (ctx.disc.unsigned_abs() as f64).ln()
        - 0.5 * (2.0 * std::f64::consts::PI).ln()
        + log_gamma(Complex64::new(0.5 + xi.ell.unsigned_abs() as f64 / 2.0, 0.0))?.re;
    let (log_abs_l, floored) = if l.abs() < 1e-12 {
        (LOG_FLOOR, true)
    } else {
        (l.abs().ln(), false)
    };
    Ok(LambdaValue {
        log_abs: prefix + log_abs_l,
        sign: if l >= 0.0 { 1.0 } else { -1.0 },
        log_abs_l,
        floored,
    })
}
