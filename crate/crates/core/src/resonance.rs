//! The resonance engine: resonator coefficients over split primes, first
//! moments of `L(1/2, xi) |R(xi)|^2` over a dyadic frequency range in direct
//! and diagonal form, Euler-product factorizations of the Rankin-completed
//! diagonal sums with a brute-force twin, off-diagonal probes, and the
//! extreme-value search.

use num_complex::Complex64;
use serde::Serialize;

use crate::afe::{class_sums, effective_cutoff, AfeConfig};
use crate::chars::{make_characters, AngularCharacter};
use crate::exec::{map_collect, pairwise_sum};
use crate::field::FieldContext;
use crate::ideals::{enumerate_ideals, Ideal, PrimeIdeal};
use crate::kernels::{bump_phi, gamma_q, phi_hat_zero};
use crate::{Error, Result};

/// One conjugate pair of split prime ideals in the resonator support.
#[derive(Clone, Debug)]
pub struct SupportPair {
    /// Distinguished member of the pair.
    pub prime: PrimeIdeal,
    pub norm: u64,
    /// Coefficient `r(p) = L / (sqrt(N p) log N p)`, shared by the pair.
    pub r: f64,
}

/// Resonator data: length `N`, derived parameters, and the coefficient map
/// over the split-prime support (one representative per conjugate pair;
/// `r` vanishes off the support and on squares).
#[derive(Clone, Debug)]
pub struct ResonatorSpec {
    pub n_length: f64,
    /// `L = sqrt(log N log log N / 2)`.
    pub l_param: f64,
    /// Rankin parameter `1/log^3 L`; `None` when `log L <= 0` (short desk
    /// resonators), where Rankin diagnostics are undefined.
    pub alpha: Option<f64>,
    pub support: Vec<SupportPair>,
}

fn l_param_of(n: f64) -> Result<f64> {
    if !(n.is_finite() && n.ln() > 1.0) {
        return Err(Error::Domain(format!("resonator length N = {n} must satisfy log log N > 0")));
    }
    Ok((0.5 * n.ln() * n.ln().ln()).sqrt())
}

impl ResonatorSpec {
    /// The resonator with the canonical support window
    /// `L^2 <= N p <= exp(log^2 L)`; rejects `N < e^10`.
    pub fn canonical(n: f64, ctx: &FieldContext) -> Result<Self> {
        if !(n >= (10.0f64).exp()) {
            return Err(Error::ResonatorLengthTooSmall(n));
        }
        let l = l_param_of(n)?;
        Self::with_support_norm_range(n, ctx, l * l, (l.ln() * l.ln()).exp())
    }

    /// Desk-scale default: same coefficient formula, support truncated to
    /// split primes of norm at most `N`. Lengths with `log log N <= 0`
    /// (`N <= e`) have no coefficient scale `L` and carry an empty support.
    pub fn desk_default(n: f64, ctx: &FieldContext) -> Result<Self> {
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::Domain(format!("resonator length N = {n} must be at least 1")));
        }
        if n.ln() <= 1.0 {
            return Ok(ResonatorSpec { n_length: n, l_param: 0.0, alpha: None, support: Vec::new() });
        }
        Self::with_support_norm_range(n, ctx, 2.0, n)
    }

    /// Explicit support window `[lo, hi]` by prime-ideal norm.
    pub fn with_support_norm_range(n: f64, ctx: &FieldContext, lo: f64, hi: f64) -> Result<Self> {
        let l = l_param_of(n)?;
        let mut support = Vec::new();
        if hi >= lo && hi >= 2.0 {
            let mut p = 2u64;
            while (p as f64) <= hi {
                if crate::field::is_prime_u64(p) && p as f64 >= lo {
                    if let crate::field::Splitting::Split(plus, _) = ctx.splitting_type(p)? {
                        let norm = plus.norm();
                        let r = l / ((norm as f64).sqrt() * (norm as f64).ln());
                        support.push(SupportPair { prime: plus, norm, r });
                    }
                }
                p += 1;
            }
        }
        let log_l = l.ln();
        let alpha = if log_l > 0.0 { Some(1.0 / (log_l * log_l * log_l)) } else { None };
        Ok(ResonatorSpec { n_length: n, l_param: l, alpha, support })
    }

    /// Same resonator with the support cut at `max_norm`.
    pub fn truncate_support(&self, max_norm: f64) -> Self {
        ResonatorSpec {
            n_length: self.n_length,
            l_param: self.l_param,
            alpha: self.alpha,
            support: self
                .support
                .iter()
                .filter(|s| (s.norm as f64) <= max_norm)
                .cloned()
                .collect(),
        }
    }

    /// Recompute `L` and `alpha` from `N` and verify the stored values.
    pub fn validate(&self) -> Result<()> {
        if self.n_length.ln() <= 1.0 {
            if self.support.is_empty() && self.l_param == 0.0 && self.alpha.is_none() {
                return Ok(());
            }
            return Err(Error::Domain("degenerate resonator must have empty support".into()));
        }
        let l = l_param_of(self.n_length)?;
        if (l - self.l_param).abs() > 1e-12 * l.max(1.0) {
            return Err(Error::Domain("resonator L does not match its length".into()));
        }
        if let Some(a) = self.alpha {
            let want = 1.0 / (l.ln().powi(3));
            if !(a > 0.0) || (a - want).abs() > 1e-12 * a {
                return Err(Error::Domain("resonator alpha does not match its length".into()));
            }
        }
        for s in &self.support {
            if !s.prime.is_split() || !(s.r > 0.0) {
                return Err(Error::Domain("resonator support must be split primes with r > 0".into()));
            }
        }
        Ok(())
    }

    /// `alpha`, or an error naming the short-resonator condition.
    pub fn alpha_checked(&self) -> Result<f64> {
        self.alpha.ok_or(Error::RankinAlphaUndefined(self.l_param))
    }

    /// The predicted resonance gain `sum' 4 r(p) / sqrt(N p)`.
    pub fn predicted_gain(&self) -> f64 {
        self.support
            .iter()
            .map(|s| 4.0 * s.r / (s.norm as f64).sqrt())
            .fold(0.0, |a, b| a + b)
    }
}

/// A squarefree product of support primes, with its multiplicative
/// coefficient and the data needed to evaluate characters on it quickly.
#[derive(Clone, Debug)]
pub struct SupportProduct {
    pub ideal: Ideal,
    pub r: f64,
    pub norm: f64,
    /// `N(a'')` of the non-conjugate-paired part (used by diagonal sums).
    pprime_part: Ideal,
}

/// All squarefree support products of norm at most `bound` (including the
/// unit ideal), in a fixed deterministic order.
pub fn support_products(spec: &ResonatorSpec, bound: f64) -> Result<Vec<SupportProduct>> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Ideal, f64, f64)> = vec![(0, Ideal::unit(), 1.0, 1.0)];
    while let Some((i, ideal, r, norm)) = stack.pop() {
        if i == spec.support.len() {
            let (_, pprime) = ideal.p0_pprime_split();
            out.push(SupportProduct { ideal, r, norm, pprime_part: pprime });
            continue;
        }
        let s = &spec.support[i];
        let pn = s.norm as f64;
        // per pair: skip, p, conj(p), or p * conj(p)
        stack.push((i + 1, ideal.clone(), r, norm));
        if norm * pn <= bound {
            stack.push((i + 1, ideal.mul(&Ideal::from_prime(s.prime.clone(), 1))?, r * s.r, norm * pn));
            stack.push((
                i + 1,
                ideal.mul(&Ideal::from_prime(s.prime.conj(), 1))?,
                r * s.r,
                norm * pn,
            ));
            if norm * pn * pn <= bound {
                let both = ideal
                    .mul(&Ideal::from_prime(s.prime.clone(), 1))?
                    .mul(&Ideal::from_prime(s.prime.conj(), 1))?;
                stack.push((i + 1, both, r * s.r * s.r, norm * pn * pn));
            }
        }
        if out.len() + stack.len() > 4_000_000 {
            return Err(Error::BudgetExceeded("support product enumeration".into()));
        }
    }
    out.sort_by(|a, b| {
        a.norm
            .partial_cmp(&b.norm)
            .unwrap()
            .then_with(|| a.ideal.to_string().cmp(&b.ideal.to_string()))
    });
    Ok(out)
}

/// `R(xi) = sum_{N a <= N} xi(a) r(a)` over squarefree support products.
pub fn resonator_eval(
    xi: &AngularCharacter,
    spec: &ResonatorSpec,
    ctx: &FieldContext,
) -> Result<Complex64> {
    spec.validate()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for prod in support_products(spec, spec.n_length)? {
        acc += xi.eval(&prod.ideal, ctx)? * prod.r;
    }
    Ok(acc)
}

/// Frequency-independent phase data of a support product:
/// `xi(a) = exp(i (ell * theta + sum_i m_i * arg zeta_i))`, where `theta`
/// accumulates the canonical-generator arguments of the balanced prime
/// products and `m_i` their generator-exponent defects.
#[derive(Clone, Debug)]
struct ProductPhase {
    r: f64,
    theta: f64,
    m_vec: Vec<i64>,
}

fn product_phases(
    products: &[SupportProduct],
    ctx: &FieldContext,
) -> Result<Vec<ProductPhase>> {
    let gens = ctx.class_generators();
    products
        .iter()
        .map(|prod| {
            let mut theta = 0.0;
            let mut m_vec = vec![0i64; gens.len()];
            for (p, e) in prod.ideal.factors() {
                let (evec, arg_c) = ctx.prime_decomposition_data(p)?;
                theta += e as f64 * arg_c;
                for (i, gen) in gens.iter().enumerate() {
                    if evec[i] > 0 {
                        m_vec[i] += e as i64 * (evec[i] as i64 - gen.order as i64);
                    }
                }
            }
            Ok(ProductPhase { r: prod.r, theta, m_vec })
        })
        .collect()
}

/// Per-character constant offsets `sum_i m_i arg(zeta_i^{(j)})`.
fn char_offsets(phases: &[ProductPhase], chars: &[AngularCharacter]) -> Vec<Vec<f64>> {
    chars
        .iter()
        .map(|xi| {
            phases
                .iter()
                .map(|p| {
                    p.m_vec
                        .iter()
                        .enumerate()
                        .map(|(i, &m)| m as f64 * xi.zeta_phase(i))
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn resonator_values(
    ell: i64,
    phases: &[ProductPhase],
    offsets: &[Vec<f64>],
) -> Vec<Complex64> {
    offsets
        .iter()
        .map(|offs| {
            phases
                .iter()
                .zip(offs)
                .map(|(p, &c)| Complex64::from_polar(p.r, ell as f64 * p.theta + c))
                .sum()
        })
        .collect()
}

/// Frequencies `ell = omega_K k` with `Phi(ell / X) > 0`.
fn frequencies(ctx: &FieldContext, x: f64) -> Vec<i64> {
    let w = ctx.omega_k as i64;
    let lo = (x / w as f64).floor() as i64;
    let hi = (2.0 * x / w as f64).ceil() as i64;
    (lo..=hi)
        .map(|k| w * k)
        .filter(|&ell| bump_phi(ell as f64 / x) > 0.0)
        .collect()
}

/// Direct denominator `sum_ell Phi(ell/X) sum_xi |R(xi)|^2` and its Poisson
/// diagonal model `h_K omega_K^{-1} X Phi_hat(0) prod'(1 + 4r^2 + r^4)`.
pub fn moment_denominator(
    x: f64,
    spec: &ResonatorSpec,
    ctx: &FieldContext,
    eps: f64,
) -> Result<(f64, f64)> {
    spec.validate()?;
    if !(x >= 100.0) {
        return Err(Error::Domain(format!("moment requires X >= 100, got {x}")));
    }
    let bound = x.powf(1.0 - eps);
    if spec.n_length > bound {
        return Err(Error::LengthExceedsPoissonConstraint { n: spec.n_length, bound });
    }
    let products = support_products(spec, spec.n_length)?;
    let phases = product_phases(&products, ctx)?;
    let per_ell = map_collect(frequencies(ctx, x), |ell| {
        let w = bump_phi(ell as f64 / x);
        let chars = make_characters(ctx, ell);
        let offsets = char_offsets(&phases, &chars);
        let rs = resonator_values(ell, &phases, &offsets);
        w * rs.iter().map(|r| r.norm_sqr()).sum::<f64>()
    });
    let direct = pairwise_sum(&per_ell);
    let model_factor: f64 = spec
        .support
        .iter()
        .map(|s| {
            let r2 = s.r * s.r;
            1.0 + 4.0 * r2 + r2 * r2
        })
        .product();
    let model = ctx.h_k as f64 / ctx.omega_k as f64 * x * phi_hat_zero() * model_factor;
    Ok((direct, model))
}

/// Numerator pieces: the direct moment, the exact rational-diagonal part of
/// the direct moment (same truncation), and the Rankin-truncated explicit
/// lower-bound form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentNumerator {
    pub direct: f64,
    pub diagonal_lower: Option<f64>,
    pub offdiag_mass: f64,
}

/// The diagonal `k`-sum for one `(a, b)` product pair at frequency `ell`:
/// `2 sum_{m : m^2 q <= cutoff} (m^2 q)^{-1/2} W_K(m^2 q, ell)` with
/// `q = N(a'' b'')`.
fn diagonal_k_sum(ctx: &FieldContext, ell: f64, q: f64, n_cut: i128) -> Result<f64> {
    let a = (ell + 1.0) / 2.0;
    let skip_y = a - 12.0 * a.sqrt();
    let mut m = 1.0f64;
    let mut acc = 0.0;
    while m * m * q <= n_cut as f64 {
        let nk = m * m * q;
        let yv = ctx.c_k * nk / 2.0;
        let w = if yv < skip_y { 1.0 } else { gamma_q(a, yv)? };
        acc += w / nk.sqrt();
        m += 1.0;
    }
    Ok(2.0 * acc)
}

pub fn moment_numerator(
    x: f64,
    spec: &ResonatorSpec,
    ctx: &FieldContext,
    cfg: &AfeConfig,
    eps: f64,
    want_lower: bool,
) -> Result<MomentNumerator> {
    spec.validate()?;
    cfg.validate()?;
    if !(x >= 100.0) {
        return Err(Error::Domain(format!("moment requires X >= 100, got {x}")));
    }
    let bound = x.powf(1.0 - eps);
    if spec.n_length > bound {
        return Err(Error::LengthExceedsPoissonConstraint { n: spec.n_length, bound });
    }
    if want_lower {
        let dbound = x.powf(0.25 - eps);
        if spec.n_length > dbound {
            return Err(Error::LengthExceedsDiagonalConstraint { n: spec.n_length, bound: dbound });
        }
    }
    let products = support_products(spec, spec.n_length)?;
    let phases = product_phases(&products, ctx)?;
    // q = N(a'' b'') per ordered product pair, after cancelling c' = (a', b')
    let mut pair_q = Vec::with_capacity(products.len() * products.len());
    for pa in &products {
        for pb in &products {
            let core = pa.pprime_part.gcd(&pb.pprime_part);
            let a2 = pa.pprime_part.div_exact(&core)?;
            let b2 = pb.pprime_part.div_exact(&core)?;
            pair_q.push(a2.norm_f64() * b2.norm_f64());
        }
    }

    let per_ell: Vec<Result<(f64, f64)>> = map_collect(frequencies(ctx, x), |ell| {
        let w = bump_phi(ell as f64 / x);
        let (n_cut, _) = effective_cutoff(ctx, ell.unsigned_abs() as f64, cfg)?;
        let (sums, _) = class_sums(ctx, ell, n_cut)?;
        let chars = make_characters(ctx, ell);
        let offsets = char_offsets(&phases, &chars);
        let rs = resonator_values(ell, &phases, &offsets);
        let mut direct = 0.0;
        for (xi, r) in chars.iter().zip(&rs) {
            let weights = crate::afe::class_rep_weights(ctx, xi)?;
            let l: Complex64 = sums.iter().zip(&weights).map(|(z, wt)| z * wt).sum();
            direct += 2.0 * l.re * r.norm_sqr();
        }
        // exact rational-diagonal part of the same truncated sums
        let mut diag = 0.0;
        for (i, pa) in phases.iter().enumerate() {
            for (j, pb) in phases.iter().enumerate() {
                let q = pair_q[i * phases.len() + j];
                diag += pa.r * pb.r * diagonal_k_sum(ctx, ell.unsigned_abs() as f64, q, n_cut)?;
            }
        }
        diag *= ctx.h_k as f64;
        Ok((w * direct, w * diag))
    });
    let mut directs = Vec::with_capacity(per_ell.len());
    let mut diags = Vec::with_capacity(per_ell.len());
    for r in per_ell {
        let (d, g) = r?;
        directs.push(d);
        diags.push(g);
    }
    let direct = pairwise_sum(&directs);
    let diag = pairwise_sum(&diags);
    let offdiag_mass = (direct - diag).abs();

    let diagonal_lower = if want_lower {
        let cut = x / (2.0 * ctx.c_k);
        let mut acc = 0.0;
        for (idx, pa) in products.iter().enumerate() {
            for (jdx, pb) in products.iter().enumerate() {
                let q = pair_q[idx * products.len() + jdx];
                let m_max = (cut / q).sqrt().floor();
                let mut h = 0.0;
                let mut m = 1.0;
                while m <= m_max {
                    h += 1.0 / m;
                    m += 1.0;
                }
                acc += pa.r * pb.r / q.sqrt() * h;
            }
        }
        Some(2.0 * ctx.h_k as f64 / ctx.omega_k as f64 * phi_hat_zero() * x * acc)
    } else {
        None
    };

    Ok(MomentNumerator { direct, diagonal_lower, offdiag_mass })
}

/// Rankin-completed diagonal sum `Xi(alpha1, alpha2)` as an Euler product
/// over support-pair representatives. Valid argument pairs: `(0, 0)`,
/// `(alpha, 0)`, `(alpha, alpha)`.
pub fn euler_xi(alpha1: f64, alpha2: f64, spec: &ResonatorSpec) -> Result<f64> {
    let factor = xi_factor_kind(alpha1, alpha2, spec)?;
    let mut prod = 1.0f64;
    for s in &spec.support {
        let p = s.norm as f64;
        let r = s.r;
        let f = match factor {
            XiKind::Plain => {
                1.0 + 4.0 * r / p.sqrt() + 4.0 * r * r + 4.0 * r.powi(3) / p.sqrt() + r.powi(4)
            }
            XiKind::Single(al) => {
                let pa = p.powf(al);
                let p2a = pa * pa;
                1.0 + 2.0 * r / p.sqrt() * (1.0 + pa)
                    + r * r * (1.0 + 2.0 * pa + p2a)
                    + 2.0 * r.powi(3) / p.sqrt() * (pa + p2a)
                    + r.powi(4) * p2a
            }
            XiKind::Double(al) => {
                let pa = p.powf(al);
                1.0 + 4.0 * r * pa / p.sqrt()
                    + 4.0 * r * r * pa * pa
                    + 4.0 * r.powi(3) * pa.powi(3) / p.sqrt()
                    + r.powi(4) * pa.powi(4)
            }
        };
        prod *= f;
    }
    Ok(spec.n_length.powf(-(alpha1 + alpha2)) * prod)
}

#[derive(Clone, Copy)]
enum XiKind {
    Plain,
    Single(f64),
    Double(f64),
}

fn xi_factor_kind(alpha1: f64, alpha2: f64, spec: &ResonatorSpec) -> Result<XiKind> {
    if alpha1 == 0.0 && alpha2 == 0.0 {
        return Ok(XiKind::Plain);
    }
    let alpha = spec.alpha_checked()?;
    if (alpha1 - alpha).abs() < 1e-15 && alpha2 == 0.0 {
        return Ok(XiKind::Single(alpha));
    }
    if (alpha1 - alpha).abs() < 1e-15 && (alpha2 - alpha).abs() < 1e-15 {
        return Ok(XiKind::Double(alpha));
    }
    Err(Error::Domain(format!(
        "unsupported Xi arguments ({alpha1}, {alpha2}); expected (0,0), (alpha,0) or (alpha,alpha)"
    )))
}

/// `Xi(alpha1, alpha2)` by exhaustive summation over all pairs of squarefree
/// support products, keeping pairs with `(a'' conj a'', b'' conj b'') = 1`.
pub fn brute_xi(alpha1: f64, alpha2: f64, spec: &ResonatorSpec) -> Result<f64> {
    xi_factor_kind(alpha1, alpha2, spec)?; // validate the argument pair
    let products = support_products(spec, f64::INFINITY)?;
    let n_pairs = products.len() * products.len();
    if n_pairs > 1_000_000 {
        return Err(Error::BudgetExceeded(format!("brute_xi over {n_pairs} pairs")));
    }
    let mut acc = 0.0f64;
    for pa in &products {
        for pb in &products {
            let core = pa.pprime_part.gcd(&pb.pprime_part);
            let a2 = pa.pprime_part.div_exact(&core)?;
            let b2 = pb.pprime_part.div_exact(&core)?;
            let a2full = a2.mul(&a2.conj())?;
            let b2full = b2.mul(&b2.conj())?;
            if !a2full.gcd(&b2full).is_unit() {
                continue;
            }
            let q = a2.norm_f64() * b2.norm_f64();
            acc += pa.r * pb.r / q.sqrt() * pa.norm.powf(alpha1) * pb.norm.powf(alpha2);
        }
    }
    Ok(spec.n_length.powf(-(alpha1 + alpha2)) * acc)
}

/// Logarithmic-scale diagnostics of the Rankin completion.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RankinDiagnostics {
    pub g_alpha: f64,
    pub h_alpha: f64,
    pub e_alpha: f64,
    pub xi_00: f64,
    pub xi_a0: f64,
    pub xi_aa: f64,
}

pub fn rankin_diagnostics(spec: &ResonatorSpec) -> Result<RankinDiagnostics> {
    spec.validate()?;
    let alpha = spec.alpha_checked()?;
    let mut g = 0.0;
    let mut h_sum = 0.0;
    for s in &spec.support {
        let p = s.norm as f64;
        let lp = p.ln();
        g += alpha * s.r * lp / p.sqrt() + alpha * alpha * s.r * s.r * lp * lp;
        h_sum += 4.0 * s.r * s.r * lp;
    }
    let h = -alpha * spec.n_length.ln() + alpha * h_sum;
    let lln = spec.n_length.ln().ln();
    let e = spec.n_length.ln() / (lln * lln * lln);
    Ok(RankinDiagnostics {
        g_alpha: g,
        h_alpha: h,
        e_alpha: e,
        xi_00: euler_xi(0.0, 0.0, spec)?,
        xi_a0: euler_xi(alpha, 0.0, spec)?,
        xi_aa: euler_xi(alpha, alpha, spec)?,
    })
}

/// Counts of non-rational principal products in one dyadic norm window and
/// one angular window, against the lattice-point bound.
#[derive(Clone, Debug, Serialize)]
pub struct OffDiagonalProbe {
    pub nu: u32,
    pub m: u32,
    pub window_norm_lo: f64,
    pub window_norm_hi: f64,
    pub window_arg_lo: f64,
    pub window_arg_hi: f64,
    pub count: u64,
    /// `2^{-nu/2} X^{1/2} + 1`.
    pub bound: f64,
    pub eta: f64,
}

/// For each `(nu, m)` count ideals `k` with `N k` in the dyadic window
/// `D_nu(X)`, `k a conj(b)` principal but not rational, and
/// `|arg gamma|` in `I_m(X) = [m X^{-1/2}, (m+1) X^{-1/2})`, summed over the
/// supplied `(a, b)` pairs.
pub fn offdiagonal_probe(
    x: f64,
    ctx: &FieldContext,
    nu_max: u32,
    m_max: u32,
    pairs: &[(Ideal, Ideal)],
    eta: f64,
) -> Result<Vec<OffDiagonalProbe>> {
    if !(x >= 100.0) {
        return Err(Error::Domain(format!("probe requires X >= 100, got {x}")));
    }
    let kmax = 2.0 * x / ctx.c_k;
    let ideals = enumerate_ideals(ctx, kmax)?;
    let sqrt_x = x.sqrt();
    let mut counts = vec![vec![0u64; m_max as usize + 1]; nu_max as usize + 1];
    for k in &ideals {
        let nk = k.norm_f64();
        if nk < 1.0 {
            continue;
        }
        // nu with nk in (2^{-nu} X / c_K, 2^{-nu+1} X / c_K]
        let ratio = kmax / nk; // >= 1 within range
        let nu = (ratio.log2() - 0.0).floor();
        if nu < 0.0 || nu > nu_max as f64 {
            continue;
        }
        let nu = nu as usize;
        for (a, b) in pairs {
            let prod = k.mul(a)?.mul(&b.conj())?;
            if prod.class_index(ctx) != ctx.identity_class() {
                continue;
            }
            if prod.is_rational() {
                continue;
            }
            let gamma = prod
                .principal_generator(ctx)?
                .ok_or_else(|| Error::Domain("principal product without generator".into()))?;
            let m = (gamma.arg_gamma.abs() * sqrt_x).floor();
            if m <= m_max as f64 {
                counts[nu][m as usize] += 1;
            }
        }
    }
    let mut out = Vec::new();
    for nu in 0..=nu_max {
        for m in 0..=m_max {
            out.push(OffDiagonalProbe {
                nu,
                m,
                window_norm_lo: 2f64.powi(-(nu as i32)) * x / ctx.c_k,
                window_norm_hi: 2f64.powi(-(nu as i32) + 1) * x / ctx.c_k,
                window_arg_lo: m as f64 / sqrt_x,
                window_arg_hi: (m as f64 + 1.0) / sqrt_x,
                count: counts[nu as usize][m as usize],
                bound: 2f64.powf(-(nu as f64) / 2.0) * sqrt_x + 1.0,
                eta,
            });
        }
    }
    Ok(out)
}

/// Full first-moment report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentReport {
    pub x: f64,
    pub numerator_direct: f64,
    pub numerator_diagonal: f64,
    pub denominator_direct: f64,
    pub denominator_diagonal: f64,
    pub offdiag_mass: f64,
    pub ratio_lower_bound: f64,
    pub predicted_gain: f64,
}

/// One row of the per-frequency search output.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SearchRow {
    pub ell: i64,
    pub class_index: usize,
    pub l_value: f64,
    pub log_abs_l: f64,
    pub floored: bool,
    pub resonator_sq: f64,
}

/// Outcome of the extreme-value search over `X <= ell <= 2X`.
#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub ell_star: i64,
    pub class_index_star: usize,
    pub log_abs_l_star: f64,
    pub weighted_avg_bound: f64,
    pub predicted_gain: f64,
    pub plain_mean: f64,
    pub moment: MomentReport,
    pub rankin: Option<RankinDiagnostics>,
    #[serde(skip)]
    pub rows: Vec<SearchRow>,
}

/// Evaluate `log |L(1/2, xi_ell)|` over the dyadic range, report the argmax
/// (ties: smallest `ell`, then smallest class index), the moment ratio, and
/// the predicted gain. Requires `N <= X^{1/4 - eps}`.
pub fn extreme_value_search(
    x: f64,
    spec: &ResonatorSpec,
    ctx: &FieldContext,
    cfg: &AfeConfig,
    eps: f64,
) -> Result<SearchOutcome> {
    spec.validate()?;
    cfg.validate()?;
    if !(x >= 100.0) {
        return Err(Error::Domain(format!("search requires X >= 100, got {x}")));
    }
    let dbound = x.powf(0.25 - eps);
    if spec.n_length > dbound {
        return Err(Error::LengthExceedsDiagonalConstraint { n: spec.n_length, bound: dbound });
    }
    let products = support_products(spec, spec.n_length)?;
    let phases = product_phases(&products, ctx)?;
    let mut pair_q = Vec::with_capacity(products.len() * products.len());
    for pa in &products {
        for pb in &products {
            let core = pa.pprime_part.gcd(&pb.pprime_part);
            let a2 = pa.pprime_part.div_exact(&core)?;
            let b2 = pb.pprime_part.div_exact(&core)?;
            pair_q.push(a2.norm_f64() * b2.norm_f64());
        }
    }

    struct PerEll {
        weight: f64,
        rows: Vec<SearchRow>,
        num: f64,
        den: f64,
        num_plain: f64,
        den_plain: f64,
        diag: f64,
    }

    let per_ell: Vec<Result<PerEll>> = map_collect(frequencies(ctx, x), |ell| {
        let weight = bump_phi(ell as f64 / x);
        let (n_cut, _) = effective_cutoff(ctx, ell.unsigned_abs() as f64, cfg)?;
        let (sums, _) = class_sums(ctx, ell, n_cut)?;
        let chars = make_characters(ctx, ell);
        let offsets = char_offsets(&phases, &chars);
        let rs = resonator_values(ell, &phases, &offsets);
        let mut rows = Vec::with_capacity(chars.len());
        let mut num = 0.0;
        let mut den = 0.0;
        let mut num_plain = 0.0;
        for (xi, r) in chars.iter().zip(&rs) {
            let weights = crate::afe::class_rep_weights(ctx, xi)?;
            let lv: Complex64 = sums.iter().zip(&weights).map(|(z, w)| z * w).sum();
            let l = 2.0 * lv.re;
            let (log_abs, floored) = if l.abs() < 1e-12 {
                (crate::afe::LOG_FLOOR, true)
            } else {
                (l.abs().ln(), false)
            };
            rows.push(SearchRow {
                ell,
                class_index: xi.class_char_index,
                l_value: l,
                log_abs_l: log_abs,
                floored,
                resonator_sq: r.norm_sqr(),
            });
            num += l * r.norm_sqr();
            den += r.norm_sqr();
            num_plain += l;
        }
        let mut diag = 0.0;
        for (i, pa) in phases.iter().enumerate() {
            for (j, pb) in phases.iter().enumerate() {
                let q = pair_q[i * phases.len() + j];
                diag += pa.r * pb.r * diagonal_k_sum(ctx, ell.unsigned_abs() as f64, q, n_cut)?;
            }
        }
        diag *= ctx.h_k as f64;
        Ok(PerEll {
            weight,
            rows,
            num: weight * num,
            den: weight * den,
            num_plain: weight * num_plain,
            den_plain: weight * chars.len() as f64,
            diag: weight * diag,
        })
    });

    let mut rows = Vec::new();
    let mut nums = Vec::new();
    let mut dens = Vec::new();
    let mut nums_plain = Vec::new();
    let mut dens_plain = Vec::new();
    let mut diags = Vec::new();
    for r in per_ell {
        let p = r?;
        if p.weight > 0.0 {
            rows.extend_from_slice(&p.rows);
        }
        nums.push(p.num);
        dens.push(p.den);
        nums_plain.push(p.num_plain);
        dens_plain.push(p.den_plain);
        diags.push(p.diag);
    }
    let numerator_direct = pairwise_sum(&nums);
    let denominator_direct = pairwise_sum(&dens);
    let numerator_plain = pairwise_sum(&nums_plain);
    let denominator_plain = pairwise_sum(&dens_plain);
    let diag_mass = pairwise_sum(&diags);

    let best = rows
        .iter()
        .max_by(|a, b| {
            a.log_abs_l
                .partial_cmp(&b.log_abs_l)
                .unwrap()
                .then_with(|| b.ell.cmp(&a.ell))
                .then_with(|| b.class_index.cmp(&a.class_index))
        })
        .ok_or_else(|| Error::Domain("empty frequency range".into()))?;

    let cut = x / (2.0 * ctx.c_k);
    let mut lower = 0.0;
    for (i, pa) in phases.iter().enumerate() {
        for (j, pb) in phases.iter().enumerate() {
            let q = pair_q[i * phases.len() + j];
            let m_max = (cut / q).sqrt().floor();
            let mut h = 0.0;
            let mut m = 1.0;
            while m <= m_max {
                h += 1.0 / m;
                m += 1.0;
            }
            lower += pa.r * pb.r / q.sqrt() * h;
        }
    }
    let numerator_diagonal = 2.0 * ctx.h_k as f64 / ctx.omega_k as f64 * phi_hat_zero() * x * lower;

    let moment = MomentReport {
        x,
        numerator_direct,
        numerator_diagonal,
        denominator_direct,
        denominator_diagonal: ctx.h_k as f64 / ctx.omega_k as f64
            * x
            * phi_hat_zero()
            * spec
                .support
                .iter()
                .map(|s| 1.0 + 4.0 * s.r * s.r + s.r.powi(4))
                .product::<f64>(),
        offdiag_mass: (numerator_direct - diag_mass).abs(),
        ratio_lower_bound: numerator_direct / denominator_direct,
        predicted_gain: spec.predicted_gain(),
    };

    Ok(SearchOutcome {
        ell_star: best.ell,
        class_index_star: best.class_index,
        log_abs_l_star: best.log_abs_l,
        weighted_avg_bound: numerator_direct / denominator_direct,
        predicted_gain: spec.predicted_gain(),
        plain_mean: numerator_plain / denominator_plain,
        moment,
        rankin: spec.alpha.map(|_| rankin_diagnostics(spec)).transpose()?,
        rows,
    })
}
