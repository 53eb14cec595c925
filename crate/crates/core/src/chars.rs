//! Angular characters of frequency `ell`.
//!
//! On principal ideals `(beta)` these are `e(ell * arg(beta) / 2pi)`, which
//! is well defined exactly when `omega_K | ell`. Each such frequency carries
//! `h_K` characters, one per class-group character; they are constructed by
//! choosing, for each cyclic factor of order `n_i` generated by the class of
//! a prime ideal `A_i`, an `n_i`-th root `zeta_i` of
//! `e(ell * arg(gamma_i) / 2pi)` where `(gamma_i) = A_i^{n_i}`.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::field::FieldContext;
use crate::ideals::Ideal;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct AngularCharacter {
    pub ell: i64,
    pub class_char_index: usize,
    /// `arg(zeta_i)` for each cyclic factor.
    zeta_phases: Vec<f64>,
}

impl AngularCharacter {
    /// `arg(zeta_i)` of one cyclic factor.
    pub(crate) fn zeta_phase(&self, i: usize) -> f64 {
        self.zeta_phases[i]
    }

    /// Phase of the character value on a prime ideal.
    fn prime_phase(&self, p: &crate::ideals::PrimeIdeal, ctx: &FieldContext) -> Result<f64> {
        let (evec, arg_c) = ctx.prime_decomposition_data(p)?;
        let mut phase = self.ell as f64 * arg_c;
        for (i, gen) in ctx.class_generators().iter().enumerate() {
            if evec[i] > 0 {
                phase += (evec[i] as f64 - gen.order as f64) * self.zeta_phases[i];
            }
        }
        Ok(phase)
    }

    /// Evaluate the character on a nonzero ideal: unit modulus, completely
    /// multiplicative, and `e(ell * arg(beta)/2pi)` on principal `(beta)`.
    pub fn eval(&self, a: &Ideal, ctx: &FieldContext) -> Result<Complex64> {
        let mut phase = 0.0;
        for (p, e) in a.factors() {
            phase += e as f64 * self.prime_phase(p, ctx)?;
        }
        Ok(Complex64::from_polar(1.0, phase))
    }

    /// Evaluation by whole-ideal decomposition instead of prime by prime;
    /// used to cross-check well-definedness of the extension.
    pub fn eval_via_class_decomposition(&self, a: &Ideal, ctx: &FieldContext) -> Result<Complex64> {
        let evec = ctx.class_exponents(a.class_index(ctx)).to_vec();
        let mut balanced = a.clone();
        let mut phase = 0.0;
        for (i, gen) in ctx.class_generators().iter().enumerate() {
            if evec[i] > 0 {
                let fill = Ideal::from_prime(gen.rep_prime.clone(), gen.order - evec[i]);
                balanced = balanced.mul(&fill)?;
                phase += (evec[i] as f64 - gen.order as f64) * self.zeta_phases[i];
            }
        }
        let g = balanced
            .principal_generator(ctx)?
            .ok_or_else(|| Error::Domain("balanced ideal not principal".into()))?;
        phase += self.ell as f64 * g.arg_gamma;
        Ok(Complex64::from_polar(1.0, phase))
    }
}

/// The set of angular characters of frequency `ell`; empty when
/// `omega_K` does not divide `ell`.
pub fn make_characters(ctx: &FieldContext, ell: i64) -> Vec<AngularCharacter> {
    if ell.rem_euclid(ctx.omega_k as i64) != 0 {
        return Vec::new();
    }
    let gens = ctx.class_generators();
    let orders: Vec<u32> = gens.iter().map(|g| g.order).collect();
    let h = ctx.h_k;
    let mut out = Vec::with_capacity(h);
    for j in 0..h {
        // mixed-radix digits of j pick the root bucket per factor
        let mut rem = j;
        let mut offsets = Vec::with_capacity(gens.len());
        for &n in &orders {
            offsets.push((rem % n as usize) as u32);
            rem /= n as usize;
        }
        let zeta_phases = gens
            .iter()
            .zip(&offsets)
            .map(|(g, &delta)| {
                let n = g.order as f64;
                let base = ell as f64 * g.arg_gamma;
                // the n-th roots have phases (base + 2 pi k)/n, equally
                // spaced by 2 pi / n; index 0 is the root with argument in
                // [0, 2 pi / n), so sorting by reduced phase enumerates them
                let mut roots: Vec<f64> = (0..g.order)
                    .map(|k| ((base + TAU * k as f64) / n).rem_euclid(TAU))
                    .collect();
                roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
                roots[delta as usize]
            })
            .collect();
        out.push(AngularCharacter { ell, class_char_index: j, zeta_phases });
    }
    out
}

/// `sum_{xi in F_ell} xi(a)`: equals `h_K e(ell arg gamma_a / 2pi)` when `a`
/// is principal and 0 otherwise.
pub fn char_orthogonality_sum(ctx: &FieldContext, ell: i64, a: &Ideal) -> Result<Complex64> {
    if ell.rem_euclid(ctx.omega_k as i64) != 0 {
        return Err(Error::Domain(format!(
            "frequency {ell} is not divisible by omega_K = {}",
            ctx.omega_k
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for xi in make_characters(ctx, ell) {
        sum += xi.eval(a, ctx)?;
    }
    Ok(sum)
}
