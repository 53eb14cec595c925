//! The arithmetic context of an imaginary quadratic field `K = Q(sqrt(d))`:
//! discriminant, units, class group, and splitting of rational primes.
//!
//! The class group is realized concretely as the set of reduced primitive
//! positive definite binary quadratic forms of discriminant `D`, and the
//! group law is computed exactly: the class of a product is obtained by
//! multiplying representative ideal lattices in `O_K` and reducing the norm
//! form of the result. One map (lattice -> reduced form -> index) is used
//! everywhere, so the table is consistent with ideal multiplication by
//! construction.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::ideals::{Ideal, PrimeIdeal, PrimeKind};
use crate::lattice::{Lattice, RingParams};
use crate::{Error, Result};

/// A binary quadratic form `a x^2 + b xy + c y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// Canonical reduced representative: `|b| <= a <= c`, with `b >= 0`
    /// whenever `|b| = a` or `a = c`.
    pub fn reduce(self) -> QuadForm {
        let disc = self.discriminant() as i128;
        let (mut a, mut b, mut c) = (self.a as i128, self.b as i128, self.c as i128);
        loop {
            if b > a || b <= -a {
                let two_a = 2 * a;
                b = b.rem_euclid(two_a);
                if b > a {
                    b -= two_a;
                }
                c = (b * b - disc) / (4 * a);
            }
            if c < a {
                (a, b, c) = (c, -b, a);
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            break;
        }
        QuadForm { a: a as i64, b: b as i64, c: c as i64 }
    }

    fn is_primitive(&self) -> bool {
        gcd_u64(gcd_u64(self.a.unsigned_abs(), self.b.unsigned_abs()), self.c.unsigned_abs()) == 1
    }
}

/// Splitting behavior of a rational prime, with the prime ideal(s) above it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Splitting {
    Split(PrimeIdeal, PrimeIdeal),
    Inert(PrimeIdeal),
    Ramified(PrimeIdeal),
}

impl Splitting {
    /// The factorization of `(p)` as (prime ideal, exponent) pairs; the
    /// exponent-weighted norms always multiply to `p^2`.
    pub fn factorization(&self) -> Vec<(PrimeIdeal, u32)> {
        match self {
            Splitting::Split(p, q) => vec![(p.clone(), 1), (q.clone(), 1)],
            Splitting::Inert(p) => vec![(p.clone(), 1)],
            Splitting::Ramified(p) => vec![(p.clone(), 2)],
        }
    }
}

/// One cyclic factor of the class group.
#[derive(Clone, Debug)]
pub struct ClassGenerator {
    /// Class index of the generator.
    pub class_index: usize,
    /// Order of the cyclic factor.
    pub order: u32,
    /// A prime ideal representing the generator class.
    pub rep_prime: PrimeIdeal,
    /// Argument of the canonical generator of `rep_prime^order`.
    pub arg_gamma: f64,
}

/// Immutable arithmetic context of the field; safe to share across threads.
#[derive(Clone, Debug)]
pub struct FieldContext {
    pub d: i64,
    /// Field discriminant `D < 0`.
    pub disc: i64,
    /// Unit-group order.
    pub omega_k: u32,
    /// Class number.
    pub h_k: usize,
    /// `4 pi / |D|^{1/2}`.
    pub c_k: f64,
    /// Reduced forms, sorted; index 0 is the principal class.
    pub class_reps: Vec<QuadForm>,
    rp: RingParams,
    composition: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    form_index: HashMap<(i64, i64, i64), usize>,
    generators: Vec<ClassGenerator>,
    exp_of_class: Vec<Vec<u32>>,
    class_prime_reps: Vec<Ideal>,
}

/// Construct and validate the field context for squarefree `d < 0`.
pub fn build_field(d: i64) -> Result<FieldContext> {
    FieldContext::new(d)
}

impl FieldContext {
    pub fn new(d: i64) -> Result<Self> {
        if d >= 0 || !is_squarefree(d.unsigned_abs()) || d.unsigned_abs() > 1_000_000 {
            return Err(Error::InvalidDiscriminant(d));
        }
        let rp = RingParams::new(d);
        let disc = rp.disc;
        let mut class_reps = enumerate_reduced_forms(disc);
        class_reps.sort();
        let h_k = class_reps.len();
        let form_index: HashMap<_, _> = class_reps
            .iter()
            .enumerate()
            .map(|(i, f)| ((f.a, f.b, f.c), i))
            .collect();
        debug_assert_eq!(class_reps[0].a, 1);

        let mut ctx = FieldContext {
            d,
            disc,
            omega_k: rp.omega_k,
            h_k,
            c_k: 4.0 * PI / (disc.unsigned_abs() as f64).sqrt(),
            class_reps,
            rp,
            composition: Vec::new(),
            inverse: Vec::new(),
            form_index,
            generators: Vec::new(),
            exp_of_class: Vec::new(),
            class_prime_reps: Vec::new(),
        };

        let mut table = vec![vec![0usize; h_k]; h_k];
        #[allow(clippy::needless_range_loop)] // symmetric fill needs both indices
        for i in 0..h_k {
            let li = ctx.lattice_of_class(i);
            for j in i..h_k {
                let lj = ctx.lattice_of_class(j);
                let prod = li.mul(&lj, &ctx.rp)?;
                let k = ctx.class_of_lattice(&prod)?;
                table[i][j] = k;
                table[j][i] = k;
            }
        }
        ctx.composition = table;
        ctx.inverse = (0..h_k)
            .map(|i| (0..h_k).find(|&j| ctx.composition[i][j] == 0).expect("group inverse"))
            .collect();

        ctx.class_prime_reps = ctx.find_class_prime_reps()?;
        ctx.decompose_class_group()?;
        Ok(ctx)
    }

    pub fn ring(&self) -> &RingParams {
        &self.rp
    }

    /// Index of the principal class (always 0 by the sorted convention).
    pub fn identity_class(&self) -> usize {
        0
    }

    pub fn compose_classes(&self, i: usize, j: usize) -> usize {
        self.composition[i][j]
    }

    pub fn inverse_class(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn class_power(&self, base: usize, e: u32) -> usize {
        let mut acc = self.identity_class();
        for _ in 0..e {
            acc = self.compose_classes(acc, base);
        }
        acc
    }

    /// Class index of a reduced (or reducible) form of discriminant `D`.
    pub fn class_of_form(&self, f: QuadForm) -> Result<usize> {
        let r = f.reduce();
        self.form_index
            .get(&(r.a, r.b, r.c))
            .copied()
            .ok_or_else(|| Error::Domain(format!("form {r:?} has wrong discriminant")))
    }

    pub(crate) fn class_of_lattice(&self, lat: &Lattice) -> Result<usize> {
        let (a, b, c) = lat.norm_form(&self.rp);
        let f = QuadForm { a: a as i64, b: b as i64, c: c as i64 };
        self.class_of_form(f)
    }

    fn lattice_of_class(&self, i: usize) -> Lattice {
        let f = self.class_reps[i];
        // [a, (b + sqrt(D))/2] in (1, omega) coordinates; its norm form is
        // exactly (a, b, c), so the round trip through class_of_lattice is
        // the identity on reduced forms.
        let u2 = (f.b as i128 - self.rp.t as i128) / 2;
        Lattice::from_generators(&[(f.a as i128, 0), (u2, 1)]).expect("class rep lattice")
    }

    /// Splitting type of a rational prime, with the ideal(s) above it.
    pub fn splitting_type(&self, p: u64) -> Result<Splitting> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        let sym = kronecker(self.disc, p);
        let kind = if sym == 0 {
            PrimeKind::Ramified
        } else if sym == 1 {
            PrimeKind::SplitA
        } else {
            PrimeKind::Inert
        };
        match kind {
            PrimeKind::Inert => Ok(Splitting::Inert(PrimeIdeal::inert(p))),
            PrimeKind::Ramified => {
                let b = self.ramified_b(p);
                Ok(Splitting::Ramified(PrimeIdeal::ramified(p, b)))
            }
            _ => {
                let b = self.split_b_plus(p);
                let plus = PrimeIdeal::split(p, b, true);
                let minus = PrimeIdeal::split(p, 2 * p - b, false);
                Ok(Splitting::Split(plus, minus))
            }
        }
    }

    /// Two-element parameter of the ramified prime: `b` with
    /// `b^2 = D (mod 4p)`, `b = D (mod 2)`, `p | b`.
    fn ramified_b(&self, p: u64) -> u64 {
        if p == 2 {
            // D = 4d here; b = 0 for even d, b = 2 for d = 3 (mod 4).
            if self.d % 2 == 0 {
                0
            } else {
                2
            }
        } else if self.disc % 2 != 0 {
            p
        } else {
            0
        }
    }

    /// The representative `b` in `(0, p)` for the distinguished member of a
    /// split conjugate pair.
    fn split_b_plus(&self, p: u64) -> u64 {
        if p == 2 {
            return 1; // D = 1 (mod 8); lattice parameter taken mod 4.
        }
        let b = if self.disc % 2 == 0 {
            // b = 2t with t^2 = d (mod p).
            let dmod = (self.d.rem_euclid(p as i64)) as u64;
            2 * sqrt_mod(dmod, p)
        } else {
            // Odd b = +-r (mod p) with r^2 = D (mod p).
            let dmod = (self.disc.rem_euclid(p as i64)) as u64;
            let r = sqrt_mod(dmod, p);
            if r % 2 == 1 {
                r
            } else {
                p - r
            }
        };
        let b = b % (2 * p);
        if b < p {
            b
        } else {
            2 * p - b
        }
    }

    /// Class of a prime ideal via its norm form.
    pub fn class_of_prime(&self, p: &PrimeIdeal) -> usize {
        let lat = p.lattice(&self.rp);
        self.class_of_lattice(&lat).expect("prime ideal form")
    }

    /// Smallest prime ideal found in each ideal class (unit ideal for the
    /// principal class).
    pub fn class_prime_reps(&self) -> &[Ideal] {
        &self.class_prime_reps
    }

    /// Cyclic decomposition of the class group.
    pub fn class_generators(&self) -> &[ClassGenerator] {
        &self.generators
    }

    /// Exponents of a class with respect to `class_generators()`.
    pub fn class_exponents(&self, class: usize) -> &[u32] {
        &self.exp_of_class[class]
    }

    fn find_class_prime_reps(&self) -> Result<Vec<Ideal>> {
        let mut reps: Vec<Option<Ideal>> = vec![None; self.h_k];
        reps[0] = Some(Ideal::unit());
        let mut missing = self.h_k - 1;
        let mut p = 2u64;
        while missing > 0 {
            if p > 1_000_000 {
                return Err(Error::Domain(
                    "no prime representative below 10^6 for some ideal class".into(),
                ));
            }
            if is_prime_u64(p) {
                match self.splitting_type(p)? {
                    Splitting::Split(a, b) => {
                        for pi in [a, b] {
                            let c = self.class_of_prime(&pi);
                            if reps[c].is_none() {
                                reps[c] = Some(Ideal::from_prime(pi, 1));
                                missing -= 1;
                            }
                        }
                    }
                    Splitting::Ramified(a) => {
                        let c = self.class_of_prime(&a);
                        if reps[c].is_none() {
                            reps[c] = Some(Ideal::from_prime(a, 1));
                            missing -= 1;
                        }
                    }
                    Splitting::Inert(_) => {}
                }
            }
            p += 1;
        }
        Ok(reps.into_iter().map(|r| r.unwrap()).collect())
    }

    /// Greedy maximal-order cyclic decomposition with order-preserving lifts.
    fn decompose_class_group(&mut self) -> Result<()> {
        let h = self.h_k;
        let order_in = |x: usize, sub: &Vec<bool>| -> u32 {
            let mut acc = x;
            let mut k = 1u32;
            while !sub[acc] {
                acc = self.compose_classes(acc, x);
                k += 1;
            }
            k
        };
        let mut sub = vec![false; h];
        sub[0] = true;
        let mut sub_elems = vec![0usize];
        let mut gens: Vec<(usize, u32)> = Vec::new();
        while sub_elems.len() < h {
            // element of maximal order in G / <sub>
            let (mut best, mut best_ord) = (0usize, 0u32);
            for g in 0..h {
                if sub[g] {
                    continue;
                }
                let o = order_in(g, &sub);
                if o > best_ord {
                    best = g;
                    best_ord = o;
                }
            }
            // lift: find g' in best * sub with full order = quotient order
            let mut lifted = None;
            for &s in &sub_elems {
                let cand = self.compose_classes(best, s);
                let full = {
                    let mut acc = cand;
                    let mut k = 1u32;
                    while acc != 0 {
                        acc = self.compose_classes(acc, cand);
                        k += 1;
                    }
                    k
                };
                if full == best_ord {
                    lifted = Some(cand);
                    break;
                }
            }
            let g = lifted.ok_or_else(|| Error::Domain("class group lift failed".into()))?;
            // extend the subgroup
            let mut new_elems = Vec::new();
            let mut pw = self.identity_class();
            for _ in 0..best_ord {
                for &s in &sub_elems {
                    new_elems.push(self.compose_classes(s, pw));
                }
                pw = self.compose_classes(pw, g);
            }
            new_elems.sort_unstable();
            new_elems.dedup();
            if new_elems.len() != sub_elems.len() * best_ord as usize {
                return Err(Error::Domain("class group decomposition inconsistent".into()));
            }
            for &e in &new_elems {
                sub[e] = true;
            }
            sub_elems = new_elems;
            gens.push((g, best_ord));
        }

        // exponent lookup by enumerating all tuples
        let mut exp_of_class = vec![Vec::new(); h];
        let mut seen = vec![false; h];
        let orders: Vec<u32> = gens.iter().map(|&(_, o)| o).collect();
        let total: usize = orders.iter().map(|&o| o as usize).product();
        debug_assert_eq!(total.max(1), h);
        let mut tuple = vec![0u32; gens.len()];
        loop {
            let mut cls = self.identity_class();
            for (i, &(g, _)) in gens.iter().enumerate() {
                cls = self.compose_classes(cls, self.class_power(g, tuple[i]));
            }
            if seen[cls] {
                return Err(Error::Domain("class group decomposition not direct".into()));
            }
            seen[cls] = true;
            exp_of_class[cls] = tuple.clone();
            // increment mixed-radix tuple
            let mut i = 0;
            loop {
                if i == gens.len() {
                    break;
                }
                tuple[i] += 1;
                if tuple[i] < orders[i] {
                    break;
                }
                tuple[i] = 0;
                i += 1;
            }
            if i == gens.len() {
                break;
            }
        }
        self.exp_of_class = exp_of_class;

        // canonical generator argument for each cyclic factor
        let mut generators = Vec::new();
        for &(g, o) in &gens {
            let rep = self.class_prime_reps[g].clone();
            let rep_prime = rep.single_prime().ok_or_else(|| {
                Error::Domain("class generator representative is not a prime ideal".into())
            })?;
            let power = rep.pow(o)?;
            let gamma = power
                .principal_generator(self)?
                .ok_or_else(|| Error::Domain("generator power not principal".into()))?;
            generators.push(ClassGenerator {
                class_index: g,
                order: o,
                rep_prime,
                arg_gamma: gamma.arg_gamma,
            });
        }
        self.generators = generators;
        Ok(())
    }

    /// Exponents and window-argument data used to evaluate characters on a
    /// prime ideal: returns the generator exponent vector of its class and
    /// the argument of the canonical generator of
    /// `p * prod_i A_i^{(n_i - e_i) mod n_i}`.
    pub(crate) fn prime_decomposition_data(&self, p: &PrimeIdeal) -> Result<(Vec<u32>, f64)> {
        let class = self.class_of_prime(p);
        let evec = self.exp_of_class[class].clone();
        let mut ideal = Ideal::from_prime(p.clone(), 1);
        for (i, gen) in self.generators.iter().enumerate() {
            if evec[i] > 0 {
                let a = Ideal::from_prime(gen.rep_prime.clone(), gen.order - evec[i]);
                ideal = ideal.mul(&a)?;
            }
        }
        let g = ideal
            .principal_generator(self)?
            .ok_or_else(|| Error::Domain("balanced prime product not principal".into()))?;
        Ok((evec, g.arg_gamma))
    }
}

fn enumerate_reduced_forms(disc: i64) -> Vec<QuadForm> {
    let mut out = Vec::new();
    let amax = ((disc.unsigned_abs() as f64) / 3.0).sqrt() as i64 + 1;
    for a in 1..=amax {
        for b in (-a + 1)..=a {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = (b as i128) * (b as i128) - disc as i128;
            if num % (4 * a as i128) != 0 {
                continue;
            }
            let c = (num / (4 * a as i128)) as i64;
            if c < a {
                continue;
            }
            if a == c && b < 0 {
                continue;
            }
            let f = QuadForm { a, b, c };
            if f.is_primitive() {
                out.push(f);
            }
        }
    }
    out
}

fn is_squarefree(mut n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// Kronecker symbol `(a | n)` for `n > 0`.
pub fn kronecker(a: i64, n: u64) -> i32 {
    let mut a = a;
    let mut n = n;
    if n == 0 {
        return if a.unsigned_abs() == 1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    // factor out 2s of n
    while n.is_multiple_of(2) {
        n /= 2;
        if a % 2 == 0 {
            return 0;
        }
        let am8 = a.rem_euclid(8);
        if am8 == 3 || am8 == 5 {
            result = -result;
        }
    }
    a = a.rem_euclid(n as i64);
    // now n odd, a >= 0: Jacobi
    let mut aa = a as u64;
    while aa != 0 {
        while aa.is_multiple_of(2) {
            aa /= 2;
            let nm8 = n % 8;
            if nm8 == 3 || nm8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut aa, &mut n);
        if aa % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        aa %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Tonelli-Shanks square root of a quadratic residue mod an odd prime.
fn sqrt_mod(n: u64, p: u64) -> u64 {
    let n = n % p;
    if n == 0 {
        return 0;
    }
    if p % 4 == 3 {
        return pow_mod(n, (p + 1) / 4, p);
    }
    // write p-1 = q 2^s
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    // find a non-residue
    let mut z = 2u64;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mul_mod(b, b, p);
        }
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}
