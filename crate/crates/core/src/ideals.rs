//! Nonzero integral ideals by prime factorization, with lattice bases,
//! canonical principal generators, and the rational/non-rational
//! decompositions used by the resonance engine.
//!
//! Serialized form: factors sorted by (norm, tag), each printed as
//! `<p><tag>^<e>` with tag `a`/`b` for the two members of a split pair
//! (`a` is the member with two-element parameter `b` in `(0, p)`),
//! `r` for ramified and `i` for inert; e.g. `5a^2 * 13b * 3i`.

use std::collections::BTreeMap;
use std::fmt;

use crate::field::{kronecker, FieldContext, Splitting};
use crate::lattice::{Coord, Lattice, RingParams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimeKind {
    SplitA,
    SplitB,
    Inert,
    Ramified,
}

/// A prime ideal of `O_K`, stored as the rational prime below it plus the
/// two-element parameter `b` of its Hermite basis `[p, (b + sqrt(D))/2]`
/// (`b` is 0 for inert primes, where the basis is `[p, p*omega]`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimeIdeal {
    pub p: u64,
    pub kind: PrimeKind,
    b: u64,
}

impl PrimeIdeal {
    pub(crate) fn split(p: u64, b: u64, plus: bool) -> Self {
        PrimeIdeal { p, kind: if plus { PrimeKind::SplitA } else { PrimeKind::SplitB }, b }
    }

    pub(crate) fn inert(p: u64) -> Self {
        PrimeIdeal { p, kind: PrimeKind::Inert, b: 0 }
    }

    pub(crate) fn ramified(p: u64, b: u64) -> Self {
        PrimeIdeal { p, kind: PrimeKind::Ramified, b }
    }

    pub fn norm(&self) -> u64 {
        match self.kind {
            PrimeKind::Inert => self.p * self.p,
            _ => self.p,
        }
    }

    pub fn conj(&self) -> Self {
        match self.kind {
            PrimeKind::SplitA => PrimeIdeal { p: self.p, kind: PrimeKind::SplitB, b: 2 * self.p - self.b },
            PrimeKind::SplitB => PrimeIdeal { p: self.p, kind: PrimeKind::SplitA, b: 2 * self.p - self.b },
            _ => self.clone(),
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self.kind, PrimeKind::SplitA | PrimeKind::SplitB)
    }

    pub fn lattice(&self, rp: &RingParams) -> Lattice {
        let p = self.p as i128;
        match self.kind {
            PrimeKind::Inert => Lattice { a: p, b: 0, c: p },
            _ => {
                // (b + sqrt(D))/2 = (b - t)/2 + omega
                let u = (self.b as i128 - rp.t as i128).div_euclid(2);
                Lattice { a: p, b: u.rem_euclid(p), c: 1 }
            }
        }
    }

    fn tag(&self) -> &'static str {
        match self.kind {
            PrimeKind::SplitA => "a",
            PrimeKind::SplitB => "b",
            PrimeKind::Inert => "i",
            PrimeKind::Ramified => "r",
        }
    }
}

/// Canonical generator of a principal ideal: the unique generator whose
/// argument lies in `[-pi/omega_K, pi/omega_K)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalGenerator {
    /// Coordinates over `(1, omega)`.
    pub coords: Coord,
    pub arg_gamma: f64,
}

/// Classification of `k * a * conj(b)` for the diagonal extraction.
#[derive(Clone, Debug, PartialEq)]
pub enum DiagonalClass {
    /// Principal with a rational generator.
    InP0 { gamma: PrincipalGenerator },
    /// Principal but not rationally generated.
    InPNotP0 { gamma: PrincipalGenerator },
    NotPrincipal,
}

/// A nonzero integral ideal as a product of prime ideals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ideal {
    factors: BTreeMap<PrimeIdeal, u32>,
}

impl Ideal {
    /// The unit ideal `(1)`.
    pub fn unit() -> Self {
        Ideal::default()
    }

    pub fn from_prime(p: PrimeIdeal, e: u32) -> Self {
        let mut factors = BTreeMap::new();
        if e > 0 {
            factors.insert(p, e);
        }
        Ideal { factors }
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (PrimeIdeal, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (p, e) in factors {
            if e > 0 {
                *map.entry(p).or_insert(0) += e;
            }
        }
        Ideal { factors: map }
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&PrimeIdeal, u32)> {
        self.factors.iter().map(|(p, &e)| (p, e))
    }

    pub fn norm(&self) -> Result<u128> {
        let mut n: u128 = 1;
        for (p, &e) in &self.factors {
            for _ in 0..e {
                n = n.checked_mul(p.norm() as u128).ok_or(Error::Overflow("ideal norm"))?;
            }
        }
        Ok(n)
    }

    pub fn norm_f64(&self) -> f64 {
        self.factors
            .iter()
            .map(|(p, &e)| (p.norm() as f64).powi(e as i32))
            .product()
    }

    pub fn mul(&self, other: &Ideal) -> Result<Ideal> {
        let mut factors = self.factors.clone();
        for (p, &e) in &other.factors {
            let slot = factors.entry(p.clone()).or_insert(0);
            *slot = slot.checked_add(e).ok_or(Error::Overflow("ideal exponent"))?;
        }
        Ok(Ideal { factors })
    }

    pub fn pow(&self, e: u32) -> Result<Ideal> {
        let mut factors = BTreeMap::new();
        for (p, &k) in &self.factors {
            factors.insert(p.clone(), k.checked_mul(e).ok_or(Error::Overflow("ideal exponent"))?);
        }
        Ok(Ideal { factors })
    }

    pub fn conj(&self) -> Ideal {
        Ideal {
            factors: self.factors.iter().map(|(p, &e)| (p.conj(), e)).collect(),
        }
    }

    /// Exponent-wise gcd.
    pub fn gcd(&self, other: &Ideal) -> Ideal {
        let mut factors = BTreeMap::new();
        for (p, &e) in &self.factors {
            if let Some(&f) = other.factors.get(p) {
                factors.insert(p.clone(), e.min(f));
            }
        }
        Ideal { factors }
    }

    /// Exact quotient; `other` must divide `self`.
    pub fn div_exact(&self, other: &Ideal) -> Result<Ideal> {
        let mut factors = self.factors.clone();
        for (p, &e) in &other.factors {
            match factors.get_mut(p) {
                Some(slot) if *slot >= e => {
                    *slot -= e;
                    if *slot == 0 {
                        factors.remove(p);
                    }
                }
                _ => return Err(Error::Domain("div_exact: not a divisor".into())),
            }
        }
        Ok(Ideal { factors })
    }

    /// The single prime ideal when this is prime; `None` otherwise.
    pub fn single_prime(&self) -> Option<PrimeIdeal> {
        if self.factors.len() == 1 {
            let (p, &e) = self.factors.iter().next().unwrap();
            if e == 1 {
                return Some(p.clone());
            }
        }
        None
    }

    /// Lattice basis under the fixed embedding.
    pub fn z_basis(&self, ctx: &FieldContext) -> Result<Lattice> {
        let rp = ctx.ring();
        let mut lat = Lattice::whole_ring();
        for (p, &e) in &self.factors {
            let pl = p.lattice(rp);
            for _ in 0..e {
                lat = lat.mul(&pl, rp)?;
            }
        }
        Ok(lat)
    }

    /// Ideal class index in `ctx.class_reps`.
    pub fn class_index(&self, ctx: &FieldContext) -> usize {
        let mut cls = ctx.identity_class();
        for (p, &e) in &self.factors {
            let pc = ctx.class_of_prime(p);
            cls = ctx.compose_classes(cls, ctx.class_power(pc, e));
        }
        cls
    }

    /// Canonical generator when principal, found among the minimal vectors
    /// of the reduced lattice basis; `None` when the class is nontrivial.
    pub fn principal_generator(&self, ctx: &FieldContext) -> Result<Option<PrincipalGenerator>> {
        let rp = ctx.ring();
        let n = self.norm()?;
        if n > (i128::MAX as u128) {
            return Err(Error::Overflow("generator search"));
        }
        let lat = self.z_basis(ctx)?;
        let mins = lat.vectors_of_minimal_norm(rp, n as i128);
        let mut hit = None;
        for v in mins {
            if rp.in_arg_window(v) {
                debug_assert!(hit.is_none(), "two generators in the argument window");
                hit = Some(v);
            }
        }
        Ok(hit.map(|v| PrincipalGenerator { coords: v, arg_gamma: rp.arg(v) }))
    }

    /// `true` when every prime factor pairs off rationally, i.e. the ideal is
    /// generated by a rational integer.
    pub fn is_rational(&self) -> bool {
        self.p0_pprime_split().1.is_unit()
    }

    /// Unique factorization `a = a0 * a'` with `a0` generated by a rational
    /// integer and `a'` free of rational-generated factors.
    pub fn p0_pprime_split(&self) -> (Ideal, Ideal) {
        let mut p0 = BTreeMap::new();
        let mut pp = BTreeMap::new();
        let mut seen_split: BTreeMap<(u64, u64), (u32, u32)> = BTreeMap::new();
        for (p, &e) in &self.factors {
            match p.kind {
                PrimeKind::Inert => {
                    p0.insert(p.clone(), e);
                }
                PrimeKind::Ramified => {
                    if e >= 2 {
                        p0.insert(p.clone(), 2 * (e / 2));
                    }
                    if e % 2 == 1 {
                        pp.insert(p.clone(), 1);
                    }
                }
                PrimeKind::SplitA => {
                    seen_split.entry((p.p, p.b.min(2 * p.p - p.b))).or_insert((0, 0)).0 = e;
                }
                PrimeKind::SplitB => {
                    seen_split.entry((p.p, p.b.min(2 * p.p - p.b))).or_insert((0, 0)).1 = e;
                }
            }
        }
        for ((p, bplus), (ea, eb)) in seen_split {
            let m = ea.min(eb);
            let plus = PrimeIdeal::split(p, bplus, true);
            let minus = plus.conj();
            if m > 0 {
                p0.insert(plus.clone(), m);
                p0.insert(minus.clone(), m);
            }
            if ea > m {
                pp.insert(plus, ea - m);
            }
            if eb > m {
                pp.insert(minus, eb - m);
            }
        }
        (Ideal { factors: p0 }, Ideal { factors: pp })
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "(1)");
        }
        let mut parts: Vec<(u64, &PrimeIdeal, u32)> =
            self.factors.iter().map(|(p, &e)| (p.norm(), p, e)).collect();
        parts.sort_by_key(|&(n, p, _)| (n, p.tag()));
        let s = parts
            .iter()
            .map(|&(_, p, e)| {
                if e == 1 {
                    format!("{}{}", p.p, p.tag())
                } else {
                    format!("{}{}^{}", p.p, p.tag(), e)
                }
            })
            .collect::<Vec<_>>()
            .join(" * ");
        write!(f, "{s}")
    }
}

/// All ideals of norm at most `bound`, one entry per ideal, sorted by
/// (norm, serialized form). The count equals the divisor-sum
/// `sum_{n <= B} sum_{m | n} chi_D(m)`.
pub fn enumerate_ideals(ctx: &FieldContext, bound: f64) -> Result<Vec<Ideal>> {
    if !bound.is_finite() {
        return Err(Error::NonFinite("enumerate_ideals bound"));
    }
    if bound < 1.0 {
        return Ok(Vec::new());
    }
    let b = bound.floor() as u64;
    // smallest-prime-factor sieve
    let mut spf: Vec<u32> = (0..=b as usize).map(|i| i as u32).collect();
    let mut i = 2usize;
    while i * i <= b as usize {
        if spf[i] == i as u32 {
            let mut j = i * i;
            while j <= b as usize {
                if spf[j] == j as u32 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        i += 1;
    }
    let mut out = vec![Ideal::unit()];
    for n in 2..=b {
        // factor n
        let mut m = n;
        let mut pe: Vec<(u64, u32)> = Vec::new();
        while m > 1 {
            let p = spf[m as usize] as u64;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            pe.push((p, e));
        }
        // local ideal choices of norm p^e above each p
        let mut locals: Vec<Vec<Ideal>> = Vec::with_capacity(pe.len());
        let mut possible = true;
        for &(p, e) in &pe {
            match ctx.splitting_type(p)? {
                Splitting::Split(plus, minus) => {
                    let opts = (0..=e)
                        .map(|i| {
                            Ideal::from_factors([(plus.clone(), i), (minus.clone(), e - i)])
                        })
                        .collect();
                    locals.push(opts);
                }
                Splitting::Inert(q) => {
                    if e % 2 != 0 {
                        possible = false;
                        break;
                    }
                    locals.push(vec![Ideal::from_prime(q, e / 2)]);
                }
                Splitting::Ramified(q) => {
                    locals.push(vec![Ideal::from_prime(q, e)]);
                }
            }
        }
        if !possible {
            continue;
        }
        // cartesian product
        let mut acc = vec![Ideal::unit()];
        for opts in locals {
            let mut next = Vec::with_capacity(acc.len() * opts.len());
            for base in &acc {
                for o in &opts {
                    next.push(base.mul(o)?);
                }
            }
            acc = next;
        }
        out.extend(acc);
    }
    out.sort_by(|x, y| {
        let (nx, ny) = (x.norm_f64(), y.norm_f64());
        nx.partial_cmp(&ny).unwrap().then_with(|| x.to_string().cmp(&y.to_string()))
    });
    Ok(out)
}

/// Divisor-sum oracle for the ideal count: `sum_{n <= B} sum_{m | n} chi_D(m)`.
pub fn ideal_count_oracle(disc: i64, bound: u64) -> u64 {
    let mut count = 0i64;
    for n in 1..=bound {
        let mut m = 1;
        while m * m <= n {
            if n % m == 0 {
                count += kronecker(disc, m) as i64;
                let other = n / m;
                if other != m {
                    count += kronecker(disc, other) as i64;
                }
            }
            m += 1;
        }
    }
    count as u64
}

/// Core split of a pair in `P'`: returns `(c', a'', b'')` with
/// `a' = c' a''`, `b' = c' b''`, `(a'', b'') = 1`, plus the flag
/// `(a'' conj(a''), b'' conj(b'')) = 1`.
pub fn coprime_core_split(a_prime: &Ideal, b_prime: &Ideal) -> Result<(Ideal, Ideal, Ideal, bool)> {
    for x in [a_prime, b_prime] {
        if !x.p0_pprime_split().0.is_unit() {
            return Err(Error::Domain("coprime_core_split: input not in P'".into()));
        }
    }
    let core = a_prime.gcd(b_prime);
    let a2 = a_prime.div_exact(&core)?;
    let b2 = b_prime.div_exact(&core)?;
    let a2n = a2.mul(&a2.conj())?;
    let b2n = b2.mul(&b2.conj())?;
    let flag = a2n.gcd(&b2n).is_unit();
    Ok((core, a2, b2, flag))
}

/// Classify `k * a * conj(b)` for the diagonal condition, returning the
/// canonical generator when the product is principal.
pub fn diagonal_classify(k: &Ideal, a: &Ideal, b: &Ideal, ctx: &FieldContext) -> Result<DiagonalClass> {
    let prod = k.mul(a)?.mul(&b.conj())?;
    if prod.class_index(ctx) != ctx.identity_class() {
        return Ok(DiagonalClass::NotPrincipal);
    }
    let gamma = prod
        .principal_generator(ctx)?
        .ok_or_else(|| Error::Domain("identity-class ideal without generator".into()))?;
    if prod.is_rational() {
        Ok(DiagonalClass::InP0 { gamma })
    } else {
        Ok(DiagonalClass::InPNotP0 { gamma })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field;

    #[test]
    fn enumeration_matches_divisor_oracle() {
        for d in [-1i64, -3, -5, -7, -14] {
            let ctx = build_field(d).unwrap();
            for bound in [1u64, 2, 5, 30, 200] {
                let ideals = enumerate_ideals(&ctx, bound as f64).unwrap();
                assert_eq!(
                    ideals.len() as u64,
                    ideal_count_oracle(ctx.disc, bound),
                    "d={d} bound={bound}"
                );
                // one entry per ideal
                let mut seen = ideals.clone();
                seen.dedup();
                assert_eq!(seen.len(), ideals.len());
            }
        }
    }

    #[test]
    fn gaussian_ideals_up_to_five() {
        let ctx = build_field(-1).unwrap();
        let ideals = enumerate_ideals(&ctx, 5.0).unwrap();
        let norms: Vec<u128> = ideals.iter().map(|i| i.norm().unwrap()).collect();
        assert_eq!(norms, vec![1, 2, 4, 5, 5]);
        assert!(enumerate_ideals(&ctx, 0.5).unwrap().is_empty());
        assert!(enumerate_ideals(&ctx, f64::NAN).is_err());
    }

    #[test]
    fn d5_ideals_up_to_two() {
        let ctx = build_field(-5).unwrap();
        let ideals = enumerate_ideals(&ctx, 2.0).unwrap();
        assert_eq!(ideals.len(), 2);
        assert!(ideals[0].is_unit());
        assert_eq!(ideals[1].norm().unwrap(), 2);
        assert_eq!(ideals[1].class_index(&ctx), 1);
        assert!(ideals[1].principal_generator(&ctx).unwrap().is_none());
    }

    #[test]
    fn canonical_generator_of_gaussian_prime() {
        let ctx = build_field(-1).unwrap();
        // (1+2i) Z[i]: norm 5, generator in the window is 2 - i.
        let lat_ideal = match ctx.splitting_type(5).unwrap() {
            Splitting::Split(a, b) => {
                // pick the member whose generator has negative imaginary part
                let ia = Ideal::from_prime(a, 1);
                let ib = Ideal::from_prime(b, 1);
                let ga = ia.principal_generator(&ctx).unwrap().unwrap();
                if ga.coords.1 < 0 {
                    ia
                } else {
                    ib
                }
            }
            _ => unreachable!(),
        };
        let g = lat_ideal.principal_generator(&ctx).unwrap().unwrap();
        assert_eq!(g.coords, (2, -1));
        assert!((g.arg_gamma + 0.4636476090008061).abs() < 1e-12);
    }

    #[test]
    fn p0_pprime_examples() {
        let ctx = build_field(-1).unwrap();
        let (plus, minus) = match ctx.splitting_type(5).unwrap() {
            Splitting::Split(a, b) => (a, b),
            _ => unreachable!(),
        };
        // (2+i)^2 (2-i): a0 = (5), a' = one split prime
        let a = Ideal::from_factors([(plus.clone(), 2), (minus.clone(), 1)]);
        let (a0, ap) = a.p0_pprime_split();
        assert_eq!(a0.norm().unwrap(), 25);
        assert!(a0.is_rational());
        assert_eq!(ap.norm().unwrap(), 5);
        // inert (3)
        let three = match ctx.splitting_type(3).unwrap() {
            Splitting::Inert(p) => Ideal::from_prime(p, 1),
            _ => unreachable!(),
        };
        let (t0, tp) = three.p0_pprime_split();
        assert_eq!(t0.norm().unwrap(), 9);
        assert!(tp.is_unit());
        // ramified (1+i)
        let ram = match ctx.splitting_type(2).unwrap() {
            Splitting::Ramified(p) => Ideal::from_prime(p, 1),
            _ => unreachable!(),
        };
        let (r0, rp_) = ram.p0_pprime_split();
        assert!(r0.is_unit());
        assert_eq!(rp_.norm().unwrap(), 2);
        // idempotence on the P' part
        let (again0, againp) = ap.p0_pprime_split();
        assert!(again0.is_unit());
        assert_eq!(againp, ap);
    }

    #[test]
    fn coprime_core_examples() {
        let ctx = build_field(-1).unwrap();
        let (p5, q5) = match ctx.splitting_type(5).unwrap() {
            Splitting::Split(a, b) => (Ideal::from_prime(a, 1), Ideal::from_prime(b, 1)),
            _ => unreachable!(),
        };
        let (core, a2, b2, _flag) = coprime_core_split(&p5, &p5).unwrap();
        assert_eq!(core, p5);
        assert!(a2.is_unit() && b2.is_unit());

        let (core, a2, b2, flag) = coprime_core_split(&p5, &q5).unwrap();
        assert!(core.is_unit());
        assert_eq!(a2, p5);
        assert_eq!(b2, q5);
        assert!(!flag, "conjugate pair shares the rational prime 5");

        let p13 = match ctx.splitting_type(13).unwrap() {
            Splitting::Split(a, _) => Ideal::from_prime(a, 1),
            _ => unreachable!(),
        };
        let (_, _, _, flag) = coprime_core_split(&p5, &p13).unwrap();
        assert!(flag);

        // rejecting non-P' input
        let three = match ctx.splitting_type(3).unwrap() {
            Splitting::Inert(p) => Ideal::from_prime(p, 1),
            _ => unreachable!(),
        };
        assert!(coprime_core_split(&three, &p5).is_err());
    }

    #[test]
    fn diagonal_classification_examples() {
        let ctx = build_field(-1).unwrap();
        let (plus, minus) = match ctx.splitting_type(5).unwrap() {
            Splitting::Split(a, b) => (a, b),
            _ => unreachable!(),
        };
        let unit = Ideal::unit();
        let a = Ideal::from_prime(plus.clone(), 1);
        // k = (1), a = b: always rational
        match diagonal_classify(&unit, &a, &a, &ctx).unwrap() {
            DiagonalClass::InP0 { gamma } => {
                assert_eq!(gamma.coords.1, 0);
            }
            other => panic!("expected InP0, got {other:?}"),
        }
        // k = conj^2, a = plus^2, b = 1: product (25)
        let k = Ideal::from_prime(minus.clone(), 2);
        let a2 = Ideal::from_prime(plus.clone(), 2);
        match diagonal_classify(&k, &a2, &unit, &ctx).unwrap() {
            DiagonalClass::InP0 { gamma } => assert_eq!(gamma.coords, (25, 0)),
            other => panic!("expected InP0, got {other:?}"),
        }
        // k = plus, a = b = 1: principal non-rational
        match diagonal_classify(&Ideal::from_prime(plus, 1), &unit, &unit, &ctx).unwrap() {
            DiagonalClass::InPNotP0 { gamma } => {
                assert_eq!(gamma.coords, (2, 1));
            }
            other => panic!("expected InPNotP0, got {other:?}"),
        }
        // genuinely non-principal case
        let ctx5 = build_field(-5).unwrap();
        let p2 = match ctx5.splitting_type(2).unwrap() {
            Splitting::Ramified(p) => Ideal::from_prime(p, 1),
            _ => unreachable!(),
        };
        assert_eq!(
            diagonal_classify(&p2, &Ideal::unit(), &Ideal::unit(), &ctx5).unwrap(),
            DiagonalClass::NotPrincipal
        );
    }

    #[test]
    fn display_is_stable() {
        let ctx = build_field(-1).unwrap();
        let (plus, minus) = match ctx.splitting_type(5).unwrap() {
            Splitting::Split(a, b) => (a, b),
            _ => unreachable!(),
        };
        let ram = match ctx.splitting_type(2).unwrap() {
            Splitting::Ramified(p) => p,
            _ => unreachable!(),
        };
        let ideal = Ideal::from_factors([(plus, 2), (minus, 1), (ram, 3)]);
        assert_eq!(ideal.to_string(), "2r^3 * 5a^2 * 5b");
        assert_eq!(Ideal::unit().to_string(), "(1)");
    }
}
