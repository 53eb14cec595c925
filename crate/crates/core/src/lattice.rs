//! Exact integer arithmetic on rank-2 sublattices of the ring of integers.
//!
//! Elements of `O_K` are coordinate pairs `(u, w)` meaning `u + w*omega`,
//! where `omega = sqrt(d)` for `d = 2, 3 (mod 4)` and `omega = (1+sqrt(d))/2`
//! for `d = 1 (mod 4)`. All products, norms and module operations below stay
//! in `i128`; nothing here touches floating point except the embedding.

use crate::{Error, Result};

/// Multiplication-table data of `O_K`: `omega^2 = t*omega - n0`.
#[derive(Clone, Copy, Debug)]
pub struct RingParams {
    pub d: i64,
    /// Field discriminant `D` (negative).
    pub disc: i64,
    /// Trace of `omega` (0 or 1).
    pub t: i64,
    /// Norm of `omega`.
    pub n0: i64,
    /// Unit-group order (2, 4 or 6).
    pub omega_k: u32,
}

impl RingParams {
    pub fn new(d: i64) -> Self {
        let r = d.rem_euclid(4);
        let (disc, t, n0) = if r == 1 {
            (d, 1, (1 - d) / 4)
        } else {
            (4 * d, 0, -d)
        };
        let omega_k = match d {
            -1 => 4,
            -3 => 6,
            _ => 2,
        };
        RingParams { d, disc, t, n0, omega_k }
    }

    /// `N(u + w*omega) = u^2 + t*u*w + n0*w^2`, always nonnegative.
    pub fn norm(&self, v: Coord) -> i128 {
        let (u, w) = v;
        u * u + (self.t as i128) * u * w + (self.n0 as i128) * w * w
    }

    /// `Tr(x * conj(y))`, the doubled inner product of the norm form.
    pub fn dot2(&self, x: Coord, y: Coord) -> i128 {
        self.norm((x.0 + y.0, x.1 + y.1)) - self.norm(x) - self.norm(y)
    }

    pub fn mul(&self, x: Coord, y: Coord) -> Coord {
        let (u1, w1) = x;
        let (u2, w2) = y;
        (
            u1 * u2 - (self.n0 as i128) * w1 * w2,
            u1 * w2 + u2 * w1 + (self.t as i128) * w1 * w2,
        )
    }

    pub fn conj(&self, v: Coord) -> Coord {
        (v.0 + (self.t as i128) * v.1, -v.1)
    }

    /// Embedding into the upper-half-plane convention: `sqrt(d) = i sqrt(|d|)`.
    pub fn embed(&self, v: Coord) -> (f64, f64) {
        let re = v.0 as f64 + v.1 as f64 * self.t as f64 / 2.0;
        let im = v.1 as f64 * (self.disc.unsigned_abs() as f64).sqrt() / 2.0;
        (re, im)
    }

    pub fn arg(&self, v: Coord) -> f64 {
        let (re, im) = self.embed(v);
        im.atan2(re)
    }

    /// The units of `O_K` as coordinate pairs (length `omega_k`).
    pub fn units(&self) -> Vec<Coord> {
        match self.omega_k {
            4 => vec![(1, 0), (0, 1), (-1, 0), (0, -1)],
            6 => vec![(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)],
            _ => vec![(1, 0), (-1, 0)],
        }
    }

    /// Exact membership test for the canonical argument window
    /// `[-pi/omega_K, pi/omega_K)`; no floating point involved.
    pub fn in_arg_window(&self, v: Coord) -> bool {
        let (u, w) = v;
        match self.omega_k {
            4 => u > 0 && -u <= w && w < u,
            6 => u > 0 && w < u && u + 2 * w >= 0,
            _ => {
                // [-pi/2, pi/2): Re > 0, or Re = 0 with Im < 0.
                let re2 = 2 * u + (self.t as i128) * w;
                re2 > 0 || (re2 == 0 && w < 0)
            }
        }
    }
}

pub type Coord = (i128, i128);

/// A full-rank sublattice of `O_K` in Hermite form: `a*Z + (b + c*omega)*Z`
/// with `a, c > 0` and `0 <= b < a`. For an integral ideal the module index
/// `a*c` equals the ideal norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl Lattice {
    pub fn whole_ring() -> Self {
        Lattice { a: 1, b: 0, c: 1 }
    }

    pub fn index(&self) -> i128 {
        self.a * self.c
    }

    pub fn basis(&self) -> (Coord, Coord) {
        ((self.a, 0), (self.b, self.c))
    }

    /// Hermite form of the module generated by `gens` (must be full rank).
    pub fn from_generators(gens: &[Coord]) -> Result<Self> {
        // Combine omega-coordinates down to their gcd, collecting the purely
        // rational remainders along the way.
        let mut carrier: Option<Coord> = None;
        let mut rational: Vec<i128> = Vec::new();
        for &g in gens {
            if g == (0, 0) {
                continue;
            }
            if g.1 == 0 {
                rational.push(g.0);
                continue;
            }
            carrier = Some(match carrier {
                None => g,
                Some(v) => {
                    let (gcd, x, y) = ext_gcd(v.1, g.1);
                    let combined = (x * v.0 + y * g.0, gcd);
                    // Reduce both inputs to omega-coordinate zero.
                    rational.push(v.0 - (v.1 / gcd) * combined.0);
                    rational.push(g.0 - (g.1 / gcd) * combined.0);
                    combined
                }
            });
        }
        let v2 = carrier.ok_or(Error::Domain("rank-deficient lattice".into()))?;
        let mut a: i128 = 0;
        for r in rational {
            a = gcd_i128(a, r);
        }
        if a == 0 {
            return Err(Error::Domain("rank-deficient lattice".into()));
        }
        let c = v2.1.abs();
        let (mut b, cc) = if v2.1 < 0 { (-v2.0, c) } else { (v2.0, c) };
        b = b.rem_euclid(a);
        Ok(Lattice { a, b, c: cc })
    }

    /// Product module of two lattices (the ideal product when both are ideals).
    pub fn mul(&self, other: &Lattice, rp: &RingParams) -> Result<Self> {
        let (x1, x2) = self.basis();
        let (y1, y2) = other.basis();
        Lattice::from_generators(&[
            rp.mul(x1, y1),
            rp.mul(x1, y2),
            rp.mul(x2, y1),
            rp.mul(x2, y2),
        ])
    }

    /// The (primitive) positive definite quadratic form attached to the
    /// oriented basis, before reduction: `(a/c, (2b + t c)/c, N(b,c)/(a c))`.
    pub fn norm_form(&self, rp: &RingParams) -> (i128, i128, i128) {
        let n = self.index();
        debug_assert_eq!(self.a % self.c, 0);
        debug_assert_eq!((2 * self.b + rp.t as i128 * self.c) % self.c, 0);
        let fa = self.a / self.c;
        let fb = (2 * self.b + rp.t as i128 * self.c) / self.c;
        let fc = rp.norm((self.b, self.c)) / n;
        debug_assert_eq!(rp.norm((self.b, self.c)) % n, 0);
        (fa, fb, fc)
    }

    /// Gauss-reduced basis: `|g1| <= |g2|` and `|Tr(g1 conj g2)| <= N(g1)`.
    pub fn reduced_basis(&self, rp: &RingParams) -> (Coord, Coord) {
        let (mut g1, mut g2) = self.basis();
        if rp.norm(g2) < rp.norm(g1) {
            std::mem::swap(&mut g1, &mut g2);
        }
        loop {
            // g2 -= k g1 with k = round(dot2 / (2 N(g1)))
            let n1 = rp.norm(g1);
            let d2 = rp.dot2(g1, g2);
            let k = div_round_nearest(d2, 2 * n1);
            if k != 0 {
                g2 = (g2.0 - k * g1.0, g2.1 - k * g1.1);
            }
            if rp.norm(g2) < rp.norm(g1) {
                std::mem::swap(&mut g1, &mut g2);
            } else {
                break;
            }
        }
        (g1, g2)
    }

    /// All lattice vectors of exactly the given norm, assuming it is the
    /// minimum; for an ideal of norm `n` these are the generators when the
    /// ideal is principal, and the list is empty otherwise.
    pub fn vectors_of_minimal_norm(&self, rp: &RingParams, target: i128) -> Vec<Coord> {
        let (g1, g2) = self.reduced_basis(rp);
        if rp.norm(g1) > target {
            return Vec::new();
        }
        let mut out = Vec::new();
        for x in -2i128..=2 {
            for y in -2i128..=2 {
                if x == 0 && y == 0 {
                    continue;
                }
                let v = (x * g1.0 + y * g2.0, x * g1.1 + y * g2.1);
                if rp.norm(v) == target {
                    out.push(v);
                }
            }
        }
        out
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Returns `(g, x, y)` with `x*a + y*b = g = gcd(a, b) > 0`.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            return (-a, -1, 0);
        }
        return (a, 1, 0);
    }
    let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
    (g, y, x - a.div_euclid(b) * y)
}

fn div_round_nearest(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = num.div_euclid(den);
    let r = num.rem_euclid(den);
    if 2 * r >= den {
        q + 1
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_form_of_gaussian_prime() {
        // (2+i) in Z[i]: generators 2+i and i(2+i) = -1+2i.
        let rp = RingParams::new(-1);
        let lat = Lattice::from_generators(&[(2, 1), (-1, 2)]).unwrap();
        assert_eq!(lat, Lattice { a: 5, b: 2, c: 1 });
        assert_eq!(lat.index(), 5);
        let (fa, fb, fc) = lat.norm_form(&rp);
        assert_eq!((fb * fb - 4 * fa * fc) as i64, rp.disc);
    }

    #[test]
    fn product_of_conjugate_primes_is_rational() {
        let rp = RingParams::new(-1);
        let p = Lattice::from_generators(&[(2, 1), (-1, 2)]).unwrap();
        let q = Lattice::from_generators(&[(2, -1), (1, 2)]).unwrap();
        let prod = p.mul(&q, &rp).unwrap();
        assert_eq!(prod, Lattice { a: 5, b: 0, c: 5 });
        assert_eq!(prod.index(), 25);
    }

    #[test]
    fn minimal_vectors_form_unit_orbit() {
        let rp = RingParams::new(-1);
        let p = Lattice::from_generators(&[(2, 1), (-1, 2)]).unwrap();
        let mins = p.vectors_of_minimal_norm(&rp, 5);
        assert_eq!(mins.len(), 4);
        let in_window: Vec<_> = mins.iter().filter(|&&v| rp.in_arg_window(v)).collect();
        assert_eq!(in_window.len(), 1);
        assert_eq!(*in_window[0], (2, 1));
    }

    #[test]
    fn window_is_exact_on_unit_orbits() {
        for d in [-1i64, -2, -3, -5, -7, -11, -15] {
            let rp = RingParams::new(d);
            let units = rp.units();
            assert_eq!(units.len(), rp.omega_k as usize);
            for v in [(3i128, 2i128), (1, -4), (7, 1), (0, 3), (2, 0)] {
                let orbit: Vec<Coord> = units.iter().map(|&u| rp.mul(v, u)).collect();
                let hits = orbit.iter().filter(|&&x| rp.in_arg_window(x)).count();
                assert_eq!(hits, 1, "d={d} v={v:?} orbit={orbit:?}");
            }
        }
    }

    #[test]
    fn embedding_matches_norm() {
        for d in [-1i64, -3, -5, -7] {
            let rp = RingParams::new(d);
            for v in [(3i128, 2i128), (1, -4), (-2, 5)] {
                let (re, im) = rp.embed(v);
                let n = rp.norm(v) as f64;
                assert!((re * re + im * im - n).abs() < 1e-9 * n.max(1.0));
            }
        }
    }
}
