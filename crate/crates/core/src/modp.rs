//! Reduction modulo an inert prime, used to certify that a spin is the whole
//! space without exact arithmetic.
//!
//! Over a prime `p` with `p` coprime to every denominator and `D` a
//! non-residue mod `p`, the residue field is `F_p[X]/(X^2 - D)`. A spin over
//! the residue field never exceeds the exact spin in dimension, so a full
//! modular spin proves a full exact one. Anything short of full says nothing.

use num::{BigInt, Integer, ToPrimitive, Zero};

use crate::field::Scalar;
use crate::linalg::Matrix;

const PRIMES: [u64; 4] = [2_305_843_009_213_693_951, 4_611_686_018_427_387_847, 1_000_000_007, 998_244_353];

#[derive(Clone, Copy)]
struct Ring {
    p: u64,
    d: u64,
}

type El = (u64, u64);

impl Ring {
    fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_raw(r, b);
            }
            b = self.mul_raw(b, b);
            e >>= 1;
        }
        r
    }

    fn inv_raw(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }

    fn add(&self, a: El, b: El) -> El {
        ((a.0 + b.0) % self.p, (a.1 + b.1) % self.p)
    }

    fn sub(&self, a: El, b: El) -> El {
        ((a.0 + self.p - b.0) % self.p, (a.1 + self.p - b.1) % self.p)
    }

    fn mul(&self, a: El, b: El) -> El {
        let re = (self.mul_raw(a.0, b.0) as u128 + self.mul_raw(self.d, self.mul_raw(a.1, b.1)) as u128) % self.p as u128;
        let im = (self.mul_raw(a.0, b.1) as u128 + self.mul_raw(a.1, b.0) as u128) % self.p as u128;
        (re as u64, im as u64)
    }

    fn inv(&self, a: El) -> El {
        let n = (self.p - self.mul_raw(self.d, self.mul_raw(a.1, a.1)) + self.mul_raw(a.0, a.0)) % self.p;
        let ni = self.inv_raw(n);
        (self.mul_raw(a.0, ni), self.mul_raw((self.p - a.1) % self.p, ni))
    }

    fn int(&self, n: &BigInt) -> u64 {
        let r = n.mod_floor(&BigInt::from(self.p));
        r.to_u64().expect("residue fits")
    }

    fn reduce(&self, s: &Scalar) -> Option<El> {
        let (x, y) = (s.x(), s.y());
        let part = |r: &num::BigRational| -> Option<u64> {
            if r.is_zero() {
                return Some(0);
            }
            let den = self.int(r.denom());
            (den != 0).then(|| self.mul_raw(self.int(r.numer()), self.inv_raw(den)))
        };
        Some((part(&x)?, part(&y)?))
    }
}

fn radicand(gens: &[&Matrix], v: &[Scalar]) -> i64 {
    let entries = gens.iter().flat_map(|g| (0..g.rows()).flat_map(move |i| g.row(i).iter()));
    entries.chain(v).map(Scalar::radicand).find(|&r| r != 0).unwrap_or(0)
}

fn ring_for(rad: i64) -> impl Iterator<Item = Ring> {
    PRIMES.into_iter().filter_map(move |p| {
        let d = rad.rem_euclid(p as i64) as u64;
        let ring = Ring { p, d };
        let inert = d != 0 && ring.pow(d, (p - 1) / 2) == p - 1;
        (rad == 0 || inert).then_some(ring)
    })
}

struct Echelon {
    rows: Vec<(usize, Vec<El>)>,
}

impl Echelon {
    fn insert(&mut self, r: &Ring, v: &[El]) -> Option<Vec<El>> {
        let mut w = v.to_vec();
        for (p, row) in &self.rows {
            let f = w[*p];
            if f == (0, 0) {
                continue;
            }
            for (j, c) in row.iter().enumerate().skip(*p) {
                if *c != (0, 0) {
                    w[j] = r.sub(w[j], r.mul(f, *c));
                }
            }
        }
        let p = w.iter().position(|c| *c != (0, 0))?;
        let inv = r.inv(w[p]);
        for c in w.iter_mut() {
            *c = r.mul(*c, inv);
        }
        let at = self.rows.partition_point(|(q, _)| *q < p);
        self.rows.insert(at, (p, w.clone()));
        Some(w)
    }
}

fn apply(r: &Ring, m: &[Vec<El>], v: &[El]) -> Vec<El> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).fold((0, 0), |acc, (a, b)| {
                if *a == (0, 0) || *b == (0, 0) {
                    acc
                } else {
                    r.add(acc, r.mul(*a, *b))
                }
            })
        })
        .collect()
}

/// `true` only if the spin of `v` under `gens` is provably the whole space.
pub fn spin_is_full(gens: &[&Matrix], v: &[Scalar]) -> bool {
    let n = v.len();
    'ring: for r in ring_for(radicand(gens, v)) {
        let mut mats = Vec::with_capacity(gens.len());
        for g in gens {
            let mut m = Vec::with_capacity(n);
            for i in 0..n {
                let mut row = Vec::with_capacity(n);
                for s in g.row(i) {
                    match r.reduce(s) {
                        Some(e) => row.push(e),
                        None => continue 'ring,
                    }
                }
                m.push(row);
            }
            mats.push(m);
        }
        // scale v to be p-integral and primitive so its reduction is nonzero
        let Some(start) = primitive(&r, v) else { continue };
        let mut ech = Echelon { rows: Vec::new() };
        let mut queue = Vec::new();
        if let Some(w) = ech.insert(&r, &start) {
            queue.push(w);
        }
        while let Some(w) = queue.pop() {
            for m in &mats {
                if let Some(u) = ech.insert(&r, &apply(&r, m, &w)) {
                    queue.push(u);
                }
            }
            if ech.rows.len() == n {
                return true;
            }
        }
        return false;
    }
    false
}

fn primitive(r: &Ring, v: &[Scalar]) -> Option<Vec<El>> {
    let lead = v.iter().find(|s| !s.is_zero())?;
    let inv = lead.inv();
    v.iter().map(|s| r.reduce(&(s * &inv))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_partial_spins() {
        let n = 3;
        let shift = Matrix::from_fn(n, n, |i, j| Scalar::from_int((i == j + 1) as i64));
        let e0 = crate::linalg::unit(n, 0);
        assert!(spin_is_full(&[&shift], &e0));
        assert!(!spin_is_full(&[&shift], &crate::linalg::unit(n, 1)));
    }

    #[test]
    fn quadratic_entries_reduce() {
        let r5 = Scalar::sqrt_of(5);
        let m = Matrix::from_fn(2, 2, |i, j| if i != j { r5.clone() } else { Scalar::zero() });
        assert!(spin_is_full(&[&m], &crate::linalg::unit(2, 0)));
        assert_eq!(radicand(&[&m], &[]), 5);
    }
}
