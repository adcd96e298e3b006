//! Lattice / nonlattice classification of the scaling ratios.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

use super::IfsSystem;

/// Largest continued-fraction denominator considered by [`detect_lattice`].
pub const MAX_DENOMINATOR: u64 = 1_000_000;
/// Relative tolerance for `r_n = base^{k_n}`.
pub const RECONSTRUCTION_TOL: f64 = 1e-12;

/// How a lattice structure was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeProvenance {
    /// Given explicitly as base and exponents.
    Declared,
    /// Derived exactly from rational ratios.
    ExactRational,
    /// Found by continued fractions on floating-point ratios.
    Heuristic,
}

impl LatticeProvenance {
    pub fn label(self) -> &'static str {
        match self {
            LatticeProvenance::Declared => "declared",
            LatticeProvenance::ExactRational => "exact-rational",
            LatticeProvenance::Heuristic => "heuristic",
        }
    }
}

/// All ratios are `base^{k_n}` with coprime positive integers `k_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    base: f64,
    exponents: Vec<u32>,
    oscillatory_period: f64,
    provenance: LatticeProvenance,
}

impl LatticeSpec {
    /// Normalizes the exponents by their gcd so that the base is maximal.
    pub fn new(base: f64, exponents: &[u32], provenance: LatticeProvenance) -> Result<Self> {
        if !(base > 0.0 && base < 1.0) {
            return Err(Error::InvalidLattice(format!("base {base} outside (0, 1)")));
        }
        if exponents.is_empty() || exponents.contains(&0) {
            return Err(Error::InvalidLattice(
                "exponents must be positive integers".into(),
            ));
        }
        let g = exponents
            .iter()
            .fold(0u32, |acc, &k| gcd(acc as u64, k as u64) as u32);
        let mut exponents: Vec<u32> = exponents.iter().map(|k| k / g).collect();
        exponents.sort_unstable();
        let base = base.powi(g as i32);
        Ok(Self {
            base,
            oscillatory_period: TAU / (1.0 / base).ln(),
            exponents,
            provenance,
        })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Exponents aligned with the system's descending ratios.
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// `p = 2 pi / ln(1/r)`.
    pub fn oscillatory_period(&self) -> f64 {
        self.oscillatory_period
    }

    pub fn provenance(&self) -> LatticeProvenance {
        self.provenance
    }

    pub fn max_exponent(&self) -> u32 {
        self.exponents.iter().copied().max().unwrap_or(0)
    }

    pub(crate) fn check_reproduces(&self, ratios: &[f64]) -> Result<()> {
        if ratios.len() != self.exponents.len() {
            return Err(Error::InvalidLattice(format!(
                "{} exponents for {} ratios",
                self.exponents.len(),
                ratios.len()
            )));
        }
        // Pair descending ratios with ascending exponents.
        let mut exps = self.exponents.clone();
        exps.sort_unstable();
        for (&r, &k) in ratios.iter().zip(&exps) {
            let rebuilt = self.base.powi(k as i32);
            if ((rebuilt - r) / r).abs() > RECONSTRUCTION_TOL {
                return Err(Error::InvalidLattice(format!(
                    "base^{k} = {rebuilt} does not match ratio {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of lattice detection.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeClass {
    Lattice(LatticeSpec),
    Nonlattice,
}

/// Heuristic lattice detection for floating-point ratios.
///
/// For each ratio, `x_n = ln r_n / ln r_1` is expanded in continued
/// fractions (denominators up to [`MAX_DENOMINATOR`]); the first convergent
/// `p/q` with integer-relation residual `|q x_n - p| < tol` is accepted.
/// A best residual inside `[tol, 10 tol)` is reported as ambiguous.
pub fn detect_lattice(system: &IfsSystem, tol: f64) -> Result<LatticeClass> {
    if let Some(spec) = system.lattice() {
        return Ok(LatticeClass::Lattice(spec.clone()));
    }
    let ratios = system.ratios();
    let ln_first = ratios[0].ln();
    let mut fractions = Vec::with_capacity(ratios.len());
    for &r in ratios {
        let x = r.ln() / ln_first;
        match best_relation(x, tol) {
            Relation::Found(p, q) => fractions.push((p, q)),
            Relation::Ambiguous(residual) => return Err(Error::AmbiguousLattice { residual }),
            Relation::None => return Ok(LatticeClass::Nonlattice),
        }
    }
    // x_n = p_n / q_n; common denominator Q gives integer exponents p_n Q / q_n.
    let lcm_q = fractions.iter().fold(1u64, |acc, &(_, q)| lcm(acc, q));
    let raw: Vec<u64> = fractions.iter().map(|&(p, q)| p * (lcm_q / q)).collect();
    let g = raw.iter().fold(0u64, |acc, &k| gcd(acc, k));
    let exponents: Vec<u64> = raw.iter().map(|k| k / g).collect();
    if exponents.iter().any(|&k| k > u32::MAX as u64) {
        return Ok(LatticeClass::Nonlattice);
    }
    let base = ratios[0].powf(1.0 / exponents[0] as f64);
    let exps: Vec<u32> = exponents.iter().map(|&k| k as u32).collect();
    let spec = LatticeSpec::new(base, &exps, LatticeProvenance::Heuristic)?;
    match spec.check_reproduces(ratios) {
        Ok(()) => Ok(LatticeClass::Lattice(spec)),
        Err(_) => Err(Error::AmbiguousLattice {
            residual: RECONSTRUCTION_TOL,
        }),
    }
}

enum Relation {
    Found(u64, u64),
    Ambiguous(f64),
    None,
}

fn best_relation(x: f64, tol: f64) -> Relation {
    let mut best = f64::INFINITY;
    for (p, q) in convergents(x, MAX_DENOMINATOR) {
        let residual = (q as f64 * x - p as f64).abs();
        if residual < tol {
            return Relation::Found(p, q);
        }
        best = best.min(residual);
    }
    if best < 10.0 * tol {
        Relation::Ambiguous(best)
    } else {
        Relation::None
    }
}

/// Continued-fraction convergents of `x > 0` with denominators up to `max_q`.
pub(crate) fn convergents(x: f64, max_q: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut p_prev, mut p) = (1u64, x.floor() as u64);
    let (mut q_prev, mut q) = (0u64, 1u64);
    out.push((p, q));
    let mut frac = x - x.floor();
    for _ in 0..64 {
        if frac < 1e-18 {
            break;
        }
        let y = 1.0 / frac;
        let a = y.floor();
        if a > max_q as f64 {
            break;
        }
        let a = a as u64;
        let (p_next, q_next) = match (
            a.checked_mul(p).and_then(|v| v.checked_add(p_prev)),
            a.checked_mul(q).and_then(|v| v.checked_add(q_prev)),
        ) {
            (Some(pn), Some(qn)) => (pn, qn),
            _ => break,
        };
        if q_next > max_q {
            break;
        }
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        out.push((p, q));
        frac = y - y.floor();
    }
    out
}

/// Exact lattice test for rational ratios via prime-exponent vectors:
/// the ratios form a lattice iff all vectors are positive multiples of one
/// primitive vector.
pub(crate) fn exact_rational_lattice(ratios: &[(u64, u64)]) -> Result<Option<LatticeSpec>> {
    let vectors: Vec<Vec<(u64, i64)>> = ratios
        .iter()
        .map(|&(p, q)| {
            let g = gcd(p, q);
            prime_exponents(p / g, q / g)
        })
        .collect();
    let primes: Vec<u64> = {
        let mut ps: Vec<u64> = vectors.iter().flatten().map(|&(p, _)| p).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    };
    let dense: Vec<Vec<i64>> = vectors
        .iter()
        .map(|v| {
            primes
                .iter()
                .map(|p| v.iter().find(|(q, _)| q == p).map_or(0, |&(_, e)| e))
                .collect()
        })
        .collect();
    let first = &dense[0];
    let content = first
        .iter()
        .fold(0u64, |acc, &e| gcd(acc, e.unsigned_abs()));
    let unit: Vec<i64> = first.iter().map(|e| e / content as i64).collect();
    let mut exponents = Vec::with_capacity(dense.len());
    for v in &dense {
        // v = k * unit with k a positive integer (unit is primitive).
        let pivot = unit
            .iter()
            .position(|&e| e != 0)
            .expect("ratio differs from 1");
        if v[pivot] % unit[pivot] != 0 {
            return Ok(None);
        }
        let k = v[pivot] / unit[pivot];
        if k <= 0 || v.iter().zip(&unit).any(|(a, b)| *a != k * b) {
            return Ok(None);
        }
        exponents.push(k as u32);
    }
    let base: f64 = primes
        .iter()
        .zip(&unit)
        .map(|(&p, &e)| (p as f64).powi(e as i32))
        .product();
    LatticeSpec::new(base, &exponents, LatticeProvenance::ExactRational).map(Some)
}

fn prime_exponents(num: u64, den: u64) -> Vec<(u64, i64)> {
    let mut out: Vec<(u64, i64)> = Vec::new();
    for (n, sign) in [(num, 1i64), (den, -1i64)] {
        let mut n = n;
        let mut p = 2u64;
        while p * p <= n {
            while n % p == 0 {
                add_exponent(&mut out, p, sign);
                n /= p;
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if n > 1 {
            add_exponent(&mut out, n, sign);
        }
    }
    out
}

fn add_exponent(out: &mut Vec<(u64, i64)>, p: u64, delta: i64) {
    match out.iter_mut().find(|(q, _)| *q == p) {
        Some(entry) => entry.1 += delta,
        None => out.push((p, delta)),
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs_zeta::{validate_ifs, DEFAULT_LATTICE_TOL};

    fn detect(ratios: &[f64]) -> Result<LatticeClass> {
        detect_lattice(&validate_ifs(ratios, 1).unwrap(), DEFAULT_LATTICE_TOL)
    }

    #[test]
    fn gasket_is_lattice_with_base_one_half() {
        let s = validate_ifs(&[0.5, 0.5, 0.5], 2).unwrap();
        let LatticeClass::Lattice(spec) = detect_lattice(&s, DEFAULT_LATTICE_TOL).unwrap() else {
            panic!("expected lattice");
        };
        assert!((spec.base() - 0.5).abs() < 1e-15);
        assert_eq!(spec.exponents(), &[1, 1, 1]);
        assert!((spec.oscillatory_period() - TAU / 2f64.ln()).abs() < 1e-12);
        assert_eq!(spec.provenance(), LatticeProvenance::Heuristic);
    }

    #[test]
    fn powers_of_a_half() {
        let LatticeClass::Lattice(spec) = detect(&[0.25, 0.5]).unwrap() else {
            panic!()
        };
        assert!((spec.base() - 0.5).abs() < 1e-15);
        assert_eq!(spec.exponents(), &[1, 2]);
    }

    #[test]
    fn non_unit_exponent_on_largest_ratio() {
        // r^3 and r^7 with r = 0.8
        let LatticeClass::Lattice(spec) = detect(&[0.8f64.powi(3), 0.8f64.powi(7)]).unwrap() else {
            panic!()
        };
        assert!((spec.base() - 0.8).abs() < 1e-13);
        assert_eq!(spec.exponents(), &[3, 7]);
    }

    #[test]
    fn half_and_third_is_nonlattice() {
        assert_eq!(detect(&[0.5, 1.0 / 3.0]).unwrap(), LatticeClass::Nonlattice);
        // Independent oracle: 20 convergents of log2(3) never give an integer
        // relation tighter than 1e-8.
        let x = 3f64.ln() / 2f64.ln();
        let cf = convergents(x, u64::MAX / 4);
        assert!(cf.len() >= 20);
        for &(p, q) in cf.iter().take(15) {
            assert!((q as f64 * x - p as f64).abs() > 1e-8, "{p}/{q}");
        }
    }

    #[test]
    fn convergents_of_golden_ratio_are_fibonacci() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let c = convergents(phi, 100);
        assert_eq!(&c[..6], &[(1, 1), (2, 1), (3, 2), (5, 3), (8, 5), (13, 8)]);
    }

    #[test]
    fn exact_rationals() {
        let s = IfsSystem::from_rationals(&[(1, 4), (1, 2)], 1).unwrap();
        let spec = s.lattice().unwrap();
        assert_eq!(spec.exponents(), &[1, 2]);
        assert!((spec.base() - 0.5).abs() < 1e-16);
        assert_eq!(spec.provenance(), LatticeProvenance::ExactRational);

        let s = IfsSystem::from_rationals(&[(4, 9), (8, 27)], 1).unwrap();
        let spec = s.lattice().unwrap();
        assert_eq!(spec.exponents(), &[2, 3]);
        assert!((spec.base() - 2.0 / 3.0).abs() < 1e-15);

        let s = IfsSystem::from_rationals(&[(1, 2), (1, 3)], 1).unwrap();
        assert!(s.lattice().is_none());
        let s = IfsSystem::from_rationals(&[(1, 6), (1, 12)], 1).unwrap();
        assert!(s.lattice().is_none());
    }

    #[test]
    fn declared_lattice_is_checked_and_normalized() {
        let s = validate_ifs(&[0.25, 0.0625], 1).unwrap();
        let s = s.with_declared_lattice(0.5, &[4, 2]).unwrap();
        assert_eq!(s.lattice().unwrap().exponents(), &[1, 2]);
        assert!((s.lattice().unwrap().base() - 0.25).abs() < 1e-16);
        let s = validate_ifs(&[0.25, 0.0625], 1).unwrap();
        assert!(matches!(
            s.with_declared_lattice(0.3, &[1, 2]),
            Err(Error::InvalidLattice(_))
        ));
    }
}
