//! Self-similar systems, their scaling zeta function and its poles.
//!
//! The scaling zeta function of a system with ratios `r_1 >= ... >= r_N` is
//! `1 / (1 - sum r_n^s)`; its poles are the scaling complex dimensions.

mod dims;
mod lattice;
mod string;

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use dims::{
    complex_dimensions, complex_dimensions_with, lattice_lines, zero_count, ComplexDimension,
    SearchMethod, CRITICAL_LINE_TOL, MAX_POLYNOMIAL_DEGREE, SIMPLICITY_THRESHOLD,
};
pub use lattice::{detect_lattice, LatticeClass, LatticeProvenance, LatticeSpec};
pub use string::{string_lengths, FractalString, DEFAULT_LENGTH_BUDGET};

/// Pole-proximity guard for [`zeta_eval`].
pub const POLE_GUARD: f64 = 1e-9;
/// Membership tolerance `|1 - sum r_n^w| < POLE_TOL` for a complex dimension.
pub const POLE_TOL: f64 = 1e-10;
/// Default tolerance for heuristic lattice detection.
pub const DEFAULT_LATTICE_TOL: f64 = 1e-10;

/// A self-similar system described by its scaling ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem {
    ratios: Vec<f64>,
    ambient_dim: usize,
    lattice: Option<LatticeSpec>,
}

/// Check raw ratios and return a system with ratios sorted in descending order.
pub fn validate_ifs(ratios: &[f64], ambient_dim: usize) -> Result<IfsSystem> {
    if ambient_dim == 0 {
        return Err(Error::InvalidInput(
            "ambient dimension must be positive".into(),
        ));
    }
    if let Some(&bad) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::RatioOutOfRange(bad));
    }
    if ratios.len() < 2 {
        return Err(Error::TooFewMaps(ratios.len()));
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("ratios are finite"));
    let moran_at_d: f64 = sorted
        .iter()
        .rev()
        .map(|r| r.powi(ambient_dim as i32))
        .sum();
    if moran_at_d >= 1.0 {
        return Err(Error::TrivialAttractor {
            moran_at_d,
            ambient_dim,
        });
    }
    Ok(IfsSystem {
        ratios: sorted,
        ambient_dim,
        lattice: None,
    })
}

impl IfsSystem {
    pub fn new(ratios: &[f64], ambient_dim: usize) -> Result<Self> {
        validate_ifs(ratios, ambient_dim)
    }

    /// Build a system from exact rational ratios `p/q`.
    ///
    /// The lattice structure is decided exactly from prime factorizations, so
    /// the result carries a lattice with [`LatticeProvenance::ExactRational`]
    /// or no lattice at all.
    pub fn from_rationals(ratios: &[(u64, u64)], ambient_dim: usize) -> Result<Self> {
        let values: Vec<f64> = ratios
            .iter()
            .map(|&(p, q)| {
                if q == 0 {
                    Err(Error::InvalidInput(format!("zero denominator in {p}/{q}")))
                } else {
                    Ok(p as f64 / q as f64)
                }
            })
            .collect::<Result<_>>()?;
        let mut system = validate_ifs(&values, ambient_dim)?;
        system.lattice = lattice::exact_rational_lattice(ratios)?;
        Ok(system)
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn num_maps(&self) -> usize {
        self.ratios.len()
    }

    pub fn lattice(&self) -> Option<&LatticeSpec> {
        self.lattice.as_ref()
    }

    pub fn is_lattice(&self) -> bool {
        self.lattice.is_some()
    }

    /// Attach a lattice declared by the caller as `base^exponents`.
    pub fn with_declared_lattice(self, base: f64, exponents: &[u32]) -> Result<Self> {
        let spec = LatticeSpec::new(base, exponents, LatticeProvenance::Declared)?;
        self.with_lattice(spec)
    }

    /// Attach a lattice, checking that it reproduces the ratios.
    pub fn with_lattice(mut self, spec: LatticeSpec) -> Result<Self> {
        spec.check_reproduces(&self.ratios)?;
        self.lattice = Some(spec);
        Ok(self)
    }

    /// Run heuristic detection unless a lattice is already attached.
    pub fn classify(self, tol: f64) -> Result<Self> {
        if self.lattice.is_some() {
            return Ok(self);
        }
        match detect_lattice(&self, tol)? {
            LatticeClass::Lattice(spec) => Ok(Self {
                lattice: Some(spec),
                ..self
            }),
            LatticeClass::Nonlattice => Ok(self),
        }
    }

    /// Similarity dimension `D`, see [`abscissa`].
    pub fn dimension(&self) -> f64 {
        abscissa(self)
    }

    /// `f(s) = 1 - sum r_n^s` and its derivative.
    pub(crate) fn moran_defect(&self, s: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(1.0, 0.0);
        let mut slope = Complex64::new(0.0, 0.0);
        for &r in self.ordered_for(s.re) {
            let ln_r = r.ln();
            let term = (s * ln_r).exp();
            value -= term;
            slope -= term * ln_r;
        }
        (value, slope)
    }

    /// Ratios in order of increasing `|r^s|`.
    fn ordered_for(&self, re: f64) -> Box<dyn Iterator<Item = &f64> + '_> {
        if re >= 0.0 {
            Box::new(self.ratios.iter().rev())
        } else {
            Box::new(self.ratios.iter())
        }
    }

    /// Distinct ratio values with their multiplicities, ascending.
    pub(crate) fn ratio_classes(&self) -> RatioClasses {
        let mut values: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for &r in self.ratios.iter().rev() {
            match values.last() {
                Some(&v) if v == r => *counts.last_mut().unwrap() += 1.0,
                _ => {
                    values.push(r);
                    counts.push(1.0);
                }
            }
        }
        RatioClasses { values, counts }
    }
}

/// `sum_n r_n^s`, summed in order of increasing magnitude.
pub fn moran_sum(system: &IfsSystem, s: Complex64) -> Complex64 {
    system
        .ordered_for(s.re)
        .map(|&r| (s * r.ln()).exp())
        .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t)
}

/// Real-argument `sum_n r_n^sigma`.
pub fn moran_sum_real(system: &IfsSystem, sigma: f64) -> f64 {
    system.ordered_for(sigma).map(|&r| r.powf(sigma)).sum()
}

/// `zeta_L(s) = 1 / (1 - sum r_n^s)`.
pub fn zeta_eval(system: &IfsSystem, s: Complex64) -> Result<Complex64> {
    let denom = Complex64::new(1.0, 0.0) - moran_sum(system, s);
    if denom.norm() < POLE_GUARD {
        return Err(Error::NearPole { re: s.re, im: s.im });
    }
    Ok(denom.inv())
}

/// Real-argument zeta, used for the integer-dimension coefficients.
pub fn zeta_real(system: &IfsSystem, sigma: f64) -> Result<f64> {
    zeta_eval(system, Complex64::new(sigma, 0.0)).map(|z| z.re)
}

/// Abscissa of convergence `D`: the unique real root of `sum r_n^D = 1`.
///
/// Bisection on `[0, d]` (the sum is strictly decreasing) followed by Newton
/// steps; the validated invariants guarantee the bracket.
pub fn abscissa(system: &IfsSystem) -> f64 {
    let h = |sigma: f64| moran_sum_real(system, sigma) - 1.0;
    let (mut lo, mut hi) = (0.0, system.ambient_dim as f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut d = 0.5 * (lo + hi);
    for _ in 0..4 {
        let value = h(d);
        if value.abs() < 1e-16 {
            break;
        }
        let slope: f64 = system.ratios.iter().map(|r| r.powf(d) * r.ln()).sum();
        let next = d - value / slope;
        if !(next > 0.0) || h(next).abs() >= value.abs() {
            break;
        }
        d = next;
    }
    d
}

/// `res_{s=w} zeta_L(s) = 1 / sum r_n^w ln(1/r_n)`.
pub fn residue_at(system: &IfsSystem, omega: Complex64) -> Result<Complex64> {
    let (defect, _) = system.moran_defect(omega);
    if defect.norm() >= POLE_TOL {
        return Err(Error::NotAPole {
            re: omega.re,
            im: omega.im,
            residual: defect.norm(),
        });
    }
    Ok(residue_formula(system, omega))
}

pub(crate) fn residue_formula(system: &IfsSystem, omega: Complex64) -> Complex64 {
    let denom = system
        .ordered_for(omega.re)
        .map(|&r| (omega * r.ln()).exp() * (-r.ln()))
        .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t);
    denom.inv()
}

/// Distinct ratios `u_j` with multiplicities `n_j`.
#[derive(Debug, Clone)]
pub(crate) struct RatioClasses {
    pub values: Vec<f64>,
    pub counts: Vec<f64>,
}

impl RatioClasses {
    fn length(&self, exponents: &[u32]) -> f64 {
        self.values
            .iter()
            .zip(exponents)
            .map(|(u, &e)| u.powi(e as i32))
            .product()
    }

    /// Breadth-first walk over the word tree with words grouped by how many
    /// times each distinct ratio occurs (all such words share one length).
    ///
    /// `visit(length, multiplicity)` returns whether the class is expanded.
    /// Each visited class counts against `budget`.
    pub fn walk<F>(&self, budget: u64, mut visit: F) -> Result<()>
    where
        F: FnMut(f64, f64) -> bool,
    {
        let j = self.values.len();
        let mut level: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        level.insert(vec![0; j], 1.0);
        let mut visited: u64 = 0;
        while !level.is_empty() {
            let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
            for (exponents, mult) in level {
                visited += 1;
                if visited > budget {
                    return Err(Error::BudgetExceeded { budget });
                }
                if visit(self.length(&exponents), mult) {
                    for (idx, &count) in self.counts.iter().enumerate() {
                        let mut child = exponents.clone();
                        child[idx] += 1;
                        *next.entry(child).or_insert(0.0) += mult * count;
                    }
                }
            }
            level = next;
        }
        Ok(())
    }
}
