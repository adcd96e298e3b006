//! All-roots solver for polynomials with complex coefficients.
//!
//! Aberth–Ehrlich simultaneous iteration with a seeded random restart when
//! the iteration stagnates, followed by a Newton polish of every root.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 2000;
const MAX_RESTARTS: usize = 8;

/// Evaluate `p(z)` and `p'(z)` for ascending coefficients `coeffs`.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Drop leading coefficients whose magnitude is below `rel_tol` times the
/// largest coefficient.
pub fn trim(coeffs: &[Complex64], rel_tol: f64) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = coeffs.to_vec();
    while out.len() > 1 && out.last().is_some_and(|c| c.norm() <= rel_tol * scale) {
        out.pop();
    }
    out
}

/// Find all roots of the polynomial `coeffs[0] + coeffs[1] z + ...`.
///
/// Leading zero coefficients must already be trimmed; a constant polynomial
/// has no roots.
pub fn all_roots(coeffs: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    if lead.norm() == 0.0 {
        return Err(Error::InvalidInput("leading coefficient is zero".into()));
    }
    if degree == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ab37);
    let mut roots = initial_guesses(coeffs);
    for restart in 0..=MAX_RESTARTS {
        if aberth_iterate(coeffs, &mut roots, tol) {
            for z in roots.iter_mut() {
                *z = newton_polish(coeffs, *z);
            }
            return Ok(roots);
        }
        if restart == MAX_RESTARTS {
            break;
        }
        // Stagnation: jitter every estimate and start over.
        let radius = roots.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        for z in roots.iter_mut() {
            let jitter = Complex64::from_polar(
                radius * 1e-3 * rng.random::<f64>(),
                std::f64::consts::TAU * rng.random::<f64>(),
            );
            *z += jitter;
        }
    }
    Err(Error::InvalidInput(format!(
        "Aberth iteration failed to converge for a degree-{degree} polynomial"
    )))
}

fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    let lead = coeffs[degree].norm();
    // Radius between the geometric mean of the roots and the Cauchy bound.
    let cauchy = 1.0
        + coeffs[..degree]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max);
    let mean = if coeffs[0].norm() > 0.0 {
        (coeffs[0].norm() / lead).powf(1.0 / degree as f64)
    } else {
        1.0
    };
    let radius = mean.min(cauchy).max(f64::MIN_POSITIVE);
    (0..degree)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / degree as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect()
}

fn aberth_iterate(coeffs: &[Complex64], roots: &mut [Complex64], tol: f64) -> bool {
    let n = roots.len();
    for _ in 0..MAX_ITERATIONS {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let zi = roots[i];
            let (p, dp) = horner(coeffs, zi);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != i {
                    repulsion += (zi - zj).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                return false;
            }
            roots[i] = zi - step;
            max_step = max_step.max(step.norm() / zi.norm().max(1.0));
        }
        if max_step < tol {
            return true;
        }
    }
    false
}

fn newton_polish(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp) = horner(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if horner(coeffs, next).0.norm() > p.norm() {
            break;
        }
        z = next;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}
