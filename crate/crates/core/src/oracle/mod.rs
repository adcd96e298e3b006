//! Ground-truth engines: exact word-tree summation of `V(T, eps)`, the
//! logarithmic time average, and planar Monte Carlo.

mod planar;

pub use planar::{mc_parallel_area, McEstimate, PlanarIfs, PlanarMap, MC_CHUNK};

use crate::error::{Error, Result};
use crate::generator::MonophaseGenerator;
use crate::ifs_zeta::{moran_sum_real, zeta_real, IfsSystem};
use crate::quad::simpson;

/// Default cap on visited word classes.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

fn check_dims(system: &IfsSystem, generator: &MonophaseGenerator) -> Result<()> {
    if system.ambient_dim() != generator.ambient_dim() {
        return Err(Error::InvalidInput(format!(
            "generator dimension {} differs from system dimension {}",
            generator.ambient_dim(),
            system.ambient_dim()
        )));
    }
    Ok(())
}

/// `V(T, eps) = sum_w l_w^d V(G, eps / l_w)`, with every subtree whose root
/// tile is saturated (`l_w g <= eps`) added in closed form.
pub fn direct_tiling_volume(
    system: &IfsSystem,
    generator: &MonophaseGenerator,
    eps: f64,
    budget: u64,
) -> Result<f64> {
    check_dims(system, generator)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let d = system.ambient_dim() as i32;
    let g = generator.inradius();
    let saturated = generator.volume() / (1.0 - moran_sum_real(system, d as f64));
    let mut total = 0.0;
    system.ratio_classes().walk(budget, |len, mult| {
        let scale = mult * len.powi(d);
        if len * g <= eps {
            total += scale * saturated;
            false
        } else {
            total += scale * generator.inner_volume(eps / len);
            true
        }
    })?;
    Ok(total)
}

/// `(1 / ln(hi/lo)) int_lo^hi eps^{-(d-alpha)} v(eps) d eps / eps` by
/// Simpson's rule in `ln eps`.
pub fn log_average<F>(v: F, d: f64, alpha: f64, lo: f64, hi: f64, quad_points: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput(format!(
            "need 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut failure = None;
    let integral = simpson(
        |t| {
            let eps = t.exp();
            match v(eps) {
                Ok(x) => x * eps.powf(alpha - d),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        a,
        b,
        quad_points,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(integral / (b - a)),
    }
}

/// Average content `(1 / ln b) int_{1/b}^1 eps^{-(d-D)} V(T, eps) d eps / eps`.
pub fn average_content_oracle(
    system: &IfsSystem,
    generator: &MonophaseGenerator,
    dimension: f64,
    b: f64,
    quad_points: usize,
) -> Result<f64> {
    if !(b > 1.0) {
        return Err(Error::InvalidInput(format!("b must exceed 1, got {b}")));
    }
    let d = system.ambient_dim() as f64;
    log_average(
        |e| direct_tiling_volume(system, generator, e, DEFAULT_NODE_BUDGET),
        d,
        dimension,
        1.0 / b,
        1.0,
        quad_points,
    )
}

/// The same average over `[g/b, g]` with the integer-dimension terms
/// `kappa_k zeta_L(k) eps^{d-k}` removed first. These terms vanish in the limit
/// but dominate the `1/ln b` convergence of the plain average.
pub fn compensated_average_content(
    system: &IfsSystem,
    generator: &MonophaseGenerator,
    dimension: f64,
    b: f64,
    quad_points: usize,
) -> Result<f64> {
    if !(b > 1.0) {
        return Err(Error::InvalidInput(format!("b must exceed 1, got {b}")));
    }
    let d = system.ambient_dim();
    let c_int: Vec<f64> = (0..d)
        .map(|k| Ok(generator.kappa()[k] * zeta_real(system, k as f64)?))
        .collect::<Result<_>>()?;
    let g = generator.inradius();
    log_average(
        |e| {
            let v = direct_tiling_volume(system, generator, e, DEFAULT_NODE_BUDGET)?;
            let ints: f64 = c_int
                .iter()
                .enumerate()
                .map(|(k, c)| c * e.powi((d - k) as i32))
                .sum();
            Ok(v - ints)
        },
        d as f64,
        dimension,
        g / b,
        g,
        quad_points,
    )
}
