//! Standard examples: Sierpinski gasket and carpet, the Cantor string and
//! the nonlattice string with ratios 1/2 and 1/3.

use crate::error::Result;
use crate::generator::MonophaseGenerator;
use crate::ifs_zeta::IfsSystem;
use crate::oracle::PlanarIfs;

#[derive(Debug, Clone)]
pub struct Example {
    pub name: &'static str,
    pub system: IfsSystem,
    pub generator: MonophaseGenerator,
    pub planar: Option<PlanarIfs>,
}

pub fn gasket() -> Result<Example> {
    let system = IfsSystem::from_rationals(&[(1, 2); 3], 2)?;
    let generator = MonophaseGenerator::from_inscribed_polytope(
        2,
        3f64.sqrt() / 16.0,
        1.0 / (4.0 * 3f64.sqrt()),
    )?;
    let planar = PlanarIfs::sierpinski_gasket(&system)?;
    Ok(Example {
        name: "gasket",
        system,
        generator,
        planar: Some(planar),
    })
}

pub fn carpet() -> Result<Example> {
    let system = IfsSystem::from_rationals(&[(1, 3); 8], 2)?;
    let generator = MonophaseGenerator::from_inscribed_polytope(2, 1.0 / 9.0, 1.0 / 6.0)?;
    let planar = PlanarIfs::sierpinski_carpet(&system)?;
    Ok(Example {
        name: "carpet",
        system,
        generator,
        planar: Some(planar),
    })
}

pub fn cantor() -> Result<Example> {
    let system = IfsSystem::from_rationals(&[(1, 3); 2], 1)?;
    let generator = MonophaseGenerator::from_coefficients(1, 1.0 / 6.0, &[2.0])?;
    Ok(Example {
        name: "cantor",
        system,
        generator,
        planar: None,
    })
}

/// Maps `x/2` and `1 - x/3` on `[0, 1]`; the gap `(1/2, 2/3)` generates.
pub fn half_third() -> Result<Example> {
    let system = IfsSystem::from_rationals(&[(1, 2), (1, 3)], 1)?;
    let generator = MonophaseGenerator::from_coefficients(1, 1.0 / 12.0, &[2.0])?;
    Ok(Example {
        name: "half-third",
        system,
        generator,
        planar: None,
    })
}

pub fn by_name(name: &str) -> Option<Result<Example>> {
    match name {
        "gasket" => Some(gasket()),
        "carpet" => Some(carpet()),
        "cantor" => Some(cantor()),
        "half-third" => Some(half_third()),
        _ => None,
    }
}
