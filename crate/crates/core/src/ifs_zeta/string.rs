//! The self-similar fractal string of word scaling ratios.

use crate::error::{Error, Result};

use super::{abscissa, moran_sum_real, IfsSystem};

/// Default cap on the number of enumerated lengths.
pub const DEFAULT_LENGTH_BUDGET: u64 = 100_000_000;

/// Lengths `r_w >= cutoff` enumerated explicitly, plus the roots of the
/// unexpanded subtrees whose moments are aggregated in closed form.
#[derive(Debug, Clone)]
pub struct FractalString {
    system: IfsSystem,
    cutoff: f64,
    /// `(length, multiplicity)`, strictly decreasing in length.
    enumerated: Vec<(f64, u64)>,
    /// Roots of the unexpanded subtrees as `(length, multiplicity)`.
    tail_roots: Vec<(f64, f64)>,
}

/// Breadth-first enumeration of all word lengths `r_w >= cutoff`.
pub fn string_lengths(system: &IfsSystem, cutoff: f64, budget: u64) -> Result<FractalString> {
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "cutoff {cutoff} outside (0, 1]"
        )));
    }
    let classes = system.ratio_classes();
    let mut enumerated: Vec<(f64, u64)> = Vec::new();
    let mut tail_roots = Vec::new();
    let mut count: u64 = 0;
    let mut over_budget = false;
    let walk = classes.walk(budget, |len, mult| {
        if over_budget {
            return false;
        }
        if len >= cutoff {
            count = count.saturating_add(mult as u64);
            if count > budget {
                over_budget = true;
                return false;
            }
            enumerated.push((len, mult as u64));
            true
        } else {
            tail_roots.push((len, mult));
            false
        }
    });
    if over_budget || matches!(walk, Err(Error::BudgetExceeded { .. })) {
        return Err(Error::CutoffTooSmall { cutoff, budget });
    }
    walk?;

    // Merge classes sharing a length (lattices) and sort descending.
    enumerated.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut merged: Vec<(f64, u64)> = Vec::with_capacity(enumerated.len());
    for (len, mult) in enumerated {
        match merged.last_mut() {
            Some(last) if last.0 == len => last.1 += mult,
            _ => merged.push((len, mult)),
        }
    }
    Ok(FractalString {
        system: system.clone(),
        cutoff,
        enumerated: merged,
        tail_roots,
    })
}

impl FractalString {
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Distinct enumerated lengths with multiplicities, descending.
    pub fn grouped(&self) -> &[(f64, u64)] {
        &self.enumerated
    }

    /// The enumerated lengths with repetition, nonincreasing.
    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.enumerated
            .iter()
            .flat_map(|&(len, mult)| std::iter::repeat_n(len, mult as usize))
    }

    pub fn len(&self) -> u64 {
        self.enumerated.iter().map(|e| e.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.enumerated.is_empty()
    }

    /// `sum over r_w < cutoff of r_w^t`, valid for `t > D`.
    ///
    /// Each unexpanded subtree rooted at `w` contributes
    /// `r_w^t / (1 - sum_n r_n^t)`.
    pub fn tail_moment(&self, t: f64) -> Result<f64> {
        let d = abscissa(&self.system);
        if t <= d {
            return Err(Error::InvalidInput(format!(
                "tail moment diverges for t = {t} <= D = {d}"
            )));
        }
        let geometric = 1.0 / (1.0 - moran_sum_real(&self.system, t));
        let roots: f64 = self
            .tail_roots
            .iter()
            .map(|&(len, mult)| mult * len.powf(t))
            .sum();
        Ok(roots * geometric)
    }
}
