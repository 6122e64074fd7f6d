//! Selection of one member from a family of sweep results.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Energy and makespan of one pipeline result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome<T> {
    pub energy: T,
    pub makespan: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    /// Index of the minimum-energy baseline.
    pub baseline: usize,
    /// Index of the chosen family member.
    pub selected: usize,
    /// No family member had energy at or below the baseline's.
    pub fallback: bool,
}

fn min_index<T: Real>(items: &[Outcome<T>], better: impl Fn(&Outcome<T>, &Outcome<T>) -> bool) -> usize {
    let mut best = 0;
    for (i, o) in items.iter().enumerate().skip(1) {
        if better(o, &items[best]) {
            best = i;
        }
    }
    best
}

/// `E_best` is the least baseline energy; the selected family member has
/// the best makespan among those with energy `<= E_best`, or the least
/// energy when none qualifies. Ties keep the earlier index.
pub fn compare_rule<T: Real>(baselines: &[Outcome<T>], family: &[Outcome<T>]) -> Result<Selection> {
    if baselines.is_empty() || family.is_empty() {
        return Err(Error::InvalidParameter("comparison needs non-empty families".into()));
    }
    let baseline = min_index(baselines, |a, b| a.energy < b.energy);
    let e_best = baselines[baseline].energy;
    let mut selected: Option<usize> = None;
    for (i, o) in family.iter().enumerate() {
        if o.energy > e_best {
            continue;
        }
        match selected {
            Some(s)
                if family[s].makespan < o.makespan
                    || (family[s].makespan == o.makespan && family[s].energy <= o.energy) => {}
            _ => selected = Some(i),
        }
    }
    Ok(match selected {
        Some(selected) => Selection {
            baseline,
            selected,
            fallback: false,
        },
        None => Selection {
            baseline,
            selected: min_index(family, |a, b| a.energy < b.energy),
            fallback: true,
        },
    })
}
