//! Assembly of the deFBA constraint blocks for one kcat assignment.
//!
//! The enzyme capacity constraint bounds the weighted sum of absolute fluxes
//! catalyzed by one enzyme by that enzyme's amount. The absolute values are
//! linearized by enumerating every sign combination of the reversible
//! reactions in the enzyme's catalysis set, so an enzyme with `m` reversible
//! reactions contributes `2^m` row pairs (H_c row, H_E row). Irreversible
//! reactions always enter with the forward constant.
//!
//! Capacity coefficients for exchange and metabolic fluxes are multiplied by
//! alpha because the right-hand side (the enzyme amount) carries the scaled
//! semantics while those fluxes stay unscaled.

use crate::error::ConstraintError;
use crate::model::{KcatAssignment, ReactionKind, ScaledModel};
use crate::sparse::SparseMat;

/// Hard cap on the per-enzyme sign-combination expansion.
pub const MAX_REVERSIBLE_PER_ENZYME: usize = 16;

/// All constraint blocks of one parameter scenario, over the scaled flux and
/// amount vectors.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    /// Equality rows over fluxes: internal species balance.
    pub qssa: SparseMat,
    /// Capacity rows over fluxes (H~_c) ...
    pub capacity_flux: SparseMat,
    /// ... paired with rows over macromolecule amounts (H_E);
    /// the constraint is `capacity_flux * V <= capacity_enzyme * P`.
    pub capacity_enzyme: SparseMat,
    /// Macromolecule index (position in `scaled.macromolecules`) owning each
    /// capacity row.
    pub capacity_owner: Vec<usize>,
    /// Composition rows over macromolecule amounts: `composition * P <= 0`.
    pub composition: SparseMat,
    /// Bounds on the scaled flux vector.
    pub flux_lb: Vec<f64>,
    pub flux_ub: Vec<f64>,
}

impl ConstraintSystem {
    pub fn n_rxn(&self) -> usize {
        self.qssa.ncols()
    }
}

/// Builds the capacity pair (H~_c, H_E) for the given kcat assignment.
///
/// Rows are ordered by catalyst (model species order), then by binary
/// enumeration of the sign combinations, bit 0 owned by the first reversible
/// reaction in reaction order (bit value 0 = forward sign).
pub fn build_capacity(
    scaled: &ScaledModel,
    kcats: &KcatAssignment,
) -> Result<(SparseMat, SparseMat, Vec<usize>), ConstraintError> {
    let model = &scaled.model;
    let n_rx = model.reactions.len();
    let n_macro = scaled.macromolecules.len();
    let reaction_idx = model.reaction_index();

    // Catalysis sets grouped per enzyme, ordered by the enzyme's position in
    // the species list and by reaction position within each set.
    let species_idx = model.species_index();
    let mut sets: Vec<(usize, Vec<usize>)> = Vec::new();
    for (mpos, &si) in scaled.macromolecules.iter().enumerate() {
        let id = model.species[si].id.as_str();
        let mut rxns: Vec<usize> = model
            .catalysis
            .iter()
            .filter(|c| c.enzyme_id == id)
            .map(|c| reaction_idx[c.reaction_id.as_str()])
            .collect();
        rxns.sort_unstable();
        if !rxns.is_empty() {
            sets.push((mpos, rxns));
        }
    }
    debug_assert!(species_idx.len() >= n_macro);

    let mut h_c = SparseMat::new(n_rx);
    let mut h_e = SparseMat::new(n_macro);
    let mut owner = Vec::new();

    for (mpos, rxns) in sets {
        let reversible: Vec<usize> = rxns
            .iter()
            .copied()
            .filter(|&rj| model.reactions[rj].reversible)
            .collect();
        if reversible.len() > MAX_REVERSIBLE_PER_ENZYME {
            let enzyme = model.species[scaled.macromolecules[mpos]].id.clone();
            return Err(ConstraintError::TooManyReversible { enzyme, n_rev: reversible.len() });
        }
        let combos: usize = 1 << reversible.len();
        for combo in 0..combos {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(rxns.len());
            for &rj in &rxns {
                let r = &model.reactions[rj];
                let (kf, kb) = kcats
                    .get(r.id.as_str())
                    .copied()
                    .ok_or_else(|| ConstraintError::NonpositiveKcat(r.id.clone()))?;
                if kf <= 0.0 {
                    return Err(ConstraintError::NonpositiveKcat(r.id.clone()));
                }
                let coeff = if r.reversible {
                    let bit = reversible.iter().position(|&x| x == rj).unwrap();
                    if combo >> bit & 1 == 0 {
                        1.0 / kf
                    } else {
                        let kb = kb.ok_or_else(|| ConstraintError::MissingBackwardKcat(r.id.clone()))?;
                        if kb <= 0.0 {
                            return Err(ConstraintError::NonpositiveKcat(r.id.clone()));
                        }
                        -1.0 / kb
                    }
                } else {
                    1.0 / kf
                };
                let scale = match r.kind {
                    ReactionKind::Biomass => 1.0,
                    ReactionKind::Exchange | ReactionKind::Metabolic => scaled.alpha,
                };
                row.push((rj, coeff * scale));
            }
            h_c.push_row(row);
            h_e.push_row([(mpos, 1.0)]);
            owner.push(mpos);
        }
    }

    Ok((h_c, h_e, owner))
}

/// The quasi-steady-state block: one equality row per internal species.
pub fn build_qssa(scaled: &ScaledModel) -> SparseMat {
    scaled.qssa.clone()
}

/// Composition rows; for a rule with fraction psi on macromolecule s the row
/// reads `(psi / b_s) * b^T - e_s^T`, i.e. the weight held in s must be at
/// least the fraction psi of total biomass. Dividing by b_s keeps the
/// diagonal entry at `psi - 1` and lets the psi -> 0 limit degenerate to
/// plain positivity of P_s.
pub fn build_composition(scaled: &ScaledModel) -> SparseMat {
    let n_macro = scaled.macromolecules.len();
    let mut h_b = SparseMat::new(n_macro);
    for rule in &scaled.model.composition {
        let mpos = scaled
            .macromolecules
            .iter()
            .position(|&si| scaled.model.species[si].id == rule.macromolecule_id)
            .expect("validated composition rule");
        let b_s = scaled.weights[mpos];
        let psi = rule.min_fraction;
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(n_macro);
        for j in 0..n_macro {
            let mut v = psi * scaled.weights[j] / b_s;
            if j == mpos {
                v -= 1.0;
            }
            row.push((j, v));
        }
        h_b.push_row(row);
    }
    h_b
}

/// Assembles every block for one kcat assignment. Only the capacity pair
/// depends on the kcats, so robust scenarios rebuild just that part.
pub fn assemble(
    scaled: &ScaledModel,
    kcats: &KcatAssignment,
) -> Result<ConstraintSystem, ConstraintError> {
    let (capacity_flux, capacity_enzyme, capacity_owner) = build_capacity(scaled, kcats)?;
    let bounds = scaled.scaled_flux_bounds();
    Ok(ConstraintSystem {
        qssa: build_qssa(scaled),
        capacity_flux,
        capacity_enzyme,
        capacity_owner,
        composition: build_composition(scaled),
        flux_lb: bounds.iter().map(|&(lo, _)| lo).collect(),
        flux_ub: bounds.iter().map(|&(_, hi)| hi).collect(),
    })
}

/// Direct evaluation of the absolute-value capacity constraint, used as the
/// brute-force oracle for the sign-combination rows.
pub fn capacity_holds_absolute(
    scaled: &ScaledModel,
    kcats: &KcatAssignment,
    fluxes_scaled: &[f64],
    amounts_scaled: &[f64],
    tol: f64,
) -> bool {
    let model = &scaled.model;
    let reaction_idx = model.reaction_index();
    for (mpos, &si) in scaled.macromolecules.iter().enumerate() {
        let id = model.species[si].id.as_str();
        let mut lhs = 0.0;
        let mut any = false;
        for c in model.catalysis.iter().filter(|c| c.enzyme_id == id) {
            any = true;
            let rj = reaction_idx[c.reaction_id.as_str()];
            let r = &model.reactions[rj];
            let (kf, kb) = kcats[&r.id];
            let v = fluxes_scaled[rj];
            let k = if v >= 0.0 { kf } else { kb.unwrap_or(kf) };
            let scale = match r.kind {
                ReactionKind::Biomass => 1.0,
                _ => scaled.alpha,
            };
            lhs += scale * v.abs() / k;
        }
        if any && lhs > amounts_scaled[mpos] + tol {
            return false;
        }
    }
    true
}
