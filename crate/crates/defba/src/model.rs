//! Metabolic-network data model, validation, and the macromolecule scaling
//! transform.
//!
//! A model partitions species into external nutrients, internal metabolites
//! (kept at quasi-steady state) and macromolecules, and reactions into
//! exchange, metabolic and biomass classes. Macromolecule amounts and biomass
//! fluxes are rescaled by the factor `alpha` to keep the dynamics well
//! conditioned; [`scale`] produces the working representation every other
//! module consumes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::sparse::SparseMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpeciesKind {
    External,
    Internal,
    Macromolecule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReactionKind {
    Exchange,
    Metabolic,
    Biomass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Species {
    pub id: String,
    pub kind: SpeciesKind,
    /// Molecular weight in g/mol; required for macromolecules (the entry of b).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub molecular_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_enzyme: Option<bool>,
    /// Constant inflow for external species, mol per time unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflow: Option<f64>,
    /// First-order outflow rate for external species, 1 per time unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilution: Option<f64>,
    /// Initial amount in mol (unscaled, also for macromolecules). Defaults to 0.
    #[serde(default)]
    pub initial_amount: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reaction {
    pub id: String,
    pub kind: ReactionKind,
    /// species id -> coefficient, negative = consumed.
    pub stoichiometry: BTreeMap<String, f64>,
    #[serde(default)]
    pub reversible: bool,
    /// Flux bounds in unscaled mol/time; missing means unbounded
    /// (0 for the lower bound of an irreversible reaction).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
}

impl Reaction {
    /// Effective bounds with defaults resolved.
    pub fn bounds(&self) -> (f64, f64) {
        let lo = self.lower_bound.unwrap_or(if self.reversible {
            f64::NEG_INFINITY
        } else {
            0.0
        });
        let hi = self.upper_bound.unwrap_or(f64::INFINITY);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalysisRule {
    /// Catalyst species; any macromolecule may act as a catalyst.
    pub enzyme_id: String,
    pub reaction_id: String,
    pub kcat_forward: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kcat_backward: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositionRule {
    pub macromolecule_id: String,
    /// Minimal fraction of total biomass (by weight) held in the macromolecule.
    pub min_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Units {
    /// Time unit label, "h" or "min". Recorded into outputs, never converted.
    pub time: String,
}

impl Default for Units {
    fn default() -> Self {
        Units { time: "h".to_string() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetabolicModel {
    pub species: Vec<Species>,
    pub reactions: Vec<Reaction>,
    #[serde(default)]
    pub catalysis: Vec<CatalysisRule>,
    #[serde(default)]
    pub composition: Vec<CompositionRule>,
    pub alpha: f64,
    #[serde(default)]
    pub units: Units,
}

/// One validation finding; an empty list from [`validate`] means the model is
/// well formed.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub rule: String,
    pub subject: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}: {}", self.rule, self.subject, self.message)
    }
}

fn diag(list: &mut Vec<Diagnostic>, rule: &str, subject: &str, message: String) {
    list.push(Diagnostic {
        rule: rule.to_string(),
        subject: subject.to_string(),
        message,
    });
}

impl MetabolicModel {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| ModelError::Io {
            path: path.as_ref().display().to_string(),
            source: e,
        })?;
        let model: MetabolicModel = serde_json::from_str(&text)?;
        Ok(model)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn species_index(&self) -> HashMap<&str, usize> {
        self.species
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect()
    }

    pub fn reaction_index(&self) -> HashMap<&str, usize> {
        self.reactions
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.as_str(), i))
            .collect()
    }
}

/// Checks every structural invariant of the model and returns one diagnostic
/// per violation. An empty result is the precondition for [`scale`].
pub fn validate(model: &MetabolicModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    // Unique ids and resolvable references.
    let mut seen = HashSet::new();
    for s in &model.species {
        if !seen.insert(s.id.as_str()) {
            diag(&mut out, "duplicate-id", &s.id, "species id appears more than once".into());
        }
    }
    let mut seen = HashSet::new();
    for r in &model.reactions {
        if !seen.insert(r.id.as_str()) {
            diag(&mut out, "duplicate-id", &r.id, "reaction id appears more than once".into());
        }
    }
    let species_idx = model.species_index();
    let reaction_idx = model.reaction_index();

    for s in &model.species {
        match s.kind {
            SpeciesKind::Macromolecule => {
                match s.molecular_weight {
                    Some(w) if w > 0.0 => {}
                    Some(_) => diag(
                        &mut out,
                        "molecular-weight-positive",
                        &s.id,
                        "molecular_weight must be > 0".into(),
                    ),
                    None => diag(
                        &mut out,
                        "molecular-weight-required",
                        &s.id,
                        "macromolecule is missing molecular_weight".into(),
                    ),
                }
                if s.inflow.is_some() || s.dilution.is_some() {
                    diag(
                        &mut out,
                        "inflow-external-only",
                        &s.id,
                        "inflow/dilution are only valid on external species".into(),
                    );
                }
            }
            _ => {
                if s.molecular_weight.is_some() {
                    diag(
                        &mut out,
                        "molecular-weight-macromolecule-only",
                        &s.id,
                        "molecular_weight is only valid on macromolecules".into(),
                    );
                }
                if s.is_enzyme.is_some() {
                    diag(
                        &mut out,
                        "is-enzyme-macromolecule-only",
                        &s.id,
                        "is_enzyme is only valid on macromolecules".into(),
                    );
                }
                if s.kind == SpeciesKind::Internal && (s.inflow.is_some() || s.dilution.is_some()) {
                    diag(
                        &mut out,
                        "inflow-external-only",
                        &s.id,
                        "inflow/dilution are only valid on external species".into(),
                    );
                }
            }
        }
        if s.inflow.unwrap_or(0.0) < 0.0 {
            diag(&mut out, "inflow-nonnegative", &s.id, "inflow must be >= 0".into());
        }
        if s.dilution.unwrap_or(0.0) < 0.0 {
            diag(&mut out, "dilution-nonnegative", &s.id, "dilution must be >= 0".into());
        }
        if s.initial_amount < 0.0 {
            diag(&mut out, "initial-amount-nonnegative", &s.id, "initial_amount must be >= 0".into());
        }
    }

    for r in &model.reactions {
        let (lo, hi) = r.bounds();
        if lo > hi {
            diag(&mut out, "bounds-ordered", &r.id, format!("lower_bound {} > upper_bound {}", lo, hi));
        }
        if lo > 0.0 || hi < 0.0 {
            diag(
                &mut out,
                "bounds-contain-zero",
                &r.id,
                "flux bounds must contain 0 so the stationary solution stays feasible".into(),
            );
        }
        if !r.reversible && lo < 0.0 {
            diag(
                &mut out,
                "irreversible-nonnegative",
                &r.id,
                "irreversible reaction must have lower_bound >= 0".into(),
            );
        }

        let mut touches_external = false;
        let mut produces_macro = false;
        let mut consumes_macro = false;
        for (sid, &coeff) in &r.stoichiometry {
            let Some(&si) = species_idx.get(sid.as_str()) else {
                diag(&mut out, "unknown-species", &r.id, format!("stoichiometry references unknown species '{}'", sid));
                continue;
            };
            if coeff == 0.0 {
                diag(&mut out, "zero-stoichiometry", &r.id, format!("species '{}' has zero coefficient", sid));
            }
            match model.species[si].kind {
                SpeciesKind::External => touches_external = true,
                SpeciesKind::Macromolecule => {
                    if coeff > 0.0 {
                        produces_macro = true;
                    } else {
                        consumes_macro = true;
                    }
                }
                SpeciesKind::Internal => {}
            }
        }
        match r.kind {
            ReactionKind::Exchange => {
                if !touches_external {
                    diag(&mut out, "exchange-touches-external", &r.id, "exchange reaction touches no external species".into());
                }
                if produces_macro || consumes_macro {
                    diag(&mut out, "macromolecule-rows-biomass-only", &r.id, "non-biomass reaction touches a macromolecule".into());
                }
            }
            ReactionKind::Metabolic => {
                if touches_external {
                    diag(&mut out, "metabolic-no-external", &r.id, "metabolic reaction touches an external species".into());
                }
                if produces_macro || consumes_macro {
                    diag(&mut out, "macromolecule-rows-biomass-only", &r.id, "non-biomass reaction touches a macromolecule".into());
                }
            }
            ReactionKind::Biomass => {
                if !produces_macro && !consumes_macro {
                    diag(&mut out, "biomass-touches-macromolecule", &r.id, "biomass reaction neither produces nor consumes a macromolecule".into());
                }
            }
        }
    }

    // Catalysis: positive constants, backward constant exactly for reversible
    // reactions, and a unique catalyst per reaction. Several reactions per
    // enzyme are fine; several enzymes per reaction (isozymes) are rejected,
    // since the capacity rows assume one catalyst per flux.
    let mut catalyzed: HashMap<&str, &str> = HashMap::new();
    for c in &model.catalysis {
        match species_idx.get(c.enzyme_id.as_str()) {
            None => diag(&mut out, "unknown-species", &c.enzyme_id, "catalysis rule references unknown enzyme".into()),
            Some(&si) => {
                if model.species[si].kind != SpeciesKind::Macromolecule {
                    diag(&mut out, "catalyst-macromolecule", &c.enzyme_id, "catalyst must be a macromolecule".into());
                }
            }
        }
        let Some(&ri) = reaction_idx.get(c.reaction_id.as_str()) else {
            diag(&mut out, "unknown-reaction", &c.reaction_id, "catalysis rule references unknown reaction".into());
            continue;
        };
        if c.kcat_forward <= 0.0 {
            diag(&mut out, "kcat-positive", &c.reaction_id, "kcat_forward must be > 0".into());
        }
        let reversible = model.reactions[ri].reversible;
        match (reversible, c.kcat_backward) {
            (true, None) => diag(&mut out, "kcat-backward-required", &c.reaction_id, "reversible reaction needs kcat_backward".into()),
            (true, Some(k)) if k <= 0.0 => diag(&mut out, "kcat-positive", &c.reaction_id, "kcat_backward must be > 0".into()),
            (false, Some(_)) => diag(&mut out, "kcat-backward-irreversible", &c.reaction_id, "irreversible reaction must not have kcat_backward".into()),
            _ => {}
        }
        if let Some(prev) = catalyzed.insert(c.reaction_id.as_str(), c.enzyme_id.as_str()) {
            diag(
                &mut out,
                "unique-catalyst",
                &c.reaction_id,
                format!("reaction catalyzed by both '{}' and '{}'; isozymes are not supported", prev, c.enzyme_id),
            );
        }
    }

    let mut psi_sum = 0.0;
    let mut comp_seen = HashSet::new();
    for rule in &model.composition {
        match species_idx.get(rule.macromolecule_id.as_str()) {
            None => diag(&mut out, "unknown-species", &rule.macromolecule_id, "composition rule references unknown species".into()),
            Some(&si) => {
                if model.species[si].kind != SpeciesKind::Macromolecule {
                    diag(&mut out, "composition-macromolecule", &rule.macromolecule_id, "composition rule target must be a macromolecule".into());
                }
            }
        }
        if !(rule.min_fraction > 0.0 && rule.min_fraction < 1.0) {
            diag(&mut out, "composition-fraction-range", &rule.macromolecule_id, "composition fraction out of (0,1)".into());
        }
        if !comp_seen.insert(rule.macromolecule_id.as_str()) {
            diag(&mut out, "composition-duplicate", &rule.macromolecule_id, "more than one composition rule for this macromolecule".into());
        }
        psi_sum += rule.min_fraction;
    }
    if psi_sum > 1.0 {
        diag(&mut out, "composition-sum", "composition", format!("composition fractions sum > 1 ({})", psi_sum));
    }

    if !(model.alpha >= 1.0) {
        diag(&mut out, "alpha-range", "alpha", format!("alpha must be >= 1, got {}", model.alpha));
    }

    out
}

/// Working representation of a validated model with the alpha scaling applied:
/// macromolecule amounts and biomass fluxes carry the scaled semantics, the
/// metabolite rows of biomass reactions are divided by alpha, and index maps
/// between the species/reaction lists and the matrix blocks are precomputed.
#[derive(Debug, Clone)]
pub struct ScaledModel {
    pub model: MetabolicModel,
    pub alpha: f64,
    /// Species indices (into `model.species`) by class, in file order.
    pub external: Vec<usize>,
    pub internal: Vec<usize>,
    pub macromolecules: Vec<usize>,
    /// Macromolecule weights b, one per entry of `macromolecules`.
    pub weights: Vec<f64>,
    /// Inflow u and dilution rates, one per entry of `external`.
    pub inflow: Vec<f64>,
    pub dilution: Vec<f64>,
    /// State dynamics: rows = external then macromolecule species, columns =
    /// reactions in file order, biomass columns of external rows divided by
    /// alpha, macromolecule rows unchanged by the scaling.
    pub dynamics: SparseMat,
    /// Quasi-steady-state block: rows = internal species, biomass columns
    /// divided by alpha.
    pub qssa: SparseMat,
    /// Nominal kcat assignment keyed by reaction id.
    pub nominal_kcats: KcatAssignment,
}

/// kcat values per catalyzed reaction: (forward, optional backward).
pub type KcatAssignment = BTreeMap<String, (f64, Option<f64>)>;

impl ScaledModel {
    pub fn n_ext(&self) -> usize {
        self.external.len()
    }

    pub fn n_macro(&self) -> usize {
        self.macromolecules.len()
    }

    pub fn n_rxn(&self) -> usize {
        self.model.reactions.len()
    }

    /// Scaled total biomass b^T P-tilde.
    pub fn biomass(&self, p_scaled: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(p_scaled)
            .map(|(b, p)| b * p)
            .sum()
    }

    /// Initial state (Y_0, P-tilde_0) from the model's initial amounts;
    /// macromolecule amounts are multiplied by alpha.
    pub fn initial_state(&self) -> (Vec<f64>, Vec<f64>) {
        let y0 = self
            .external
            .iter()
            .map(|&i| self.model.species[i].initial_amount)
            .collect();
        let p0 = self
            .macromolecules
            .iter()
            .map(|&i| self.model.species[i].initial_amount * self.alpha)
            .collect();
        (y0, p0)
    }

    /// Scale an unscaled macromolecule vector.
    pub fn scale_amounts(&self, p_unscaled: &[f64]) -> Vec<f64> {
        p_unscaled.iter().map(|p| p * self.alpha).collect()
    }

    /// Flux bounds on the scaled flux vector; biomass bounds are multiplied
    /// by alpha since the file declares them for unscaled fluxes.
    pub fn scaled_flux_bounds(&self) -> Vec<(f64, f64)> {
        self.model
            .reactions
            .iter()
            .map(|r| {
                let (lo, hi) = r.bounds();
                if r.kind == ReactionKind::Biomass {
                    (lo * self.alpha, hi * self.alpha)
                } else {
                    (lo, hi)
                }
            })
            .collect()
    }

    /// Reverses the scaling transform, reproducing the original model's
    /// stoichiometric rows (external, internal, macromolecule) in file order.
    pub fn unscale_matrix(&self) -> SparseMat {
        let n_sp = self.model.species.len();
        let n_rx = self.model.reactions.len();
        let mut full = SparseMat::with_rows(n_sp, n_rx);
        let ext_pos: HashMap<usize, usize> =
            self.external.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let int_pos: HashMap<usize, usize> =
            self.internal.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mac_pos: HashMap<usize, usize> =
            self.macromolecules.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        for (si, sp) in self.model.species.iter().enumerate() {
            for rj in 0..n_rx {
                let is_biomass = self.model.reactions[rj].kind == ReactionKind::Biomass;
                let v = match sp.kind {
                    SpeciesKind::External => {
                        let row = ext_pos[&si];
                        let c = self.dynamics.get(row, rj);
                        if is_biomass {
                            c * self.alpha
                        } else {
                            c
                        }
                    }
                    SpeciesKind::Internal => {
                        let row = int_pos[&si];
                        let c = self.qssa.get(row, rj);
                        if is_biomass {
                            c * self.alpha
                        } else {
                            c
                        }
                    }
                    SpeciesKind::Macromolecule => {
                        // dP/dt = V_p exactly when dP~/dt = V~_p; entries unchanged.
                        let row = mac_pos[&si] + self.external.len();
                        self.dynamics.get(row, rj)
                    }
                };
                if v != 0.0 {
                    full.set(si, rj, v);
                }
            }
        }
        full
    }
}

/// Applies the alpha scaling to a validated model.
pub fn scale(model: &MetabolicModel) -> Result<ScaledModel, ModelError> {
    let diagnostics = validate(model);
    if !diagnostics.is_empty() {
        return Err(ModelError::Validation(diagnostics));
    }

    let alpha = model.alpha;
    let mut external = Vec::new();
    let mut internal = Vec::new();
    let mut macromolecules = Vec::new();
    for (i, s) in model.species.iter().enumerate() {
        match s.kind {
            SpeciesKind::External => external.push(i),
            SpeciesKind::Internal => internal.push(i),
            SpeciesKind::Macromolecule => macromolecules.push(i),
        }
    }

    let species_idx = model.species_index();
    let n_rx = model.reactions.len();

    let mut dynamics = SparseMat::with_rows(external.len() + macromolecules.len(), n_rx);
    let mut qssa = SparseMat::with_rows(internal.len(), n_rx);

    for (rj, r) in model.reactions.iter().enumerate() {
        let biomass = r.kind == ReactionKind::Biomass;
        for (sid, &coeff) in &r.stoichiometry {
            let si = species_idx[sid.as_str()];
            match model.species[si].kind {
                SpeciesKind::External => {
                    let row = external.iter().position(|&e| e == si).unwrap();
                    let v = if biomass { coeff / alpha } else { coeff };
                    dynamics.set(row, rj, v);
                }
                SpeciesKind::Internal => {
                    let row = internal.iter().position(|&e| e == si).unwrap();
                    let v = if biomass { coeff / alpha } else { coeff };
                    qssa.set(row, rj, v);
                }
                SpeciesKind::Macromolecule => {
                    let row =
                        external.len() + macromolecules.iter().position(|&e| e == si).unwrap();
                    dynamics.set(row, rj, coeff);
                }
            }
        }
    }

    let weights = macromolecules
        .iter()
        .map(|&i| model.species[i].molecular_weight.unwrap())
        .collect();
    let inflow = external
        .iter()
        .map(|&i| model.species[i].inflow.unwrap_or(0.0))
        .collect();
    let dilution = external
        .iter()
        .map(|&i| model.species[i].dilution.unwrap_or(0.0))
        .collect();

    let mut nominal_kcats = KcatAssignment::new();
    for c in &model.catalysis {
        nominal_kcats.insert(c.reaction_id.clone(), (c.kcat_forward, c.kcat_backward));
    }

    Ok(ScaledModel {
        model: model.clone(),
        alpha,
        external,
        internal,
        macromolecules,
        weights,
        inflow,
        dilution,
        dynamics,
        qssa,
        nominal_kcats,
    })
}
