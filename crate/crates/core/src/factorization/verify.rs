//! Independent replay of a trace; nothing is shared with the engine beyond the
//! basic lattice types. The starting and final cones are solved from scratch,
//! the coordinates of `v` are carried exactly in between.

use serde::{Deserialize, Serialize};

use super::{Containment, FactorizationTrace};
use crate::error::{Error, Result};
use crate::formal_real::{FormalReal, Sign};
use crate::lattice::{
    check_unimodular, cone_coordinates, LatticeVector, Side, TraceStep, UnimodularCone, ValuationVector,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub side: Side,
    /// Index into that side's step list; `None` for the starting or final cone.
    pub step: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub sigma_steps: usize,
    pub tau_steps: usize,
    pub violation: Option<Violation>,
}

/// Applies the steps to `cone` checking only their combinatorial validity.
pub fn replay(cone: &UnimodularCone, steps: &[TraceStep]) -> Result<UnimodularCone> {
    let mut gens = cone.generators().to_vec();
    for step in steps {
        apply(&mut gens, step).map_err(Error::RelationBroken)?;
    }
    UnimodularCone::new(gens)
}

fn apply(gens: &mut Vec<LatticeVector>, step: &TraceStep) -> std::result::Result<(), String> {
    let n = gens.len();
    match step {
        TraceStep::Star(rec) => {
            let (i, j) = rec.pair;
            if i >= n || j >= n || i == j {
                return Err(format!("invalid pair ({i}, {j})"));
            }
            if rec.replaced != i && rec.replaced != j {
                return Err(format!("replaced index {} is not in the pair", rec.replaced));
            }
            if rec.new_generator != gens[i].add(&gens[j]) {
                return Err("generator mismatch".into());
            }
            gens[rec.replaced] = rec.new_generator.clone();
        }
        TraceStep::Permute { perm } => {
            let mut seen = vec![false; n];
            if perm.len() != n || perm.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
                return Err("invalid permutation".into());
            }
            *gens = perm.iter().map(|&k| gens[k].clone()).collect();
        }
    }
    Ok(())
}

fn coordinate_ok(c: &FormalReal, mode: Containment) -> std::result::Result<(), String> {
    let sign = c.sign().map_err(|e| e.to_string())?;
    let bad = match mode {
        Containment::Strict => sign != Sign::Positive,
        Containment::Relaxed => sign == Sign::Negative,
    };
    if bad {
        return Err(format!("valuation coordinate is {c}"));
    }
    Ok(())
}

/// Determinant and a fresh solve for the coordinates of `v`.
fn check_cone(
    gens: &[LatticeVector],
    v: &ValuationVector,
    mode: Containment,
) -> std::result::Result<Vec<FormalReal>, String> {
    match check_unimodular(gens) {
        Ok(_) => {}
        Err(Error::SingularCone { det }) => return Err(format!("determinant {det}")),
        Err(e) => return Err(e.to_string()),
    }
    let cone = UnimodularCone::new(gens.to_vec()).map_err(|e| e.to_string())?;
    let coords = cone_coordinates(v, &cone).map_err(|e| e.to_string())?.into_coords();
    for (k, c) in coords.iter().enumerate() {
        coordinate_ok(c, mode).map_err(|r| format!("{r} at index {k}"))?;
    }
    Ok(coords)
}

fn check_side(
    side: Side,
    start: &UnimodularCone,
    steps: &[TraceStep],
    v: &ValuationVector,
    trace: &FactorizationTrace,
) -> Option<Violation> {
    let fail = |step, reason| Some(Violation { side, step, reason });
    if start.dim() != v.dim() {
        return fail(None, format!("dimension {} against valuation dimension {}", start.dim(), v.dim()));
    }
    let mut gens = start.generators().to_vec();
    let mut coords = match check_cone(&gens, v, trace.mode) {
        Ok(c) => c,
        Err(reason) => return fail(None, reason),
    };
    // Replacing g_r by g_r + g_o keeps the determinant and changes only the
    // coordinate of g_o: v = (c_o - c_r) g_o + c_r (g_o + g_r).
    for (k, step) in steps.iter().enumerate() {
        if let TraceStep::Star(rec) = step {
            if rec.side != side {
                return fail(Some(k), format!("step recorded for {}", rec.side));
            }
        }
        if let Err(reason) = apply(&mut gens, step) {
            return fail(Some(k), reason);
        }
        match step {
            TraceStep::Star(rec) => {
                let r = rec.replaced;
                let o = if rec.pair.0 == r { rec.pair.1 } else { rec.pair.0 };
                coords[o] = match coords[o].try_sub(&coords[r]) {
                    Ok(c) => c,
                    Err(e) => return fail(Some(k), e.to_string()),
                };
                if let Err(reason) = coordinate_ok(&coords[o], trace.mode) {
                    return fail(Some(k), format!("{reason} at index {o}"));
                }
            }
            TraceStep::Permute { perm } => coords = perm.iter().map(|&p| coords[p].clone()).collect(),
        }
    }
    match check_cone(&gens, v, trace.mode) {
        Ok(fresh) if fresh == coords => {}
        Ok(_) => return fail(None, "carried coordinates disagree with a fresh solve".into()),
        Err(reason) => return fail(None, reason),
    }
    if gens != trace.final_cone.generators() {
        return fail(None, "final cone mismatch".into());
    }
    None
}

/// Replays both sides of `trace`, checking every step: the new generator is the
/// sum of the named pair, the cone stays unimodular, and `v` stays inside (in the
/// interior, or the closed cone for relaxed traces). Both sides must end at the
/// final cone. Never fails; problems are reported.
pub fn verify_trace(
    sigma: &UnimodularCone,
    tau: &UnimodularCone,
    v: &ValuationVector,
    trace: &FactorizationTrace,
) -> VerifyReport {
    let violation = check_side(Side::Sigma, sigma, &trace.sigma_steps, v, trace)
        .or_else(|| check_side(Side::Tau, tau, &trace.tau_steps, v, trace));
    VerifyReport {
        ok: violation.is_none(),
        sigma_steps: FactorizationTrace::star_count(&trace.sigma_steps),
        tau_steps: FactorizationTrace::star_count(&trace.tau_steps),
        violation,
    }
}
