//! Exhaustive reference decision: enumerate semiregular subgroups of Aut(G),
//! build each quotient and compare it with H.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::canon::{canonical_form, find_isomorphism};
use crate::covering::{build_quotient, verify_certificate, Certificate};
use crate::multigraph::Multigraph;
use crate::perm::{semiregular_subgroups_of_order, PermError, PermGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search exceeds the budget of {0}")]
    TooLarge(usize),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<PermError> for OracleError {
    fn from(e: PermError) -> Self {
        match e {
            PermError::TooLarge(b) => OracleError::TooLarge(b),
            other => OracleError::Internal(other.to_string()),
        }
    }
}

/// The quotient order k = v(G)/v(H), if integral.
pub fn quotient_order(g: &Multigraph, h: &Multigraph) -> Option<usize> {
    let (n, m) = (g.num_vertices(), h.num_vertices());
    (m > 0 && n % m == 0 && g.num_darts() == (n / m) * h.num_darts()).then_some(n / m)
}

fn certificate_for(g: &Multigraph, h: &Multigraph, grp: &PermGroup) -> Option<Certificate> {
    let (q, _) = build_quotient(g, grp).ok()?;
    let (vm, dm) = find_isomorphism(&q, None, h, None)?;
    Some(Certificate::assemble(g, grp, &q, h, &vm, &dm))
}

/// A certificate that G regularly covers H, or `None`.
pub fn oracle_regular_cover(g: &Multigraph, h: &Multigraph, budget: usize) -> Result<Option<Certificate>, OracleError> {
    let Some(k) = quotient_order(g, h) else { return Ok(None) };
    if !g.is_connected() || !h.is_connected() {
        return Ok(None);
    }
    let subs = semiregular_subgroups_of_order(g, k, budget)?;
    let found = subs.par_iter().find_map_first(|s| certificate_for(g, h, s));
    if let Some(c) = &found {
        verify_certificate(g, h, c).map_err(|e| OracleError::Internal(e.to_string()))?;
    }
    Ok(found)
}

/// Pairwise non-isomorphic quotients G/Γ over semiregular Γ of order k.
pub fn enumerate_quotients_of_order(g: &Multigraph, k: usize, budget: usize) -> Result<Vec<Multigraph>, OracleError> {
    if k == 0 || g.num_vertices() % k != 0 {
        return Ok(Vec::new());
    }
    let subs = semiregular_subgroups_of_order(g, k, budget)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in &subs {
        let (q, _) = build_quotient(g, s).map_err(|e| OracleError::Internal(e.to_string()))?;
        if seen.insert(canonical_form(&q, None).cert) {
            out.push(q);
        }
    }
    Ok(out)
}

/// All quotient classes, keyed by k (k = 1 gives G itself).
pub fn enumerate_quotients(g: &Multigraph, budget: usize) -> Result<BTreeMap<usize, Vec<Multigraph>>, OracleError> {
    let mut out = BTreeMap::new();
    for k in 1..=g.num_vertices().max(1) {
        if g.num_vertices() % k != 0 {
            continue;
        }
        let qs = enumerate_quotients_of_order(g, k, budget)?;
        if !qs.is_empty() {
            out.insert(k, qs);
        }
    }
    Ok(out)
}
