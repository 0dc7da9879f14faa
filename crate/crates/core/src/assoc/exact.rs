//! Exact association oracles on explicit pmfs.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::JointPmf;
use crate::dominance::{decide, Dominance};
use crate::poset::{enumerate_upper_sets, is_monotone, DiscreteDistribution, ProductPoset, UpperSet};
use crate::{Error, Result};

/// Covariances within this distance of zero count as zero.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Largest dimension accepted by [`bk_check`].
pub const BK_MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Negative association: `Cov(f(X_J), g(X_K)) <= 0` for disjoint `J`, `K`.
    #[serde(rename = "NA")]
    Negative,
    /// Positive association: `Cov(f(X), g(X)) >= 0`.
    #[serde(rename = "PA")]
    Positive,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::Negative => "NA",
            Hypothesis::Positive => "PA",
        })
    }
}

impl std::str::FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NA" => Ok(Hypothesis::Negative),
            "PA" => Ok(Hypothesis::Positive),
            _ => Err(Error::param(format!("unknown hypothesis `{s}` (expected NA or PA)"))),
        }
    }
}

impl Hypothesis {
    /// How far a covariance is on the wrong side of zero.
    pub fn violation(&self, cov: f64) -> f64 {
        match self {
            Hypothesis::Negative => cov,
            Hypothesis::Positive => -cov,
        }
    }
}

/// A pair of upper sets whose indicator covariance has the wrong sign.
/// Elements are value vectors of the respective coordinate blocks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssociationWitness {
    pub j: Vec<usize>,
    pub k: Vec<usize>,
    pub u: Vec<Vec<usize>>,
    pub v: Vec<Vec<usize>>,
    pub covariance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactVerdict {
    pub hypothesis: Hypothesis,
    pub holds: bool,
    pub pairs_checked: usize,
    /// Worst indicator covariance found (largest for NA, smallest for PA).
    pub extreme_covariance: f64,
    pub witness: Option<AssociationWitness>,
}

fn members(pmf: &JointPmf, idx: &[usize], u: &UpperSet) -> Vec<Vec<usize>> {
    let sub = pmf.marginal(idx).expect("checked indices");
    u.elements().into_iter().map(|s| sub.coords(s)).collect()
}

/// Checks the association inequality for every pair of upper-set indicators.
///
/// For `NA` the blocks are `J = split` and its complement, which must both be
/// nonempty. For `PA` a split that is empty or covers every coordinate checks
/// all pairs of upper sets of the full product order; any other split checks
/// pairs across `J` and its complement. Upper sets are enumerated exhaustively,
/// so each block may have at most 16 states.
pub fn exact_association_check(pmf: &JointPmf, split: &[usize], hyp: Hypothesis) -> Result<ExactVerdict> {
    pmf.validate()?;
    pmf.check_indices(split)?;
    let k: Vec<usize> = (0..pmf.dim()).filter(|i| !split.contains(i)).collect();
    let whole = split.is_empty() || k.is_empty();
    if whole && hyp == Hypothesis::Negative {
        return Err(Error::param("NA needs a nonempty proper coordinate subset"));
    }
    let (j, k): (Vec<usize>, Vec<usize>) = if whole { ((0..pmf.dim()).collect(), (0..pmf.dim()).collect()) } else { (split.to_vec(), k) };
    let pj = ProductPoset::of_chains(&j.iter().map(|&i| pmf.levels()[i]).collect::<Vec<_>>())?.to_poset();
    let pk = ProductPoset::of_chains(&k.iter().map(|&i| pmf.levels()[i]).collect::<Vec<_>>())?.to_poset();
    let us = enumerate_upper_sets(&pj)?;
    let vs = enumerate_upper_sets(&pk)?;

    let mut worst: Option<(f64, usize, usize)> = None;
    let mut pairs = 0usize;
    if whole {
        let p = pmf.probs();
        let prob = |m: &[bool]| -> f64 { m.iter().zip(p).filter(|(i, _)| **i).map(|(_, q)| q).sum() };
        let pu: Vec<f64> = us.iter().map(|u| prob(u.members())).collect();
        for (a, u) in us.iter().enumerate() {
            for (b, v) in vs.iter().enumerate() {
                let both: f64 = (0..p.len()).filter(|&s| u.contains(s) && v.contains(s)).map(|s| p[s]).sum();
                let cov = both - pu[a] * pu[b];
                pairs += 1;
                if worst.is_none_or(|(w, _, _)| hyp.violation(cov) > hyp.violation(w)) {
                    worst = Some((cov, a, b));
                }
            }
        }
    } else {
        let table = pmf.split_table(&j, &k);
        let pk_marg: Vec<f64> = (0..pk.len()).map(|b| table.iter().map(|row| row[b]).sum()).collect();
        for (a, u) in us.iter().enumerate() {
            let row: Vec<f64> = (0..pk.len()).map(|b| u.elements().iter().map(|&x| table[x][b]).sum()).collect();
            let pu: f64 = row.iter().sum();
            for (b, v) in vs.iter().enumerate() {
                let both: f64 = v.elements().iter().map(|&y| row[y]).sum();
                let pv: f64 = v.elements().iter().map(|&y| pk_marg[y]).sum();
                let cov = both - pu * pv;
                pairs += 1;
                if worst.is_none_or(|(w, _, _)| hyp.violation(cov) > hyp.violation(w)) {
                    worst = Some((cov, a, b));
                }
            }
        }
    }
    let (cov, a, b) = worst.expect("at least the empty upper sets");
    let holds = hyp.violation(cov) <= EXACT_TOLERANCE;
    let witness = (!holds).then(|| AssociationWitness {
        u: members(pmf, &j, &us[a]),
        v: members(pmf, &k, &vs[b]),
        j: j.clone(),
        k: k.clone(),
        covariance: cov,
    });
    Ok(ExactVerdict { hypothesis: hyp, holds, pairs_checked: pairs, extreme_covariance: cov, witness })
}

/// The reweighted marginal `μ^g_J` and the plain marginal `ν_J` for a
/// nonnegative monotone `g` of `X_K` (`K` the complement of `J`), and the
/// dominance decision `μ^g_J ≼ ν_J`.
pub fn reweighted_dominance(pmf: &JointPmf, split: &[usize], g: &[f64]) -> Result<(DiscreteDistribution, DiscreteDistribution, Dominance)> {
    pmf.validate()?;
    pmf.check_indices(split)?;
    let k: Vec<usize> = (0..pmf.dim()).filter(|i| !split.contains(i)).collect();
    if split.is_empty() || k.is_empty() {
        return Err(Error::param("split must be a nonempty proper coordinate subset"));
    }
    let pj = Arc::new(ProductPoset::of_chains(&split.iter().map(|&i| pmf.levels()[i]).collect::<Vec<_>>())?.to_poset());
    let pk = ProductPoset::of_chains(&k.iter().map(|&i| pmf.levels()[i]).collect::<Vec<_>>())?.to_poset();
    if g.len() != pk.len() {
        return Err(Error::param(format!("g needs {} values, got {}", pk.len(), g.len())));
    }
    if g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::param("g must be finite and nonnegative"));
    }
    if !is_monotone(g, &pk) {
        return Err(Error::NotMonotone);
    }
    let table = pmf.split_table(split, &k);
    let norm: f64 = table.iter().map(|row| row.iter().zip(g).map(|(p, w)| p * w).sum::<f64>()).sum();
    if norm <= 0.0 {
        return Err(Error::ZeroNormalizer);
    }
    let mut mu: Vec<f64> = table.iter().map(|row| row.iter().zip(g).map(|(p, w)| p * w).sum::<f64>() / norm).collect();
    let mut nu: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
    renormalise(&mut mu);
    renormalise(&mut nu);
    let mu = DiscreteDistribution::new(&pj, mu)?;
    let nu = DiscreteDistribution::new(&pj, nu)?;
    let d = decide(&mu, &nu, &pj)?;
    Ok((mu, nu, d))
}

fn renormalise(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

/// `μ^g_J ≼_st ν_J`; true for every admissible `g` when the pmf is NA.
pub fn reweighted_dominance_check(pmf: &JointPmf, split: &[usize], g: &[f64]) -> Result<bool> {
    Ok(matches!(reweighted_dominance(pmf, split, g)?.2, Dominance::Holds(_)))
}

/// Whether `[η]_K ⊆ A` for every `K`, as a bitmask over `K` per state `η`.
fn certificates(n: usize, event: &[bool]) -> Vec<u32> {
    let states = 1usize << n;
    let bit = |s: usize, i: usize| (s >> (n - 1 - i)) & 1;
    (0..states)
        .map(|eta| {
            let mut mask = 0u32;
            for kset in 0..(1usize << n) {
                let inside = (0..states).all(|omega| {
                    let agrees = (0..n).all(|i| kset & (1 << i) == 0 || bit(omega, i) == bit(eta, i));
                    !agrees || event[omega]
                });
                if inside {
                    mask |= 1 << kset;
                }
            }
            mask
        })
        .collect()
}

fn box_from_certificates(n: usize, ca: &[u32], cb: &[u32]) -> Vec<bool> {
    let full = (1usize << n) - 1;
    ca.iter()
        .zip(cb)
        .map(|(&ma, &mb)| {
            (0..=full).any(|k| {
                if ma & (1 << k) == 0 {
                    return false;
                }
                let rest = full & !k;
                // every subset L of the complement of K
                let mut l = rest;
                loop {
                    if mb & (1 << l) != 0 {
                        return true;
                    }
                    if l == 0 {
                        return false;
                    }
                    l = (l - 1) & rest;
                }
            })
        })
        .collect()
}

/// `A □ B`: states with disjoint coordinate sets certifying `A` and `B`.
/// Events are indicator vectors over the `2^n` states of `{0,1}^n`.
pub fn disjoint_occurrence(n: usize, a: &[bool], b: &[bool]) -> Result<Vec<bool>> {
    if n == 0 || n > BK_MAX_DIM {
        return Err(Error::param(format!("disjoint occurrence needs 1 <= n <= {BK_MAX_DIM}")));
    }
    if a.len() != 1 << n || b.len() != 1 << n {
        return Err(Error::param("events must have one entry per state"));
    }
    Ok(box_from_certificates(n, &certificates(n, a), &certificates(n, b)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BkWitness {
    pub a: Vec<Vec<usize>>,
    pub b: Vec<Vec<usize>>,
    pub p_box: f64,
    pub p_a: f64,
    pub p_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BkVerdict {
    pub holds: bool,
    pub pairs_checked: usize,
    pub witness: Option<BkWitness>,
}

fn binary_dim(pmf: &JointPmf) -> Result<usize> {
    pmf.validate()?;
    let n = pmf.dim();
    if pmf.levels().iter().any(|&l| l != 2) {
        return Err(Error::param("BK check needs a pmf on {0,1}^n"));
    }
    if n > BK_MAX_DIM {
        return Err(Error::StateSpaceCap { states: 1 << n, cap: 1 << BK_MAX_DIM });
    }
    Ok(n)
}

/// `P(A □ B) <= P(A) P(B)` for every pair of increasing events.
pub fn bk_check(pmf: &JointPmf) -> Result<BkVerdict> {
    let n = binary_dim(pmf)?;
    let events = enumerate_upper_sets(&pmf.poset().to_poset())?;
    let p = pmf.probs();
    let prob = |m: &[bool]| -> f64 { m.iter().zip(p).filter(|(i, _)| **i).map(|(_, q)| q).sum() };
    let certs: Vec<Vec<u32>> = events.iter().map(|e| certificates(n, e.members())).collect();
    let probs: Vec<f64> = events.iter().map(|e| prob(e.members())).collect();
    let mut worst: Option<(f64, usize, usize, f64)> = None;
    let mut pairs = 0;
    for a in 0..events.len() {
        for b in 0..events.len() {
            let pbox = prob(&box_from_certificates(n, &certs[a], &certs[b]));
            let gap = pbox - probs[a] * probs[b];
            pairs += 1;
            if worst.is_none_or(|(w, ..)| gap > w) {
                worst = Some((gap, a, b, pbox));
            }
        }
    }
    let (gap, a, b, pbox) = worst.unwrap();
    let holds = gap <= EXACT_TOLERANCE;
    let states = |e: &UpperSet| e.elements().into_iter().map(|s| pmf.coords(s)).collect();
    let witness = (!holds).then(|| BkWitness { a: states(&events[a]), b: states(&events[b]), p_box: pbox, p_a: probs[a], p_b: probs[b] });
    Ok(BkVerdict { holds, pairs_checked: pairs, witness })
}

/// `(P(A □ B), P(A), P(B))` for two given events.
pub fn bk_pair(pmf: &JointPmf, a: &[bool], b: &[bool]) -> Result<(f64, f64, f64)> {
    let n = binary_dim(pmf)?;
    let bx = disjoint_occurrence(n, a, b)?;
    let p = pmf.probs();
    let prob = |m: &[bool]| -> f64 { m.iter().zip(p).filter(|(i, _)| **i).map(|(_, q)| q).sum() };
    Ok((prob(&bx), prob(a), prob(b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn correlated_pair() -> JointPmf {
        JointPmf::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    fn multinomial_two() -> JointPmf {
        // (X1, X2) with X2 = 2 − X1, X1 ~ Bin(2, 1/2)
        let mut probs = vec![0.0; 9];
        probs[2] = 0.25;
        probs[4] = 0.5;
        probs[6] = 0.25;
        JointPmf::new(vec![3, 3], probs).unwrap()
    }

    #[test]
    fn independent_bernoullis() {
        let pmf = JointPmf::product(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let na = exact_association_check(&pmf, &[0], Hypothesis::Negative).unwrap();
        let pa = exact_association_check(&pmf, &[0], Hypothesis::Positive).unwrap();
        assert!(na.holds && pa.holds);
        assert!(na.extreme_covariance.abs() < 1e-15);
        assert!(exact_association_check(&pmf, &[], Hypothesis::Positive).unwrap().holds);
    }

    #[test]
    fn multinomial_is_na() {
        let v = exact_association_check(&multinomial_two(), &[0], Hypothesis::Negative).unwrap();
        assert!(v.holds);
        assert!(!exact_association_check(&multinomial_two(), &[0], Hypothesis::Positive).unwrap().holds);
    }

    #[test]
    fn correlated_pair_witness() {
        let v = exact_association_check(&correlated_pair(), &[0], Hypothesis::Negative).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.u, vec![vec![1]]);
        assert_eq!(w.v, vec![vec![1]]);
        assert!((w.covariance - 0.25).abs() < 1e-15);
    }

    #[test]
    fn split_validation() {
        let pmf = correlated_pair();
        assert!(exact_association_check(&pmf, &[0, 1], Hypothesis::Negative).is_err());
        assert!(exact_association_check(&pmf, &[2], Hypothesis::Negative).is_err());
        let big = JointPmf::product(&[vec![1.0 / 17.0; 17], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(exact_association_check(&big, &[0], Hypothesis::Negative), Err(Error::UpperSetCap { .. })));
    }

    #[test]
    fn reweighting_examples() {
        let ind = JointPmf::product(&[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        assert!(reweighted_dominance_check(&ind, &[0], &[0.2, 1.0]).unwrap());
        // g = 1{X2 >= 1} on the 3-level second coordinate
        assert!(reweighted_dominance_check(&multinomial_two(), &[0], &[0.0, 1.0, 1.0]).unwrap());
        assert!(!reweighted_dominance_check(&correlated_pair(), &[0], &[0.0, 1.0]).unwrap());
        assert!(matches!(reweighted_dominance_check(&correlated_pair(), &[0], &[1.0, 0.0]), Err(Error::NotMonotone)));
        let point = JointPmf::new(vec![2, 2], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(reweighted_dominance_check(&point, &[0], &[0.0, 1.0]), Err(Error::ZeroNormalizer)));
    }

    #[test]
    fn bk_examples() {
        let prod = JointPmf::product(&[vec![0.3, 0.7], vec![0.5, 0.5], vec![0.9, 0.1]]).unwrap();
        assert!(bk_check(&prod).unwrap().holds);
        // A = everything: A □ B = B
        let full = vec![true; 8];
        let b: Vec<bool> = (0..8).map(|s| s & 1 == 1).collect();
        let (pbox, pa, pb) = bk_pair(&prod, &full, &b).unwrap();
        assert_eq!(pa, 1.0);
        assert!((pbox - pb).abs() < 1e-15);
        let two_point = JointPmf::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let a: Vec<bool> = (0..4).map(|s| s >> 1 == 1).collect();
        let b: Vec<bool> = (0..4).map(|s| s & 1 == 1).collect();
        assert_eq!(bk_pair(&two_point, &a, &b).unwrap(), (0.5, 0.5, 0.5));
        let v = bk_check(&two_point).unwrap();
        assert!(!v.holds);
        assert!(v.witness.unwrap().p_box - 0.25 > 0.2);
    }

    #[test]
    fn bk_dimension_cap() {
        let big = JointPmf::product(&vec![vec![0.5, 0.5]; 5]).unwrap();
        assert!(bk_check(&big).is_err());
        let ternary = JointPmf::product(&[vec![0.2, 0.3, 0.5]]).unwrap();
        assert!(bk_check(&ternary).is_err());
    }
}
