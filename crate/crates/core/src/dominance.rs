//! Stochastic dominance on finite posets.
//!
//! `P ≼_st Q` holds iff there is a coupling of `P` and `Q` supported on
//! `H = {(x, y) : x <= y}`. Feasibility is decided by max-flow on the
//! bipartite network source -> x -> y -> sink, with integer capacities
//! `P(x)·D` and `Q(y)·D` for a fixed denominator `D`. A saturating flow is the
//! coupling; otherwise the min cut yields an upper set `U` with `P(U) > Q(U)`.

use crate::flow::MaxFlow;
use crate::poset::{DiscreteDistribution, FinitePoset, UpperSet};
use crate::{Error, Result};

/// Default integer scale for capacities.
pub const DEFAULT_DENOMINATOR: i64 = 1_000_000_000;
/// Feasibility and marginal tolerance.
pub const TOLERANCE: f64 = 1e-9;

/// A joint law on pairs `(x, y)`, row-major over `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    n: usize,
    joint: Vec<f64>,
}

impl Coupling {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.joint[x * self.n + y]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.joint.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.n).map(|y| (0..self.n).map(|x| self.get(x, y)).sum()).collect()
    }

    /// Largest absolute deviation of either marginal from `p` / `q`.
    pub fn marginal_error(&self, p: &[f64], q: &[f64]) -> f64 {
        let rows = self.row_sums().iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let cols = self.col_sums().iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rows.max(cols)
    }

    /// Every positive entry sits on a pair `x <= y`.
    pub fn supported_on_order(&self, poset: &FinitePoset) -> bool {
        (0..self.n).all(|x| (0..self.n).all(|y| self.get(x, y) == 0.0 || poset.leq(x, y)))
    }

    /// CSV table: header `x,<labels...>` then one row per `x`.
    pub fn to_csv(&self, poset: &FinitePoset) -> String {
        let mut out = String::from("x");
        for l in poset.labels() {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for x in 0..self.n {
            out.push_str(&poset.labels()[x]);
            for y in 0..self.n {
                out.push_str(&format!(",{}", self.get(x, y)));
            }
            out.push('\n');
        }
        out
    }
}

/// A monotone 0/1 function separating `P` from `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DominanceWitness {
    pub upper_set: UpperSet,
    /// Indicator values of `upper_set`, one per element.
    pub values: Vec<f64>,
    /// `∫f dP − ∫f dQ`, strictly positive.
    pub gap: f64,
}

impl DominanceWitness {
    pub fn to_csv(&self, poset: &FinitePoset) -> String {
        let mut out = String::from("element,value\n");
        for (l, v) in poset.labels().iter().zip(&self.values) {
            out.push_str(&format!("{l},{v}\n"));
        }
        out
    }
}

/// Outcome of a dominance decision together with its certificate.
#[derive(Clone, Debug, PartialEq)]
pub enum Dominance {
    Holds(Coupling),
    Fails(DominanceWitness),
}

/// The bipartite network for `P ≼_st Q`, solved once on construction.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    n: usize,
    denominator: i64,
    source_caps: Vec<i64>,
    sink_caps: Vec<i64>,
    graph: MaxFlow,
    interior: Vec<(usize, usize, usize)>,
    value: i64,
}

impl FlowNetwork {
    pub fn solve(p: &DiscreteDistribution, q: &DiscreteDistribution, poset: &FinitePoset, denominator: i64) -> Result<Self> {
        if !p.same_poset(poset) || !q.same_poset(poset) {
            return Err(Error::MismatchedPosets);
        }
        if denominator <= 0 {
            return Err(Error::param("denominator must be positive"));
        }
        let n = poset.len();
        let source_caps = scale_to_denominator(p.masses(), denominator);
        let sink_caps = scale_to_denominator(q.masses(), denominator);
        let (source, sink) = (2 * n, 2 * n + 1);
        let mut graph = MaxFlow::new(2 * n + 2);
        for x in 0..n {
            graph.add_arc(source, x, source_caps[x]);
            graph.add_arc(n + x, sink, sink_caps[x]);
        }
        // strictly above any feasible flow, so interior arcs never saturate
        let unbounded = denominator + 1;
        let mut interior = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if poset.leq(x, y) {
                    interior.push((x, y, graph.add_arc(x, n + y, unbounded)));
                }
            }
        }
        let value = graph.run(source, sink);
        Ok(FlowNetwork { n, denominator, source_caps, sink_caps, graph, interior, value })
    }

    pub fn source_capacities(&self) -> &[i64] {
        &self.source_caps
    }

    pub fn sink_capacities(&self) -> &[i64] {
        &self.sink_caps
    }

    pub fn max_flow(&self) -> f64 {
        self.value as f64 / self.denominator as f64
    }

    pub fn is_feasible(&self) -> bool {
        (self.max_flow() - 1.0).abs() <= TOLERANCE
    }

    pub fn coupling(&self) -> Coupling {
        let mut joint = vec![0.0; self.n * self.n];
        for &(x, y, arc) in &self.interior {
            joint[x * self.n + y] = self.graph.flow_on(arc) as f64 / self.denominator as f64;
        }
        Coupling { n: self.n, joint }
    }

    /// Upper set from the largest min cut: left nodes that cannot reach the
    /// sink, closed upward.
    fn witness(&self, p: &DiscreteDistribution, q: &DiscreteDistribution, poset: &FinitePoset) -> DominanceWitness {
        let reach = self.graph.reaches(2 * self.n + 1);
        let source_side: Vec<bool> = (0..self.n).map(|x| !reach[x]).collect();
        let upper_set = UpperSet::from_closed(poset.up_closure(&source_side));
        let values = upper_set.indicator();
        let gap = p.expect(&values) - q.expect(&values);
        DominanceWitness { upper_set, values, gap }
    }
}

/// Integer capacities summing exactly to `denominator` (largest remainder).
fn scale_to_denominator(masses: &[f64], denominator: i64) -> Vec<i64> {
    let total: f64 = masses.iter().sum();
    let scaled: Vec<f64> = masses.iter().map(|m| m / total * denominator as f64).collect();
    let mut caps: Vec<i64> = scaled.iter().map(|s| s.floor() as i64).collect();
    let deficit = denominator - caps.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (scaled[a] - scaled[a].floor(), scaled[b] - scaled[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(deficit.max(0) as usize) {
        caps[i] += 1;
    }
    caps
}

/// Decides `P ≼_st Q` and returns the matching certificate.
pub fn decide(p: &DiscreteDistribution, q: &DiscreteDistribution, poset: &FinitePoset) -> Result<Dominance> {
    decide_with_denominator(p, q, poset, DEFAULT_DENOMINATOR)
}

pub fn decide_with_denominator(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    poset: &FinitePoset,
    denominator: i64,
) -> Result<Dominance> {
    let net = FlowNetwork::solve(p, q, poset, denominator)?;
    if net.is_feasible() {
        Ok(Dominance::Holds(net.coupling()))
    } else {
        Ok(Dominance::Fails(net.witness(p, q, poset)))
    }
}

/// `P ≼_st Q`.
pub fn dominates(p: &DiscreteDistribution, q: &DiscreteDistribution, poset: &FinitePoset) -> Result<bool> {
    Ok(FlowNetwork::solve(p, q, poset, DEFAULT_DENOMINATOR)?.is_feasible())
}

/// A coupling of `P` and `Q` supported on `{x <= y}`, or
/// [`Error::NotDominated`] carrying the separating witness.
pub fn construct_coupling(p: &DiscreteDistribution, q: &DiscreteDistribution, poset: &FinitePoset) -> Result<Coupling> {
    match decide(p, q, poset)? {
        Dominance::Holds(c) => Ok(c),
        Dominance::Fails(w) => Err(Error::NotDominated(Box::new(w))),
    }
}

/// An upper-set indicator `f` with `∫f dP > ∫f dQ`, or [`Error::Dominated`].
pub fn dominance_witness(p: &DiscreteDistribution, q: &DiscreteDistribution, poset: &FinitePoset) -> Result<DominanceWitness> {
    match decide(p, q, poset)? {
        Dominance::Holds(_) => Err(Error::Dominated),
        Dominance::Fails(w) => Ok(w),
    }
}
