//! Finite partially ordered sets, upper sets and monotone functions.

use std::collections::HashMap;
use std::sync::Arc;

use crate::{Error, Result};

/// Default element cap for exhaustive upper-set enumeration.
pub const UPPER_SET_CAP: usize = 16;

/// A finite poset with a dense, transitively closed relation table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    labels: Vec<String>,
    // row-major: leq[x * n + y] == (x <= y)
    leq: Vec<bool>,
}

impl FinitePoset {
    /// Builds the reflexive-transitive closure of `relations` (pairs `x < y`)
    /// and rejects cycles.
    pub fn from_relations(labels: Vec<String>, relations: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        check_labels(&labels)?;
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(x, y) in relations {
            if x >= n || y >= n {
                return Err(Error::InvalidPoset(format!("relation ({x}, {y}) out of range")));
            }
            leq[x * n + y] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let poset = FinitePoset { labels, leq };
        poset.check_antisymmetric()?;
        Ok(poset)
    }

    /// Takes a complete relation table and validates all three poset axioms.
    pub fn from_table(labels: Vec<String>, leq: Vec<bool>) -> Result<Self> {
        let n = labels.len();
        check_labels(&labels)?;
        if leq.len() != n * n {
            return Err(Error::InvalidPoset(format!("relation table has {} entries, expected {}", leq.len(), n * n)));
        }
        let poset = FinitePoset { labels, leq };
        for x in 0..n {
            if !poset.leq(x, x) {
                return Err(Error::InvalidPoset(format!("not reflexive at {}", poset.labels[x])));
            }
        }
        poset.check_antisymmetric()?;
        for x in 0..n {
            for y in 0..n {
                if !poset.leq(x, y) {
                    continue;
                }
                for z in 0..n {
                    if poset.leq(y, z) && !poset.leq(x, z) {
                        return Err(Error::InvalidPoset(format!(
                            "not transitive: {} <= {} <= {}",
                            poset.labels[x], poset.labels[y], poset.labels[z]
                        )));
                    }
                }
            }
        }
        Ok(poset)
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let mut leq = vec![false; n * n];
        for x in 0..n {
            for y in x..n {
                leq[x * n + y] = true;
            }
        }
        FinitePoset { labels, leq }
    }

    /// `n` pairwise incomparable elements.
    pub fn antichain(n: usize) -> Self {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let mut leq = vec![false; n * n];
        for x in 0..n {
            leq[x * n + x] = true;
        }
        FinitePoset { labels, leq }
    }

    /// Parses the text format: one element label per line, one covering
    /// relation `a < b` per line. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut pending: Vec<(usize, String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((a, b)) = line.split_once('<') {
                let (a, b) = (a.trim(), b.trim());
                if a.is_empty() || b.is_empty() || b.contains('<') {
                    return Err(Error::PosetSyntax { line: lineno + 1, msg: format!("malformed relation `{line}`") });
                }
                pending.push((lineno + 1, a.to_string(), b.to_string()));
            } else {
                if line.split_whitespace().count() != 1 {
                    return Err(Error::PosetSyntax { line: lineno + 1, msg: format!("malformed element `{line}`") });
                }
                if index.insert(line.to_string(), labels.len()).is_some() {
                    return Err(Error::PosetSyntax { line: lineno + 1, msg: format!("duplicate element `{line}`") });
                }
                labels.push(line.to_string());
            }
        }
        let mut relations = Vec::with_capacity(pending.len());
        for (line, a, b) in pending {
            let lookup = |s: &str| {
                index
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::PosetSyntax { line, msg: format!("undeclared element `{s}`") })
            };
            relations.push((lookup(&a)?, lookup(&b)?));
        }
        Self::from_relations(labels, &relations)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.len() + y]
    }

    /// Whether the order is total.
    pub fn is_chain(&self) -> bool {
        let n = self.len();
        (0..n).all(|x| (0..n).all(|y| self.leq(x, y) || self.leq(y, x)))
    }

    /// Indicator of the up-closure `{y : x <= y for some x in set}`.
    pub fn up_closure(&self, set: &[bool]) -> Vec<bool> {
        let n = self.len();
        (0..n).map(|y| (0..n).any(|x| set[x] && self.leq(x, y))).collect()
    }

    fn check_antisymmetric(&self) -> Result<()> {
        let n = self.len();
        for x in 0..n {
            for y in (x + 1)..n {
                if self.leq(x, y) && self.leq(y, x) {
                    return Err(Error::InvalidPoset(format!(
                        "cycle between {} and {}",
                        self.labels[x], self.labels[y]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::InvalidPoset(format!("duplicate label `{l}`")));
        }
    }
    Ok(())
}

/// An upward-closed subset, stored as an indicator over the poset elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UpperSet {
    members: Vec<bool>,
}

impl UpperSet {
    /// Validates upward closure.
    pub fn new(poset: &FinitePoset, members: Vec<bool>) -> Result<Self> {
        if members.len() != poset.len() || !is_upward_closed(poset, &members) {
            return Err(Error::InvalidParameter("subset is not an upper set".into()));
        }
        Ok(UpperSet { members })
    }

    pub(crate) fn from_closed(members: Vec<bool>) -> Self {
        UpperSet { members }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members[x]
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn elements(&self) -> Vec<usize> {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The 0/1 monotone function of the set.
    pub fn indicator(&self) -> Vec<f64> {
        self.members.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect()
    }
}

fn is_upward_closed(poset: &FinitePoset, members: &[bool]) -> bool {
    let n = poset.len();
    (0..n).all(|x| !members[x] || (0..n).all(|y| !poset.leq(x, y) || members[y]))
}

/// All upper sets of `poset`, refusing posets above [`UPPER_SET_CAP`] elements.
pub fn enumerate_upper_sets(poset: &FinitePoset) -> Result<Vec<UpperSet>> {
    enumerate_upper_sets_capped(poset, UPPER_SET_CAP)
}

/// All upper sets, found by filtering every subset for upward closure.
/// Ordered by the bitmask of the subset, so `∅` comes first and the full set last.
pub fn enumerate_upper_sets_capped(poset: &FinitePoset, cap: usize) -> Result<Vec<UpperSet>> {
    let n = poset.len();
    if n > cap || n >= 32 {
        return Err(Error::UpperSetCap { elements: n, cap });
    }
    let up: Vec<u32> = (0..n)
        .map(|x| (0..n).filter(|&y| poset.leq(x, y)).fold(0u32, |m, y| m | (1 << y)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let closed = (0..n).all(|x| mask & (1 << x) == 0 || up[x] & !mask == 0);
        if closed {
            out.push(UpperSet { members: (0..n).map(|x| mask & (1 << x) != 0).collect() });
        }
    }
    Ok(out)
}

/// `x <= y` implies `values[x] <= values[y]`.
pub fn is_monotone(values: &[f64], poset: &FinitePoset) -> bool {
    assert_eq!(values.len(), poset.len(), "one value per poset element");
    let n = poset.len();
    (0..n).all(|x| (0..n).all(|y| !poset.leq(x, y) || values[x] <= values[y]))
}

/// A probability vector over the elements of a poset.
#[derive(Clone, Debug)]
pub struct DiscreteDistribution {
    poset: Arc<FinitePoset>,
    masses: Vec<f64>,
}

impl DiscreteDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(poset: &Arc<FinitePoset>, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != poset.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} masses for {} elements",
                masses.len(),
                poset.len()
            )));
        }
        if masses.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::InvalidDistribution("masses must be finite and nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        Ok(DiscreteDistribution { poset: Arc::clone(poset), masses })
    }

    /// Point mass at element `x`.
    pub fn dirac(poset: &Arc<FinitePoset>, x: usize) -> Self {
        let mut masses = vec![0.0; poset.len()];
        masses[x] = 1.0;
        DiscreteDistribution { poset: Arc::clone(poset), masses }
    }

    pub fn poset(&self) -> &Arc<FinitePoset> {
        &self.poset
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `∫ f dP`.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.masses.iter().zip(values).map(|(m, v)| m * v).sum()
    }

    pub fn same_poset(&self, poset: &FinitePoset) -> bool {
        self.poset.as_ref() == poset
    }
}

/// Cartesian product of posets under the coordinatewise order.
///
/// Elements are indexed in mixed radix with the first factor most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductPoset {
    factors: Vec<FinitePoset>,
    sizes: Vec<usize>,
}

/// Product of `factors`; a single factor yields that factor itself.
pub fn product_poset(factors: Vec<FinitePoset>) -> Result<ProductPoset> {
    if factors.is_empty() {
        return Err(Error::EmptyFactors);
    }
    let sizes = factors.iter().map(FinitePoset::len).collect();
    Ok(ProductPoset { factors, sizes })
}

impl ProductPoset {
    /// Product of chains of the given lengths.
    pub fn of_chains(levels: &[usize]) -> Result<Self> {
        product_poset(levels.iter().map(|&k| FinitePoset::chain(k)).collect())
    }

    pub fn factors(&self) -> &[FinitePoset] {
        &self.factors
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, &s) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = index % s;
            index /= s;
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.sizes).fold(0, |acc, (&c, &s)| acc * s + c)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        let (ca, cb) = (self.coords(a), self.coords(b));
        self.factors.iter().zip(ca.iter().zip(&cb)).all(|(f, (&x, &y))| f.leq(x, y))
    }

    /// Materialises the product as a [`FinitePoset`] with labels `(a,b,...)`.
    pub fn to_poset(&self) -> FinitePoset {
        let n = self.len();
        let coords: Vec<Vec<usize>> = (0..n).map(|i| self.coords(i)).collect();
        let labels = coords
            .iter()
            .map(|c| {
                let parts: Vec<&str> =
                    c.iter().zip(&self.factors).map(|(&x, f)| f.labels()[x].as_str()).collect();
                if parts.len() == 1 {
                    parts[0].to_string()
                } else {
                    format!("({})", parts.join(","))
                }
            })
            .collect();
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = self
                    .factors
                    .iter()
                    .zip(coords[a].iter().zip(&coords[b]))
                    .all(|(f, (&x, &y))| f.leq(x, y));
            }
        }
        FinitePoset { labels, leq }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn closure_and_cycle_rejection() {
        let p = FinitePoset::from_relations(labels(&["a", "b", "c"]), &[(0, 1), (1, 2)]).unwrap();
        assert!(p.leq(0, 2));
        assert!(!p.leq(2, 0));
        let err = FinitePoset::from_relations(labels(&["a", "b"]), &[(0, 1), (1, 0)]);
        assert!(matches!(err, Err(Error::InvalidPoset(_))));
    }

    #[test]
    fn table_validation() {
        let bad = FinitePoset::from_table(labels(&["a", "b"]), vec![true, true, false, false]);
        assert!(bad.is_err());
        // not transitive: a<b, b<c but not a<c
        let t = vec![true, true, false, false, true, true, false, false, true];
        assert!(FinitePoset::from_table(labels(&["a", "b", "c"]), t).is_err());
    }

    #[test]
    fn parse_file_format() {
        let p = FinitePoset::parse("# diamond\nbot\nl\nr\ntop\nbot < l\nbot < r\nl < top\nr < top\n").unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.leq(0, 3));
        assert!(!p.leq(1, 2) && !p.leq(2, 1));
        assert!(matches!(FinitePoset::parse("a\na < b\n"), Err(Error::PosetSyntax { line: 2, .. })));
        assert!(matches!(FinitePoset::parse("a\na\n"), Err(Error::PosetSyntax { line: 2, .. })));
    }

    #[test]
    fn upper_set_examples() {
        let one = FinitePoset::chain(1);
        assert_eq!(enumerate_upper_sets(&one).unwrap().len(), 2);
        let two = FinitePoset::chain(2);
        let ups = enumerate_upper_sets(&two).unwrap();
        let as_elems: Vec<Vec<usize>> = ups.iter().map(UpperSet::elements).collect();
        assert_eq!(as_elems, vec![vec![], vec![1], vec![0, 1]]);
        let square = product_poset(vec![FinitePoset::chain(2), FinitePoset::chain(2)]).unwrap().to_poset();
        assert_eq!(enumerate_upper_sets(&square).unwrap().len(), 6);
    }

    #[test]
    fn upper_set_cap() {
        let big = FinitePoset::antichain(17);
        assert!(matches!(enumerate_upper_sets(&big), Err(Error::UpperSetCap { elements: 17, cap: 16 })));
    }

    #[test]
    fn monotone_examples() {
        let c = FinitePoset::chain(2);
        assert!(is_monotone(&[3.0, 3.0], &c));
        assert!(!is_monotone(&[1.0, 0.0], &c));
        for u in enumerate_upper_sets(&c).unwrap() {
            assert!(is_monotone(&u.indicator(), &c));
        }
    }

    #[test]
    fn product_examples() {
        let single = product_poset(vec![FinitePoset::chain(2)]).unwrap().to_poset();
        assert_eq!(single, FinitePoset::chain(2));
        let sq = product_poset(vec![FinitePoset::chain(2), FinitePoset::chain(2)]).unwrap();
        // 00 < 01, 00 < 10, 00 < 11, 01 < 11, 10 < 11, and 01 || 10
        assert!(sq.leq(0, 1) && sq.leq(0, 2) && sq.leq(0, 3) && sq.leq(1, 3) && sq.leq(2, 3));
        assert!(!sq.leq(1, 2) && !sq.leq(2, 1));
        assert!(matches!(product_poset(vec![]), Err(Error::EmptyFactors)));
    }

    #[test]
    fn distribution_validation() {
        let p = Arc::new(FinitePoset::chain(2));
        assert!(DiscreteDistribution::new(&p, vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(&p, vec![-0.5, 1.5]).is_err());
        assert!(DiscreteDistribution::new(&p, vec![1.0]).is_err());
        let d = DiscreteDistribution::new(&p, vec![0.25, 0.75]).unwrap();
        assert_eq!(d.expect(&[0.0, 1.0]), 0.75);
    }
}
