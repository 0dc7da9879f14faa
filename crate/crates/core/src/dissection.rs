//! Dyadic dissections of the window and the count map
//! `γ(μ) = (μ(I_1), μ(I_2), ...)`.
//!
//! At depth `k` every axis is cut into `2^k` half-open intervals, giving
//! `2^{dk}` boxes. Boxes are numbered lexicographically in their integer
//! multi-index with the first axis most significant.

use crate::measures::{PointConfiguration, Window};
use crate::{Error, Result};

/// Default maximum depth.
pub const DEPTH_CAP: u32 = 20;

/// One box `∏ [lo + i_a·s_a/2^k, lo + (i_a+1)·s_a/2^k)` of a dissection.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicBox {
    pub depth: u32,
    pub index: Vec<u64>,
}

impl DyadicBox {
    pub fn bounds(&self, window: &Window) -> Window {
        let cells = (1u64 << self.depth) as f64;
        let (lo, hi) = self
            .index
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                let s = window.side(a) / cells;
                (window.lo[a] + i as f64 * s, window.lo[a] + (i + 1) as f64 * s)
            })
            .unzip();
        Window { lo, hi }
    }
}

/// All boxes of one depth over a window.
#[derive(Clone, Debug, PartialEq)]
pub struct Dissection {
    window: Window,
    depth: u32,
}

/// Per-box masses, one coordinate per box of a [`Dissection`].
#[derive(Clone, Debug, PartialEq)]
pub struct CountVector(pub Vec<f64>);

impl CountVector {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Coordinatewise `self <= other`.
    pub fn le(&self, other: &CountVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

/// The depth-`depth` dyadic dissection of `window`.
pub fn dyadic_dissection(window: &Window, depth: u32) -> Result<Dissection> {
    dyadic_dissection_capped(window, depth, DEPTH_CAP)
}

pub fn dyadic_dissection_capped(window: &Window, depth: u32, cap: u32) -> Result<Dissection> {
    window.validate()?;
    if depth > cap {
        return Err(Error::DepthCap { depth, cap });
    }
    if depth as usize * window.dim() >= usize::BITS as usize - 1 {
        return Err(Error::DepthCap { depth, cap: ((usize::BITS as usize - 2) / window.dim()) as u32 });
    }
    Ok(Dissection { window: window.clone(), depth })
}

impl Dissection {
    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Number of boxes, `2^{d·depth}`.
    pub fn len(&self) -> usize {
        1usize << (self.depth as usize * self.dim())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells_per_axis(&self) -> u64 {
        1u64 << self.depth
    }

    pub fn box_volume(&self) -> f64 {
        self.window.volume() / self.len() as f64
    }

    pub fn box_at(&self, flat: usize) -> DyadicBox {
        let per = self.cells_per_axis();
        let mut index = vec![0u64; self.dim()];
        let mut rest = flat as u64;
        for slot in index.iter_mut().rev() {
            *slot = rest % per;
            rest /= per;
        }
        DyadicBox { depth: self.depth, index }
    }

    pub fn flat_index(&self, index: &[u64]) -> usize {
        let per = self.cells_per_axis();
        index.iter().fold(0u64, |acc, &i| acc * per + i) as usize
    }

    pub fn box_bounds(&self, flat: usize) -> Window {
        self.box_at(flat).bounds(&self.window)
    }

    pub fn boxes(&self) -> impl Iterator<Item = DyadicBox> + '_ {
        (0..self.len()).map(|i| self.box_at(i))
    }

    /// Flat index of the box containing `x`, `None` outside the window.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if !self.window.contains(x) {
            return None;
        }
        let per = self.cells_per_axis();
        let mut flat = 0u64;
        for (a, &v) in x.iter().enumerate() {
            let t = (v - self.window.lo[a]) / self.window.side(a);
            let i = ((t * per as f64).floor() as u64).min(per - 1);
            flat = flat * per + i;
        }
        Some(flat as usize)
    }
}

/// Total weight of the atoms in each box.
pub fn gamma_counts(config: &PointConfiguration, diss: &Dissection) -> CountVector {
    let mut counts = vec![0.0; diss.len()];
    for (i, x) in config.points().enumerate() {
        if let Some(b) = diss.locate(x) {
            counts[b] += config.weight(i);
        }
    }
    CountVector(counts)
}

/// The dissection one level deeper, and for every fine box the coarse box
/// containing it.
pub fn refine(diss: &Dissection) -> Result<(Dissection, Vec<usize>)> {
    let fine = dyadic_dissection(&diss.window, diss.depth + 1)?;
    let map = (0..fine.len())
        .map(|i| {
            let parent: Vec<u64> = fine.box_at(i).index.iter().map(|&k| k >> 1).collect();
            diss.flat_index(&parent)
        })
        .collect();
    Ok((fine, map))
}

/// Sums fine counts into their coarse boxes.
pub fn aggregate(fine: &CountVector, map: &[usize], coarse_len: usize) -> CountVector {
    let mut out = vec![0.0; coarse_len];
    for (v, &j) in fine.0.iter().zip(map) {
        out[j] += v;
    }
    CountVector(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn depth_zero_is_window() {
        let w = Window::new(vec![0.0, 2.0], vec![1.0, 5.0]).unwrap();
        let d = dyadic_dissection(&w, 0).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.box_bounds(0), w);
    }

    #[test]
    fn one_dimensional_depth_two() {
        let d = dyadic_dissection(&Window::unit(1), 2).unwrap();
        let b: Vec<(f64, f64)> = (0..4).map(|i| {
            let w = d.box_bounds(i);
            (w.lo[0], w.hi[0])
        }).collect();
        assert_eq!(b, vec![(0.0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)]);
    }

    #[test]
    fn two_dimensional_depth_three() {
        let w = Window::new(vec![0.0, 0.0], vec![2.0, 3.0]).unwrap();
        let d = dyadic_dissection(&w, 3).unwrap();
        assert_eq!(d.len(), 64);
        for i in 0..64 {
            assert!((d.box_bounds(i).volume() - w.volume() / 64.0).abs() < 1e-12);
        }
        // lexicographic: box 1 moves along the last axis
        assert_eq!(d.box_at(1).index, vec![0, 1]);
        assert_eq!(d.box_at(8).index, vec![1, 0]);
    }

    #[test]
    fn depth_cap() {
        assert!(matches!(dyadic_dissection(&Window::unit(1), 21), Err(Error::DepthCap { depth: 21, cap: 20 })));
    }

    #[test]
    fn count_examples() {
        let w = Window::unit(2);
        let d = dyadic_dissection(&w, 1).unwrap();
        assert_eq!(gamma_counts(&PointConfiguration::empty(w.clone()), &d).0, vec![0.0; 4]);
        let one = PointConfiguration::from_points(w.clone(), &[vec![0.7, 0.2]]).unwrap();
        assert_eq!(gamma_counts(&one, &d).0, vec![0.0, 0.0, 1.0, 0.0]);
        let two = PointConfiguration::from_weighted(w, &[vec![0.1, 0.1], vec![0.2, 0.3]], &[0.5, 2.0]).unwrap();
        assert_eq!(gamma_counts(&two, &d).0, vec![2.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn refine_examples() {
        let d0 = dyadic_dissection(&Window::unit(1), 0).unwrap();
        let (d1, map) = refine(&d0).unwrap();
        assert_eq!(d1.len(), 2);
        assert_eq!(map, vec![0, 0]);
        let (d2, map) = refine(&d1).unwrap();
        assert_eq!(d2.len(), 4);
        assert_eq!(map, vec![0, 0, 1, 1]);
        let capped = dyadic_dissection(&Window::unit(1), DEPTH_CAP).unwrap();
        assert!(refine(&capped).is_err());
    }

    fn random_config(seed: u64, n: usize, dim: usize) -> PointConfiguration {
        let w = Window::unit(dim);
        let mut rng = stream(seed, 0);
        let mut c = PointConfiguration::empty(w.clone());
        for k in 0..n {
            let x = w.uniform_point(&mut rng);
            c.try_push(&x, 0.25 * (k % 5) as f64 + 0.5).unwrap();
        }
        c
    }

    proptest! {
        #[test]
        fn refinement_is_consistent(seed in any::<u64>(), n in 0usize..60, dim in 1usize..4, depth in 0u32..4) {
            let c = random_config(seed, n, dim);
            let d = dyadic_dissection(c.window(), depth).unwrap();
            let (fine, map) = refine(&d).unwrap();
            let coarse = gamma_counts(&c, &d);
            let agg = aggregate(&gamma_counts(&c, &fine), &map, d.len());
            // same atoms land in the same coarse box; sums only reorder
            for (a, b) in coarse.0.iter().zip(&agg.0) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
            prop_assert!((coarse.total() - c.total_mass()).abs() < 1e-9);
        }

        #[test]
        fn gamma_is_monotone(seed in any::<u64>(), n in 0usize..40, keep in 0usize..40, depth in 0u32..4) {
            let big = random_config(seed, n, 2);
            let mut small = PointConfiguration::empty(big.window().clone());
            for i in 0..big.len().min(keep) {
                small.try_push(big.point(i), big.weight(i) * 0.5).unwrap();
            }
            let d = dyadic_dissection(big.window(), depth).unwrap();
            prop_assert!(gamma_counts(&small, &d).le(&gamma_counts(&big, &d)));
        }

        #[test]
        fn separated_atoms_are_distinguished(a in 0u64..16, b in 0u64..16, fa in 0.01f64..0.99, fb in 0.01f64..0.99) {
            prop_assume!(a != b);
            let depth = 4;
            let w = Window::unit(1);
            let d = dyadic_dissection(&w, depth).unwrap();
            let pa = (a as f64 + fa) / 16.0;
            let pb = (b as f64 + fb) / 16.0;
            prop_assume!((pa - pb).abs() > 1.0 / 16.0);
            let ca = PointConfiguration::from_points(w.clone(), &[vec![pa]]).unwrap();
            let cb = PointConfiguration::from_points(w, &[vec![pb]]).unwrap();
            prop_assert_ne!(gamma_counts(&ca, &d), gamma_counts(&cb, &d));
        }
    }
}
