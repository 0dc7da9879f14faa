//! Finite determinantal point processes (spectral algorithm).
//!
//! `K = Σ λ_i v_i v_i*`; each eigenvector is kept independently with
//! probability `λ_i`, then points are drawn one at a time from the projection
//! kernel of the kept vectors, conditioning on each chosen point by projecting
//! it out and re-orthonormalising.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::PointConfiguration;
use crate::rng::SimRng;
use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const SPECTRUM_TOL: f64 = 1e-10;

/// A Hermitian kernel with spectrum in `[0, 1]` (up to tolerance).
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    k: DMatrix<Complex64>,
}

impl KernelMatrix {
    pub fn new(k: DMatrix<Complex64>) -> Result<Self> {
        if !k.is_square() || k.nrows() == 0 {
            return Err(Error::InvalidKernel("kernel must be a nonempty square matrix".into()));
        }
        let n = k.nrows();
        for i in 0..n {
            for j in 0..n {
                if (k[(i, j)] - k[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidKernel(format!("not Hermitian at ({i}, {j})")));
                }
            }
        }
        let kernel = KernelMatrix { k };
        for &l in kernel.eigen().0.iter() {
            if !(-SPECTRUM_TOL..=1.0 + SPECTRUM_TOL).contains(&l) {
                return Err(Error::InvalidKernel(format!("eigenvalue {l} outside [0, 1]")));
            }
        }
        Ok(kernel)
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidKernel("kernel must be square".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    /// CSV with one matrix row per line and `re,im` pairs for every entry.
    /// Parentheses around a pair are allowed.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cleaned: String = line.chars().filter(|c| *c != '(' && *c != ')').collect();
            let nums = cleaned
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::InvalidKernel(format!("line {}: {e}", lineno + 1)))?;
            if nums.len() % 2 != 0 {
                return Err(Error::InvalidKernel(format!("line {}: odd number of fields", lineno + 1)));
            }
            rows.push(nums.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
        }
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidKernel("kernel CSV is not square".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn len(&self) -> usize {
        self.k.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.k
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.k[(i, j)]
    }

    /// Eigenvalues (unclipped) and eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        let e = self.k.clone().symmetric_eigen();
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    }
}

/// A DPP over a finite set of ground locations, with the spectrum cached.
#[derive(Clone, Debug)]
pub struct DppSampler {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    ground: PointConfiguration,
}

impl DppSampler {
    pub fn new(kernel: &KernelMatrix, ground: PointConfiguration) -> Result<Self> {
        if ground.len() != kernel.len() {
            return Err(Error::InvalidKernel(format!(
                "{} ground points for a {}×{} kernel",
                ground.len(),
                kernel.len(),
                kernel.len()
            )));
        }
        let (vals, vecs) = kernel.eigen();
        let eigenvalues = vals.into_iter().map(|l| l.clamp(0.0, 1.0)).collect();
        Ok(DppSampler { eigenvalues, eigenvectors: vecs, ground })
    }

    pub fn ground(&self) -> &PointConfiguration {
        &self.ground
    }

    /// Indices of the selected ground points, ascending.
    pub fn sample_indices(&self, rng: &mut SimRng) -> Vec<usize> {
        let n = self.eigenvalues.len();
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            if rng.random::<f64>() < l {
                cols.push(self.eigenvectors.column(i).iter().copied().collect());
            }
        }
        let mut chosen = Vec::with_capacity(cols.len());
        while !cols.is_empty() {
            let weights: Vec<f64> = (0..n).map(|j| cols.iter().map(|c| c[j].norm_sqr()).sum()).collect();
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (j, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = j;
                    break;
                }
                u -= w;
            }
            chosen.push(pick);
            // eliminate coordinate `pick` using the column with the largest entry there
            let pivot = (0..cols.len())
                .max_by(|&a, &b| cols[a][pick].norm().total_cmp(&cols[b][pick].norm()))
                .unwrap();
            let pcol = cols.swap_remove(pivot);
            let pval = pcol[pick];
            for c in cols.iter_mut() {
                let f = c[pick] / pval;
                for (x, p) in c.iter_mut().zip(&pcol) {
                    *x -= f * p;
                }
                c[pick] = Complex64::new(0.0, 0.0);
            }
            gram_schmidt(&mut cols);
        }
        chosen.sort_unstable();
        chosen
    }

    pub fn sample(&self, rng: &mut SimRng) -> PointConfiguration {
        let mut out = PointConfiguration::empty(self.ground.window().clone());
        for i in self.sample_indices(rng) {
            out.push_unchecked(self.ground.point(i), 1.0);
        }
        out
    }
}

fn gram_schmidt(cols: &mut [Vec<Complex64>]) {
    for i in 0..cols.len() {
        for j in 0..i {
            let (done, rest) = cols.split_at_mut(i);
            let proj: Complex64 = done[j].iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in rest[0].iter_mut().zip(&done[j]) {
                *x -= proj * a;
            }
        }
        let norm = cols[i].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[i].iter_mut() {
            *x /= norm;
        }
    }
}

/// One draw of the DPP with kernel `kernel` on `ground`.
pub fn sample_dpp_finite(kernel: &KernelMatrix, ground: &PointConfiguration, rng: &mut SimRng) -> Result<PointConfiguration> {
    Ok(DppSampler::new(kernel, ground.clone())?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Window;
    use crate::rng::stream;
    use std::collections::HashMap;

    fn line_ground(n: usize) -> PointConfiguration {
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 + 0.5) / n as f64]).collect();
        PointConfiguration::from_points(Window::unit(1), &pts).unwrap()
    }

    #[test]
    fn rejects_bad_kernels() {
        assert!(KernelMatrix::from_real(&[vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(KernelMatrix::from_real(&[vec![1.5, 0.0], vec![0.0, 0.5]]).is_err());
        assert!(KernelMatrix::from_real(&[vec![-0.1, 0.0], vec![0.0, 0.5]]).is_err());
    }

    #[test]
    fn diagonal_kernel_is_bernoulli() {
        let k = KernelMatrix::from_real(&(0..4).map(|i| (0..4).map(|j| if i == j { 0.5 } else { 0.0 }).collect()).collect::<Vec<_>>()).unwrap();
        let s = DppSampler::new(&k, line_ground(4)).unwrap();
        let mut freq = [0usize; 4];
        let n = 40_000;
        for r in 0..n {
            for i in s.sample_indices(&mut stream(1, r)) {
                freq[i] += 1;
            }
        }
        for f in freq {
            let p = f as f64 / n as f64;
            assert!((p - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
        }
    }

    #[test]
    fn rank_one_projection_gives_one_point() {
        let v = [0.5f64, 0.5, 0.5, 0.5];
        let rows: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| v[i] * v[j]).collect()).collect();
        let k = KernelMatrix::from_real(&rows).unwrap();
        let s = DppSampler::new(&k, line_ground(4)).unwrap();
        let mut hist: HashMap<usize, usize> = HashMap::new();
        for r in 0..2000 {
            let idx = s.sample_indices(&mut stream(2, r));
            assert_eq!(idx.len(), 1);
            *hist.entry(idx[0]).or_default() += 1;
        }
        assert_eq!(hist.len(), 4);
    }

    #[test]
    fn complex_csv_round() {
        let text = "(0.5,0),(0,0.25)\n(0,-0.25),(0.5,0)\n";
        let k = KernelMatrix::parse_csv(text).unwrap();
        assert_eq!(k.get(0, 1), Complex64::new(0.0, 0.25));
        assert!(KernelMatrix::parse_csv("0.5,0,0\n").is_err());
    }

    #[test]
    fn ground_size_mismatch() {
        let k = KernelMatrix::from_real(&[vec![0.5]]).unwrap();
        assert!(DppSampler::new(&k, line_ground(2)).is_err());
    }
}
