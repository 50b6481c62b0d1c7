//! Shift, polynomial graph filters and the graph Fourier transform.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{Graph, DEFAULT_DENSE_CAP};
use crate::linalg::{self, CMatrix};
use crate::tensor::Tensor;

/// Gap below which two eigenvalues are treated as repeated.
pub const REPEATED_EIGENVALUE_GAP: f64 = 1e-10;

/// Tolerance on the imaginary residue of a spectral-domain filter output.
pub const DUALITY_TOLERANCE: f64 = 1e-8;

/// Coefficients `alpha_0..alpha_K` of `g(A) = sum_k alpha_k A^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterCoeffs {
    alpha: Vec<f64>,
}

impl FilterCoeffs {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidSize("filter needs at least one coefficient".into()));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::NumericHealth("filter coefficients".into()));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn degree(&self) -> usize {
        self.alpha.len() - 1
    }

    /// Coefficients of the product polynomial (filter applied after `self`).
    pub fn compose(&self, other: &FilterCoeffs) -> FilterCoeffs {
        let mut out = vec![0.0; self.alpha.len() + other.alpha.len() - 1];
        for (i, a) in self.alpha.iter().enumerate() {
            for (j, b) in other.alpha.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        FilterCoeffs { alpha: out }
    }

    /// `g(lambda)` by Horner evaluation.
    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        self.alpha
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * lambda + a)
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if self.degree() >= n.max(1) {
            return Err(Error::Degree {
                degree: self.degree(),
                n,
            });
        }
        Ok(())
    }
}

/// `A x`.
pub fn shift(g: &Graph, x: &Tensor) -> Result<Tensor> {
    g.spmm(x)
}

/// `sum_k alpha_k A^k x`, accumulated Horner-style with one sparse shift per
/// degree; `A^k` is never formed.
pub fn poly_filter(g: &Graph, c: &FilterCoeffs, x: &Tensor) -> Result<Tensor> {
    if x.rows() != g.n() {
        return Err(Error::Shape(format!(
            "signal has {} rows, graph has {} vertices",
            x.rows(),
            g.n()
        )));
    }
    c.check_degree(g.n())?;
    let alpha = c.alpha();
    let mut y = x.scale(alpha[alpha.len() - 1]);
    for &a in alpha[..alpha.len() - 1].iter().rev() {
        y = g.spmm(&y)?;
        for (yi, xi) in y.data_mut().iter_mut().zip(x.data()) {
            *yi += a * xi;
        }
    }
    Ok(y)
}

/// Eigendecomposition `A = GFT^{-1} diag(Lambda) GFT` of a graph adjacency.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub gft: CMatrix,
    pub igft: CMatrix,
    /// `||GFT^{-1}||_F ||GFT||_F / n`; 1 for unitary bases.
    pub condition_estimate: f64,
    /// Smallest pairwise distance between eigenvalues (infinite for `n < 2`).
    pub min_gap: f64,
    /// Set when `min_gap` is below [`REPEATED_EIGENVALUE_GAP`].
    pub repeated_warning: bool,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `GFT^{-1} diag(Lambda) GFT`.
    pub fn reconstruct(&self) -> Result<CMatrix> {
        let mut scaled = self.gft.clone();
        for (r, lambda) in self.eigenvalues.iter().enumerate() {
            for c in 0..scaled.cols() {
                scaled[(r, c)] *= lambda;
            }
        }
        self.igft.matmul(&scaled)
    }
}

/// Full dense eigendecomposition. Undirected graphs take the symmetric
/// route and get an orthogonal GFT.
pub fn spectrum(g: &Graph) -> Result<Spectrum> {
    let n = g.n();
    let a = g.dense_with_cap(DEFAULT_DENSE_CAP)?;
    let (eigenvalues, igft, gft) = if g.is_directed() {
        let e = linalg::general_eigen(&a)?;
        let gft = e.vectors.inverse()?;
        (e.values, e.vectors, gft)
    } else {
        let e = linalg::symmetric_eigen(&a)?;
        let values = e.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let igft = CMatrix::from_real(&e.vectors);
        let gft = CMatrix::from_real(&e.vectors.transpose());
        (values, igft, gft)
    };
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            min_gap = min_gap.min((eigenvalues[i] - eigenvalues[j]).norm());
        }
    }
    let condition_estimate = if n == 0 {
        1.0
    } else {
        igft.frobenius_norm() * gft.frobenius_norm() / n as f64
    };
    Ok(Spectrum {
        eigenvalues,
        gft,
        igft,
        condition_estimate,
        min_gap,
        repeated_warning: min_gap < REPEATED_EIGENVALUE_GAP,
    })
}

fn check_rows(s: &Spectrum, rows: usize) -> Result<()> {
    if rows != s.n() {
        return Err(Error::Shape(format!(
            "signal has {rows} rows, spectrum has {} components",
            s.n()
        )));
    }
    Ok(())
}

/// `x_hat = GFT x`.
pub fn gft_apply(s: &Spectrum, x: &Tensor) -> Result<CMatrix> {
    check_rows(s, x.rows())?;
    s.gft.matmul(&CMatrix::from_real(x))
}

/// `GFT^{-1} x_hat`.
pub fn igft_apply(s: &Spectrum, x_hat: &CMatrix) -> Result<CMatrix> {
    check_rows(s, x_hat.rows())?;
    s.igft.matmul(x_hat)
}

/// `GFT^{-1} g(Lambda) GFT x`, returned as a real signal. Fails with a
/// duality violation when the imaginary residue exceeds
/// [`DUALITY_TOLERANCE`] (scaled by the signal magnitude).
pub fn spectral_filter(s: &Spectrum, c: &FilterCoeffs, x: &Tensor) -> Result<Tensor> {
    check_rows(s, x.rows())?;
    c.check_degree(s.n())?;
    let mut x_hat = gft_apply(s, x)?;
    for (r, &lambda) in s.eigenvalues.iter().enumerate() {
        let gain = c.eval(lambda);
        for col in 0..x_hat.cols() {
            x_hat[(r, col)] *= gain;
        }
    }
    let y = igft_apply(s, &x_hat)?;
    let magnitude = x.data().iter().map(|v| v.abs()).fold(1.0, f64::max);
    y.to_real(DUALITY_TOLERANCE * magnitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{erdos_renyi, ring_graph};

    fn col(v: &[f64]) -> Tensor {
        Tensor::column(v)
    }

    #[test]
    fn ring_shift_delays_signal() {
        let g = ring_graph(4).unwrap();
        let y = shift(&g, &col(&[10.0, 11.0, 12.0, 13.0])).unwrap();
        assert_eq!(y, col(&[13.0, 10.0, 11.0, 12.0]));
    }

    #[test]
    fn empty_graph_shift_is_zero() {
        let g = Graph::empty(3, false);
        assert_eq!(shift(&g, &col(&[1.0, 2.0, 3.0])).unwrap(), col(&[0.0; 3]));
    }

    #[test]
    fn shift_n_times_is_identity_on_ring() {
        let g = ring_graph(5).unwrap();
        let x = col(&[1.0, -2.0, 3.5, 0.0, 7.0]);
        let mut y = x.clone();
        for _ in 0..5 {
            y = shift(&g, &y).unwrap();
        }
        assert_eq!(y, x);
        assert!(shift(&g, &col(&[1.0])).is_err());
    }

    #[test]
    fn poly_filter_examples() {
        let g = ring_graph(4).unwrap();
        let x = col(&[1.0, 0.0, 0.0, 0.0]);
        let id = FilterCoeffs::new(vec![1.0]).unwrap();
        assert_eq!(poly_filter(&g, &id, &x).unwrap(), x);
        let f = FilterCoeffs::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(poly_filter(&g, &f, &x).unwrap(), col(&[1.0, 1.0, 0.0, 0.0]));
        let sq = FilterCoeffs::new(vec![0.0, 0.0, 1.0]).unwrap();
        let x2 = col(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(
            poly_filter(&g, &sq, &x2).unwrap(),
            shift(&g, &shift(&g, &x2).unwrap()).unwrap()
        );
        let too_long = FilterCoeffs::new(vec![1.0; 5]).unwrap();
        assert!(matches!(
            poly_filter(&g, &too_long, &x),
            Err(Error::Degree { degree: 4, n: 4 })
        ));
    }

    #[test]
    fn ring_spectrum_is_fourth_roots() {
        let s = spectrum(&ring_graph(4).unwrap()).unwrap();
        let roots = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for r in roots {
            assert!(s.eigenvalues.iter().any(|z| (z - r).norm() < 1e-8), "{r}");
        }
        assert!(!s.repeated_warning);
    }

    #[test]
    fn identity_adjacency_spectrum() {
        let g = ring_graph(1).unwrap();
        let s = spectrum(&g).unwrap();
        assert!((s.eigenvalues[0] - 1.0).norm() < 1e-12);
        let eye = Graph::from_dense(&Tensor::identity(3), false).unwrap();
        let s = spectrum(&eye).unwrap();
        assert!(s.repeated_warning);
        assert!(s
            .reconstruct()
            .unwrap()
            .max_abs_diff(&CMatrix::identity(3))
            < 1e-12);
    }

    #[test]
    fn spectral_filter_identity_and_shift() {
        let g = erdos_renyi(9, 0.4, 3).unwrap();
        let s = spectrum(&g).unwrap();
        let x = col(&[1.0, 2.0, -1.0, 0.5, 0.0, 3.0, -2.0, 1.0, 4.0]);
        let id = FilterCoeffs::new(vec![1.0]).unwrap();
        assert!(spectral_filter(&s, &id, &x).unwrap().max_abs_diff(&x) < 1e-8);

        let ring = ring_graph(8).unwrap();
        let s = spectrum(&ring).unwrap();
        let x = col(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let f = FilterCoeffs::new(vec![0.0, 1.0]).unwrap();
        let y = spectral_filter(&s, &f, &x).unwrap();
        assert!(y.max_abs_diff(&col(&[8.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])) < 1e-8);
    }

    #[test]
    fn gft_round_trip_and_zero() {
        let g = ring_graph(6).unwrap();
        let s = spectrum(&g).unwrap();
        let x = col(&[0.3, -1.0, 2.0, 0.0, 5.0, 1.0]);
        let back = igft_apply(&s, &gft_apply(&s, &x).unwrap()).unwrap();
        assert!(back.max_abs_diff(&CMatrix::from_real(&x)) < 1e-8);
        let zero = gft_apply(&s, &Tensor::zeros(6, 1)).unwrap();
        assert!(zero.frobenius_norm() == 0.0);
        assert!(gft_apply(&s, &Tensor::zeros(5, 1)).is_err());
    }

    #[test]
    fn constant_signal_concentrates_on_unit_eigenvalue() {
        let s = spectrum(&ring_graph(8).unwrap()).unwrap();
        let x_hat = gft_apply(&s, &Tensor::filled(8, 1, 1.0)).unwrap();
        let total: f64 = (0..8).map(|k| x_hat[(k, 0)].norm_sqr()).sum();
        let at_one: f64 = (0..8)
            .filter(|&k| (s.eigenvalues[k] - 1.0).norm() < 1e-8)
            .map(|k| x_hat[(k, 0)].norm_sqr())
            .sum();
        assert!(at_one / total > 1.0 - 1e-12);
    }

    #[test]
    fn compose_multiplies_polynomials() {
        let a = FilterCoeffs::new(vec![1.0, 2.0]).unwrap();
        let b = FilterCoeffs::new(vec![3.0, 0.0, 1.0]).unwrap();
        assert_eq!(a.compose(&b).alpha(), &[3.0, 6.0, 1.0, 2.0]);
    }
}
