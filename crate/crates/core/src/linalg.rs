//! Small dense complex matrices and LU with partial pivoting.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|z| **z != ZERO).count()
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z = -*z);
        for i in 0..self.n {
            out[(i, i)] += ONE;
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// `P A = L U`, stored compactly.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Self {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor != ZERO {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= factor * u;
                    }
                }
            }
        }
        Self { lu, perm, sign, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> Complex64 {
        if self.singular {
            return ZERO;
        }
        (0..self.lu.dim()).fold(Complex64::new(self.sign, 0.0), |acc, i| acc * self.lu[(i, i)])
    }

    /// Solve `A x = b`. `None` if `A` is exactly singular.
    pub fn solve(&self, b: &[Complex64]) -> Option<Vec<Complex64>> {
        if self.singular {
            return None;
        }
        let n = self.lu.dim();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: Complex64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        Some(x)
    }

    /// Solve `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Option<Vec<Complex64>> {
        if self.singular {
            return None;
        }
        let n = self.lu.dim();
        // A = P^T L U, so A^H = U^H L^H P; solve U^H y = b, L^H z = y, x = P^T z.
        let mut y = b.to_vec();
        for i in 0..n {
            let s: Complex64 = (0..i).map(|j| self.lu[(j, i)].conj() * y[j]).sum();
            y[i] = (y[i] - s) / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|j| self.lu[(j, i)].conj() * y[j]).sum();
            y[i] -= s;
        }
        let mut x = vec![ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Some(x)
    }
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Laplace expansion along the first row.
    fn det_by_cofactors(m: &ComplexMatrix) -> Complex64 {
        let n = m.dim();
        if n == 0 {
            return ONE;
        }
        if n == 1 {
            return m[(0, 0)];
        }
        let mut total = ZERO;
        for j in 0..n {
            let rows: Vec<Vec<Complex64>> = (1..n)
                .map(|i| (0..n).filter(|&k| k != j).map(|k| m[(i, k)]).collect())
                .collect();
            let minor = det_by_cofactors(&ComplexMatrix::from_rows(&rows));
            let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += sgn * m[(0, j)] * minor;
        }
        total
    }

    fn sample() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(2.0, 1.0), c(-1.0, 0.5), c(0.3, 0.0)],
            vec![c(1.0, -1.0), c(0.5, 0.0), c(0.0, 2.0), c(1.0, 1.0)],
            vec![c(2.0, 0.0), c(-1.0, -1.0), c(3.0, 0.0), c(0.0, -0.7)],
            vec![c(0.1, 0.2), c(0.0, 0.0), c(1.0, 0.0), c(-2.0, 0.5)],
        ])
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m = sample();
        let d = Lu::factor(&m).det();
        let e = det_by_cofactors(&m);
        assert!((d - e).norm() < 1e-12 * e.norm());
    }

    #[test]
    fn solves_and_adjoint_solves() {
        let m = sample();
        let lu = Lu::factor(&m);
        let b = vec![c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.5), c(0.3, -0.1)];
        let x = lu.solve(&b).unwrap();
        let r: Vec<Complex64> = m.mul_vec(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) < 1e-12);
        let y = lu.solve_adjoint(&b).unwrap();
        let r: Vec<Complex64> = m.adjoint().mul_vec(&y).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) < 1e-12);
    }

    #[test]
    fn singular_and_empty() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        let lu = Lu::factor(&m);
        assert!(lu.is_singular());
        assert_eq!(lu.det(), ZERO);
        assert!(lu.solve(&[ONE, ONE]).is_none());
        assert_eq!(Lu::factor(&ComplexMatrix::zeros(0)).det(), ONE);
    }
}
