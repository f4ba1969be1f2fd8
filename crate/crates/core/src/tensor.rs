//! Dense 4-dimensional tensor values and small jet linear algebra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Jet;

pub const DIM: usize = 4;

pub type Vec4<T> = [T; DIM];
pub type Mat4<T> = [[T; DIM]; DIM];
pub type Arr3<T> = [[[T; DIM]; DIM]; DIM];
pub type Arr4<T> = [[[[T; DIM]; DIM]; DIM]; DIM];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Upper,
    Lower,
}

/// Numeric tensor at a point, components in row-major index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorValue {
    pub name: String,
    pub variance: Vec<Variance>,
    pub point: [f64; DIM],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<[f64; DIM]>,
    pub components: Vec<f64>,
}

impl TensorValue {
    pub fn new(
        name: &str,
        variance: Vec<Variance>,
        point: [f64; DIM],
        fiber: Option<[f64; DIM]>,
        components: Vec<f64>,
    ) -> TensorValue {
        assert_eq!(components.len(), DIM.pow(variance.len() as u32));
        TensorValue {
            name: name.to_string(),
            variance,
            point,
            fiber,
            components,
        }
    }

    pub fn scalar(name: &str, point: [f64; DIM], fiber: Option<[f64; DIM]>, v: f64) -> Self {
        Self::new(name, vec![], point, fiber, vec![v])
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.rank());
        let flat = idx.iter().fold(0, |acc, &i| acc * DIM + i);
        self.components[flat]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest |T_ij - T_ji| over the given index pair.
    pub fn asymmetry(&self, a: usize, b: usize) -> f64 {
        let r = self.rank();
        assert!(a < r && b < r && a != b);
        let mut worst: f64 = 0.0;
        for flat in 0..self.components.len() {
            let mut idx = unflatten(flat, r);
            let v = self.components[flat];
            idx.swap(a, b);
            worst = worst.max((v - self.get(&idx)).abs());
        }
        worst
    }
}

fn unflatten(mut flat: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = flat % DIM;
        flat /= DIM;
    }
    idx
}

pub fn flat_vec(v: &Vec4<f64>) -> Vec<f64> {
    v.to_vec()
}

pub fn flat_mat(m: &Mat4<f64>) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

pub fn flat3(t: &Arr3<f64>) -> Vec<f64> {
    t.iter().flatten().flatten().copied().collect()
}

pub fn flat4(t: &Arr4<f64>) -> Vec<f64> {
    t.iter().flatten().flatten().flatten().copied().collect()
}

pub fn values_vec(v: &Vec4<Jet>) -> Vec4<f64> {
    std::array::from_fn(|i| v[i].value())
}

pub fn values_mat(m: &Mat4<Jet>) -> Mat4<f64> {
    std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].value()))
}

pub fn values3(t: &Arr3<Jet>) -> Arr3<f64> {
    std::array::from_fn(|i| values_mat(&t[i]))
}

pub fn map_mat<T, U>(m: &Mat4<T>, f: impl Fn(&T) -> U) -> Mat4<U> {
    std::array::from_fn(|i| std::array::from_fn(|j| f(&m[i][j])))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Contraction `Σ_k a_k b_k` over jets.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = &a[0] * &b[0];
    for k in 1..a.len() {
        acc += &a[k] * &b[k];
    }
    acc
}

/// Inverse of a jet-valued 4x4 matrix by Gauss-Jordan elimination with
/// partial pivoting on the point values.
pub fn invert(m: &Mat4<Jet>) -> Result<Mat4<Jet>> {
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |s, j| s.max(j.value().abs()));
    let like = &m[0][0];
    let mut a: Vec<Vec<Jet>> = m.iter().map(|r| r.to_vec()).collect();
    let mut inv: Vec<Vec<Jet>> = (0..DIM)
        .map(|i| {
            (0..DIM)
                .map(|j| Jet::constant(if i == j { 1.0 } else { 0.0 }, like.order(), like.nvars()))
                .collect()
        })
        .collect();
    for col in 0..DIM {
        let piv = (col..DIM)
            .max_by(|&p, &q| {
                a[p][col]
                    .value()
                    .abs()
                    .total_cmp(&a[q][col].value().abs())
            })
            .expect("non-empty range");
        let pv = a[piv][col].value();
        if !(pv.abs() > 1e-14 * scale.max(f64::MIN_POSITIVE)) || !pv.is_finite() {
            return Err(Error::Singular(format!(
                "metric is not invertible (pivot {pv:e})"
            )));
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let r = a[col][col].recip()?;
        for j in 0..DIM {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for row in 0..DIM {
            if row == col {
                continue;
            }
            let f = a[row][col].clone();
            if f.max_abs() == 0.0 {
                continue;
            }
            for j in 0..DIM {
                let t = &f * &a[col][j];
                a[row][j] -= t;
                let t = &f * &inv[col][j];
                inv[row][j] -= t;
            }
        }
    }
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| inv[i][j].clone())))
}

/// Determinant of a jet-valued 4x4 matrix by cofactor expansion.
pub fn det(m: &Mat4<Jet>) -> Jet {
    let minor3 = |r: [usize; 3], c: [usize; 3]| -> Jet {
        let e = |i: usize, j: usize| &m[r[i]][c[j]];
        e(0, 0) * &(e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * &(e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * &(e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
    };
    let mut acc: Option<Jet> = None;
    for j in 0..DIM {
        let cols: Vec<usize> = (0..DIM).filter(|&c| c != j).collect();
        let term = &m[0][j] * &minor3([1, 2, 3], [cols[0], cols[1], cols[2]]);
        acc = Some(match acc {
            None => term,
            Some(a) if j % 2 == 0 => a + term,
            Some(a) => a - term,
        });
    }
    acc.expect("dimension is positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn const_mat(m: [[f64; 4]; 4]) -> Mat4<Jet> {
        map_mat(&m, |&v| Jet::constant(v, 1, 1))
    }

    #[test]
    fn inverse_and_determinant() {
        let m = [
            [2.0, 0.3, 0.0, 0.1],
            [0.3, -1.0, 0.2, 0.0],
            [0.0, 0.2, -3.0, 0.4],
            [0.1, 0.0, 0.4, -0.5],
        ];
        let jm = const_mat(m);
        let inv = values_mat(&invert(&jm).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                let p: f64 = (0..4).map(|k| m[i][k] * inv[k][j]).sum();
                assert_relative_eq!(p, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        let d = det(&jm).value();
        let nd = nalgebra::Matrix4::from_fn(|i, j| m[i][j]).determinant();
        assert_relative_eq!(d, nd, max_relative = 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let jm = const_mat([[1.0, 0.0, 0.0, 0.0]; 4]);
        assert!(matches!(invert(&jm), Err(Error::Singular(_))));
    }

    #[test]
    fn inverse_carries_derivatives() {
        // m(t) = diag(t, 1, 1, 1); d(1/t)/dt = -1/t^2.
        let t = Jet::variable(0, 2.0, 2, 1).unwrap();
        let one = Jet::constant(1.0, 2, 1);
        let zero = Jet::zero(2, 1);
        let mut m: Mat4<Jet> = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
        m[0][0] = t;
        for i in 1..4 {
            m[i][i] = one.clone();
        }
        let inv = invert(&m).unwrap();
        assert_relative_eq!(inv[0][0].d1(0), -0.25, epsilon = 1e-15);
        assert_relative_eq!(inv[0][0].d2(0, 0), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn tensor_value_indexing() {
        let mut comps = vec![0.0; 16];
        comps[4 + 2] = 3.0;
        let t = TensorValue::new("t", vec![Variance::Lower; 2], [0.0; 4], None, comps);
        assert_eq!(t.get(&[1, 2]), 3.0);
        assert_eq!(t.asymmetry(0, 1), 3.0);
    }
}
