//! Dense tensors at a single point.

use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    None,
    /// Symmetric in the last two slots.
    SymmetricPair,
    /// Antisymmetric in the last two slots.
    AntisymmetricPair,
    /// Antisymmetric in the last two slots of a (1,3) or (0,4) curvature tensor.
    Riemann,
}

/// Components are stored row-major with the contravariant slots first.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTensor<T> {
    n: usize,
    up: usize,
    down: usize,
    data: Vec<T>,
    symmetry: Symmetry,
}

impl<T: Real> PointTensor<T> {
    pub fn zeros(n: usize, up: usize, down: usize) -> Self {
        PointTensor { n, up, down, data: vec![T::zero(); n.pow((up + down) as u32)], symmetry: Symmetry::None }
    }

    pub fn from_fn(n: usize, up: usize, down: usize, f: impl Fn(&[usize]) -> T) -> Self {
        let mut t = Self::zeros(n, up, down);
        let rank = up + down;
        let mut idx = vec![0usize; rank];
        for k in 0..t.data.len() {
            let mut r = k;
            for s in (0..rank).rev() {
                idx[s] = r % n;
                r /= n;
            }
            t.data[k] = f(&idx);
        }
        t
    }

    pub fn with_symmetry(mut self, s: Symmetry) -> Self {
        self.symmetry = s;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn valence(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.up + self.down);
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        PointTensor { data: self.data.iter().map(|&x| f(x)).collect(), ..self.clone() }
    }

    pub fn zip(&self, o: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!((self.n, self.up, self.down), (o.n, o.up, o.down), "tensor shape mismatch");
        PointTensor {
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| f(a, b)).collect(),
            symmetry: if self.symmetry == o.symmetry { self.symmetry } else { Symmetry::None },
            ..self.clone()
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn max_diff(&self, o: &Self) -> T {
        self.sub(o).max_abs()
    }

    /// Largest violation of the declared symmetry.
    pub fn symmetry_defect(&self) -> T {
        let rank = self.up + self.down;
        let sign = match self.symmetry {
            Symmetry::None => return T::zero(),
            Symmetry::SymmetricPair => T::one(),
            Symmetry::AntisymmetricPair | Symmetry::Riemann => -T::one(),
        };
        let mut worst = T::zero();
        let n = self.n;
        let mut idx = vec![0usize; rank];
        for k in 0..self.data.len() {
            let mut r = k;
            for s in (0..rank).rev() {
                idx[s] = r % n;
                r /= n;
            }
            let mut sw = idx.clone();
            sw.swap(rank - 1, rank - 2);
            worst = worst.max((self.data[k] - sign * self.get(&sw)).abs());
        }
        worst
    }

    /// 2-index tensor as nested rows.
    pub fn to_matrix(&self) -> Vec<Vec<T>> {
        assert_eq!(self.up + self.down, 2, "to_matrix needs a 2-index tensor");
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(&[i, j])).collect()).collect()
    }

    pub fn from_matrix(m: &[Vec<T>], up: usize, down: usize) -> Self {
        Self::from_fn(m.len(), up, down, |i| m[i[0]][i[1]])
    }
}

/// Contract the first contravariant slot with the first covariant slot.
pub fn trace1<T: Real>(t: &PointTensor<T>) -> PointTensor<T> {
    let (up, down) = t.valence();
    assert!(up >= 1 && down >= 1, "trace1 needs a mixed tensor");
    let n = t.dim();
    PointTensor::from_fn(n, up - 1, down - 1, |rest| {
        let mut idx = Vec::with_capacity(up + down);
        let (ru, rd) = rest.split_at(up - 1);
        let mut s = T::zero();
        for k in 0..n {
            idx.clear();
            idx.push(k);
            idx.extend_from_slice(ru);
            idx.push(k);
            idx.extend_from_slice(rd);
            s = s + t.get(&idx);
        }
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_of_identity_is_dimension() {
        let id = PointTensor::<f64>::from_fn(4, 1, 1, |i| if i[0] == i[1] { 1.0 } else { 0.0 });
        assert_eq!(trace1(&id).get(&[]), 4.0);
    }

    #[test]
    fn trace1_contracts_first_up_with_first_down() {
        // X ⊗ a ⊗ m  ->  a(X) m
        let x = [1.0, 2.0, 3.0];
        let a = [0.5, -1.0, 2.0];
        let m = [4.0, 5.0, 6.0];
        let t = PointTensor::<f64>::from_fn(3, 1, 2, |i| x[i[0]] * a[i[1]] * m[i[2]]);
        let ax: f64 = x.iter().zip(&a).map(|(p, q)| p * q).sum();
        let r = trace1(&t);
        for k in 0..3 {
            assert!((r.get(&[k]) - ax * m[k]).abs() < 1e-14);
        }
    }
}
