//! Symmetric 3x3 matrices stored by their six independent components.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

/// Storage order of the six independent components: upper triangle, row-major.
pub const COMPONENTS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Position of `(i, j)` (either order) in [`COMPONENTS`].
#[inline]
pub const fn component_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// A symmetric 3x3 matrix. Symmetry is structural: only six entries exist.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SymMat3<T> {
    pub c: [T; 6],
}

impl<T: Copy> SymMat3<T> {
    pub const fn from_components(c: [T; 6]) -> Self {
        Self { c }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut c = [f(0, 0); 6];
        for (k, &(i, j)) in COMPONENTS.iter().enumerate().skip(1) {
            c[k] = f(i, j);
        }
        Self { c }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.c[component_index(i, j)]
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> SymMat3<U> {
        SymMat3 {
            c: [f(self.c[0]), f(self.c[1]), f(self.c[2]), f(self.c[3]), f(self.c[4]), f(self.c[5])],
        }
    }
}

impl<T: Copy + Add<Output = T>> Add for SymMat3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a = *a + b;
        }
        Self { c }
    }
}

impl<T: Copy + Add<Output = T>> AddAssign for SymMat3<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Copy + Sub<Output = T>> Sub for SymMat3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a = *a - b;
        }
        Self { c }
    }
}

impl<T: Copy + Neg<Output = T>> Neg for SymMat3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl<T: Copy + Mul<Output = T>> Mul<T> for SymMat3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.map(|x| x * s)
    }
}

impl SymMat3<f64> {
    pub const ZERO: Self = Self { c: [0.0; 6] };

    pub fn identity() -> Self {
        Self::from_components([1.0, 0.0, 0.0, 1.0, 0.0, 1.0])
    }

    pub fn scaled_identity(s: f64) -> Self {
        Self::from_components([s, 0.0, 0.0, s, 0.0, s])
    }

    /// Projection onto `span(w)`. `w` must be nonzero.
    pub fn parallel_projection(w: [f64; 3]) -> Self {
        let n2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        Self::from_fn(|i, j| w[i] * w[j] / n2)
    }

    /// Projection onto the plane orthogonal to `w`. `w` must be nonzero.
    pub fn perpendicular_projection(w: [f64; 3]) -> Self {
        Self::identity() - Self::parallel_projection(w)
    }

    pub fn trace(&self) -> f64 {
        self.c[0] + self.c[3] + self.c[5]
    }

    pub fn frobenius_norm(&self) -> f64 {
        let d = self.c[0] * self.c[0] + self.c[3] * self.c[3] + self.c[5] * self.c[5];
        let o = self.c[1] * self.c[1] + self.c[2] * self.c[2] + self.c[4] * self.c[4];
        libm::sqrt(d + 2.0 * o)
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.get(i, 0) * v[0] + self.get(i, 1) * v[1] + self.get(i, 2) * v[2];
        }
        out
    }

    /// Eigenvalues in ascending order (closed-form trigonometric solution).
    pub fn eigenvalues(&self) -> [f64; 3] {
        let [a00, a01, a02, a11, a12, a22] = self.c;
        let p1 = a01 * a01 + a02 * a02 + a12 * a12;
        let q = (a00 + a11 + a22) / 3.0;
        if p1 == 0.0 {
            let mut e = [a00, a11, a22];
            e.sort_unstable_by(f64::total_cmp);
            return e;
        }
        let p2 = (a00 - q) * (a00 - q) + (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) + 2.0 * p1;
        let p = libm::sqrt(p2 / 6.0);
        let b = (*self - Self::scaled_identity(q)) * (1.0 / p);
        let det_b = b.c[0] * (b.c[3] * b.c[5] - b.c[4] * b.c[4])
            - b.c[1] * (b.c[1] * b.c[5] - b.c[4] * b.c[2])
            + b.c[2] * (b.c[1] * b.c[4] - b.c[3] * b.c[2]);
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = libm::acos(r) / 3.0;
        let largest = q + 2.0 * p * libm::cos(phi);
        let smallest = q + 2.0 * p * libm::cos(phi + 2.0 * core::f64::consts::PI / 3.0);
        let middle = 3.0 * q - largest - smallest;
        [smallest, middle, largest]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()[2]
    }

    pub fn to_complex(&self) -> SymMat3<Complex64> {
        self.map(|x| Complex64::new(x, 0.0))
    }
}

impl SymMat3<Complex64> {
    pub fn zero() -> Self {
        Self { c: [Complex64::new(0.0, 0.0); 6] }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let d = self.c[0].norm_sqr() + self.c[3].norm_sqr() + self.c[5].norm_sqr();
        let o = self.c[1].norm_sqr() + self.c[2].norm_sqr() + self.c[4].norm_sqr();
        libm::sqrt(d + 2.0 * o)
    }

    pub fn real_part(&self) -> SymMat3<f64> {
        self.map(|x| x.re)
    }

    pub fn imag_part(&self) -> SymMat3<f64> {
        self.map(|x| x.im)
    }
}

/// Relative Frobenius distance `|a - b| / |b|`, falling back to the absolute
/// distance when `b` vanishes.
pub fn relative_frobenius_error(a: &SymMat3<f64>, b: &SymMat3<f64>) -> f64 {
    let diff = (*a - *b).frobenius_norm();
    let scale = b.frobenius_norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Complex counterpart of [`relative_frobenius_error`].
pub fn relative_frobenius_error_complex(a: &SymMat3<Complex64>, b: &SymMat3<Complex64>) -> f64 {
    let diff = (*a - *b).frobenius_norm();
    let scale = b.frobenius_norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_layout_round_trips() {
        for (k, &(i, j)) in COMPONENTS.iter().enumerate() {
            assert_eq!(component_index(i, j), k);
            assert_eq!(component_index(j, i), k);
        }
    }

    #[test]
    fn eigenvalues_of_diagonal_and_rotated() {
        let d = SymMat3::from_components([3.0, 0.0, 0.0, 1.0, 0.0, 2.0]);
        assert_eq!(d.eigenvalues(), [1.0, 2.0, 3.0]);

        // P_perp of an arbitrary direction has spectrum {0, 1, 1}.
        let p = SymMat3::perpendicular_projection([1.0, -2.0, 0.5]);
        let e = p.eigenvalues();
        assert!(e[0].abs() < 1e-14);
        assert!((e[1] - 1.0).abs() < 1e-14);
        assert!((e[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projections_split_identity() {
        let w = [0.3, 0.4, -1.2];
        let sum = SymMat3::parallel_projection(w) + SymMat3::perpendicular_projection(w);
        assert!((sum - SymMat3::identity()).frobenius_norm() < 1e-15);
        let pw = SymMat3::perpendicular_projection(w).mul_vec(w);
        assert!(pw.iter().all(|x| x.abs() < 1e-15));
    }
}
