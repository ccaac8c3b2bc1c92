//! Symmetric second-order tensors in 3D.
//!
//! Components are stored as `[xx, yy, zz, xy, yz, zx]`. Contractions use full
//! Frobenius semantics: every off-diagonal entry appears twice in the
//! reconstructed 3×3 matrix and is counted twice in inner products and norms.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Component labels in storage order.
pub const COMPONENTS: [&str; 6] = ["xx", "yy", "zz", "xy", "yz", "zx"];

/// Frobenius weight of each stored component.
const WEIGHTS: [f64; 6] = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];

/// Symmetric 3×3 tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 6]", into = "[f64; 6]")]
pub struct SymTensor3 {
    c: [f64; 6],
}

impl From<[f64; 6]> for SymTensor3 {
    fn from(c: [f64; 6]) -> Self {
        SymTensor3 { c }
    }
}

impl From<SymTensor3> for [f64; 6] {
    fn from(t: SymTensor3) -> Self {
        t.c
    }
}

impl SymTensor3 {
    pub const fn new(xx: f64, yy: f64, zz: f64, xy: f64, yz: f64, zx: f64) -> Self {
        SymTensor3 {
            c: [xx, yy, zz, xy, yz, zx],
        }
    }

    pub const fn zero() -> Self {
        SymTensor3 { c: [0.0; 6] }
    }

    pub const fn identity() -> Self {
        SymTensor3::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0)
    }

    pub const fn diag(xx: f64, yy: f64, zz: f64) -> Self {
        SymTensor3::new(xx, yy, zz, 0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> &[f64; 6] {
        &self.c
    }

    pub fn get(&self, k: usize) -> f64 {
        self.c[k]
    }

    pub fn set(&mut self, k: usize, v: f64) {
        self.c[k] = v;
    }

    /// Unit tensor of the `k`-th storage slot (off-diagonal slots fill both entries).
    pub fn basis(k: usize) -> Self {
        let mut c = [0.0; 6];
        c[k] = 1.0;
        SymTensor3 { c }
    }

    /// Full 3×3 matrix.
    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let [xx, yy, zz, xy, yz, zx] = self.c;
        [[xx, xy, zx], [xy, yy, yz], [zx, yz, zz]]
    }

    /// Reads the symmetric part of a full matrix.
    pub fn from_matrix(m: &[[f64; 3]; 3]) -> Self {
        SymTensor3::new(
            m[0][0],
            m[1][1],
            m[2][2],
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[1][2] + m[2][1]),
            0.5 * (m[2][0] + m[0][2]),
        )
    }

    pub fn trace(&self) -> f64 {
        self.c[0] + self.c[1] + self.c[2]
    }

    pub fn dot(&self, other: &SymTensor3) -> f64 {
        self.c
            .iter()
            .zip(other.c.iter())
            .zip(WEIGHTS.iter())
            .map(|((a, b), w)| w * a * b)
            .sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn dev(&self) -> DevTensor3 {
        let m = self.trace() / 3.0;
        let mut c = self.c;
        c[0] -= m;
        c[1] -= m;
        c[2] -= m;
        DevTensor3(SymTensor3 { c })
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &SymTensor3) -> f64 {
        self.c
            .iter()
            .zip(other.c.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for SymTensor3 {
    type Output = SymTensor3;
    fn add(mut self, rhs: SymTensor3) -> SymTensor3 {
        self += rhs;
        self
    }
}

impl AddAssign for SymTensor3 {
    fn add_assign(&mut self, rhs: SymTensor3) {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
    }
}

impl Sub for SymTensor3 {
    type Output = SymTensor3;
    fn sub(mut self, rhs: SymTensor3) -> SymTensor3 {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul<SymTensor3> for f64 {
    type Output = SymTensor3;
    fn mul(self, mut rhs: SymTensor3) -> SymTensor3 {
        for a in rhs.c.iter_mut() {
            *a *= self;
        }
        rhs
    }
}

impl Neg for SymTensor3 {
    type Output = SymTensor3;
    fn neg(self) -> SymTensor3 {
        -1.0 * self
    }
}

/// Trace-free symmetric tensor.
///
/// Built through [`SymTensor3::dev`] or [`DevTensor3::try_new`]; linear
/// combinations of deviators stay deviatoric up to rounding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
#[serde(into = "[f64; 6]")]
pub struct DevTensor3(SymTensor3);

impl From<DevTensor3> for [f64; 6] {
    fn from(t: DevTensor3) -> Self {
        t.0.c
    }
}

impl DevTensor3 {
    pub const fn zero() -> Self {
        DevTensor3(SymTensor3::zero())
    }

    /// Accepts `a` only if its trace vanishes within `1e-12 · (1 + ‖a‖)`.
    pub fn try_new(a: SymTensor3) -> Option<Self> {
        if a.trace().abs() <= 1e-12 * (1.0 + a.norm()) {
            Some(DevTensor3(a))
        } else {
            None
        }
    }

    pub fn as_sym(&self) -> &SymTensor3 {
        &self.0
    }

    pub fn into_sym(self) -> SymTensor3 {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn dot(&self, other: &DevTensor3) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Scales to the given norm; `None` for a (numerically) zero tensor.
    pub fn with_norm(&self, target: f64) -> Option<DevTensor3> {
        let n = self.norm();
        if n > f64::MIN_POSITIVE && n.is_finite() {
            // re-deviate to scrub rounding drift in the trace
            Some((target / n * self.0).dev())
        } else {
            None
        }
    }

    pub fn unit(&self) -> Option<DevTensor3> {
        self.with_norm(1.0)
    }

    /// Uniaxial-tension direction `dev(e_x ⊗ e_x)`, normalized.
    pub fn uniaxial() -> DevTensor3 {
        SymTensor3::diag(1.0, 0.0, 0.0)
            .dev()
            .unit()
            .expect("nonzero deviator")
    }
}

impl Add for DevTensor3 {
    type Output = DevTensor3;
    fn add(self, rhs: DevTensor3) -> DevTensor3 {
        DevTensor3(self.0 + rhs.0)
    }
}

impl Sub for DevTensor3 {
    type Output = DevTensor3;
    fn sub(self, rhs: DevTensor3) -> DevTensor3 {
        DevTensor3(self.0 - rhs.0)
    }
}

impl Mul<DevTensor3> for f64 {
    type Output = DevTensor3;
    fn mul(self, rhs: DevTensor3) -> DevTensor3 {
        DevTensor3(self * rhs.0)
    }
}

impl Neg for DevTensor3 {
    type Output = DevTensor3;
    fn neg(self) -> DevTensor3 {
        DevTensor3(-self.0)
    }
}

/// `a − (tr a / 3) I`.
pub fn dev(a: &SymTensor3) -> DevTensor3 {
    a.dev()
}

/// `Σ_ij a_ij b_ij` over the reconstructed matrices.
pub fn frob_inner(a: &SymTensor3, b: &SymTensor3) -> f64 {
    a.dot(b)
}

pub fn trace(a: &SymTensor3) -> f64 {
    a.trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix_inner(a: &SymTensor3, b: &SymTensor3) -> f64 {
        let (ma, mb) = (a.to_matrix(), b.to_matrix());
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += ma[i][j] * mb[i][j];
            }
        }
        s
    }

    fn sym() -> impl Strategy<Value = SymTensor3> {
        prop::array::uniform6(-10.0f64..10.0).prop_map(SymTensor3::from)
    }

    #[test]
    fn dev_examples() {
        assert_eq!(dev(&SymTensor3::identity()).norm(), 0.0);
        let d = dev(&SymTensor3::diag(3.0, 0.0, 0.0));
        assert_eq!(*d.as_sym(), SymTensor3::diag(2.0, -1.0, -1.0));
    }

    #[test]
    fn inner_examples() {
        let i = SymTensor3::identity();
        assert_eq!(frob_inner(&i, &i), 3.0);
        let a = SymTensor3::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        assert_eq!(frob_inner(&a, &SymTensor3::zero()), 0.0);
        let shear = SymTensor3::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        assert_eq!(frob_inner(&shear, &shear), 2.0);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&SymTensor3::identity()), 3.0);
        assert_eq!(trace(&SymTensor3::diag(1.0, 2.0, 3.0)), 6.0);
    }

    #[test]
    fn try_new_rejects_trace() {
        assert!(DevTensor3::try_new(SymTensor3::identity()).is_none());
        assert!(DevTensor3::try_new(SymTensor3::diag(1.0, -1.0, 0.0)).is_some());
    }

    #[test]
    fn matrix_roundtrip_is_symmetric() {
        let a = SymTensor3::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let m = a.to_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        assert_eq!(SymTensor3::from_matrix(&m), a);
    }

    proptest! {
        #[test]
        fn dev_is_trace_free_and_idempotent(a in sym()) {
            let d = dev(&a);
            prop_assert!(d.trace().abs() <= 1e-12 * (1.0 + a.norm()));
            let dd = dev(d.as_sym());
            prop_assert!(dd.as_sym().max_abs_diff(d.as_sym()) <= 1e-12 * (1.0 + a.norm()));
            prop_assert!(frob_inner(d.as_sym(), &SymTensor3::identity()).abs() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn orthogonal_split(a in sym()) {
            let lhs = a.norm_squared();
            let rhs = dev(&a).norm().powi(2) + a.trace().powi(2) / 3.0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs));
        }

        #[test]
        fn inner_matches_matrix_contraction(a in sym(), b in sym()) {
            let x = frob_inner(&a, &b);
            prop_assert!((x - matrix_inner(&a, &b)).abs() <= 1e-12 * (1.0 + x.abs()));
            prop_assert_eq!(x, frob_inner(&b, &a));
            prop_assert!(frob_inner(&a, &a) >= 0.0);
            prop_assert!((a.norm() - matrix_inner(&a, &a).sqrt()).abs() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn inner_is_bilinear(a in sym(), b in sym(), c in sym(), alpha in -5.0f64..5.0) {
            let lhs = frob_inner(&(alpha * a + b), &c);
            let rhs = alpha * frob_inner(&a, &c) + frob_inner(&b, &c);
            let scale = 1.0 + (alpha * frob_inner(&a, &c)).abs() + frob_inner(&b, &c).abs();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }
}
