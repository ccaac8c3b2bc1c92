//! Small dense polynomials in one and two variables.
//!
//! Only what the phase solver needs: evaluation, derivatives, restriction of a
//! bivariate cubic to a line, and the sign-changing real roots of a
//! univariate polynomial on an interval.

/// Univariate polynomial, coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&0.0) + other.0.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| s * c).collect())
    }

    /// Degree after dropping exact trailing zeros; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|&c| c != 0.0)
    }

    /// Roots in `[lo, hi]` where the polynomial changes sign, ascending.
    ///
    /// Monotone pieces are delimited by the sign changes of the derivative,
    /// found recursively; each bracketing piece is bisected to full precision.
    /// Roots of even multiplicity are not reported. An exact zero at an
    /// endpoint is reported.
    pub fn sign_change_roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        if !(lo <= hi) {
            return roots;
        }
        match self.degree() {
            None | Some(0) => return roots,
            Some(1) => {
                let r = -self.0[0] / self.0[1];
                if (lo..=hi).contains(&r) {
                    roots.push(r);
                }
                return roots;
            }
            Some(_) => {}
        }
        let mut knots = vec![lo];
        knots.extend(self.derivative().sign_change_roots(lo, hi));
        knots.push(hi);
        for w in knots.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let (f0, f1) = (self.eval(x0), self.eval(x1));
            if f0 == 0.0 && x0 == lo {
                roots.push(lo);
            } else if f0 * f1 < 0.0 {
                roots.push(bisect(self, x0, x1, f0));
            }
            if f1 == 0.0 && x1 == hi && x1 != x0 {
                roots.push(hi);
            }
        }
        roots.dedup();
        roots
    }
}

fn bisect(p: &Poly, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg_at_a = fa < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = p.eval(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Bivariate polynomial of total degree at most 3, `Σ c[i][j] a^i b^j`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cubic2 {
    pub c: [[f64; 4]; 4],
}

impl Cubic2 {
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        let mut s = 0.0;
        let mut ai = 1.0;
        for i in 0..4 {
            let mut bj = 1.0;
            for j in 0..4 - i {
                s += self.c[i][j] * ai * bj;
                bj *= b;
            }
            ai *= a;
        }
        s
    }

    pub fn d_a(&self) -> Cubic2 {
        let mut out = Cubic2::default();
        for i in 1..4 {
            for j in 0..4 - i {
                out.c[i - 1][j] = i as f64 * self.c[i][j];
            }
        }
        out
    }

    pub fn d_b(&self) -> Cubic2 {
        let mut out = Cubic2::default();
        for i in 0..4 {
            for j in 1..4 - i {
                out.c[i][j - 1] = j as f64 * self.c[i][j];
            }
        }
        out
    }

    /// `t ↦ self(p + t u)`.
    pub fn restrict(&self, p: (f64, f64), u: (f64, f64)) -> Poly {
        let la = Poly(vec![p.0, u.0]);
        let lb = Poly(vec![p.1, u.1]);
        let mut pa = vec![Poly(vec![1.0])];
        let mut pb = vec![Poly(vec![1.0])];
        for k in 1..4 {
            pa.push(pa[k - 1].mul(&la));
            pb.push(pb[k - 1].mul(&lb));
        }
        let mut out = Poly(vec![0.0]);
        for i in 0..4 {
            for j in 0..4 - i {
                if self.c[i][j] != 0.0 {
                    out = out.add(&pa[i].mul(&pb[j]).scale(self.c[i][j]));
                }
            }
        }
        out
    }

    /// Coefficients in `a` as polynomials in `b`: `self = Σ_i A_i(b) a^i`.
    pub fn in_a(&self) -> [Poly; 4] {
        std::array::from_fn(|i| Poly(self.c[i][..4 - i].to_vec()))
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.c.iter().flatten().fold(0.0, |m, c| m.max(c.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roots_of_product() {
        // (x - 0.2)(x - 0.5)(x - 0.9)
        let p = Poly(vec![-0.09, 0.73, -1.6, 1.0]);
        let r = p.sign_change_roots(0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.2, 0.5, 0.9]) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn double_root_needs_no_bracket() {
        // (x - 0.5)^2 (x - 0.1); rounding may or may not split the double root
        let p = Poly(vec![-0.025, 0.35, -1.1, 1.0]);
        let r = p.sign_change_roots(0.0, 1.0);
        assert!((r[0] - 0.1).abs() < 1e-14);
        assert!(r[1..].iter().all(|x| (x - 0.5).abs() < 1e-7));
    }

    #[test]
    fn restriction_matches_eval() {
        let mut q = Cubic2::default();
        q.c[0][0] = 0.3;
        q.c[1][0] = -1.0;
        q.c[0][2] = 2.0;
        q.c[2][1] = -0.7;
        q.c[1][2] = 0.4;
        let line = q.restrict((0.2, 0.1), (-1.0, 1.0));
        for t in [0.0, 0.25, 0.6] {
            assert!((line.eval(t) - q.eval(0.2 - t, 0.1 + t)).abs() < 1e-14);
        }
        let h = 1e-6;
        let (a, b) = (0.3, 0.4);
        let fd = (q.eval(a + h, b) - q.eval(a - h, b)) / (2.0 * h);
        assert!((q.d_a().eval(a, b) - fd).abs() < 1e-8);
        let fd = (q.eval(a, b + h) - q.eval(a, b - h)) / (2.0 * h);
        assert!((q.d_b().eval(a, b) - fd).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn roots_are_roots(r in prop::array::uniform3(-1.0f64..1.0), k in 0.1f64..10.0) {
            let p = Poly(vec![-r[0], 1.0])
                .mul(&Poly(vec![-r[1], 1.0]))
                .mul(&Poly(vec![-r[2], 1.0]))
                .scale(k);
            for x in p.sign_change_roots(-1.0, 1.0) {
                let near = r.iter().map(|ri| (x - ri).abs()).fold(f64::INFINITY, f64::min);
                prop_assert!(near < 1e-5 || p.eval(x).abs() < 1e-12);
            }
        }
    }
}
