/// Euclidean projection onto `K = {a ≥ 0, b ≥ 0, a + b ≤ 1}`.
///
/// Closed form by normal-cone region: the plane splits into the triangle,
/// three edge strips and three vertex wedges.
pub fn project_k(a: f64, b: f64) -> (f64, f64) {
    if a >= 0.0 && b >= 0.0 && a + b <= 1.0 {
        return (a, b);
    }
    if a + b > 1.0 {
        if a - b >= 1.0 {
            return (1.0, 0.0);
        }
        if b - a >= 1.0 {
            return (0.0, 1.0);
        }
        let t = 0.5 * (1.0 + a - b);
        let mut s = 1.0 - t;
        // keep a + b ≤ 1 exact under rounding
        while t + s > 1.0 {
            s = f64::from_bits(s.to_bits() - 1);
        }
        return (t, s);
    }
    (a.clamp(0.0, 1.0), b.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(project_k(0.5, 0.3), (0.5, 0.3));
        assert_eq!(project_k(-0.2, 0.5), (0.0, 0.5));
        let (a, b) = project_k(1.2, 0.3);
        assert!((a - 0.95).abs() < 1e-15 && (b - 0.05).abs() < 1e-15);
        assert_eq!(project_k(2.0, 2.0), (0.5, 0.5));
        assert_eq!(project_k(0.0, 0.0), (0.0, 0.0));
        assert_eq!(project_k(-1.0, 1.5), (0.0, 1.0));
        assert_eq!(project_k(3.0, -0.5), (1.0, 0.0));
    }

    #[test]
    fn idempotent() {
        for &(a, b) in &[(1.2, 0.3), (-3.0, -1.0), (0.7, 0.9), (-0.5, 4.0)] {
            let p = project_k(a, b);
            assert_eq!(project_k(p.0, p.1), p);
        }
    }
}
