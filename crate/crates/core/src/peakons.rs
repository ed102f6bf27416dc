//! Closed-form peakon solutions used as initial data and references.

/// `log(cosh t)` without overflow for large `|t|`.
pub fn log_cosh(t: f64) -> f64 {
    let a = t.abs();
    if a < 20.0 {
        a.cosh().ln()
    } else {
        a + (0.5 * (1.0 + (-2.0 * a).exp())).ln()
    }
}

/// `e^{-|x - t|}`: unit peakon travelling right at unit speed.
pub fn single_peakon(t: f64, x: f64) -> f64 {
    (-(x - t).abs()).exp()
}

/// Exact two-peakon solution in spectral form: eigenvalues `l1 != l2`,
/// weights `b_k(t) = b_k(0) e^{t / l_k}`. Asymptotic speeds are `1/l1`, `1/l2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPeakon {
    pub l1: f64,
    pub l2: f64,
    /// `ln b_k(0)`
    pub log_b1: f64,
    pub log_b2: f64,
}

impl TwoPeakon {
    /// `(m1, m2, x1, x2)` at time `t`, with `x1 < x2`.
    pub fn params(&self, t: f64) -> (f64, f64, f64, f64) {
        let (l1, l2) = (self.l1, self.l2);
        let lb1 = self.log_b1 + t / l1;
        let lb2 = self.log_b2 + t / l2;
        let r = (lb1 - lb2).exp();
        let m1 = (l1 * l1 * r + l2 * l2) / (l1 * l2 * (l1 * r + l2));
        let m2 = (r + 1.0) / (l1 * r + l2);
        let x2 = lb2 + r.ln_1p();
        let x1 = 2.0 * (l1 - l2).abs().ln() + lb1 - (l1 * l1 * r + l2 * l2).ln();
        (m1, m2, x1, x2)
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let (m1, m2, x1, x2) = self.params(t);
        m1 * (-(x - x1).abs()).exp() + m2 * (-(x - x2).abs()).exp()
    }
}

/// The reference interaction: speeds 1 and 1/2, `b(t) = (40 e^{t-10}, 60 e^{(t-10)/2})`.
pub const REFERENCE_PAIR: TwoPeakon = TwoPeakon {
    l1: 1.0,
    l2: 2.0,
    log_b1: 3.6888794541139363 - 10.0,
    log_b2: 4.0943445622221 - 5.0,
};

/// Amplitudes and positions `(m1, m2, x1, x2)` of [`REFERENCE_PAIR`].
pub fn two_peakon_params(t: f64) -> (f64, f64, f64, f64) {
    REFERENCE_PAIR.params(t)
}

pub fn two_peakon(t: f64, x: f64) -> f64 {
    REFERENCE_PAIR.eval(t, x)
}

/// Coefficients of the frequently quoted closed form
/// `x1 = log(18 e^s / (e^{s/2} + 6))`, `x2 = log(40 e^s + 60 e^{s/2})`,
/// `m1 = (e^{s/2} + 6) / (2 e^{s/2} + 3)`, `m2 = (e^{s/2} + 2/3) / (e^{s/2} + 3)`,
/// `s = t - 10`. This is not a solution (`m1 + m2` is not conserved); kept
/// for comparison with [`two_peakon_params`].
pub fn uncorrected_two_peakon_params(t: f64) -> (f64, f64, f64, f64) {
    let s = t - 10.0;
    let e_half = (0.5 * s).exp();
    let m1 = (e_half + 6.0) / (2.0 * e_half + 3.0);
    let m2 = (e_half + 2.0 / 3.0) / (e_half + 3.0);
    let x1 = 18f64.ln() + s - (e_half + 6.0).ln();
    let x2 = 0.5 * s + (40.0 * e_half + 60.0).ln();
    (m1, m2, x1, x2)
}

pub fn uncorrected_two_peakon(t: f64, x: f64) -> f64 {
    let (m1, m2, x1, x2) = uncorrected_two_peakon_params(t);
    m1 * (-(x - x1).abs()).exp() + m2 * (-(x - x2).abs()).exp()
}

/// Peakon-antipeakon initial profile
/// `-tanh(6) (e^{-|x + y(6)|} - e^{-|x - y(6)|})`, `y(t) = log cosh t`.
pub fn antipeakon_initial(x: f64) -> f64 {
    let y = log_cosh(6.0);
    -(6f64.tanh()) * ((-(x + y).abs()).exp() - (-(x - y).abs()).exp())
}

/// Conservative peakon-antipeakon solution
/// `tanh(t-1) (e^{-|x - y(t-1)|} - e^{-|x + y(t-1)|})`; vanishes at `t = 1`.
pub fn conservative_pair(t: f64, x: f64) -> f64 {
    let s = t - 1.0;
    let y = log_cosh(s);
    s.tanh() * ((-(x - y).abs()).exp() - (-(x + y).abs()).exp())
}

/// Selects one of the closed forms above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PeakonSpec {
    Single,
    TwoPeakon,
    /// Time-independent initial profile; has no exact evolution attached.
    AntipeakonPairInit,
    AntipeakonPairConservative,
}

impl PeakonSpec {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            PeakonSpec::Single => single_peakon(t, x),
            PeakonSpec::TwoPeakon => two_peakon(t, x),
            PeakonSpec::AntipeakonPairInit => antipeakon_initial(x),
            PeakonSpec::AntipeakonPairConservative => conservative_pair(t, x),
        }
    }

    /// Exact solution at time `t`, when one is known.
    pub fn exact(&self) -> Option<fn(f64, f64) -> f64> {
        match self {
            PeakonSpec::Single => Some(single_peakon),
            PeakonSpec::TwoPeakon => Some(two_peakon),
            PeakonSpec::AntipeakonPairInit => None,
            PeakonSpec::AntipeakonPairConservative => Some(conservative_pair),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_values() {
        assert_eq!(single_peakon(0.0, 0.0), 1.0);
        assert_eq!(single_peakon(20.0, 20.0), 1.0);
        assert!((single_peakon(20.0, 21.0) - 0.367879).abs() < 1e-6);
        for (t, x, s) in [(0.3, -2.0, 1.7), (5.0, 4.0, -3.0)] {
            assert_eq!(single_peakon(t + s, x + s), single_peakon(t, x));
        }
    }

    #[test]
    fn uncorrected_form_at_reference_time() {
        let (m1, m2, x1, x2) = uncorrected_two_peakon_params(10.0);
        assert!((x1 - (18.0f64 / 7.0).ln()).abs() < 1e-14);
        assert!((x1 - 0.944462).abs() < 1e-6);
        assert!((x2 - 100f64.ln()).abs() < 1e-13);
        assert!((x2 - 4.605170).abs() < 1e-6);
        assert!((m1 - 1.4).abs() < 1e-15);
        assert!((m2 - 5.0 / 12.0).abs() < 1e-15);
        let apex = uncorrected_two_peakon(10.0, x1);
        assert!((apex - (1.4 + 5.0 / 12.0 * 18.0 / 700.0)).abs() < 1e-13);
        assert!((apex - 1.410714).abs() < 1e-6);
        for t in [0.0, 3.0, 17.5, 25.0] {
            let (_, _, x1, x2) = uncorrected_two_peakon_params(t);
            let e = |v: f64| v.exp();
            let x1_direct = (18.0 * e(t - 10.0) / (e((t - 10.0) / 2.0) + 6.0)).ln();
            let x2_direct = (40.0 * e(t - 10.0) + 60.0 * e((t - 10.0) / 2.0)).ln();
            assert!((x1 - x1_direct).abs() < 1e-12);
            assert!((x2 - x2_direct).abs() < 1e-12);
        }
        // total momentum drifts, so this is not a peakon solution
        let sum = |t| {
            let p = uncorrected_two_peakon_params(t);
            p.0 + p.1
        };
        assert!((sum(0.0) - sum(25.0)).abs() > 0.5);
    }

    #[test]
    fn reference_pair_at_t10() {
        let (m1, m2, x1, x2) = two_peakon_params(10.0);
        assert!((x1 - (60.0f64 / 7.0).ln()).abs() < 1e-13);
        assert!((x2 - 100f64.ln()).abs() < 1e-13);
        assert!((m1 - 0.875).abs() < 1e-15);
        assert!((m2 - 0.625).abs() < 1e-15);
        assert!(two_peakon(10.0, 800.0) < 1e-300 && two_peakon(10.0, -800.0) < 1e-300);
    }

    // Peakon ODE: x_i' = u(x_i), m1' = -m1 m2 e^{x1-x2}, m2' = -m1'.
    #[test]
    fn reference_pair_solves_peakon_ode() {
        let h = 1e-5;
        for t in [0.0, 4.0, 9.0, 10.0, 13.5, 25.0] {
            let (m1, m2, x1, x2) = two_peakon_params(t);
            let (a1, a2, y1, y2) = two_peakon_params(t + h);
            let (b1, b2, z1, z2) = two_peakon_params(t - h);
            let d = |p: f64, q: f64| (p - q) / (2.0 * h);
            let e = (x1 - x2).exp();
            assert!(x1 < x2);
            assert!((d(y1, z1) - (m1 + m2 * e)).abs() < 1e-8, "t={t}");
            assert!((d(y2, z2) - (m2 + m1 * e)).abs() < 1e-8, "t={t}");
            assert!((d(a1, b1) + m1 * m2 * e).abs() < 1e-8, "t={t}");
            assert!((d(a2, b2) - m1 * m2 * e).abs() < 1e-8, "t={t}");
            // conserved: sum m = 3/2, sum m_i m_j e^{-|xi-xj|} = 5/4
            assert!((m1 + m2 - 1.5).abs() < 1e-13);
            assert!((m1 * m1 + m2 * m2 + 2.0 * m1 * m2 * e - 1.25).abs() < 1e-13);
        }
    }

    #[test]
    fn two_peakon_coefficients_monotone() {
        let mut prev = two_peakon_params(0.0);
        let (dm1, dm2) = {
            let next = two_peakon_params(0.01);
            ((next.0 - prev.0).signum(), (next.1 - prev.1).signum())
        };
        for i in 1..=2500 {
            let p = two_peakon_params(i as f64 * 0.01);
            assert_eq!((p.0 - prev.0).signum(), dm1);
            assert_eq!((p.1 - prev.1).signum(), dm2);
            assert!(p.2 < p.3);
            prev = p;
        }
    }

    #[test]
    fn antipeakon_profile() {
        assert_eq!(antipeakon_initial(0.0), 0.0);
        let y6 = log_cosh(6.0);
        assert!((y6 - 5.306859).abs() < 1e-6);
        let apex = antipeakon_initial(-y6);
        assert!((apex + 6f64.tanh() * (1.0 - (-2.0 * y6).exp())).abs() < 1e-15);
        assert!((apex + 0.999963).abs() < 1e-6);
        for x in [0.1, 1.0, 5.3, 7.9, 20.0] {
            assert!((antipeakon_initial(-x) + antipeakon_initial(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn conservative_pair_values() {
        for x in [-3.0, 0.0, 0.2, 10.0] {
            assert_eq!(conservative_pair(1.0, x), 0.0);
        }
        for t in [0.0, 2.0, 7.0] {
            assert_eq!(conservative_pair(t, 0.0), 0.0);
        }
        let y1 = log_cosh(1.0);
        assert!((y1 - 0.433781).abs() < 1e-6);
        let v = conservative_pair(2.0, y1);
        assert!((v - 1f64.tanh() * (1.0 - (-2.0 * y1).exp())).abs() < 1e-15);
        assert!((v - 0.441).abs() < 1e-3);
    }

    #[test]
    fn log_cosh_branches_agree() {
        for t in [19.9f64, 20.0, 20.1, -25.0] {
            let direct = t.cosh().ln();
            assert!((log_cosh(t) - direct).abs() < 1e-12);
        }
        assert!(log_cosh(1000.0).is_finite());
    }
}
