//! Expectations-based reference-dependent utility over the good dimension.
//!
//! Money enters linearly; gain-loss utility compares consumption of the good
//! against a (possibly stochastic) reference outcome.

use crate::error::{Error, Result};

/// Gain-loss weight `η ≥ 0` and loss aversion `λ > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub eta: f64,
    pub lambda: f64,
}

impl LossParams {
    pub fn new(eta: f64, lambda: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eta must be >= 0, got {eta}"
            )));
        }
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 1, got {lambda}"
            )));
        }
        Ok(Self { eta, lambda })
    }

    /// Risk-neutral bidders (`η = 0`); `λ` is irrelevant but kept valid.
    pub fn risk_neutral() -> Self {
        Self {
            eta: 0.0,
            lambda: 2.0,
        }
    }

    /// `η(λ - 1)`, the weight of the attachment effect.
    pub fn attachment(&self) -> f64 {
        self.eta * (self.lambda - 1.0)
    }
}

/// `μ(x)`: `η x` for gains, `η λ x` for losses.
pub fn gain_loss(x: f64, p: &LossParams) -> f64 {
    if x >= 0.0 {
        p.eta * x
    } else {
        p.eta * p.lambda * x
    }
}

/// Total utility of outcome `(won, payment)` against the deterministic
/// reference `expected_win`: `q(t - p) + μ(q t - r̃ t)`.
pub fn total_utility(won: bool, payment: f64, expected_win: bool, t: f64, p: &LossParams) -> f64 {
    let q = if won { 1.0 } else { 0.0 };
    let r = if expected_win { 1.0 } else { 0.0 };
    q * (t - payment) + gain_loss(q * t - r * t, p)
}

/// A lottery over auction outcomes: the good with probability `win_prob`,
/// paying one of the atoms `(payment, weight)` conditional on winning.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeLottery {
    win_prob: f64,
    payments: Vec<(f64, f64)>,
}

impl OutcomeLottery {
    pub fn new(win_prob: f64, payments: Vec<(f64, f64)>) -> Result<Self> {
        if !(0.0..=1.0).contains(&win_prob) {
            return Err(Error::domain("win probability", win_prob, 0.0, 1.0));
        }
        if payments.iter().any(|&(_, w)| !(w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "payment weights must be nonnegative".into(),
            ));
        }
        let total: f64 = payments.iter().map(|&(_, w)| w).sum();
        if win_prob > 0.0 && (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "payment weights must sum to 1, got {total}"
            )));
        }
        Ok(Self { win_prob, payments })
    }

    /// Win with probability `q`, paying `payment` on a win.
    pub fn win_paying(q: f64, payment: f64) -> Result<Self> {
        Self::new(q, vec![(payment, 1.0)])
    }

    pub fn never() -> Self {
        Self {
            win_prob: 0.0,
            payments: Vec::new(),
        }
    }

    pub fn win_prob(&self) -> f64 {
        self.win_prob
    }

    pub fn expected_payment_on_win(&self) -> f64 {
        self.payments.iter().map(|&(p, w)| p * w).sum()
    }
}

/// Interim expected utility of facing outcome lottery `g` with reference
/// lottery `h`: the double expectation of [`total_utility`].
pub fn interim_expected_utility(
    g: &OutcomeLottery,
    h: &OutcomeLottery,
    t: f64,
    p: &LossParams,
) -> f64 {
    let refs = [(true, h.win_prob), (false, 1.0 - h.win_prob)];
    let mut eu = 0.0;
    for (expected, wr) in refs {
        if wr == 0.0 {
            continue;
        }
        for &(pay, w) in &g.payments {
            eu += wr * g.win_prob * w * total_utility(true, pay, expected, t, p);
        }
        eu += wr * (1.0 - g.win_prob) * total_utility(false, 0.0, expected, t, p);
    }
    eu
}

/// Closed form of [`interim_expected_utility`] for binary outcomes: win with
/// probability `q`, paying `payment_on_win`, against reference win
/// probability `q_ref`.
pub fn binary_expected_utility(
    q: f64,
    payment_on_win: f64,
    q_ref: f64,
    t: f64,
    p: &LossParams,
) -> f64 {
    q * (t - payment_on_win) + p.eta * q * (1.0 - q_ref) * t
        - p.eta * p.lambda * (1.0 - q) * q_ref * t
}

/// Marginal willingness to pay for winning probability, `t(1 + ηλq + η(1-q))`.
pub fn mwtp(t: f64, q: f64, p: &LossParams) -> f64 {
    t * (1.0 + p.eta * p.lambda * q + p.eta * (1.0 - q))
}

/// Payoff of a type-`t_true` bidder who plans to bid as `t_true` (reference
/// `q(t_true)`) but bids as `t_mimic`.
pub fn mimic_payoff<B, Q>(t_mimic: f64, t_true: f64, bid: B, q: Q, p: &LossParams) -> f64
where
    B: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let q_mimic = q(t_mimic);
    let q_true = q(t_true);
    q_mimic * (t_true - bid(t_mimic)) - p.eta * p.lambda * (1.0 - q_mimic) * q_true * t_true
        + p.eta * (1.0 - q_true) * q_mimic * t_true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p12() -> LossParams {
        LossParams::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(LossParams::new(-0.1, 2.0).is_err());
        assert!(LossParams::new(1.0, 1.0).is_err());
        assert!(LossParams::new(0.0, 1.5).is_ok());
    }

    #[test]
    fn gain_loss_examples() {
        assert_eq!(gain_loss(1.0, &p12()), 1.0);
        assert_eq!(gain_loss(-1.0, &p12()), -2.0);
        assert_eq!(gain_loss(0.0, &p12()), 0.0);
    }

    #[test]
    fn total_utility_examples() {
        let p = p12();
        assert!((total_utility(true, 0.3, true, 0.5, &p) - 0.2).abs() < 1e-15);
        assert!((total_utility(false, 0.0, true, 0.5, &p) + 1.0).abs() < 1e-15);
        assert!((total_utility(true, 0.3, false, 0.5, &p) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn interim_examples() {
        let p = p12();
        let g = OutcomeLottery::win_paying(1.0, 0.3).unwrap();
        assert!((interim_expected_utility(&g, &g, 0.5, &p) - 0.2).abs() < 1e-15);

        let g = OutcomeLottery::win_paying(1.0, 0.5).unwrap();
        let h = OutcomeLottery::never();
        assert!((interim_expected_utility(&g, &h, 0.5, &p) - 0.5).abs() < 1e-15);

        let g = OutcomeLottery::never();
        let h = OutcomeLottery::win_paying(0.5, 0.0).unwrap();
        assert!((interim_expected_utility(&g, &h, 1.0, &p) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn lottery_validation() {
        assert!(OutcomeLottery::new(1.2, vec![(0.0, 1.0)]).is_err());
        assert!(OutcomeLottery::new(0.5, vec![(0.0, 0.5)]).is_err());
        assert!(OutcomeLottery::new(0.5, vec![(0.1, 0.5), (0.2, 0.5)]).is_ok());
    }

    #[test]
    fn mwtp_examples() {
        let p = p12();
        assert!((mwtp(0.5, 0.0, &p) - 1.0).abs() < 1e-15);
        assert!((mwtp(0.5, 0.5, &p) - 1.25).abs() < 1e-15);
        assert!((mwtp(1.0, 1.0, &p) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn mimic_on_path_equals_equilibrium_utility() {
        // Unif[0,1], N=2, no reserve: q(t) = t, β(t) = t + t²/3.
        let p = p12();
        let bid = |t: f64| t + t * t / 3.0;
        let q = |t: f64| t;
        let t = 0.5;
        let on_path = binary_expected_utility(q(t), bid(t), q(t), t, &p);
        assert!((mimic_payoff(t, t, bid, q, &p) - on_path).abs() < 1e-15);
        assert!(mimic_payoff(0.6, t, bid, q, &p) < on_path);
    }

    #[test]
    fn marginal_type_indifference_in_the_limit() {
        // Public reserve: q jumps to F₁(t_r) at t_r, bid there is (1+η)t_r.
        let p = p12();
        let tr = 0.4;
        let q = |t: f64| if t >= tr { t } else { 0.0 };
        let bid = |t: f64| if t >= tr { (1.0 + p.eta) * tr } else { 0.0 };
        let mut last = f64::INFINITY;
        for gap in [1e-1, 1e-2, 1e-3, 1e-6] {
            let t = tr - gap;
            let diff = (mimic_payoff(tr, t, bid, q, &p) - mimic_payoff(t, t, bid, q, &p)).abs();
            assert!(diff < last);
            last = diff;
        }
        assert!(last < 1e-5);
    }

    proptest! {
        #[test]
        fn mwtp_monotone(t in 0.01f64..1.0, q in 0.0f64..0.99, dq in 0.001f64..0.01,
                         eta in 0.01f64..3.0, lambda in 1.01f64..10.0) {
            let p = LossParams::new(eta, lambda).unwrap();
            prop_assert!(mwtp(t + 0.01, q, &p) > mwtp(t, q, &p));
            prop_assert!(mwtp(t, q + dq, &p) > mwtp(t, q, &p));
            prop_assert!((mwtp(t, 0.0, &p) - (1.0 + eta) * t).abs() < 1e-15);
        }

        #[test]
        fn gain_loss_concave_and_below_linear(x in -5.0f64..5.0, y in -5.0f64..5.0, w in 0.0f64..1.0,
                                              eta in 0.0f64..3.0, lambda in 1.01f64..10.0) {
            let p = LossParams::new(eta, lambda).unwrap();
            let mix = gain_loss(w * x + (1.0 - w) * y, &p);
            prop_assert!(mix >= w * gain_loss(x, &p) + (1.0 - w) * gain_loss(y, &p) - 1e-12);
            prop_assert!(gain_loss(x, &p) <= eta * x + 1e-12);
        }

        #[test]
        fn risk_neutral_total_utility(pay in 0.0f64..2.0, t in 0.0f64..1.0, won: bool, expected: bool) {
            let p = LossParams::new(0.0, 2.0).unwrap();
            let q = if won { 1.0 } else { 0.0 };
            prop_assert!((total_utility(won, pay, expected, t, &p) - q * (t - pay)).abs() < 1e-15);
        }

        #[test]
        fn binary_closed_form_matches_double_expectation(q in 0.0f64..1.0, qr in 0.0f64..1.0,
                                                         pay in 0.0f64..2.0, t in 0.0f64..1.0) {
            let p = LossParams::new(0.7, 2.5).unwrap();
            let g = OutcomeLottery::win_paying(q, pay).unwrap();
            let h = OutcomeLottery::win_paying(qr, 0.0).unwrap();
            let a = interim_expected_utility(&g, &h, t, &p);
            let b = binary_expected_utility(q, pay, qr, t, &p);
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
