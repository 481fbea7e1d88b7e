//! Market, preference and regulatory parameters, the state-dependent
//! investment cap, and the well-posedness test that gates every solve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{neg, pos, Real};

/// Market and preference constants of the balance-sheet model.
///
/// Rates are per year, volatilities per square-root year. `mu_l` is the
/// total deposit drift `gamma + r_L`, so the deposit rate is
/// `r_L = mu_l - gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Risk-free rate.
    pub r: T,
    /// Risky asset drift.
    pub mu: T,
    /// Deposit drift, `gamma + r_L`.
    #[serde(alias = "mu_L")]
    pub mu_l: T,
    /// Shareholder discount rate.
    pub rho: T,
    /// Risky asset volatility.
    pub sigma: T,
    /// Deposit volatility.
    #[serde(alias = "sigma_L")]
    pub sigma_l: T,
    /// Correlation between the risky-asset and deposit Brownian motions.
    pub c: T,
    /// Exogenous deposit growth rate.
    pub gamma: T,
    /// Dilution cost fraction charged on pre-issuance equity.
    pub kappa: T,
    /// Proportional issuance cost.
    pub kappa_prime: T,
}

impl<T: Real> ModelParams<T> {
    /// Effective discount rate of the reduced problem, `rho - mu_l`.
    pub fn rho_l(&self) -> T {
        self.rho - self.mu_l
    }

    /// Deposit interest rate `r_L = mu_l - gamma`.
    pub fn r_l(&self) -> T {
        self.mu_l - self.gamma
    }

    /// Structural bounds on the constants.
    ///
    /// Note that `r > r_L` is *not* enforced here: it is the economically
    /// interesting regime (positive drift at `y = 1`), but the variational
    /// inequality and the immediate-liquidation bound are well defined
    /// without it, and the degenerate-liquidation regime requires
    /// `r_L >= r`.
    pub fn validate(&self) -> Result<()> {
        let one = T::one();
        if !(self.sigma > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !(self.sigma_l > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_l must be > 0, got {}",
                self.sigma_l
            )));
        }
        if !(self.rho > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "rho must be > 0, got {}",
                self.rho
            )));
        }
        if !(self.c.abs() <= one) {
            return Err(Error::InvalidParameter(format!(
                "|c| must be <= 1, got {}",
                self.c
            )));
        }
        if !(self.kappa > T::zero() && self.kappa < one) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie in (0,1), got {}",
                self.kappa
            )));
        }
        if !(self.kappa_prime > T::zero() && self.kappa_prime < one) {
            return Err(Error::InvalidParameter(format!(
                "kappa_prime must lie in (0,1), got {}",
                self.kappa_prime
            )));
        }
        Ok(())
    }
}

/// Regulatory triple: solvency floor `a1`, 30-day run-off fraction `a2`,
/// HQLA haircut `a3`, plus the optional leverage cap `pi <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegulatoryParams<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
    /// When set, the admissible risky fraction is additionally capped at 1.
    #[serde(default)]
    pub leverage_capped: bool,
}

impl<T: Real> RegulatoryParams<T> {
    pub fn new(a1: T, a2: T, a3: T) -> Self {
        RegulatoryParams {
            a1,
            a2,
            a3,
            leverage_capped: false,
        }
    }

    pub fn capped(a1: T, a2: T, a3: T) -> Self {
        RegulatoryParams {
            a1,
            a2,
            a3,
            leverage_capped: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let one = T::one();
        for (name, v) in [("a1", self.a1), ("a2", self.a2), ("a3", self.a3)] {
            if !(v > T::zero() && v < one) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0,1), got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `max(a1, a3)`, the binding haircut for large ratios.
    pub fn a_bar(&self) -> T {
        self.a1.max(self.a3)
    }

    /// Limit of the investment cap as `y -> infinity`:
    /// `1/a_bar`, clamped at 1 under the leverage cap.
    pub fn pi_limit(&self) -> T {
        let lim = T::one() / self.a_bar();
        if self.leverage_capped {
            lim.min(T::one())
        } else {
            lim
        }
    }
}

/// Regulatory upper bound on the risky-asset fraction,
/// `min((1/a1)(1 - 1/y), (1/a3)(1 - a2/y))`, clamped at 1 under the
/// leverage cap. Non-negative and non-decreasing on `[1, oo)`.
pub fn pi_bar<T: Real>(y: T, reg: &RegulatoryParams<T>) -> Result<T> {
    let one = T::one();
    if y < one {
        return Err(Error::BelowDomain(y.as_f64()));
    }
    let solvency = (one - one / y) / reg.a1;
    let liquidity = (one - reg.a2 / y) / reg.a3;
    let mut cap = solvency.min(liquidity);
    if reg.leverage_capped {
        cap = cap.min(one);
    }
    Ok(cap.max(T::zero()))
}

/// Ratio at which the binding branch of `pi_bar` switches from solvency to
/// liquidity, `(a3 - a1 a2) / (a3 - a1)`.
///
/// Undefined when `a3 <= a1`: the solvency branch then binds for every `y`.
pub fn y_hat<T: Real>(reg: &RegulatoryParams<T>) -> Result<T> {
    if reg.a3 <= reg.a1 {
        return Err(Error::NoSwitchPoint);
    }
    Ok((reg.a3 - reg.a1 * reg.a2) / (reg.a3 - reg.a1))
}

/// Drift-maximizing ("myopic") instantaneous return
/// `mu*(y) = r + pi*(y) (mu - r)` with `pi*(y) = pi_bar(y) 1{mu >= r}`.
pub fn mu_star<T: Real>(y: T, p: &ModelParams<T>, reg: &RegulatoryParams<T>) -> Result<T> {
    let cap = pi_bar(y, reg)?;
    let pi_star = if p.mu >= p.r { cap } else { T::zero() };
    Ok(p.r + pi_star * (p.mu - p.r))
}

/// Outcome of the well-posedness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport<T> {
    /// Both conditions hold strictly: the value function is finite and
    /// non-trivial.
    pub feasible: bool,
    /// `max(mu_l, r + (mu-r)^+ * lim pi_bar)`; the discount rate must
    /// exceed this for the value to stay finite.
    pub rho_bound: T,
    /// Supersolution constant for the liquidity-dominated branch
    /// (`-inf` when `a3 <= a1` and that branch never binds).
    pub a: T,
    /// Supersolution constant for the solvency-dominated branch.
    pub b: T,
    /// `-rho_l >= max(a, b) + gamma` while the first condition holds:
    /// the value function is exactly `y - 1` and the optimal policy is to
    /// liquidate immediately.
    pub degenerate_liquidation: bool,
}

impl<T: Real> FeasibilityReport<T> {
    /// Constant `K` of the linear upper bound `v(y) <= y + K`.
    ///
    /// Only meaningful when the first well-posedness condition holds
    /// (`rho_l > 0`); returns `+inf` otherwise.
    pub fn upper_k(&self, p: &ModelParams<T>) -> T {
        let rho_l = p.rho_l();
        if rho_l <= T::zero() {
            return T::infinity();
        }
        (-rho_l).max(self.a.max(self.b) + p.gamma) / rho_l
    }

    /// Human-readable description of the violated condition, if any.
    pub fn violation(&self, p: &ModelParams<T>) -> Option<String> {
        if p.rho <= self.rho_bound {
            return Some(format!(
                "rho = {} must exceed max(mu_l, r + (mu-r)^+/a_bar) = {}",
                p.rho, self.rho_bound
            ));
        }
        if self.degenerate_liquidation {
            return Some(format!(
                "-rho_l = {} >= max(A,B) + gamma = {}: immediate liquidation is optimal (v = y - 1)",
                -p.rho_l(),
                self.a.max(self.b) + p.gamma
            ));
        }
        None
    }
}

/// Well-posedness test of the control problem.
///
/// The problem is feasible when `rho > max(mu_l, r + (mu-r)^+ / a_bar)`
/// (with the attainable drift capped at `max(r, mu)` under the leverage
/// restriction) and `-rho_l < max(A, B) + gamma`. When the second condition
/// fails while the first holds, the value function degenerates to `y - 1`.
pub fn feasibility<T: Real>(p: &ModelParams<T>, reg: &RegulatoryParams<T>) -> FeasibilityReport<T> {
    let excess = pos(p.mu - p.r);
    let rho_bound = p.mu_l.max(p.r + excess * reg.pi_limit());

    // Supersolution constants. The switch point collapses to 1 when the
    // liquidity branch never binds.
    let (y_hat_eff, liquidity_active) = match y_hat(reg) {
        Ok(yh) => (yh, true),
        Err(_) => (T::one(), false),
    };
    let a = if liquidity_active {
        (p.r + excess / reg.a3 - p.rho) * y_hat_eff - reg.a2 * excess / reg.a3
    } else {
        T::neg_infinity()
    };
    let c1 = p.r + excess / reg.a1 - p.rho;
    let b = pos(c1) * y_hat_eff - neg(c1) - excess / reg.a1;

    let first = p.rho > rho_bound;
    let second = -p.rho_l() < a.max(b) + p.gamma;
    FeasibilityReport {
        feasible: first && second,
        rho_bound,
        a,
        b,
        degenerate_liquidation: first && !second,
    }
}
