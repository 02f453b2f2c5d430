//! Product definitions, variable-separated path simulation, and per-path
//! Greek estimators.
//!
//! Paths are simulated in the separated form
//!
//! > S(t_j) = S̃(t_j) · exp(ω t₁ + σ√t₁ x₁),  S̃(t_j) = S₀ · exp(ω (t_j−t₁) + σ W̃(t_j−t₁)),
//!
//! where x₁ drives W(t₁), W̃ is the Brownian motion restarted at t₁, and
//! ω = r − σ²/2. The conditionally smoothed (CPW) estimators integrate the
//! payoff analytically over x₁, which turns indicator payoffs into smooth
//! functions of ψ_d = (ln K − ln statistic − ω t₁)/(σ√t₁) with the
//! statistic S̃_A (average) or S̃_max (maximum). The likelihood-ratio
//! estimators multiply the plain discounted payoff by the density scores.
//! Every estimator here is a pure function of its arguments.

use crate::error::{Error, Result};
use crate::normal::{cdf_upper, pdf};

/// Market state of the underlying: spot, volatility, rate, maturity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    pub s0: f64,
    pub sigma: f64,
    pub rate: f64,
    pub maturity: f64,
    omega: f64,
}

impl MarketParams {
    pub fn new(s0: f64, sigma: f64, rate: f64, maturity: f64) -> Result<Self> {
        if !(s0 > 0.0) {
            return Err(Error::Validation(format!("S0 must be positive, got {s0}")));
        }
        if !(sigma > 0.0) {
            return Err(Error::Validation(format!(
                "volatility must be positive, got {sigma}"
            )));
        }
        if !(maturity > 0.0) {
            return Err(Error::Validation(format!(
                "maturity must be positive, got {maturity}"
            )));
        }
        if !rate.is_finite() {
            return Err(Error::Validation(format!("rate must be finite, got {rate}")));
        }
        Ok(Self {
            s0,
            sigma,
            rate,
            maturity,
            omega: rate - 0.5 * sigma * sigma,
        })
    }

    /// Risk-neutral log drift ω = r − σ²/2 (cached).
    #[inline]
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Discount factor e^{−rT}.
    #[inline]
    pub fn discount(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }
}

/// Supported option types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductKind {
    ArithmeticAsian,
    BinaryAsian,
    Lookback,
    EuropeanCall,
}

impl ProductKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProductKind::ArithmeticAsian => "arithmetic-asian",
            ProductKind::BinaryAsian => "binary-asian",
            ProductKind::Lookback => "lookback",
            ProductKind::EuropeanCall => "european-call",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "arithmetic-asian" => Ok(ProductKind::ArithmeticAsian),
            "binary-asian" => Ok(ProductKind::BinaryAsian),
            "lookback" => Ok(ProductKind::Lookback),
            "european-call" => Ok(ProductKind::EuropeanCall),
            other => Err(Error::Config(format!("unknown product '{other}'"))),
        }
    }
}

impl std::fmt::Display for ProductKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Option contract: kind, fixed strike, and number of equally spaced
/// monitoring dates t_j = jT/d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductSpec {
    pub kind: ProductKind,
    pub strike: f64,
    pub steps: usize,
}

impl ProductSpec {
    pub fn new(kind: ProductKind, strike: f64, steps: usize) -> Result<Self> {
        if !(strike > 0.0) {
            return Err(Error::Validation(format!(
                "strike must be positive, got {strike}"
            )));
        }
        if steps == 0 {
            return Err(Error::Validation("step count must be at least 1".into()));
        }
        Ok(Self {
            kind,
            strike,
            steps,
        })
    }

    /// First monitoring date t₁ = T/d (= the step width dt).
    #[inline]
    pub fn t1(&self, mp: &MarketParams) -> f64 {
        mp.maturity / self.steps as f64
    }
}

/// Streaming per-path state: the separated coordinate x₁ plus the
/// accumulators the estimators need. No path storage is kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub x1: f64,
    /// S̃_A: arithmetic mean of S̃(t_j), j = 1..d.
    pub s_tilde_mean: f64,
    /// S̃_max: maximum of S̃(t_j).
    pub s_tilde_max: f64,
    /// Σ_j S̃(t_j) (W̃(t_j−t₁) − σ(t_j−t₁)) over all steps.
    pub vega_sum_all: f64,
    /// Same sum restricted to the argmax step(s); ties all contribute.
    pub vega_sum_argmax: f64,
}

impl PathState {
    /// exp(ω t₁ + σ√t₁ x₁): the factor that turns S̃ statistics into S
    /// statistics.
    #[inline]
    pub fn separation_factor(&self, mp: &MarketParams, spec: &ProductSpec) -> f64 {
        let t1 = spec.t1(mp);
        (mp.omega() * t1 + mp.sigma * t1.sqrt() * self.x1).exp()
    }
}

/// Simulates one path from x₁ and the d−1 increments of W̃ over (t₁, t_d],
/// filling every accumulator in a single pass.
///
/// Non-finite inputs or intermediate values reject the path with an error;
/// nothing is clamped or dropped silently.
pub fn simulate_path(
    mp: &MarketParams,
    spec: &ProductSpec,
    x1: f64,
    w_increments: &[f64],
) -> Result<PathState> {
    let d = spec.steps;
    if w_increments.len() != d - 1 {
        return Err(Error::Config(format!(
            "expected {} W-tilde increments for {} steps, got {}",
            d - 1,
            d,
            w_increments.len()
        )));
    }
    if !x1.is_finite() {
        return Err(Error::Domain(format!("non-finite x1: {x1}")));
    }
    let t1 = spec.t1(mp);

    // j = 1: W̃(0) = 0, so S̃(t₁) = S₀ and the vega term vanishes.
    let mut s_tilde = mp.s0;
    let mut sum = s_tilde;
    let mut max = s_tilde;
    let mut vega_all = 0.0;
    let mut vega_max = 0.0;

    let mut w = 0.0;
    for (i, &dw) in w_increments.iter().enumerate() {
        w += dw;
        let tau = (i + 1) as f64 * t1; // t_j − t₁ for j = i+2
        s_tilde = mp.s0 * (mp.omega() * tau + mp.sigma * w).exp();
        if !s_tilde.is_finite() || s_tilde <= 0.0 {
            return Err(Error::Domain(format!(
                "degenerate S-tilde at step {} (w = {w})",
                i + 2
            )));
        }
        sum += s_tilde;
        let term = s_tilde * (w - mp.sigma * tau);
        vega_all += term;
        if s_tilde > max {
            max = s_tilde;
            vega_max = term;
        } else if s_tilde == max {
            vega_max += term;
        }
    }

    Ok(PathState {
        x1,
        s_tilde_mean: sum / d as f64,
        s_tilde_max: max,
        vega_sum_all: vega_all,
        vega_sum_argmax: vega_max,
    })
}

/// ψ_d = (ln K − ln statistic − ω t₁) / (σ√t₁): the lower integration
/// limit of the separated coordinate.
pub fn psi_d(mp: &MarketParams, spec: &ProductSpec, statistic: f64) -> Result<f64> {
    if !(statistic > 0.0) {
        return Err(Error::Domain(format!(
            "psi_d statistic must be positive, got {statistic}"
        )));
    }
    let t1 = spec.t1(mp);
    Ok((spec.strike.ln() - statistic.ln() - mp.omega() * t1) / (mp.sigma * t1.sqrt()))
}

/// One path's estimator values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GreekSample {
    pub price: f64,
    pub delta: f64,
    pub vega: f64,
    pub gamma: f64,
}

/// CPW estimators for the binary Asian option:
/// price e^{−rT}[1−Φ(ψ)], delta e^{−rT}φ(ψ)/(S₀σ√t₁), and the matching
/// gamma/vega derivatives of the smoothed payoff.
pub fn cpw_greeks_binary(
    ps: &PathState,
    mp: &MarketParams,
    spec: &ProductSpec,
) -> Result<GreekSample> {
    let t1 = spec.t1(mp);
    let srt = mp.sigma * t1.sqrt();
    let psi = psi_d(mp, spec, ps.s_tilde_mean)?;
    let disc = mp.discount();
    let density = pdf(psi);
    let d = spec.steps as f64;

    let price = disc * cdf_upper(psi);
    let delta = disc * density / (mp.s0 * srt);
    let gamma = disc * density / (mp.s0 * mp.s0 * srt) * (psi / srt - 1.0);
    let vega = disc
        * density
        * (ps.vega_sum_all / (d * srt * ps.s_tilde_mean) + psi / mp.sigma - t1.sqrt());

    Ok(GreekSample {
        price,
        delta,
        vega,
        gamma,
    })
}

/// CPW estimators for smoothed average/maximum call payoffs; shared by the
/// arithmetic Asian (statistic S̃_A) and lookback (statistic S̃_max) cases.
/// `statistic_sigma_derivative` is ∂statistic/∂σ on this path.
fn cpw_greeks_smoothed_call(
    statistic: f64,
    statistic_sigma_derivative: f64,
    mp: &MarketParams,
    spec: &ProductSpec,
) -> Result<GreekSample> {
    let t1 = spec.t1(mp);
    let srt = mp.sigma * t1.sqrt();
    let psi = psi_d(mp, spec, statistic)?;
    let df1 = (mp.rate * (t1 - mp.maturity)).exp(); // e^{r(t₁−T)}
    let dfk = mp.discount() * spec.strike; // K e^{−rT}
    let upper_shifted = cdf_upper(psi - srt); // 1 − Φ(ψ − σ√t₁)
    let upper = cdf_upper(psi); // 1 − Φ(ψ)
    let density = pdf(psi);

    let price = df1 * statistic * upper_shifted - dfk * upper;
    let delta = df1 * (statistic / mp.s0) * upper_shifted;
    let gamma = dfk * density / (mp.s0 * mp.s0 * srt);
    let vega = df1 * upper_shifted * statistic_sigma_derivative + dfk * density * t1.sqrt();

    Ok(GreekSample {
        price,
        delta,
        vega,
        gamma,
    })
}

/// CPW estimators for the arithmetic Asian option:
/// ∂S̃_A/∂σ = (1/d) Σ_j S̃(t_j)(W̃(t_j−t₁) − σ(t_j−t₁)).
pub fn cpw_greeks_arithmetic(
    ps: &PathState,
    mp: &MarketParams,
    spec: &ProductSpec,
) -> Result<GreekSample> {
    let d = spec.steps as f64;
    cpw_greeks_smoothed_call(ps.s_tilde_mean, ps.vega_sum_all / d, mp, spec)
}

/// CPW estimators for the fixed-strike lookback option: the arithmetic
/// formulas with S̃_A → S̃_max. The vega factor is the σ-derivative of the
/// maximum, which by the envelope argument is the argmax step's term
/// S̃_max(W̃(t*−t₁) − σ(t*−t₁)) alone (no 1/d averaging; ties summed).
pub fn cpw_greeks_lookback(
    ps: &PathState,
    mp: &MarketParams,
    spec: &ProductSpec,
) -> Result<GreekSample> {
    cpw_greeks_smoothed_call(ps.s_tilde_max, ps.vega_sum_argmax, mp, spec)
}

/// CPW dispatch on product kind. `EuropeanCall` has no CPW estimator here;
/// it is the plain-MC validation product.
pub fn cpw_greeks(ps: &PathState, mp: &MarketParams, spec: &ProductSpec) -> Result<GreekSample> {
    match spec.kind {
        ProductKind::ArithmeticAsian => cpw_greeks_arithmetic(ps, mp, spec),
        ProductKind::BinaryAsian => cpw_greeks_binary(ps, mp, spec),
        ProductKind::Lookback => cpw_greeks_lookback(ps, mp, spec),
        ProductKind::EuropeanCall => Err(Error::Config(
            "the European call is priced by plain Monte Carlo, not CPW".into(),
        )),
    }
}

/// Discounted payoff of the path: e^{−rT}(S_A−K)⁺, e^{−rT}1{S_A>K}, or
/// e^{−rT}(S_max−K)⁺ depending on the product.
pub fn discounted_payoff(ps: &PathState, mp: &MarketParams, spec: &ProductSpec) -> Result<f64> {
    let factor = ps.separation_factor(mp, spec);
    let disc = mp.discount();
    Ok(match spec.kind {
        ProductKind::ArithmeticAsian => {
            disc * (ps.s_tilde_mean * factor - spec.strike).max(0.0)
        }
        ProductKind::BinaryAsian => {
            if ps.s_tilde_mean * factor > spec.strike {
                disc
            } else {
                0.0
            }
        }
        ProductKind::Lookback => disc * (ps.s_tilde_max * factor - spec.strike).max(0.0),
        ProductKind::EuropeanCall => {
            return Err(Error::Config(
                "European call payoff comes from european_call_sample".into(),
            ))
        }
    })
}

/// Likelihood-ratio estimators: the discounted payoff multiplied by the
/// density scores
/// delta Z₁/(S₀σ√t₁),
/// gamma (Z₁²−1)/(S₀²σ²t₁) − Z₁/(S₀²σ√t₁),
/// vega Σ_j (Z_j²−1)/σ − Z_j√t₁.
pub fn lr_greeks(
    discounted_payoff: f64,
    z: &[f64],
    mp: &MarketParams,
    spec: &ProductSpec,
) -> GreekSample {
    let t1 = spec.t1(mp);
    let sqrt_t1 = t1.sqrt();
    let srt = mp.sigma * sqrt_t1;
    let z1 = z[0];

    let delta_score = z1 / (mp.s0 * srt);
    let gamma_score =
        (z1 * z1 - 1.0) / (mp.s0 * mp.s0 * mp.sigma * mp.sigma * t1) - z1 / (mp.s0 * mp.s0 * srt);
    let mut vega_score = 0.0;
    for &zj in z.iter().take(spec.steps) {
        vega_score += (zj * zj - 1.0) / mp.sigma - zj * sqrt_t1;
    }

    GreekSample {
        price: discounted_payoff,
        delta: discounted_payoff * delta_score,
        vega: discounted_payoff * vega_score,
        gamma: discounted_payoff * gamma_score,
    }
}

/// One-draw European call sample: discounted payoff plus the pathwise
/// delta e^{−rT}(S(T)/S₀)1{S(T)>K}. The validation product for the whole
/// pipeline.
pub fn european_call_sample(mp: &MarketParams, strike: f64, z1: f64) -> GreekSample {
    let st = mp.s0 * (mp.omega() * mp.maturity + mp.sigma * mp.maturity.sqrt() * z1).exp();
    let disc = mp.discount();
    let (price, delta) = if st > strike {
        (disc * (st - strike), disc * st / mp.s0)
    } else {
        (0.0, 0.0)
    };
    GreekSample {
        price,
        delta,
        vega: 0.0,
        gamma: 0.0,
    }
}
