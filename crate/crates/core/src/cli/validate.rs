//! The oracle and consistency suite behind `qmc-greeks validate`.
//!
//! Each check is an independent cross-examination of the estimators:
//! a closed-form European call oracle, central finite-difference oracles
//! for every CPW Greek, LR-vs-CPW agreement, and the fast structural
//! property checks. The acceptance tests run these same functions.

use std::time::Instant;

use crate::bridge::{bridge_increments_into, standard_increments_into, BridgePlan};
use crate::cli::config::ExperimentConfig;
use crate::engine::{antithetic_pair, inverse_layout_transform, layout_transform};
use crate::error::Result;
use crate::normal::cdf;
use crate::products::{
    cpw_greeks, discounted_payoff, european_call_sample, lr_greeks, simulate_path, GreekSample,
    MarketParams, ProductKind, ProductSpec,
};
use crate::rng::{PseudoStream, SobolGenerator};
use crate::stats::{aggregate, vrf, Greek};

/// Outcome of one validation check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Black–Scholes call price and delta (closed form).
pub fn black_scholes_call(mp: &MarketParams, strike: f64) -> (f64, f64) {
    let sqrt_t = mp.maturity.sqrt();
    let d1 = ((mp.s0 / strike).ln() + (mp.rate + 0.5 * mp.sigma * mp.sigma) * mp.maturity)
        / (mp.sigma * sqrt_t);
    let d2 = d1 - mp.sigma * sqrt_t;
    let price = mp.s0 * cdf(d1) - strike * mp.discount() * cdf(d2);
    (price, cdf(d1))
}

struct MeanVar {
    sum: f64,
    sum_sq: f64,
    n: usize,
}

impl MeanVar {
    fn new() -> Self {
        Self {
            sum: 0.0,
            sum_sq: 0.0,
            n: 0,
        }
    }

    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.n += 1;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Standard error of the mean.
    fn se(&self) -> f64 {
        let n = self.n as f64;
        let var = (self.sum_sq / n - self.mean() * self.mean()).max(0.0);
        (var / n).sqrt()
    }
}

fn within_3se(name: &str, a: f64, se_a: f64, b: f64, se_b: f64) -> Check {
    let tol = 3.0 * (se_a * se_a + se_b * se_b).sqrt();
    let diff = (a - b).abs();
    Check::new(
        name,
        diff <= tol,
        format!("|{a:.6} - {b:.6}| = {diff:.6} vs 3se = {tol:.6}"),
    )
}

/// Criterion-style European call oracle check: plain Monte Carlo price and
/// pathwise delta against the closed form, each within 3 standard errors.
pub fn european_call_oracle(mp: &MarketParams, strike: f64, paths: usize, seed: u64) -> Vec<Check> {
    let started = Instant::now();
    let stream = PseudoStream::new(seed, 1);
    let mut price = MeanVar::new();
    let mut delta = MeanVar::new();
    let mut z = [0.0; 1];
    for p in 0..paths {
        stream.fill_normals(p as u64, &mut z);
        let sample = european_call_sample(mp, strike, z[0]);
        price.push(sample.price);
        delta.push(sample.delta);
    }
    let elapsed = started.elapsed().as_secs_f64();
    let (bs_price, bs_delta) = black_scholes_call(mp, strike);
    let mut checks = vec![
        within_3se(
            "european price vs closed form",
            price.mean(),
            price.se(),
            bs_price,
            0.0,
        ),
        within_3se(
            "european pathwise delta vs closed form",
            delta.mean(),
            delta.se(),
            bs_delta,
            0.0,
        ),
    ];
    checks.push(Check::new(
        "european oracle runtime",
        true,
        format!("{paths} paths in {elapsed:.2}s single worker (target < 10s)"),
    ));
    checks
}

struct EstimatorMoments {
    cpw: [MeanVar; 4],
    lr: [MeanVar; 4],
    fd_delta: MeanVar,
    fd_vega: MeanVar,
    fd_gamma: MeanVar,
}

fn greek_idx(g: Greek) -> usize {
    match g {
        Greek::Delta => 0,
        Greek::Vega => 1,
        Greek::Gamma => 2,
    }
}

fn push_sample(slots: &mut [MeanVar; 4], g: &GreekSample) {
    slots[0].push(g.delta);
    slots[1].push(g.vega);
    slots[2].push(g.gamma);
    slots[3].push(g.price);
}

/// CPW means vs a common-random-number central finite-difference oracle
/// (bumps 0.5% on S0, 1% on σ), and LR means vs CPW means, all within
/// 3 combined standard errors.
pub fn fd_consistency(
    mp: &MarketParams,
    kind: ProductKind,
    strike: f64,
    steps: usize,
    paths: usize,
    seed: u64,
) -> Result<Vec<Check>> {
    let spec = ProductSpec::new(kind, strike, steps)?;
    let h_s = 0.005 * mp.s0;
    let h_sig = 0.01 * mp.sigma;
    let mp_s_up = MarketParams::new(mp.s0 + h_s, mp.sigma, mp.rate, mp.maturity)?;
    let mp_s_dn = MarketParams::new(mp.s0 - h_s, mp.sigma, mp.rate, mp.maturity)?;
    let mp_v_up = MarketParams::new(mp.s0, mp.sigma + h_sig, mp.rate, mp.maturity)?;
    let mp_v_dn = MarketParams::new(mp.s0, mp.sigma - h_sig, mp.rate, mp.maturity)?;

    let stream = PseudoStream::new(seed, steps as u32);
    let t1 = spec.t1(mp);
    let mut z = vec![0.0; steps];
    let mut dw = vec![0.0; steps - 1];
    let mut m = EstimatorMoments {
        cpw: [MeanVar::new(), MeanVar::new(), MeanVar::new(), MeanVar::new()],
        lr: [MeanVar::new(), MeanVar::new(), MeanVar::new(), MeanVar::new()],
        fd_delta: MeanVar::new(),
        fd_vega: MeanVar::new(),
        fd_gamma: MeanVar::new(),
    };

    for p in 0..paths {
        stream.fill_normals(p as u64, &mut z);
        standard_increments_into(&z[1..], t1, &mut dw);
        let x1 = z[0];

        let base = simulate_path(mp, &spec, x1, &dw)?;
        push_sample(&mut m.cpw, &cpw_greeks(&base, mp, &spec)?);
        let pay_base = discounted_payoff(&base, mp, &spec)?;
        push_sample(&mut m.lr, &lr_greeks(pay_base, &z, mp, &spec));

        // Common random numbers: the same (x1, dw) drive every bump.
        let pay_s_up = discounted_payoff(&simulate_path(&mp_s_up, &spec, x1, &dw)?, &mp_s_up, &spec)?;
        let pay_s_dn = discounted_payoff(&simulate_path(&mp_s_dn, &spec, x1, &dw)?, &mp_s_dn, &spec)?;
        let pay_v_up = discounted_payoff(&simulate_path(&mp_v_up, &spec, x1, &dw)?, &mp_v_up, &spec)?;
        let pay_v_dn = discounted_payoff(&simulate_path(&mp_v_dn, &spec, x1, &dw)?, &mp_v_dn, &spec)?;

        m.fd_delta.push((pay_s_up - pay_s_dn) / (2.0 * h_s));
        m.fd_gamma
            .push((pay_s_up - 2.0 * pay_base + pay_s_dn) / (h_s * h_s));
        m.fd_vega.push((pay_v_up - pay_v_dn) / (2.0 * h_sig));
    }

    let mut checks = Vec::new();
    for greek in Greek::ALL {
        let i = greek_idx(greek);
        let fd = match greek {
            Greek::Delta => &m.fd_delta,
            Greek::Vega => &m.fd_vega,
            Greek::Gamma => &m.fd_gamma,
        };
        checks.push(within_3se(
            &format!("{kind} {greek}: CPW vs finite-difference oracle"),
            m.cpw[i].mean(),
            m.cpw[i].se(),
            fd.mean(),
            fd.se(),
        ));
    }
    for greek in Greek::ALL {
        let i = greek_idx(greek);
        let mut check = within_3se(
            &format!("{kind} {greek}: LR vs CPW"),
            m.lr[i].mean(),
            m.lr[i].se(),
            m.cpw[i].mean(),
            m.cpw[i].se(),
        );
        if greek == Greek::Vega && !check.passed {
            check.detail.push_str(
                " [note: the per-step sqrt(t1) factor in the LR vega score is \
                 the flagged reading; this discrepancy is reported, not patched]",
            );
        }
        checks.push(check);
    }
    Ok(checks)
}

/// Fast structural property checks (criterion-5 scope).
pub fn property_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();

    // Sobol dyadic stratification: 8 spot dimensions out of the first 256,
    // every aligned block of 2^m points, m <= 8, hits each dyadic cell once.
    let gen = SobolGenerator::new(256).expect("built-in table covers 256 dimensions");
    let spot_dims = [0usize, 31, 63, 100, 127, 180, 230, 255];
    let mut strat_ok = true;
    let mut strat_detail = String::new();
    for &dim in &spot_dims {
        for m in 1..=8u32 {
            for block in 0..2u64 {
                let n = 1u64 << m;
                let mut seen = vec![false; n as usize];
                for k in block * n..(block + 1) * n {
                    let x = gen.raw_u32(dim, k) as f64 / 4_294_967_296.0;
                    let cell = (x * n as f64) as usize;
                    if seen[cell] {
                        strat_ok = false;
                        strat_detail = format!("dim {dim} m {m} block {block}: duplicate cell");
                    }
                    seen[cell] = true;
                }
            }
        }
    }
    checks.push(Check::new(
        "sobol dyadic stratification",
        strat_ok,
        if strat_ok {
            "one point per dyadic interval, m <= 8, 8 spot dims".to_string()
        } else {
            strat_detail
        },
    ));

    // Bridge covariance vs min(t_i, t_j), 5% relative, d in {2,4,8}.
    let mut cov_ok = true;
    let mut cov_detail = String::new();
    for d in [2usize, 4, 8] {
        let t = 1.0;
        let plan = BridgePlan::new(d, t).unwrap();
        let stream = PseudoStream::new(seed ^ 0xb1d6, d as u32);
        let samples = 100_000u64;
        let mut z = vec![0.0; d];
        let mut dw = vec![0.0; d];
        let mut w = vec![0.0; d];
        let mut cov = vec![vec![0.0; d]; d];
        for p in 0..samples {
            stream.fill_normals(p, &mut z);
            bridge_increments_into(&z, &plan, &mut dw);
            let mut acc = 0.0;
            for i in 0..d {
                acc += dw[i];
                w[i] = acc;
            }
            for i in 0..d {
                for j in i..d {
                    cov[i][j] += w[i] * w[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                let got = cov[i][j] / samples as f64;
                let want = ((i + 1).min(j + 1)) as f64 * t / d as f64;
                if (got - want).abs() > 0.05 * want {
                    cov_ok = false;
                    cov_detail = format!("d={d} cov[{i}][{j}] = {got:.4}, want {want:.4}");
                }
            }
        }
    }
    checks.push(Check::new(
        "bridge covariance = min(t_i, t_j)",
        cov_ok,
        if cov_ok {
            "within 5% at d in {2,4,8}, 1e5 samples".to_string()
        } else {
            cov_detail
        },
    ));

    // Exact terminal identity.
    let mut term_ok = true;
    let plan = BridgePlan::new(64, 1.0).unwrap();
    let stream = PseudoStream::new(seed ^ 0x7e51, 64);
    let mut z = [0.0; 64];
    let mut dw = [0.0; 64];
    for p in 0..256u64 {
        stream.fill_normals(p, &mut z);
        bridge_increments_into(&z, &plan, &mut dw);
        let total: f64 = dw.iter().sum();
        if (total - z[0]).abs() > 1e-12 * z[0].abs().max(1.0) {
            term_ok = false;
        }
    }
    checks.push(Check::new(
        "bridge terminal identity sum(dW) = sqrt(T) z1",
        term_ok,
        "machine precision over 256 paths",
    ));

    // Layout transform round trip.
    let input: Vec<f64> = (0..32).map(|i| i as f64).collect();
    let block = layout_transform(&input, 8, 4, 2).unwrap();
    let restored = inverse_layout_transform(&block);
    checks.push(Check::new(
        "quasi-random layout transform round trip",
        restored == input,
        "P=8 d=4 B=2",
    ));

    // Antithetic zero variance on a payoff linear in z.
    let stream = PseudoStream::new(seed ^ 0xa171, 4);
    let coeffs = [0.5, -1.5, 2.0, 0.25];
    let mut zbuf = [0.0; 4];
    let mut max_dev: f64 = 0.0;
    for p in 0..2048u64 {
        stream.fill_normals(p, &mut zbuf);
        let plus: f64 = zbuf.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
        let minus: f64 = zbuf.iter().zip(&coeffs).map(|(a, b)| -a * b).sum();
        let pair = antithetic_pair(
            GreekSample {
                price: plus,
                ..Default::default()
            },
            GreekSample {
                price: minus,
                ..Default::default()
            },
        );
        max_dev = max_dev.max(pair.price.abs());
    }
    checks.push(Check::new(
        "antithetic pairs cancel a linear payoff exactly",
        max_dev <= 1e-14,
        format!("max |pair mean| = {max_dev:.2e}"),
    ));

    // Aggregate / VRF algebraic identities.
    let agg = aggregate(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    let agg_ok = (agg.estimate - 2.5).abs() < 1e-15 && (agg.sigma - 1.25f64.sqrt()).abs() < 1e-15;
    let mult_ok = (vrf(0.9, 0.3) * vrf(0.3, 0.05) - vrf(0.9, 0.05)).abs() < 1e-9;
    checks.push(Check::new(
        "aggregate and vrf identities",
        agg_ok && mult_ok,
        "printed-formula sigma and vrf multiplicativity",
    ));

    checks
}

/// The full validation suite at acceptance scale.
pub fn run_validation(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let mp = cfg.market()?;
    let mut checks = european_call_oracle(&mp, 100.0, 1 << 17, cfg.seed);
    for kind in [
        ProductKind::ArithmeticAsian,
        ProductKind::BinaryAsian,
        ProductKind::Lookback,
    ] {
        checks.extend(fd_consistency(&mp, kind, 100.0, 64, 1 << 16, cfg.seed)?);
    }
    checks.extend(property_checks(cfg.seed));
    Ok(checks)
}
