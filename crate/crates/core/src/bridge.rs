//! Brownian increment construction.
//!
//! Two routes produce the d increments of a Brownian path on the grid
//! t_i = i·T/d, both consuming exactly d standard normals:
//!
//! * [`standard_increments`] — left-to-right recursion, dW_i = √dt·z_i.
//! * [`bridge_increments`] — Brownian bridge order: the first normal fixes
//!   the terminal value W(T) = √T·z₁, then each level halves the existing
//!   increments, adding conditional noise b_k = √(T/2^{k+1}). The two
//!   constructions are distributionally identical; the bridge one spends
//!   the best-distributed quasi-random coordinates on the coarse structure
//!   of the path.

use crate::error::{Error, Result};

/// Precomputed plan for bridge construction over d = 2^m steps.
#[derive(Debug, Clone)]
pub struct BridgePlan {
    steps: usize,
    levels: u32,
    maturity: f64,
    sqrt_maturity: f64,
    /// b_k = sqrt(T / 2^{k+1}) for level k = 1..=m.
    level_b: Vec<f64>,
}

impl BridgePlan {
    pub fn new(steps: usize, maturity: f64) -> Result<Self> {
        if steps == 0 || !steps.is_power_of_two() {
            return Err(Error::Config(format!(
                "bridge construction needs a power-of-two step count, got {steps}"
            )));
        }
        if !(maturity > 0.0) {
            return Err(Error::Config(format!(
                "bridge maturity must be positive, got {maturity}"
            )));
        }
        let levels = steps.trailing_zeros();
        let level_b = (1..=levels)
            .map(|k| (maturity / (1u64 << (k + 1)) as f64).sqrt())
            .collect();
        Ok(Self {
            steps,
            levels,
            maturity,
            sqrt_maturity: maturity.sqrt(),
            level_b,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }
}

/// Brownian increments over equal steps dt, dW_i = √dt·z_i, plus dt itself.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementVector {
    pub dw: Vec<f64>,
    pub dt: f64,
}

/// Left-to-right construction: dW_i = √dt·z_i.
pub fn standard_increments(z: &[f64], dt: f64) -> Result<IncrementVector> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let mut dw = vec![0.0; z.len()];
    standard_increments_into(z, dt, &mut dw);
    Ok(IncrementVector { dw, dt })
}

/// In-place variant of [`standard_increments`] for per-path scratch reuse.
#[inline]
pub fn standard_increments_into(z: &[f64], dt: f64, out: &mut [f64]) {
    debug_assert_eq!(z.len(), out.len());
    let sqrt_dt = dt.sqrt();
    for (slot, &zi) in out.iter_mut().zip(z) {
        *slot = sqrt_dt * zi;
    }
}

/// Bridge construction: consumes the d normals in bridge order (terminal
/// first) and returns the d path increments. Σ dW_i = √T·z₁ holds exactly
/// up to rounding in the final sum.
pub fn bridge_increments(z: &[f64], plan: &BridgePlan) -> Result<IncrementVector> {
    if z.len() != plan.steps {
        return Err(Error::Config(format!(
            "bridge expects {} normals, got {}",
            plan.steps,
            z.len()
        )));
    }
    let mut dw = vec![0.0; plan.steps];
    bridge_increments_into(z, plan, &mut dw);
    Ok(IncrementVector {
        dw,
        dt: plan.maturity / plan.steps as f64,
    })
}

/// In-place variant of [`bridge_increments`].
///
/// Level k refines 2^{k-1} coarse increments into 2^k finer ones in place;
/// descending j keeps reads ahead of writes. Each of the d normals is
/// consumed exactly once.
pub fn bridge_increments_into(z: &[f64], plan: &BridgePlan, out: &mut [f64]) {
    debug_assert_eq!(z.len(), plan.steps);
    debug_assert_eq!(out.len(), plan.steps);
    out[0] = plan.sqrt_maturity * z[0];
    let mut next_z = 1;
    for k in 1..=plan.levels {
        let b = plan.level_b[(k - 1) as usize];
        for j in (0..1usize << (k - 1)).rev() {
            let zv = z[next_z];
            next_z += 1;
            let a = 0.5 * out[j];
            out[2 * j + 1] = a - b * zv;
            out[2 * j] = a + b * zv;
        }
    }
}
