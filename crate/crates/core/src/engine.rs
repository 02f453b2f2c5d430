//! Simulation engine: runs one of the five methods over P paths × L runs
//! with deterministic parallelism.
//!
//! Determinism contract: per-path variates are pure functions of
//! (seed, run, path), paths are processed in fixed chunks, and partial
//! sums are combined by a fixed-shape pairwise tree — never in arrival
//! order — so results are bit-identical for any worker count. The
//! [`run_method_reference`] entry point is the bundled single-worker loop
//! used for speedup comparisons; it shares the exact reduction shape.

use std::time::Instant;

use rayon::prelude::*;

use crate::bridge::{bridge_increments_into, standard_increments_into, BridgePlan};
use crate::error::{Error, Result};
use crate::products::{
    cpw_greeks, discounted_payoff, european_call_sample, lr_greeks, simulate_path, GreekSample,
    MarketParams, ProductKind, ProductSpec,
};
use crate::rng::{mix_seed, PseudoStream, SobolStream, StreamKind, StreamSpec};
use crate::stats::RunSummary;

/// Fixed path-chunk size; the unit of parallel work and of the reduction
/// tree, independent of the worker count.
const CHUNK: usize = 256;

/// The five simulation methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Likelihood-ratio baseline on plain pseudo Monte Carlo.
    LrMc,
    /// CPW estimators on plain pseudo Monte Carlo.
    McCpw,
    /// CPW estimators on pseudo Monte Carlo with antithetic pairs.
    McAvCpw,
    /// CPW estimators on scrambled Sobol' points.
    QmcCpw,
    /// CPW estimators on scrambled Sobol' points with bridge increments.
    QmcBbCpw,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::LrMc,
        Method::McCpw,
        Method::McAvCpw,
        Method::QmcCpw,
        Method::QmcBbCpw,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::LrMc => "lr-mc",
            Method::McCpw => "mc-cpw",
            Method::McAvCpw => "mc-av-cpw",
            Method::QmcCpw => "qmc-cpw",
            Method::QmcBbCpw => "qmc-bb-cpw",
        }
    }

    /// Column label used in the reported tables.
    pub fn label(&self) -> &'static str {
        match self {
            Method::LrMc => "LR+MC",
            Method::McCpw => "MC-CPW",
            Method::McAvCpw => "MC+AV-CPW",
            Method::QmcCpw => "QMC-CPW",
            Method::QmcBbCpw => "QMC+BB-CPW",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }

    pub fn uses_sobol(&self) -> bool {
        matches!(self, Method::QmcCpw | Method::QmcBbCpw)
    }

    pub fn uses_bridge(&self) -> bool {
        matches!(self, Method::QmcBbCpw)
    }

    pub fn antithetic(&self) -> bool {
        matches!(self, Method::McAvCpw)
    }

    pub fn is_likelihood_ratio(&self) -> bool {
        matches!(self, Method::LrMc)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A method plus its sampling budget and stream description.
#[derive(Debug, Clone)]
pub struct MethodSpec {
    pub method: Method,
    /// Paths per run; for the antithetic method this counts pairs (each
    /// pair simulates its complement too, doubling the raw path cost).
    pub paths: usize,
    pub runs: usize,
    pub stream: StreamSpec,
    /// Cache-blocking group width for the quasi-random layout transform;
    /// clamped to a divisor of `paths` at run time.
    pub block_size: usize,
}

impl MethodSpec {
    /// Builds a spec with the stream kind the method requires: pseudo
    /// substreams for mc-*, per-run scrambled Sobol' for qmc-*.
    pub fn new(method: Method, paths: usize, runs: usize, seed: u64, steps: usize) -> Result<Self> {
        let kind = if method.uses_sobol() {
            StreamKind::SobolScrambled
        } else {
            StreamKind::Pseudo
        };
        Ok(Self {
            method,
            paths,
            runs,
            stream: StreamSpec::new(seed, kind, steps as u32)?,
            block_size: 64,
        })
    }

    fn validate(&self, spec: &ProductSpec) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::Config("path count must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("run count must be at least 1".into()));
        }
        if self.stream.dimensions as usize != spec.steps {
            return Err(Error::Config(format!(
                "stream has {} dimensions but the product has {} steps",
                self.stream.dimensions, spec.steps
            )));
        }
        if self.method.uses_bridge() && !spec.steps.is_power_of_two() {
            return Err(Error::Config(format!(
                "{} needs a power-of-two step count, got {}",
                self.method,
                spec.steps
            )));
        }
        match (self.method.uses_sobol(), self.stream.kind) {
            (true, StreamKind::Pseudo) => {
                return Err(Error::Config(format!(
                    "{} requires a Sobol stream",
                    self.method
                )))
            }
            (false, StreamKind::Sobol | StreamKind::SobolScrambled) => {
                return Err(Error::Config(format!(
                    "{} requires a pseudo stream",
                    self.method
                )))
            }
            _ => {}
        }
        if self.method.uses_sobol() && self.stream.kind == StreamKind::Sobol && self.runs > 1 {
            return Err(Error::Config(
                "unscrambled Sobol repeats the same points every run; use \
                 sobol-scrambled for multi-run error estimates"
                    .into(),
            ));
        }
        if spec.kind == ProductKind::EuropeanCall && spec.steps != 1 {
            return Err(Error::Config(
                "the European call validation product uses a single step".into(),
            ));
        }
        Ok(())
    }
}

/// Normals stored as dimension-major blocks of path-major groups: B
/// consecutive paths' dimension-k values sit contiguously, cycling
/// k = 1..d within each group of B paths.
#[derive(Debug, Clone, PartialEq)]
pub struct VariateBlock {
    data: Vec<f64>,
    paths: usize,
    dims: usize,
    block: usize,
}

impl VariateBlock {
    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    /// Value for (path, dimension); every cell is written exactly once by
    /// the transform and read exactly once per run.
    #[inline]
    pub fn get(&self, path: usize, dim: usize) -> f64 {
        let group = path / self.block;
        let slot = path % self.block;
        self.data[group * self.block * self.dims + dim * self.block + slot]
    }

    pub fn fill_path(&self, path: usize, out: &mut [f64]) {
        let group = path / self.block;
        let slot = path % self.block;
        let base = group * self.block * self.dims + slot;
        for (dim, value) in out.iter_mut().enumerate() {
            *value = self.data[base + dim * self.block];
        }
    }
}

/// Reorders a dimension-major buffer (`input[dim*paths + path]`) into
/// block-grouped layout. `block` must divide `paths` and the input length
/// must be `paths*dims`.
pub fn layout_transform(
    input: &[f64],
    paths: usize,
    dims: usize,
    block: usize,
) -> Result<VariateBlock> {
    if input.len() != paths * dims {
        return Err(Error::Config(format!(
            "layout transform expected {} values ({paths} paths x {dims} dims), got {}",
            paths * dims,
            input.len()
        )));
    }
    if block == 0 || paths % block != 0 {
        return Err(Error::Config(format!(
            "block size {block} must divide the path count {paths}"
        )));
    }
    let mut data = vec![0.0; input.len()];
    for group in 0..paths / block {
        for dim in 0..dims {
            for slot in 0..block {
                data[group * block * dims + dim * block + slot] =
                    input[dim * paths + group * block + slot];
            }
        }
    }
    Ok(VariateBlock {
        data,
        paths,
        dims,
        block,
    })
}

/// Undoes [`layout_transform`], returning the dimension-major buffer.
pub fn inverse_layout_transform(block: &VariateBlock) -> Vec<f64> {
    let mut out = vec![0.0; block.data.len()];
    for group in 0..block.paths / block.block {
        for dim in 0..block.dims {
            for slot in 0..block.block {
                out[dim * block.paths + group * block.block + slot] =
                    block.data[group * block.block * block.dims + dim * block.block + slot];
            }
        }
    }
    out
}

/// Per-run source of path normals. Implementations must be pure in
/// (provider, path) so workers can share them immutably.
pub trait NormalProvider: Sync {
    fn fill_path(&self, path: usize, out: &mut [f64]);
}

struct PseudoProvider {
    stream: PseudoStream,
}

impl NormalProvider for PseudoProvider {
    fn fill_path(&self, path: usize, out: &mut [f64]) {
        self.stream.fill_normals(path as u64, out);
    }
}

struct BlockProvider {
    block: VariateBlock,
}

impl NormalProvider for BlockProvider {
    fn fill_path(&self, path: usize, out: &mut [f64]) {
        self.block.fill_path(path, out);
    }
}

/// Builds the per-run provider: pseudo substreams keyed by (seed, run) or
/// a freshly scrambled Sobol' block (scramble seed keyed by (seed, run)).
fn build_provider(ms: &MethodSpec, run: usize) -> Result<Box<dyn NormalProvider>> {
    let dims = ms.stream.dimensions;
    if ms.method.uses_sobol() {
        let stream = match ms.stream.kind {
            StreamKind::Sobol => SobolStream::new(dims)?,
            _ => SobolStream::new_scrambled(dims, mix_seed(ms.stream.seed, run as u64))?,
        };
        let mut buffer = vec![0.0; ms.paths * dims as usize];
        stream.fill_dimension_major(ms.paths, &mut buffer);
        let block = layout_transform(&buffer, ms.paths, dims as usize, effective_block(ms))?;
        Ok(Box::new(BlockProvider { block }))
    } else {
        Ok(Box::new(PseudoProvider {
            stream: PseudoStream::new(mix_seed(ms.stream.seed, run as u64), dims),
        }))
    }
}

fn effective_block(ms: &MethodSpec) -> usize {
    gcd(ms.paths, ms.block_size.max(1))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Averages the estimates from a path and its antithetic complement.
pub fn antithetic_pair(sample: GreekSample, complement: GreekSample) -> GreekSample {
    GreekSample {
        price: 0.5 * (sample.price + complement.price),
        delta: 0.5 * (sample.delta + complement.delta),
        vega: 0.5 * (sample.vega + complement.vega),
        gamma: 0.5 * (sample.gamma + complement.gamma),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    price: f64,
    delta: f64,
    vega: f64,
    gamma: f64,
}

impl Accum {
    #[inline]
    fn add_sample(&mut self, g: &GreekSample) {
        self.price += g.price;
        self.delta += g.delta;
        self.vega += g.vega;
        self.gamma += g.gamma;
    }

    fn combine(self, other: Accum) -> Accum {
        Accum {
            price: self.price + other.price,
            delta: self.delta + other.delta,
            vega: self.vega + other.vega,
            gamma: self.gamma + other.gamma,
        }
    }
}

/// Fixed-shape pairwise reduction: adjacent partials merge level by level,
/// so the summation tree depends only on the chunk count.
fn pairwise_combine(mut partials: Vec<Accum>) -> Accum {
    while partials.len() > 1 {
        let mut next = Vec::with_capacity(partials.len().div_ceil(2));
        for pair in partials.chunks(2) {
            next.push(match pair {
                [a] => *a,
                [a, b] => a.combine(*b),
                _ => unreachable!(),
            });
        }
        partials = next;
    }
    partials.pop().unwrap_or_default()
}

struct RunContext<'a> {
    mp: &'a MarketParams,
    spec: &'a ProductSpec,
    method: Method,
    plan: Option<BridgePlan>,
    t1: f64,
}

impl RunContext<'_> {
    /// Per-path estimate from the raw normal vector `z`; `dw` is scratch.
    fn estimate_path(&self, z: &[f64], dw: &mut [f64]) -> Result<GreekSample> {
        let spec = self.spec;
        if spec.kind == ProductKind::EuropeanCall {
            return Ok(european_call_sample(self.mp, spec.strike, z[0]));
        }
        let x1;
        let w_increments: &[f64];
        if let Some(plan) = &self.plan {
            // Bridge over the whole path: increment 1 carries W(t1), the
            // rest drive the restarted motion over (t1, T].
            bridge_increments_into(z, plan, dw);
            x1 = dw[0] / self.t1.sqrt();
            w_increments = &dw[1..];
        } else {
            x1 = z[0];
            standard_increments_into(&z[1..], self.t1, &mut dw[..spec.steps - 1]);
            w_increments = &dw[..spec.steps - 1];
        }
        let ps = simulate_path(self.mp, spec, x1, w_increments)?;
        if self.method.is_likelihood_ratio() {
            let payoff = discounted_payoff(&ps, self.mp, spec)?;
            Ok(lr_greeks(payoff, z, self.mp, spec))
        } else {
            cpw_greeks(&ps, self.mp, spec)
        }
    }
}

fn process_chunk(
    ctx: &RunContext<'_>,
    provider: &dyn NormalProvider,
    antithetic: bool,
    run: usize,
    start: usize,
    end: usize,
) -> Result<Accum> {
    let d = ctx.spec.steps;
    let mut z = vec![0.0; d];
    let mut neg = vec![0.0; d];
    let mut dw = vec![0.0; d];
    let mut accum = Accum::default();
    for path in start..end {
        provider.fill_path(path, &mut z);
        let sample = ctx
            .estimate_path(&z, &mut dw)
            .map_err(|_| Error::PathRejected { run, path })?;
        let sample = if antithetic {
            for (n, &v) in neg.iter_mut().zip(z.iter()) {
                *n = -v;
            }
            let mirrored = ctx
                .estimate_path(&neg, &mut dw)
                .map_err(|_| Error::PathRejected { run, path })?;
            antithetic_pair(sample, mirrored)
        } else {
            sample
        };
        accum.add_sample(&sample);
    }
    Ok(accum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exec {
    Rayon,
    Serial,
}

/// Result of running one method: the L run summaries plus the mean
/// wall-clock seconds per run (variate generation included).
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub summaries: Vec<RunSummary>,
    pub seconds_per_run: f64,
}

fn run_single(
    ctx: &RunContext<'_>,
    provider: &dyn NormalProvider,
    ms: &MethodSpec,
    run: usize,
    exec: Exec,
) -> Result<RunSummary> {
    let paths = ms.paths;
    let n_chunks = paths.div_ceil(CHUNK);
    let antithetic = ms.method.antithetic();
    let chunk_range = |c: usize| (c * CHUNK, ((c + 1) * CHUNK).min(paths));
    let partials: Vec<Result<Accum>> = match exec {
        Exec::Rayon => (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let (start, end) = chunk_range(c);
                process_chunk(ctx, provider, antithetic, run, start, end)
            })
            .collect(),
        Exec::Serial => (0..n_chunks)
            .map(|c| {
                let (start, end) = chunk_range(c);
                process_chunk(ctx, provider, antithetic, run, start, end)
            })
            .collect(),
    };
    let partials: Vec<Accum> = partials.into_iter().collect::<Result<_>>()?;
    let total = pairwise_combine(partials);
    let n = paths as f64;
    Ok(RunSummary {
        product: ctx.spec.kind,
        strike: ctx.spec.strike,
        steps: ctx.spec.steps,
        paths,
        price: total.price / n,
        delta: total.delta / n,
        vega: total.vega / n,
        gamma: total.gamma / n,
    })
}

fn run_method_impl(
    mp: &MarketParams,
    spec: &ProductSpec,
    ms: &MethodSpec,
    exec: Exec,
) -> Result<MethodRun> {
    ms.validate(spec)?;
    let plan = if ms.method.uses_bridge() {
        Some(BridgePlan::new(spec.steps, mp.maturity)?)
    } else {
        None
    };
    let ctx = RunContext {
        mp,
        spec,
        method: ms.method,
        plan,
        t1: spec.t1(mp),
    };
    let mut summaries = Vec::with_capacity(ms.runs);
    let started = Instant::now();
    for run in 0..ms.runs {
        let provider = build_provider(ms, run)?;
        summaries.push(run_single(&ctx, provider.as_ref(), ms, run, exec)?);
    }
    let seconds_per_run = started.elapsed().as_secs_f64() / ms.runs as f64;
    Ok(MethodRun {
        method: ms.method,
        summaries,
        seconds_per_run,
    })
}

/// Runs the method data-parallel over paths on the current rayon pool.
pub fn run_method(mp: &MarketParams, spec: &ProductSpec, ms: &MethodSpec) -> Result<MethodRun> {
    run_method_impl(mp, spec, ms, Exec::Rayon)
}

/// The bundled single-worker reference loop: identical arithmetic and
/// reduction shape, no thread pool. Estimates are bit-identical to
/// [`run_method`]; only the wall clock differs.
pub fn run_method_reference(
    mp: &MarketParams,
    spec: &ProductSpec,
    ms: &MethodSpec,
) -> Result<MethodRun> {
    run_method_impl(mp, spec, ms, Exec::Serial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    fn mp() -> MarketParams {
        MarketParams::new(100.0, 0.2, 0.1, 1.0).unwrap()
    }

    #[test]
    fn layout_transform_trace() {
        // P=2, d=2, B=1: [d1p1, d1p2, d2p1, d2p2] -> [d1p1, d2p1, d1p2, d2p2]
        let input = [11.0, 12.0, 21.0, 22.0];
        let block = layout_transform(&input, 2, 2, 1).unwrap();
        assert_eq!(block.data, vec![11.0, 21.0, 12.0, 22.0]);
        assert_eq!(block.get(0, 0), 11.0);
        assert_eq!(block.get(0, 1), 21.0);
        assert_eq!(block.get(1, 0), 12.0);
        assert_eq!(block.get(1, 1), 22.0);
    }

    #[test]
    fn layout_transform_single_dimension_is_identity() {
        let input = [1.0, 2.0, 3.0, 4.0];
        let block = layout_transform(&input, 4, 1, 2).unwrap();
        assert_eq!(block.data, input.to_vec());
    }

    #[test]
    fn layout_transform_round_trip() {
        let paths = 8;
        let dims = 4;
        let input: Vec<f64> = (0..paths * dims).map(|i| i as f64).collect();
        let block = layout_transform(&input, paths, dims, 2).unwrap();
        assert_eq!(inverse_layout_transform(&block), input);
        // every input cell appears exactly once
        let mut sorted = block.data.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sorted, input);
    }

    #[test]
    fn layout_transform_errors() {
        let input = [0.0; 6];
        assert!(layout_transform(&input, 4, 2, 2).is_err()); // length mismatch
        assert!(layout_transform(&input, 3, 2, 2).is_err()); // block does not divide
        assert!(layout_transform(&input, 3, 2, 0).is_err());
    }

    struct StubProvider {
        value: f64,
    }

    impl NormalProvider for StubProvider {
        fn fill_path(&self, _path: usize, out: &mut [f64]) {
            out.fill(self.value);
        }
    }

    struct CountingProvider {
        counts: Vec<AtomicU32>,
    }

    impl NormalProvider for CountingProvider {
        fn fill_path(&self, path: usize, out: &mut [f64]) {
            self.counts[path].fetch_add(1, Ordering::Relaxed);
            out.fill(0.0);
        }
    }

    #[test]
    fn single_path_run_mean_equals_single_estimate() {
        let mp = mp();
        let spec = ProductSpec::new(ProductKind::ArithmeticAsian, 100.0, 4).unwrap();
        let ms = MethodSpec::new(Method::McCpw, 1, 1, 0, 4).unwrap();
        let ctx = RunContext {
            mp: &mp,
            spec: &spec,
            method: Method::McCpw,
            plan: None,
            t1: spec.t1(&mp),
        };
        let provider = StubProvider { value: 0.0 };
        let summary = run_single(&ctx, &provider, &ms, 0, Exec::Serial).unwrap();
        let mut dw = vec![0.0; 4];
        let expect = ctx.estimate_path(&[0.0; 4], &mut dw).unwrap();
        assert_eq!(summary.delta, expect.delta);
        assert_eq!(summary.price, expect.price);
    }

    #[test]
    fn each_path_is_requested_exactly_once_per_run() {
        let mp = mp();
        let spec = ProductSpec::new(ProductKind::BinaryAsian, 100.0, 2).unwrap();
        let ms = MethodSpec::new(Method::McAvCpw, 700, 1, 0, 2).unwrap();
        let ctx = RunContext {
            mp: &mp,
            spec: &spec,
            method: Method::McAvCpw,
            plan: None,
            t1: spec.t1(&mp),
        };
        let provider = CountingProvider {
            counts: (0..700).map(|_| AtomicU32::new(0)).collect(),
        };
        run_single(&ctx, &provider, &ms, 0, Exec::Rayon).unwrap();
        for (path, count) in provider.counts.iter().enumerate() {
            assert_eq!(count.load(Ordering::Relaxed), 1, "path {path}");
        }
    }

    #[test]
    fn antithetic_pair_identities() {
        let a = GreekSample {
            price: 1.0,
            delta: 2.0,
            vega: -1.0,
            gamma: 0.5,
        };
        // odd estimator: complement is the negation -> exact zero
        let neg = GreekSample {
            price: -1.0,
            delta: -2.0,
            vega: 1.0,
            gamma: -0.5,
        };
        let avg = antithetic_pair(a, neg);
        assert_eq!(avg, GreekSample::default());
        // even estimator: complement equals the sample -> unchanged
        let same = antithetic_pair(a, a);
        assert_eq!(same, a);
    }

    #[test]
    fn antithetic_zero_variance_on_linear_payoff() {
        // A payoff linear in z has pair averages all equal to the mean.
        let stream = PseudoStream::new(9, 8);
        let mut z = [0.0; 8];
        let coeffs = [0.3, -1.0, 0.25, 2.0, -0.5, 0.1, 0.0, 1.5];
        let linear = |z: &[f64]| -> f64 {
            z.iter().zip(coeffs.iter()).map(|(a, b)| a * b).sum::<f64>() + 4.0
        };
        let pairs = 1 << 12;
        let mut values = Vec::with_capacity(pairs);
        for p in 0..pairs {
            stream.fill_normals(p as u64, &mut z);
            let plus = linear(&z);
            let neg: Vec<f64> = z.iter().map(|v| -v).collect();
            let minus = linear(&neg);
            values.push(0.5 * (plus + minus));
        }
        let mean = values.iter().sum::<f64>() / pairs as f64;
        let var = values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / pairs as f64;
        assert!(var <= 1e-28, "variance {var} should vanish");
        assert!((mean - 4.0).abs() < 1e-12);
    }

    #[test]
    fn antithetic_reduces_european_price_variance() {
        let mp = mp();
        let strike = 100.0;
        let stream = PseudoStream::new(31, 1);
        let mut z = [0.0; 1];
        let pairs = 1 << 14;
        let mut plain = Vec::with_capacity(pairs);
        let mut paired = Vec::with_capacity(pairs);
        for p in 0..pairs {
            stream.fill_normals(p as u64, &mut z);
            let a = european_call_sample(&mp, strike, z[0]).price;
            let b = european_call_sample(&mp, strike, -z[0]).price;
            plain.push(a);
            paired.push(0.5 * (a + b));
        }
        let var = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
        };
        assert!(
            var(&paired) <= var(&plain),
            "antithetic variance {} vs plain {}",
            var(&paired),
            var(&plain)
        );
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mp = mp();
        let spec = ProductSpec::new(ProductKind::ArithmeticAsian, 100.0, 8).unwrap();
        let ms = MethodSpec::new(Method::QmcBbCpw, 1024, 3, 99, 8).unwrap();

        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let r1 = pool1.install(|| run_method(&mp, &spec, &ms)).unwrap();
        let r4 = pool4.install(|| run_method(&mp, &spec, &ms)).unwrap();
        let serial = run_method_reference(&mp, &spec, &ms).unwrap();
        assert_eq!(r1.summaries, r4.summaries);
        assert_eq!(r1.summaries, serial.summaries);
    }

    #[test]
    fn methods_validate_configuration() {
        let mp = mp();
        let spec = ProductSpec::new(ProductKind::ArithmeticAsian, 100.0, 12).unwrap();
        // bridge needs power-of-two steps
        let ms = MethodSpec::new(Method::QmcBbCpw, 64, 2, 0, 12).unwrap();
        assert!(run_method(&mp, &spec, &ms).is_err());
        // dimension mismatch
        let ms = MethodSpec::new(Method::McCpw, 64, 2, 0, 8).unwrap();
        assert!(run_method(&mp, &spec, &ms).is_err());
        // European call demands a single step
        let eu = ProductSpec::new(ProductKind::EuropeanCall, 100.0, 4).unwrap();
        let ms = MethodSpec::new(Method::McCpw, 64, 2, 0, 4).unwrap();
        assert!(run_method(&mp, &eu, &ms).is_err());
    }

    #[test]
    fn qmc_consumes_point_index_path_plus_one() {
        // The engine must feed path p from Sobol index p+1: compare a run's
        // provider output against the stream directly.
        let ms = MethodSpec::new(Method::QmcCpw, 8, 1, 123, 4).unwrap();
        let provider = build_provider(&ms, 0).unwrap();
        let stream = SobolStream::new_scrambled(4, mix_seed(123, 0)).unwrap();
        let mut from_provider = [0.0; 4];
        let mut from_stream = [0.0; 4];
        for path in 0..8 {
            provider.fill_path(path, &mut from_provider);
            stream.fill_normals(path as u64, &mut from_stream);
            assert_eq!(from_provider, from_stream, "path {path}");
        }
    }

    #[test]
    fn gcd_based_block_clamp() {
        let mut ms = MethodSpec::new(Method::QmcCpw, 96, 1, 0, 2).unwrap();
        assert_eq!(effective_block(&ms), 32); // gcd(96, 64)
        ms.paths = 1;
        assert_eq!(effective_block(&ms), 1);
        ms.paths = 4096;
        assert_eq!(effective_block(&ms), 64);
    }
}
