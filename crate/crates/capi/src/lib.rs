//! C ABI for the Greeks engine.
//!
//! Conventions: an opaque engine handle created from market parameters,
//! plain `#[repr(C)]` request/result structs, status codes for every
//! fallible call, and no panics across the boundary (panics are caught
//! and reported as `QgStatus::Panic`). The generated header lives in
//! `include/qmc_greeks.h`.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use qmc_greeks::cli::with_pool;
use qmc_greeks::engine::{run_method, Method, MethodSpec};
use qmc_greeks::products::{MarketParams, ProductKind, ProductSpec};
use qmc_greeks::stats::aggregate;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QgStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A field failed validation (bad market data, strike, paths, ...).
    InvalidArgument = 2,
    /// The simulation itself failed (e.g. a rejected path).
    RunFailed = 3,
    /// An internal panic was caught at the boundary.
    Panic = 4,
}

/// Option type selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QgProduct {
    ArithmeticAsian = 0,
    BinaryAsian = 1,
    Lookback = 2,
    EuropeanCall = 3,
}

/// Simulation method selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QgMethod {
    LrMc = 0,
    McCpw = 1,
    McAvCpw = 2,
    QmcCpw = 3,
    QmcBbCpw = 4,
}

/// Market state of the underlying.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QgMarket {
    pub s0: f64,
    pub sigma: f64,
    pub rate: f64,
    pub maturity: f64,
}

/// One estimation request: product, method and sampling budget.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QgRequest {
    pub product: QgProduct,
    pub method: QgMethod,
    pub strike: f64,
    /// Monitoring dates per path (must be 1 for the European call; must be
    /// a power of two for the bridge method).
    pub steps: u32,
    /// Paths per run (pairs for the antithetic method).
    pub paths: u64,
    /// Independent runs; error fields are populated when runs >= 2.
    pub runs: u32,
    pub seed: u64,
    /// Worker threads; 0 means all available cores.
    pub workers: u32,
}

/// Estimates and their run-to-run errors. Errors are the population
/// standard deviation of the per-run means (zero when runs < 2). For the
/// European call, `delta` is the pathwise delta and vega/gamma are zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QgEstimate {
    pub price: f64,
    pub delta: f64,
    pub vega: f64,
    pub gamma: f64,
    pub price_error: f64,
    pub delta_error: f64,
    pub vega_error: f64,
    pub gamma_error: f64,
    pub runs: u32,
}

/// Opaque engine handle; holds validated market parameters.
pub struct QgEngine {
    market: MarketParams,
}

impl QgProduct {
    fn to_kind(self) -> ProductKind {
        match self {
            QgProduct::ArithmeticAsian => ProductKind::ArithmeticAsian,
            QgProduct::BinaryAsian => ProductKind::BinaryAsian,
            QgProduct::Lookback => ProductKind::Lookback,
            QgProduct::EuropeanCall => ProductKind::EuropeanCall,
        }
    }
}

impl QgMethod {
    fn to_method(self) -> Method {
        match self {
            QgMethod::LrMc => Method::LrMc,
            QgMethod::McCpw => Method::McCpw,
            QgMethod::McAvCpw => Method::McAvCpw,
            QgMethod::QmcCpw => Method::QmcCpw,
            QgMethod::QmcBbCpw => Method::QmcBbCpw,
        }
    }
}

/// Creates an engine from market parameters. On success writes the handle
/// to `out`; destroy it with `qg_engine_free`.
///
/// # Safety
///
/// `market` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qg_engine_new(
    market: *const QgMarket,
    out: *mut *mut QgEngine,
) -> QgStatus {
    if market.is_null() || out.is_null() {
        return QgStatus::NullPointer;
    }
    let m = unsafe { *market };
    match catch_unwind(|| MarketParams::new(m.s0, m.sigma, m.rate, m.maturity)) {
        Ok(Ok(market)) => {
            let engine = Box::new(QgEngine { market });
            unsafe { *out = Box::into_raw(engine) };
            QgStatus::Ok
        }
        Ok(Err(_)) => QgStatus::InvalidArgument,
        Err(_) => QgStatus::Panic,
    }
}

/// Destroys an engine created by `qg_engine_new`. A null pointer is a
/// no-op.
///
/// # Safety
///
/// `engine` must be null or a pointer previously returned by
/// `qg_engine_new` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qg_engine_free(engine: *mut QgEngine) {
    if !engine.is_null() {
        drop(unsafe { Box::from_raw(engine) });
    }
}

fn estimate_impl(engine: &QgEngine, request: &QgRequest) -> Result<QgEstimate, QgStatus> {
    let spec = ProductSpec::new(
        request.product.to_kind(),
        request.strike,
        request.steps as usize,
    )
    .map_err(|_| QgStatus::InvalidArgument)?;
    let ms = MethodSpec::new(
        request.method.to_method(),
        request.paths as usize,
        request.runs as usize,
        request.seed,
        request.steps as usize,
    )
    .map_err(|_| QgStatus::InvalidArgument)?;
    let workers = if request.workers == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        request.workers as usize
    };
    let run = with_pool(workers, || run_method(&engine.market, &spec, &ms))
        .map_err(|_| QgStatus::RunFailed)?;
    let column = |f: fn(&qmc_greeks::stats::RunSummary) -> f64| -> (f64, f64) {
        let means: Vec<f64> = run.summaries.iter().map(f).collect();
        match aggregate(&means) {
            Ok(a) => (a.estimate, a.sigma),
            // single run: the mean is the estimate, no error bar
            Err(_) => (means[0], 0.0),
        }
    };
    let (price, price_error) = column(|s| s.price);
    let (delta, delta_error) = column(|s| s.delta);
    let (vega, vega_error) = column(|s| s.vega);
    let (gamma, gamma_error) = column(|s| s.gamma);
    Ok(QgEstimate {
        price,
        delta,
        vega,
        gamma,
        price_error,
        delta_error,
        vega_error,
        gamma_error,
        runs: request.runs,
    })
}

/// Runs one estimation request and writes the result to `out`.
///
/// # Safety
///
/// `engine` must be a live handle from `qg_engine_new`; `request` and
/// `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qg_engine_estimate(
    engine: *const QgEngine,
    request: *const QgRequest,
    out: *mut QgEstimate,
) -> QgStatus {
    if engine.is_null() || request.is_null() || out.is_null() {
        return QgStatus::NullPointer;
    }
    let engine = unsafe { &*engine };
    let request = unsafe { *request };
    match catch_unwind(AssertUnwindSafe(|| estimate_impl(engine, &request))) {
        Ok(Ok(estimate)) => {
            unsafe { *out = estimate };
            QgStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => QgStatus::Panic,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qg_status_message(status: QgStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        QgStatus::Ok => b"ok\0",
        QgStatus::NullPointer => b"null pointer argument\0",
        QgStatus::InvalidArgument => b"invalid argument\0",
        QgStatus::RunFailed => b"simulation run failed\0",
        QgStatus::Panic => b"internal panic\0",
    };
    msg.as_ptr().cast()
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn qg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
