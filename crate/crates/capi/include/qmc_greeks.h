/* C interface to the qmc-greeks Monte Carlo / quasi-Monte Carlo Greeks engine. */

#ifndef QMC_GREEKS_H
#define QMC_GREEKS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Simulation method selector.
 */
typedef enum QgMethod {
  QgMethod_LrMc = 0,
  QgMethod_McCpw = 1,
  QgMethod_McAvCpw = 2,
  QgMethod_QmcCpw = 3,
  QgMethod_QmcBbCpw = 4,
} QgMethod;

/**
 * Option type selector.
 */
typedef enum QgProduct {
  QgProduct_ArithmeticAsian = 0,
  QgProduct_BinaryAsian = 1,
  QgProduct_Lookback = 2,
  QgProduct_EuropeanCall = 3,
} QgProduct;

/**
 * Status code returned by every fallible call.
 */
typedef enum QgStatus {
  QgStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  QgStatus_NullPointer = 1,
  /**
   * A field failed validation (bad market data, strike, paths, ...).
   */
  QgStatus_InvalidArgument = 2,
  /**
   * The simulation itself failed (e.g. a rejected path).
   */
  QgStatus_RunFailed = 3,
  /**
   * An internal panic was caught at the boundary.
   */
  QgStatus_Panic = 4,
} QgStatus;

/**
 * Opaque engine handle; holds validated market parameters.
 */
typedef struct QgEngine QgEngine;

/**
 * Market state of the underlying.
 */
typedef struct QgMarket {
  double s0;
  double sigma;
  double rate;
  double maturity;
} QgMarket;

/**
 * One estimation request: product, method and sampling budget.
 */
typedef struct QgRequest {
  enum QgProduct product;
  enum QgMethod method;
  double strike;
  /**
   * Monitoring dates per path (must be 1 for the European call; must be
   * a power of two for the bridge method).
   */
  uint32_t steps;
  /**
   * Paths per run (pairs for the antithetic method).
   */
  uint64_t paths;
  /**
   * Independent runs; error fields are populated when runs >= 2.
   */
  uint32_t runs;
  uint64_t seed;
  /**
   * Worker threads; 0 means all available cores.
   */
  uint32_t workers;
} QgRequest;

/**
 * Estimates and their run-to-run errors. Errors are the population
 * standard deviation of the per-run means (zero when runs < 2). For the
 * European call, `delta` is the pathwise delta and vega/gamma are zero.
 */
typedef struct QgEstimate {
  double price;
  double delta;
  double vega;
  double gamma;
  double price_error;
  double delta_error;
  double vega_error;
  double gamma_error;
  uint32_t runs;
} QgEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an engine from market parameters. On success writes the handle
 * to `out`; destroy it with `qg_engine_free`.
 *
 * # Safety
 *
 * `market` and `out` must be valid pointers.
 */
enum QgStatus qg_engine_new(const struct QgMarket *market, struct QgEngine **out);

/**
 * Destroys an engine created by `qg_engine_new`. A null pointer is a
 * no-op.
 *
 * # Safety
 *
 * `engine` must be null or a pointer previously returned by
 * `qg_engine_new` that has not been freed.
 */
void qg_engine_free(struct QgEngine *engine);

/**
 * Runs one estimation request and writes the result to `out`.
 *
 * # Safety
 *
 * `engine` must be a live handle from `qg_engine_new`; `request` and
 * `out` must be valid pointers.
 */
enum QgStatus qg_engine_estimate(const struct QgEngine *engine,
                                 const struct QgRequest *request,
                                 struct QgEstimate *out);

/**
 * Static description of a status code.
 */
const char *qg_status_message(enum QgStatus status);

/**
 * Library version as a static C string.
 */
const char *qg_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* QMC_GREEKS_H */
