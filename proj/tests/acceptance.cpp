// Acceptance gate: runs every shipped correctness and performance criterion
// end to end and prints one PASS/FAIL line per criterion.  Exits nonzero if
// any criterion fails.  Expected total runtime is a few minutes; the range
// preservation and factorization speedup checks dominate.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "frsid/baseline.hpp"
#include "frsid/benchmark.hpp"
#include "frsid/identify.hpp"
#include "frsid/metrics.hpp"
#include "frsid/simulate.hpp"

using namespace frsid;

namespace {

struct CriterionOutcome {
  bool ran = false;
  bool pass = false;
  std::string detail;
};

std::array<CriterionOutcome, 9> g_outcomes;

void record(int criterion, bool pass, const std::string& detail) {
  CriterionOutcome& out = g_outcomes[static_cast<std::size_t>(criterion - 1)];
  out.ran = true;
  out.pass = pass;
  out.detail = detail;
}

std::string fmt(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.3g", value);
  return std::string(buffer);
}

constexpr double kPi = 3.14159265358979323846;

/// Tracks the triangular-reduction spectrum identity on every randomized
/// pipeline run executed by this binary.  Two clauses, both at 1e-10: every
/// deviation must be small relative to the spectrum scale sigma_1 (the SVD
/// rounding floor is proportional to sigma_1 by Weyl's bound), and singular
/// values carrying at least 1e-3 of that scale must also agree elementwise
/// relatively — below that magnitude double precision cannot certify an
/// elementwise-relative bound this tight for either computation.
struct SpectrumIdentityTracker {
  double worst_scale = 0.0;  ///< max |delta_i| / sigma_1
  double worst_elem = 0.0;   ///< max |delta_i| / sigma_i over sigma_i >= 1e-3 sigma_1
  long runs = 0;

  void observe(const IdentifyResult& result) {
    const ProjectionResult& pr = result.diagnostics.projection;
    if (pr.zeta.size() == 0 || pr.singular_values.size() == 0) return;
    const Vector direct = singular_values(pr.zeta);
    if (direct.size() != pr.singular_values.size()) {
      worst_scale = std::numeric_limits<double>::infinity();
      return;
    }
    const double top = std::max(direct(0), pr.singular_values(0));
    if (top <= 0.0) return;
    for (Index i = 0; i < direct.size(); ++i) {
      const double diff = std::abs(direct(i) - pr.singular_values(i));
      worst_scale = std::max(worst_scale, diff / top);
      if (direct(i) >= 1e-3 * top)
        worst_elem = std::max(worst_elem, diff / direct(i));
    }
    ++runs;
  }
};

SpectrumIdentityTracker g_spectrum;

StateSpaceModel make_system(Index n, Index m, Index p, std::uint64_t seed) {
  SystemSpec spec;
  spec.n = n;
  spec.m = m;
  spec.p = p;
  spec.seed = seed;
  return generate_system(spec);
}

TimeSeriesData noise_free_data(const StateSpaceModel& model, Index n_samples,
                               std::uint64_t seed) {
  TimeSeriesData ts;
  ts.u = make_input(model.m(), n_samples, InputKind::kWhiteGaussian, seed);
  ts.y = simulate_deterministic(model, ts.u);
  return ts;
}

Matrix true_theta(const StateSpaceModel& model, Index k) {
  Matrix theta(k * model.p(), model.n());
  Matrix power = Matrix::Identity(model.n(), model.n());
  for (Index i = 0; i < k; ++i) {
    theta.middleRows(i * model.p(), model.p()) = model.c * power;
    power = model.a * power;
  }
  return theta;
}

SketchedData uncompressed(const HankelSet& set) {
  SketchedData data;
  data.u_past = set.u_past;
  data.u_future = set.u_future;
  data.y_past = set.y_past;
  data.y_future = set.y_future;
  data.n_columns = set.u_past.cols();
  data.q = 0;
  data.scaled = false;
  return data;
}

IdentifyResult run_randomized(const TimeSeriesData& ts, Index k, Index l,
                              int q, std::uint64_t seed,
                              Index order_override = 0, Index d = 1) {
  IdentifyConfig cfg;
  cfg.sketch.k = k;
  cfg.sketch.l = l;
  cfg.sketch.q = q;
  cfg.sketch.d = d;
  cfg.sketch.seed = seed;
  cfg.order_override = order_override;
  IdentifyResult result = run_fr2sid(ts, cfg);
  g_spectrum.observe(result);
  return result;
}

// --- criterion 1: range preservation over 100 seeded compressions ---------

void criterion1() {
  struct ShapeCase {
    Index k, m, p, d, n, trials;
  };
  const std::vector<ShapeCase> cases = {
      {10, 2, 2, 5, 5, 88},
      {20, 5, 5, 10, 10, 8},
      {60, 10, 5, 15, 10, 3},
      {100, 10, 10, 20, 10, 1},
  };
  const Index n_columns = 100000;

  const detail::StageTimer timer;
  Index preserved = 0, total = 0;
  double max_distance = 0.0;
  double max_reference_gap = 0.0;

  for (std::size_t si = 0; si < cases.size(); ++si) {
    const ShapeCase& sc = cases[si];
    const StateSpaceModel model =
        make_system(sc.n, sc.m, sc.p, 1000 + static_cast<std::uint64_t>(si));
    const Index n_samples = n_columns + 2 * sc.k - 1;
    const TimeSeriesData ts = noise_free_data(
        model, n_samples, 1100 + static_cast<std::uint64_t>(si));
    const Matrix theta = true_theta(model, sc.k);

    // For the two small shapes the uncompressed projection is computed
    // outright and verified to span the true observability range; the two
    // large shapes then use that range as the reference (the full-width
    // factorization alone would exceed the runtime budget).
    Matrix reference = theta;
    if (sc.k <= 20) {
      const SketchedData full = uncompressed(build_hankel(ts, sc.k));
      const LqFactors factors = project_lq(full);
      ProjectionResult pr = oblique_projection(factors, full.w_past());
      reduce_and_svd(pr);
      if (estimate_order(pr.singular_values) != sc.n)
        throw Error("criterion 1: uncompressed projection rank mismatch");
      max_reference_gap =
          std::max(max_reference_gap, subspace_distance(pr.r_zeta, theta));
      reference = pr.r_zeta;  // same column space as the full zeta
    }

    SketchConfig cfg;
    cfg.k = sc.k;
    cfg.d = sc.d;
    cfg.q = 0;
    for (Index trial = 0; trial < sc.trials; ++trial) {
      cfg.seed = derive_seed(7100 + static_cast<std::uint64_t>(si),
                             static_cast<std::uint64_t>(trial));
      const SketchedData sketch = sketch_stream(ts, cfg);
      const LqFactors factors = project_lq(sketch);
      ProjectionResult pr = oblique_projection(factors, sketch.w_past());
      reduce_and_svd(pr);
      ++total;
      if (estimate_order(pr.singular_values) == sc.n) ++preserved;
      max_distance =
          std::max(max_distance, subspace_distance(reference, pr.zeta));
    }
    std::cerr << "  criterion 1 shape {" << sc.k << "," << sc.m << ","
              << sc.p << "}: done after " << fmt(timer.elapsed_ms() / 1000.0)
              << " s\n";
  }

  const double seconds = timer.elapsed_ms() / 1000.0;
  const bool pass =
      preserved == total && total == 100 && max_distance <= 1e-6 &&
      seconds <= 120.0;
  record(1, pass,
         "rank preserved " + std::to_string(preserved) + "/" +
             std::to_string(total) + ", max distance " + fmt(max_distance) +
             " (reference gap " + fmt(max_reference_gap) + "), " +
             fmt(seconds) + " s of 120 s budget");
}

// --- criterion 2: deterministic identification to machine accuracy --------

struct Criterion2Case {
  Index n, k, m, p;
};

const std::vector<Criterion2Case> kCriterion2Cases = {
    {2, 3, 5, 5}, {5, 6, 5, 5}, {10, 11, 10, 10}};

void criterion2() {
  const Index n_columns = 10000;
  double worst_nee = 0.0, worst_mse = 0.0, worst_seconds = 0.0;
  bool orders_ok = true;

  for (std::size_t ci = 0; ci < kCriterion2Cases.size(); ++ci) {
    const Criterion2Case& c = kCriterion2Cases[ci];
    const detail::StageTimer timer;
    const StateSpaceModel model =
        make_system(c.n, c.m, c.p, 2000 + static_cast<std::uint64_t>(ci));
    const Index n_samples = n_columns + 2 * c.k - 1;
    const TimeSeriesData train = noise_free_data(
        model, n_samples, 2100 + static_cast<std::uint64_t>(ci));
    const TimeSeriesData validation = noise_free_data(
        model, 10000, 2200 + static_cast<std::uint64_t>(ci));

    const IdentifyResult fast =
        run_randomized(train, c.k, 5, 0, 2300 + static_cast<std::uint64_t>(ci));
    BaselineConfig base_cfg;
    base_cfg.k = c.k;
    const IdentifyResult conventional = run_conventional(train, base_cfg);

    for (const IdentifyResult* result : {&fast, &conventional}) {
      if (result->diagnostics.order != c.n) {
        orders_ok = false;
        continue;
      }
      worst_nee =
          std::max(worst_nee, nee(model.poles(), result->model.poles()));
      worst_mse =
          std::max(worst_mse, validation_mse(result->model, validation).total);
    }
    worst_seconds = std::max(worst_seconds, timer.elapsed_ms() / 1000.0);
  }

  const bool pass =
      orders_ok && worst_nee <= 1e-10 && worst_mse <= 1e-10 &&
      worst_seconds <= 60.0;
  record(2, pass,
         std::string(orders_ok ? "orders detected" : "ORDER MISMATCH") +
             ", worst NEE " + fmt(worst_nee) + ", worst net MSE " +
             fmt(worst_mse) + ", slowest shape " + fmt(worst_seconds) + " s");
}

// --- criterion 3: power iteration helps at low SNR ------------------------

void criterion3() {
  const Index n = 10, k = 15, m = 5, p = 5;
  const Index n_columns = 20000;
  const Index n_samples = n_columns + 2 * k - 1;
  std::vector<double> nee_q0, nee_q1;

  for (std::uint64_t s = 0; s < 20; ++s) {
    const StateSpaceModel model = make_system(n, m, p, 3000 + s);
    TimeSeriesData ts;
    ts.u = make_input(m, n_samples, InputKind::kWhiteGaussian,
                      derive_seed(3100, s));
    ts.y = simulate(model, ts.u, 50.0, derive_seed(3200, s)).data.y;
    const std::uint64_t sketch_seed = derive_seed(3300, s);

    const IdentifyResult r0 = run_randomized(ts, k, 5, 0, sketch_seed, n);
    const IdentifyResult r1 = run_randomized(ts, k, 5, 1, sketch_seed, n);
    nee_q0.push_back(nee(model.poles(), r0.model.poles()));
    nee_q1.push_back(nee(model.poles(), r1.model.poles()));
  }

  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  };
  const double med0 = median(nee_q0);
  const double med1 = median(nee_q1);
  record(3, med1 < med0,
         "median NEE over 20 paired seeds: q=1 " + fmt(med1) + " vs q=0 " +
             fmt(med0));
}

// --- criterion 4: singular values survive the triangular reduction --------

void criterion4() {
  const bool pass = g_spectrum.runs > 0 && g_spectrum.worst_scale <= 1e-10 &&
                    g_spectrum.worst_elem <= 1e-10;
  record(4, pass,
         "worst deviation " + fmt(g_spectrum.worst_scale) +
             " of sigma_1, worst elementwise " + fmt(g_spectrum.worst_elem) +
             " (values >= 1e-3 sigma_1) across " +
             std::to_string(g_spectrum.runs) + " randomized pipeline runs");
}

// --- criterion 5: Kalman gain and innovation covariance recovery ----------

void criterion5() {
  StateSpaceModel model;
  model.a = 0.5 * Matrix::Identity(1, 1);
  model.b = Matrix::Zero(1, 1);
  model.c = Matrix::Identity(1, 1);
  model.d = Matrix::Zero(1, 1);
  model.k = 0.2 * Matrix::Identity(1, 1);
  model.eta = Matrix::Identity(1, 1);

  const Index k = 12;
  const Index n_columns = 200000;
  const Index n_samples = n_columns + 2 * k - 1;
  const Matrix u = make_input(1, n_samples, InputKind::kWhiteGaussian, 4100);
  const SimulationRun run = simulate_with_eta(model, u, model.eta, 4200);
  TimeSeriesData ts;
  ts.u = u;
  ts.y = run.data.y;

  // The Kalman-gain entries of the residual factor sit two decades below the
  // innovation scale, so the q=0 run uses a large sketch (the sketch is the
  // Monte-Carlo sample here; its noise shrinks as 1/sqrt(N_c)).
  const IdentifyResult r0 =
      run_randomized(ts, k, /*l=*/15000, 0, 4300, /*order=*/1, /*d=*/100);
  const double eta0 = r0.model.eta(0, 0);
  const double gain0 = (r0.model.c * r0.model.k)(0, 0);  // similarity aligned

  const IdentifyResult r1 =
      run_randomized(ts, k, /*l=*/2000, 1, 4300, /*order=*/1, /*d=*/20);
  const double eta1 = r1.model.eta(0, 0);

  const double eta0_err = std::abs(eta0 - 1.0);
  const double gain0_err = std::abs(gain0 - 0.2) / 0.2;
  const double eta1_err = std::abs(eta1 - 1.0);
  const bool pass = eta0_err <= 0.10 && gain0_err <= 0.10 && eta1_err <= 0.15;
  record(5, pass,
         "q=0: eta " + fmt(eta0) + " (err " + fmt(eta0_err) + "), aligned K " +
             fmt(gain0) + " (err " + fmt(gain0_err) + "); q=1: eta " +
             fmt(eta1) + " (err " + fmt(eta1_err) + ")");
}

// --- criterion 6: streaming equals the monolithic definition --------------

void criterion6() {
  const Index k = 8, m = 2, p = 3;
  const Index n_columns = 50000;
  const Index n_samples = n_columns + 2 * k - 1;
  const StateSpaceModel model = make_system(6, m, p, 5000);
  TimeSeriesData ts;
  ts.u = make_input(m, n_samples, InputKind::kWhiteGaussian, 5100);
  ts.y = simulate(model, ts.u, 20.0, 5200).data.y;

  SketchConfig cfg;
  cfg.k = k;
  cfg.seed = 5300;
  const Index n_c = cfg.sketch_columns(m, p);
  const Matrix compression =
      GaussianSketchSource(cfg.seed, n_c).rows(0, n_columns);
  const HankelSet full = build_hankel(ts, k);

  double worst_q0 = 0.0, worst_q1 = 0.0;
  for (int q : {0, 1}) {
    cfg.q = q;
    // Monolithic reference: one dense product per Hankel matrix, with the
    // Gram power applied at full width.
    const auto reference = [&](const Matrix& x) {
      Matrix sketched = x * compression;
      if (q == 1) sketched = (x * x.transpose()) * sketched;
      return sketched;
    };
    Matrix ref(2 * k * (m + p), n_c);
    ref.topRows(k * m) = reference(full.u_future);
    ref.middleRows(k * m, k * m) = reference(full.u_past);
    ref.middleRows(2 * k * m, k * p) = reference(full.y_past);
    ref.bottomRows(k * p) = reference(full.y_future);

    for (Index d : {1, 4, 16}) {
      cfg.d = d;
      const Matrix streamed = sketch_stream(ts, cfg).joint();
      const double rel = (streamed - ref).norm() / ref.norm();
      (q == 0 ? worst_q0 : worst_q1) =
          std::max(q == 0 ? worst_q0 : worst_q1, rel);
    }
  }
  record(6, worst_q0 <= 1e-12 && worst_q1 <= 1e-10,
         "d in {1,4,16}: worst relative error q=0 " + fmt(worst_q0) +
             ", q=1 " + fmt(worst_q1));
}

// --- criterion 7: compressed factorization is faster ----------------------

void criterion7() {
  BenchmarkOptions options;
  options.n_columns = 100000;
  options.q = 0;
  options.repeats = 1;
  options.seed = 6000;
  const BenchmarkResult result =
      run_benchmark(BenchmarkShape{100, 10, 10, 20}, options);

  const std::uint64_t measured =
      result.io.words_read + result.io.words_written;
  const double io_rel =
      std::abs(static_cast<double>(measured) -
               static_cast<double>(result.dm_formula_words)) /
      static_cast<double>(result.dm_formula_words);
  const bool pass = result.speedup >= 1.5 && io_rel <= 0.05;
  record(7, pass,
         "speedup " + fmt(result.speedup) + " (full " +
             fmt(result.full_ms / 1000.0) + " s vs compressed " +
             fmt(result.compressed_ms() / 1000.0) + " s), io deviation " +
             fmt(io_rel));
}

// --- criterion 8: graceful degradation under a memory cap -----------------

void criterion8() {
  const Index n = 20, k = 25, m = 2, p = 2;
  const Index n_columns = 20000;

  // A randomly generated order-20 system is numerically of much lower order
  // through two channels (crowded poles make the length-20 Vandermonde
  // collapse), so the system is built with ten well-separated complex pole
  // pairs on a radius/angle grid; its full order is then cleanly visible.
  StateSpaceModel model;
  model.a = Matrix::Zero(n, n);
  for (Index j = 0; j < n / 2; ++j) {
    const double radius = 0.50 + 0.045 * static_cast<double>(j);
    const double angle = (static_cast<double>(j) + 0.5) * kPi / 10.0;
    const double re = radius * std::cos(angle);
    const double im = radius * std::sin(angle);
    model.a(2 * j, 2 * j) = re;
    model.a(2 * j, 2 * j + 1) = im;
    model.a(2 * j + 1, 2 * j) = -im;
    model.a(2 * j + 1, 2 * j + 1) = re;
  }
  model.b = make_input(n, m, InputKind::kWhiteGaussian, 6550);
  model.c = make_input(p, n, InputKind::kWhiteGaussian, 6560);
  model.d = make_input(p, m, InputKind::kWhiteGaussian, 6570);
  model.k = Matrix::Zero(n, p);
  model.eta = Matrix::Zero(p, p);

  const TimeSeriesData ts =
      noise_free_data(model, n_columns + 2 * k - 1, 6600);

  BaselineConfig cfg;
  cfg.k = k;
  // Below even the bare Hankel-matrix footprint 2k(m+p)N doubles (32.0 MB),
  // let alone the full 56 MB conventional working set.
  cfg.memory_cap_bytes = 24ULL << 20;
  bool refused = false;
  std::uint64_t predicted = 0;
  try {
    run_conventional(ts, cfg);
  } catch (const MemoryCapError& e) {
    refused = true;
    predicted = e.predicted_bytes;
  }

  const IdentifyResult fast = run_randomized(ts, k, 5, 0, 6700);
  const double fast_nee =
      fast.diagnostics.order == n
          ? nee(model.poles(), fast.model.poles())
          : std::numeric_limits<double>::infinity();

  record(8, refused && fast_nee <= 1e-3,
         std::string(refused ? "baseline refused (needs " +
                                   std::to_string(predicted >> 20) +
                                   " MiB against a 24 MiB cap)"
                             : "BASELINE DID NOT REFUSE") +
             ", randomized pipeline NEE " + fmt(fast_nee) + " at order " +
             std::to_string(fast.diagnostics.order));
}

// --- criterion 9: similarity contract across sketch seeds -----------------

void criterion9() {
  const Index n_columns = 10000;
  double worst = 0.0;
  bool all_defined = true;

  for (std::size_t ci = 0; ci < kCriterion2Cases.size(); ++ci) {
    const Criterion2Case& c = kCriterion2Cases[ci];
    const StateSpaceModel model =
        make_system(c.n, c.m, c.p, 2000 + static_cast<std::uint64_t>(ci));
    const TimeSeriesData train = noise_free_data(
        model, n_columns + 2 * c.k - 1, 2100 + static_cast<std::uint64_t>(ci));

    for (std::uint64_t seed : {701u, 702u, 703u}) {
      const IdentifyResult result = run_randomized(train, c.k, 5, 0, seed);
      if (result.diagnostics.order != c.n) {
        all_defined = false;
        continue;
      }
      worst = std::max(
          worst, markov_error(model, result.model, 2 * c.k - 1));
    }

    BaselineConfig base_cfg;
    base_cfg.k = c.k;
    const IdentifyResult conventional = run_conventional(train, base_cfg);
    if (conventional.diagnostics.order != c.n)
      all_defined = false;
    else
      worst = std::max(
          worst, markov_error(model, conventional.model, 2 * c.k - 1));
  }

  record(9, all_defined && worst <= 1e-6,
         std::string(all_defined ? "all orders detected"
                                 : "ORDER MISMATCH") +
             ", worst Markov deviation over 2k steps " + fmt(worst) +
             " across 3 sketch seeds per shape");
}

}  // namespace

int main() {
  struct Entry {
    int criterion;
    const char* name;
    void (*fn)();
  };
  // Criterion 4 aggregates over every randomized run, so it executes last.
  const std::vector<Entry> entries = {
      {1, "range preservation", criterion1},
      {2, "deterministic identification", criterion2},
      {3, "noise robustness ordering", criterion3},
      {5, "K and eta recovery", criterion5},
      {6, "streaming exactness", criterion6},
      {7, "factorization speedup", criterion7},
      {8, "out-of-memory handling", criterion8},
      {9, "similarity invariance", criterion9},
      {4, "spectrum preservation", criterion4},
  };

  for (const Entry& entry : entries) {
    std::cerr << "running criterion " << entry.criterion << " ("
              << entry.name << ")...\n";
    try {
      entry.fn();
    } catch (const std::exception& e) {
      record(entry.criterion, false, std::string("exception: ") + e.what());
    }
  }

  const char* names[9] = {
      "range preservation",      "deterministic identification",
      "noise robustness",        "spectrum preservation",
      "K and eta recovery",      "streaming exactness",
      "factorization speedup",   "out-of-memory handling",
      "similarity invariance"};
  int failures = 0;
  for (int i = 0; i < 9; ++i) {
    const CriterionOutcome& out = g_outcomes[static_cast<std::size_t>(i)];
    const bool pass = out.ran && out.pass;
    if (!pass) ++failures;
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1)
              << " (" << names[i] << "): "
              << (out.ran ? out.detail : "did not run") << "\n";
  }
  if (failures == 0)
    std::cout << "all 9 acceptance criteria passed\n";
  else
    std::cout << failures << " acceptance criteria failed\n";
  return failures == 0 ? 0 : 1;
}
