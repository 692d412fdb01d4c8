// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skdv/dynamics.hpp"
#include "skdv/field.hpp"
#include "skdv/noise.hpp"
#include "skdv/weights.hpp"

namespace skdv {

/// Per-snapshot diagnostics. Norm fields hold squared norms.
struct DiagnosticsRecord {
  double t = 0.0;
  double l2_sq = 0.0;
  double h1_sq = 0.0;
  double h2_sq = 0.0;
  double h1_window_sq = 0.0;
  double f_value = 0.0;
  /// <F'(u), drift(u)> = 2 int p u drift(u).
  double ito_drift_term = 0.0;
  /// Tr(F'' Phi Phi^*) = 2 sum_i int p (Phi(u) e_i)^2.
  double ito_trace_term = 0.0;
  double boundary_contamination = 0.0;
  bool blow_up = false;

  friend bool operator==(const DiagnosticsRecord&, const DiagnosticsRecord&) = default;
};

/// One JSON object, fixed key order: t, l2, h1, h2, h1_win, F, ito_drift, ito_trace, bc, blowup.
std::string to_json_line(const DiagnosticsRecord& r);
DiagnosticsRecord parse_json_line(const std::string& line);

/// Fixed test functions a, b for martingale pairings.
struct ProbePair {
  Field a;
  Field b;
};

/// C-infinity bump supported in [center - half_width, center + half_width], unit L2 norm.
Field bump_probe(const Grid& grid, double center, double half_width);

/// Pairings recorded at each snapshot for one ProbePair.
struct ProbeSample {
  double u_a = 0.0;      // <u, a>
  double u_b = 0.0;      // <u, b>
  double drift_a = 0.0;  // <drift(u), a>
  double drift_b = 0.0;  // <drift(u), b>
  double qv_rate = 0.0;  // <Phi(u)^* a, Phi(u)^* b>

  friend bool operator==(const ProbeSample&, const ProbeSample&) = default;
};

/// Everything one path leaves behind.
struct PathResult {
  std::uint64_t path_index = 0;
  std::vector<DiagnosticsRecord> records;
  /// probes[p][s]: pairing of probe pair p at snapshot s.
  std::vector<std::vector<ProbeSample>> probes;
  bool blew_up = false;
  std::string blow_up_reason;
  /// FNV-1a hash of every Wiener increment consumed, in order.
  std::uint64_t draw_hash = 0;
  /// Max of ||Phi(u)||_HS / certified bound over all steps.
  double w1_utilization = 0.0;
  /// Final field (empty when the path blew up).
  std::optional<Field> final_field;
};

/// Compares every stored number by its bit pattern, so NaN blow-up records compare equal.
bool bitwise_equal(const DiagnosticsRecord& a, const DiagnosticsRecord& b);
bool bitwise_equal(const PathResult& a, const PathResult& b);

struct FunctionalValue {
  double value;
  double boundary_contamination;
  /// Set when p is not periodic and the field does not vanish at the box edge.
  bool flagged;
};

/// F(u) = int p u^2.
FunctionalValue functional_f(const Field& u, const WeightProfile& p);

/// |LHS - RHS| of the four weighted integration-by-parts identities:
///   (a) int p u u_3x = 3/2 int p' u_x^2 - 1/2 int p''' u^2
///   (b) int p u^2 u_x = -1/3 int p' u^3
///   (c) int p u u_4x = int p u_2x^2 - 2 int p'' u_x^2 + 1/2 int p'''' u^2
///   (d) int p (3 u_x u_2x + u u_3x) u = int p'' u^2 u_x + 2 int p' u u_x^2 + int p u u_x u_2x
struct IdentityResiduals {
  std::array<double, 4> values{};
  double max() const;
};
IdentityResiduals ibp_identity_residuals(const Field& u, const WeightProfile& p);

/// 2 sum_i int p (Phi(u) e_i)^2 over the retained modes.
double ito_trace(const Field& u, const WeightProfile& p, const NoiseModel& noise);

/// Computes records (and probe pairings) for a fixed experiment setup.
class Recorder {
 public:
  Recorder(WeightProfile p, const NoiseModel& noise, DriftSpec drift, double window_k,
           std::vector<ProbePair> probes = {});

  DiagnosticsRecord record(double t, const Field& u);
  /// Same as record() and additionally appends one ProbeSample per probe pair.
  DiagnosticsRecord record(double t, const Field& u, std::vector<std::vector<ProbeSample>>& probe_out);
  std::size_t probe_count() const noexcept { return probes_.size(); }

 private:
  WeightProfile p_;
  Field p_samples_;
  const NoiseModel* noise_;
  DriftOperator drift_;
  Window window_;
  std::vector<ProbePair> probes_;
  Field last_drift_;
};

/// Trapezoid rule of y over the (possibly non-uniform) abscissae t.
double trapezoid(std::span<const double> t, std::span<const double> y);

struct BudgetTolerance {
  /// Allowed |discrepancy| beyond 3 SE, as a fraction of |signal|.
  double relative_band = 0.02;
  /// Absolute allowance, for deterministic ensembles.
  double absolute_band = 0.0;
};

struct BudgetReport {
  std::size_t paths = 0;
  double signal = 0.0;        // E F(u(T)) - F(u0)
  double predicted = 0.0;     // E int (ito_drift + trace / 2) dt
  double discrepancy = 0.0;   // signal - predicted
  double standard_error = 0.0;
  double tolerance = 0.0;
  bool underpowered = false;  // fewer than 1000 stochastic paths
  bool pass = false;
};

/// Compares E F(u(T)) - F(u0) against the time integral of the expected Ito rate.
BudgetReport ito_budget_check(std::span<const PathResult> paths, BudgetTolerance tol = {});

struct MartingaleReport {
  std::size_t paths = 0;
  double s = 0.0;
  double t = 0.0;
  double mean_increment = 0.0;     // E <M(t) - M(s), a>
  double increment_se = 0.0;
  double qv_discrepancy = 0.0;     // E[<M_t,a><M_t,b> - <M_s,a><M_s,b> - int_s^t <Phi^*a, Phi^*b>]
  double qv_discrepancy_se = 0.0;
  double realized_qv = 0.0;        // E sum over snapshots in (s, t] of <dM, a><dM, b>
  double realized_qv_se = 0.0;
  double predicted_qv = 0.0;       // E int_s^t <Phi^*a, Phi^*b>
  bool increment_pass = false;
  bool qv_pass = false;
};

/// Martingale tests for probe pair `probe` between snapshot times s < t.
/// M(t) = u(t) - u0 - int_0^t drift(u) ds is rebuilt with the trapezoid rule.
/// `abs_tol` is added to the 3-SE acceptance bands (time-discretization residual).
MartingaleReport martingale_probe(std::span<const PathResult> paths, double s, double t, std::size_t probe,
                                  double abs_tol = 0.0);

struct MomentEstimates {
  std::size_t paths = 0;
  double est_4a = 0.0;  // eps * E int_0^T |u|_{H2}^2
  double est_4a_se = 0.0;
  double est_4c = 0.0;  // E int_0^T |u|_{H1(-k,k)}^2
  double est_4c_se = 0.0;
  double blowup_fraction = 0.0;
};

/// Throws NumericalError if every path blew up. SE is NaN for a single path.
MomentEstimates moment_estimators(std::span<const PathResult> paths, double epsilon);

}  // namespace skdv
