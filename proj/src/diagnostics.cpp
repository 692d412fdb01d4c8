// Copyright 2026 The skdv2 Authors
// SPDX-License-Identifier: Apache-2.0

#include "skdv/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "skdv/errors.hpp"

namespace skdv {

namespace {

void append_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double number_or_nan(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) {
    r.se = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  r.se = std::sqrt(var / static_cast<double>(xs.size()));
  return r;
}

double se_or_zero(double se) { return std::isfinite(se) ? se : 0.0; }

}  // namespace

std::string to_json_line(const DiagnosticsRecord& r) {
  std::string out = "{\"t\":";
  append_number(out, r.t);
  out += ",\"l2\":";
  append_number(out, r.l2_sq);
  out += ",\"h1\":";
  append_number(out, r.h1_sq);
  out += ",\"h2\":";
  append_number(out, r.h2_sq);
  out += ",\"h1_win\":";
  append_number(out, r.h1_window_sq);
  out += ",\"F\":";
  append_number(out, r.f_value);
  out += ",\"ito_drift\":";
  append_number(out, r.ito_drift_term);
  out += ",\"ito_trace\":";
  append_number(out, r.ito_trace_term);
  out += ",\"bc\":";
  append_number(out, r.boundary_contamination);
  out += ",\"blowup\":";
  out += r.blow_up ? "true" : "false";
  out += "}";
  return out;
}

DiagnosticsRecord parse_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  DiagnosticsRecord r;
  r.t = number_or_nan(j, "t");
  r.l2_sq = number_or_nan(j, "l2");
  r.h1_sq = number_or_nan(j, "h1");
  r.h2_sq = number_or_nan(j, "h2");
  r.h1_window_sq = number_or_nan(j, "h1_win");
  r.f_value = number_or_nan(j, "F");
  r.ito_drift_term = number_or_nan(j, "ito_drift");
  r.ito_trace_term = number_or_nan(j, "ito_trace");
  r.boundary_contamination = number_or_nan(j, "bc");
  r.blow_up = j.at("blowup").get<bool>();
  return r;
}

Field bump_probe(const Grid& grid, double center, double half_width) {
  if (!(half_width > 0.0)) throw PreconditionError("bump_probe: half_width must be positive");
  Field f = Field::from_function(grid, [=](double x) {
    const double r = (x - center) / half_width;
    return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
  });
  const double norm = std::sqrt(inner(f, f));
  if (norm == 0.0) throw PreconditionError("bump_probe: support contains no grid points");
  return f * (1.0 / norm);
}

FunctionalValue functional_f(const Field& u, const WeightProfile& p) {
  require_finite(u, "functional_f");
  const Field ps = p.sample(u.grid());
  const double bc = boundary_contamination(u);
  return {inner(ps, hadamard(u, u)), bc, !p.periodic() && bc > kContaminationThreshold};
}

double IdentityResiduals::max() const { return *std::max_element(values.begin(), values.end()); }

IdentityResiduals ibp_identity_residuals(const Field& u, const WeightProfile& p) {
  require_finite(u, "ibp_identity_residuals");
  const Grid& g = u.grid();
  const Field u1 = derivative(u, 1);
  const Field u2 = derivative(u, 2);
  const Field u3 = derivative(u, 3);
  const Field u4 = derivative(u, 4);
  const Field p0 = p.sample(g, 0);
  const Field p1 = p.sample(g, 1);
  const Field p2 = p.sample(g, 2);
  const Field p3 = p.sample(g, 3);
  const Field p4 = p.sample(g, 4);

  // Integral of the pointwise product of all factors.
  auto q = [](std::initializer_list<const Field*> fs) {
    const Field* first = *fs.begin();
    const std::size_t n = first->size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double v = 1.0;
      for (const Field* f : fs) v *= (*f)[j];
      sum += v;
    }
    return first->grid().spacing() * sum;
  };

  IdentityResiduals r;
  {
    const double lhs = q({&p0, &u, &u3});
    const double rhs = 1.5 * q({&p1, &u1, &u1}) - 0.5 * q({&p3, &u, &u});
    r.values[0] = std::abs(lhs - rhs);
  }
  {
    const double lhs = q({&p0, &u, &u, &u1});
    const double rhs = -q({&p1, &u, &u, &u}) / 3.0;
    r.values[1] = std::abs(lhs - rhs);
  }
  {
    const double lhs = q({&p0, &u, &u4});
    const double rhs = q({&p0, &u2, &u2}) - 2.0 * q({&p2, &u1, &u1}) + 0.5 * q({&p4, &u, &u});
    r.values[2] = std::abs(lhs - rhs);
  }
  {
    const double lhs = 3.0 * q({&p0, &u1, &u2, &u}) + q({&p0, &u, &u3, &u});
    const double rhs = q({&p2, &u, &u, &u1}) + 2.0 * q({&p1, &u, &u1, &u1}) + q({&p0, &u, &u1, &u2});
    r.values[3] = std::abs(lhs - rhs);
  }
  return r;
}

double ito_trace(const Field& u, const WeightProfile& p, const NoiseModel& noise) {
  require_finite(u, "ito_trace");
  if (noise.kind() == NoiseKind::zero) return 0.0;
  const Field g = noise.gain(u);
  const Field ps = p.sample(u.grid());
  const Field& w = noise.intensity();
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) sum += ps[j] * g[j] * g[j] * w[j];
  return 2.0 * u.grid().spacing() * sum;
}

Recorder::Recorder(WeightProfile p, const NoiseModel& noise, DriftSpec drift, double window_k,
                   std::vector<ProbePair> probes)
    : p_(p),
      p_samples_(p.sample(noise.grid())),
      noise_(&noise),
      drift_(drift, noise.grid()),
      window_{-window_k, window_k},
      probes_(std::move(probes)),
      last_drift_(noise.grid()) {
  const double half = 0.5 * noise.grid().length();
  if (!(window_k > 0.0) || window_k >= half) {
    throw ConfigError("window_k must satisfy 0 < k < L/2");
  }
}

DiagnosticsRecord Recorder::record(double t, const Field& u) {
  require_finite(u, "diagnostics");
  const Field u1 = derivative(u, 1);
  const Field u2 = derivative(u, 2);
  DiagnosticsRecord r;
  r.t = t;
  const Field usq = hadamard(u, u);
  const Field u1sq = hadamard(u1, u1);
  r.l2_sq = integrate(usq);
  r.h1_sq = r.l2_sq + integrate(u1sq);
  r.h2_sq = r.h1_sq + inner(u2, u2);
  r.h1_window_sq = integrate_window(usq + u1sq, window_);
  r.f_value = inner(p_samples_, usq);
  last_drift_ = drift_.evaluate(u);
  double drift_sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) drift_sum += p_samples_[j] * u[j] * last_drift_[j];
  r.ito_drift_term = 2.0 * u.grid().spacing() * drift_sum;
  r.ito_trace_term = ito_trace(u, p_, *noise_);
  r.boundary_contamination = boundary_contamination(u);
  return r;
}

DiagnosticsRecord Recorder::record(double t, const Field& u, std::vector<std::vector<ProbeSample>>& probe_out) {
  DiagnosticsRecord r = record(t, u);
  probe_out.resize(probes_.size());
  for (std::size_t i = 0; i < probes_.size(); ++i) {
    const ProbePair& pp = probes_[i];
    probe_out[i].push_back({inner(u, pp.a), inner(u, pp.b), inner(last_drift_, pp.a), inner(last_drift_, pp.b),
                            adjoint_pairing(*noise_, u, pp.a, pp.b)});
  }
  return r;
}

double trapezoid(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw PreconditionError("trapezoid: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) sum += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

BudgetReport ito_budget_check(std::span<const PathResult> paths, BudgetTolerance tol) {
  std::vector<double> finals;
  std::vector<double> rates;
  std::vector<double> diffs;
  double f0 = 0.0;
  for (const PathResult& p : paths) {
    if (p.blew_up || p.records.empty()) continue;
    std::vector<double> ts;
    std::vector<double> ys;
    for (const auto& r : p.records) {
      ts.push_back(r.t);
      ys.push_back(r.ito_drift_term + 0.5 * r.ito_trace_term);
    }
    f0 = p.records.front().f_value;
    const double change = p.records.back().f_value - f0;
    const double integral = trapezoid(ts, ys);
    finals.push_back(change);
    rates.push_back(integral);
    diffs.push_back(change - integral);
  }
  BudgetReport rep;
  rep.paths = diffs.size();
  if (diffs.empty()) throw NumericalError("ito_budget_check: no completed paths");
  rep.signal = mean_se(finals).mean;
  rep.predicted = mean_se(rates).mean;
  const MeanSe d = mean_se(diffs);
  rep.discrepancy = d.mean;
  rep.standard_error = se_or_zero(d.se);
  rep.tolerance = 3.0 * rep.standard_error + tol.relative_band * std::abs(rep.signal) + tol.absolute_band;
  rep.underpowered = rep.standard_error > 0.0 && rep.paths < 1000;
  rep.pass = std::abs(rep.discrepancy) <= rep.tolerance;
  return rep;
}

namespace {
std::size_t snapshot_index(const std::vector<DiagnosticsRecord>& recs, double time) {
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (std::abs(recs[i].t - time) <= 1e-9 * std::max(1.0, std::abs(time))) return i;
  }
  throw PreconditionError("martingale_probe: time " + std::to_string(time) + " is not a snapshot time");
}
}  // namespace

MartingaleReport martingale_probe(std::span<const PathResult> paths, double s, double t, std::size_t probe,
                                  double abs_tol) {
  if (!(s < t)) throw PreconditionError("martingale_probe: requires s < t");
  std::vector<double> incr;
  std::vector<double> qv;
  std::vector<double> realized;
  std::vector<double> predicted;
  for (const PathResult& p : paths) {
    if (p.blew_up) continue;
    if (probe >= p.probes.size()) throw PreconditionError("martingale_probe: probe index out of range");
    const auto& samples = p.probes[probe];
    const std::size_t is = snapshot_index(p.records, s);
    const std::size_t it = snapshot_index(p.records, t);
    std::vector<double> ma(it + 1, 0.0);
    std::vector<double> mb(it + 1, 0.0);
    double int_a = 0.0;
    double int_b = 0.0;
    double int_qv = 0.0;
    for (std::size_t j = 1; j <= it; ++j) {
      const double h = p.records[j].t - p.records[j - 1].t;
      int_a += 0.5 * h * (samples[j].drift_a + samples[j - 1].drift_a);
      int_b += 0.5 * h * (samples[j].drift_b + samples[j - 1].drift_b);
      if (j > is) int_qv += 0.5 * h * (samples[j].qv_rate + samples[j - 1].qv_rate);
      ma[j] = samples[j].u_a - samples[0].u_a - int_a;
      mb[j] = samples[j].u_b - samples[0].u_b - int_b;
    }
    double rq = 0.0;
    for (std::size_t j = is + 1; j <= it; ++j) rq += (ma[j] - ma[j - 1]) * (mb[j] - mb[j - 1]);
    incr.push_back(ma[it] - ma[is]);
    qv.push_back(ma[it] * mb[it] - ma[is] * mb[is] - int_qv);
    realized.push_back(rq);
    predicted.push_back(int_qv);
  }
  if (incr.empty()) throw NumericalError("martingale_probe: no completed paths");
  MartingaleReport rep;
  rep.paths = incr.size();
  rep.s = s;
  rep.t = t;
  const MeanSe mi = mean_se(incr);
  const MeanSe mq = mean_se(qv);
  const MeanSe mr = mean_se(realized);
  rep.mean_increment = mi.mean;
  rep.increment_se = se_or_zero(mi.se);
  rep.qv_discrepancy = mq.mean;
  rep.qv_discrepancy_se = se_or_zero(mq.se);
  rep.realized_qv = mr.mean;
  rep.realized_qv_se = se_or_zero(mr.se);
  rep.predicted_qv = mean_se(predicted).mean;
  rep.increment_pass = std::abs(rep.mean_increment) <= 3.0 * rep.increment_se + abs_tol;
  rep.qv_pass = std::abs(rep.qv_discrepancy) <= 3.0 * rep.qv_discrepancy_se + abs_tol;
  return rep;
}

MomentEstimates moment_estimators(std::span<const PathResult> paths, double epsilon) {
  std::vector<double> a;
  std::vector<double> c;
  std::size_t blown = 0;
  for (const PathResult& p : paths) {
    if (p.blew_up) {
      ++blown;
      continue;
    }
    std::vector<double> ts;
    std::vector<double> h2;
    std::vector<double> h1w;
    for (const auto& r : p.records) {
      ts.push_back(r.t);
      h2.push_back(r.h2_sq);
      h1w.push_back(r.h1_window_sq);
    }
    a.push_back(epsilon * trapezoid(ts, h2));
    c.push_back(trapezoid(ts, h1w));
  }
  if (a.empty()) throw NumericalError("moment_estimators: every path blew up; estimators undefined");
  MomentEstimates m;
  m.paths = a.size();
  const MeanSe ma = mean_se(a);
  const MeanSe mc = mean_se(c);
  m.est_4a = ma.mean;
  m.est_4a_se = ma.se;
  m.est_4c = mc.mean;
  m.est_4c_se = mc.se;
  m.blowup_fraction = static_cast<double>(blown) / static_cast<double>(paths.size());
  return m;
}

namespace {
bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }
}  // namespace

bool bitwise_equal(const DiagnosticsRecord& a, const DiagnosticsRecord& b) {
  return same_bits(a.t, b.t) && same_bits(a.l2_sq, b.l2_sq) && same_bits(a.h1_sq, b.h1_sq) &&
         same_bits(a.h2_sq, b.h2_sq) && same_bits(a.h1_window_sq, b.h1_window_sq) &&
         same_bits(a.f_value, b.f_value) && same_bits(a.ito_drift_term, b.ito_drift_term) &&
         same_bits(a.ito_trace_term, b.ito_trace_term) &&
         same_bits(a.boundary_contamination, b.boundary_contamination) && a.blow_up == b.blow_up;
}

bool bitwise_equal(const PathResult& a, const PathResult& b) {
  if (a.path_index != b.path_index || a.blew_up != b.blew_up || a.blow_up_reason != b.blow_up_reason ||
      a.draw_hash != b.draw_hash || !same_bits(a.w1_utilization, b.w1_utilization) ||
      a.records.size() != b.records.size() || a.probes.size() != b.probes.size() ||
      a.final_field.has_value() != b.final_field.has_value()) {
    return false;
  }
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (!bitwise_equal(a.records[i], b.records[i])) return false;
  }
  for (std::size_t p = 0; p < a.probes.size(); ++p) {
    if (a.probes[p].size() != b.probes[p].size()) return false;
    for (std::size_t s = 0; s < a.probes[p].size(); ++s) {
      const ProbeSample& x = a.probes[p][s];
      const ProbeSample& y = b.probes[p][s];
      if (!same_bits(x.u_a, y.u_a) || !same_bits(x.u_b, y.u_b) || !same_bits(x.drift_a, y.drift_a) ||
          !same_bits(x.drift_b, y.drift_b) || !same_bits(x.qv_rate, y.qv_rate)) {
        return false;
      }
    }
  }
  if (a.final_field) {
    const auto x = a.final_field->values();
    const auto y = b.final_field->values();
    if (x.size() != y.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!same_bits(x[j], y[j])) return false;
    }
  }
  return true;
}

}  // namespace skdv
