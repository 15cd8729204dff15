#include "bdm/maximum_principle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bdm/errors.hpp"
#include "bdm/tails.hpp"

namespace bdm {

MetzlerSystem MetzlerSystem::dense(std::size_t n, std::vector<double> entries) {
  if (n == 0 || entries.size() != n * n) {
    throw ParameterError("MetzlerSystem: expected n*n entries");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = entries[i * n + j];
      if (!std::isfinite(v) || (i != j && v < 0.0)) {
        std::ostringstream os;
        os << "MetzlerSystem: off-diagonal entry (" << i << ", " << j << ") = " << v
           << " is negative or not finite";
        throw ParameterError(os.str());
      }
    }
  }
  MetzlerSystem m;
  m.n_ = n;
  m.dense_ = std::move(entries);
  m.finish();
  return m;
}

MetzlerSystem MetzlerSystem::tridiagonal(std::vector<double> sub, std::vector<double> diag,
                                         std::vector<double> super) {
  const std::size_t n = diag.size();
  if (n == 0 || sub.size() + 1 != n || super.size() + 1 != n) {
    throw ParameterError("MetzlerSystem: inconsistent diagonal lengths");
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!(sub[k] >= 0.0) || !(super[k] >= 0.0)) {
      throw ParameterError("MetzlerSystem: negative off-diagonal entry in row " +
                           std::to_string(k));
    }
  }
  MetzlerSystem m;
  m.n_ = n;
  m.tridiagonal_ = true;
  m.sub_ = std::move(sub);
  m.diag_ = std::move(diag);
  m.super_ = std::move(super);
  m.finish();
  return m;
}

void MetzlerSystem::finish() {
  max_row_sum_ = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    if (tridiagonal_) {
      s = std::abs(diag_[i]);
      if (i > 0) s += sub_[i - 1];
      if (i + 1 < n_) s += super_[i];
    } else {
      for (std::size_t j = 0; j < n_; ++j) s += std::abs(dense_[i * n_ + j]);
    }
    max_row_sum_ = std::max(max_row_sum_, s);
  }
}

double MetzlerSystem::entry(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) {
    throw ParameterError("MetzlerSystem::entry: index out of range");
  }
  if (!tridiagonal_) return dense_[i * n_ + j];
  if (i == j) return diag_[i];
  if (j + 1 == i) return sub_[j];
  if (i + 1 == j) return super_[i];
  return 0.0;
}

void MetzlerSystem::apply(std::span<const double> x, std::span<double> y) const {
  if (tridiagonal_) {
    for (std::size_t i = 0; i < n_; ++i) {
      double v = diag_[i] * x[i];
      if (i > 0) v += sub_[i - 1] * x[i - 1];
      if (i + 1 < n_) v += super_[i] * x[i + 1];
      y[i] = v;
    }
    return;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < n_; ++j) v += dense_[i * n_ + j] * x[j];
    y[i] = v;
  }
}

std::vector<double> MetzlerSystem::to_dense() const {
  if (!tridiagonal_) return dense_;
  std::vector<double> out(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = (i == 0 ? 0 : i - 1); j < std::min(n_, i + 2); ++j) {
      out[i * n_ + j] = entry(i, j);
    }
  }
  return out;
}

MetzlerSystem build_tail_comparison_matrix(const CoefficientModel& model, double omega,
                                           std::size_t j_lo, std::size_t j_hi) {
  if (!(omega > 0.0)) {
    throw ParameterError("build_tail_comparison_matrix: omega must be positive");
  }
  if (j_lo < 2 || j_hi < j_lo) {
    throw ParameterError("build_tail_comparison_matrix: need 2 <= j_lo <= j_hi");
  }
  const std::size_t n = j_hi - j_lo + 1;
  std::vector<double> sub(n - 1), diag(n), super(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = j_lo + k;
    const double up = model.a(j - 1) * omega;
    const double down = model.b(j);
    diag[k] = -(up + down);
    if (k > 0) sub[k - 1] = up;
    if (k + 1 < n) super[k] = down;
  }
  return MetzlerSystem::tridiagonal(std::move(sub), std::move(diag), std::move(super));
}

LinearTrace integrate_linear(const MetzlerSystem& system, std::span<const double> u0,
                             std::span<const double> times, const Forcing& forcing,
                             IntegratorOptions options) {
  const std::size_t n = system.size();
  if (u0.size() != n) {
    throw ParameterError("integrate_linear: initial vector has wrong length");
  }
  if (times.empty()) {
    throw ParameterError("integrate_linear: no output times");
  }
  std::vector<double> s(n, 0.0);
  const DormandPrince54::System f = [&](double t, std::span<const double> y,
                                        std::span<double> dy) {
    system.apply(y, dy);
    if (forcing) {
      forcing(t, s);
      for (std::size_t i = 0; i < n; ++i) dy[i] += s[i];
    }
  };
  LinearTrace trace;
  const DormandPrince54::Observer observer = [&](std::size_t, double t,
                                                 std::span<const double> y) {
    trace.times.push_back(t);
    trace.states.emplace_back(y.begin(), y.end());
    trace.max_component.push_back(*std::max_element(y.begin(), y.end()));
  };
  std::vector<double> y(u0.begin(), u0.end());
  trace.stats = DormandPrince54(options).integrate(f, y, 0.0, times.back(), times, observer);
  return trace;
}

SignPreservation verify_sign_preservation(const MetzlerSystem& system,
                                          std::span<const double> u0, double t_end,
                                          const Forcing& slack, std::size_t n_out) {
  double norm = 0.0;
  for (double v : u0) {
    if (v > 0.0) {
      throw ParameterError("verify_sign_preservation: initial data must be non-positive");
    }
    norm = std::max(norm, std::abs(v));
  }
  SignPreservation out;
  out.tol_pos = 1e-9 * norm;
  const std::vector<double> grid = uniform_grid(t_end, n_out);
  IntegratorOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-15 * std::max(norm, 1e-300);
  out.trace = integrate_linear(system, u0, grid, slack, opt);
  out.worst = *std::max_element(out.trace.max_component.begin(), out.trace.max_component.end());
  out.preserved = out.worst <= out.tol_pos;
  return out;
}

DominationReport check_domination(const Trajectory& trajectory, std::span<const double> r,
                                  double t_start, double tol) {
  DominationReport rep;
  rep.epsilon_used = tol;
  rep.t_start = t_start;
  rep.max_gap = -std::numeric_limits<double>::infinity();
  for (const Snapshot& s : trajectory.snapshots) {
    if (s.t < t_start) continue;
    if (s.c.empty()) {
      throw ParameterError("check_domination: trajectory was recorded without states");
    }
    if (r.size() < s.c.size()) {
      throw ParameterError("check_domination: supersolution shorter than the state");
    }
    const std::vector<double> g = tail_density(s.c);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double gap = g[j] - r[j];
      rep.max_gap = std::max(rep.max_gap, gap);
      if (gap > tol && !rep.first_violation) {
        rep.first_violation = DominationViolation{s.t, j + 1, gap};
      }
    }
    ++rep.snapshots_checked;
  }
  if (rep.snapshots_checked == 0) rep.max_gap = 0.0;
  return rep;
}

}  // namespace bdm
