#include "bdm/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bdm/errors.hpp"

namespace bdm {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer, Norsett & Wanner, DOPRI5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;

struct Stages {
  explicit Stages(std::size_t n)
      : k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n) {}
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp, y_new;
};

// Computes k2..k7 and y_new from k1.
void dp_step(const DormandPrince54::System& f, double t, double h, std::span<const double> y,
             Stages& s) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) s.tmp[i] = y[i] + h * a21 * s.k1[i];
  f(t + c2 * h, s.tmp, s.k2);
  for (std::size_t i = 0; i < n; ++i) s.tmp[i] = y[i] + h * (a31 * s.k1[i] + a32 * s.k2[i]);
  f(t + c3 * h, s.tmp, s.k3);
  for (std::size_t i = 0; i < n; ++i)
    s.tmp[i] = y[i] + h * (a41 * s.k1[i] + a42 * s.k2[i] + a43 * s.k3[i]);
  f(t + c4 * h, s.tmp, s.k4);
  for (std::size_t i = 0; i < n; ++i)
    s.tmp[i] = y[i] + h * (a51 * s.k1[i] + a52 * s.k2[i] + a53 * s.k3[i] + a54 * s.k4[i]);
  f(t + c5 * h, s.tmp, s.k5);
  for (std::size_t i = 0; i < n; ++i)
    s.tmp[i] = y[i] + h * (a61 * s.k1[i] + a62 * s.k2[i] + a63 * s.k3[i] + a64 * s.k4[i] +
                           a65 * s.k5[i]);
  f(t + h, s.tmp, s.k6);
  for (std::size_t i = 0; i < n; ++i)
    s.y_new[i] = y[i] + h * (a71 * s.k1[i] + a73 * s.k3[i] + a74 * s.k4[i] + a75 * s.k5[i] +
                             a76 * s.k6[i]);
  f(t + h, s.y_new, s.k7);
}

double error_norm(double h, std::span<const double> y, const Stages& s, double rtol,
                  double atol) {
  const std::size_t n = y.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = h * (e1 * s.k1[i] + e3 * s.k3[i] + e4 * s.k4[i] + e5 * s.k5[i] +
                          e6 * s.k6[i] + e7 * s.k7[i]);
    const double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(s.y_new[i]));
    const double r = e / sk;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double initial_step(const DormandPrince54::System& f, double t, std::span<const double> y,
                    std::span<const double> f0, double rtol, double atol, double hmax,
                    std::size_t& evals) {
  const std::size_t n = y.size();
  double dnf = 0.0;
  double dny = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::abs(y[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  dnf /= static_cast<double>(n);
  dny /= static_cast<double>(n);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, hmax);
  std::vector<double> y1(n);
  std::vector<double> f1(n);
  for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + h * f0[i];
  f(t + h, y1, f1);
  ++evals;
  double der2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::abs(y[i]);
    const double d = (f1[i] - f0[i]) / sk;
    der2 += d * d;
  }
  der2 = std::sqrt(der2 / static_cast<double>(n)) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, hmax});
}

}  // namespace

IntegrationStats DormandPrince54::integrate(const System& system, std::span<double> y, double t0,
                                            double t1, std::span<const double> output_times,
                                            const Observer& observer, const Filter& filter,
                                            const Projection& project) const {
  const std::size_t n = y.size();
  IntegrationStats stats;
  if (t1 < t0) {
    throw ParameterError("integrate: t1 < t0");
  }
  if (!std::is_sorted(output_times.begin(), output_times.end()) ||
      (!output_times.empty() && (output_times.front() < t0 || output_times.back() > t1))) {
    throw ParameterError("integrate: output times must be sorted and inside [t0, t1]");
  }
  const double rtol = options_.rel_tol;
  const double atol = options_.abs_tol;
  const double hmax = options_.max_step > 0.0 ? options_.max_step : std::max(t1 - t0, 1e-300);

  std::vector<double> out(n);
  std::size_t next_out = 0;
  auto emit = [&](double t, std::span<const double> state) {
    std::copy(state.begin(), state.end(), out.begin());
    if (project) project(out);
    observer(next_out, t, out);
    ++next_out;
  };
  while (next_out < output_times.size() && output_times[next_out] <= t0) {
    emit(output_times[next_out], y);
  }
  if (t1 == t0) {
    return stats;
  }

  Stages s(n);
  std::vector<double> ydiff(n), bspl(n), rc4(n), rc5(n);
  system(t0, y, s.k1);
  ++stats.rhs_evaluations;

  double t = t0;
  double h = options_.initial_step > 0.0
                 ? options_.initial_step
                 : initial_step(system, t0, y, s.k1, rtol, atol, hmax, stats.rhs_evaluations);
  double fac_old = 1e-4;
  bool rejected_last = false;
  bool last = false;

  while (!last) {
    if (stats.accepted + stats.rejected + stats.filtered >= options_.max_steps) {
      throw NumericalError("integrate: maximum number of steps reached at t = " +
                           std::to_string(t));
    }
    const double h_floor = std::max(10.0 * std::numeric_limits<double>::epsilon() * std::abs(t),
                                    std::numeric_limits<double>::min());
    if (h < h_floor) {
      std::ostringstream os;
      os << "step size underflow at t = " << t << " (h = " << h
         << "); the truncation may be too short or the problem too stiff for an explicit "
            "method, consider a larger N or an implicit integrator";
      throw NumericalError(os.str());
    }
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    dp_step(system, t, h, y, s);
    stats.rhs_evaluations += 6;
    const double err = error_norm(h, y, s, rtol, atol);
    const double fac11 = std::pow(err, kExpo);
    if (!(err <= 1.0)) {
      const double shrink = std::isfinite(fac11) ? std::min(1.0 / kFacMin, fac11 / kSafety)
                                                 : 1.0 / kFacMin;
      h /= shrink;
      ++stats.rejected;
      rejected_last = true;
      last = false;
      continue;
    }
    bool recompute = false;
    if (filter) {
      const StepAction action = filter(s.y_new);
      if (action == StepAction::kReject) {
        h *= 0.5;
        ++stats.filtered;
        rejected_last = true;
        last = false;
        continue;
      }
      recompute = action == StepAction::kAcceptModified;
    }

    double fac = fac11 / std::pow(fac_old, kBeta);
    fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafety));
    double h_new = std::min(h / fac, hmax);
    if (rejected_last) {
      h_new = std::min(h_new, h);
    }
    fac_old = std::max(err, 1e-4);

    // Dense output coefficients on [t, t + h].
    for (std::size_t i = 0; i < n; ++i) {
      ydiff[i] = s.y_new[i] - y[i];
      bspl[i] = h * s.k1[i] - ydiff[i];
      rc4[i] = ydiff[i] - h * s.k7[i] - bspl[i];
      rc5[i] = h * (d1 * s.k1[i] + d3 * s.k3[i] + d4 * s.k4[i] + d5 * s.k5[i] + d6 * s.k6[i] +
                    d7 * s.k7[i]);
    }
    const double t_new = last ? t1 : t + h;
    while (next_out < output_times.size() && output_times[next_out] <= t_new) {
      const double theta = (output_times[next_out] - t) / h;
      const double theta1 = 1.0 - theta;
      for (std::size_t i = 0; i < n; ++i) {
        s.tmp[i] = y[i] + theta * (ydiff[i] +
                                   theta1 * (bspl[i] + theta * (rc4[i] + theta1 * rc5[i])));
      }
      emit(output_times[next_out], s.tmp);
    }

    std::copy(s.y_new.begin(), s.y_new.end(), y.begin());
    if (recompute) {
      system(t_new, y, s.k1);
      ++stats.rhs_evaluations;
    } else {
      std::swap(s.k1, s.k7);
    }
    stats.last_step = h;
    ++stats.accepted;
    t = t_new;
    h = h_new;
    rejected_last = false;
  }
  return stats;
}

void DormandPrince54::integrate_fixed(const System& system, std::span<double> y, double t0,
                                      double t1, std::size_t steps) {
  if (steps == 0) {
    throw ParameterError("integrate_fixed: steps must be positive");
  }
  Stages s(y.size());
  const double h = (t1 - t0) / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    system(t, y, s.k1);
    dp_step(system, t, h, y, s);
    std::copy(s.y_new.begin(), s.y_new.end(), y.begin());
  }
}

}  // namespace bdm
