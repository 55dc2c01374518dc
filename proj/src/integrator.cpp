#include "cglab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cglab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_right_angle(double theta) {
  return std::abs(std::abs(theta) - 0.5 * std::numbers::pi) < 1e-12;
}

double max_abs(std::span<const cplx> u) {
  double m = 0.0;
  for (const cplx& z : u) m = std::max(m, std::norm(z));
  return std::sqrt(m);
}

// LU of I − cL for the grid's tridiagonal Laplacian, Thomas algorithm.
class ShiftedSolver {
 public:
  ShiftedSolver(const RadialGrid& g, cplx c) : c_(c), g_(&g) {
    const std::size_t n = g.size();
    upper_.resize(n);
    inv_.resize(n);
    cplx prev_upper{};
    for (std::size_t j = 0; j < n; ++j) {
      const cplx a = -c * g.lap_lower[j];
      const cplx b = 1.0 - c * g.lap_diag[j];
      const cplx denom = j == 0 ? b : b - a * prev_upper;
      const double d2 = std::norm(denom);
      if (!(d2 > 0.0)) throw std::logic_error("tridiagonal solve breakdown");
      inv_[j] = std::conj(denom) / d2;
      upper_[j] = -c * g.lap_upper[j] * inv_[j];
      prev_upper = upper_[j];
    }
  }

  cplx shift() const { return c_; }

  void solve(Field& x) const {
    const std::size_t n = x.size();
    const RadialGrid& g = *g_;
    x[0] *= inv_[0];
    for (std::size_t j = 1; j < n; ++j) x[j] = (x[j] + c_ * g.lap_lower[j] * x[j - 1]) * inv_[j];
    for (std::size_t j = n - 1; j-- > 0;) x[j] -= upper_[j] * x[j + 1];
  }

 private:
  cplx c_;
  const RadialGrid* g_;
  std::vector<cplx> upper_, inv_;
};

class Stepper {
 public:
  explicit Stepper(const SimParams& p) : p_(p), rot_(std::polar(1.0, p.theta)) {}

  void nonlinear_term(std::span<const cplx> u, Field& out) const {
    out.resize(u.size());
    if (!p_.nonlinear) {
      std::fill(out.begin(), out.end(), cplx{});
      return;
    }
    for (std::size_t j = 0; j < u.size(); ++j) out[j] = abs_pow(u[j], p_.alpha) * u[j];
  }

  // u + cLu + h e^{iθ} f(u*), with u* from (I − cL)u* = u + c f(u).
  void imex(std::span<const cplx> u, std::span<const cplx> fu, double h, Field& out) {
    const ShiftedSolver& s = solver(0.5 * h * rot_);
    const cplx c = s.shift();
    const std::size_t n = u.size();
    const RadialGrid& g = p_.grid;

    star_.resize(n);
    for (std::size_t j = 0; j < n; ++j) star_[j] = u[j] + c * fu[j];
    s.solve(star_);
    nonlinear_term(star_, fstar_);

    const cplx hr = h * rot_;
    out.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      cplx lu = g.lap_diag[j] * u[j];
      if (j > 0) lu += g.lap_lower[j] * u[j - 1];
      if (j + 1 < n) lu += g.lap_upper[j] * u[j + 1];
      out[j] = u[j] + c * lu + hr * fstar_[j];
    }
    s.solve(out);
  }

  // fu = f(u) is supplied; on return f_mid = f(u_mid).
  StepResult doubled(std::span<const cplx> u, std::span<const cplx> fu, double h, Field& f_mid) {
    StepResult r;
    imex(u, fu, h, full_);
    imex(u, fu, 0.5 * h, r.u_mid);
    nonlinear_term(r.u_mid, f_mid);
    imex(r.u_mid, f_mid, 0.5 * h, r.u_next);
    double err2 = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) err2 = std::max(err2, std::norm(full_[j] - r.u_next[j]));
    // NaN never wins std::max, so check the endpoint state separately.
    r.error = std::isfinite(err2) && first_non_finite(r.u_next) == r.u_next.size()
                  ? std::sqrt(err2)
                  : std::numeric_limits<double>::infinity();
    return r;
  }

 private:
  const ShiftedSolver& solver(cplx c) {
    for (const auto& s : cache_) {
      if (s.shift() == c) return s;
    }
    if (cache_.size() >= 4) cache_.pop_front();
    cache_.emplace_back(p_.grid, c);
    return cache_.back();
  }

  const SimParams& p_;
  cplx rot_;
  std::deque<ShiftedSolver> cache_;
  Field star_, fstar_, full_;
};

// ‖Lu + f‖² in the cell-volume norm, i.e. ‖u_t‖² since |e^{iθ}| = 1.
double ut_norm2(const RadialGrid& g, std::span<const cplx> u, std::span<const cplx> f) {
  const std::size_t n = u.size();
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cplx lu = g.lap_diag[j] * u[j];
    if (j > 0) lu += g.lap_lower[j] * u[j - 1];
    if (j + 1 < n) lu += g.lap_upper[j] * u[j + 1];
    s += g.cell_volumes[j] * std::norm(lu + f[j]);
  }
  return s;
}

Field rhs_with(std::span<const cplx> u, const SimParams& p, cplx rot) {
  Field out = laplacian(p.grid, u);
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (p.nonlinear) out[j] += abs_pow(u[j], p.alpha) * u[j];
    out[j] *= rot;
  }
  return out;
}

TrajectorySample observe_with(std::span<const cplx> u, const SimParams& p,
                              const SampledWeight& quadratic) {
  const FunctionalReport rep = report(p.grid, u, p.alpha, Pairing::finite_volume);
  const Field ut = rhs_with(u, p, std::polar(1.0, p.theta));
  TrajectorySample s;
  s.mass = rep.mass;
  s.energy = rep.energy;
  s.i_val = rep.i_val;
  s.linf = rep.linf;
  s.variance = rep.variance;
  s.grad = rep.grad;
  s.lp_alpha2 = rep.lp_alpha2;
  s.imqu = std::abs(fv_inner(p.grid, u, ut));
  s.tail_mag = std::abs(u.back());
  s.quad = weight_terms(u, ut, quadratic, p);
  if (p.weight) s.weighted = weight_terms(u, ut, *p.weight, p);
  s.var1_rhs = s.weighted ? s.weighted->var1_rhs : s.quad.var1_rhs;
  return s;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y, double* icpt) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double b = sxy / sxx;
  if (icpt) *icpt = my - b * mx;
  return b;
}

}  // namespace

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::global_until_horizon: return "global_until_horizon";
    case RunStatus::blowup: return "blowup";
    case RunStatus::truncation_violated: return "truncation_violated";
  }
  return "unknown";
}

RunStatus run_status_from_string(const std::string& s) {
  if (s == "global_until_horizon") return RunStatus::global_until_horizon;
  if (s == "blowup") return RunStatus::blowup;
  if (s == "truncation_violated") return RunStatus::truncation_violated;
  throw std::invalid_argument("unknown run status '" + s + "'");
}

void validate(const SimParams& p) {
  if (p.grid.size() == 0) throw std::invalid_argument("SimParams: grid not built");
  if (p.dim != p.grid.dim) throw std::invalid_argument("SimParams: dim differs from grid.dim");
  if (!(p.alpha > 0.0)) throw std::invalid_argument("SimParams: alpha must be positive");
  if (!std::isfinite(p.theta) || std::abs(p.theta) > 0.5 * std::numbers::pi + 1e-12) {
    throw std::invalid_argument("SimParams: theta must lie in [-pi/2, pi/2]");
  }
  if (is_right_angle(p.theta) && p.nonlinear && !p.nls_reference) {
    throw std::invalid_argument(
        "SimParams: theta = +-pi/2 needs the NLS reference mode (cos theta > 0 otherwise)");
  }
  if (!(p.dt0 > 0.0)) throw std::invalid_argument("SimParams: dt0 must be positive");
  if (!(p.dt_min > 0.0) || p.dt_min > p.dt0) {
    throw std::invalid_argument("SimParams: dt_min must be in (0, dt0]");
  }
  if (!(p.t_end > 0.0)) throw std::invalid_argument("SimParams: t_end must be positive");
  if (!(p.tol > 0.0)) throw std::invalid_argument("SimParams: tol must be positive");
  if (p.record_every < 1) throw std::invalid_argument("SimParams: record_every must be >= 1");
  if (p.weight) require_aligned(p.grid, p.weight->psi.size(), "SimParams.weight");
}

Field rhs(std::span<const cplx> u, const SimParams& p) {
  require_aligned(p.grid, u.size(), "rhs");
  return rhs_with(u, p, std::polar(1.0, p.theta));
}

StepResult step(std::span<const cplx> u, double dt, const SimParams& p) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  require_aligned(p.grid, u.size(), "step");
  Stepper s(p);
  Field fu, f_mid;
  s.nonlinear_term(u, fu);
  return s.doubled(u, fu, dt, f_mid);
}

WeightTerms weight_terms(std::span<const cplx> u, std::span<const cplx> ut, const SampledWeight& w,
                         const SimParams& p) {
  const RadialGrid& g = p.grid;
  require_aligned(g, u.size(), "weight_terms");
  require_aligned(g, ut.size(), "weight_terms");
  require_aligned(g, w.psi.size(), "weight_terms (weight)");
  const std::size_t n = u.size();
  const double nl = p.nonlinear ? 1.0 : 0.0;
  const double two_n = 2.0 * g.dim;
  const double h = g.dr;
  // Pointwise terms on cells, derivative terms on faces: Σ V Ψ ū Lu summed by
  // parts. Ghost u_{m+1} = 0, Ψ extrapolated linearly there.
  double a_grad = 0, a_lp = 0, a_lap = 0, b_im = 0;
  WeightTerms t;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = g.cell_volumes[j];
    const double m2 = std::norm(u[j]);
    const double lp = nl * abs_pow(u[j], p.alpha + 2.0);
    t.wmass += v * w.psi[j] * m2;
    a_lp += v * w.psi[j] * lp;
    t.defect_lp += v * (two_n - w.lap[j]) * lp;
    t.bilap_mass += v * w.bilap[j] * m2;
    t.psi_ut2 += v * w.psi[j] * std::norm(ut[j]);

    const bool ghost = j + 1 == n;
    const cplx u1 = ghost ? cplx{} : u[j + 1];
    const double q1 = ghost ? 2.0 * w.psi[j] - w.psi[j - 1] : w.psi[j + 1];
    const double s1 = ghost ? w.psi2[j] : w.psi2[j + 1];
    const double a = g.face_areas[j];
    const double du2 = std::norm(u1 - u[j]) / h;
    const double dq = (q1 - w.psi[j]) / h;
    a_grad += a * 0.5 * (w.psi[j] + q1) * du2;
    t.defect_grad += a * (2.0 - 0.5 * (w.psi2[j] + s1)) * du2;
    a_lap -= a * dq * (std::norm(u1) - m2);
    b_im += a * dq * (std::conj(u[j]) * u1).imag();
  }
  t.var1_rhs = std::cos(p.theta) * (-a_grad + a_lp + 0.5 * a_lap) + std::sin(p.theta) * b_im;
  t.j_val = -2.0 * a_grad + (p.alpha + 4.0) / (p.alpha + 2.0) * a_lp + a_lap;
  return t;
}

TrajectorySample observe(std::span<const cplx> u, const SimParams& p) {
  require_aligned(p.grid, u.size(), "observe");
  return observe_with(u, p, sample_quadratic(p.grid));
}

RateFit fit_blowup_rate(std::span<const double> t, std::span<const double> linf, double alpha) {
  RateFit out{kNaN, kNaN};
  if (t.size() != linf.size() || t.size() < 4 || !(alpha > 0.0)) return out;
  const double top = linf.back();
  if (!(top > 0.0)) return out;
  std::size_t first = t.size() - 1;
  while (first > 0 && linf[first - 1] >= 0.1 * top && linf[first - 1] <= linf[first]) --first;
  if (t.size() - first < 4) return out;

  std::vector<double> ts(t.begin() + first, t.end());
  std::vector<double> y;
  for (std::size_t i = first; i < linf.size(); ++i) y.push_back(std::pow(linf[i], -alpha));
  double a = 0.0;
  const double b = least_squares_slope(ts, y, &a);
  if (!(b < 0.0)) return out;
  const double T = -a / b;
  if (!std::isfinite(T)) return out;
  out.t_fit = T;

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (T - ts[i] > 0.0) {
      lx.push_back(std::log(T - ts[i]));
      ly.push_back(std::log(linf[first + i]));
    }
  }
  if (lx.size() >= 3) out.exponent = least_squares_slope(lx, ly, nullptr);
  return out;
}

SimResult simulate(std::span<const cplx> u0, const SimParams& p) {
  validate(p);
  require_aligned(p.grid, u0.size(), "simulate");
  if (auto bad = first_non_finite(u0); bad < u0.size()) throw NonFiniteFieldError("simulate", bad);

  const SampledWeight quadratic = sample_quadratic(p.grid);
  const double cos_t = std::cos(p.theta);
  Stepper stepper(p);

  SimResult res;
  BlowupEstimate& est = res.estimate;
  est.t_fit = kNaN;
  est.fit_exponent = kNaN;
  est.t_truncation = kNaN;

  Field u(u0.begin(), u0.end());
  const double u_max = p.u_max > 0.0 ? p.u_max : 1e6 * max_abs(u);

  double t = 0.0;
  double dt = p.dt0;
  double diss = 0.0, mass_int = 0.0;
  Field fu, f_mid;
  stepper.nonlinear_term(u, fu);
  double ut2_prev = ut_norm2(p.grid, u, fu);
  double mass_prev = fv_norm2(p.grid, u);
  double linf = max_abs(u);

  std::vector<double> hist_t{0.0}, hist_linf{linf};
  bool truncated = std::abs(u.back()) > p.tail_threshold;
  if (truncated) est.t_truncation = 0.0;

  auto record = [&](double h) {
    TrajectorySample s = observe_with(u, p, quadratic);
    s.t = t;
    s.dt = h;
    s.diss_cum = diss;
    s.mass_cum = mass_int;
    res.samples.push_back(std::move(s));
  };
  record(0.0);

  int streak = 0;
  double last_h = 0.0;
  bool recorded_last = true;
  const double t_eps = 1e-14 * std::max(1.0, p.t_end);

  while (t < p.t_end - t_eps) {
    const double h = std::min(dt, p.t_end - t);
    StepResult sr = stepper.doubled(u, fu, h, f_mid);
    const double scale = p.tol * (1.0 + linf);
    if (sr.error <= scale) {
      u = std::move(sr.u_next);
      t += h;
      last_h = h;
      ++est.accepted;

      // Simpson in time through the half-step state.
      stepper.nonlinear_term(u, fu);
      const double ut2_mid = ut_norm2(p.grid, sr.u_mid, f_mid);
      const double mass_mid = fv_norm2(p.grid, sr.u_mid);
      const double ut2 = ut_norm2(p.grid, u, fu);
      const double mass = fv_norm2(p.grid, u);
      diss += cos_t * h / 6.0 * (ut2_prev + 4.0 * ut2_mid + ut2);
      mass_int += h / 6.0 * (mass_prev + 4.0 * mass_mid + mass);
      ut2_prev = ut2;
      mass_prev = mass;
      linf = max_abs(u);
      hist_t.push_back(t);
      hist_linf.push_back(linf);

      if (!truncated && std::abs(u.back()) > p.tail_threshold) {
        truncated = true;
        est.t_truncation = t;
      }

      const bool over = linf > u_max;
      recorded_last = est.accepted % static_cast<std::size_t>(p.record_every) == 0;
      if (recorded_last || over) {
        record(h);
        recorded_last = true;
      }
      if (over) {
        est.blowup_detected = true;
        est.trigger = "u_max";
        break;
      }
      if (++streak >= 5 && h == dt) {
        dt *= 1.2;
        streak = 0;
      }
    } else {
      ++est.rejected;
      streak = 0;
      dt = 0.5 * h;
      if (dt < p.dt_min) {
        const std::size_t k = hist_linf.size();
        const double ref = hist_linf[k > 10 ? k - 11 : 0];
        if (k > 1 && hist_linf.back() > ref) {
          est.blowup_detected = true;
          est.trigger = "dt_floor";
          break;
        }
        throw std::runtime_error("simulate: step size fell below dt_min at t = " +
                                 std::to_string(t) + " without L-infinity growth");
      }
    }
  }
  if (!recorded_last) record(last_h);

  est.t_last = t;
  if (est.blowup_detected) {
    est.status = RunStatus::blowup;
    est.t_lo = t;
    est.t_hi = t + 20.0 * last_h;
    const RateFit fit = fit_blowup_rate(hist_t, hist_linf, p.alpha);
    est.t_fit = fit.t_fit;
    est.fit_exponent = fit.exponent;
  } else {
    est.t_lo = t;
    est.t_hi = t;
  }
  if (truncated) est.status = RunStatus::truncation_violated;
  res.final_state = std::move(u);
  return res;
}

SimResult simulate_nls_reference(std::span<const cplx> u0, SimParams p) {
  if (!is_right_angle(p.theta)) {
    throw std::invalid_argument("simulate_nls_reference: theta must be +-pi/2");
  }
  if (!(p.alpha < 4.0 / p.dim)) {
    throw std::invalid_argument("simulate_nls_reference: needs alpha < 4/N (global regime)");
  }
  p.nls_reference = true;
  return simulate(u0, p);
}

}  // namespace cglab
