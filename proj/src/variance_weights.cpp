#include "cglab/variance_weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

#include "cglab/functionals.hpp"

namespace cglab {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 10>;

// q(y) = exp(-1/(1-y²)) on (-1,1) and its first two derivatives.
struct BumpJet {
  double q = 0.0, dq = 0.0, d2q = 0.0;
};

BumpJet bump_jet(double y) {
  BumpJet b;
  const double d = 1.0 - y * y;
  if (d <= 0.0) return b;
  const double inv = 1.0 / d;
  if (inv > 700.0) return b;
  b.q = std::exp(-inv);
  b.dq = b.q * (-2.0 * y * inv * inv);
  b.d2q = b.q * (4.0 * y * y * inv * inv * inv * inv - 2.0 * inv * inv - 8.0 * y * y * inv * inv * inv);
  return b;
}

double hermite(double y0, double y1, double m0, double m1, double s, double delta) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * delta * m0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * delta * m1;
}

}  // namespace

double ZetaProfile::raw_bump(double s) const { return bump_jet(2.0 * s - 3.0).q; }

ZetaProfile ZetaProfile::standard_mollifier(int table_intervals) {
  if (table_intervals < 16) throw std::invalid_argument("ZetaProfile: table too coarse");
  ZetaProfile z;
  auto tab = std::make_shared<Table>();
  const int n = table_intervals;
  const double delta = 1.0 / n;
  tab->n = n;

  std::vector<double> mass(n), moment(n);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double a = 1.0 + k * delta, b = a + delta;
    mass[k] = Gauss::integrate([&](double s) { return z.raw_bump(s); }, a, b);
    moment[k] = Gauss::integrate([&](double s) { return (b - s) * z.raw_bump(s); }, a, b);
    total += mass[k];
  }
  z.norm_ = 1.0 / total;

  tab->H.assign(n + 1, 0.0);
  tab->IH.assign(n + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    tab->H[k + 1] = tab->H[k] + z.norm_ * mass[k];
    tab->IH[k + 1] = tab->IH[k] + tab->H[k] * delta + z.norm_ * moment[k];
  }
  tab->H[n] = 1.0;
  // ∫₁²H = 2 − ∫₁² s h, hence ζ(2) = 2 − ∫₁²H = M.
  z.plateau_ = 2.0 - tab->IH[n];
  z.table_ = std::move(tab);
  return z;
}

double ZetaProfile::h(double s) const { return norm_ * bump_jet(2.0 * s - 3.0).q; }
double ZetaProfile::dh(double s) const { return 2.0 * norm_ * bump_jet(2.0 * s - 3.0).dq; }
double ZetaProfile::d2h(double s) const { return 4.0 * norm_ * bump_jet(2.0 * s - 3.0).d2q; }

void ZetaProfile::locate(double t, int& k, double& s) const {
  const int n = table_->n;
  const double x = (t - 1.0) * n;
  k = std::clamp(static_cast<int>(std::floor(x)), 0, n - 1);
  s = x - k;
}

double ZetaProfile::h_integral(double t) const {
  if (t <= 1.0) return 0.0;
  if (t >= 2.0) return 1.0;
  int k;
  double s;
  locate(t, k, s);
  const double delta = 1.0 / table_->n;
  const double a = 1.0 + k * delta;
  const double v = hermite(table_->H[k], table_->H[k + 1], h(a), h(a + delta), s, delta);
  return std::clamp(v, 0.0, 1.0);
}

double ZetaProfile::integral_of_h_integral(double t) const {
  if (t <= 1.0) return 0.0;
  const int n = table_->n;
  if (t >= 2.0) return table_->IH[n] + (t - 2.0);
  int k;
  double s;
  locate(t, k, s);
  const double delta = 1.0 / n;
  return hermite(table_->IH[k], table_->IH[k + 1], table_->H[k], table_->H[k + 1], s, delta);
}

double ZetaProfile::zeta(double t) const {
  if (t <= 1.0) return t;
  if (t >= 2.0) return plateau_;
  return t - integral_of_h_integral(t);
}

double ZetaProfile::zeta1(double t) const {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  return 1.0 - h_integral(t);
}

double ZetaProfile::zeta2(double t) const { return -h(t); }
double ZetaProfile::zeta3(double t) const { return -dh(t); }
double ZetaProfile::zeta4(double t) const { return -d2h(t); }

double ZetaProfile::xi(double t) const {
  if (t <= 1.0) return 0.0;
  return std::sqrt(std::max(0.0, 2.0 * h_integral(t) + 4.0 * t * h(t)));
}

WeightFamily::WeightFamily(ZetaProfile zeta, double epsilon, int dim)
    : zeta_(std::move(zeta)), eps_(epsilon), dim_(dim) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("make_weight: epsilon must be positive");
  if (dim < 1) throw std::invalid_argument("make_weight: dim must be >= 1");
}

WeightFamily make_weight(const ZetaProfile& zeta, double epsilon, int dim) {
  return WeightFamily(zeta, epsilon, dim);
}

double WeightFamily::psi(double r) const {
  const double t = eps_ * eps_ * r * r;
  return zeta_.zeta(t) / (eps_ * eps_);
}

double WeightFamily::dpsi(double r) const { return 2.0 * r * zeta_.zeta1(eps_ * eps_ * r * r); }

double WeightFamily::psi2(double r) const {
  const double t = eps_ * eps_ * r * r;
  return 2.0 * zeta_.zeta1(t) + 4.0 * t * zeta_.zeta2(t);
}

double WeightFamily::lap_psi(double r) const {
  const double t = eps_ * eps_ * r * r;
  return 2.0 * dim_ * zeta_.zeta1(t) + 4.0 * t * zeta_.zeta2(t);
}

double WeightFamily::bilap_psi(double r) const {
  const double t = eps_ * eps_ * r * r;
  if (t <= 1.0 || t >= 2.0) return 0.0;
  const double n = dim_;
  return eps_ * eps_ *
         (4.0 * n * (n + 2.0) * zeta_.zeta2(t) + 16.0 * (n + 2.0) * t * zeta_.zeta3(t) +
          16.0 * t * t * zeta_.zeta4(t));
}

double WeightFamily::gamma_eps(double r) const { return zeta_.xi(eps_ * eps_ * r * r); }

double WeightFamily::bilap_phi_sup() const {
  const WeightFamily phi(zeta_, 1.0, dim_);
  auto f = [&](double t) { return std::abs(phi.bilap_psi(std::sqrt(t))); };
  const int n = 20000;
  double best = 0.0, best_t = 1.0;
  for (int i = 0; i <= n; ++i) {
    const double t = 1.0 + static_cast<double>(i) / n;
    if (const double v = f(t); v > best) {
      best = v;
      best_t = t;
    }
  }
  // Golden-section polish around the best sample.
  double lo = std::max(1.0, best_t - 1.0 / n), hi = std::min(2.0, best_t + 1.0 / n);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::max({best, f1, f2});
}

std::vector<WeightSample> tabulate_weight(const WeightFamily& w, std::span<const double> radii) {
  const double n = w.dim();
  const double e2 = w.epsilon() * w.epsilon();
  std::vector<WeightSample> out;
  out.reserve(radii.size());
  for (double r : radii) {
    WeightSample s;
    s.r = r;
    s.psi = w.psi(r);
    s.psi2 = w.psi2(r);
    s.lap_psi = w.lap_psi(r);
    s.bilap_psi = w.bilap_psi(r);
    s.gamma_eps = w.gamma_eps(r);
    const double g2 = s.gamma_eps * s.gamma_eps;
    const double t = e2 * r * r;
    s.hessian_residual = (2.0 - s.psi2) - g2;
    s.laplacian_residual = (2.0 * n - s.lap_psi) - (n * g2 + 4.0 * (n - 1.0) * t * w.zeta().zeta2(t));
    out.push_back(s);
  }
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw std::invalid_argument("log_spaced: need 0 < lo < hi and n >= 2");
  }
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

SampledWeight sample_quadratic(const RadialGrid& grid) {
  SampledWeight w;
  w.kind = "quadratic";
  const std::size_t n = grid.size();
  w.psi.resize(n);
  w.dpsi.resize(n);
  w.psi2.assign(n, 2.0);
  w.lap.assign(n, 2.0 * grid.dim);
  w.bilap.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = grid.nodes[j];
    w.psi[j] = r * r;
    w.dpsi[j] = 2.0 * r;
  }
  return w;
}

SampledWeight sample_weight(const RadialGrid& grid, const WeightFamily& wf) {
  if (wf.dim() != grid.dim) throw std::invalid_argument("sample_weight: dimension mismatch");
  SampledWeight w;
  w.kind = "truncated";
  w.epsilon = wf.epsilon();
  const std::size_t n = grid.size();
  w.psi.resize(n);
  w.dpsi.resize(n);
  w.psi2.resize(n);
  w.lap.resize(n);
  w.bilap.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = grid.nodes[j];
    w.psi[j] = wf.psi(r);
    w.dpsi[j] = wf.dpsi(r);
    w.psi2[j] = wf.psi2(r);
    w.lap[j] = wf.lap_psi(r);
    w.bilap[j] = wf.bilap_psi(r);
  }
  return w;
}

IEpsTerms i_eps_terms(const RadialGrid& grid, std::span<const cplx> u, const SampledWeight& w,
                      double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("i_eps: alpha must be positive");
  require_aligned(grid, u.size(), "i_eps");
  require_aligned(grid, w.psi.size(), "i_eps (weight probes)");
  const Field ur = ddr(grid, u);
  const double two_n = 2.0 * grid.dim;
  IEpsTerms t;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double q = grid.quad_weights[j];
    t.defect_grad += q * (2.0 - w.psi2[j]) * std::norm(ur[j]);
    t.defect_lp += q * (two_n - w.lap[j]) * abs_pow(u[j], alpha + 2.0);
    t.bilap_mass += q * w.bilap[j] * std::norm(u[j]);
  }
  t.value = -2.0 * t.defect_grad + alpha / (alpha + 2.0) * t.defect_lp - 0.5 * t.bilap_mass;
  return t;
}

double i_eps(const RadialGrid& grid, std::span<const cplx> u, const WeightFamily& w, double alpha) {
  return i_eps_terms(grid, u, sample_weight(grid, w), alpha).value;
}

double i_eps_upper_bound(const RadialGrid& grid, std::span<const cplx> u, const WeightFamily& w,
                         double alpha) {
  require_aligned(grid, u.size(), "i_eps_upper_bound");
  const Field ur = ddr(grid, u);
  double g_grad = 0.0, g_lp = 0.0, mass = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double q = grid.quad_weights[j];
    const double g = w.gamma_eps(grid.nodes[j]);
    g_grad += q * g * g * std::norm(ur[j]);
    g_lp += q * g * g * abs_pow(u[j], alpha + 2.0);
    mass += q * std::norm(u[j]);
  }
  const double n = grid.dim;
  const double eps = w.epsilon();
  return -2.0 * g_grad + n * alpha / (alpha + 2.0) * g_lp +
         0.5 * eps * eps * w.bilap_phi_sup() * mass;
}

EpsilonCertificate find_epsilon(double a, double A, const RadialGrid& grid,
                                std::span<const Field> corpus, const ZetaProfile& zeta,
                                double alpha, int max_halvings) {
  if (!(a > 0.0) || !(A > 0.0)) throw std::invalid_argument("find_epsilon: a and A must be positive");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const double mass = report(grid, corpus[i], alpha).mass;
    if (mass > A * A * (1.0 + 1e-12)) {
      throw std::invalid_argument("find_epsilon: corpus field " + std::to_string(i) +
                                  " has mass above A^2");
    }
  }
  EpsilonCertificate cert;
  double best_eps = 0.0, best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= max_halvings; ++k) {
    const double eps = std::ldexp(1.0, -k);
    const SampledWeight w = sample_weight(grid, make_weight(zeta, eps, grid.dim));
    double worst = corpus.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
    for (const Field& u : corpus) worst = std::max(worst, i_eps_terms(grid, u, w, alpha).value);
    cert.tried_epsilon.push_back(eps);
    cert.tried_max_i_eps.push_back(worst);
    if (worst < best_val) {
      best_val = worst;
      best_eps = eps;
    }
    if (worst <= a) {
      cert.epsilon = eps;
      cert.max_i_eps = worst;
      return cert;
    }
  }
  throw EpsilonSearchError(best_eps, best_val);
}

}  // namespace cglab
