#include "cglab/corpus.hpp"

#include <cmath>
#include <stdexcept>

#include "cglab/bounds.hpp"

namespace cglab {

std::string to_string(CorpusSpec::Kind k) {
  switch (k) {
    case CorpusSpec::Kind::gaussian: return "gaussian";
    case CorpusSpec::Kind::ring: return "ring";
    case CorpusSpec::Kind::scaled_bump: return "scaled_bump";
    case CorpusSpec::Kind::annular_bump: return "annular_bump";
  }
  return "?";
}

CorpusSpec::Kind corpus_kind_from_string(const std::string& s) {
  if (s == "gaussian") return CorpusSpec::Kind::gaussian;
  if (s == "ring") return CorpusSpec::Kind::ring;
  if (s == "scaled_bump") return CorpusSpec::Kind::scaled_bump;
  if (s == "annular_bump") return CorpusSpec::Kind::annular_bump;
  throw std::invalid_argument("unknown initial data kind '" + s + "'");
}

double bump(double y) {
  const double d = 1.0 - y * y;
  if (d <= 0.0) return 0.0;
  const double e = 1.0 / d;
  return e > 700.0 ? 0.0 : std::exp(-e);
}

double support_end(const CorpusSpec& s) {
  switch (s.kind) {
    case CorpusSpec::Kind::gaussian:
    case CorpusSpec::Kind::ring: return kInfinity;
    case CorpusSpec::Kind::scaled_bump: return s.r0 + 1.0 / s.lambda;
    case CorpusSpec::Kind::annular_bump: return s.r0 + 2.0 / s.lambda;
  }
  return kInfinity;
}

double feature_width(const CorpusSpec& s) {
  switch (s.kind) {
    case CorpusSpec::Kind::gaussian: return s.sigma;
    case CorpusSpec::Kind::ring: return s.width;
    case CorpusSpec::Kind::scaled_bump: return (s.r0 > 0.0 ? 2.0 : 1.0) / s.lambda;
    case CorpusSpec::Kind::annular_bump: return 1.0 / s.lambda;
  }
  return 0.0;
}

namespace {

void check_spec(const CorpusSpec& s) {
  auto bad = [&](const std::string& what) {
    throw std::invalid_argument(to_string(s.kind) + ": " + what);
  };
  if (!std::isfinite(s.amplitude)) bad("amplitude must be finite");
  switch (s.kind) {
    case CorpusSpec::Kind::gaussian:
      if (!(s.sigma > 0.0)) bad("sigma must be positive");
      break;
    case CorpusSpec::Kind::ring:
      if (!(s.width > 0.0)) bad("width must be positive");
      if (!(s.r0 >= 0.0)) bad("r0 must be nonnegative");
      break;
    case CorpusSpec::Kind::scaled_bump:
      if (!(s.lambda > 0.0)) bad("lambda must be positive");
      if (!(s.r0 >= 0.0)) bad("offset must be nonnegative");
      break;
    case CorpusSpec::Kind::annular_bump:
      if (!(s.lambda > 0.0)) bad("lambda must be positive");
      if (!(s.r0 > 0.0)) bad("r0 must be positive");
      break;
  }
}

}  // namespace

Field generate(const RadialGrid& grid, const CorpusSpec& s, double tail_threshold) {
  check_spec(s);
  const double end = support_end(s);
  if (std::isfinite(end)) {
    if (end > grid.r_max) {
      throw std::invalid_argument(to_string(s.kind) + ": support reaches r = " +
                                  std::to_string(end) + " beyond r_max = " +
                                  std::to_string(grid.r_max));
    }
    if (feature_width(s) < 20.0 * grid.dr) {
      throw std::invalid_argument(to_string(s.kind) + ": bump width " +
                                  std::to_string(feature_width(s)) +
                                  " is under-resolved by dr = " + std::to_string(grid.dr));
    }
  }

  const int n = grid.dim;
  Field u(grid.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double r = grid.nodes[j];
    double v = 0.0;
    switch (s.kind) {
      case CorpusSpec::Kind::gaussian:
        v = std::exp(-(r * r) / (s.sigma * s.sigma));
        break;
      case CorpusSpec::Kind::ring: {
        const double z = (r - s.r0) / s.width;
        v = std::exp(-z * z);
        break;
      }
      case CorpusSpec::Kind::scaled_bump:
        v = std::pow(s.lambda, 0.5 * n) * bump(s.lambda * (r - s.r0));
        break;
      case CorpusSpec::Kind::annular_bump:
        v = std::sqrt(s.lambda) * std::pow(s.r0, -0.5 * (n - 1)) *
            bump(2.0 * s.lambda * (r - s.r0) - 3.0);
        break;
    }
    u[j] = s.amplitude * v;
  }

  if (!std::isfinite(end)) {
    const double tail = std::abs(u.back());
    if (tail > tail_threshold) {
      throw std::invalid_argument(to_string(s.kind) + ": |u0(r_max)| = " + std::to_string(tail) +
                                  " exceeds the tail threshold " +
                                  std::to_string(tail_threshold) + "; enlarge r_max");
    }
  }
  return u;
}

}  // namespace cglab
