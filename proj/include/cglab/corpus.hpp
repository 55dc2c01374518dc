#pragma once

#include <string>
#include <vector>

#include "cglab/radial_grid.hpp"

namespace cglab {

/// Radial initial data.
///   gaussian      A·exp(−r²/σ²)
///   ring          A·exp(−(r−r0)²/w²)
///   scaled_bump   A·λ^{N/2} q(λ(r − x0)),   q(y) = exp(−1/(1−y²)) on |y| < 1
///   annular_bump  A·λ^{1/2} r0^{−(N−1)/2} φ(λ(r − r0)),  φ(s) = q(2s − 3) on [1,2]
/// With x0 = 0 the scaled family is the exact L²-invariant dilation of a
/// centered bump.
struct CorpusSpec {
  enum class Kind { gaussian, ring, scaled_bump, annular_bump };
  Kind kind = Kind::gaussian;
  double amplitude = 1.0;
  double sigma = 1.0;
  double r0 = 0.0;  // ring center, bump offset x0, annulus radius
  double width = 1.0;
  double lambda = 1.0;
};

std::string to_string(CorpusSpec::Kind k);
CorpusSpec::Kind corpus_kind_from_string(const std::string& s);

/// Outermost radius where the profile is nonzero (∞ for the Gaussian kinds).
double support_end(const CorpusSpec& spec);

/// Smallest length scale the grid must resolve.
double feature_width(const CorpusSpec& spec);

/// Samples the profile. Throws std::invalid_argument when a bump's support
/// leaves the grid, when the bump is under-resolved (fewer than 20 nodes
/// across its width), or when a Gaussian tail exceeds tail_threshold at r_max.
Field generate(const RadialGrid& grid, const CorpusSpec& spec, double tail_threshold = 1e-10);

/// q(y) = exp(−1/(1−y²)), 0 for |y| ≥ 1.
double bump(double y);

}  // namespace cglab
