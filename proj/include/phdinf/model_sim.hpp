#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <variant>

#include "phdinf/linalg.hpp"
#include "phdinf/moments.hpp"

namespace phdinf {

/// xoshiro256** 1.0, seeded through splitmix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t s_[4];
};

/// Standard normal draws by Box–Muller, consuming two uniforms per pair.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}
  double operator()();

 private:
  Xoshiro256 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Y = cos(2β₁ᵀX − π/4) + σε with ‖β₁‖ = 1.
struct CosineIndex {
  Vector beta;
  double sigma = 0.0;
};

/// Y = X₁² + σε.
struct QuadraticFirst {
  double sigma = 1.0;
};

/// Y = βᵀX + σε.
struct LinearIndex {
  Vector beta;
  double sigma = 1.0;
};

/// Closed link catalog over the indices u = BᵀX.
enum class Link {
  product,         // u₁·u₂
  sum_of_squares,  // Σ u_k²
  ratio,           // u₁ / (0.5 + (u₂ + 1.5)²)
};

std::string_view to_string(Link link);
Link parse_link(std::string_view text);

struct CustomIndex {
  Matrix b;
  Link link = Link::sum_of_squares;
  double sigma = 0.0;
};

using SimModel = std::variant<CosineIndex, QuadraticFirst, LinearIndex, CustomIndex>;

struct SimSpec {
  Index p = 3;
  Index n = 100;
  SimModel model;
  std::uint64_t seed = 0;
};

/// X rows i.i.d. N_p(0, I); each row draws p predictor normals then one noise
/// normal from a single stream.
Dataset simulate(const SimSpec& spec);

/// Monte Carlo estimates for the cosine model with plug-in standard errors
/// (sd of the per-draw terms over √n).
struct McConstants {
  Index n_mc = 0;
  double mu_y = 0.0;
  double mu_y_se = 0.0;
  double cov_zy = 0.0;
  double cov_zy_se = 0.0;
  double lambda1 = 0.0;
  double lambda1_se = 0.0;
};

McConstants mc_constants(const SimSpec& spec, Index n_mc);

}  // namespace phdinf
