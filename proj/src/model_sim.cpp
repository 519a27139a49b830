#include "phdinf/model_sim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "phdinf/error.hpp"
#include "phdinf/population_influence.hpp"

namespace phdinf {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// (0, 1], never zero so the logarithm is finite.
double open_unit(Xoshiro256& rng) { return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53; }

void check_unit(const Vector& beta, Index p) {
  if (beta.size() != p) fail(ErrorKind::InvalidModel, "index vector has wrong dimension");
  if (std::abs(beta.norm() - 1.0) > 1e-10) fail(ErrorKind::InvalidModel, "index vector must have unit norm");
}

void validate(const SimSpec& spec) {
  if (spec.p < 1 || spec.n < 1) fail(ErrorKind::Usage, "n and p must be positive");
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if (!(m.sigma >= 0.0)) fail(ErrorKind::InvalidModel, "noise scale must be nonnegative");
        if constexpr (std::is_same_v<T, CosineIndex>) {
          check_unit(m.beta, spec.p);
        } else if constexpr (std::is_same_v<T, LinearIndex>) {
          if (m.beta.size() != spec.p) fail(ErrorKind::InvalidModel, "slope has wrong dimension");
        } else if constexpr (std::is_same_v<T, CustomIndex>) {
          if (m.b.rows() != spec.p || m.b.cols() < 1) fail(ErrorKind::InvalidModel, "index matrix must be p x K");
          for (Index c = 0; c < m.b.cols(); ++c) check_unit(m.b.col(c), spec.p);
          if (m.link != Link::sum_of_squares && m.b.cols() < 2) {
            fail(ErrorKind::InvalidModel, "this link needs at least two indices");
          }
        }
      },
      spec.model);
}

double mean_response(const SimModel& model, const Vector& x) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CosineIndex>) {
          return cosine_link(m.beta.dot(x));
        } else if constexpr (std::is_same_v<T, QuadraticFirst>) {
          return x[0] * x[0];
        } else if constexpr (std::is_same_v<T, LinearIndex>) {
          return m.beta.dot(x);
        } else {
          const Vector u = m.b.transpose() * x;
          switch (m.link) {
            case Link::product: return u[0] * u[1];
            case Link::sum_of_squares: return u.squaredNorm();
            case Link::ratio: return u[0] / (0.5 + (u[1] + 1.5) * (u[1] + 1.5));
          }
          return 0.0;
        }
      },
      model);
}

double noise_scale(const SimModel& model) {
  return std::visit([](const auto& m) { return m.sigma; }, model);
}

// Calls fn(x, y) for each of `count` draws of the model, in stream order.
template <typename Fn>
void for_each_draw(const SimSpec& spec, Index count, Fn&& fn) {
  NormalStream normal(spec.seed);
  const double sigma = noise_scale(spec.model);
  Vector x(spec.p);
  for (Index i = 0; i < count; ++i) {
    for (Index c = 0; c < spec.p; ++c) x[c] = normal();
    const double noise = normal();
    fn(x, mean_response(spec.model, x) + sigma * noise);
  }
}

struct RunningMoments {
  Index count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }
  double standard_error() const {
    return std::sqrt(m2 / static_cast<double>(count - 1)) / std::sqrt(static_cast<double>(count));
  }
};

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double NormalStream::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(open_unit(rng_)));
  const double angle = 2.0 * std::numbers::pi * open_unit(rng_);
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::string_view to_string(Link link) {
  switch (link) {
    case Link::product: return "product";
    case Link::sum_of_squares: return "sum_of_squares";
    case Link::ratio: return "ratio";
  }
  return "unknown";
}

Link parse_link(std::string_view text) {
  if (text == "product") return Link::product;
  if (text == "sum_of_squares") return Link::sum_of_squares;
  if (text == "ratio") return Link::ratio;
  fail(ErrorKind::Usage, "unknown link '" + std::string(text) + "'");
}

Dataset simulate(const SimSpec& spec) {
  validate(spec);
  Vector y(spec.n);
  Matrix x(spec.n, spec.p);
  Index row = 0;
  for_each_draw(spec, spec.n, [&](const Vector& xi, double yi) {
    x.row(row) = xi.transpose();
    y[row] = yi;
    ++row;
  });
  return Dataset(std::move(y), std::move(x));
}

McConstants mc_constants(const SimSpec& spec, Index n_mc) {
  validate(spec);
  const auto* cosine = std::get_if<CosineIndex>(&spec.model);
  if (cosine == nullptr) fail(ErrorKind::UnsupportedModel, "Monte Carlo constants need the cosine model");
  if (n_mc < 2) fail(ErrorKind::Usage, "n_mc must be at least 2");

  double sum_y = 0.0;
  double sum_z = 0.0;
  for_each_draw(spec, n_mc, [&](const Vector& x, double y) {
    sum_y += y;
    sum_z += cosine->beta.dot(x);
  });
  const double ybar = sum_y / static_cast<double>(n_mc);
  const double zbar = sum_z / static_cast<double>(n_mc);

  RunningMoments mean_terms, cov_terms, lambda_terms;
  for_each_draw(spec, n_mc, [&](const Vector& x, double y) {
    const double z = cosine->beta.dot(x);
    mean_terms.add(y);
    cov_terms.add((z - zbar) * (y - ybar));
    lambda_terms.add((y - ybar) * z * z);
  });

  McConstants out;
  out.n_mc = n_mc;
  out.mu_y = mean_terms.mean;
  out.mu_y_se = mean_terms.standard_error();
  out.cov_zy = cov_terms.mean;
  out.cov_zy_se = cov_terms.standard_error();
  out.lambda1 = lambda_terms.mean;
  out.lambda1_se = lambda_terms.standard_error();
  return out;
}

}  // namespace phdinf
