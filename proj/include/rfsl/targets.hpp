#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfsl/batch.hpp"

namespace rfsl {

struct GaussianComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> var;  // axis-aligned covariance diagonal, entries >= 0
};

// Target distribution p_1: a mixture of axis-aligned Gaussians. Zero variances
// are allowed and model rank-deficient (low intrinsic dimension) targets.
class Target {
 public:
  // Throws DomainError when weights do not sum to 1 (1e-12), variances are
  // negative, dimensions disagree, or a single-component intrinsic_dim does not
  // match its count of nonzero variances.
  explicit Target(std::vector<GaussianComponent> components,
                  std::optional<std::size_t> intrinsic_dim = std::nullopt);

  static Target gaussian(std::vector<double> mean, std::vector<double> var);
  // N(mean_value * 1, diag(I_k, 0_{d-k})).
  static Target low_rank(std::size_t dim, std::size_t k, double mean_value = 8.0);
  static Target point_mass(std::vector<double> location);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t intrinsic_dim() const noexcept { return intrinsic_dim_; }
  // max_c ||mean_c|| when every component is degenerate, +inf otherwise.
  double support_radius() const noexcept { return support_radius_; }
  const std::vector<GaussianComponent>& components() const noexcept { return components_; }
  bool single_component() const noexcept { return components_.size() == 1; }

  std::vector<double> mean() const;
  std::vector<double> cov_diag() const;
  std::string describe() const;

 private:
  std::vector<GaussianComponent> components_;
  std::size_t dim_ = 0;
  std::size_t intrinsic_dim_ = 0;
  double support_radius_ = 0.0;
};

// Moments of X_1 given X_t = x under X_t = t X_1 + (1 - t) X_0, X_0 ~ N(0, I).
struct PosteriorMoments {
  std::vector<double> mean;
  std::vector<double> cov_diag;
};

PosteriorMoments posterior_moments(const Target& target, double t, std::span<const double> x);
// v_t(x) = (E[X_1 | X_t = x] - x) / (1 - t), defined for 0 <= t < 1.
std::vector<double> velocity(const Target& target, double t, std::span<const double> x);
// s_t(x) = grad log p_t(x), defined for 0 < t < 1.
std::vector<double> score(const Target& target, double t, std::span<const double> x);
// log p_t(x) of the interpolant marginal, for 0 <= t < 1.
double log_marginal_density(const Target& target, double t, std::span<const double> x);

struct PerturbationSpec {
  enum class Kind { None, AdditiveGaussianField, ScaleBias };
  Kind kind = Kind::None;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

PerturbationSpec::Kind perturbation_kind_from_string(std::string_view name);

namespace detail {
struct PhaseField;
}

class FieldOracle;

// A velocity/score evaluator frozen at one time t. Construction does the
// per-time work once; evaluation is safe to call concurrently.
class FieldSlice {
 public:
  double time() const noexcept { return t_; }
  std::size_t dim() const noexcept { return dim_; }

  void velocity(std::span<const double> x, std::span<double> out) const;
  // Requires 0 < t < 1.
  void score(std::span<const double> x, std::span<double> out) const;

  // True when velocity(x) = velocity_slope * x + velocity_intercept coordinatewise.
  bool affine() const noexcept { return affine_; }
  std::span<const double> velocity_slope() const noexcept { return v_slope_; }
  std::span<const double> velocity_intercept() const noexcept { return v_intercept_; }
  std::span<const double> score_slope() const noexcept { return s_slope_; }
  std::span<const double> score_intercept() const noexcept { return s_intercept_; }

 private:
  friend class FieldOracle;
  struct ComponentCoefficients {
    double log_weight_norm = 0.0;  // log w_c - 0.5 * sum_j log(2 pi D_cj)
    std::vector<double> centre;    // t * mean
    std::vector<double> inv_var;   // 1 / D_cj, D = t^2 v + (1 - t)^2
    std::vector<double> v_slope, v_intercept;
    std::vector<double> s_slope, s_intercept;
  };

  void exact_velocity(std::span<const double> x, std::span<double> out) const;
  void exact_score(std::span<const double> x, std::span<double> out) const;
  void responsibilities(std::span<const double> x, std::span<double> r) const;
  void apply_perturbations(std::span<const double> x, std::span<double> v) const;

  double t_ = 0.0;
  std::size_t dim_ = 0;
  bool exact_ = true;
  bool affine_ = false;
  std::vector<ComponentCoefficients> comps_;
  std::vector<PerturbationSpec> layers_;
  std::vector<std::shared_ptr<const detail::PhaseField>> fields_;
  std::vector<double> v_slope_, v_intercept_, s_slope_, s_intercept_;
};

// Exact (or deliberately perturbed) velocity and score of a Target.
class FieldOracle {
 public:
  explicit FieldOracle(Target target);

  const Target& target() const noexcept { return *target_; }
  std::size_t dim() const noexcept { return target_->dim(); }
  bool exact() const noexcept { return layers_.empty(); }
  const std::vector<PerturbationSpec>& perturbations() const noexcept { return layers_; }

  // Throws DomainError for t outside [0, 1).
  FieldSlice at(double t) const;

  void velocity(double t, std::span<const double> x, std::span<double> out) const;
  // Throws DomainError for t outside (0, 1).
  void score(double t, std::span<const double> x, std::span<double> out) const;

  std::string describe() const;

 private:
  friend FieldOracle perturb_field(const FieldOracle& oracle, const PerturbationSpec& spec);

  std::shared_ptr<const Target> target_;
  std::vector<PerturbationSpec> layers_;
  std::vector<std::shared_ptr<const detail::PhaseField>> fields_;
};

// None (or zero magnitude) returns the oracle unchanged. ScaleBias maps
// v -> (1 + m) v + m * 1. AdditiveGaussianField adds a smooth, seed-determined
// field whose Euclidean norm equals m at every point when d >= 2 (a constant
// +-m shift when d = 1).
FieldOracle perturb_field(const FieldOracle& oracle, const PerturbationSpec& spec);

// n iid draws of X_1; row i depends only on (seed, i).
SampleBatch sample_target(const Target& target, std::size_t n, std::uint64_t seed);

// Rows replaced by (1 - delta) x + delta z with fresh z ~ N(0, I); 0 <= delta <= 1.
SampleBatch blur_samples(const SampleBatch& batch, double delta, std::uint64_t seed);

// Key-value target description:
//   dim = 10
//   intrinsic_dim = 8        (optional)
//   [component]
//   weight = 1
//   mean = 8                 (scalar broadcast or comma list)
//   var = 1,1,1,1,1,1,1,1,0,0
Target parse_target_text(std::string_view text, const std::string& source = "<string>");
Target parse_target_file(const std::string& path);
std::string format_target(const Target& target);

}  // namespace rfsl
