#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rfsl/error.hpp"
#include "rfsl/kernels.hpp"
#include "rfsl/rng.hpp"
#include "rfsl/targets.hpp"

namespace rfsl {

namespace detail {

// Constant-norm field m * (cos theta e1 + sin theta e2), with the phase
// theta(x, t) a random-Fourier-feature draw of a smooth Gaussian process.
struct PhaseField {
  static constexpr std::size_t kFeatures = 16;
  static constexpr double kInvLengthScale = 0.5;

  std::size_t dim = 0;
  double magnitude = 0.0;
  std::vector<double> freq;  // kFeatures x dim
  std::vector<double> time_freq, offset, coeff;
  std::vector<double> e1, e2;

  PhaseField(std::size_t d, double m, std::uint64_t seed) : dim(d), magnitude(m) {
    rng::Stream s(seed, rng::Domain::PerturbationField, d);
    freq.resize(kFeatures * d);
    for (double& w : freq) w = kInvLengthScale * s.normal();
    for (std::size_t k = 0; k < kFeatures; ++k) {
      time_freq.push_back(2.0 * s.normal());
      offset.push_back(2.0 * std::numbers::pi * s.uniform());
      coeff.push_back(2.0 * std::sqrt(2.0 / kFeatures) * s.normal());
    }
    e1.resize(d);
    s.fill_normal(e1);
    normalize(e1);
    if (d >= 2) {
      e2.resize(d);
      s.fill_normal(e2);
      // Gram-Schmidt against e1.
      double proj = 0.0;
      for (std::size_t j = 0; j < d; ++j) proj += e1[j] * e2[j];
      for (std::size_t j = 0; j < d; ++j) e2[j] -= proj * e1[j];
      normalize(e2);
    }
  }

  static void normalize(std::vector<double>& v) {
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
  }

  void add(std::span<const double> x, double t, std::span<double> v) const {
    const auto& k = kernels::active();
    if (dim == 1) {
      v[0] += magnitude * e1[0];
      return;
    }
    double theta = 0.0;
    for (std::size_t f = 0; f < kFeatures; ++f) {
      const double arg = k.dot(freq.data() + f * dim, x.data(), dim) + time_freq[f] * t + offset[f];
      theta += coeff[f] * std::cos(arg);
    }
    k.axpy(magnitude * std::cos(theta), e1.data(), v.data(), dim);
    k.axpy(magnitude * std::sin(theta), e2.data(), v.data(), dim);
  }
};

}  // namespace detail

PerturbationSpec::Kind perturbation_kind_from_string(std::string_view name) {
  if (name == "none") return PerturbationSpec::Kind::None;
  if (name == "additive" || name == "additive-gaussian-field") return PerturbationSpec::Kind::AdditiveGaussianField;
  if (name == "scale-bias") return PerturbationSpec::Kind::ScaleBias;
  throw DomainError("unknown perturbation kind '" + std::string(name) + "'");
}

FieldOracle::FieldOracle(Target target) : target_(std::make_shared<const Target>(std::move(target))) {}

FieldSlice FieldOracle::at(double t) const {
  if (!(t >= 0.0 && t < 1.0)) throw DomainError("field evaluated outside [0, 1): t = " + std::to_string(t));
  const Target& target = *target_;
  const std::size_t d = target.dim();
  const double u = 1.0 - t;
  const double s = u * u;

  FieldSlice slice;
  slice.t_ = t;
  slice.dim_ = d;
  slice.exact_ = layers_.empty();
  slice.layers_ = layers_;
  slice.fields_ = fields_;

  for (const auto& comp : target.components()) {
    FieldSlice::ComponentCoefficients cc;
    cc.log_weight_norm = std::log(comp.weight);
    cc.centre.resize(d);
    cc.inv_var.resize(d);
    cc.v_slope.resize(d);
    cc.v_intercept.resize(d);
    cc.s_slope.resize(d);
    cc.s_intercept.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double v = comp.var[j];
      const double denom = t * t * v + s;
      cc.log_weight_norm -= 0.5 * std::log(2.0 * std::numbers::pi * denom);
      cc.centre[j] = t * comp.mean[j];
      cc.inv_var[j] = 1.0 / denom;
      // (E[X_1 | x] - x) / (1 - t) with the (1 - t) factor cancelled analytically.
      cc.v_slope[j] = (t * v - u) / denom;
      cc.v_intercept[j] = u * comp.mean[j] / denom;
      cc.s_slope[j] = -1.0 / denom;
      cc.s_intercept[j] = t * comp.mean[j] / denom;
    }
    slice.comps_.push_back(std::move(cc));
  }

  const bool layers_affine = std::all_of(layers_.begin(), layers_.end(), [](const PerturbationSpec& p) {
    return p.kind == PerturbationSpec::Kind::ScaleBias;
  });
  slice.affine_ = target.single_component() && layers_affine;
  if (slice.affine_) {
    const auto& cc = slice.comps_.front();
    slice.v_slope_ = cc.v_slope;
    slice.v_intercept_ = cc.v_intercept;
    for (const auto& p : layers_) {
      const double m = p.magnitude;
      for (std::size_t j = 0; j < d; ++j) {
        slice.v_slope_[j] *= (1.0 + m);
        slice.v_intercept_[j] = (1.0 + m) * slice.v_intercept_[j] + m;
      }
    }
    if (slice.exact_) {
      slice.s_slope_ = cc.s_slope;
      slice.s_intercept_ = cc.s_intercept;
    } else if (t > 0.0) {
      slice.s_slope_.resize(d);
      slice.s_intercept_.resize(d);
      for (std::size_t j = 0; j < d; ++j) {
        slice.s_slope_[j] = (t * slice.v_slope_[j] - 1.0) / u;
        slice.s_intercept_[j] = t * slice.v_intercept_[j] / u;
      }
    }
  }
  return slice;
}

void FieldOracle::velocity(double t, std::span<const double> x, std::span<double> out) const {
  at(t).velocity(x, out);
}

void FieldOracle::score(double t, std::span<const double> x, std::span<double> out) const {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("score needs 0 < t < 1, got " + std::to_string(t));
  at(t).score(x, out);
}

std::string FieldOracle::describe() const {
  std::ostringstream os;
  os << (exact() ? "exact" : "perturbed") << ":" << target_->describe();
  return os.str();
}

FieldOracle perturb_field(const FieldOracle& oracle, const PerturbationSpec& spec) {
  if (!(spec.magnitude >= 0.0) || !std::isfinite(spec.magnitude))
    throw DomainError("perturbation magnitude must be finite and >= 0");
  if (spec.kind == PerturbationSpec::Kind::None || spec.magnitude == 0.0) return oracle;
  FieldOracle out = oracle;
  out.layers_.push_back(spec);
  if (spec.kind == PerturbationSpec::Kind::AdditiveGaussianField)
    out.fields_.push_back(std::make_shared<const detail::PhaseField>(oracle.dim(), spec.magnitude, spec.seed));
  else
    out.fields_.push_back(nullptr);
  return out;
}

void FieldSlice::responsibilities(std::span<const double> x, std::span<double> r) const {
  const auto& k = kernels::active();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    const auto& cc = comps_[c];
    r[c] = cc.log_weight_norm - 0.5 * k.weighted_sq_dist(x.data(), cc.centre.data(), cc.inv_var.data(), dim_);
    mx = std::max(mx, r[c]);
  }
  double total = 0.0;
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    r[c] = std::exp(r[c] - mx);
    total += r[c];
  }
  for (std::size_t c = 0; c < comps_.size(); ++c) r[c] /= total;
}

void FieldSlice::exact_velocity(std::span<const double> x, std::span<double> out) const {
  const auto& k = kernels::active();
  if (comps_.size() == 1) {
    k.affine(comps_[0].v_slope.data(), comps_[0].v_intercept.data(), x.data(), out.data(), dim_);
    return;
  }
  thread_local std::vector<double> r, tmp;
  r.resize(comps_.size());
  tmp.resize(dim_);
  responsibilities(x, r);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    k.affine(comps_[c].v_slope.data(), comps_[c].v_intercept.data(), x.data(), tmp.data(), dim_);
    k.axpy(r[c], tmp.data(), out.data(), dim_);
  }
}

void FieldSlice::exact_score(std::span<const double> x, std::span<double> out) const {
  const auto& k = kernels::active();
  if (comps_.size() == 1) {
    k.affine(comps_[0].s_slope.data(), comps_[0].s_intercept.data(), x.data(), out.data(), dim_);
    return;
  }
  thread_local std::vector<double> r, tmp;
  r.resize(comps_.size());
  tmp.resize(dim_);
  responsibilities(x, r);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    k.affine(comps_[c].s_slope.data(), comps_[c].s_intercept.data(), x.data(), tmp.data(), dim_);
    k.axpy(r[c], tmp.data(), out.data(), dim_);
  }
}

void FieldSlice::apply_perturbations(std::span<const double> x, std::span<double> v) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& p = layers_[l];
    if (p.kind == PerturbationSpec::Kind::ScaleBias) {
      for (double& vj : v) vj = (1.0 + p.magnitude) * vj + p.magnitude;
    } else if (p.kind == PerturbationSpec::Kind::AdditiveGaussianField) {
      fields_[l]->add(x, t_, v);
    }
  }
}

void FieldSlice::velocity(std::span<const double> x, std::span<double> out) const {
  if (affine_) {
    kernels::active().affine(v_slope_.data(), v_intercept_.data(), x.data(), out.data(), dim_);
    return;
  }
  exact_velocity(x, out);
  apply_perturbations(x, out);
}

void FieldSlice::score(std::span<const double> x, std::span<double> out) const {
  if (!(t_ > 0.0)) throw DomainError("score is undefined at t = 0");
  if (affine_) {
    kernels::active().affine(s_slope_.data(), s_intercept_.data(), x.data(), out.data(), dim_);
    return;
  }
  if (exact_) {
    exact_score(x, out);
    return;
  }
  // Perturbed oracles define the score through the estimated velocity.
  velocity(x, out);
  const double inv = 1.0 / (1.0 - t_);
  for (std::size_t j = 0; j < dim_; ++j) out[j] = (t_ * out[j] - x[j]) * inv;
}

}  // namespace rfsl
