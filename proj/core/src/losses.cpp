#include "localma/losses.hpp"

#include <cmath>
#include <string>

#include "localma/errors.hpp"
#include "localma/model.hpp"

namespace localma {

std::string_view to_string(LossKind kind) noexcept {
  return kind == LossKind::Squared ? "squared" : "cross_entropy";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "squared") return LossKind::Squared;
  if (name == "cross_entropy") return LossKind::CrossEntropy;
  throw Error(ErrorCode::InvalidConfig, "unknown loss '" + std::string(name) + "'");
}

void LossSpec::validate() const {
  if (!(probability_floor > 0.0 && probability_floor <= 1e-3)) {
    throw Error(ErrorCode::InvalidConfig, "probability_floor must lie in (0, 1e-3]");
  }
}

LossValue squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (y.size() != 1 || yhat.size() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "squared loss expects scalar responses");
  }
  LossValue out;
  const double r = yhat[0] - y[0];
  out.value = r * r;
  out.derivative = Eigen::VectorXd::Constant(1, 2.0 * r);
  return out;
}

LossValue cross_entropy(const Eigen::VectorXd& y, const Eigen::VectorXd& p, double floor) {
  if (y.size() != p.size() || y.size() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "cross_entropy: y and p lengths differ");
  }
  if (!is_one_hot(y)) throw Error(ErrorCode::NotOneHot, "cross_entropy: y is not one-hot");
  if (!is_on_simplex(p, kSimplexTolerance)) {
    throw Error(ErrorCode::NotOnSimplex, "cross_entropy: p is not on the simplex");
  }
  LossSpec spec{LossKind::CrossEntropy, floor};
  spec.validate();
  LossValue out;
  out.derivative.resize(y.size());
  out.value = detail::loss_kernel(spec, {y.data(), static_cast<std::size_t>(y.size())},
                                  {p.data(), static_cast<std::size_t>(p.size())},
                                  {out.derivative.data(), static_cast<std::size_t>(y.size())});
  return out;
}

LossValue evaluate(const LossSpec& spec, const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  return spec.kind == LossKind::Squared ? squared(y, yhat)
                                        : cross_entropy(y, yhat, spec.probability_floor);
}

}  // namespace localma
