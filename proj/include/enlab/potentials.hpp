#pragma once

#include <memory>
#include <string>

#include "enlab/common.hpp"

namespace enlab {

// Second-derivative blocks of the instantaneous loss:
//   Jw = d(grad_w)/dw   (m x m)     Jx = d(grad_w)/dx   (m x d)
//   Kw = d(grad_x)/dw   (d x m)     Kx = d(grad_x)/dx   (d x d)
// Mixed-partial symmetry forces Kw = Jx^T.
struct JacobianBlocks {
  MatrixXd Jw, Jx, Kw, Kx;
};

// Instantaneous loss V(x, w) >= 0 with analytic first derivatives. Models are
// immutable and evaluation is pure; share freely across threads.
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;

  int input_dim() const { return d_; }
  int weight_dim() const { return m_; }
  virtual std::string kind() const = 0;

  double value(const VectorXd& x, const VectorXd& w) const;
  VectorXd grad_w(const VectorXd& x, const VectorXd& w) const;
  VectorXd grad_x(const VectorXd& x, const VectorXd& w) const;
  JacobianBlocks jacobian_blocks(const VectorXd& x, const VectorXd& w) const;

 protected:
  PotentialModel(int d, int m) : d_(d), m_(m) {}
  virtual double value_impl(const VectorXd& x, const VectorXd& w) const = 0;
  virtual VectorXd grad_w_impl(const VectorXd& x, const VectorXd& w) const = 0;
  virtual VectorXd grad_x_impl(const VectorXd& x, const VectorXd& w) const = 0;
  // Central differences of the analytic gradients; kinds with closed-form
  // second derivatives override.
  virtual JacobianBlocks jacobian_blocks_impl(const VectorXd& x, const VectorXd& w) const;

 private:
  void check_shapes(const VectorXd& x, const VectorXd& w) const;
  int d_;
  int m_;
};

// V = 1/2 ||M w - x||^2 with M (d x m).
class QuadraticTracking : public PotentialModel {
 public:
  explicit QuadraticTracking(MatrixXd M);
  static QuadraticTracking identity(int n) { return QuadraticTracking(MatrixXd::Identity(n, n)); }
  std::string kind() const override { return "quadratic-tracking"; }
  const MatrixXd& matrix() const { return M_; }

 protected:
  double value_impl(const VectorXd& x, const VectorXd& w) const override;
  VectorXd grad_w_impl(const VectorXd& x, const VectorXd& w) const override;
  VectorXd grad_x_impl(const VectorXd& x, const VectorXd& w) const override;
  JacobianBlocks jacobian_blocks_impl(const VectorXd& x, const VectorXd& w) const override;

 private:
  MatrixXd M_;
};

// Deterministic affine target y(x) = a . x + b shared by the regression kinds.
struct LinearTarget {
  VectorXd a;
  double b = 0.0;
  double value(const VectorXd& x) const { return a.size() ? a.dot(x) + b : b; }
};

enum class FeatureMap { Identity, Affine };  // phi(x) = x  or  phi(x) = [x; 1]

// V = 1/2 (w . phi(x) - y(x))^2.
class LinearRegression : public PotentialModel {
 public:
  LinearRegression(int d, FeatureMap features, LinearTarget target);
  std::string kind() const override { return "linear-regression"; }

 protected:
  double value_impl(const VectorXd& x, const VectorXd& w) const override;
  VectorXd grad_w_impl(const VectorXd& x, const VectorXd& w) const override;
  VectorXd grad_x_impl(const VectorXd& x, const VectorXd& w) const override;
  JacobianBlocks jacobian_blocks_impl(const VectorXd& x, const VectorXd& w) const override;

 private:
  VectorXd phi(const VectorXd& x) const;
  FeatureMap features_;
  LinearTarget target_;
};

// V = 1/2 (c . tanh(A x) - y(x))^2, with w packing A (row-major, H x d)
// followed by c (H entries): m = H*d + H.
class TwoLayerTanh : public PotentialModel {
 public:
  TwoLayerTanh(int d, int hidden, LinearTarget target);
  std::string kind() const override { return "two-layer-tanh"; }
  int hidden() const { return hidden_; }

  MatrixXd unpack_A(const VectorXd& w) const;
  VectorXd unpack_c(const VectorXd& w) const;

 protected:
  double value_impl(const VectorXd& x, const VectorXd& w) const override;
  VectorXd grad_w_impl(const VectorXd& x, const VectorXd& w) const override;
  VectorXd grad_x_impl(const VectorXd& x, const VectorXd& w) const override;
  JacobianBlocks jacobian_blocks_impl(const VectorXd& x, const VectorXd& w) const override;

 private:
  int hidden_;
  LinearTarget target_;
};

struct GradientCheckReport {
  double max_rel_err_w;
  double max_rel_err_x;
  bool pass;  // both <= 1e-5
};

// Compares analytic gradients against central differences of value() at step
// 1e-6 * (1 + ||.||) per argument.
GradientCheckReport check_gradients(const PotentialModel& model, const VectorXd& x,
                                    const VectorXd& w);

}  // namespace enlab
