#include "enlab/potentials.hpp"

#include <cmath>

namespace enlab {

void PotentialModel::check_shapes(const VectorXd& x, const VectorXd& w) const {
  if (x.size() != d_) throw shape_error(kind() + ": input dimension mismatch");
  if (w.size() != m_) throw shape_error(kind() + ": weight dimension mismatch");
}

double PotentialModel::value(const VectorXd& x, const VectorXd& w) const {
  check_shapes(x, w);
  return value_impl(x, w);
}

VectorXd PotentialModel::grad_w(const VectorXd& x, const VectorXd& w) const {
  check_shapes(x, w);
  return grad_w_impl(x, w);
}

VectorXd PotentialModel::grad_x(const VectorXd& x, const VectorXd& w) const {
  check_shapes(x, w);
  return grad_x_impl(x, w);
}

JacobianBlocks PotentialModel::jacobian_blocks(const VectorXd& x, const VectorXd& w) const {
  check_shapes(x, w);
  return jacobian_blocks_impl(x, w);
}

JacobianBlocks PotentialModel::jacobian_blocks_impl(const VectorXd& x, const VectorXd& w) const {
  // Central differences of the analytic gradients. Step 1e-5*(1+||.||) keeps
  // the subtraction noise near 1e-11 while truncation stays ~1e-10.
  const int d = input_dim();
  const int m = weight_dim();
  JacobianBlocks blocks{MatrixXd(m, m), MatrixXd(m, d), MatrixXd(d, m), MatrixXd(d, d)};
  const double hw = 1e-5 * (1.0 + w.norm());
  const double hx = 1e-5 * (1.0 + x.norm());
  VectorXd wp = w, wm = w, xp = x, xm = x;
  for (int j = 0; j < m; ++j) {
    wp[j] += hw;
    wm[j] -= hw;
    blocks.Jw.col(j) = (grad_w_impl(x, wp) - grad_w_impl(x, wm)) / (2.0 * hw);
    blocks.Kw.col(j) = (grad_x_impl(x, wp) - grad_x_impl(x, wm)) / (2.0 * hw);
    wp[j] = w[j];
    wm[j] = w[j];
  }
  for (int j = 0; j < d; ++j) {
    xp[j] += hx;
    xm[j] -= hx;
    blocks.Jx.col(j) = (grad_w_impl(xp, w) - grad_w_impl(xm, w)) / (2.0 * hx);
    blocks.Kx.col(j) = (grad_x_impl(xp, w) - grad_x_impl(xm, w)) / (2.0 * hx);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  // The exact blocks satisfy Jw = Jw^T and Kw = Jx^T; project the estimates
  // onto those identities.
  blocks.Jw = 0.5 * (blocks.Jw + blocks.Jw.transpose()).eval();
  blocks.Kw = 0.5 * (blocks.Kw + blocks.Jx.transpose()).eval();
  blocks.Jx = blocks.Kw.transpose();
  return blocks;
}

QuadraticTracking::QuadraticTracking(MatrixXd M)
    : PotentialModel(static_cast<int>(M.rows()), static_cast<int>(M.cols())), M_(std::move(M)) {
  if (M_.rows() < 1 || M_.cols() < 1) throw parameter_error("quadratic-tracking: empty matrix");
}

double QuadraticTracking::value_impl(const VectorXd& x, const VectorXd& w) const {
  return 0.5 * (M_ * w - x).squaredNorm();
}

VectorXd QuadraticTracking::grad_w_impl(const VectorXd& x, const VectorXd& w) const {
  return M_.transpose() * (M_ * w - x);
}

VectorXd QuadraticTracking::grad_x_impl(const VectorXd& x, const VectorXd& w) const {
  return x - M_ * w;
}

JacobianBlocks QuadraticTracking::jacobian_blocks_impl(const VectorXd&, const VectorXd&) const {
  JacobianBlocks blocks;
  blocks.Jw = M_.transpose() * M_;
  blocks.Jx = -M_.transpose();
  blocks.Kw = -M_;
  blocks.Kx = MatrixXd::Identity(input_dim(), input_dim());
  return blocks;
}

LinearRegression::LinearRegression(int d, FeatureMap features, LinearTarget target)
    : PotentialModel(d, features == FeatureMap::Identity ? d : d + 1),
      features_(features),
      target_(std::move(target)) {
  if (d < 1) throw parameter_error("linear-regression: dimension must be positive");
  if (target_.a.size() == 0) target_.a = VectorXd::Zero(d);
  if (target_.a.size() != d) throw shape_error("linear-regression: target coefficient size");
}

VectorXd LinearRegression::phi(const VectorXd& x) const {
  if (features_ == FeatureMap::Identity) return x;
  VectorXd f(x.size() + 1);
  f.head(x.size()) = x;
  f[x.size()] = 1.0;
  return f;
}

double LinearRegression::value_impl(const VectorXd& x, const VectorXd& w) const {
  const double r = w.dot(phi(x)) - target_.value(x);
  return 0.5 * r * r;
}

VectorXd LinearRegression::grad_w_impl(const VectorXd& x, const VectorXd& w) const {
  const double r = w.dot(phi(x)) - target_.value(x);
  return r * phi(x);
}

VectorXd LinearRegression::grad_x_impl(const VectorXd& x, const VectorXd& w) const {
  const double r = w.dot(phi(x)) - target_.value(x);
  // d r / d x = w_head - a for both feature maps (the bias feature is constant).
  return r * (w.head(input_dim()) - target_.a);
}

JacobianBlocks LinearRegression::jacobian_blocks_impl(const VectorXd& x, const VectorXd& w) const {
  const int d = input_dim();
  const int m = weight_dim();
  const VectorXd f = phi(x);
  const double r = w.dot(f) - target_.value(x);
  const VectorXd rx = w.head(d) - target_.a;  // d r / d x
  JacobianBlocks blocks;
  blocks.Jw = f * f.transpose();
  MatrixXd dphi_dx = MatrixXd::Zero(m, d);  // feature Jacobian
  dphi_dx.topLeftCorner(d, d) = MatrixXd::Identity(d, d);
  blocks.Jx = f * rx.transpose() + r * dphi_dx;
  blocks.Kw = blocks.Jx.transpose();
  blocks.Kx = rx * rx.transpose();  // phi and y are affine in x
  return blocks;
}

TwoLayerTanh::TwoLayerTanh(int d, int hidden, LinearTarget target)
    : PotentialModel(d, hidden * d + hidden), hidden_(hidden), target_(std::move(target)) {
  if (d < 1 || hidden < 1) throw parameter_error("two-layer-tanh: dimensions must be positive");
  if (target_.a.size() == 0) target_.a = VectorXd::Zero(d);
  if (target_.a.size() != d) throw shape_error("two-layer-tanh: target coefficient size");
}

MatrixXd TwoLayerTanh::unpack_A(const VectorXd& w) const {
  MatrixXd A(hidden_, input_dim());
  for (int h = 0; h < hidden_; ++h)
    for (int j = 0; j < input_dim(); ++j) A(h, j) = w[h * input_dim() + j];
  return A;
}

VectorXd TwoLayerTanh::unpack_c(const VectorXd& w) const {
  return w.tail(hidden_);
}

double TwoLayerTanh::value_impl(const VectorXd& x, const VectorXd& w) const {
  const VectorXd s = (unpack_A(w) * x).array().tanh();
  const double r = unpack_c(w).dot(s) - target_.value(x);
  return 0.5 * r * r;
}

VectorXd TwoLayerTanh::grad_w_impl(const VectorXd& x, const VectorXd& w) const {
  const int d = input_dim();
  const MatrixXd A = unpack_A(w);
  const VectorXd c = unpack_c(w);
  const VectorXd s = (A * x).array().tanh();
  const VectorXd ds = 1.0 - s.array().square();
  const double r = c.dot(s) - target_.value(x);
  VectorXd g(weight_dim());
  for (int h = 0; h < hidden_; ++h)
    for (int j = 0; j < d; ++j) g[h * d + j] = r * c[h] * ds[h] * x[j];
  g.tail(hidden_) = r * s;
  return g;
}

VectorXd TwoLayerTanh::grad_x_impl(const VectorXd& x, const VectorXd& w) const {
  const MatrixXd A = unpack_A(w);
  const VectorXd c = unpack_c(w);
  const VectorXd s = (A * x).array().tanh();
  const VectorXd ds = 1.0 - s.array().square();
  const double r = c.dot(s) - target_.value(x);
  const VectorXd out_x = A.transpose() * (c.array() * ds.array()).matrix();
  return r * (out_x - target_.a);
}

JacobianBlocks TwoLayerTanh::jacobian_blocks_impl(const VectorXd& x, const VectorXd& w) const {
  const int d = input_dim();
  const int m = weight_dim();
  const MatrixXd A = unpack_A(w);
  const VectorXd c = unpack_c(w);
  const VectorXd s = (A * x).array().tanh();
  const VectorXd ds = 1.0 - s.array().square();
  const VectorXd d2s = -2.0 * s.array() * ds.array();
  const double r = c.dot(s) - target_.value(x);

  // First derivatives of the network output.
  VectorXd u(m);  // d out / d w
  for (int h = 0; h < hidden_; ++h)
    for (int j = 0; j < d; ++j) u[h * d + j] = c[h] * ds[h] * x[j];
  u.tail(hidden_) = s;
  const VectorXd out_x = A.transpose() * (c.array() * ds.array()).matrix();
  const VectorXd v = out_x - target_.a;  // d r / d x

  // Second derivatives of the output, assembled blockwise.
  MatrixXd Hww = MatrixXd::Zero(m, m);
  for (int h = 0; h < hidden_; ++h) {
    for (int j = 0; j < d; ++j) {
      const int row = h * d + j;
      for (int i = 0; i < d; ++i) Hww(row, h * d + i) = c[h] * d2s[h] * x[j] * x[i];
      Hww(row, hidden_ * d + h) = ds[h] * x[j];
      Hww(hidden_ * d + h, row) = ds[h] * x[j];
    }
  }
  MatrixXd Hwx = MatrixXd::Zero(m, d);
  for (int h = 0; h < hidden_; ++h) {
    for (int j = 0; j < d; ++j) {
      const int row = h * d + j;
      for (int i = 0; i < d; ++i) {
        double v2 = c[h] * d2s[h] * A(h, i) * x[j];
        if (i == j) v2 += c[h] * ds[h];
        Hwx(row, i) = v2;
      }
    }
    for (int i = 0; i < d; ++i) Hwx(hidden_ * d + h, i) = ds[h] * A(h, i);
  }
  MatrixXd Hxx = MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int h = 0; h < hidden_; ++h) Hxx(i, j) += c[h] * d2s[h] * A(h, i) * A(h, j);

  JacobianBlocks blocks;
  blocks.Jw = u * u.transpose() + r * Hww;
  blocks.Jx = u * v.transpose() + r * Hwx;
  blocks.Kw = blocks.Jx.transpose();
  blocks.Kx = v * v.transpose() + r * Hxx;  // y is affine, so its Hessian vanishes
  return blocks;
}

GradientCheckReport check_gradients(const PotentialModel& model, const VectorXd& x,
                                    const VectorXd& w) {
  const double hw = 1e-6 * (1.0 + w.norm());
  const double hx = 1e-6 * (1.0 + x.norm());
  const VectorXd gw = model.grad_w(x, w);
  const VectorXd gx = model.grad_x(x, w);
  GradientCheckReport rep{0.0, 0.0, false};
  VectorXd wp = w, wm = w;
  for (int j = 0; j < w.size(); ++j) {
    wp[j] += hw;
    wm[j] -= hw;
    const double fd = (model.value(x, wp) - model.value(x, wm)) / (2.0 * hw);
    rep.max_rel_err_w = std::max(rep.max_rel_err_w, std::abs(fd - gw[j]) / (1.0 + std::abs(gw[j])));
    wp[j] = w[j];
    wm[j] = w[j];
  }
  VectorXd xp = x, xm = x;
  for (int j = 0; j < x.size(); ++j) {
    xp[j] += hx;
    xm[j] -= hx;
    const double fd = (model.value(xp, w) - model.value(xm, w)) / (2.0 * hx);
    rep.max_rel_err_x = std::max(rep.max_rel_err_x, std::abs(fd - gx[j]) / (1.0 + std::abs(gx[j])));
    xp[j] = x[j];
    xm[j] = x[j];
  }
  rep.pass = rep.max_rel_err_w <= 1e-5 && rep.max_rel_err_x <= 1e-5;
  return rep;
}

}  // namespace enlab
