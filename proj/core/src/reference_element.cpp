#include <cmath>

#include "stfem/error.hpp"
#include "stfem/fespace.hpp"

namespace stfem {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

ReferenceElement::ReferenceElement(int degree) : degree_(degree) {
  if (degree < 1 || degree > 3) {
    throw Error(ErrorCode::UnsupportedDegree, "Lagrange degree must be 1, 2 or 3");
  }
  const int k = degree;
  const std::array<Vec2, 3> corners{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  for (const auto& c : corners) nodes_.push_back(c);
  for (int e = 0; e < 3; ++e) {
    const Vec2& a = corners[e];
    const Vec2& b = corners[(e + 1) % 3];
    for (int j = 1; j < k; ++j) nodes_.push_back(a + (static_cast<double>(j) / k) * (b - a));
  }
  if (k == 3) nodes_.push_back(Vec2(1.0 / 3.0, 1.0 / 3.0));

  for (int total = 0; total <= k; ++total) {
    for (int b = 0; b <= total; ++b) exponents_.push_back({total - b, b});
  }

  const int n = size();
  Eigen::MatrixXd vandermonde(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      vandermonde(i, j) = ipow(nodes_[i].x(), exponents_[j][0]) * ipow(nodes_[i].y(), exponents_[j][1]);
    }
  }
  coeffs_ = vandermonde.fullPivLu().inverse();
}

void ReferenceElement::eval(const Vec2& ref, BasisEval& out, bool with_hessian) const {
  const int n = size();
  const double xi = ref.x();
  const double eta = ref.y();
  // Monomial values and derivatives.
  using Small = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 10, 1>;
  Small m(n), mx(n), my(n), mxx(n), mxy(n), myy(n);
  for (int j = 0; j < n; ++j) {
    const int a = exponents_[j][0];
    const int b = exponents_[j][1];
    m(j) = ipow(xi, a) * ipow(eta, b);
    mx(j) = a > 0 ? a * ipow(xi, a - 1) * ipow(eta, b) : 0.0;
    my(j) = b > 0 ? b * ipow(xi, a) * ipow(eta, b - 1) : 0.0;
    if (with_hessian) {
      mxx(j) = a > 1 ? a * (a - 1) * ipow(xi, a - 2) * ipow(eta, b) : 0.0;
      mxy(j) = (a > 0 && b > 0) ? a * b * ipow(xi, a - 1) * ipow(eta, b - 1) : 0.0;
      myy(j) = b > 1 ? b * (b - 1) * ipow(xi, a) * ipow(eta, b - 2) : 0.0;
    }
  }
  out.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto c = coeffs_.col(i);
    out.value[i] = c.dot(m);
    out.grad[i] = Vec2(c.dot(mx), c.dot(my));
    if (with_hessian) {
      const double hxy = c.dot(mxy);
      out.hess[i] << c.dot(mxx), hxy, hxy, c.dot(myy);
    } else {
      out.hess[i].setZero();
    }
  }
}

AffineMap AffineMap::of(const SpacetimeMesh& mesh, int tri) {
  const auto& v = mesh.triangles()[tri].v;
  const Point& a = mesh.vertices()[v[0]];
  const Point& b = mesh.vertices()[v[1]];
  const Point& c = mesh.vertices()[v[2]];
  AffineMap map;
  map.origin = Vec2(a.t, a.x);
  map.jac << b.t - a.t, c.t - a.t, b.x - a.x, c.x - a.x;
  map.det = map.jac.determinant();
  map.jac_inv = map.jac.inverse();
  return map;
}

void push_forward(const AffineMap& map, BasisEval& eval, bool with_hessian) {
  const Mat2 jit = map.jac_inv.transpose();
  for (std::size_t i = 0; i < eval.value.size(); ++i) {
    eval.grad[i] = jit * eval.grad[i];
    if (with_hessian) eval.hess[i] = jit * eval.hess[i] * map.jac_inv;
  }
}

}  // namespace stfem
