#pragma once

#include <Eigen/Sparse>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "stfem/fespace.hpp"

namespace stfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// A = diag(-1, 1) on (d_t, d_x) gradients.
inline Mat2 minkowski_metric() { return Vec2(-1.0, 1.0).asDiagonal(); }

/// Value and first/second derivatives of a smooth function at a point.
struct Jet {
  double u = 0.0;
  double ut = 0.0;
  double ux = 0.0;
  double utt = 0.0;
  double uxx = 0.0;
};
using JetFunction = std::function<Jet(double t, double x)>;

enum class PrimalStab { ResidualJump, FaceOnly };
enum class DualStab { GradientPenalty, ResidualStyle };

struct StabVariant {
  PrimalStab primal = PrimalStab::ResidualJump;
  DualStab dual = DualStab::GradientPenalty;
};

/// Matrix of a bilinear form: rows indexed by the test space, columns by the
/// trial space.
struct SparseBilinear {
  std::shared_ptr<const FESpace> rows;
  std::shared_ptr<const FESpace> cols;
  SparseMatrix matrix;

  double form(const Eigen::VectorXd& row_coeffs, const Eigen::VectorXd& col_coeffs) const {
    return row_coeffs.dot(matrix * col_coeffs);
  }
};

/// Data u_O on the observation cylinder (0,T) x omega.
struct ObservationData {
  enum class Source { ExactFunction, SampledSeries };

  Interval omega;
  SpacetimeFunction fn;
  Source source = Source::ExactFunction;

  /// Throws OutsideObservationDomain when x lies outside the closure of omega.
  double operator()(double t, double x) const;
};

/// Quadrature degrees for the assembly routines; 0 means the defaults
/// 2k+2 (volume and facets) and 2k+4 (data).
struct QuadratureOptions {
  int volume = 0;
  int facet = 0;
  int data = 0;
};

/// a_h(u, w) = (A grad u, grad w)_M - (A grad u . n, w)_dM - (A grad w . n, u)_Sigma.
/// Entry (i, j) is a_h(phi_j, psi_i) with phi from `trial`, psi from `test`.
SparseBilinear assemble_wave_form(const std::shared_ptr<const FESpace>& trial,
                                  const std::shared_ptr<const FESpace>& test, int threads = 0);

/// Full spacetime mass matrix.
SparseBilinear assemble_mass(const std::shared_ptr<const FESpace>& space, int threads = 0);

/// (u, v)_O with O = (0,T) x omega. The mesh must be aligned with omega.
SparseBilinear assemble_observation_mass(const std::shared_ptr<const FESpace>& space,
                                         Interval omega, int threads = 0);

/// Primal stabilizer with global h. Interior facets are counted once.
/// When `dual_degree` is positive, FaceOnly checks p-2 <= q <= p.
SparseBilinear assemble_primal_stabilizer(const std::shared_ptr<const FESpace>& space,
                                          PrimalStab variant = PrimalStab::ResidualJump,
                                          int dual_degree = 0, int threads = 0);

SparseBilinear assemble_dual_stabilizer(const std::shared_ptr<const FESpace>& space,
                                        DualStab variant = DualStab::GradientPenalty,
                                        int threads = 0);

/// l_i = (u_O, phi_i)_O.
Eigen::VectorXd assemble_data_functional(const std::shared_ptr<const FESpace>& space,
                                         const ObservationData& data,
                                         const QuadratureOptions& quad = {}, int threads = 0);

/// n1 . (A grad u|K1) + n2 . (A grad u|K2) at point p of interior facet f.
double facet_jump(const DiscreteField& field, int facet, Point p);

/// Per-triangle contributions. Interior facet terms go half to each
/// neighbour, so the entries sum to the global quadratic form.
std::vector<double> primal_stabilizer_local(const DiscreteField& u,
                                            PrimalStab variant = PrimalStab::ResidualJump);
std::vector<double> dual_stabilizer_local(const DiscreteField& z,
                                          DualStab variant = DualStab::GradientPenalty);
/// ||u - u_O||^2 on each triangle inside O (zero elsewhere).
std::vector<double> observation_misfit_local(const DiscreteField& u, const ObservationData& data,
                                             const QuadratureOptions& quad = {});

/// MatrixMarket coordinate (real general).
void write_matrix_market(std::ostream& os, const SparseMatrix& m);
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m);

}  // namespace stfem
