#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <span>
#include <string>

#include "stfem/forms.hpp"

namespace stfem {

struct SaddleOptions {
  double gamma = 1e-3;
  double gamma_star = 1.0;
  StabVariant variant;
  bool allow_locking = false;   // accept q > p
  bool allow_unstable = false;  // accept gamma = 0 or gamma_star = 0
  int threads = 0;              // 0 = hardware concurrency; 1 = sequential
  QuadratureOptions quad;
  /// Residual above this is reported as ill-conditioned.
  double residual_gate = 1e-8;
};

/// K = [[M_O + gamma S, B^T], [B, -gamma* S*]], rhs = [l; 0].
/// Primal unknowns first, dual second.
struct SaddleSystem {
  std::shared_ptr<const FESpace> primal;
  std::shared_ptr<const FESpace> dual;
  SaddleOptions options;
  Interval omega;

  SparseMatrix mass_o;     // Np x Np
  SparseMatrix stab;       // Np x Np
  SparseMatrix dual_stab;  // Nq x Nq
  SparseMatrix wave;       // Nq x Np, wave(w, u) = a_h(phi_u, psi_w)
  Eigen::VectorXd load;    // Np

  SparseMatrix matrix;
  Eigen::VectorXd rhs;

  int np() const { return primal->dof_count(); }
  int nq() const { return dual->dof_count(); }
};

enum class SolveStatus { Ok, Singular, IllConditioned };
std::string to_string(SolveStatus s);

struct SolveReport {
  double residual = 0.0;  // ||Kx - b|| / ||b||, absolute when b = 0
  SolveStatus status = SolveStatus::Ok;
  double seconds = 0.0;
  int ndof_primal = 0;
  int ndof_dual = 0;
  std::string solver;

  /// One-line JSON object.
  std::string to_json() const;
};

struct SaddleSolution {
  DiscreteField u;
  DiscreteField z;
  SolveReport report;
};

/// Errors: MeshMismatch, DegreeOrder (q > p without allow_locking),
/// UnstableParameters (gamma or gamma* not positive without allow_unstable),
/// VariantConstraint (face-only primal stabilizer with q < p-2).
SaddleSystem build_system(const std::shared_ptr<const FESpace>& primal,
                          const std::shared_ptr<const FESpace>& dual, const ObservationData& data,
                          const SaddleOptions& options = {});

/// Sparse direct solve. Throws Singular if the factorization fails.
SaddleSolution solve(const SaddleSystem& system);

struct TestPair {
  Eigen::VectorXd v;  // primal space coefficients
  Eigen::VectorXd w;  // dual space coefficients
};

/// max over pairs of |A_h[(u - u_h, -z_h), (v, w)]| / (||v||_H1 + ||w||_H1),
/// with u given as a field of degree >= p on the same mesh (for instance its
/// P3 nodal interpolant). The exact discrete solution has violation zero up
/// to the error of representing u.
double check_galerkin_orthogonality(const SaddleSystem& system, const DiscreteField& u_exact,
                                    const DiscreteField& u_h, const DiscreteField& z_h,
                                    std::span<const TestPair> tests);

/// H1(M) Gram matrix, (grad u, grad v)_M + (u, v)_M.
SparseMatrix assemble_h1_gram(const FESpace& space, int threads = 0);

}  // namespace stfem
