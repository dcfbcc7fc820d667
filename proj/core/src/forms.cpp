#include "stfem/forms.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "squares.hpp"
#include "stfem/error.hpp"

namespace stfem {

using detail::chunked;
using Triplets = std::vector<Eigen::Triplet<double>>;

double ObservationData::operator()(double t, double x) const {
  constexpr double tol = 1e-12;
  if (x < omega.lo - tol || x > omega.hi + tol) {
    throw Error(ErrorCode::OutsideObservationDomain,
                "x=" + std::to_string(x) + " is outside the observation window");
  }
  return fn(t, x);
}

SparseBilinear assemble_wave_form(const std::shared_ptr<const FESpace>& trial,
                                  const std::shared_ptr<const FESpace>& test, int threads) {
  if (!trial->same_mesh(*test)) {
    throw Error(ErrorCode::MeshMismatch, "wave form needs trial and test spaces on one mesh");
  }
  const SpacetimeMesh& mesh = trial->mesh();
  const int k = std::max(trial->degree(), test->degree());
  const QuadratureRule& rule = quadrature_for(2 * k + 2);
  const LineRule& line = line_rule_for(2 * k + 2);
  const auto tu = detail::make_tables(trial->element(), rule, line, false);
  const auto tw = detail::make_tables(test->element(), rule, line, false);
  const int nu = trial->dofs_per_cell();
  const int nw = test->dofs_per_cell();

  auto chunks = chunked<Triplets>(mesh.num_triangles(), threads,
                                  [&](std::size_t b, std::size_t e, Triplets& out) {
    Eigen::MatrixXd local(nw, nu);
    BasisEval bu, bw;
    std::vector<Vec2> agu(nu);
    for (std::size_t c = b; c < e; ++c) {
      const int ci = static_cast<int>(c);
      const AffineMap map = AffineMap::of(mesh, ci);
      local.setZero();
      for (std::size_t q = 0; q < rule.size(); ++q) {
        detail::to_physical(map, tu.vol[q], bu, false);
        detail::to_physical(map, tw.vol[q], bw, false);
        const double w = rule.weights[q] * std::abs(map.det);
        for (int j = 0; j < nu; ++j) agu[j] = detail::minkowski(bu.grad[j]);
        for (int i = 0; i < nw; ++i) {
          for (int j = 0; j < nu; ++j) local(i, j) += w * agu[j].dot(bw.grad[i]);
        }
      }
      for (int e2 = 0; e2 < 3; ++e2) {
        const Facet& f = mesh.facets()[mesh.tri_facets(ci)[e2]];
        if (f.interior()) continue;
        const Vec2 n(f.normal.t, f.normal.x);
        const int ti = detail::edge_table_index(mesh, ci, e2, f);
        const bool sigma = f.tag == BoundaryTag::Sigma;
        for (std::size_t q = 0; q < line.size(); ++q) {
          detail::to_physical(map, tu.edge[ti][q], bu, false);
          detail::to_physical(map, tw.edge[ti][q], bw, false);
          const double w = line.weights[q] * f.length;
          for (int i = 0; i < nw; ++i) {
            const double flux_w = n.dot(detail::minkowski(bw.grad[i]));
            for (int j = 0; j < nu; ++j) {
              double v = n.dot(detail::minkowski(bu.grad[j])) * bw.value[i];
              if (sigma) v += flux_w * bu.value[j];
              local(i, j) -= w * v;
            }
          }
        }
      }
      const auto du = trial->cell_dofs(ci);
      const auto dw = test->cell_dofs(ci);
      for (int i = 0; i < nw; ++i) {
        for (int j = 0; j < nu; ++j) {
          if (local(i, j) != 0.0) out.emplace_back(dw[i], du[j], local(i, j));
        }
      }
    }
  });

  Triplets all;
  for (const auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
  SparseMatrix m(test->dof_count(), trial->dof_count());
  m.setFromTriplets(all.begin(), all.end());
  return {test, trial, std::move(m)};
}

Eigen::VectorXd assemble_data_functional(const std::shared_ptr<const FESpace>& space,
                                         const ObservationData& data,
                                         const QuadratureOptions& quad, int threads) {
  const SpacetimeMesh& mesh = space->mesh();
  const auto mask = observation_cells(mesh, data.omega);
  const int k = space->degree();
  const QuadratureRule& rule = quadrature_for(quad.data > 0 ? quad.data : 2 * k + 4);
  const int n = space->dofs_per_cell();
  std::vector<BasisEval> tab(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    space->element().eval(Vec2(rule.points[q][0], rule.points[q][1]), tab[q], false);
  }

  using Entries = std::vector<std::pair<int, double>>;
  auto chunks = chunked<Entries>(mesh.num_triangles(), threads,
                                 [&](std::size_t b, std::size_t e, Entries& out) {
    std::vector<double> local(n);
    for (std::size_t c = b; c < e; ++c) {
      if (!mask[c]) continue;
      const int ci = static_cast<int>(c);
      const AffineMap map = AffineMap::of(mesh, ci);
      std::fill(local.begin(), local.end(), 0.0);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2 p = map.to_physical(Vec2(rule.points[q][0], rule.points[q][1]));
        const double wd = rule.weights[q] * std::abs(map.det) * data(p.x(), p.y());
        for (int i = 0; i < n; ++i) local[i] += wd * tab[q].value[i];
      }
      const auto dofs = space->cell_dofs(ci);
      for (int i = 0; i < n; ++i) out.emplace_back(dofs[i], local[i]);
    }
  });

  Eigen::VectorXd l = Eigen::VectorXd::Zero(space->dof_count());
  for (const auto& c : chunks) {
    for (const auto& [i, v] : c) l(i) += v;
  }
  return l;
}

std::vector<double> observation_misfit_local(const DiscreteField& u, const ObservationData& data,
                                             const QuadratureOptions& quad) {
  const auto mask = observation_cells(u.space->mesh(), data.omega);
  detail::SquareRecipe r;
  r.value_volume = 1.0;
  QuadratureOptions q = quad;
  q.volume = quad.data > 0 ? quad.data : 2 * u.space->degree() + 4;
  const JetFunction exact = [&](double t, double x) {
    Jet j;
    j.u = data(t, x);
    return j;
  };
  return detail::local_squares(u, r, mask, q, &exact);
}

double facet_jump(const DiscreteField& field, int facet, Point p) {
  const Facet& f = field.space->mesh().facets().at(facet);
  if (!f.interior()) throw Error(ErrorCode::BoundaryFacet, "jump requested on a boundary facet");
  const Vec2 n1(f.normal.t, f.normal.x);
  const FieldSample s1 = eval_on_cell(field, f.tri[0], p);
  const FieldSample s2 = eval_on_cell(field, f.tri[1], p);
  return n1.dot(detail::minkowski(s1.grad)) - n1.dot(detail::minkowski(s2.grad));
}

void write_matrix_market(std::ostream& os, const SparseMatrix& m) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n' << std::setprecision(17);
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_matrix_market(os, m);
}

}  // namespace stfem
