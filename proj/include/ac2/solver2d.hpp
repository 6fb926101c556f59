#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "ac2/common.hpp"
#include "ac2/grid.hpp"
#include "ac2/potential.hpp"

namespace ac2 {

struct SolveConfig {
  double tol = 1e-10;        // target interior residual (max norm)
  int max_newton = 50;
  int max_pseudo = 2000;     // pseudo-time step budget
  double newton_switch = 1e-2;  // hand over to Newton below this residual
};

struct SolveStats {
  int pseudo_steps = 0;
  int newton_steps = 0;
  double residual = 0.0;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& msg, Field2D best)
      : Error(ErrorKind::Solver, msg),
        best_field(std::make_shared<Field2D>(std::move(best))) {}
  std::shared_ptr<Field2D> best_field;
};

namespace detail {

// Index map over the non-Dirichlet nodes. With a mirror (Neumann) left
// edge the i=0 column joins the unknowns, minus the corner rows.
struct UnknownMap {
  int nx, ny, i_lo;
  explicit UnknownMap(const Field2D& f)
      : nx(f.grid.nx), ny(f.grid.ny), i_lo(f.neumann_left ? 0 : 1) {}
  int count() const { return (nx - 1 - i_lo) * (ny - 2); }
  int id(int i, int j) const { return (j - 1) * (nx - 1 - i_lo) + (i - i_lo); }
  bool is_unknown(int i, int j) const {
    return j >= 1 && j <= ny - 2 && i >= i_lo && i <= nx - 2;
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (int j = 1; j <= ny - 2; ++j)
      for (int i = i_lo; i <= nx - 2; ++i) fn(i, j, id(i, j));
  }
};

// 5-point Laplacian at a non-Dirichlet node, mirror ghost at i=0 when
// the left edge is Neumann.
inline double laplacian(const Field2D& f, int i, int j) {
  const double ihx2 = 1.0 / (f.grid.hx * f.grid.hx);
  const double ihy2 = 1.0 / (f.grid.hy * f.grid.hy);
  const double c = f.at(i, j);
  const double left = (i == 0) ? f.at(1, j) : f.at(i - 1, j);
  return (left + f.at(i + 1, j) - 2.0 * c) * ihx2 +
         (f.at(i, j - 1) + f.at(i, j + 1) - 2.0 * c) * ihy2;
}

}  // namespace detail

// max over non-Dirichlet nodes of |Lap_h u - F'(u)|
inline double residual_max(const Field2D& f, const Potential& p) {
  detail::UnknownMap map(f);
  double r = 0.0;
  map.for_each([&](int i, int j, int) {
    r = std::max(r, std::abs(detail::laplacian(f, i, j) - p.dF(f.at(i, j))));
  });
  return r;
}

namespace detail {

inline Eigen::SparseMatrix<double> laplacian_matrix(const Field2D& f,
                                                    const UnknownMap& map,
                                                    double diag_shift) {
  const double ihx2 = 1.0 / (f.grid.hx * f.grid.hx);
  const double ihy2 = 1.0 / (f.grid.hy * f.grid.hy);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(map.count()) * 5);
  map.for_each([&](int i, int j, int k) {
    trip.emplace_back(k, k, diag_shift + 2.0 * ihx2 + 2.0 * ihy2);
    if (i == 0)
      trip.emplace_back(k, map.id(1, j), -ihx2);  // mirror ghost, sums with i+1

    else if (map.is_unknown(i - 1, j))
      trip.emplace_back(k, map.id(i - 1, j), -ihx2);
    if (map.is_unknown(i + 1, j)) trip.emplace_back(k, map.id(i + 1, j), -ihx2);
    if (map.is_unknown(i, j - 1)) trip.emplace_back(k, map.id(i, j - 1), -ihy2);
    if (map.is_unknown(i, j + 1)) trip.emplace_back(k, map.id(i, j + 1), -ihy2);
  });
  Eigen::SparseMatrix<double> A(map.count(), map.count());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

// Dirichlet neighbor contribution to -Lap_h, per unknown.
inline Eigen::VectorXd dirichlet_rhs(const Field2D& f, const UnknownMap& map) {
  const double ihx2 = 1.0 / (f.grid.hx * f.grid.hx);
  const double ihy2 = 1.0 / (f.grid.hy * f.grid.hy);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(map.count());
  map.for_each([&](int i, int j, int k) {
    if (i > 0 && !map.is_unknown(i - 1, j)) b[k] += ihx2 * f.at(i - 1, j);
    if (!map.is_unknown(i + 1, j)) b[k] += ihx2 * f.at(i + 1, j);
    if (!map.is_unknown(i, j - 1)) b[k] += ihy2 * f.at(i, j - 1);
    if (!map.is_unknown(i, j + 1)) b[k] += ihy2 * f.at(i, j + 1);
  });
  return b;
}

}  // namespace detail

// Relaxation to an interior residual <= cfg.tol: semi-implicit gradient
// flow (Laplacian implicit, F' explicit) into the Newton basin, then
// damped Newton with a sparse direct solve. Dirichlet rows are never
// touched; a Neumann left edge is realized by mirror ghost nodes.
inline Field2D relax(Field2D f, const Potential& p, const SolveConfig& cfg = {},
                     SolveStats* stats = nullptr) {
  detail::UnknownMap map(f);
  const int n = map.count();
  if (n <= 0) throw Error(ErrorKind::InvalidInput, "grid has no interior nodes");

  SolveStats st;
  double res = residual_max(f, p);
  if (res <= cfg.tol) {
    f.residual_max = res;
    if (stats) *stats = st;
    return f;  // already a fixed point
  }

  const Eigen::VectorXd bdry = detail::dirichlet_rhs(f, map);
  auto gather = [&](const Field2D& g) {
    Eigen::VectorXd u(n);
    map.for_each([&](int i, int j, int k) { u[k] = g.at(i, j); });
    return u;
  };
  auto scatter = [&](const Eigen::VectorXd& u, Field2D& g) {
    map.for_each([&](int i, int j, int k) { g.at(i, j) = u[k]; });
  };

  // --- pseudo-time stage ---
  // dt below 1/max F'' keeps the explicit reaction map monotone, so the
  // iterates stay inside [-1, 1] by the discrete comparison principle.
  const double dt_cap = 0.45 / std::max(1e-12, p.max_ddF());
  double dt = dt_cap;
  const int check_every = 5;
  int grow_checks = 0;
  double last_checked = res;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> flow;
  auto factorize_flow = [&]() {
    flow.compute(detail::laplacian_matrix(f, map, 1.0 / dt));
    if (flow.info() != Eigen::Success)
      throw SolverError("pseudo-time operator factorization failed", f);
  };
  if (res > cfg.newton_switch) factorize_flow();

  Eigen::VectorXd u = gather(f);
  while (res > cfg.newton_switch) {
    if (st.pseudo_steps >= cfg.max_pseudo)
      break;  // Newton gets a chance from wherever we are
    Eigen::VectorXd rhs = u / dt + bdry;
    for (int k = 0; k < n; ++k) rhs[k] -= p.dF(u[k]);
    u = flow.solve(rhs);
    ++st.pseudo_steps;
    if (st.pseudo_steps % check_every == 0) {
      scatter(u, f);
      res = residual_max(f, p);
      if (res > last_checked) {
        if (++grow_checks * check_every >= 50) {
          if (dt > 1e-4 * dt_cap) {
            dt *= 0.5;
            grow_checks = 0;
            factorize_flow();
          } else {
            f.residual_max = res;
            throw SolverError("pseudo-time iteration diverges", f);
          }
        }
      } else {
        grow_checks = 0;
      }
      last_checked = res;
    }
  }
  scatter(u, f);
  res = residual_max(f, p);

  // --- Newton polish ---
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  Field2D trial = f;
  int stalls = 0;
  while (res > cfg.tol) {
    if (st.newton_steps >= cfg.max_newton) {
      f.residual_max = res;
      std::ostringstream os;
      os << "Newton hit the iteration cap at residual " << res;
      throw SolverError(os.str(), f);
    }
    Eigen::SparseMatrix<double> J = detail::laplacian_matrix(f, map, 0.0);
    // J holds -Lap_h; Newton matrix is -Lap_h + F''(u) ... sign folded
    u = gather(f);
    for (int k = 0; k < n; ++k) J.coeffRef(k, k) += p.ddF(u[k]);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success)
      throw SolverError("Newton Jacobian factorization failed", f);
    Eigen::VectorXd r(n);
    map.for_each([&](int i, int j, int k) {
      r[k] = detail::laplacian(f, i, j) - p.dF(f.at(i, j));
    });
    const double res2 = r.norm();
    const Eigen::VectorXd delta = lu.solve(r);  // J = -(Lap - F'') so +r
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1.0 / 1024.0) {
      scatter(u + alpha * delta, trial);
      // accept on the 2-norm (monotone along good Newton steps even when
      // a soft mode makes the max-norm plateau); converge on the max-norm
      double rt2 = 0.0, rt_max = 0.0;
      map.for_each([&](int i, int j, int k) {
        const double v = detail::laplacian(trial, i, j) - p.dF(trial.at(i, j));
        rt2 += v * v;
        rt_max = std::max(rt_max, std::abs(v));
        (void)k;
      });
      if (std::sqrt(rt2) < res2) {
        std::swap(f.values, trial.values);
        res = rt_max;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++st.newton_steps;
    if (!accepted && ++stalls >= 3) {
      f.residual_max = res;
      throw SolverError("Newton stalled without residual decrease", f);
    }
    if (accepted) stalls = 0;
  }

  f.residual_max = res;
  st.residual = res;
  if (stats) *stats = st;
  return f;
}

}  // namespace ac2
