#pragma once

// Cone membership over a growing set of generators g_j: find w >= 0 with
//
//   sum_j w_j g_j = b
//
// by a phase-one revised simplex (dense basis inverse, one signed artificial
// per row, unit cost). At the optimum the duals give alpha = -y with
//
//   alpha . g_j >= 0 for every generator,  |alpha_i| <= 1,
//   alpha . b = -(sum of artificials),
//
// so a positive residual comes with a separating functional. The right-hand
// side is perturbed by a tiny deterministic amount against degeneracy.
// Generators can be appended between solves; the basis stays feasible.

#include <cstddef>
#include <vector>

#include "crossbound/numeric.hpp"

namespace crossbound {

enum class LpStatus { Optimal, IterationLimit };

class ConeLP {
 public:
  explicit ConeLP(const std::vector<Real>& b, Real perturbation = 1e-12L);

  std::size_t dimension() const { return n_; }
  std::size_t generators() const { return cols_ - 2 * n_; }
  // Returns the generator index.
  std::size_t add_generator(const std::vector<Real>& g);

  LpStatus solve(long max_iterations = 200000);

  // Sum of the artificial variables for the unperturbed right-hand side.
  Real residual() const { return residual_; }
  const std::vector<Real>& alpha() const { return alpha_; }
  std::vector<Real> weights() const;
  long iterations() const { return iterations_; }

 private:
  template <class T>
  struct Phase {
    std::vector<T> binv, xb, y;
    int since_refactor = 0;
    void refactor(const ConeLP& lp);
    void duals(const ConeLP& lp);
    bool run(ConeLP& lp, long& budget, T opt_tol, T piv_tol, T feas_tol, bool devex);
  };

  std::size_t add_column(const Real* a, Real cost);
  template <class T>
  const std::vector<T>& columns() const;

  std::size_t n_;
  std::size_t cols_ = 0;
  std::vector<Real> b_, bp_;  // exact and perturbed right-hand side
  std::vector<Real> a_, cost_;
  std::vector<double> ad_;  // double copy for the fast phase
  std::vector<char> basic_;
  std::vector<std::size_t> head_;
  std::vector<Real> binv_;  // final basis inverse
  std::vector<Real> alpha_;
  Real residual_ = 0;
  long iterations_ = 0;
};

}  // namespace crossbound
