#include "upscale/linear.hpp"

#include <cmath>

namespace upscale {

void LinearSystem::matvec(const std::vector<double>& x, std::vector<double>& y) const {
  int n = size();
  y.assign(n, 0.0);
  for (int p = 0; p < n; ++p) {
    double s = diag[p] * x[p];
    for (int d = 0; d < 4; ++d) {
      int q = mesh->nbr[p][d];
      if (q >= 0) s += off[p][d] * x[q];
    }
    y[p] = s;
  }
}

LinearSystem LinearSystem::transpose() const {
  LinearSystem t;
  t.mesh = mesh;
  t.diag = diag;
  t.rhs.assign(size(), 0.0);
  t.pinned = pinned;
  t.off.assign(size(), {0.0, 0.0, 0.0, 0.0});
  static constexpr int opp[4] = {E, W, N, S};
  for (int p = 0; p < size(); ++p)
    for (int d = 0; d < 4; ++d) {
      int q = mesh->nbr[p][d];
      if (q >= 0) t.off[q][opp[d]] = off[p][d];
    }
  return t;
}

double LinearSystem::max_entry_diff(const LinearSystem& a, const LinearSystem& b) {
  double m = 0.0;
  for (int p = 0; p < a.size(); ++p) {
    m = std::max(m, std::abs(a.diag[p] - b.diag[p]));
    for (int d = 0; d < 4; ++d) m = std::max(m, std::abs(a.off[p][d] - b.off[p][d]));
  }
  return m;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

int solve_linear(const LinearSystem& sys, const CellField& rhs, CellField& x,
                 const SolverSettings& settings) {
  int n = sys.size();
  if (static_cast<int>(x.size()) != n) x.assign(n, 0.0);

  std::vector<double> inv_diag(n);
  for (int p = 0; p < n; ++p)
    inv_diag[p] = std::abs(sys.diag[p]) > 1e-300 ? 1.0 / sys.diag[p] : 1.0;

  std::vector<double> r(n), r0(n), pvec(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n), ax(n);
  sys.matvec(x, ax);
  for (int i = 0; i < n; ++i) r[i] = rhs[i] - ax[i];
  double bnorm = norm(rhs);
  if (bnorm <= 1e-300) bnorm = std::max(norm(r), 1e-300);
  double target = settings.tol * bnorm;
  if (norm(r) <= target) return 0;

  r0 = r;
  double rho_old = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 1; it <= settings.max_iter; ++it) {
    double rho = dot(r0, r);
    if (std::abs(rho) < 1e-290) {  // restart on breakdown
      r0 = r;
      rho = dot(r0, r);
      pvec.assign(n, 0.0);
      v.assign(n, 0.0);
      rho_old = 1.0;
      alpha = 1.0;
      omega = 1.0;
    }
    double beta = (rho / rho_old) * (alpha / omega);
    for (int i = 0; i < n; ++i) pvec[i] = r[i] + beta * (pvec[i] - omega * v[i]);
    for (int i = 0; i < n; ++i) phat[i] = pvec[i] * inv_diag[i];
    sys.matvec(phat, v);
    double r0v = dot(r0, v);
    if (std::abs(r0v) < 1e-290) r0v = r0v >= 0 ? 1e-290 : -1e-290;
    alpha = rho / r0v;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm(s) <= target) {
      for (int i = 0; i < n; ++i) x[i] += alpha * phat[i];
      return it;
    }
    for (int i = 0; i < n; ++i) shat[i] = s[i] * inv_diag[i];
    sys.matvec(shat, t);
    double tt = dot(t, t);
    omega = tt > 1e-290 ? dot(t, s) / tt : 0.0;
    for (int i = 0; i < n; ++i) x[i] += alpha * phat[i] + omega * shat[i];
    for (int i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    if (norm(r) <= target) return it;
    if (omega == 0.0) {  // force restart next round
      r0 = r;
      rho_old = 1.0;
      alpha = 1.0;
      omega = 1.0;
      pvec.assign(n, 0.0);
      v.assign(n, 0.0);
      continue;
    }
    rho_old = rho;
  }
  throw SolveError("linear solver exceeded max iterations, residual " +
                   std::to_string(norm(r) / bnorm) + (sys.note.empty() ? "" : " [" + sys.note + "]"));
}

int solve_linear(const LinearSystem& sys, CellField& x, const SolverSettings& settings) {
  return solve_linear(sys, sys.rhs, x, settings);
}

}  // namespace upscale
