// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/metrics/fid.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "evomon/common/error.hpp"

namespace evomon::metrics {

namespace {

constexpr double kRidgeScale = 1e-6;

double mean_diagonal(const Eigen::MatrixXd& a) { return a.rows() == 0 ? 0.0 : a.trace() / static_cast<double>(a.rows()); }

double min_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  return solver.eigenvalues()(0);
}

}  // namespace

GaussianMoments gaussian_moments(const FeatureMatrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.dims();
  if (n < 2) throw ValidationError("insufficient samples: gaussian moments need at least 2 rows, got " + std::to_string(n));

  GaussianMoments m{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)),
                    Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) m.mu(static_cast<Eigen::Index>(k)) += x.at(i, k);
  m.mu /= static_cast<double>(n);

  Eigen::MatrixXd centered(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k)
      centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = x.at(i, k) - m.mu(static_cast<Eigen::Index>(k));

  const auto dims = static_cast<std::ptrdiff_t>(d);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t a = 0; a < dims; ++a) {
    for (std::ptrdiff_t b = a; b < dims; ++b) {
      const double s = centered.col(a).dot(centered.col(b)) / static_cast<double>(n - 1);
      m.sigma(a, b) = s;
      m.sigma(b, a) = s;
    }
  }
  return m;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ValidationError("matrix_sqrt_psd: matrix is not square");
  if (!a.allFinite()) throw NumericalError("matrix_sqrt_psd: matrix has non-finite entries");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "matrix_sqrt_psd: eigendecomposition did not converge (" << a.rows() << "x" << a.cols()
        << ", |A|_F = " << sym.norm() << ", max |a_ij| = " << sym.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = solver.eigenvectors();
  Eigen::MatrixXd r = v * roots.asDiagonal() * v.transpose();
  return 0.5 * (r + r.transpose());
}

FidResult fid_detailed(const GaussianMoments& real, const GaussianMoments& gen) {
  if (real.mu.size() != gen.mu.size()) {
    throw ValidationError("fid: feature dimension mismatch (" + std::to_string(real.mu.size()) + " vs " +
                          std::to_string(gen.mu.size()) + ")");
  }
  FidResult result;
  Eigen::MatrixXd sr = real.sigma;
  Eigen::MatrixXd sg = gen.sigma;
  const double eps_r = kRidgeScale * mean_diagonal(sr);
  const double eps_g = kRidgeScale * mean_diagonal(sg);
  if (min_eigenvalue(sr) < eps_r || min_eigenvalue(sg) < eps_g) {
    sr.diagonal().array() += eps_r;
    sg.diagonal().array() += eps_g;
    result.epsilon_real = eps_r;
    result.epsilon_gen = eps_g;
  }

  const Eigen::MatrixXd root_r = matrix_sqrt_psd(sr);
  const Eigen::MatrixXd inner = root_r * sg * root_r;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("fid: eigendecomposition of the cross term failed");
  const double cross = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double mean_term = (real.mu - gen.mu).squaredNorm();
  double value = mean_term + sr.trace() + sg.trace() - 2.0 * cross;
  if (value < 0.0) {
    const double tol = 1e-6 * std::max(1.0, sr.trace() + sg.trace());
    if (value < -tol) throw NumericalError("fid: negative distance " + std::to_string(value));
    value = 0.0;
  }
  result.value = value;
  return result;
}

FidResult fid_detailed(const FeatureMatrix& real, const FeatureMatrix& gen) {
  if (real.dims() != gen.dims()) {
    throw ValidationError("fid: feature dimension mismatch (" + std::to_string(real.dims()) + " vs " +
                          std::to_string(gen.dims()) + ")");
  }
  return fid_detailed(gaussian_moments(real), gaussian_moments(gen));
}

double fid(const FeatureMatrix& real, const FeatureMatrix& gen) { return fid_detailed(real, gen).value; }

}  // namespace evomon::metrics
