#pragma once

#include <Eigen/Dense>

namespace metricflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Matrix exponential by scaling and squaring with Padé approximants of
/// degree 3, 5, 7, 9 or 13 (Higham 2005), selected on the 1-norm.
Matrix expm(const Matrix& a);

/// Largest absolute entry.
double max_abs(const Matrix& a);

/// Largest |a_kl + a_lk|.
double skew_defect(const Matrix& a);

/// (a - a^T) / 2.
Matrix skew_part(const Matrix& a);

/// The 2n x 2n block matrix [[0, G], [-G^T, 0]].
Matrix block_metric(const Matrix& g);

/// Canonical metric: omega(q_i, p_j) = delta_ij, omega(p_i, q_j) = -delta_ij.
Matrix canonical_metric(int n);

/// Dimension d(d-1)/2 of the space of d x d skew matrices.
int skew_dimension(int d) noexcept;

/// Upper-triangle entries (row-major, k < l) of a skew matrix.
Vector skew_to_vector(const Matrix& a);

/// Inverse of skew_to_vector.
Matrix skew_from_vector(const Vector& v, int d);

}  // namespace metricflow
