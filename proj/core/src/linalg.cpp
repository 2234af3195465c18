#include "metricflow/linalg.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace metricflow {

namespace {

// Padé numerator U (odd part) and denominator V (even part); the approximant
// is (V - U)^{-1} (V + U).
void pade3(const Matrix& a, Matrix& u, Matrix& v) {
  static constexpr std::array<double, 4> b = {120.0, 60.0, 12.0, 1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  u = a * (b[3] * a2 + b[1] * id);
  v = b[2] * a2 + b[0] * id;
}

void pade5(const Matrix& a, Matrix& u, Matrix& v) {
  static constexpr std::array<double, 6> b = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade7(const Matrix& a, Matrix& u, Matrix& v) {
  static constexpr std::array<double, 8> b = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade9(const Matrix& a, Matrix& u, Matrix& v) {
  static constexpr std::array<double, 10> b = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                                               2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix a8 = a6 * a2;
  u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade13(const Matrix& a, Matrix& u, Matrix& v) {
  static constexpr std::array<double, 14> b = {64764752532480000.0,
                                               32382376266240000.0,
                                               7771770303897600.0,
                                               1187353796428800.0,
                                               129060195264000.0,
                                               10559470521600.0,
                                               670442572800.0,
                                               33522128640.0,
                                               1323241920.0,
                                               40840800.0,
                                               960960.0,
                                               16380.0,
                                               182.0,
                                               1.0};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix w1 = b[13] * a6 + b[11] * a4 + b[9] * a2;
  const Matrix w2 = b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u = a * (a6 * w1 + w2);
  const Matrix z1 = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v = a6 * z1 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

double one_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix must be square");
  if (a.size() == 0) return a;
  if (!a.allFinite()) throw std::invalid_argument("expm: non-finite input");

  const double norm = one_norm(a);
  Matrix u;
  Matrix v;
  int squarings = 0;
  if (norm < 1.495585217958292e-2) {
    pade3(a, u, v);
  } else if (norm < 2.539398330063230e-1) {
    pade5(a, u, v);
  } else if (norm < 9.504178996162932e-1) {
    pade7(a, u, v);
  } else if (norm < 2.097847961257068e0) {
    pade9(a, u, v);
  } else {
    constexpr double theta13 = 5.371920351148152e0;
    if (norm > theta13) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    pade13(a * std::ldexp(1.0, -squarings), u, v);
  }
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double skew_defect(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("skew_defect: matrix must be square");
  return max_abs(a + a.transpose());
}

Matrix skew_part(const Matrix& a) { return 0.5 * (a - a.transpose()); }

Matrix block_metric(const Matrix& g) {
  if (g.rows() != g.cols()) throw std::invalid_argument("block_metric: G must be square");
  const auto n = g.rows();
  Matrix w = Matrix::Zero(2 * n, 2 * n);
  w.topRightCorner(n, n) = g;
  w.bottomLeftCorner(n, n) = -g.transpose();
  return w;
}

Matrix canonical_metric(int n) { return block_metric(Matrix::Identity(n, n)); }

int skew_dimension(int d) noexcept { return d * (d - 1) / 2; }

Vector skew_to_vector(const Matrix& a) {
  const int d = static_cast<int>(a.rows());
  Vector v(skew_dimension(d));
  int idx = 0;
  for (int k = 0; k < d; ++k)
    for (int l = k + 1; l < d; ++l) v(idx++) = a(k, l);
  return v;
}

Matrix skew_from_vector(const Vector& v, int d) {
  if (v.size() != skew_dimension(d)) throw std::invalid_argument("skew_from_vector: size mismatch");
  Matrix a = Matrix::Zero(d, d);
  int idx = 0;
  for (int k = 0; k < d; ++k)
    for (int l = k + 1; l < d; ++l) {
      a(k, l) = v(idx);
      a(l, k) = -v(idx);
      ++idx;
    }
  return a;
}

}  // namespace metricflow
