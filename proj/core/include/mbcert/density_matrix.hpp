#pragma once

#include <complex>

#include <Eigen/Dense>

#include "mbcert/linalg.hpp"

namespace mbcert {

/// Two-ancilla density matrix over |00>, |01>, |10>, |11>; the first index
/// is ancilla A. Construction checks Hermiticity, unit trace and PSD.
class AncillaDensityMatrix {
 public:
  static AncillaDensityMatrix from_matrix(const Eigen::Matrix4cd& m);
  static AncillaDensityMatrix from_pure(const Eigen::Vector4cd& ket);
  /// (e^{i theta}|00> + r|11>) / sqrt(1 + |r|^2)
  static AncillaDensityMatrix correlated_pair(cplx r, double theta = 0.0);
  static AncillaDensityMatrix maximally_mixed();
  /// w |Phi+><Phi+| + (1 - w) I/4
  static AncillaDensityMatrix werner(double w);

  static constexpr int index(int a, int b) { return 2 * a + b; }

  const Eigen::Matrix4cd& matrix() const { return m_; }
  /// rho_{ij, i'j'}
  cplx operator()(int i, int j, int ip, int jp) const { return m_(index(i, j), index(ip, jp)); }
  double trace() const { return m_.trace().real(); }

 private:
  explicit AncillaDensityMatrix(const Eigen::Matrix4cd& m) : m_(m) {}
  Eigen::Matrix4cd m_;
};

}  // namespace mbcert
