#include <gtest/gtest.h>

#include "swapsym/linalg.hpp"

using namespace swapsym;

TEST(Linalg, RequirePsdAcceptsAndSymmetrizes) {
  Matrix m(2, 2);
  m << 0.04, 0.01, 0.01 + 5e-13, 0.09;
  const Matrix s = require_psd(m, "A");
  EXPECT_EQ(s(0, 1), s(1, 0));
}

TEST(Linalg, RequirePsdToleranceBoundary) {
  // smallest eigenvalue -5e-13 lies in [-1e-12, 0): accepted
  Matrix near(2, 2);
  near << 1.0, 1.0, 1.0, 1.0 - 1e-12;
  EXPECT_NO_THROW(require_psd(near, "A"));
  Matrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1e-9;
  EXPECT_THROW(require_psd(bad, "A"), InputError);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(require_psd(asym, "A"), InputError);
  Matrix nan(1, 1);
  nan << std::nan("");
  EXPECT_THROW(require_psd(nan, "A"), InputError);
}

TEST(Linalg, PsdSqrtSquaresBackAndClips) {
  Matrix m(3, 3);
  m << 0.09, 0.03, 0.01, 0.03, 0.04, 0.0, 0.01, 0.0, 0.0625;
  const Matrix r = psd_sqrt(m);
  EXPECT_LT((r * r - m).cwiseAbs().maxCoeff(), 1e-15);
  Matrix near(2, 2);
  near << 1.0, 1.0, 1.0, 1.0 - 1e-12;
  const Matrix rr = psd_sqrt(near);
  EXPECT_TRUE(rr.allFinite());
}

TEST(Linalg, BilinearIsNonConjugating) {
  ComplexVector w(2);
  w << Complex(0, 1), Complex(1, 0);
  Matrix m = Matrix::Identity(2, 2);
  // i^2 + 1 = 0 (a Hermitian form would give 2)
  EXPECT_EQ(bilinear(w, m), Complex(0, 0));
}

TEST(Linalg, SwapHelpers) {
  const Matrix p = swap_matrix(3, 0, 2);
  Vector x(3);
  x << 1, 2, 3;
  EXPECT_EQ(p * x, swapped(x, 0, 2));
  EXPECT_EQ((p * p - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(unit(3, 1), Vector::Unit(3, 1));
}
