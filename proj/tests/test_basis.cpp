#include "dpq2p1/basis.hpp"

#include <gtest/gtest.h>

using namespace dpq2p1;

namespace {

const Vec2 kSamples[] = {{0.3, -0.7}, {-0.91, 0.12}, {0.55, 0.55}, {0.0, 0.0}, {1.0, -1.0}};

}  // namespace

TEST(BasisQ2, KroneckerPropertyAtNodes) {
  for (int k = 0; k < 9; ++k) {
    const auto v = ReferenceBasisQ2::values(reference_node(k));
    for (int j = 0; j < 9; ++j) EXPECT_NEAR(v[j], j == k ? 1.0 : 0.0, 1e-15);
  }
}

TEST(BasisQ2, PartitionOfUnityAndLinearReproduction) {
  for (const Vec2& x : kSamples) {
    const auto v = ReferenceBasisQ2::values(x);
    const auto g = ReferenceBasisQ2::gradients(x);
    double sum = 0.0;
    Vec2 lin = Vec2::Zero();
    Vec2 gsum = Vec2::Zero();
    for (int k = 0; k < 9; ++k) {
      sum += v[k];
      lin += v[k] * reference_node(k);
      gsum += g[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_NEAR((lin - x).norm(), 0.0, 1e-14);
    EXPECT_NEAR(gsum.norm(), 0.0, 1e-13);
  }
}

TEST(BasisQ2, GradientsAndHessiansMatchFiniteDifferences) {
  const double h = 1e-6;
  for (const Vec2& x : kSamples) {
    const auto g = ReferenceBasisQ2::gradients(x);
    const auto H = ReferenceBasisQ2::hessians(x);
    for (int d = 0; d < 2; ++d) {
      const Vec2 e = Vec2::Unit(d) * h;
      const auto vp = ReferenceBasisQ2::values(x + e);
      const auto vm = ReferenceBasisQ2::values(x - e);
      const auto gp = ReferenceBasisQ2::gradients(x + e);
      const auto gm = ReferenceBasisQ2::gradients(x - e);
      for (int k = 0; k < 9; ++k) {
        EXPECT_NEAR(g[k](d), (vp[k] - vm[k]) / (2 * h), 1e-8);
        EXPECT_NEAR((H[k].col(d) - (gp[k] - gm[k]) / (2 * h)).norm(), 0.0, 1e-7);
      }
    }
  }
}

TEST(BasisQ1, VertexInterpolationAndDerivatives) {
  for (int k = 0; k < 4; ++k) {
    const auto v = ReferenceBasisQ1::values(reference_node(k));
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(v[j], j == k ? 1.0 : 0.0, 1e-15);
  }
  const double h = 1e-6;
  for (const Vec2& x : kSamples) {
    const auto g = ReferenceBasisQ1::gradients(x);
    const auto H = ReferenceBasisQ1::hessians(x);
    for (int d = 0; d < 2; ++d) {
      const Vec2 e = Vec2::Unit(d) * h;
      const auto vp = ReferenceBasisQ1::values(x + e);
      const auto vm = ReferenceBasisQ1::values(x - e);
      for (int k = 0; k < 4; ++k) {
        EXPECT_NEAR(g[k](d), (vp[k] - vm[k]) / (2 * h), 1e-9);
        EXPECT_NEAR(H[k](d, d), 0.0, 1e-15);
      }
    }
  }
}

TEST(BasisP1, ValuesAreOneAndReferenceCoordinates) {
  const auto v = ReferenceBasisP1::values({0.25, -0.5});
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(v[1], 0.25);
  EXPECT_EQ(v[2], -0.5);
}
