// Copyright 2026 The HTQ Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "htq/transform.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "test_util.hpp"

namespace htq {
namespace {

using testing::random_plane;

// Dense oracle: Sylvester matrix by the Kronecker/bit-parity identity
// H[r][c] = (-1)^popcount(r & c), independent of the recursive builder.
int parity_entry(std::size_t r, std::size_t c) { return __builtin_popcountll(r & c) % 2 ? -1 : 1; }

std::vector<double> dense_forward(const std::vector<double>& x, const std::vector<int>& alphas) {
  const std::size_t m = x.size();
  std::vector<double> a(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += parity_entry(j, i) * x[i];
    a[j] = std::ldexp(1.0, alphas[j]) / m * s;
  }
  return a;
}

// Solves H t = M x by Gaussian elimination with partial pivoting, i.e. an
// inverse that does not lean on orthogonality.
std::vector<double> dense_inverse(const std::vector<double>& a, const std::vector<int>& alphas) {
  const std::size_t m = a.size();
  std::vector<std::vector<double>> A(m, std::vector<double>(m + 1));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) A[j][i] = parity_entry(j, i);
    A[j][m] = a[j] / (std::ldexp(1.0, alphas[j]) / m);
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    }
    std::swap(A[col], A[piv]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      for (std::size_t k = col; k <= m; ++k) A[r][k] -= f * A[col][k];
    }
  }
  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = A[i][m] / A[i][i];
  return x;
}

std::vector<int> random_alphas(std::mt19937_64& rng, std::size_t m) {
  std::uniform_int_distribution<int> u(0, 6);
  std::vector<int> al(m);
  for (auto& a : al) a = u(rng);
  al[0] = 0;
  return al;
}

TEST(Hadamard, BaseCases) {
  const auto h1 = hadamard_matrix(1);
  EXPECT_EQ(h1(0, 0), 1);
  const auto h2 = hadamard_matrix(2);
  EXPECT_EQ(h2(0, 0), 1);
  EXPECT_EQ(h2(0, 1), 1);
  EXPECT_EQ(h2(1, 0), 1);
  EXPECT_EQ(h2(1, 1), -1);
}

TEST(Hadamard, OrthogonalForEveryOrder) {
  for (std::size_t m = 1; m <= kMaxOrder; m *= 2) {
    const auto h = hadamard_matrix(m);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        long dot = 0;
        for (std::size_t k = 0; k < m; ++k) dot += h(r, k) * h(c, k);
        EXPECT_EQ(dot, r == c ? static_cast<long>(m) : 0L) << "M=" << m;
      }
    }
  }
}

TEST(Hadamard, EntriesAndRecursion) {
  for (std::size_t m = 1; m <= kMaxOrder; m *= 2) {
    const auto h = hadamard_matrix(m);
    for (std::size_t c = 0; c < m; ++c) EXPECT_EQ(h(0, c), 1);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) ASSERT_EQ(h(r, c), parity_entry(r, c));
    }
    if (m > 1) {
      const auto half = hadamard_matrix(m / 2);
      const std::size_t k = m / 2;
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
          EXPECT_EQ(h(r, c), half(r, c));
          EXPECT_EQ(h(r, c + k), half(r, c));
          EXPECT_EQ(h(r + k, c), half(r, c));
          EXPECT_EQ(h(r + k, c + k), -half(r, c));
        }
      }
    }
  }
}

TEST(Hadamard, RejectsBadOrders) {
  for (std::size_t m : {0u, 3u, 6u, 12u, 63u}) {
    try {
      hadamard_matrix(m);
      FAIL() << m;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNonPowerOfTwo);
    }
  }
  try {
    hadamard_matrix(128);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOrderTooLarge);
  }
}

TEST(Fwht, ParsevalProperty) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = std::size_t{1} << (trial % 7);
    std::vector<double> x(m);
    for (auto& v : x) v = n(rng);
    double e_in = 0.0;
    for (double v : x) e_in += v * v;
    fwht_inplace(x);
    double e_out = 0.0;
    for (double v : x) e_out += v * v;
    EXPECT_NEAR(e_out, m * e_in, 1e-12 * m * e_in);
  }
}

TEST(ForwardRows, ConstantSegmentHasNoAc) {
  ImagePlane img(4, 1, 0.37);
  const std::vector<int> al = {0, 3, 2, 3};
  const auto ch = forward_rows(img, 4, al);
  EXPECT_DOUBLE_EQ(ch.planes[0][0], 0.37);
  for (std::size_t j = 1; j < 4; ++j) EXPECT_EQ(ch.planes[j][0], 0.0);
  EXPECT_DOUBLE_EQ(ch.gains[1], 2.0);
  EXPECT_DOUBLE_EQ(ch.gains[2], 1.0);
}

TEST(ForwardRows, ImpulseSpreadsEqually) {
  ImagePlane img(4, 1, 0.0);
  img.data[0] = 1.0;
  const std::vector<int> al = {0, 0, 0, 0};
  const auto ch = forward_rows(img, 4, al);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(ch.planes[j][0], 0.25);
}

TEST(ForwardRows, ClipsWidthAndKeepsHeight) {
  std::mt19937_64 rng(3);
  const auto img = random_plane(rng, 11, 5);
  const std::vector<int> al = {0, 3, 2, 3};
  const auto ch = forward_rows(img, 4, al);
  EXPECT_EQ(ch.width_segments, 2u);
  EXPECT_EQ(ch.height, 5u);
  const auto back = inverse_rows(ch);
  EXPECT_EQ(back.width, 8u);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(back.at(r, c), img.at(r, c), 1e-12);
  }
}

TEST(ForwardRows, Errors) {
  ImagePlane narrow(3, 2, 0.5);
  const std::vector<int> al = {0, 3, 2, 3};
  try {
    forward_rows(narrow, 4, al);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWidthTooSmall);
  }
  const std::vector<int> neg = {0, -1, 2, 3};
  try {
    forward_rows(ImagePlane(8, 1, 0.5), 4, neg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAlphaNegative);
  }
}

TEST(ForwardRows, MatchesDenseOracle) {
  std::mt19937_64 rng(5);
  for (std::size_t m : {1u, 2u, 4u, 8u, 16u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto img = random_plane(rng, 8 * m / (m > 8 ? 2 : 1), 8);
      const auto al = random_alphas(rng, m);
      const auto ch = forward_rows(img, m, al);
      for (std::size_t r = 0; r < img.height; ++r) {
        for (std::size_t s = 0; s < ch.width_segments; ++s) {
          std::vector<double> x(img.row(r).begin() + s * m, img.row(r).begin() + (s + 1) * m);
          const auto a = dense_forward(x, al);
          for (std::size_t j = 0; j < m; ++j) {
            EXPECT_NEAR(ch.planes[j][r * ch.width_segments + s], a[j], 1e-12);
          }
        }
      }
    }
  }
}

TEST(InverseRows, MatchesDenseOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (std::size_t m : {2u, 4u, 8u, 16u}) {
    ChannelPlanes ch;
    ch.m = m;
    ch.width_segments = 3;
    ch.height = 4;
    const auto al = random_alphas(rng, m);
    ch.gains = channel_gains(al);
    ch.planes.assign(m, std::vector<double>(ch.segments()));
    for (auto& p : ch.planes) {
      for (auto& v : p) v = u(rng);
    }
    const auto img = inverse_rows(ch);
    for (std::size_t idx = 0; idx < ch.segments(); ++idx) {
      std::vector<double> a(m);
      for (std::size_t j = 0; j < m; ++j) a[j] = ch.planes[j][idx];
      const auto x = dense_inverse(a, al);
      const std::size_t r = idx / ch.width_segments, s = idx % ch.width_segments;
      for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(img.at(r, s * m + i), x[i], 1e-12);
    }
  }
}

TEST(InverseRows, DcOnly) {
  ChannelPlanes ch;
  ch.m = 4;
  ch.width_segments = 1;
  ch.height = 1;
  ch.gains = channel_gains(std::vector<int>{0, 3, 2, 3});
  ch.planes = {{0.5}, {0.0}, {0.0}, {0.0}};
  const auto img = inverse_rows(ch);
  for (double v : img.data) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(InverseRows, ZeroGainRejected) {
  ChannelPlanes ch;
  ch.m = 2;
  ch.width_segments = 1;
  ch.height = 1;
  ch.gains = {0.5, 0.0};
  ch.planes = {{0.5}, {0.0}};
  try {
    inverse_rows(ch);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroGain);
  }
}

TEST(RoundTrip, IdentityForAnyAlpha) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = std::size_t{1} << (trial % 5);
    const std::size_t w = m + testing::random_size(rng, 0, 40);
    const auto img = random_plane(rng, w, testing::random_size(rng, 1, 12));
    const auto al = random_alphas(rng, m);
    const auto back = inverse_rows(forward_rows(img, m, al));
    ASSERT_EQ(back.width, (w / m) * m);
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < back.width; ++c) ASSERT_NEAR(back.at(r, c), img.at(r, c), 1e-12);
    }
  }
}

TEST(RoundTrip, DcChannelStaysInUnitRange) {
  std::mt19937_64 rng(17);
  for (std::size_t m : {1u, 2u, 4u, 8u, 16u, 32u, 64u}) {
    const auto img = random_plane(rng, 2 * m, 6);
    const auto ch = forward_rows(img, m, std::vector<int>(m, 0));
    for (double v : ch.planes[0]) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(RoundTrip, ConstantImagePlanes) {
  const auto ch = forward_rows(ImagePlane(16, 3, 0.8), 4, std::vector<int>{0, 3, 2, 3});
  for (double v : ch.planes[0]) EXPECT_DOUBLE_EQ(v, 0.8);
  for (std::size_t j = 1; j < 4; ++j) {
    for (double v : ch.planes[j]) EXPECT_EQ(v, 0.0);
  }
}

}  // namespace
}  // namespace htq
