#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "latticeblocks/lattice/kernels.hpp"

using namespace latticeblocks::lattice;

namespace {

// Exact rational arithmetic on (numerator, denominator) pairs for the
// isotropy sums.
struct Ratio {
  long long n = 0;
  long long d = 1;
};

Ratio add(Ratio a, Ratio b) {
  Ratio r{a.n * b.d + b.n * a.d, a.d * b.d};
  const long long g = std::gcd(r.n < 0 ? -r.n : r.n, r.d);
  if (g > 1) {
    r.n /= g;
    r.d /= g;
  }
  return r;
}

bool equals(Ratio a, long long n, long long d) { return a.n * d == n * a.d; }

// Periodic wrap of a single block: ghost layer copied from the opposite side.
template <typename T>
void fill_periodic_ghosts(PdfField<T>& f) {
  const auto& n = f.extent();
  for (int z = -1; z <= n.z; ++z)
    for (int y = -1; y <= n.y; ++y)
      for (int x = -1; x <= n.x; ++x) {
        if (f.grid().is_interior(x, y, z)) continue;
        const int sx = (x + n.x) % n.x, sy = (y + n.y) % n.y, sz = (z + n.z) % n.z;
        for (std::size_t i = 0; i < D3Q19::Q; ++i) f.at(x, y, z, i) = f.at(sx, sy, sz, i);
      }
}

template <typename T>
void randomize(PdfField<T>& f, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  const auto& n = f.extent();
  for (int z = 0; z < n.z; ++z)
    for (int y = 0; y < n.y; ++y)
      for (int x = 0; x < n.x; ++x)
        for (std::size_t i = 0; i < D3Q19::Q; ++i) f.at(x, y, z, i) = T(dist(rng));
}

}  // namespace

TEST_CASE("stencil weights sum to one and velocities are distinct") {
  Ratio sum;
  std::set<Vec3i> seen;
  for (std::size_t i = 0; i < D3Q19::Q; ++i) {
    sum = add(sum, {1, D3Q19::weight_denominator[i]});
    seen.insert(D3Q19::e[i]);
  }
  CHECK(equals(sum, 1, 1));
  CHECK(seen.size() == 19);
}

TEST_CASE("stencil isotropy moments are exact") {
  for (int a = 0; a < 3; ++a) {
    Ratio first;
    for (std::size_t i = 0; i < D3Q19::Q; ++i) first = add(first, {D3Q19::e[i][a], D3Q19::weight_denominator[i]});
    CHECK(equals(first, 0, 1));
    for (int b = 0; b < 3; ++b) {
      Ratio second;
      for (std::size_t i = 0; i < D3Q19::Q; ++i) {
        second = add(second, {D3Q19::e[i][a] * D3Q19::e[i][b], D3Q19::weight_denominator[i]});
      }
      CHECK(equals(second, a == b ? 1 : 0, 3));
    }
  }
  // Fourth moment: sum w e_a^2 e_b^2 = 1/9 for a != b, 1/3 for a == b.
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      Ratio fourth;
      for (std::size_t i = 0; i < D3Q19::Q; ++i) {
        const auto& e = D3Q19::e[i];
        fourth = add(fourth, {e[a] * e[a] * e[b] * e[b], D3Q19::weight_denominator[i]});
      }
      CHECK(equals(fourth, 1, a == b ? 3 : 9));
    }
  }
}

TEST_CASE("opposite directions reverse the velocity") {
  CHECK(D3Q19::opposite[0] == 0);
  for (std::size_t i = 1; i < D3Q19::Q; ++i) {
    const auto j = D3Q19::opposite[i];
    CHECK(D3Q19::opposite[j] == i);
    for (int a = 0; a < 3; ++a) CHECK(D3Q19::e[j][a] == -D3Q19::e[i][a]);
  }
  CHECK(D3Q19::e[7] == Vec3i{1, 1, 0});
  CHECK(D3Q19::e[18] == Vec3i{0, -1, 1});
}

TEST_CASE("equilibrium of a +x face direction matches the hand value") {
  // rho = rho0 = 1, u = (0.1, 0, 0):
  // (1/18)(3 * 0.1 + 4.5 * 0.01 - 1.5 * 0.01) = 0.33 / 18
  const auto feq = equilibrium<double>(1.0, {0.1, 0.0, 0.0}, 1.0);
  CHECK(feq[1] == doctest::Approx(0.0183333).epsilon(1e-6));
  CHECK(feq[1] == doctest::Approx(0.33 / 18.0).epsilon(1e-15));
  CHECK(feq[0] == doctest::Approx(-1.5 * 0.01 / 3.0).epsilon(1e-15));
}

TEST_CASE("moments of the equilibrium return density and velocity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> du(-0.1, 0.1), dr(0.9, 1.1);
  for (int k = 0; k < 50; ++k) {
    const double rho0 = dr(rng);
    const double rho = dr(rng);
    const std::array<double, 3> u{du(rng), du(rng), du(rng)};
    const auto feq = equilibrium<double>(rho, u, rho0);
    const auto m = moments<double>(std::span<const double, 19>(feq), rho0);
    CHECK(m.rho == doctest::Approx(rho).epsilon(1e-14));
    for (int a = 0; a < 3; ++a) CHECK(m.u[a] == doctest::Approx(u[a]).epsilon(1e-13));
    CHECK(m.p == doctest::Approx(rho / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("tau = 1 produces the equilibrium of the pulled values") {
  PdfField<double> f({5, 4, 3}, Layout::AoS);
  randomize(f, 11, 0.01);
  fill_periodic_ghosts(f);
  const auto before = f;
  collide_stream_pull(f, {1.0, 1.0, Precision::DP});
  const auto& n = f.extent();
  for (int z = 0; z < n.z; ++z)
    for (int y = 0; y < n.y; ++y)
      for (int x = 0; x < n.x; ++x) {
        // Oracle: pull by hand, then the standard (non-centered) equilibrium.
        double rho = 1.0, j[3] = {0, 0, 0};
        double pulled[19];
        for (std::size_t i = 0; i < 19; ++i) {
          const auto& e = D3Q19::e[i];
          pulled[i] = before.at(x - e[0], y - e[1], z - e[2], i);
          rho += pulled[i];
          for (int a = 0; a < 3; ++a) j[a] += e[a] * pulled[i];
        }
        for (std::size_t i = 0; i < 19; ++i) {
          const auto& e = D3Q19::e[i];
          const double eu = e[0] * j[0] + e[1] * j[1] + e[2] * j[2];
          const double usq = j[0] * j[0] + j[1] * j[1] + j[2] * j[2];
          const double w = 1.0 / D3Q19::weight_denominator[i];
          const double full = w * (rho + 3 * eu + 4.5 * eu * eu - 1.5 * usq);
          CHECK(std::abs(f.at(x, y, z, i) - (full - w)) <= 1e-15);
        }
      }
}

TEST_CASE("AoS and SoA sweeps are bitwise identical") {
  PdfField<double> aos({6, 5, 4}, Layout::AoS);
  randomize(aos, 5, 0.02);
  aos.flags().set(2, 2, 2, CellKind::Wall);
  auto soa = layout_convert(aos, Layout::SoA);
  const LbmParams params{0.7, 1.0, Precision::DP};
  for (int step = 0; step < 10; ++step) {
    fill_periodic_ghosts(aos);
    fill_periodic_ghosts(soa);
    bounce_back(aos, params);
    bounce_back(soa, params);
    collide_stream_pull(aos, params);
    collide_stream_pull(soa, params);
  }
  const auto back = layout_convert(soa, Layout::AoS);
  const auto& n = aos.extent();
  for (int z = 0; z < n.z; ++z)
    for (int y = 0; y < n.y; ++y)
      for (int x = 0; x < n.x; ++x)
        for (std::size_t i = 0; i < 19; ++i) CHECK(aos.at(x, y, z, i) == back.at(x, y, z, i));
}

TEST_CASE("periodic single block conserves mass and momentum") {
  PdfField<double> f({6, 6, 6}, Layout::SoA);
  randomize(f, 9, 0.01);
  auto totals = [&] {
    std::array<double, 4> t{0, 0, 0, 0};
    for (int z = 0; z < 6; ++z)
      for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
          const auto m = cell_moments(f, x, y, z, 1.0);
          t[0] += m.rho - 1.0;
          for (int a = 0; a < 3; ++a) t[a + 1] += m.u[a];
        }
    return t;
  };
  const auto start = totals();
  for (int step = 0; step < 50; ++step) {
    fill_periodic_ghosts(f);
    collide_stream_pull(f, {0.8, 1.0, Precision::DP});
  }
  const auto end = totals();
  for (int k = 0; k < 4; ++k) CHECK(std::abs(end[k] - start[k]) <= 1e-13);
}

TEST_CASE("bounce-back reflects and adds the moving-wall term") {
  PdfField<double> f({3, 3, 3}, Layout::AoS);
  randomize(f, 1, 0.01);
  const Vec3d uw{0.05, 0.0, 0.0};
  for (int z = -1; z <= 3; ++z)
    for (int x = -1; x <= 3; ++x) f.flags().set(x, 3, z, CellKind::Wall, uw);
  bounce_back(f, {0.8, 1.0, Precision::DP});
  // Fluid cell (1, 2, 1) pulls direction 4 = (0, -1, 0) from wall (1, 3, 1).
  const double reflected = f.at(1, 2, 1, D3Q19::opposite[4]);
  CHECK(f.at(1, 3, 1, 4) == reflected);
  // Direction 8 = (-1, -1, 0) from (2, 3, 1) into (1, 2, 1): 6 w rho0 (e . u_w)
  const double expected = f.at(1, 2, 1, D3Q19::opposite[8]) + 6.0 / 36.0 * (-1.0) * 0.05;
  CHECK(f.at(2, 3, 1, 8) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("precision and parameter validation") {
  CHECK(parse_precision("sp") == Precision::SP);
  CHECK_THROWS_AS(parse_precision("half"), latticeblocks::ConfigError);
  CHECK_THROWS_AS((LbmParams{0.5, 1.0, Precision::DP}.validate()), latticeblocks::ConfigError);
  CHECK_THROWS_AS((PdfField<double>({0, 1, 1}, Layout::AoS)), latticeblocks::UsageError);
  CHECK(LbmParams{0.8, 1.0, Precision::DP}.viscosity() == doctest::Approx(0.1));
}
