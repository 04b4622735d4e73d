#pragma once

#include <array>
#include <span>

#include "latticeblocks/lattice/params.hpp"
#include "latticeblocks/lattice/pdf_field.hpp"
#include "latticeblocks/lattice/stencil.hpp"

namespace latticeblocks::lattice {

struct Macroscopic {
  double rho = 0;
  Vec3d u{0, 0, 0};
  double p = 0;
};

/// Centered incompressible equilibrium for one direction, given the density
/// perturbation drho = rho - rho0.
template <typename T>
inline T equilibrium_centered(std::size_t i, T drho, T ux, T uy, T uz, T rho0) {
  const auto& e = D3Q19::e[i];
  const T eu = T(e[0]) * ux + T(e[1]) * uy + T(e[2]) * uz;
  const T usq = ux * ux + uy * uy + uz * uz;
  return T(D3Q19::w[i]) * (drho + rho0 * (T(3) * eu + T(4.5) * eu * eu - T(1.5) * usq));
}

/// All 19 centered equilibrium values for (rho, u).
template <typename T>
std::array<T, D3Q19::Q> equilibrium(T rho, const std::array<T, 3>& u, T rho0) {
  std::array<T, D3Q19::Q> out{};
  const T drho = rho - rho0;
  for (std::size_t i = 0; i < D3Q19::Q; ++i) out[i] = equilibrium_centered(i, drho, u[0], u[1], u[2], rho0);
  return out;
}

/// Density, velocity and pressure of one cell's centered PDFs.
template <typename T>
Macroscopic moments(std::span<const T, D3Q19::Q> f, double rho0) {
  T drho = 0, jx = 0, jy = 0, jz = 0;
  for (std::size_t i = 0; i < D3Q19::Q; ++i) {
    drho += f[i];
    jx += T(D3Q19::e[i][0]) * f[i];
    jy += T(D3Q19::e[i][1]) * f[i];
    jz += T(D3Q19::e[i][2]) * f[i];
  }
  Macroscopic m;
  m.rho = rho0 + double(drho);
  m.u = {double(jx) / rho0, double(jy) / rho0, double(jz) / rho0};
  m.p = D3Q19::cs2 * m.rho;
  return m;
}

template <typename T>
Macroscopic cell_moments(const PdfField<T>& field, int x, int y, int z, double rho0) {
  std::array<T, D3Q19::Q> f;
  for (std::size_t i = 0; i < D3Q19::Q; ++i) f[i] = field.at(x, y, z, i);
  return moments<T>(std::span<const T, D3Q19::Q>(f), rho0);
}

/// Reflected-PDF correction of a moving wall, 6 w_i rho0 (e_i . u_w), for the
/// pulled direction i.
template <typename T>
inline T bounce_back_term(std::size_t i, const Vec3d& wall_velocity, double rho0) {
  return T(6.0 / D3Q19::weight_denominator[i] * rho0 * dot(D3Q19::e[i], wall_velocity));
}

// Raw kernels shared by the host field and the staged device. Pointers cover
// grid.total() * 19 scalars in layout L.
template <typename T, Layout L>
void collide_stream_pull_raw(const CellGrid& grid, const CellKind* kinds, const T* src, T* dst, T omega, T rho0);

template <typename T, Layout L>
void apply_bounce_links_raw(const CellGrid& grid, std::span<const BounceLink> links, T* src, double rho0);

/// One fused pull-stream + BGK collision sweep: dst is written from src for
/// every interior fluid cell, then src and dst swap roles.
template <typename T>
void collide_stream_pull(PdfField<T>& field, const LbmParams& params);

/// Populates every wall slot that an interior fluid cell will pull with the
/// reflected post-collision value of that fluid cell.
template <typename T>
void bounce_back(PdfField<T>& field, const LbmParams& params);

template <typename T>
PdfField<T> layout_convert(const PdfField<T>& field, Layout target);

}  // namespace latticeblocks::lattice
