#include "latticeblocks/lattice/kernels.hpp"

#include <utility>

namespace latticeblocks::lattice {

std::vector<BounceLink> CellFlags::bounce_links() const {
  std::vector<BounceLink> links;
  const auto& n = grid_.interior();
  for (int z = 0; z < n.z; ++z) {
    for (int y = 0; y < n.y; ++y) {
      for (int x = 0; x < n.x; ++x) {
        const auto c = grid_.index(x, y, z);
        if (kind_[c] != CellKind::Fluid) continue;
        for (std::size_t i = 1; i < D3Q19::Q; ++i) {
          const auto w = std::size_t(std::ptrdiff_t(c) - grid_.offset(D3Q19::e[i]));
          if (kind_[w] == CellKind::Wall) {
            links.push_back({w, c, std::uint8_t(i), wall_velocity_[w]});
          }
        }
      }
    }
  }
  return links;
}

std::size_t CellFlags::interior_fluid_cells() const {
  std::size_t count = 0;
  const auto& n = grid_.interior();
  for (int z = 0; z < n.z; ++z)
    for (int y = 0; y < n.y; ++y)
      for (int x = 0; x < n.x; ++x)
        if (kind(x, y, z) == CellKind::Fluid) ++count;
  return count;
}

template <typename T, Layout L>
void collide_stream_pull_raw(const CellGrid& grid, const CellKind* kinds, const T* src, T* dst, T omega, T rho0) {
  constexpr std::size_t Q = D3Q19::Q;
  const std::size_t ncells = grid.total();
  const auto& n = grid.interior();

  std::array<std::ptrdiff_t, Q> off;
  for (std::size_t i = 0; i < Q; ++i) off[i] = grid.offset(D3Q19::e[i]);

  const T keep = T(1) - omega;
  const T inv_rho0 = T(1) / rho0;

  for (int z = 0; z < n.z; ++z) {
    for (int y = 0; y < n.y; ++y) {
      std::size_t c = grid.index(0, y, z);
      for (int x = 0; x < n.x; ++x, ++c) {
        if (kinds[c] != CellKind::Fluid) continue;

        T f[Q];
        for (std::size_t i = 0; i < Q; ++i) {
          f[i] = src[slot<L>(std::size_t(std::ptrdiff_t(c) - off[i]), i, ncells)];
        }

        T drho = 0, jx = 0, jy = 0, jz = 0;
        for (std::size_t i = 0; i < Q; ++i) {
          drho += f[i];
          jx += T(D3Q19::e[i][0]) * f[i];
          jy += T(D3Q19::e[i][1]) * f[i];
          jz += T(D3Q19::e[i][2]) * f[i];
        }
        const T ux = jx * inv_rho0;
        const T uy = jy * inv_rho0;
        const T uz = jz * inv_rho0;

        for (std::size_t i = 0; i < Q; ++i) {
          const T feq = equilibrium_centered(i, drho, ux, uy, uz, rho0);
          dst[slot<L>(c, i, ncells)] = keep * f[i] + omega * feq;
        }
      }
    }
  }
}

template <typename T, Layout L>
void apply_bounce_links_raw(const CellGrid& grid, std::span<const BounceLink> links, T* src, double rho0) {
  const std::size_t ncells = grid.total();
  for (const auto& link : links) {
    const T reflected = src[slot<L>(link.fluid_cell, D3Q19::opposite[link.dir], ncells)];
    src[slot<L>(link.wall_cell, link.dir, ncells)] = reflected + bounce_back_term<T>(link.dir, link.wall_velocity, rho0);
  }
}

template <typename T>
void collide_stream_pull(PdfField<T>& field, const LbmParams& params) {
  if (field.empty()) throw UsageError("collide_stream_pull: field has zero extent");
  const T omega = T(1) / T(params.tau);
  const T rho0 = T(params.rho0);
  const auto kinds = std::as_const(field).flags().kinds().data();
  if (field.layout() == Layout::AoS) {
    collide_stream_pull_raw<T, Layout::AoS>(field.grid(), kinds, field.src().data(), field.dst().data(), omega, rho0);
  } else {
    collide_stream_pull_raw<T, Layout::SoA>(field.grid(), kinds, field.src().data(), field.dst().data(), omega, rho0);
  }
  field.swap();
}

template <typename T>
void bounce_back(PdfField<T>& field, const LbmParams& params) {
  const auto& links = field.bounce_links();
  if (field.layout() == Layout::AoS) {
    apply_bounce_links_raw<T, Layout::AoS>(field.grid(), links, field.src().data(), params.rho0);
  } else {
    apply_bounce_links_raw<T, Layout::SoA>(field.grid(), links, field.src().data(), params.rho0);
  }
}

template <typename T>
PdfField<T> layout_convert(const PdfField<T>& field, Layout target) {
  if (field.empty()) return field;
  PdfField<T> out(field.extent(), target);
  out.flags() = field.flags();
  const std::size_t ncells = field.grid().total();
  for (std::size_t c = 0; c < ncells; ++c) {
    for (std::size_t i = 0; i < D3Q19::Q; ++i) {
      const auto from = slot(field.layout(), c, i, ncells);
      const auto to = slot(target, c, i, ncells);
      out.src()[to] = field.src()[from];
      out.dst()[to] = field.dst()[from];
    }
  }
  return out;
}

template class PdfField<float>;
template class PdfField<double>;

#define LATTICEBLOCKS_INSTANTIATE(T)                                                                          \
  template void collide_stream_pull_raw<T, Layout::AoS>(const CellGrid&, const CellKind*, const T*, T*, T, T); \
  template void collide_stream_pull_raw<T, Layout::SoA>(const CellGrid&, const CellKind*, const T*, T*, T, T); \
  template void apply_bounce_links_raw<T, Layout::AoS>(const CellGrid&, std::span<const BounceLink>, T*, double); \
  template void apply_bounce_links_raw<T, Layout::SoA>(const CellGrid&, std::span<const BounceLink>, T*, double); \
  template void collide_stream_pull<T>(PdfField<T>&, const LbmParams&);                                       \
  template void bounce_back<T>(PdfField<T>&, const LbmParams&);                                               \
  template PdfField<T> layout_convert<T>(const PdfField<T>&, Layout);

LATTICEBLOCKS_INSTANTIATE(float)
LATTICEBLOCKS_INSTANTIATE(double)

#undef LATTICEBLOCKS_INSTANTIATE

}  // namespace latticeblocks::lattice
