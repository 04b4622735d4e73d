#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "latticeblocks/lattice/pdf_field.hpp"
#include "latticeblocks/lattice/stencil.hpp"

namespace latticeblocks::comm {

using lattice::D3Q19;
using lattice::Extent3;

/// Communication direction: the 6 faces and 12 edges of a block, numbered like
/// the stencil direction pointing the same way (1..18).
enum class CommDirection : std::uint8_t {
  XP = 1, XM, YP, YM, ZP, ZM,
  XPYP, XMYM, XPYM, XMYP,
  XPZP, XMZM, XPZM, XMZP,
  YPZP, YMZM, YPZM, YMZP,
};

inline constexpr std::size_t kDirectionCount = 18;

constexpr std::size_t index(CommDirection d) { return std::size_t(d); }
constexpr CommDirection direction(std::size_t stencil_dir) { return CommDirection(stencil_dir); }
constexpr CommDirection opposite(CommDirection d) { return CommDirection(D3Q19::opposite[index(d)]); }
constexpr bool is_face(CommDirection d) { return index(d) <= 6; }
constexpr const lattice::Vec3i& vector(CommDirection d) { return D3Q19::e[index(d)]; }

constexpr std::array<CommDirection, kDirectionCount> all_directions() {
  std::array<CommDirection, kDirectionCount> out{};
  for (std::size_t i = 0; i < kDirectionCount; ++i) out[i] = CommDirection(i + 1);
  return out;
}

std::string name(CommDirection d);

namespace detail {
struct PdfList {
  std::array<std::uint8_t, 5> dirs{};
  std::size_t count = 0;
};

constexpr std::array<PdfList, D3Q19::Q> make_outgoing() {
  std::array<PdfList, D3Q19::Q> out{};
  for (std::size_t d = 1; d < D3Q19::Q; ++d) {
    for (std::size_t i = 1; i < D3Q19::Q; ++i) {
      bool match = true;
      for (int a = 0; a < 3; ++a) {
        if (D3Q19::e[d][a] != 0 && D3Q19::e[i][a] != D3Q19::e[d][a]) match = false;
      }
      if (match) out[d].dirs[out[d].count++] = std::uint8_t(i);
    }
  }
  return out;
}

inline constexpr auto kOutgoing = make_outgoing();
}  // namespace detail

/// Stencil directions that leave a block through side d (5 for faces, 1 for
/// edges), ascending.
constexpr std::span<const std::uint8_t> outgoing_pdfs(CommDirection d) {
  const auto& list = detail::kOutgoing[index(d)];
  return std::span<const std::uint8_t>(list.dirs.data(), list.count);
}

/// Box of local cell coordinates, half-open.
struct CellBox {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};

  std::size_t cells() const {
    std::size_t n = 1;
    for (int a = 0; a < 3; ++a) n *= std::size_t(hi[a] > lo[a] ? hi[a] - lo[a] : 0);
    return n;
  }

  /// Visits cells with x fastest, then y, then z.
  template <typename F>
  void for_each(F&& f) const {
    for (int z = lo[2]; z < hi[2]; ++z)
      for (int y = lo[1]; y < hi[1]; ++y)
        for (int x = lo[0]; x < hi[0]; ++x) f(x, y, z);
  }
};

/// Interior cells adjacent to side d (the cells whose PDFs are sent).
inline CellBox boundary_region(const Extent3& n, CommDirection d) {
  CellBox box;
  const auto& e = vector(d);
  for (int a = 0; a < 3; ++a) {
    if (e[a] > 0) {
      box.lo[a] = n[a] - 1;
      box.hi[a] = n[a];
    } else if (e[a] < 0) {
      box.lo[a] = 0;
      box.hi[a] = 1;
    } else {
      box.lo[a] = 0;
      box.hi[a] = n[a];
    }
  }
  return box;
}

/// Ghost cells on side d (the cells filled from the neighbour on that side).
inline CellBox ghost_region(const Extent3& n, CommDirection d) {
  CellBox box = boundary_region(n, d);
  const auto& e = vector(d);
  for (int a = 0; a < 3; ++a) {
    box.lo[a] += e[a];
    box.hi[a] += e[a];
  }
  return box;
}

/// Scalars travelling through side d of a block with interior extent n.
inline std::size_t payload_scalars(const Extent3& n, CommDirection d) {
  return boundary_region(n, d).cells() * outgoing_pdfs(d).size();
}

}  // namespace latticeblocks::comm
