#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace latticeblocks::domain {

/// Interned string UID used for functionality selection (fs, hs, bs) and for
/// data-kind keys. The default-constructed selector is the wildcard "*".
class Selector {
 public:
  Selector() = default;
  explicit Selector(std::string_view name);

  static Selector any() { return Selector(); }

  const std::string& name() const;
  bool is_wildcard() const { return id_ == 0; }
  std::uint32_t id() const { return id_; }

  bool operator==(const Selector&) const = default;
  auto operator<=>(const Selector&) const = default;

 private:
  std::uint32_t id_ = 0;
};

namespace selectors {
inline Selector fs_lbm() { return Selector("LBM"); }
inline Selector hs_cpu() { return Selector("hsCPU"); }
inline Selector hs_cpu_soa() { return Selector("hsCPUSoA"); }
inline Selector hs_gpu() { return Selector("hsGPU"); }
inline Selector bs_pure_lbm() { return Selector("pureLBM"); }
inline Selector data_pdfs() { return Selector("pdfs"); }
}  // namespace selectors

}  // namespace latticeblocks::domain

template <>
struct std::hash<latticeblocks::domain::Selector> {
  std::size_t operator()(const latticeblocks::domain::Selector& s) const noexcept { return s.id(); }
};
