#include "latticeblocks/domain/selector.hpp"

#include <deque>
#include <mutex>
#include <unordered_map>

namespace latticeblocks::domain {

namespace {

struct InternTable {
  std::mutex mutex;
  std::deque<std::string> names{"*"};
  std::unordered_map<std::string, std::uint32_t> ids{{"*", 0}};
};

InternTable& table() {
  static InternTable t;
  return t;
}

}  // namespace

Selector::Selector(std::string_view name) {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  auto [it, inserted] = t.ids.try_emplace(std::string(name), std::uint32_t(t.names.size()));
  if (inserted) t.names.emplace_back(name);
  id_ = it->second;
}

const std::string& Selector::name() const {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  // deque never relocates existing elements
  return t.names[id_];
}

}  // namespace latticeblocks::domain
