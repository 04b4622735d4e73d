#pragma once

#include <string>
#include <vector>

#include "latticeblocks/domain/selector.hpp"
#include "latticeblocks/errors.hpp"

namespace latticeblocks::domain {

struct UidTriple {
  Selector fs;
  Selector hs;
  Selector bs;

  bool operator==(const UidTriple&) const = default;

  std::string str() const { return "(" + fs.name() + ", " + hs.name() + ", " + bs.name() + ")"; }
};

/// Maps (fs, hs, bs) to a functionality handle. Any slot of a registration may
/// be the wildcard; lookup picks the matching entry with the most concrete
/// slots, and two equally specific matches are a configuration error.
template <typename Handle>
class FunctionalityRegistry {
 public:
  void add(UidTriple key, Handle handle) {
    for (const auto& entry : entries_) {
      if (entry.key == key) throw ConfigError("functionality " + key.str() + " registered twice");
    }
    entries_.push_back({key, std::move(handle)});
  }

  const Handle& resolve(const UidTriple& query) const {
    const Entry* best = nullptr;
    int best_score = -1;
    bool tie = false;
    for (const auto& entry : entries_) {
      if (!matches(entry.key.fs, query.fs) || !matches(entry.key.hs, query.hs) || !matches(entry.key.bs, query.bs)) {
        continue;
      }
      const int score = !entry.key.fs.is_wildcard() + !entry.key.hs.is_wildcard() + !entry.key.bs.is_wildcard();
      if (score > best_score) {
        best = &entry;
        best_score = score;
        tie = false;
      } else if (score == best_score) {
        tie = true;
      }
    }
    if (best == nullptr) {
      throw DispatchError("no functionality registered for fs=" + query.fs.name() + " hs=" + query.hs.name() +
                          " bs=" + query.bs.name());
    }
    if (tie) throw ConfigError("ambiguous functionality registration for " + query.str());
    return best->handle;
  }

  bool contains(const UidTriple& query) const {
    try {
      resolve(query);
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    UidTriple key;
    Handle handle;
  };

  static bool matches(const Selector& registered, const Selector& query) {
    return registered.is_wildcard() || registered == query;
  }

  std::vector<Entry> entries_;
};

}  // namespace latticeblocks::domain
