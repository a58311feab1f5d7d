#include "restore/topology.hpp"

#include <bit>

namespace restore {

void Topology::trim() {
  if (size_ % 64 != 0 && !words_.empty())
    words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
}

int Topology::count_up() const {
  int n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

std::size_t Topology::hash() const {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(size_);
  for (auto w : words_) {
    h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

Topology initial_topology(const CaseModel& c, const GroundTruth* truth) {
  Topology t(c.num_components(), true);
  for (int i = 0; i < c.num_components(); ++i) {
    switch (c.status[i].condition) {
      case Condition::Operational: break;
      case Condition::Faulty: t.set(i, false); break;
      case Condition::Unknown: {
        bool faulty = true;
        if (truth) {
          auto it = truth->find(c.component_id(i));
          if (it == truth->end())
            throw CaseError("truth is missing unknown pipeline '" + c.component_id(i) + "'");
          faulty = it->second;
        }
        t.set(i, !faulty);
        break;
      }
    }
  }
  return t;
}

Topology all_up(const CaseModel& c) { return Topology(c.num_components(), true); }

}  // namespace restore
