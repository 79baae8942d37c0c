#pragma once

#include <random>

namespace bht {

// generator for work item `item` of a run seeded with `seed`; results do not
// depend on which thread handles the item
inline std::mt19937_64 item_rng(unsigned long long seed, unsigned long long item)
{
   std::seed_seq s{static_cast<unsigned>(seed), static_cast<unsigned>(seed >> 32), static_cast<unsigned>(item),
                   static_cast<unsigned>(item >> 32)};
   return std::mt19937_64(s);
}

} // namespace bht
