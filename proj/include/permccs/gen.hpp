#pragma once

// Seeded random generators for the metatheory suites. Generated systems
// are well-resourced by construction: every permission is dealt to at most
// one leaf.

#include <random>

#include "permccs/system.hpp"

namespace permccs {

struct GenSpec {
  int max_atoms = 4;     // parallel leaves at the system level
  int max_channels = 3;
  int max_depth = 3;
  Value max_value = 5;
  std::uint64_t seed = 1;
};

std::vector<Name> gen_channels(const GenSpec& spec);

ProcPtr gen_process(const GenSpec& spec, std::mt19937_64& rng);
SysPtr gen_system(const GenSpec& spec, std::mt19937_64& rng);

// a structurally shuffled equivalent of p: parallel components permuted,
// nils inserted, restrictions commuted and alpha-renamed
ProcPtr shuffle_equiv(const ProcPtr& p, const DefTable& defs,
                      std::mt19937_64& rng);

}  // namespace permccs
