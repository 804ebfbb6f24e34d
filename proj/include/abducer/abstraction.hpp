#pragma once

#include <optional>

#include "abducer/formula.hpp"

namespace abducer {

// Abstraction: fuses consecutive next-chains and adjacent segments into list
// segments when the intermediate variable occurs nowhere else, and
// generalizes two consecutive isomorphic block instances into an iterated
// block segment. The result is entailed by the input; when the certifying
// entailment cannot be established the input is returned unchanged.
SymbolicHeap abstract_alpha(const SymbolicHeap& h, SymbolPool& pool,
                            BlockRegistry& blocks);

// Seam-guided block detection: splits the spatial part into two isomorphic
// groups joined at `seam` (the second copy's head), registers the block, and
// returns the fused heap (residue * one segment). Used by shape
// extrapolation, which constructs the two copies itself.
std::optional<SymbolicHeap> fuse_two_copies(const SymbolicHeap& h, VarId seam,
                                            SymbolPool& pool, BlockRegistry& blocks);

}  // namespace abducer
