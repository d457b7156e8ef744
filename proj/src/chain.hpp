#pragma once

#include <unordered_map>
#include <vector>

#include "protocol.hpp"

namespace greenpow {

// Two or more blocks contested one height; resolved_winner is the block the
// canonical chain kept.
struct ForkRecord {
    int64_t height = 0;
    std::vector<BlockId> competing;
    BlockId resolved_winner = kNoBlock;
    RoundTag round_tag = RoundTag::kFirst;
};

// Block store with cumulative expected-work tracking. The canonical head is
// the tip of maximal cumulative work; ties break on lowest (found_at,
// producer) so resolution is deterministic.
class ChainView {
public:
    BlockId insert(Block block);  // assigns id, returns it
    const Block& get(BlockId id) const { return blocks_.at(id); }
    bool contains(BlockId id) const { return blocks_.count(id) != 0; }

    double cumulative_work(BlockId id) const { return cum_work_.at(id); }
    BlockId canonical_head() const { return canonical_head_; }
    int64_t canonical_height() const;
    const std::vector<BlockId>& heads() const { return heads_; }

    // Recomputes the canonical head over all current tips.
    BlockId resolve_forks();

    // Canonical chain from the first produced block to the head.
    std::vector<BlockId> canonical_chain() const;

    // True when `id` lies on the path from genesis to the canonical head.
    bool on_canonical_chain(BlockId id) const;

    size_t size() const { return blocks_.size(); }

private:
    std::unordered_map<BlockId, Block> blocks_;
    std::unordered_map<BlockId, double> cum_work_;
    std::vector<BlockId> heads_;
    BlockId canonical_head_ = kNoBlock;
    BlockId next_id_ = 0;
};

}  // namespace greenpow
