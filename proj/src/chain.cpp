#include "chain.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace greenpow {

BlockId ChainView::insert(Block block) {
    if (block.parent != kNoBlock && blocks_.count(block.parent) == 0)
        throw std::invalid_argument("parent block not in view");
    block.id = next_id_++;
    const double parent_work = block.parent == kNoBlock ? 0.0 : cum_work_.at(block.parent);
    if (block.parent != kNoBlock)
        assert(block.height == blocks_.at(block.parent).height + 1);
    cum_work_[block.id] = parent_work + block.difficulty;
    heads_.erase(std::remove(heads_.begin(), heads_.end(), block.parent), heads_.end());
    heads_.push_back(block.id);
    BlockId id = block.id;
    blocks_.emplace(id, std::move(block));
    resolve_forks();
    return id;
}

BlockId ChainView::resolve_forks() {
    BlockId best = kNoBlock;
    for (BlockId tip : heads_) {
        if (best == kNoBlock) {
            best = tip;
            continue;
        }
        const double ww = cum_work_.at(tip), wb = cum_work_.at(best);
        if (ww > wb) {
            best = tip;
        } else if (ww == wb) {
            const Block& a = blocks_.at(tip);
            const Block& b = blocks_.at(best);
            if (a.found_at < b.found_at ||
                (a.found_at == b.found_at && a.producer < b.producer))
                best = tip;
        }
    }
    canonical_head_ = best;
    return best;
}

int64_t ChainView::canonical_height() const {
    return canonical_head_ == kNoBlock ? -1 : blocks_.at(canonical_head_).height;
}

std::vector<BlockId> ChainView::canonical_chain() const {
    std::vector<BlockId> chain;
    for (BlockId id = canonical_head_; id != kNoBlock; id = blocks_.at(id).parent)
        chain.push_back(id);
    std::reverse(chain.begin(), chain.end());
    return chain;
}

bool ChainView::on_canonical_chain(BlockId id) const {
    if (id == kNoBlock || canonical_head_ == kNoBlock) return false;
    const int64_t h = blocks_.at(id).height;
    BlockId cur = canonical_head_;
    while (cur != kNoBlock && blocks_.at(cur).height > h) cur = blocks_.at(cur).parent;
    return cur == id;
}

}  // namespace greenpow
