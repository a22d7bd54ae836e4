// Share estimates, transmission lists and injection evidence.

#include "macsim/shared_state.hpp"

#include <algorithm>

namespace macsim {

void ShareEstimates::increase(NodeId i, std::uint32_t y) {
    c_.at(i - 1) += y;
    gamma_ += y;
}

std::size_t TransmissionLists::ones(NodeId i) const {
    const auto& r = rows_.at(i - 1);
    return static_cast<std::size_t>(std::count(r.begin(), r.end(), std::uint8_t{1}));
}

NodeId TransmissionLists::current_owner() const {
    if (empty()) return 0;
    for (NodeId i = 1; i <= n(); ++i) {
        if (rows_[i - 1][pointer_ - 1]) return i;
    }
    return 0;
}

void TransmissionLists::append(NodeId i, std::uint32_t y) {
    if (i < 1 || i > n()) throw SimError("append: node out of range");
    const bool was_empty = empty();
    for (NodeId k = 1; k <= n(); ++k) {
        rows_[k - 1].insert(rows_[k - 1].end(), y, k == i ? 1 : 0);
    }
    if (was_empty && y > 0) pointer_ = 1;
}

std::size_t TransmissionLists::advance_main_pointer() {
    if (empty()) throw SimError("main pointer undefined on empty lists");
    pointer_ = pointer_ % length() + 1;
    return pointer_;
}

void TransmissionLists::check_invariants() const {
    const auto len = length();
    for (const auto& r : rows_) {
        if (r.size() != len) throw SimError("D lists differ in length (invariant i)");
    }
    if (len == 0) return;
    if (pointer_ < 1 || pointer_ > len) throw SimError("main pointer out of range (invariant ii)");
    for (std::size_t j = 0; j < len; ++j) {
        int ones = 0;
        for (const auto& r : rows_) {
            if (r[j] > 1) throw SimError("D entry is not a bit");
            ones += r[j];
        }
        if (ones != 1) {
            throw SimError("position " + std::to_string(j + 1) + " has " + std::to_string(ones) +
                           " ones (invariant iii)");
        }
    }
}

void apply_upgrade(ShareEstimates& c, TransmissionLists& d, NodeId i, std::uint32_t y) {
    if (y == 0) throw SimError("upgrade amount must be positive");
    c.increase(i, y);
    d.append(i, y);
}

void InjectionHistory::record(Round round, std::uint32_t count) {
    if (count == 0) return;
    if (!rounds_.empty() && round < rounds_.back()) throw SimError("injection history out of order");
    const std::uint64_t before = total();
    if (!rounds_.empty() && rounds_.back() == round) {
        prefix_.back() += count;
        // The window ending here has to be rescanned.
        scanned_upto_ = std::min(scanned_upto_, rounds_.size() - 1);
    } else {
        rounds_.push_back(round);
        prefix_.push_back(before + count);
    }
}

std::uint64_t InjectionHistory::scan_from(std::size_t first_end, std::uint64_t length) const {
    // A maximal window can always be slid right until it ends on an injection.
    std::uint64_t best = 0;
    std::size_t lo = 0;
    for (std::size_t end = first_end; end < rounds_.size(); ++end) {
        const Round start = rounds_[end] >= length ? rounds_[end] - length + 1 : 1;
        if (end == first_end) {
            lo = static_cast<std::size_t>(
                std::lower_bound(rounds_.begin(), rounds_.begin() + end + 1, start) - rounds_.begin());
        } else {
            while (rounds_[lo] < start) ++lo;
        }
        const std::uint64_t below = lo == 0 ? 0 : prefix_[lo - 1];
        best = std::max(best, prefix_[end] - below);
    }
    return best;
}

std::uint64_t InjectionHistory::refresh(std::uint64_t length) {
    if (length == 0) length = 1;
    if (length != scanned_length_) {
        scanned_length_ = length;
        scanned_upto_ = 0;
    }
    if (scanned_upto_ < rounds_.size()) {
        best_k_ = std::max(best_k_, scan_from(scanned_upto_, length));
        scanned_upto_ = rounds_.size();
    }
    return best_k_;
}

std::uint64_t detect_underestimation(InjectionHistory& h, std::uint64_t gamma, std::uint64_t c) {
    const std::uint64_t k = h.refresh(std::max<std::uint64_t>(gamma, 1));
    return k > c ? k - c : 0;
}

}  // namespace macsim
