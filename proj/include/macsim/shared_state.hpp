// Replicated common knowledge: share estimates C, transmission lists D with their
// main pointer, and per-node injection evidence for detecting underestimation.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "macsim/core.hpp"

namespace macsim {

// C[i] estimates the share s_i; gamma = sum of C estimates the burstiness.
class ShareEstimates {
public:
    ShareEstimates() = default;
    explicit ShareEstimates(NodeId n) : c_(n, 0) {}

    NodeId n() const noexcept { return static_cast<NodeId>(c_.size()); }
    std::uint32_t operator[](NodeId i) const { return c_.at(i - 1); }
    std::uint64_t gamma() const noexcept { return gamma_; }
    const std::vector<std::uint32_t>& values() const noexcept { return c_; }

    void increase(NodeId i, std::uint32_t y);

    bool operator==(const ShareEstimates&) const = default;

private:
    std::vector<std::uint32_t> c_;
    std::uint64_t gamma_ = 0;
};

// Lists D_1..D_n of equal length with one shared main pointer. Every position
// holds a 1 in exactly one list, so the lists form a conflict-free schedule.
class TransmissionLists {
public:
    TransmissionLists() = default;
    explicit TransmissionLists(NodeId n) : rows_(n) {}

    NodeId n() const noexcept { return static_cast<NodeId>(rows_.size()); }
    std::size_t length() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }
    bool empty() const noexcept { return length() == 0; }

    // 1-based position of the main pointer; nullopt while the lists are empty.
    std::optional<std::size_t> pointer() const noexcept {
        return empty() ? std::nullopt : std::optional<std::size_t>(pointer_);
    }
    bool bit(NodeId i, std::size_t pos) const { return rows_.at(i - 1).at(pos - 1) != 0; }
    const std::vector<std::uint8_t>& row(NodeId i) const { return rows_.at(i - 1); }
    std::size_t ones(NodeId i) const;

    // Does node i hold the 1 at the current position? False while empty.
    bool scheduled(NodeId i) const { return !empty() && bit(i, pointer_); }
    // Node holding the current position, or 0 while empty.
    NodeId current_owner() const;

    // y ones appended to D_i and y zeros to every other list. Sets the pointer to 1
    // when the lists were empty.
    void append(NodeId i, std::uint32_t y);

    // position <- (position mod length) + 1. Throws while the lists are empty.
    std::size_t advance_main_pointer();

    // (i) equal lengths, (ii) pointer in range, (iii) exactly one 1 per position.
    // Throws SimError naming the failed clause.
    void check_invariants() const;

    bool operator==(const TransmissionLists&) const = default;

private:
    std::vector<std::vector<std::uint8_t>> rows_;
    std::size_t pointer_ = 0;
};

// C[i] += y together with the matching D append. Rejects y == 0.
void apply_upgrade(ShareEstimates& c, TransmissionLists& d, NodeId i, std::uint32_t y);

// Injection counts observed at one node, with the largest count seen in any
// window of the current detection length.
class InjectionHistory {
public:
    // Rounds must be non-decreasing across calls.
    void record(Round round, std::uint32_t count);

    // Maximum count over every contiguous interval of `length` rounds in the
    // whole history; folds it into best_k and returns best_k.
    std::uint64_t refresh(std::uint64_t length);

    std::uint64_t best_k() const noexcept { return best_k_; }
    std::uint64_t total() const noexcept { return prefix_.empty() ? 0 : prefix_.back(); }

    bool operator==(const InjectionHistory&) const = default;

private:
    std::uint64_t scan_from(std::size_t first_end, std::uint64_t length) const;

    std::vector<Round> rounds_;
    std::vector<std::uint64_t> prefix_;  // prefix_[j] = count in rounds_[0..j]
    std::uint64_t best_k_ = 0;
    std::uint64_t scanned_length_ = 0;
    std::size_t scanned_upto_ = 0;
};

// Underestimation amount max(best_k - c, 0) using windows of max(gamma, 1) rounds.
std::uint64_t detect_underestimation(InjectionHistory& h, std::uint64_t gamma, std::uint64_t c);

}  // namespace macsim
