// Window adversaries of local type: per-node shares within a sliding window,
// trace validation and the built-in injection strategies.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "macsim/core.hpp"

namespace macsim {

// A trace with an out-of-range node or a negative count.
class MalformedTrace : public SimError {
public:
    using SimError::SimError;
};

// An injection pattern would break the adversary's window constraint.
class AdversaryViolation : public SimError {
public:
    AdversaryViolation(NodeId node, Round window_start, const std::string& what)
        : SimError(what), node_(node), window_start_(window_start) {}
    NodeId node() const noexcept { return node_; }
    Round window_start() const noexcept { return window_start_; }

private:
    NodeId node_;
    Round window_start_;
};

struct AdversaryType {
    std::vector<std::uint32_t> shares;  // shares[i - 1] is the share of node i
    std::uint32_t window = 1;

    NodeId n() const noexcept { return static_cast<NodeId>(shares.size()); }
    std::uint32_t share(NodeId i) const { return shares.at(i - 1); }
    std::uint64_t burstiness() const noexcept;  // sum of shares
    double rate() const noexcept { return static_cast<double>(burstiness()) / window; }

    // Throws SimError unless window >= 1, n >= 1 and the shares sum to at most w.
    void check() const;
};

struct InjectionEvent {
    Round round = 0;
    NodeId node = 0;
    std::int64_t count = 0;

    bool operator==(const InjectionEvent&) const = default;
};

struct InjectionTrace {
    std::vector<InjectionEvent> events;  // rounds ascending

    std::uint64_t total() const noexcept;
};

struct Violation {
    NodeId node = 0;
    Round window_start = 0;

    bool operator==(const Violation&) const = default;
};

// Checks every sliding window of w rounds that can hold an event with round <= horizon.
// Returns the lexicographically first (node, window start) that exceeds the node's share.
std::optional<Violation> validate_trace(const AdversaryType& type, const InjectionTrace& trace,
                                        Round horizon);

// Injection trace CSV: header "round,node,count", rounds ascending.
void write_injection_csv(std::ostream& os, const InjectionTrace& trace);
InjectionTrace read_injection_csv(std::istream& is, NodeId n);

struct Injection {
    NodeId node = 0;
    std::uint32_t count = 0;

    bool operator==(const Injection&) const = default;
};

// Produces the injections for consecutive rounds 1, 2, 3, ...
class InjectionStrategy {
public:
    virtual ~InjectionStrategy() = default;
    virtual std::string_view name() const = 0;
    virtual void injections(Round round, std::vector<Injection>& out) = 0;
    virtual std::unique_ptr<InjectionStrategy> clone() const = 0;
};

// s_i packets into every node i at rounds 1, 1 + w, 1 + 2w, ...
class BurstStrategy final : public InjectionStrategy {
public:
    explicit BurstStrategy(AdversaryType type);
    std::string_view name() const override { return "burst"; }
    void injections(Round round, std::vector<Injection>& out) override;
    std::unique_ptr<InjectionStrategy> clone() const override {
        return std::make_unique<BurstStrategy>(*this);
    }

private:
    AdversaryType type_;
};

// s_i single-packet injections per window, spaced floor(k * w / s_i) apart.
class UniformStrategy final : public InjectionStrategy {
public:
    explicit UniformStrategy(AdversaryType type);
    std::string_view name() const override { return "uniform"; }
    void injections(Round round, std::vector<Injection>& out) override;
    std::unique_ptr<InjectionStrategy> clone() const override {
        return std::make_unique<UniformStrategy>(*this);
    }

private:
    AdversaryType type_;
    std::vector<std::vector<std::uint8_t>> hits_;  // per node, offsets within a window
};

// One packet per round into `node` in the first a rounds of every b-round block.
class SingleOverloadStrategy final : public InjectionStrategy {
public:
    // Requires 1/2 < a/b <= 1.
    SingleOverloadStrategy(NodeId node, std::uint32_t a, std::uint32_t b);
    std::string_view name() const override { return "single_overload"; }
    void injections(Round round, std::vector<Injection>& out) override;
    std::unique_ptr<InjectionStrategy> clone() const override {
        return std::make_unique<SingleOverloadStrategy>(*this);
    }
    // The local type this strategy respects: share a at `node`, window b.
    AdversaryType adversary_type(NodeId n) const;

private:
    NodeId node_;
    std::uint32_t a_;
    std::uint32_t b_;
};

// Random injections that never exceed any node's remaining window allowance.
class RandomValidStrategy final : public InjectionStrategy {
public:
    RandomValidStrategy(AdversaryType type, std::uint64_t seed);
    std::string_view name() const override { return "random"; }
    void injections(Round round, std::vector<Injection>& out) override;
    std::unique_ptr<InjectionStrategy> clone() const override {
        return std::make_unique<RandomValidStrategy>(*this);
    }

private:
    AdversaryType type_;
    std::mt19937_64 rng_;
    std::vector<std::vector<std::uint32_t>> ring_;  // per node, last w rounds
    std::vector<std::uint32_t> in_window_;
};

// Replays a fixed trace.
class ScriptedStrategy final : public InjectionStrategy {
public:
    explicit ScriptedStrategy(InjectionTrace trace);
    std::string_view name() const override { return "scripted"; }
    void injections(Round round, std::vector<Injection>& out) override;
    std::unique_ptr<InjectionStrategy> clone() const override {
        return std::make_unique<ScriptedStrategy>(*this);
    }

private:
    InjectionTrace trace_;
    std::size_t cursor_ = 0;
};

// Runs a strategy for `horizon` rounds and collects its injections.
InjectionTrace materialize(InjectionStrategy& strategy, Round horizon);

}  // namespace macsim
