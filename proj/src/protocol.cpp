// Algorithm names, channel compatibility and the protocol factory.

#include "macsim/protocol.hpp"

#include <array>
#include <utility>

#include "macsim/ack.hpp"
#include "macsim/cn.hpp"
#include "macsim/discover_shares.hpp"

namespace macsim {

namespace {

constexpr std::array<std::pair<AlgorithmKind, std::string_view>, 8> kNames{{
    {AlgorithmKind::SCU, "SCU"},
    {AlgorithmKind::CCU, "CCU"},
    {AlgorithmKind::NADS, "NADS"},
    {AlgorithmKind::ADS, "ADS"},
    {AlgorithmKind::CN, "CN"},
    {AlgorithmKind::AckEager, "AckEager"},
    {AlgorithmKind::AckOblivious, "AckOblivious"},
    {AlgorithmKind::RoundRobin, "RoundRobin"},
}};

}  // namespace

std::string_view to_string(AlgorithmKind k) {
    for (const auto& [kind, name] : kNames) {
        if (kind == k) return name;
    }
    return "unknown";
}

std::optional<AlgorithmKind> algorithm_from_string(std::string_view s) {
    for (const auto& [kind, name] : kNames) {
        if (name == s) return kind;
    }
    return std::nullopt;
}

bool compatible(AlgorithmKind k, bool collision_detection) {
    switch (k) {
        case AlgorithmKind::SCU:
        case AlgorithmKind::CCU:
        case AlgorithmKind::NADS: return collision_detection;
        case AlgorithmKind::ADS: return !collision_detection;
        default: return true;
    }
}

std::string_view Protocol::stage_name(std::uint8_t) const { return "-"; }

std::unique_ptr<Protocol> make_protocol(const AlgorithmSpec& spec, const ChannelConfig& channel) {
    if (!compatible(spec.kind, channel.collision_detection)) {
        throw SimError(std::string(to_string(spec.kind)) + " cannot run on a channel " +
                       (channel.collision_detection ? "with" : "without") + " collision detection");
    }
    switch (spec.kind) {
        case AlgorithmKind::SCU:
        case AlgorithmKind::CCU:
        case AlgorithmKind::NADS:
        case AlgorithmKind::ADS: return std::make_unique<DiscoverShares>(spec.kind, channel.n);
        case AlgorithmKind::CN: return std::make_unique<ColoredNodes>(channel.n);
        case AlgorithmKind::AckEager: return make_ack_eager(channel.n);
        case AlgorithmKind::AckOblivious: return std::make_unique<AckOblivious>(channel.n, spec.sequences);
        case AlgorithmKind::RoundRobin: return std::make_unique<RoundRobin>(channel.n);
    }
    throw SimError("unknown algorithm");
}

}  // namespace macsim
