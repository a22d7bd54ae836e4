// Rounds, packets, messages and channel feedback for a multiple-access channel.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace macsim {

using NodeId = std::uint32_t;   // 1..n
using Round = std::uint64_t;    // 1-based round index
using PacketId = std::uint64_t;

// Base for every error the simulator raises.
class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two transmissions attributed to one node in the same round.
class MalformedRound : public SimError {
public:
    using SimError::SimError;
};

// A protocol or engine invariant failed; carries the round it failed in.
class InvariantBreach : public SimError {
public:
    InvariantBreach(Round round, const std::string& what)
        : SimError("round " + std::to_string(round) + ": " + what), round_(round) {}
    Round round() const noexcept { return round_; }

private:
    Round round_;
};

struct Packet {
    PacketId id = 0;
    NodeId origin = 0;
    Round injected_at = 0;

    bool operator==(const Packet&) const = default;
};

// Up to 8 control bits; only the low `length` bits of `bits` are meaningful.
struct ControlBits {
    static constexpr std::uint8_t kMaxLength = 8;

    std::uint8_t bits = 0;
    std::uint8_t length = 0;

    bool operator==(const ControlBits&) const = default;
};

namespace control {
// Sent by a scheduled node that has no packet, so its slot is not silent.
inline constexpr ControlBits kIdle{0b1, 1};
// Node 1's companion transmission in a silence-disambiguation round.
inline constexpr ControlBits kProbe{0b10, 2};
// Repeat of a transmission from the round being disambiguated.
inline constexpr ControlBits kEcho{0b11, 2};
}  // namespace control

// At most one packet plus optional control bits. A control-only message is legal.
struct Message {
    std::optional<Packet> payload;
    std::optional<ControlBits> control;

    static Message with_packet(const Packet& p) { return Message{p, std::nullopt}; }
    static Message with_control(ControlBits c) { return Message{std::nullopt, c}; }

    bool operator==(const Message&) const = default;
};

struct Transmission {
    NodeId node = 0;
    Message message;
};

enum class FeedbackKind : std::uint8_t { Silence, Heard, Collision };

std::string_view to_string(FeedbackKind k);

struct Feedback {
    FeedbackKind kind = FeedbackKind::Silence;
    std::optional<Message> message;  // present iff kind == Heard

    static Feedback silence() { return {}; }
    static Feedback collision() { return {FeedbackKind::Collision, std::nullopt}; }
    static Feedback heard(Message m) { return {FeedbackKind::Heard, std::move(m)}; }

    bool is_heard() const noexcept { return kind == FeedbackKind::Heard; }
    bool is_silence() const noexcept { return kind == FeedbackKind::Silence; }
    bool is_collision() const noexcept { return kind == FeedbackKind::Collision; }
    // Void rounds are the ones in which nothing is heard.
    bool is_void() const noexcept { return kind != FeedbackKind::Heard; }

    // The packet heard this round, if any.
    const Packet* heard_packet() const noexcept {
        return message && message->payload ? &*message->payload : nullptr;
    }

    bool operator==(const Feedback&) const = default;
};

struct ChannelConfig {
    NodeId n = 1;
    bool collision_detection = false;
};

// Channel outcome of one round. Throws MalformedRound if a node appears twice.
Feedback resolve_round(std::span<const Transmission> transmissions);

// What nodes observe: without collision detection a collision reads as silence.
Feedback perceive(const Feedback& f, bool collision_detection);

}  // namespace macsim
