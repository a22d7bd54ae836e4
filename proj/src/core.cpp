// Channel resolution and perception.

#include "macsim/core.hpp"

#include <algorithm>
#include <vector>

namespace macsim {

std::string_view to_string(FeedbackKind k) {
    switch (k) {
        case FeedbackKind::Silence: return "silence";
        case FeedbackKind::Heard: return "heard";
        case FeedbackKind::Collision: return "collision";
    }
    return "unknown";
}

Feedback resolve_round(std::span<const Transmission> transmissions) {
    if (transmissions.size() > 1) {
        std::vector<NodeId> nodes;
        nodes.reserve(transmissions.size());
        for (const auto& t : transmissions) nodes.push_back(t.node);
        std::sort(nodes.begin(), nodes.end());
        if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
            throw MalformedRound("node transmits twice in one round");
        }
        return Feedback::collision();
    }
    if (transmissions.empty()) return Feedback::silence();
    return Feedback::heard(transmissions.front().message);
}

Feedback perceive(const Feedback& f, bool collision_detection) {
    if (!collision_detection && f.is_collision()) return Feedback::silence();
    return f;
}

}  // namespace macsim
