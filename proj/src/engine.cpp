// Round loop, replay hash and trace writers.

#include "macsim/engine.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace macsim {

namespace {

constexpr std::array<std::pair<StrategyKind, std::string_view>, 5> kStrategyNames{{
    {StrategyKind::Burst, "burst"},
    {StrategyKind::Uniform, "uniform"},
    {StrategyKind::SingleOverload, "single_overload"},
    {StrategyKind::Random, "random"},
    {StrategyKind::Scripted, "scripted"},
}};

template <typename T>
std::string join(const std::vector<T>& v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

std::string_view to_string(StrategyKind k) {
    for (const auto& [kind, name] : kStrategyNames) {
        if (kind == k) return name;
    }
    return "unknown";
}

std::optional<StrategyKind> strategy_from_string(std::string_view s) {
    for (const auto& [kind, name] : kStrategyNames) {
        if (name == s) return kind;
    }
    return std::nullopt;
}

void Scenario::check() const {
    if (channel.n == 0) throw SimError("scenario '" + name + "': n must be at least 1");
    if (horizon == 0) throw SimError("scenario '" + name + "': horizon must be positive");
    if (adversary.n() != channel.n) {
        throw SimError("scenario '" + name + "': adversary has " + std::to_string(adversary.n()) +
                       " shares for " + std::to_string(channel.n) + " nodes");
    }
    adversary.check();
    if (!compatible(algorithm.kind, channel.collision_detection)) {
        throw SimError("scenario '" + name + "': " + std::string(to_string(algorithm.kind)) +
                       " is not compatible with this channel's collision detection setting");
    }
    if (strategy.kind == StrategyKind::SingleOverload && strategy.node > channel.n) {
        throw SimError("scenario '" + name + "': single_overload node outside the network");
    }
}

std::unique_ptr<InjectionStrategy> make_strategy(const Scenario& s) {
    switch (s.strategy.kind) {
        case StrategyKind::Burst: return std::make_unique<BurstStrategy>(s.adversary);
        case StrategyKind::Uniform: return std::make_unique<UniformStrategy>(s.adversary);
        case StrategyKind::SingleOverload:
            return std::make_unique<SingleOverloadStrategy>(s.strategy.node, s.strategy.num, s.strategy.den);
        case StrategyKind::Random: return std::make_unique<RandomValidStrategy>(s.adversary, s.seed);
        case StrategyKind::Scripted: return std::make_unique<ScriptedStrategy>(s.strategy.script);
    }
    throw SimError("unknown strategy");
}

std::string describe(const Scenario& s) {
    std::ostringstream os;
    os << "name=" << s.name << ";n=" << s.channel.n << ";cd=" << (s.channel.collision_detection ? 1 : 0)
       << ";alg=" << to_string(s.algorithm.kind);
    if (!s.algorithm.sequences.empty()) {
        os << ";seq=";
        for (std::size_t i = 0; i < s.algorithm.sequences.size(); ++i) {
            os << (i ? "," : "") << s.algorithm.sequences[i];
        }
    }
    os << ";shares=" << join(s.adversary.shares, ',') << ";w=" << s.adversary.window
       << ";strategy=" << to_string(s.strategy.kind);
    if (s.strategy.kind == StrategyKind::SingleOverload) {
        os << '(' << s.strategy.node << ',' << s.strategy.num << '/' << s.strategy.den << ')';
    }
    if (s.strategy.kind == StrategyKind::Scripted) {
        os << '(';
        for (const auto& e : s.strategy.script.events) os << e.round << ':' << e.node << ':' << e.count << ' ';
        os << ')';
    }
    os << ";horizon=" << s.horizon << ";seed=" << s.seed;
    return os.str();
}

Execution::Execution(const ChannelConfig& channel, const AlgorithmSpec& algorithm, const AdversaryType* adversary,
                     bool paranoid)
    : channel_(channel), protocol_(make_protocol(algorithm, channel)), queues_(channel.n) {
    if (adversary) {
        adversary->check();
        if (adversary->n() != channel.n) throw SimError("adversary size differs from the network size");
        adversary_ = *adversary;
        window_ring_.assign(channel.n, std::vector<std::uint32_t>(adversary->window, 0));
        window_sum_.assign(channel.n, 0);
    }
    protocol_->set_paranoid(paranoid);
    record_.queue_sizes.assign(channel.n, 0);
}

Execution::Execution(const Execution& o)
    : channel_(o.channel_),
      adversary_(o.adversary_),
      protocol_(o.protocol_->clone()),
      queues_(o.queues_),
      ledger_(o.ledger_),
      counters_(o.counters_),
      queued_(o.queued_),
      round_(o.round_),
      window_ring_(o.window_ring_),
      window_sum_(o.window_sum_),
      record_(o.record_) {}

Execution& Execution::operator=(const Execution& o) {
    if (this != &o) *this = Execution(o);
    return *this;
}

void Execution::check_window(std::span<const Injection> injections) {
    const auto w = adversary_->window;
    const auto slot = (round_ - 1) % w;
    for (NodeId i = 1; i <= channel_.n; ++i) {
        window_sum_[i - 1] -= window_ring_[i - 1][slot];
        window_ring_[i - 1][slot] = 0;
    }
    for (const auto& inj : injections) {
        window_ring_[inj.node - 1][slot] += inj.count;
        window_sum_[inj.node - 1] += inj.count;
    }
    for (NodeId i = 1; i <= channel_.n; ++i) {
        if (window_sum_[i - 1] > adversary_->share(i)) {
            const Round start = round_ >= w ? round_ - w + 1 : 1;
            throw AdversaryViolation(i, start,
                                     "adversary violation: node " + std::to_string(i) + " receives " +
                                         std::to_string(window_sum_[i - 1]) + " packets in the window starting at round " +
                                         std::to_string(start) + " but its share is " +
                                         std::to_string(adversary_->share(i)));
        }
    }
}

void Execution::cross_check() {
    if (!adversary_) return;
    if (const ShareEstimates* c = protocol_->estimates()) {
        for (NodeId i = 1; i <= channel_.n; ++i) {
            if ((*c)[i] > adversary_->share(i)) {
                throw InvariantBreach(round_, "estimate C[" + std::to_string(i) + "] = " + std::to_string((*c)[i]) +
                                                  " exceeds the share " + std::to_string(adversary_->share(i)));
            }
        }
        if (c->gamma() > adversary_->window) throw InvariantBreach(round_, "gamma exceeds the window");
    }
    if (const TransmissionLists* d = protocol_->lists()) {
        if (d->length() > adversary_->window) throw InvariantBreach(round_, "D lists longer than the window");
    }
}

const RoundRecord& Execution::step(std::span<const Injection> injections) {
    ++round_;
    const Round r = round_;

    sent_.clear();
    protocol_->decide(r, queues_, sent_);
    for (const auto& t : sent_) {
        if (t.node < 1 || t.node > channel_.n) throw InvariantBreach(r, "transmission from an unknown node");
        if (t.message.payload) {
            const auto& q = queues_[t.node - 1];
            if (q.empty() || !(q.front() == *t.message.payload)) {
                throw InvariantBreach(r, "node " + std::to_string(t.node) + " sent a packet it does not hold");
            }
        }
    }

    Feedback actual;
    try {
        actual = resolve_round(sent_);
    } catch (const MalformedRound& e) {
        throw InvariantBreach(r, e.what());
    }
    const Feedback perceived = perceive(actual, channel_.collision_detection);
    protocol_->audit(RoundAudit{r, actual, sent_.size(), adversary()});

    if (const Packet* p = actual.heard_packet()) {
        queues_[p->origin - 1].pop_front();
        ledger_[p->id].heard_at = r;
        --queued_;
        ++counters_.heard;
    }
    switch (actual.kind) {
        case FeedbackKind::Silence: ++counters_.silent_rounds; break;
        case FeedbackKind::Heard: ++counters_.heard_rounds; break;
        case FeedbackKind::Collision: ++counters_.collision_rounds; break;
    }

    for (const auto& inj : injections) {
        if (inj.node < 1 || inj.node > channel_.n) throw MalformedTrace("injection into an unknown node");
    }
    if (adversary_) check_window(injections);
    for (const auto& inj : injections) {
        for (std::uint32_t k = 0; k < inj.count; ++k) {
            const Packet p{static_cast<PacketId>(ledger_.size()), inj.node, r};
            ledger_.push_back({p.id, p.origin, r, std::nullopt});
            queues_[inj.node - 1].push_back(p);
        }
        queued_ += inj.count;
        counters_.injected += inj.count;
    }

    record_.stage = protocol_->stage_tag();
    record_.phase = protocol_->phase();
    protocol_->transition(RoundOutcome{r, perceived, injections, sent_}, queues_);
    cross_check();
    if (counters_.injected != counters_.heard + queued_) throw InvariantBreach(r, "packet conservation broken");
    counters_.max_queue_total = std::max(counters_.max_queue_total, queued_);

    record_.round = r;
    record_.transmitters.clear();
    for (const auto& t : sent_) record_.transmitters.push_back(t.node);
    record_.feedback = actual.kind;
    record_.perceived = perceived.kind;
    record_.injections.assign(injections.begin(), injections.end());
    for (NodeId i = 1; i <= channel_.n; ++i) {
        record_.queue_sizes[i - 1] = static_cast<std::uint32_t>(queues_[i - 1].size());
    }
    const auto ups = protocol_->last_upgrades();
    record_.upgrades.assign(ups.begin(), ups.end());
    return record_;
}

Trace run(const Scenario& s) {
    s.check();
    Trace trace;
    trace.scenario = s;
    trace.rounds.reserve(s.horizon);
    Execution exec(s.channel, s.algorithm, &s.adversary, s.paranoid);
    auto strategy = make_strategy(s);
    std::vector<Injection> injections;
    for (Round r = 1; r <= s.horizon; ++r) {
        injections.clear();
        strategy->injections(r, injections);
        const RoundRecord& rec = exec.step(injections);
        trace.rounds.push_back(rec);
        if (!trace.stage_names.contains(rec.stage)) {
            trace.stage_names.emplace(rec.stage, std::string(exec.protocol().stage_name(rec.stage)));
        }
    }
    trace.ledger = exec.ledger();
    trace.counters = exec.counters();
    trace.protocol_counters = exec.protocol().counters();
    if (const ShareEstimates* c = exec.protocol().estimates()) trace.final_estimates = c->values();
    return trace;
}

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw SimError("sha256 init failed");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(std::string_view s) { EVP_DigestUpdate(ctx_, s.data(), s.size()); }

    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, md.data(), &len);
        std::ostringstream os;
        for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
        return os.str();
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

std::string replay_hash(const Trace& t) {
    Sha256 h;
    h.update("macsim-trace-v1\n");
    h.update(describe(t.scenario));
    h.update("\n");
    std::string line;
    for (const auto& r : t.rounds) {
        line.clear();
        line += std::to_string(r.round);
        line += '|';
        line += to_string(r.feedback);
        line += '|';
        line += to_string(r.perceived);
        line += '|';
        line += join(r.transmitters, ';');
        line += '|';
        for (const auto& inj : r.injections) line += std::to_string(inj.node) + ':' + std::to_string(inj.count) + ';';
        line += '|';
        line += join(r.queue_sizes, ',');
        line += '|';
        for (const auto& u : r.upgrades) line += std::to_string(u.node) + ':' + std::to_string(u.amount) + ';';
        line += '|';
        line += std::to_string(r.stage) + '|' + std::to_string(r.phase) + '\n';
        h.update(line);
    }
    for (const auto& p : t.ledger) {
        line = std::to_string(p.id) + ',' + std::to_string(p.origin) + ',' + std::to_string(p.injected_at) + ',' +
               (p.heard_at ? std::to_string(*p.heard_at) : std::string("-")) + '\n';
        h.update(line);
    }
    return h.hex();
}

void write_trace_csv(std::ostream& os, const Trace& t) {
    os << "round,feedback,transmitters";
    for (NodeId i = 1; i <= t.scenario.channel.n; ++i) os << ",queue_" << i;
    os << '\n';
    for (const auto& r : t.rounds) {
        os << r.round << ',' << to_string(r.feedback) << ',' << join(r.transmitters, ';');
        for (auto q : r.queue_sizes) os << ',' << q;
        os << '\n';
    }
}

void write_ledger_json(std::ostream& os, const Trace& t) {
    nlohmann::ordered_json doc;
    doc["scenario"] = t.scenario.name;
    auto& packets = doc["packets"] = nlohmann::ordered_json::array();
    for (const auto& p : t.ledger) {
        nlohmann::ordered_json row;
        row["id"] = p.id;
        row["origin"] = p.origin;
        row["injected_at"] = p.injected_at;
        row["heard_at"] = p.heard_at ? nlohmann::ordered_json(*p.heard_at) : nlohmann::ordered_json(nullptr);
        packets.push_back(std::move(row));
    }
    os << doc.dump(1) << '\n';
}

}  // namespace macsim
