#include "opow/netsim.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>

#include "opow/heavyhash.hpp"
#include "opow/xoshiro.hpp"

namespace opow::netsim {

void SimScenario::validate() const
{
    if (miners.empty()) throw ConfigError("scenario needs at least one miner");
    double sum = 0;
    std::map<std::uint32_t, int> ids;
    int attackers = 0;
    for (const auto& m : miners) {
        if (!(m.hashrate >= 0) || !std::isfinite(m.hashrate)) throw ConfigError("miner hashrate must be >= 0");
        sum += m.hashrate;
        if (ids[m.id]++) throw ConfigError("duplicate miner id " + std::to_string(m.id));
        if (m.role == Role::attacker) ++attackers;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("miner hashrate fractions must sum to 1");
    if (attackers > 1) throw ConfigError("at most one attacker is supported");
    if (attackers == 1 && attackers == static_cast<int>(miners.size()))
        throw ConfigError("an attack scenario needs an honest miner");
    if (!(mean_block_interval > 0)) throw ConfigError("mean_block_interval must be positive");
    if (latency.min < 0 || latency.max < latency.min) throw ConfigError("latency range must satisfy 0 <= min <= max");
    if (!(horizon_time > 0)) throw ConfigError("horizon_time must be positive");
    if (std::isinf(horizon_time) && horizon_blocks == 0) throw ConfigError("scenario needs a finite horizon");

    double prev_end = 0;
    for (std::size_t i = 0; i < partitions.size(); ++i) {
        const auto& w = partitions[i];
        if (!(w.start >= 0) || !(w.end > w.start)) throw ConfigError("partition window must have 0 <= start < end");
        if (w.end > horizon_time) throw ConfigError("partition window extends past the horizon");
        if (i > 0 && w.start < prev_end) throw ConfigError("partition windows overlap or are out of order");
        prev_end = w.end;
        if (w.side_a.empty()) throw ConfigError("partition side A is empty");
        for (auto id : w.side_a)
            if (!ids.contains(id)) throw ConfigError("partition names unknown miner id " + std::to_string(id));
        if (w.side_a.size() >= miners.size()) throw ConfigError("partition side B is empty");
    }
}

std::optional<std::size_t> SimScenario::attacker_index() const
{
    for (std::size_t i = 0; i < miners.size(); ++i)
        if (miners[i].role == Role::attacker) return i;
    return std::nullopt;
}

double catchup_probability(double q, std::uint32_t z)
{
    if (!(q >= 0) || !(q < 1)) throw std::domain_error("attacker fraction must lie in [0, 1)");
    if (z == 0) return 1.0;
    if (q >= 0.5) return 1.0;
    return std::pow(q / (1.0 - q), static_cast<double>(z));
}

double catchup_probability_poisson(double q, std::uint32_t z)
{
    if (!(q >= 0) || !(q < 1)) throw std::domain_error("attacker fraction must lie in [0, 1)");
    if (q >= 0.5) return 1.0;
    const double p = 1.0 - q;
    const double lambda = z * q / p;
    double sum = 1.0;
    double poisson = std::exp(-lambda);
    for (std::uint32_t k = 0; k <= z; ++k) {
        if (k > 0) poisson *= lambda / k;
        sum -= poisson * (1 - std::pow(q / p, static_cast<double>(z - k)));
    }
    return sum;
}

namespace {

enum class Kind : std::uint8_t { found, deliver, partition_start, partition_end };

struct Event {
    double time;
    std::uint64_t seq;
    Kind kind;
    std::uint32_t node;
    std::uint32_t item;  // block id or partition index
    std::uint32_t from;  // sender for deliveries

    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

enum class Phase { none, waiting, racing, published };

class Simulator {
public:
    explicit Simulator(const SimScenario& s) : s_(s), rng_(s.seed)
    {
        s_.validate();
        const std::size_t n = s_.miners.size();
        nodes_.resize(n);
        blocks_.push_back(SimBlock{});  // genesis
        for (auto& node : nodes_) node.known.push_back(1);
        if (s_.integrated) real_hash_.push_back(Digest256{});

        if (auto a = s_.attacker_index()) {
            attacker_ = static_cast<std::int64_t>(*a);
            for (std::size_t i = 0; i < n; ++i)
                if (s_.miners[i].role == Role::honest) {
                    merchant_ = i;
                    break;
                }
        }
    }

    SimResult run()
    {
        result_.attack = attacker_ >= 0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) schedule_find(i, 0.0);
        for (std::size_t p = 0; p < s_.partitions.size(); ++p) {
            push(s_.partitions[p].start, Kind::partition_start, 0, static_cast<std::uint32_t>(p));
            push(s_.partitions[p].end, Kind::partition_end, 0, static_cast<std::uint32_t>(p));
        }
        active_.assign(s_.partitions.size(), false);

        if (attacker_ >= 0) {
            phase_ = Phase::waiting;
            first_private_ = create_block(static_cast<std::size_t>(attacker_), 0, 0.0);
            private_tip_ = first_private_;
            attacker_step();
        }

        while (!queue_.empty() && !done_) {
            const Event ev = queue_.top();
            queue_.pop();
            ++result_.events;
            now_ = ev.time;
            switch (ev.kind) {
            case Kind::found: on_found(ev); break;
            case Kind::deliver: on_deliver(ev); break;
            case Kind::partition_start: active_[ev.item] = true; break;
            case Kind::partition_end: on_heal(ev.item); break;
            }
        }
        return finish();
    }

private:
    struct Node {
        std::vector<std::uint8_t> known;
        std::uint32_t tip = 0;
        std::uint32_t reorgs = 0;
        std::vector<std::uint32_t> orphans;
    };

    void push(double t, Kind k, std::uint32_t node, std::uint32_t item, std::uint32_t from = 0)
    {
        queue_.push(Event{t, seq_++, k, node, item, from});
    }

    double exponential(double rate) { return -std::log1p(-rng_.uniform()) / rate; }

    double latency()
    {
        if (s_.latency.max == s_.latency.min) return s_.latency.min;
        return s_.latency.min + (s_.latency.max - s_.latency.min) * rng_.uniform();
    }

    void schedule_find(std::size_t node, double t)
    {
        const double rate = s_.miners[node].hashrate / s_.mean_block_interval;
        if (rate <= 0) return;
        const double at = t + exponential(rate);
        if (at > s_.horizon_time) return;
        push(at, Kind::found, static_cast<std::uint32_t>(node), 0);
    }

    bool knows(std::size_t node, std::uint32_t b) const
    {
        const auto& k = nodes_[node].known;
        return b < k.size() && k[b];
    }

    bool descends(std::uint32_t b, std::uint32_t ancestor) const
    {
        const std::uint32_t h = blocks_[ancestor].height;
        std::int64_t cur = b;
        while (cur >= 0 && blocks_[static_cast<std::size_t>(cur)].height > h) cur = blocks_[static_cast<std::size_t>(cur)].parent;
        return cur == ancestor;
    }

    std::uint32_t lca(std::uint32_t a, std::uint32_t b) const
    {
        while (blocks_[a].height > blocks_[b].height) a = static_cast<std::uint32_t>(blocks_[a].parent);
        while (blocks_[b].height > blocks_[a].height) b = static_cast<std::uint32_t>(blocks_[b].parent);
        while (a != b) {
            a = static_cast<std::uint32_t>(blocks_[a].parent);
            b = static_cast<std::uint32_t>(blocks_[b].parent);
        }
        return a;
    }

    bool in_side_a(std::size_t partition, std::size_t node) const
    {
        const auto& side = s_.partitions[partition].side_a;
        return std::find(side.begin(), side.end(), s_.miners[node].id) != side.end();
    }

    bool cut(std::size_t a, std::size_t b) const
    {
        for (std::size_t p = 0; p < active_.size(); ++p)
            if (active_[p] && in_side_a(p, a) != in_side_a(p, b)) return true;
        return false;
    }

    std::uint32_t create_block(std::size_t miner, std::uint32_t parent, double t)
    {
        SimBlock b;
        b.id = static_cast<std::uint32_t>(blocks_.size());
        b.parent = parent;
        b.height = blocks_[parent].height + 1;
        b.miner = s_.miners[miner].id;
        b.time = t;
        b.attacker = static_cast<std::int64_t>(miner) == attacker_;
        if (s_.integrated) mine_for_real(b);
        blocks_.push_back(std::move(b));
        return blocks_.back().id;
    }

    void mine_for_real(SimBlock& b)
    {
        const auto parent = static_cast<std::size_t>(b.parent);
        if (matrices_.size() <= parent) matrices_.resize(parent + 1);
        if (!matrices_[parent]) matrices_[parent] = generate_matrix(real_hash_[parent]);

        BlockHeader h;
        h.version = 1;
        h.parent_hash = real_hash_[parent];
        const std::uint8_t id_bytes[4] = {static_cast<std::uint8_t>(b.id), static_cast<std::uint8_t>(b.id >> 8),
                                          static_cast<std::uint8_t>(b.id >> 16), static_cast<std::uint8_t>(b.id >> 24)};
        h.payload_commitment = sha256(std::span<const std::uint8_t>(id_bytes));
        h.timestamp = static_cast<std::uint64_t>(b.time);
        h.compact_target = s_.integrated_bits;
        const Target target = decode_compact(h.compact_target);
        const auto nonce = mine_serial(h, *matrices_[parent], target, 0, 1ULL << 40);
        h.nonce = nonce.value_or(0);
        const Digest256 hash = header_hash(h, *matrices_[parent]);
        if (!nonce || !meets_target(hash, target)) ++result_.integrated_failures;
        b.nonce = h.nonce;
        b.pow_hash = to_hex(hash);
        real_hash_.push_back(hash);
    }

    void broadcast(std::size_t from, std::uint32_t b)
    {
        for (std::size_t j = 0; j < nodes_.size(); ++j)
            if (j != from)
                push(now_ + latency(), Kind::deliver, static_cast<std::uint32_t>(j), b, static_cast<std::uint32_t>(from));
    }

    void receive(std::size_t node, std::uint32_t b)
    {
        Node& n = nodes_[node];
        if (knows(node, b)) return;
        const auto parent = static_cast<std::uint32_t>(blocks_[b].parent);
        if (!knows(node, parent)) {
            if (std::find(n.orphans.begin(), n.orphans.end(), b) == n.orphans.end()) n.orphans.push_back(b);
            return;
        }
        if (n.known.size() <= b) n.known.resize(blocks_.size(), 0);
        n.known[b] = 1;
        if (blocks_[b].height > blocks_[n.tip].height) {
            if (!descends(b, n.tip)) ++n.reorgs;
            n.tip = b;
        }
        for (std::size_t i = 0; i < n.orphans.size(); ++i) {
            if (blocks_[n.orphans[i]].parent == b) {
                const std::uint32_t child = n.orphans[i];
                n.orphans.erase(n.orphans.begin() + static_cast<std::ptrdiff_t>(i));
                receive(node, child);
                i = static_cast<std::size_t>(-1);
            }
        }
    }

    bool mining_stopped() const { return s_.horizon_blocks != 0 && found_ >= s_.horizon_blocks; }

    void on_found(const Event& ev)
    {
        if (mining_stopped()) {
            if (attacker_ >= 0) done_ = true;
            return;
        }
        const std::size_t node = ev.node;
        schedule_find(node, ev.time);
        if (static_cast<std::int64_t>(node) == attacker_) {
            if (phase_ == Phase::waiting) return;  // idle until z confirmations
            ++found_;
            private_tip_ = create_block(node, private_tip_, ev.time);
            if (phase_ == Phase::published) publish();
            attacker_step();
            return;
        }
        ++found_;
        const std::uint32_t b = create_block(node, nodes_[node].tip, ev.time);
        receive(node, b);
        broadcast(node, b);
        if (node == merchant_) check_success();
    }

    void on_deliver(const Event& ev)
    {
        const std::size_t node = ev.node;
        if (cut(node, ev.from)) return;  // resent at heal
        receive(node, ev.item);
        if (static_cast<std::int64_t>(node) == attacker_) attacker_step();
        if (attacker_ >= 0 && node == merchant_) check_success();
    }

    void publish()
    {
        std::vector<std::uint32_t> chain;
        for (std::int64_t b = private_tip_; b > 0 && blocks_[static_cast<std::size_t>(b)].attacker;
             b = blocks_[static_cast<std::size_t>(b)].parent)
            if (!knows(static_cast<std::size_t>(attacker_), static_cast<std::uint32_t>(b)))
                chain.push_back(static_cast<std::uint32_t>(b));
        std::reverse(chain.begin(), chain.end());
        for (auto b : chain) {
            receive(static_cast<std::size_t>(attacker_), b);
            broadcast(static_cast<std::size_t>(attacker_), b);
        }
    }

    void attacker_step()
    {
        const auto a = static_cast<std::size_t>(attacker_);
        const std::uint32_t pub_tip = nodes_[a].tip;
        const std::uint32_t pub_h = blocks_[pub_tip].height;
        const std::uint32_t priv_h = blocks_[private_tip_].height;
        const bool public_is_ours = descends(pub_tip, first_private_);

        if (phase_ == Phase::waiting && pub_h >= s_.confirmations) phase_ = Phase::racing;
        if (phase_ == Phase::published && !public_is_ours && pub_h >= priv_h) phase_ = Phase::racing;
        if (phase_ == Phase::racing) {
            if (priv_h > pub_h) {
                phase_ = Phase::published;
                publish();
            } else if (s_.abandon_deficit != 0 && pub_h >= priv_h + s_.abandon_deficit) {
                result_.attacker_abandoned = true;
                done_ = true;
            }
        }
        check_success();
    }

    void check_success()
    {
        if (attacker_ < 0 || result_.attacker_success) return;
        if (descends(nodes_[merchant_].tip, first_private_)) {
            result_.attacker_success = true;
            done_ = true;
        }
    }

    std::uint32_t best_tip(std::size_t partition, bool side_a) const
    {
        std::uint32_t best = 0;
        bool any = false;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (in_side_a(partition, i) != side_a) continue;
            const std::uint32_t t = nodes_[i].tip;
            if (!any || blocks_[t].height > blocks_[best].height ||
                (blocks_[t].height == blocks_[best].height && t < best))
                best = t;
            any = true;
        }
        return best;
    }

    void on_heal(std::uint32_t p)
    {
        active_[p] = false;
        const std::uint32_t ta = best_tip(p, true);
        const std::uint32_t tb = best_tip(p, false);
        const std::uint32_t common = lca(ta, tb);
        result_.divergences.push_back(
            {now_, blocks_[ta].height - blocks_[common].height, blocks_[tb].height - blocks_[common].height});

        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            for (std::uint32_t b = 1; b < blocks_.size(); ++b) {
                if (knows(j, b)) continue;
                for (std::size_t i = 0; i < nodes_.size(); ++i) {
                    if (in_side_a(p, i) != in_side_a(p, j) && knows(i, b)) {
                        push(now_ + latency(), Kind::deliver, static_cast<std::uint32_t>(j), b,
                             static_cast<std::uint32_t>(i));
                        break;
                    }
                }
            }
        }
    }

    SimResult finish()
    {
        result_.end_time = now_;
        bool same = true;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            result_.nodes.push_back({s_.miners[i].id, nodes_[i].tip, blocks_[nodes_[i].tip].height, nodes_[i].reorgs});
            same = same && nodes_[i].tip == nodes_[0].tip;
        }
        result_.converged = same;
        result_.timeline = std::move(blocks_);
        return std::move(result_);
    }

    const SimScenario& s_;
    Xoshiro256pp rng_;
    std::vector<SimBlock> blocks_;
    std::vector<Node> nodes_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;
    double now_ = 0;
    std::uint64_t found_ = 0;
    std::vector<bool> active_;
    bool done_ = false;

    std::int64_t attacker_ = -1;
    std::size_t merchant_ = 0;
    Phase phase_ = Phase::none;
    std::uint32_t first_private_ = 0;
    std::uint32_t private_tip_ = 0;

    std::vector<Digest256> real_hash_;
    std::vector<std::optional<WeightMatrix>> matrices_;

    SimResult result_;
};

}  // namespace

SimResult run_scenario(const SimScenario& s) { return Simulator(s).run(); }

SimResult run_partition(const SimScenario& s)
{
    if (s.partitions.empty()) throw ConfigError("partition run needs a partition schedule");
    return run_scenario(s);
}

nlohmann::json to_json(const SimResult& r)
{
    nlohmann::json j;
    j["attack"] = r.attack;
    j["attacker_success"] = r.attacker_success;
    j["attacker_abandoned"] = r.attacker_abandoned;
    j["converged"] = r.converged;
    j["end_time"] = r.end_time;
    j["events"] = r.events;
    j["integrated_failures"] = r.integrated_failures;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (const auto& n : r.nodes)
        nodes.push_back({{"node", n.node}, {"tip", n.tip}, {"tip_height", n.tip_height}, {"reorgs", n.reorgs}});
    auto& div = j["divergences"] = nlohmann::json::array();
    for (const auto& d : r.divergences) div.push_back({{"time", d.time}, {"depth_a", d.depth_a}, {"depth_b", d.depth_b}});
    auto& tl = j["timeline"] = nlohmann::json::array();
    for (const auto& b : r.timeline) {
        nlohmann::json e = {{"id", b.id},         {"parent", b.parent},     {"height", b.height},
                            {"miner", b.miner},   {"time", b.time},         {"attacker", b.attacker}};
        if (!b.pow_hash.empty()) {
            e["pow_hash"] = b.pow_hash;
            e["nonce"] = b.nonce;
        }
        tl.push_back(std::move(e));
    }
    return j;
}

namespace {

struct ReplicaOutcome {
    bool success = false;
    bool abandoned = false;
    bool has_divergence = false;
    Divergence divergence{};
};

ReplicaOutcome run_one(const SimScenario& base, std::uint64_t i)
{
    SimScenario s = base;
    s.seed = base.seed + i;
    const SimResult r = run_scenario(s);
    ReplicaOutcome o{r.attacker_success, r.attacker_abandoned, !r.divergences.empty(), {}};
    if (o.has_divergence) o.divergence = r.divergences.front();
    return o;
}

ReplicaSummary reduce(const std::vector<ReplicaOutcome>& outcomes)
{
    ReplicaSummary sum;
    sum.runs = outcomes.size();
    std::uint64_t with_div = 0;
    double da = 0, db = 0;
    for (const auto& o : outcomes) {
        sum.successes += o.success;
        sum.abandoned += o.abandoned;
        if (o.has_divergence) {
            ++with_div;
            da += o.divergence.depth_a;
            db += o.divergence.depth_b;
        }
    }
    if (sum.runs) {
        sum.rate = static_cast<double>(sum.successes) / static_cast<double>(sum.runs);
        sum.std_error = std::sqrt(sum.rate * (1 - sum.rate) / static_cast<double>(sum.runs));
    }
    if (with_div) {
        sum.mean_divergence_a = da / static_cast<double>(with_div);
        sum.mean_divergence_b = db / static_cast<double>(with_div);
    }
    return sum;
}

}  // namespace

ReplicaSummary run_replicas_serial(const SimScenario& s, std::uint64_t runs)
{
    s.validate();
    std::vector<ReplicaOutcome> out(runs);
    for (std::uint64_t i = 0; i < runs; ++i) out[i] = run_one(s, i);
    return reduce(out);
}

ReplicaSummary run_replicas(const SimScenario& s, std::uint64_t runs)
{
    s.validate();
    std::vector<ReplicaOutcome> out(runs);
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(runs); ++i)
        out[static_cast<std::size_t>(i)] = run_one(s, static_cast<std::uint64_t>(i));
    return reduce(out);
}

SimScenario double_spend_scenario(double q, std::uint32_t z, std::uint64_t seed)
{
    if (!(q > 0) || !(q < 1)) throw ConfigError("attacker fraction must lie in (0, 1)");
    SimScenario s;
    s.seed = seed;
    s.miners = {{0, 1.0 - q, Role::honest}, {1, q, Role::attacker}};
    s.confirmations = z;
    s.horizon_blocks = 100000;
    return s;
}

namespace {

Role parse_role(const std::string& s)
{
    if (s == "honest") return Role::honest;
    if (s == "attacker") return Role::attacker;
    throw ConfigError("miner role must be 'honest' or 'attacker', got '" + s + "'");
}

}  // namespace

SimScenario scenario_from_config(const KvConfig& cfg, const std::vector<std::string_view>& extra_keys)
{
    std::vector<std::string_view> allowed = {"seed",          "mean_block_interval", "latency",
                                             "horizon_time",  "horizon_blocks",      "confirmations",
                                             "abandon_deficit", "integrated",        "integrated_bits",
                                             "attacker_fraction"};
    allowed.insert(allowed.end(), extra_keys.begin(), extra_keys.end());
    cfg.require_known(allowed, {"miner", "partition"});

    SimScenario s;
    const auto confirmations = static_cast<std::uint32_t>(cfg.get_u64("confirmations", 6));
    if (cfg.has("attacker_fraction")) {
        if (cfg.has("miner")) throw ConfigError("give either attacker_fraction or miner lines, not both");
        s = double_spend_scenario(cfg.get_double("attacker_fraction", 0), confirmations, 1);
    }
    s.seed = cfg.get_u64("seed", 1);
    s.confirmations = confirmations;
    s.mean_block_interval = cfg.get_double("mean_block_interval", 600);
    if (auto lat = cfg.get("latency")) {
        const auto parts = split(*lat, ',');
        if (parts.size() == 1) s.latency = {parse_double("latency", parts[0]), parse_double("latency", parts[0])};
        else if (parts.size() == 2) s.latency = {parse_double("latency", parts[0]), parse_double("latency", parts[1])};
        else throw ConfigError("latency must be 'delay' or 'min,max'");
    }
    if (cfg.has("horizon_time")) s.horizon_time = cfg.get_double("horizon_time", 0);
    s.horizon_blocks = cfg.get_u64("horizon_blocks", s.horizon_blocks);
    s.abandon_deficit = static_cast<std::uint32_t>(cfg.get_u64("abandon_deficit", s.abandon_deficit));
    s.integrated = cfg.get_bool("integrated", false);
    s.integrated_bits = static_cast<std::uint32_t>(cfg.get_u64("integrated_bits", s.integrated_bits));

    for (const auto& line : cfg.get_all("miner")) {
        const auto f = split(line, ' ');
        if (f.size() != 3) throw ConfigError("miner line must be 'id fraction role', got '" + line + "'");
        s.miners.push_back({static_cast<std::uint32_t>(parse_u64("miner", f[0])), parse_double("miner", f[1]),
                            parse_role(f[2])});
    }
    for (const auto& line : cfg.get_all("partition")) {
        const auto f = split(line, ' ');
        if (f.size() != 3) throw ConfigError("partition line must be 'start end id,id,...', got '" + line + "'");
        PartitionWindow w{parse_double("partition", f[0]), parse_double("partition", f[1]), {}};
        for (const auto& id : split(f[2], ',')) w.side_a.push_back(static_cast<std::uint32_t>(parse_u64("partition", id)));
        s.partitions.push_back(std::move(w));
    }
    s.validate();
    return s;
}

DifficultyRun simulate_difficulty(double hashrate, const Target& initial, const RetargetParams& p,
                                  std::size_t windows, std::uint64_t seed, bool expected_only)
{
    p.validate();
    if (!(hashrate > 0)) throw std::invalid_argument("hashrate must be positive");
    Xoshiro256pp rng(seed);
    DifficultyRun run;
    const std::size_t blocks = windows * p.window;
    run.timestamps.reserve(blocks + 1);
    run.timestamps.push_back(1'600'000'000);
    run.bits.push_back(encode_compact(initial));

    for (std::size_t h = 1; h <= blocks; ++h) {
        std::uint32_t bits = run.bits.back();
        if (retarget_due(h - 1, p)) {
            std::span<const std::uint64_t> ts(run.timestamps.data() + (h - 1 - p.window), p.window + 1);
            bits = encode_compact(retarget(ts, decode_compact(bits), p));
        }
        const double mean = work_from_target(decode_compact(bits)).convert_to<double>() / hashrate;
        const double interval = expected_only ? mean : -std::log1p(-rng.uniform()) * mean;
        const auto step = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(interval)));
        run.timestamps.push_back(run.timestamps.back() + step);
        run.bits.push_back(bits);
    }
    for (std::size_t k = 0; k < windows; ++k) {
        const double span = static_cast<double>(run.timestamps[(k + 1) * p.window] - run.timestamps[k * p.window]);
        run.window_mean_interval.push_back(span / static_cast<double>(p.window));
    }
    return run;
}

}  // namespace opow::netsim
