#pragma once

// Deterministic discrete-event simulation of miners and links.
//
// Mining is abstracted: each miner finds blocks as a Poisson process with rate
// hashrate / mean_block_interval. Every block carries one unit of work, so fork
// choice compares heights (first-seen on ties).
//
// Double-spend model (one attacker): the attacker holds one withheld block on
// genesis carrying the conflicting spend. It keeps its hashrate idle until the
// public chain has z confirmations, then races privately and publishes as soon
// as its branch is strictly longer. The race starts z - 1 blocks behind and
// needs a lead of one, so it succeeds with probability (q/p)^z.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "opow/kvconfig.hpp"
#include "opow/pow.hpp"

namespace opow::netsim {

enum class Role { honest, attacker };

struct MinerSpec {
    std::uint32_t id = 0;
    double hashrate = 0;  // fraction of the total, sums to 1
    Role role = Role::honest;
};

// Per-delivery delay, uniform in [min, max] seconds (fixed when equal).
struct Latency {
    double min = 0;
    double max = 0;
};

struct PartitionWindow {
    double start = 0;
    double end = 0;
    std::vector<std::uint32_t> side_a;  // miner ids; everyone else is side B
};

struct SimScenario {
    std::uint64_t seed = 1;
    std::vector<MinerSpec> miners;
    double mean_block_interval = 600;
    Latency latency{};
    double horizon_time = std::numeric_limits<double>::infinity();
    std::uint64_t horizon_blocks = 0;  // 0 = unlimited
    std::uint32_t confirmations = 6;
    std::vector<PartitionWindow> partitions;
    // Attacker gives up when this many blocks behind; 0 = never.
    std::uint32_t abandon_deficit = 40;
    // Mine every simulated block for real with HeavyHash at integrated_bits.
    bool integrated = false;
    std::uint32_t integrated_bits = 0x20100000;  // 2^252

    // Throws ConfigError.
    void validate() const;
    std::optional<std::size_t> attacker_index() const;
};

struct SimBlock {
    std::uint32_t id = 0;
    std::int64_t parent = -1;  // -1 only for genesis
    std::uint32_t height = 0;
    std::uint32_t miner = 0;   // miner id; genesis reports 0
    double time = 0;
    bool attacker = false;
    std::string pow_hash;  // integrated mode only
    std::uint64_t nonce = 0;
};

struct NodeResult {
    std::uint32_t node = 0;
    std::uint32_t tip = 0;
    std::uint32_t tip_height = 0;
    std::uint32_t reorgs = 0;
};

struct Divergence {
    double time = 0;
    std::uint32_t depth_a = 0;
    std::uint32_t depth_b = 0;
};

struct SimResult {
    std::vector<NodeResult> nodes;
    std::vector<SimBlock> timeline;
    std::vector<Divergence> divergences;
    bool attack = false;
    bool attacker_success = false;
    bool attacker_abandoned = false;
    bool converged = false;
    double end_time = 0;
    std::uint64_t events = 0;
    std::uint64_t integrated_failures = 0;
};

nlohmann::json to_json(const SimResult& r);

SimResult run_scenario(const SimScenario& s);

// Same simulator; additionally rejects scenarios without a partition schedule.
SimResult run_partition(const SimScenario& s);

// (q / (1 - q))^z for q < 1/2, else 1. Throws std::domain_error for q outside [0, 1).
double catchup_probability(double q, std::uint32_t z);

// Variant where the attacker mines from the start instead of pre-holding one
// block: its progress while the honest chain gains z blocks is Poisson with mean
// z q / (1 - q). Reported beside the exact oracle for comparison only.
double catchup_probability_poisson(double q, std::uint32_t z);

struct ReplicaSummary {
    std::uint64_t runs = 0;
    std::uint64_t successes = 0;
    std::uint64_t abandoned = 0;
    double rate = 0;
    double std_error = 0;
    double mean_divergence_a = 0;
    double mean_divergence_b = 0;
};

// Replica i runs with seed s.seed + i. The parallel version splits replicas
// across OpenMP threads and reduces in replica order.
ReplicaSummary run_replicas(const SimScenario& s, std::uint64_t runs);
ReplicaSummary run_replicas_serial(const SimScenario& s, std::uint64_t runs);

// Two-miner double-spend scenario: attacker with fraction q, honest 1 - q.
SimScenario double_spend_scenario(double q, std::uint32_t z, std::uint64_t seed);

// Key-value scenario file. Keys: seed, mean_block_interval, latency (d or
// min,max), horizon_time, horizon_blocks, confirmations, abandon_deficit,
// integrated, integrated_bits, runs, miner (repeatable: "id fraction role"),
// partition (repeatable: "start end id,id,...").
// Without miner lines, `attacker_fraction` (plus `confirmations`) builds the
// two-miner double-spend scenario. `extra_keys` are accepted and ignored.
SimScenario scenario_from_config(const KvConfig& cfg, const std::vector<std::string_view>& extra_keys = {});

// Constant-hashrate chain driven by the real retarget rule and compact
// encoding. Block times are exponential with mean work / hashrate, or exactly
// the mean when `expected_only`.
struct DifficultyRun {
    std::vector<std::uint64_t> timestamps;  // genesis first
    std::vector<std::uint32_t> bits;
    std::vector<double> window_mean_interval;
};
DifficultyRun simulate_difficulty(double hashrate, const Target& initial, const RetargetParams& p,
                                  std::size_t windows, std::uint64_t seed, bool expected_only = false);

}  // namespace opow::netsim
