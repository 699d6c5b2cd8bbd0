// opow: command-line driver for hashing, mining, chain simulation, attack
// Monte Carlo, photonic emulation and economics runs.
//
// Output: one header record (subcommand, resolved configuration, wall-clock
// timestamp) followed by one JSON record per line. Exit codes: 0 ok,
// 1 verification failure, 2 configuration error, 3 numeric failure.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "opow/chain.hpp"
#include "opow/digest.hpp"
#include "opow/econ.hpp"
#include "opow/heavyhash.hpp"
#include "opow/kvconfig.hpp"
#include "opow/netsim.hpp"
#include "opow/photonic.hpp"
#include "opow/pow.hpp"

using nlohmann::json;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericError = 3 };

struct VerifyFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::string output_path;
    int threads = 0;
};

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw opow::ConfigError("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

    void header(const std::string& cmd, json resolved)
    {
        const auto now = std::chrono::system_clock::now();
        json h = {{"record", "header"},
                  {"subcommand", cmd},
                  {"config", std::move(resolved)},
                  {"timestamp", std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()}};
        stream() << h.dump() << '\n';
    }
    void record(json r)
    {
        r["record"] = "result";
        stream() << r.dump() << '\n';
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

opow::KvConfig load_config(const Globals& g)
{
    opow::KvConfig cfg = g.config_path.empty() ? opow::KvConfig{} : opow::KvConfig::load(g.config_path);
    if (g.seed) cfg.set("seed", std::to_string(*g.seed));
    return cfg;
}

// ---- chain parameters shared by mine and verify ----

const std::vector<std::string_view> kChainKeys = {"seed",           "genesis_bits",      "genesis_timestamp",
                                                  "retarget_window", "expected_interval", "blocks",
                                                  "block_spacing",   "transfers_per_block"};

opow::ChainParams chain_params(const opow::KvConfig& cfg)
{
    opow::ChainParams p;
    p.genesis_bits = static_cast<std::uint32_t>(cfg.get_u64("genesis_bits", p.genesis_bits));
    p.genesis_timestamp = cfg.get_u64("genesis_timestamp", p.genesis_timestamp);
    p.retarget.window = cfg.get_u64("retarget_window", p.retarget.window);
    p.retarget.expected_interval = cfg.get_u64("expected_interval", p.retarget.expected_interval);
    try {
        p.retarget.validate();
        opow::decode_compact(p.genesis_bits);
    } catch (const std::exception& e) {
        throw opow::ConfigError(e.what());
    }
    return p;
}

json chain_params_json(const opow::ChainParams& p)
{
    return {{"genesis_bits", p.genesis_bits},
            {"genesis_timestamp", p.genesis_timestamp},
            {"retarget_window", p.retarget.window},
            {"expected_interval", p.retarget.expected_interval}};
}

// ---- subcommands ----

int cmd_heavyhash(const std::string& input_hex, const std::string& seed_hex, bool identity, unsigned rounds)
{
    const opow::Bytes input = opow::from_hex(input_hex);
    opow::HeavyHashParams params;
    params.rounds = rounds;
    const opow::WeightMatrix m =
        identity ? opow::WeightMatrix::identity(opow::kNibbles) : opow::generate_matrix(opow::digest_from_hex(seed_hex));
    std::cout << opow::to_hex(opow::heavyhash(params, m, input).view()) << '\n';
    return kOk;
}

int cmd_mine(const Globals& g, const std::string& chain_path)
{
    const auto cfg = load_config(g);
    cfg.require_known(kChainKeys);
    const auto params = chain_params(cfg);
    const auto blocks = cfg.get_u64("blocks", 1);
    const auto spacing = cfg.get_u64("block_spacing", params.retarget.expected_interval);
    const auto per_block = cfg.get_u64("transfers_per_block", 1);
    const auto seed = cfg.get_u64("seed", 1);
    if (spacing == 0) throw opow::ConfigError("block_spacing must be positive");

    Output out(g.output_path);
    json resolved = chain_params_json(params);
    resolved.update({{"blocks", blocks}, {"block_spacing", spacing}, {"transfers_per_block", per_block},
                     {"seed", seed}, {"chain", chain_path}});
    out.header("mine", resolved);

    opow::ChainIndex index(params);
    std::vector<opow::Block> mined;
    for (std::uint64_t i = 0; i < blocks; ++i) {
        const auto& parent = index.tip();
        std::vector<opow::Transfer> transfers;
        for (std::uint64_t t = 0; t < per_block; ++t)
            transfers.push_back({seed, i, 1 + t, (seed << 32) ^ (i << 12) ^ t});
        const std::uint64_t ts = parent.block.header.timestamp + spacing;
        auto b = opow::mine_block(index, parent, std::move(transfers), ts);
        if (!b) throw std::runtime_error("nonce space exhausted");
        const auto change = index.add_block(*b);
        if (change.verdict != opow::Verdict::valid)
            throw std::logic_error("freshly mined block rejected: " + std::string(opow::to_string(change.verdict)));
        mined.push_back(*b);
        out.record({{"height", index.tip().height},
                    {"hash", opow::to_hex(index.tip().hash.view())},
                    {"nonce", b->header.nonce},
                    {"compact_target", b->header.compact_target},
                    {"timestamp", b->header.timestamp}});
    }
    std::ofstream f(chain_path, std::ios::binary);
    if (!f) throw opow::ConfigError("cannot write chain file " + chain_path);
    opow::write_block_stream(mined, f);
    return kOk;
}

int cmd_verify(const Globals& g, const std::string& chain_path)
{
    const auto cfg = load_config(g);
    cfg.require_known(kChainKeys);
    const auto params = chain_params(cfg);
    std::ifstream f(chain_path, std::ios::binary);
    if (!f) throw opow::ConfigError("cannot read chain file " + chain_path);
    std::vector<opow::Block> blocks;
    try {
        blocks = opow::read_block_stream(f);
    } catch (const std::exception& e) {
        throw VerifyFailure(std::string("malformed: ") + e.what());
    }

    Output out(g.output_path);
    json resolved = chain_params_json(params);
    resolved["chain"] = chain_path;
    out.header("verify", resolved);

    opow::ChainIndex index(params);
    std::optional<opow::Verdict> failure;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto change = index.add_block(blocks[i]);
        out.record({{"position", i},
                    {"hash", opow::to_hex(opow::block_hash(blocks[i]).view())},
                    {"verdict", opow::to_string(change.verdict)}});
        if (change.verdict != opow::Verdict::valid && !failure) failure = change.verdict;
    }
    out.record({{"summary", true}, {"blocks", blocks.size()}, {"tip_height", index.tip().height},
                {"verdict", failure ? opow::to_string(*failure) : "valid"}});
    if (failure) throw VerifyFailure(std::string(opow::to_string(*failure)));
    return kOk;
}

json scenario_json(const opow::netsim::SimScenario& s)
{
    json miners = json::array();
    for (const auto& m : s.miners)
        miners.push_back({{"id", m.id}, {"hashrate", m.hashrate},
                          {"role", m.role == opow::netsim::Role::attacker ? "attacker" : "honest"}});
    json parts = json::array();
    for (const auto& p : s.partitions) parts.push_back({{"start", p.start}, {"end", p.end}, {"side_a", p.side_a}});
    json j = {{"seed", s.seed},
              {"miners", miners},
              {"mean_block_interval", s.mean_block_interval},
              {"latency", {s.latency.min, s.latency.max}},
              {"horizon_blocks", s.horizon_blocks},
              {"confirmations", s.confirmations},
              {"partitions", parts},
              {"abandon_deficit", s.abandon_deficit},
              {"integrated", s.integrated},
              {"integrated_bits", s.integrated_bits}};
    j["horizon_time"] = std::isfinite(s.horizon_time) ? json(s.horizon_time) : json("inf");
    return j;
}

opow::netsim::SimScenario checked_scenario(const opow::KvConfig& cfg, const std::vector<std::string_view>& extra)
{
    auto s = opow::netsim::scenario_from_config(cfg, extra);
    s.validate();
    return s;
}

int cmd_chainsim(const Globals& g)
{
    const auto cfg = load_config(g);
    const auto s = checked_scenario(cfg, {});
    Output out(g.output_path);
    out.header("chainsim", scenario_json(s));
    const auto r = s.partitions.empty() ? opow::netsim::run_scenario(s) : opow::netsim::run_partition(s);
    out.record(opow::netsim::to_json(r));
    return kOk;
}

int cmd_attack(const Globals& g, std::optional<double> q, std::optional<std::uint32_t> z,
               std::optional<std::uint64_t> runs_flag)
{
    auto cfg = load_config(g);
    if (q) cfg.set("attacker_fraction", std::to_string(*q));
    if (z) cfg.set("confirmations", std::to_string(*z));
    if (!cfg.has("attacker_fraction") && cfg.get_all("miner").empty())
        throw opow::ConfigError("attack needs attacker_fraction (or --q) or miner lines");
    const auto s = checked_scenario(cfg, {"runs"});
    const auto att = s.attacker_index();
    if (!att) throw opow::ConfigError("attack scenario needs an attacker miner");
    const std::uint64_t runs = runs_flag ? *runs_flag : cfg.get_u64("runs", 100000);
    if (runs == 0) throw opow::ConfigError("runs must be positive");

    Output out(g.output_path);
    json resolved = scenario_json(s);
    resolved["runs"] = runs;
    out.header("attack", resolved);

    const double qv = s.miners[*att].hashrate;
    const auto summary = opow::netsim::run_replicas(s, runs);
    out.record({{"q", qv},
                {"z", s.confirmations},
                {"runs", summary.runs},
                {"successes", summary.successes},
                {"abandoned", summary.abandoned},
                {"success_rate", summary.rate},
                {"std_error", summary.std_error},
                {"oracle", opow::netsim::catchup_probability(qv, s.confirmations)},
                {"poisson_oracle", opow::netsim::catchup_probability_poisson(qv, s.confirmations)}});
    return kOk;
}

int cmd_photonic(const Globals& g)
{
    const auto cfg = load_config(g);
    cfg.require_known({"seed", "matrix_seed", "samples", "phase_sigma", "detector_sigma", "adc_bits"});
    const auto seed = cfg.get_u64("seed", 1);
    const auto samples = cfg.get_u64("samples", 1000);
    const auto sigmas = cfg.get_doubles("phase_sigma", {0.0, 0.01, 0.05, 0.1});
    const auto detector = cfg.get_double("detector_sigma", 0.0);
    const auto bits = cfg.get_u64("adc_bits", 24);
    const auto matrix_hex = cfg.get_string("matrix_seed", std::string(64, '0'));
    if (samples == 0) throw opow::ConfigError("samples must be positive");

    std::vector<opow::photonic::NoiseModel> grid;
    for (double s : sigmas) grid.push_back({s, detector, static_cast<unsigned>(bits)});
    for (const auto& n : grid) {
        try {
            n.validate();
        } catch (const std::invalid_argument& e) {
            throw opow::ConfigError(e.what());
        }
    }
    opow::Digest256 matrix_seed;
    try {
        matrix_seed = opow::digest_from_hex(matrix_hex);
    } catch (const opow::HexError& e) {
        throw opow::ConfigError(std::string("matrix_seed: ") + e.what());
    }

    Output out(g.output_path);
    out.header("photonic", {{"seed", seed},
                            {"matrix_seed", matrix_hex},
                            {"samples", samples},
                            {"phase_sigma", sigmas},
                            {"detector_sigma", detector},
                            {"adc_bits", bits}});

    const auto m = opow::generate_matrix(matrix_seed);
    const auto synth = opow::photonic::svd_synthesize(m);
    out.record({{"kind", "synthesis"}, {"scale", synth.scale}, {"residual", synth.residual},
                {"mesh_nodes", synth.left.node_count() + synth.right.node_count()}});
    for (const auto& row : opow::photonic::fidelity_sweep(m, synth, grid, samples, seed)) {
        out.record({{"kind", "fidelity"},
                    {"phase_sigma", row.noise.phase_sigma},
                    {"detector_sigma", row.noise.detector_sigma},
                    {"adc_bits", row.noise.adc_bits},
                    {"samples", row.samples},
                    {"nibble_error_rate", row.nibble_error_rate},
                    {"nibble_error_se", row.nibble_error_se},
                    {"hash_mismatch_rate", row.hash_mismatch_rate},
                    {"hash_mismatch_se", row.hash_mismatch_se}});
    }
    return kOk;
}

int cmd_econ(const Globals& g)
{
    const auto cfg = load_config(g);
    const auto e = opow::econ::econ_from_config(cfg, {"seed"});
    Output out(g.output_path);
    json cohorts = json::array();
    double capex = 0, opex = 0;
    for (const auto& c : e.fleet.cohorts) {
        capex += c.capex_rate;
        opex += c.opex_rate;
    }
    out.header("econ", {{"reward_value", e.market.reward_value},
                        {"block_interval", e.market.block_interval},
                        {"cohorts", e.fleet.cohorts.size()},
                        {"total_hashrate", e.fleet.total_hashrate()},
                        {"capex_rate", capex},
                        {"opex_rate", opex},
                        {"multipliers", e.multipliers},
                        {"duration", e.duration},
                        {"hardware_price_multiple", e.hardware_price_multiple},
                        {"amortization", e.amortization},
                        {"fleet_config", cfg.to_json()}});

    for (const auto& p : opow::econ::resilience_curve(e.fleet, e.market, e.multipliers)) {
        auto r = opow::econ::to_json(p);
        r["kind"] = "resilience";
        out.record(r);
    }
    auto c = opow::econ::to_json(
        opow::econ::attack_cost(e.fleet, e.market, e.duration, e.hardware_price_multiple, e.amortization));
    c["kind"] = "attack_cost";
    c["duration"] = e.duration;
    out.record(c);
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optical proof-of-work toolkit"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Override the config seed");
    app.add_option("--config", g.config_path, "Key-value configuration file");
    app.add_option("--output", g.output_path, "Write records here instead of stdout");
    app.add_option("--threads", g.threads, "OpenMP thread count (0 = runtime default)")->check(CLI::NonNegativeNumber);

    std::string hh_input, hh_seed(64, '0');
    bool hh_identity = false;
    unsigned hh_rounds = 1;
    auto* hh = app.add_subcommand("heavyhash", "Print HeavyHash of a hex input");
    hh->add_option("input", hh_input, "Input bytes as hex (may be empty)")->required();
    hh->add_option("--seed-digest", hh_seed, "Matrix seed digest (hex, default all zero)");
    hh->add_flag("--identity", hh_identity, "Use the identity matrix (double SHA-256)");
    hh->add_option("--rounds", hh_rounds, "Sequential rounds")->check(CLI::PositiveNumber);

    std::string chain_path = "chain.bin";
    auto* mine = app.add_subcommand("mine", "Mine a chain from genesis");
    mine->add_option("--chain", chain_path, "Block stream to write");
    auto* verify = app.add_subcommand("verify", "Validate a block stream");
    verify->add_option("--chain", chain_path, "Block stream to read");

    auto* chainsim = app.add_subcommand("chainsim", "Run one network simulation");

    std::optional<double> q;
    std::optional<std::uint32_t> z;
    std::optional<std::uint64_t> runs;
    auto* attack = app.add_subcommand("attack", "Double-spend Monte Carlo");
    attack->add_option("--q", q, "Attacker hashrate fraction");
    attack->add_option("--z", z, "Merchant confirmations");
    attack->add_option("--runs", runs, "Replica count");

    auto* photonic = app.add_subcommand("photonic", "Photonic fidelity sweep");
    auto* econ = app.add_subcommand("econ", "Economics tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    if (*seed_opt) g.seed = seed_value;
    if (g.threads > 0) omp_set_num_threads(g.threads);

    try {
        if (*hh) return cmd_heavyhash(hh_input, hh_seed, hh_identity, hh_rounds);
        if (*mine) return cmd_mine(g, chain_path);
        if (*verify) return cmd_verify(g, chain_path);
        if (*chainsim) return cmd_chainsim(g);
        if (*attack) return cmd_attack(g, q, z, runs);
        if (*photonic) return cmd_photonic(g);
        if (*econ) return cmd_econ(g);
    } catch (const VerifyFailure& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return kVerifyFailed;
    } catch (const opow::photonic::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumericError;
    } catch (const opow::photonic::DecompositionError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumericError;
    } catch (const opow::HexError& e) {
        std::cerr << "bad hex: " << e.what() << '\n';
        return kConfigError;
    } catch (const opow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "internal failure: " << e.what() << '\n';
        return kNumericError;
    }
    return kOk;
}
