#pragma once

// Expectation-level mining economics. Revenue is shared pro-rata among active
// hashrate; a cohort stays on while its revenue covers OPEX (CAPEX is sunk).

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

#include "opow/kvconfig.hpp"

namespace opow::econ {

struct Cohort {
    double hashrate = 0;    // hashes/s
    double capex_rate = 0;  // $/s amortized hardware cost
    double opex_rate = 0;   // $/s energy cost
};

struct MinerFleet {
    std::vector<Cohort> cohorts;

    // Throws std::invalid_argument.
    void validate() const;
    double total_hashrate() const;
};

struct MarketState {
    double reward_value = 0;    // $ per block
    double block_interval = 600;  // seconds

    void validate() const;
    double revenue_rate() const { return reward_value / block_interval; }
};

inline constexpr double kSecondsPerYear = 365.25 * 86400;
inline constexpr double kDefaultAmortization = 2 * kSecondsPerYear;

struct ActiveSet {
    std::vector<bool> active;
    double hashrate = 0;
    double fraction = 0;
    std::size_t rounds = 0;  // removal passes until stable
};

// Fixed point of iterated removal: among cohorts whose pro-rata revenue at the
// current active hashrate is below their OPEX, drop those with the highest OPEX
// per hash, repeat until stable. The result is the largest active set in which
// every member covers its OPEX.
ActiveSet active_set(const MinerFleet& fleet, const MarketState& market);
double active_hashrate(const MinerFleet& fleet, const MarketState& market);

struct AttackCost {
    double hardware = 0;  // multiple * sum(capex_rate) * amortization
    double energy = 0;    // sum(opex_rate) * duration
    double total = 0;
    double matched_hashrate = 0;
};

// Cost of matching the currently active hashrate for `duration` seconds.
AttackCost attack_cost(const MinerFleet& fleet, const MarketState& market, double duration,
                       double hardware_price_multiple = 1.0, double amortization = kDefaultAmortization);

struct ResiliencePoint {
    double multiplier = 0;
    double active_fraction = 0;
    double active_hashrate = 0;
};

std::vector<ResiliencePoint> resilience_curve(const MinerFleet& fleet, const MarketState& market,
                                              std::span<const double> price_multipliers);

// n equal cohorts whose total cost per hash, in units of the baseline revenue
// per hash, sits at the midpoints of a uniform grid on [cost_lo, cost_hi];
// opex_share of each cohort's cost is OPEX, the rest amortized CAPEX.
MinerFleet spread_fleet(const MarketState& market, double total_hashrate, std::size_t cohorts, double cost_lo,
                        double cost_hi, double opex_share);

// Lower end of a uniform OPEX spread [lo, 1] (baseline revenue per hash = 1)
// for which a price multiplier m leaves `surviving` of the hashrate active:
// lo = (m / F - F) / (1 - F).
double calibrated_opex_floor(double multiplier, double surviving);

struct CalibrationTarget {
    double multiplier = 0.55;        // 45% loss of market value
    double surviving = 35.0 / 60.0;  // 60 -> 35 EH/s
    double opex_share = 0.6;
    double total_hashrate = 60e18;
    std::size_t cohorts = 1000;
};

MinerFleet calibrated_fleet(const MarketState& market, const CalibrationTarget& target = {});

// Keys: reward_value, block_interval, cohort (repeatable "hashrate capex_rate
// opex_rate"), or fleet = calibrated | spread with cohorts, total_hashrate,
// cost_lo, cost_hi, opex_share, calib_multiplier, calib_surviving.
struct EconConfig {
    MarketState market;
    MinerFleet fleet;
    std::vector<double> multipliers;
    double duration = 86400;
    double hardware_price_multiple = 1.0;
    double amortization = kDefaultAmortization;
};

EconConfig econ_from_config(const KvConfig& cfg, const std::vector<std::string_view>& extra_keys = {});

nlohmann::json to_json(const AttackCost& c);
nlohmann::json to_json(const ResiliencePoint& p);

}  // namespace opow::econ
