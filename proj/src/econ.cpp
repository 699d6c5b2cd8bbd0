#include "opow/econ.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace opow::econ {

namespace {
bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0; }

// Cohorts with no hashrate earn nothing; they stay on only if free to run.
double cost_per_hash(const Cohort& c)
{
    return c.hashrate > 0 ? c.opex_rate / c.hashrate : std::numeric_limits<double>::infinity();
}
}  // namespace

void MinerFleet::validate() const
{
    if (cohorts.empty()) throw std::invalid_argument("fleet needs at least one cohort");
    for (const auto& c : cohorts)
        if (!finite_nonneg(c.hashrate) || !finite_nonneg(c.capex_rate) || !finite_nonneg(c.opex_rate))
            throw std::invalid_argument("cohort rates must be finite and nonnegative");
    if (!(total_hashrate() > 0)) throw std::invalid_argument("fleet hashrate must be positive");
}

double MinerFleet::total_hashrate() const
{
    double h = 0;
    for (const auto& c : cohorts) h += c.hashrate;
    return h;
}

void MarketState::validate() const
{
    if (!(reward_value > 0) || !std::isfinite(reward_value) || !(block_interval > 0) || !std::isfinite(block_interval))
        throw std::invalid_argument("market reward and block interval must be positive");
}

ActiveSet active_set(const MinerFleet& fleet, const MarketState& market)
{
    fleet.validate();
    market.validate();
    const double rate = market.revenue_rate();

    ActiveSet s;
    s.active.assign(fleet.cohorts.size(), true);
    for (;;) {
        double h = 0;
        for (std::size_t i = 0; i < fleet.cohorts.size(); ++i)
            if (s.active[i]) h += fleet.cohorts[i].hashrate;
        s.hashrate = h;
        if (h <= 0) break;

        // Every active cohort earns rate / h per unit hashrate, so profitability is
        // ordered by OPEX per hash. Each round drops only the least efficient
        // unprofitable cohorts; dropping all unprofitable ones at once overshoots
        // to an empty fleet whenever the whole fleet starts under water.
        double worst = -1;
        for (std::size_t i = 0; i < fleet.cohorts.size(); ++i) {
            const auto& c = fleet.cohorts[i];
            if (!s.active[i]) continue;
            const double revenue = rate * c.hashrate / h;
            if (revenue < c.opex_rate * (1 - 1e-12)) worst = std::max(worst, cost_per_hash(c));
        }
        const bool removed = worst >= 0;
        for (std::size_t i = 0; removed && i < fleet.cohorts.size(); ++i) {
            const auto& c = fleet.cohorts[i];
            if (s.active[i] && rate * c.hashrate / h < c.opex_rate * (1 - 1e-12) && cost_per_hash(c) >= worst)
                s.active[i] = false;
        }
        ++s.rounds;
        if (!removed) break;
    }
    s.fraction = s.hashrate / fleet.total_hashrate();
    return s;
}

double active_hashrate(const MinerFleet& fleet, const MarketState& market)
{
    return active_set(fleet, market).hashrate;
}

AttackCost attack_cost(const MinerFleet& fleet, const MarketState& market, double duration,
                       double hardware_price_multiple, double amortization)
{
    if (!(duration >= 0)) throw std::invalid_argument("attack duration must be >= 0");
    if (!(hardware_price_multiple > 0) || !(amortization > 0))
        throw std::invalid_argument("price multiple and amortization must be positive");
    const ActiveSet s = active_set(fleet, market);
    double capex = 0, opex = 0;
    for (std::size_t i = 0; i < fleet.cohorts.size(); ++i) {
        if (!s.active[i]) continue;
        capex += fleet.cohorts[i].capex_rate;
        opex += fleet.cohorts[i].opex_rate;
    }
    AttackCost c;
    c.hardware = hardware_price_multiple * capex * amortization;
    c.energy = opex * duration;
    c.total = c.hardware + c.energy;
    c.matched_hashrate = s.hashrate;
    return c;
}

std::vector<ResiliencePoint> resilience_curve(const MinerFleet& fleet, const MarketState& market,
                                              std::span<const double> price_multipliers)
{
    std::vector<ResiliencePoint> out;
    for (double m : price_multipliers) {
        if (!(m > 0)) throw std::invalid_argument("price multipliers must be positive");
        MarketState scaled = market;
        scaled.reward_value *= m;
        const ActiveSet s = active_set(fleet, scaled);
        out.push_back({m, s.fraction, s.hashrate});
    }
    return out;
}

MinerFleet spread_fleet(const MarketState& market, double total_hashrate, std::size_t cohorts, double cost_lo,
                        double cost_hi, double opex_share)
{
    market.validate();
    if (cohorts == 0 || !(total_hashrate > 0)) throw std::invalid_argument("fleet needs cohorts and hashrate");
    if (!(cost_lo >= 0) || !(cost_hi >= cost_lo)) throw std::invalid_argument("cost spread must satisfy 0 <= lo <= hi");
    if (!(opex_share >= 0 && opex_share <= 1)) throw std::invalid_argument("opex share must lie in [0, 1]");

    const double h = total_hashrate / static_cast<double>(cohorts);
    const double per_hash = market.revenue_rate() / total_hashrate;
    MinerFleet f;
    for (std::size_t i = 0; i < cohorts; ++i) {
        const double u = cost_lo + (cost_hi - cost_lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(cohorts);
        const double cost = u * per_hash * h;
        f.cohorts.push_back({h, (1 - opex_share) * cost, opex_share * cost});
    }
    return f;
}

double calibrated_opex_floor(double multiplier, double surviving)
{
    if (!(multiplier > 0 && multiplier < 1) || !(surviving > 0 && surviving < 1))
        throw std::invalid_argument("calibration needs multiplier and surviving fraction in (0, 1)");
    const double lo = (multiplier / surviving - surviving) / (1 - surviving);
    if (!(lo >= 0 && lo < 1)) throw std::invalid_argument("calibration target is not reachable with a uniform spread");
    return lo;
}

MinerFleet calibrated_fleet(const MarketState& market, const CalibrationTarget& t)
{
    if (!(t.opex_share > 0 && t.opex_share <= 1)) throw std::invalid_argument("opex share must lie in (0, 1]");
    const double lo = calibrated_opex_floor(t.multiplier, t.surviving);
    return spread_fleet(market, t.total_hashrate, t.cohorts, lo / t.opex_share, 1 / t.opex_share, t.opex_share);
}

EconConfig econ_from_config(const KvConfig& cfg, const std::vector<std::string_view>& extra_keys)
{
    std::vector<std::string_view> allowed = {"reward_value",   "block_interval",   "fleet",
                                             "cohorts",        "total_hashrate",   "cost_lo",
                                             "cost_hi",        "opex_share",       "calib_multiplier",
                                             "calib_surviving", "multipliers",     "duration",
                                             "hardware_price_multiple",            "amortization_years"};
    allowed.insert(allowed.end(), extra_keys.begin(), extra_keys.end());
    cfg.require_known(allowed, {"cohort"});

    EconConfig e;
    e.market.reward_value = cfg.get_double("reward_value", 6.25 * 10000);
    e.market.block_interval = cfg.get_double("block_interval", 600);
    e.duration = cfg.get_double("duration", 86400);
    e.hardware_price_multiple = cfg.get_double("hardware_price_multiple", 1.0);
    e.amortization = cfg.get_double("amortization_years", 2.0) * kSecondsPerYear;
    e.multipliers = cfg.get_doubles("multipliers", {1.0, 0.9, 0.8, 0.7, 0.6, 0.55, 0.5, 0.4, 0.3, 0.2, 0.1});
    try {
        e.market.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }

    const auto cohort_lines = cfg.get_all("cohort");
    const std::string kind = cfg.get_string("fleet", cohort_lines.empty() ? "calibrated" : "explicit");
    try {
        if (kind == "explicit") {
            if (cohort_lines.empty()) throw ConfigError("fleet = explicit needs cohort lines");
            for (const auto& line : cohort_lines) {
                const auto f = split(line, ' ');
                if (f.size() != 3)
                    throw ConfigError("cohort line must be 'hashrate capex_rate opex_rate', got '" + line + "'");
                e.fleet.cohorts.push_back(
                    {parse_double("cohort", f[0]), parse_double("cohort", f[1]), parse_double("cohort", f[2])});
            }
        } else {
            if (!cohort_lines.empty()) throw ConfigError("cohort lines require fleet = explicit");
            const auto n = static_cast<std::size_t>(cfg.get_u64("cohorts", 1000));
            const double total = cfg.get_double("total_hashrate", 60e18);
            if (kind == "calibrated") {
                CalibrationTarget t;
                t.multiplier = cfg.get_double("calib_multiplier", t.multiplier);
                t.surviving = cfg.get_double("calib_surviving", t.surviving);
                t.opex_share = cfg.get_double("opex_share", t.opex_share);
                t.total_hashrate = total;
                t.cohorts = n;
                e.fleet = calibrated_fleet(e.market, t);
            } else if (kind == "spread") {
                e.fleet = spread_fleet(e.market, total, n, cfg.get_double("cost_lo", 0.5),
                                       cfg.get_double("cost_hi", 1.0), cfg.get_double("opex_share", 0.5));
            } else {
                throw ConfigError("fleet must be explicit, calibrated or spread, got '" + kind + "'");
            }
        }
        e.fleet.validate();
        if (!(e.duration >= 0) || !(e.hardware_price_multiple > 0) || !(e.amortization > 0))
            throw ConfigError("duration must be >= 0, price multiple and amortization positive");
        for (double m : e.multipliers)
            if (!(m > 0)) throw ConfigError("price multipliers must be positive");
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    return e;
}

nlohmann::json to_json(const AttackCost& c)
{
    return {{"hardware", c.hardware}, {"energy", c.energy}, {"total", c.total}, {"matched_hashrate", c.matched_hashrate}};
}

nlohmann::json to_json(const ResiliencePoint& p)
{
    return {{"multiplier", p.multiplier}, {"active_fraction", p.active_fraction}, {"active_hashrate", p.active_hashrate}};
}

}  // namespace opow::econ
