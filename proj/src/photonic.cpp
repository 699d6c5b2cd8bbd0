#include "opow/photonic.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "opow/xoshiro.hpp"

namespace opow::photonic {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTiny = 1e-15;

double wrap_phase(double p)
{
    p = std::fmod(p, 2 * kPi);
    if (p < 0) p += 2 * kPi;
    if (p >= 2 * kPi) p = 0;
    return p;
}
}  // namespace

OpticalField::OpticalField(CVector a) : amplitudes(std::move(a))
{
    const auto n = amplitudes.size();
    if (n != 2 && n != 16 && n != 64) throw std::invalid_argument("optical field size must be 2, 16 or 64");
    if (!amplitudes.allFinite()) throw std::invalid_argument("optical field has non-finite entries");
}

MeshConfiguration MeshConfiguration::identity(std::size_t n)
{
    MeshConfiguration c;
    c.n = n;
    c.layers.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        const std::size_t offset = l % 2;
        const std::size_t nodes = n > offset ? (n - offset) / 2 : 0;
        c.layers[l].assign(nodes, CouplerNode{});
    }
    c.output_phases.assign(n, 0.0);
    return c;
}

std::size_t MeshConfiguration::node_count() const
{
    std::size_t total = 0;
    for (const auto& l : layers) total += l.size();
    return total;
}

double mzm_amplitude(double phase) { return std::cos(phase / 2); }

double drive_phase(std::uint8_t nibble) { return 2 * std::acos(std::clamp(nibble / 15.0, 0.0, 1.0)); }

OpticalField encode_nibbles(std::span<const std::uint8_t> x)
{
    CVector a(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) a[static_cast<Eigen::Index>(i)] = mzm_amplitude(drive_phase(x[i]));
    return OpticalField(std::move(a));
}

Eigen::Matrix2cd coupler_unitary(const CouplerNode& node)
{
    const double c = std::cos(node.theta);
    const double s = std::sin(node.theta);
    const Complex e = std::polar(1.0, node.phi);
    const Complex is{0, s};
    Eigen::Matrix2cd m;
    m << e * c, is, e * is, c;
    return m;
}

namespace {

// In-place 2x2 transfer on modes (a, a+1).
inline void couple(Complex& va, Complex& vb, double theta, double phi)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Complex pa = va * std::polar(1.0, phi);
    const Complex is{0, s};
    va = c * pa + is * vb;
    vb = is * pa + c * vb;
}

// Applies the mesh to v. `jitter` returns the additive error for the next
// phase shifter (theta, phi per node in order, then output phases).
template <typename Jitter>
void propagate(const MeshConfiguration& c, CVector& v, Jitter&& jitter)
{
    for (std::size_t l = 0; l < c.layers.size(); ++l) {
        for (std::size_t k = 0; k < c.layers[l].size(); ++k) {
            const auto a = static_cast<Eigen::Index>(MeshConfiguration::top_mode(l, k));
            const auto& node = c.layers[l][k];
            const double theta = node.theta + jitter();
            const double phi = node.phi + jitter();
            couple(v[a], v[a + 1], theta, phi);
        }
    }
    for (std::size_t i = 0; i < c.n; ++i)
        v[static_cast<Eigen::Index>(i)] *= std::polar(1.0, c.output_phases[i] + jitter());
}

}  // namespace

CVector apply_mesh(const MeshConfiguration& c, const CVector& field)
{
    if (static_cast<std::size_t>(field.size()) != c.n) throw std::invalid_argument("field size does not match mesh");
    CVector v = field;
    propagate(c, v, [] { return 0.0; });
    return v;
}

CMatrix mesh_unitary(const MeshConfiguration& c)
{
    const auto n = static_cast<Eigen::Index>(c.n);
    CMatrix u = CMatrix::Identity(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        CVector v = u.col(col);
        propagate(c, v, [] { return 0.0; });
        u.col(col) = v;
    }
    return u;
}

double unitarity_residual(const CMatrix& u)
{
    if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
    const CMatrix d = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

namespace {

struct Op {
    std::size_t mode;  // top mode of the pair
    CouplerNode node;
};

// Factor a 2x2 unitary as diag(e^{ia}, e^{ib}) * C(theta) * P(phi).
struct Factor2 {
    double a, b;
    CouplerNode node;
};

Factor2 factor_unitary2(const Eigen::Matrix2cd& u)
{
    const double c = std::abs(u(0, 0));
    const double s = std::abs(u(0, 1));
    Factor2 f{};
    f.node.theta = std::atan2(s, c);
    if (s < kTiny) {
        f.a = std::arg(u(0, 0));
        f.b = std::arg(u(1, 1));
        f.node.phi = 0;
    } else if (c < kTiny) {
        f.a = std::arg(u(0, 1)) - kPi / 2;
        f.b = std::arg(u(1, 0)) - kPi / 2;
        f.node.phi = 0;
    } else {
        f.b = std::arg(u(1, 1));
        f.a = std::arg(u(0, 1)) - kPi / 2;
        f.node.phi = wrap_phase(std::arg(u(0, 0)) - f.a);
    }
    return f;
}

// Column operation U <- U T^H on columns (k, k+1) that zeroes U(r, k).
CouplerNode null_from_right(CMatrix& u, Eigen::Index r, Eigen::Index k)
{
    const Complex x = u(r, k);
    const Complex y = u(r, k + 1);
    CouplerNode node;
    if (std::abs(x) < kTiny) return node;
    if (std::abs(y) < kTiny) {
        node.theta = kPi / 2;
    } else {
        node.theta = std::atan2(std::abs(x), std::abs(y));
        node.phi = wrap_phase(std::arg(x) - std::arg(y) - kPi / 2);
    }
    const Eigen::Matrix2cd th = coupler_unitary(node).adjoint();
    const CMatrix cols = u.middleCols(k, 2) * th;
    u.middleCols(k, 2) = cols;
    u(r, k) = 0;
    return node;
}

// Row operation U <- T U on rows (k, k+1) that zeroes U(k+1, col).
CouplerNode null_from_left(CMatrix& u, Eigen::Index k, Eigen::Index col)
{
    const Complex x = u(k, col);
    const Complex y = u(k + 1, col);
    CouplerNode node;
    if (std::abs(y) < kTiny) return node;
    if (std::abs(x) < kTiny) {
        node.theta = kPi / 2;
    } else {
        node.theta = std::atan2(std::abs(y), std::abs(x));
        node.phi = wrap_phase(std::arg(y) - std::arg(x) + kPi / 2);
    }
    const Eigen::Matrix2cd t = coupler_unitary(node);
    const CMatrix rows = t * u.middleRows(k, 2);
    u.middleRows(k, 2) = rows;
    u(k + 1, col) = 0;
    return node;
}

}  // namespace

MeshConfiguration clements_decompose(const CMatrix& input)
{
    const double res = unitarity_residual(input);
    if (!(res < 1e-8)) throw DecompositionError("matrix is not unitary (residual " + std::to_string(res) + ")", res);

    const auto n = static_cast<Eigen::Index>(input.rows());
    CMatrix u = input;
    std::vector<Op> right;  // in the order applied; light meets right[0] first
    std::vector<Op> left;   // in the order applied

    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (i % 2 == 0) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                const Eigen::Index k = i - j;
                right.push_back({static_cast<std::size_t>(k), null_from_right(u, n - 1 - j, k)});
            }
        } else {
            for (Eigen::Index j = 0; j <= i; ++j) {
                const Eigen::Index k = n - 2 - i + j;
                left.push_back({static_cast<std::size_t>(k), null_from_left(u, k, j)});
            }
        }
    }

    // u is now diagonal: L_m..L_1 U R_1^H..R_n^H = D, so U = L_1^H..L_m^H D R_n..R_1.
    // Push each L^H through D from the innermost outward: L^H D = D' T'.
    CVector d = u.diagonal();
    std::vector<Op> moved(left.size());
    for (std::size_t idx = left.size(); idx-- > 0;) {
        const auto k = static_cast<Eigen::Index>(left[idx].mode);
        Eigen::Matrix2cd block = coupler_unitary(left[idx].node).adjoint();
        block.col(0) *= d[k];
        block.col(1) *= d[k + 1];
        const Factor2 f = factor_unitary2(block);
        d[k] = std::polar(1.0, f.a);
        d[k + 1] = std::polar(1.0, f.b);
        moved[idx] = {left[idx].mode, f.node};
    }

    // Light order: right[0..], then moved[m-1..0], then output phases d.
    std::vector<Op> sequence = right;
    for (std::size_t idx = moved.size(); idx-- > 0;) sequence.push_back(moved[idx]);

    MeshConfiguration c = MeshConfiguration::identity(static_cast<std::size_t>(n));
    std::vector<std::ptrdiff_t> last(static_cast<std::size_t>(n), -1);
    for (const auto& op : sequence) {
        const std::size_t k = op.mode;
        auto layer = static_cast<std::size_t>(std::max(last[k], last[k + 1]) + 1);
        if (layer % 2 != k % 2) ++layer;
        if (layer >= c.layers.size()) throw DecompositionError("nulling sequence does not fit a rectangular mesh", 0);
        c.layers[layer][(k - layer % 2) / 2] = op.node;
        last[k] = last[k + 1] = static_cast<std::ptrdiff_t>(layer);
    }
    for (Eigen::Index i = 0; i < n; ++i) c.output_phases[static_cast<std::size_t>(i)] = wrap_phase(std::arg(d[i]));
    return c;
}

CMatrix random_unitary(std::size_t n, std::uint64_t seed)
{
    Xoshiro256pp rng(seed);
    std::normal_distribution<double> g;
    const auto dim = static_cast<Eigen::Index>(n);
    CMatrix z(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) z(r, c) = Complex(g(rng), g(rng)) / std::sqrt(2.0);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Complex rii = r(i, i);
        q.col(i) *= std::abs(rii) > 0 ? rii / std::abs(rii) : Complex(1);
    }
    return q;
}

SvdSynthesis svd_synthesize(const WeightMatrix& m)
{
    const auto n = static_cast<Eigen::Index>(m.dim());
    Eigen::MatrixXd a(n, n);
    double max_row = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
        double row = 0;
        for (Eigen::Index c = 0; c < n; ++c) {
            a(r, c) = m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
            row += a(r, c);
        }
        max_row = std::max(max_row, row);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sigma = svd.singularValues();
    SvdSynthesis s;
    s.scale = sigma[0];
    if (!(s.scale > 0)) throw NumericError("weight matrix has no positive singular value", 0);
    s.max_row_sum = max_row;
    for (Eigen::Index i = 0; i < n; ++i) {
        s.singular_values.push_back(sigma[i]);
        s.attenuation.push_back(std::clamp(sigma[i] / s.scale, 0.0, 1.0));
    }
    s.left = clements_decompose(svd.matrixU().cast<Complex>());
    s.right = clements_decompose(svd.matrixV().transpose().cast<Complex>());

    const CMatrix rebuilt = synthesized_matrix(s);
    s.residual = (rebuilt - a.cast<Complex>()).cwiseAbs().maxCoeff();
    if (!(s.residual < 1e-6)) throw NumericError("SVD synthesis residual " + std::to_string(s.residual), s.residual);
    return s;
}

CMatrix synthesized_matrix(const SvdSynthesis& s)
{
    const auto n = static_cast<Eigen::Index>(s.attenuation.size());
    Eigen::VectorXcd att(n);
    for (Eigen::Index i = 0; i < n; ++i) att[i] = s.attenuation[static_cast<std::size_t>(i)];
    return s.scale * mesh_unitary(s.left) * att.asDiagonal() * mesh_unitary(s.right);
}

void NoiseModel::validate() const
{
    if (!(phase_sigma >= 0) || !(detector_sigma >= 0)) throw std::invalid_argument("noise sigmas must be >= 0");
    if (adc_bits < 1 || adc_bits > 52) throw std::invalid_argument("adc_bits must lie in [1, 52]");
}

AnalogResult analog_weighting(const SvdSynthesis& s, const NibbleVector& x, const NoiseModel& noise,
                              std::uint64_t seed)
{
    noise.validate();
    const std::size_t n = s.attenuation.size();
    if (n == 0 || kNibbles % n != 0) throw std::invalid_argument("synthesis dimension must divide 64");

    Xoshiro256pp rng(seed);
    std::normal_distribution<double> gauss;
    auto jitter = [&] { return noise.phase_sigma * gauss(rng); };

    const double full_scale = (s.max_row_sum / s.scale) * (s.max_row_sum / s.scale);
    const double levels = std::ldexp(1.0, static_cast<int>(noise.adc_bits)) - 1;

    AnalogResult out;
    out.intensities.resize(kNibbles);
    out.accumulators.resize(kNibbles);
    for (std::size_t off = 0; off < kNibbles; off += n) {
        CVector v(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            v[static_cast<Eigen::Index>(i)] = mzm_amplitude(drive_phase(x[off + i]) + jitter());
        propagate(s.right, v, jitter);
        for (std::size_t i = 0; i < n; ++i)
            v[static_cast<Eigen::Index>(i)] *= mzm_amplitude(2 * std::acos(s.attenuation[i]) + jitter());
        propagate(s.left, v, jitter);

        for (std::size_t i = 0; i < n; ++i) {
            double intensity = std::norm(v[static_cast<Eigen::Index>(i)]);
            intensity = std::max(0.0, intensity * (1 + noise.detector_sigma * gauss(rng)));
            const double code = std::clamp(std::round(intensity / full_scale * levels), 0.0, levels);
            const double detected = code * full_scale / levels;
            const auto yhat = static_cast<std::uint32_t>(std::llround(15 * s.scale * std::sqrt(detected)));
            out.intensities[off + i] = detected;
            out.accumulators[off + i] = yhat;
            out.estimate[off + i] = static_cast<std::uint8_t>((yhat >> kTruncateShift) & 0xF);
        }
    }
    return out;
}

namespace {

struct SampleOutcome {
    double nibble_errors = 0;  // fraction of the 64 entries
    bool hash_mismatch = false;
};

SampleOutcome evaluate_sample(const WeightMatrix& m, const SvdSynthesis& s, const NoiseModel& noise,
                              std::uint64_t seed, std::size_t i)
{
    Xoshiro256pp input_rng(seed, i, 0x5eed, 1);
    std::array<std::uint8_t, 32> data{};
    for (std::size_t w = 0; w < 4; ++w) {
        const std::uint64_t v = input_rng();
        for (int b = 0; b < 8; ++b) data[8 * w + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
    const Digest256 inner = sha256(data);
    const NibbleVector x = digest_to_nibbles(inner);
    const NibbleVector digital = weighting(m, x);
    const NibbleVector analog = analog_weighting(s, x, noise, splitmix64(seed ^ splitmix64(i))).estimate;

    SampleOutcome o;
    NibbleVector zd, za;
    for (std::size_t k = 0; k < kNibbles; ++k) {
        o.nibble_errors += digital[k] != analog[k];
        zd[k] = x[k] ^ digital[k];
        za[k] = x[k] ^ analog[k];
    }
    o.nibble_errors /= static_cast<double>(kNibbles);
    o.hash_mismatch = sha256(nibbles_to_digest(zd).view()) != sha256(nibbles_to_digest(za).view());
    return o;
}

FidelityRow summarize(const NoiseModel& noise, const std::vector<SampleOutcome>& outcomes)
{
    FidelityRow row;
    row.noise = noise;
    row.samples = outcomes.size();
    const double n = static_cast<double>(outcomes.size());
    double sum = 0, sumsq = 0, mism = 0;
    for (const auto& o : outcomes) {
        sum += o.nibble_errors;
        sumsq += o.nibble_errors * o.nibble_errors;
        mism += o.hash_mismatch;
    }
    row.nibble_error_rate = sum / n;
    const double var = n > 1 ? std::max(0.0, (sumsq - sum * sum / n) / (n - 1)) : 0.0;
    row.nibble_error_se = std::sqrt(var / n);
    row.hash_mismatch_rate = mism / n;
    row.hash_mismatch_se = std::sqrt(row.hash_mismatch_rate * (1 - row.hash_mismatch_rate) / n);
    return row;
}

void check_sweep(const WeightMatrix& m, const SvdSynthesis& s, std::span<const NoiseModel> grid, std::size_t samples)
{
    if (m.dim() != s.attenuation.size()) throw std::invalid_argument("synthesis does not match weight matrix");
    if (samples == 0) throw std::invalid_argument("fidelity sweep needs at least one sample");
    for (const auto& g : grid) g.validate();
}

}  // namespace

std::vector<FidelityRow> fidelity_sweep_serial(const WeightMatrix& m, const SvdSynthesis& s,
                                               std::span<const NoiseModel> grid, std::size_t samples,
                                               std::uint64_t seed)
{
    check_sweep(m, s, grid, samples);
    std::vector<FidelityRow> rows;
    for (const auto& noise : grid) {
        std::vector<SampleOutcome> outcomes(samples);
        for (std::size_t i = 0; i < samples; ++i) outcomes[i] = evaluate_sample(m, s, noise, seed, i);
        rows.push_back(summarize(noise, outcomes));
    }
    return rows;
}

std::vector<FidelityRow> fidelity_sweep(const WeightMatrix& m, const SvdSynthesis& s,
                                        std::span<const NoiseModel> grid, std::size_t samples, std::uint64_t seed)
{
    check_sweep(m, s, grid, samples);
    std::vector<FidelityRow> rows;
    for (const auto& noise : grid) {
        std::vector<SampleOutcome> outcomes(samples);
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(samples); ++i)
            outcomes[static_cast<std::size_t>(i)] = evaluate_sample(m, s, noise, seed, static_cast<std::size_t>(i));
        rows.push_back(summarize(noise, outcomes));
    }
    return rows;
}

}  // namespace opow::photonic
