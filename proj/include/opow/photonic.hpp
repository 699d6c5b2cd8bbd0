#pragma once

// Emulator of an analog photonic matrix-vector multiplier: MZM amplitude
// encoding, a rectangular mesh of directional couplers with phase shifters,
// SVD synthesis of a non-unitary weight matrix from two meshes and a column
// of attenuators, and intensity detection with noise and ADC quantization.

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "opow/heavyhash.hpp"

namespace opow::photonic {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct DecompositionError : std::runtime_error {
    DecompositionError(const std::string& what, double residual) : std::runtime_error(what), residual(residual) {}
    double residual;
};

struct NumericError : std::runtime_error {
    NumericError(const std::string& what, double residual) : std::runtime_error(what), residual(residual) {}
    double residual;
};

// Field amplitudes at the mesh inputs; power = |a|^2.
struct OpticalField {
    CVector amplitudes;

    explicit OpticalField(CVector a);
    std::size_t size() const noexcept { return static_cast<std::size_t>(amplitudes.size()); }
    double power() const { return amplitudes.squaredNorm(); }
};

struct CouplerNode {
    double theta = 0;  // coupling angle, [0, pi/2]
    double phi = 0;    // input-arm phase, [0, 2 pi)
};

// Rectangular mesh: n layers, layer l couples modes (2k + l % 2, 2k + l % 2 + 1).
// Light traverses layer 0 first; output_phases are applied last.
struct MeshConfiguration {
    std::size_t n = 0;
    std::vector<std::vector<CouplerNode>> layers;
    std::vector<double> output_phases;

    static MeshConfiguration identity(std::size_t n);
    static std::size_t top_mode(std::size_t layer, std::size_t k) noexcept { return 2 * k + layer % 2; }
    std::size_t node_count() const;
};

// Transmission amplitude cos(phase / 2); phase pi extinguishes the output.
double mzm_amplitude(double phase);
// Drive phase producing amplitude nibble / 15.
double drive_phase(std::uint8_t nibble);

// amplitude_i = x_i / 15 with zero phase, produced through the MZM transfer.
OpticalField encode_nibbles(std::span<const std::uint8_t> x);

// C(theta) * P(phi), P = diag(e^{i phi}, 1), C = [[cos, i sin], [i sin, cos]].
Eigen::Matrix2cd coupler_unitary(const CouplerNode& node);

CMatrix mesh_unitary(const MeshConfiguration& c);

// Propagates a field through the mesh in O(n^2) without forming the matrix.
CVector apply_mesh(const MeshConfiguration& c, const CVector& field);

// max |(U^H U - I)_ij|
double unitarity_residual(const CMatrix& u);

// Rectangular nulling decomposition. Throws DecompositionError when
// unitarity_residual(u) >= 1e-8.
MeshConfiguration clements_decompose(const CMatrix& u);

// Haar-distributed unitary from QR of seeded complex Gaussians.
CMatrix random_unitary(std::size_t n, std::uint64_t seed);

struct SvdSynthesis {
    MeshConfiguration left;              // U
    MeshConfiguration right;             // V^T
    std::vector<double> attenuation;     // sigma_i / scale, in [0, 1]
    std::vector<double> singular_values;
    double scale = 0;                    // largest singular value
    double residual = 0;                 // max |scale * U diag V^T - M|
    double max_row_sum = 0;
};

// M = U Sigma V^T by SVD, both unitaries decomposed into meshes. Throws
// NumericError when the reconstruction residual exceeds 1e-6.
SvdSynthesis svd_synthesize(const WeightMatrix& m);

// scale * mesh_L * diag(attenuation) * mesh_R
CMatrix synthesized_matrix(const SvdSynthesis& s);

struct NoiseModel {
    double phase_sigma = 0;     // rad, Gaussian, per phase shifter per evaluation
    double detector_sigma = 0;  // relative intensity noise
    unsigned adc_bits = 4;

    void validate() const;
};

struct AnalogResult {
    NibbleVector estimate;
    std::vector<double> intensities;       // detected, after ADC
    std::vector<std::uint32_t> accumulators;  // reconstructed y-hat
};

// Field path: encode -> right mesh -> attenuators -> left mesh -> detect
// |out|^2 -> ADC -> y-hat = round(15 * scale * sqrt(I)) -> (y-hat >> 10) & 0xF.
// A 16x16 synthesis is applied to each 16-entry slice of x, like the digital
// weighting.
AnalogResult analog_weighting(const SvdSynthesis& s, const NibbleVector& x, const NoiseModel& noise,
                              std::uint64_t seed);

struct FidelityRow {
    NoiseModel noise;
    std::size_t samples = 0;
    double nibble_error_rate = 0;
    double nibble_error_se = 0;
    double hash_mismatch_rate = 0;
    double hash_mismatch_se = 0;
};

// For every noise point the same `samples` random inputs and noise draws
// (seeded by seed + input index) are used, so rows differ only through the
// noise parameters.
std::vector<FidelityRow> fidelity_sweep(const WeightMatrix& m, const SvdSynthesis& s,
                                        std::span<const NoiseModel> grid, std::size_t samples, std::uint64_t seed);
std::vector<FidelityRow> fidelity_sweep_serial(const WeightMatrix& m, const SvdSynthesis& s,
                                               std::span<const NoiseModel> grid, std::size_t samples,
                                               std::uint64_t seed);

}  // namespace opow::photonic
