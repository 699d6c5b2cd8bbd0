#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "opow/digest.hpp"
#include "opow/heavyhash.hpp"
#include "opow/pow.hpp"

namespace opow {

struct Transfer {
    std::uint64_t from = 0;
    std::uint64_t to = 0;
    std::uint64_t amount = 0;
    std::uint64_t spend_id = 0;

    friend bool operator==(const Transfer&, const Transfer&) = default;
};

inline constexpr std::size_t kTransferSize = 32;

// Little-endian fixed-width fields, concatenated in list order.
Bytes serialize_transfers(std::span<const Transfer> transfers);
Digest256 commit_transfers(std::span<const Transfer> transfers);

struct Block {
    BlockHeader header;
    std::vector<Transfer> transfers;

    friend bool operator==(const Block&, const Block&) = default;
};

// header (88) | u32 transfer count | transfers
Bytes serialize_block(const Block& b);
Block deserialize_block(std::span<const std::uint8_t> bytes);

enum class Verdict {
    valid,
    orphan,
    duplicate,
    bad_timestamp,
    bad_target,
    bad_commitment,
    bad_pow,
    double_spend,
};

std::string_view to_string(Verdict v) noexcept;

struct ChainParams {
    RetargetParams retarget{};
    std::uint32_t genesis_bits = 0x20010000;  // 2^248, ~256 trials per block
    std::uint64_t genesis_timestamp = 1'600'000'000;
    std::size_t median_span = 11;
};

Block make_genesis(const ChainParams& p);

struct TipChange {
    Verdict verdict = Verdict::valid;
    bool tip_changed = false;
    Digest256 old_tip{};
    Digest256 new_tip{};
    // Blocks disconnected from the old best chain; 0 for a plain extension.
    std::uint64_t reorg_depth = 0;
    std::size_t orphans_connected = 0;
};

// Block tree rooted at a fixed genesis. Fork choice is most cumulative work,
// ties kept by the first-seen block. Single writer; const access is safe from
// several readers between mutations.
class ChainIndex {
public:
    struct Entry {
        Block block;
        Digest256 hash;
        const Entry* parent = nullptr;
        std::uint64_t height = 0;
        U256 cumulative_work = 0;
        std::uint64_t arrival = 0;
        std::vector<Digest256> children;
        WeightMatrix child_matrix;  // generate_matrix(hash), used by children
    };

    explicit ChainIndex(ChainParams params = {});

    ChainIndex(const ChainIndex&) = delete;
    ChainIndex& operator=(const ChainIndex&) = delete;
    ChainIndex(ChainIndex&&) = default;
    ChainIndex& operator=(ChainIndex&&) = default;

    const ChainParams& params() const noexcept { return params_; }
    const Entry& genesis() const { return *genesis_; }
    const Entry& tip() const { return *tip_; }
    const Entry* find(const Digest256& hash) const;
    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t orphan_count() const noexcept { return orphans_.size(); }

    // Compact target a child of `parent` must carry.
    std::uint32_t scheduled_bits(const Entry& parent) const;
    // Median of the last median_span timestamps ending at `parent`.
    std::uint64_t median_time_past(const Entry& parent) const;

    Verdict validate(const Block& b) const;
    TipChange add_block(const Block& b);

    // Genesis..tip hashes.
    std::vector<Digest256> best_chain() const;
    bool is_ancestor(const Entry& ancestor, const Entry& descendant) const;

    // Unmined child of `parent` with scheduled bits and commitment filled in.
    Block assemble(const Entry& parent, std::vector<Transfer> transfers, std::uint64_t timestamp) const;

    // All non-genesis blocks in arrival order.
    std::vector<const Entry*> arrival_order() const;

private:
    Verdict check(const Block& b, const Entry& parent) const;
    const Entry& insert(const Block& b, const Entry& parent);

    ChainParams params_;
    std::unordered_map<Digest256, std::unique_ptr<Entry>, DigestHash> entries_;
    std::unordered_multimap<Digest256, Block, DigestHash> orphans_;
    const Entry* genesis_ = nullptr;
    const Entry* tip_ = nullptr;
    std::uint64_t arrivals_ = 0;
};

Digest256 block_hash(const Block& b);

// Free-function form of ChainIndex::validate.
inline Verdict validate_block(const ChainIndex& index, const Block& b) { return index.validate(b); }

// Assembles and mines a child of `parent`; nullopt when the nonce range runs out.
std::optional<Block> mine_block(const ChainIndex& index, const ChainIndex::Entry& parent,
                                std::vector<Transfer> transfers, std::uint64_t timestamp,
                                std::uint64_t nonce_start = 0, std::uint64_t nonce_count = 1ULL << 32);

// Length-prefixed stream: per block a u32 little-endian byte count followed by
// serialize_block bytes.
void export_chain(const ChainIndex& index, std::ostream& out);
struct ImportReport {
    std::size_t accepted = 0;
    std::vector<std::pair<std::size_t, Verdict>> rejected;  // (position, verdict)
};
ImportReport import_chain(ChainIndex& index, std::istream& in);
std::vector<Block> read_block_stream(std::istream& in);
void write_block_stream(std::span<const Block> blocks, std::ostream& out);

}  // namespace opow
