#include "opow/chain.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace opow {

namespace {

void put_u64(Bytes& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32(Bytes& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p)
{
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint32_t get_u32(const std::uint8_t* p)
{
    return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

}  // namespace

Bytes serialize_transfers(std::span<const Transfer> transfers)
{
    Bytes out;
    out.reserve(transfers.size() * kTransferSize);
    for (const auto& t : transfers) {
        put_u64(out, t.from);
        put_u64(out, t.to);
        put_u64(out, t.amount);
        put_u64(out, t.spend_id);
    }
    return out;
}

Digest256 commit_transfers(std::span<const Transfer> transfers) { return sha256(serialize_transfers(transfers)); }

Bytes serialize_block(const Block& b)
{
    const auto header = serialize_header(b.header);
    Bytes out(header.begin(), header.end());
    put_u32(out, static_cast<std::uint32_t>(b.transfers.size()));
    const Bytes tx = serialize_transfers(b.transfers);
    out.insert(out.end(), tx.begin(), tx.end());
    return out;
}

Block deserialize_block(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kHeaderSize + 4) throw MalformedHeader("block shorter than header + count");
    Block b;
    b.header = deserialize_header(bytes.first(kHeaderSize));
    const std::uint32_t count = get_u32(bytes.data() + kHeaderSize);
    if (bytes.size() != kHeaderSize + 4 + std::size_t{count} * kTransferSize)
        throw MalformedHeader("block length does not match its transfer count");
    const std::uint8_t* p = bytes.data() + kHeaderSize + 4;
    b.transfers.resize(count);
    for (auto& t : b.transfers) {
        t.from = get_u64(p);
        t.to = get_u64(p + 8);
        t.amount = get_u64(p + 16);
        t.spend_id = get_u64(p + 24);
        p += kTransferSize;
    }
    return b;
}

std::string_view to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::valid: return "valid";
    case Verdict::orphan: return "orphan";
    case Verdict::duplicate: return "duplicate";
    case Verdict::bad_timestamp: return "bad-timestamp";
    case Verdict::bad_target: return "bad-target";
    case Verdict::bad_commitment: return "bad-commitment";
    case Verdict::bad_pow: return "bad-pow";
    case Verdict::double_spend: return "double-spend";
    }
    return "unknown";
}

Block make_genesis(const ChainParams& p)
{
    Block g;
    g.header.version = 1;
    g.header.payload_commitment = commit_transfers({});
    g.header.timestamp = p.genesis_timestamp;
    g.header.compact_target = p.genesis_bits;
    return g;
}

Digest256 block_hash(const Block& b)
{
    return header_hash(b.header, generate_matrix(b.header.parent_hash));
}

ChainIndex::ChainIndex(ChainParams params) : params_(params)
{
    params_.retarget.validate();
    decode_compact(params_.genesis_bits);

    auto g = std::make_unique<Entry>();
    g->block = make_genesis(params_);
    g->hash = block_hash(g->block);
    g->cumulative_work = work_from_target(decode_compact(params_.genesis_bits));
    g->arrival = arrivals_++;
    g->child_matrix = generate_matrix(g->hash);
    genesis_ = tip_ = g.get();
    entries_.emplace(g->hash, std::move(g));
}

const ChainIndex::Entry* ChainIndex::find(const Digest256& hash) const
{
    auto it = entries_.find(hash);
    return it == entries_.end() ? nullptr : it->second.get();
}

std::uint32_t ChainIndex::scheduled_bits(const Entry& parent) const
{
    const std::uint64_t window = params_.retarget.window;
    if (!retarget_due(parent.height, params_.retarget)) return parent.block.header.compact_target;

    std::vector<std::uint64_t> ts(window + 1);
    const Entry* e = &parent;
    for (std::size_t i = window + 1; i-- > 0; e = e->parent) ts[i] = e->block.header.timestamp;
    const Target next = retarget(ts, decode_compact(parent.block.header.compact_target), params_.retarget);
    return encode_compact(next);
}

std::uint64_t ChainIndex::median_time_past(const Entry& parent) const
{
    std::vector<std::uint64_t> ts;
    for (const Entry* e = &parent; e && ts.size() < params_.median_span; e = e->parent)
        ts.push_back(e->block.header.timestamp);
    std::sort(ts.begin(), ts.end());
    return ts[ts.size() / 2];
}

Verdict ChainIndex::check(const Block& b, const Entry& parent) const
{
    const auto& h = b.header;
    if (h.timestamp <= median_time_past(parent) || h.timestamp <= parent.block.header.timestamp)
        return Verdict::bad_timestamp;
    if (h.compact_target != scheduled_bits(parent)) return Verdict::bad_target;
    if (h.payload_commitment != commit_transfers(b.transfers)) return Verdict::bad_commitment;
    if (!meets_target(header_hash(h, parent.child_matrix), decode_compact(h.compact_target))) return Verdict::bad_pow;

    std::unordered_set<std::uint64_t> spends;
    for (const auto& t : b.transfers)
        if (!spends.insert(t.spend_id).second) return Verdict::double_spend;
    for (const Entry* e = &parent; e; e = e->parent)
        for (const auto& t : e->block.transfers)
            if (spends.contains(t.spend_id)) return Verdict::double_spend;
    return Verdict::valid;
}

Verdict ChainIndex::validate(const Block& b) const
{
    const Entry* parent = find(b.header.parent_hash);
    if (!parent) return Verdict::orphan;
    if (find(header_hash(b.header, parent->child_matrix))) return Verdict::duplicate;
    return check(b, *parent);
}

const ChainIndex::Entry& ChainIndex::insert(const Block& b, const Entry& parent)
{
    auto e = std::make_unique<Entry>();
    e->block = b;
    e->hash = header_hash(b.header, parent.child_matrix);
    e->parent = &parent;
    e->height = parent.height + 1;
    e->cumulative_work = parent.cumulative_work + work_from_target(decode_compact(b.header.compact_target));
    e->arrival = arrivals_++;
    e->child_matrix = generate_matrix(e->hash);
    Entry* raw = e.get();
    entries_.at(parent.hash)->children.push_back(raw->hash);
    entries_.emplace(raw->hash, std::move(e));
    if (raw->cumulative_work > tip_->cumulative_work) tip_ = raw;
    return *raw;
}

TipChange ChainIndex::add_block(const Block& b)
{
    TipChange report;
    report.old_tip = tip_->hash;
    const Entry* old_tip = tip_;

    report.verdict = validate(b);
    if (report.verdict == Verdict::orphan) {
        auto [lo, hi] = orphans_.equal_range(b.header.parent_hash);
        if (std::none_of(lo, hi, [&](const auto& kv) { return kv.second == b; }))
            orphans_.emplace(b.header.parent_hash, b);
    }
    if (report.verdict != Verdict::valid) {
        report.new_tip = tip_->hash;
        return report;
    }

    std::deque<const Entry*> pending{&insert(b, *find(b.header.parent_hash))};
    while (!pending.empty()) {
        const Entry* parent = pending.front();
        pending.pop_front();
        auto [lo, hi] = orphans_.equal_range(parent->hash);
        std::vector<Block> waiting;
        for (auto it = lo; it != hi; ++it) waiting.push_back(it->second);
        orphans_.erase(lo, hi);
        for (const auto& child : waiting) {
            if (validate(child) != Verdict::valid) continue;
            pending.push_back(&insert(child, *parent));
            ++report.orphans_connected;
        }
    }

    report.new_tip = tip_->hash;
    report.tip_changed = tip_ != old_tip;
    if (report.tip_changed && !is_ancestor(*old_tip, *tip_)) {
        const Entry* a = old_tip;
        const Entry* c = tip_;
        while (a->height > c->height) a = a->parent;
        while (c->height > a->height) c = c->parent;
        while (a != c) {
            a = a->parent;
            c = c->parent;
        }
        report.reorg_depth = old_tip->height - a->height;
    }
    return report;
}

bool ChainIndex::is_ancestor(const Entry& ancestor, const Entry& descendant) const
{
    const Entry* e = &descendant;
    while (e && e->height > ancestor.height) e = e->parent;
    return e == &ancestor;
}

std::vector<Digest256> ChainIndex::best_chain() const
{
    std::vector<Digest256> out;
    for (const Entry* e = tip_; e; e = e->parent) out.push_back(e->hash);
    std::reverse(out.begin(), out.end());
    return out;
}

Block ChainIndex::assemble(const Entry& parent, std::vector<Transfer> transfers, std::uint64_t timestamp) const
{
    Block b;
    b.header.version = 1;
    b.header.parent_hash = parent.hash;
    b.header.payload_commitment = commit_transfers(transfers);
    b.header.timestamp = timestamp;
    b.header.compact_target = scheduled_bits(parent);
    b.transfers = std::move(transfers);
    return b;
}

std::vector<const ChainIndex::Entry*> ChainIndex::arrival_order() const
{
    std::vector<const Entry*> out;
    for (const auto& [hash, e] : entries_)
        if (e.get() != genesis_) out.push_back(e.get());
    std::sort(out.begin(), out.end(), [](const Entry* a, const Entry* b) { return a->arrival < b->arrival; });
    return out;
}

std::optional<Block> mine_block(const ChainIndex& index, const ChainIndex::Entry& parent,
                                std::vector<Transfer> transfers, std::uint64_t timestamp,
                                std::uint64_t nonce_start, std::uint64_t nonce_count)
{
    Block b = index.assemble(parent, std::move(transfers), timestamp);
    const auto nonce = mine(b.header, parent.child_matrix, decode_compact(b.header.compact_target), nonce_start,
                            nonce_count);
    if (!nonce) return std::nullopt;
    b.header.nonce = *nonce;
    return b;
}

void write_block_stream(std::span<const Block> blocks, std::ostream& out)
{
    for (const auto& b : blocks) {
        const Bytes raw = serialize_block(b);
        Bytes len;
        put_u32(len, static_cast<std::uint32_t>(raw.size()));
        out.write(reinterpret_cast<const char*>(len.data()), 4);
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    }
}

std::vector<Block> read_block_stream(std::istream& in)
{
    std::vector<Block> blocks;
    std::uint8_t len[4];
    while (in.read(reinterpret_cast<char*>(len), 4)) {
        const std::uint32_t n = get_u32(len);
        Bytes raw(n);
        if (!in.read(reinterpret_cast<char*>(raw.data()), n)) throw MalformedHeader("truncated block stream");
        blocks.push_back(deserialize_block(raw));
    }
    if (in.gcount() != 0) throw MalformedHeader("truncated block length prefix");
    return blocks;
}

void export_chain(const ChainIndex& index, std::ostream& out)
{
    std::vector<Block> blocks;
    for (const auto* e : index.arrival_order()) blocks.push_back(e->block);
    write_block_stream(blocks, out);
}

ImportReport import_chain(ChainIndex& index, std::istream& in)
{
    ImportReport report;
    const auto blocks = read_block_stream(in);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto change = index.add_block(blocks[i]);
        if (change.verdict == Verdict::valid)
            report.accepted += 1 + change.orphans_connected;
        else if (change.verdict != Verdict::orphan)
            report.rejected.emplace_back(i, change.verdict);
    }
    return report;
}

}  // namespace opow
