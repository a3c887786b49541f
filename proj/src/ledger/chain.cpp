#include "hempsim/ledger/chain.hpp"

#include <json.hpp>
#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace hempsim::ledger {

using nlohmann::json;

Hash256 merkle_root(const std::vector<Hash256>& leaves) {
  if (leaves.empty()) return kZeroHash;
  std::vector<Hash256> level = leaves;
  while (level.size() > 1) {
    std::vector<Hash256> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      const Hash256& left = level[i];
      const Hash256& right = i + 1 < level.size() ? level[i + 1] : level[i];
      std::array<std::uint8_t, 64> joined{};
      std::copy(left.begin(), left.end(), joined.begin());
      std::copy(right.begin(), right.end(), joined.begin() + 32);
      next.push_back(sha256(joined));
    }
    level = std::move(next);
  }
  return level.front();
}

Hash256 ShardBlock::compute_merkle_root() const {
  std::vector<Hash256> leaves;
  leaves.reserve(records.size());
  for (const auto& r : records) leaves.push_back(record_hash(r));
  return ledger::merkle_root(leaves);
}

Hash256 ShardBlock::compute_hash() const {
  CanonicalWriter w;
  w.field("created_at", created_at)
      .field("height", height)
      .field("merkle_root", merkle_root)
      .field("nonce", nonce)
      .field("prev_hash", prev_hash)
      .field("shard_id", static_cast<std::int64_t>(shard_id))
      .field("validator", validator);
  return w.digest();
}

Hash256 RootBlock::compute_hash() const {
  CanonicalWriter refs;
  for (std::size_t i = 0; i < shard_headers.size(); ++i) {
    const auto& h = shard_headers[i];
    CanonicalWriter one;
    one.field("header_hash", h.header_hash).field("height", h.height).field("shard_id", static_cast<std::int64_t>(h.shard_id));
    char key[16];
    std::snprintf(key, sizeof key, "%08zu", i);
    refs.field(key, one);
  }
  CanonicalWriter w;
  w.field("created_at", created_at)
      .field("height", height)
      .field("prev_hash", prev_hash)
      .field("regulator", regulator)
      .field("shard_headers", refs);
  return w.digest();
}

LedgerState::LedgerState(int n_shards) : shards_(static_cast<std::size_t>(std::max(n_shards, 0))) {}

const ShardBlock& LedgerState::append_shard_block(int shard_id, std::vector<DataRecord> records, std::string validator,
                                                  SimTime now) {
  auto& chain = shards_.at(shard_id);
  ShardBlock b;
  b.shard_id = shard_id;
  b.height = chain.size();
  b.prev_hash = chain.empty() ? kZeroHash : chain.back().hash;
  b.records = std::move(records);
  b.merkle_root = b.compute_merkle_root();
  b.validator = std::move(validator);
  b.created_at = now;
  b.hash = b.compute_hash();
  chain.push_back(std::move(b));
  return chain.back();
}

const RootBlock& LedgerState::append_root_block(std::vector<ShardHeaderRef> headers, std::string regulator,
                                                SimTime now) {
  RootBlock b;
  b.height = root_.size();
  b.prev_hash = root_.empty() ? kZeroHash : root_.back().hash;
  b.shard_headers = std::move(headers);
  b.regulator = std::move(regulator);
  b.created_at = now;
  b.hash = b.compute_hash();
  root_.push_back(std::move(b));
  return root_.back();
}

std::size_t LedgerState::block_count() const {
  std::size_t n = root_.size();
  for (const auto& s : shards_) n += s.size();
  return n;
}

void LedgerState::push_raw(ShardBlock b) {
  if (b.shard_id < 0) throw ChainParseError("negative shard id");
  if (static_cast<std::size_t>(b.shard_id) >= shards_.size()) shards_.resize(b.shard_id + 1);
  shards_[b.shard_id].push_back(std::move(b));
}

void LedgerState::push_raw(RootBlock b) { root_.push_back(std::move(b)); }

AuditResult audit_chain(const LedgerState& state) {
  AuditResult out;
  std::map<std::pair<int, std::uint64_t>, Hash256> shard_index;

  for (int s = 0; s < state.n_shards(); ++s) {
    const std::string label = "shard:" + std::to_string(s);
    Hash256 expected_prev = kZeroHash;
    std::uint64_t expected_height = 0;
    for (const auto& b : state.shard(s)) {
      std::string reason;
      if (b.compute_merkle_root() != b.merkle_root)
        reason = "merkle root does not match block records";
      else if (b.compute_hash() != b.hash)
        reason = "header hash mismatch";
      else if (b.prev_hash != expected_prev)
        reason = "prev_hash does not match predecessor";
      else if (b.height != expected_height)
        reason = "height not consecutive";
      if (!reason.empty()) out.violations.push_back({label, b.height, reason});
      shard_index[{s, b.height}] = b.hash;
      expected_prev = b.hash;
      expected_height = b.height + 1;
    }
  }

  std::set<std::pair<int, std::uint64_t>> confirmed;
  Hash256 expected_prev = kZeroHash;
  std::uint64_t expected_height = 0;
  for (const auto& b : state.root()) {
    std::string reason;
    if (b.compute_hash() != b.hash)
      reason = "header hash mismatch";
    else if (b.prev_hash != expected_prev)
      reason = "prev_hash does not match predecessor";
    else if (b.height != expected_height)
      reason = "height not consecutive";
    else {
      for (const auto& ref : b.shard_headers) {
        const auto it = shard_index.find({ref.shard_id, ref.height});
        if (it == shard_index.end() || it->second != ref.header_hash) {
          reason = "references unknown shard block " + std::to_string(ref.shard_id) + "@" + std::to_string(ref.height);
          break;
        }
        if (!confirmed.insert({ref.shard_id, ref.height}).second) {
          reason = "shard block " + std::to_string(ref.shard_id) + "@" + std::to_string(ref.height) +
                   " confirmed twice";
          break;
        }
      }
    }
    if (!reason.empty()) out.violations.push_back({"root", b.height, reason});
    expected_prev = b.hash;
    expected_height = b.height + 1;
  }
  return out;
}

Hash256 audit_digest(const LedgerState& state) {
  std::vector<std::uint8_t> all;
  auto add = [&all](const Hash256& h) { all.insert(all.end(), h.begin(), h.end()); };
  for (int s = 0; s < state.n_shards(); ++s)
    for (const auto& b : state.shard(s)) add(b.hash);
  for (const auto& b : state.root()) add(b.hash);
  return sha256(all);
}

namespace {

json record_json(const DataRecord& r) {
  return json{{"kind", to_string(r.kind)},
              {"lot_id", r.lot_id},
              {"participant_location", r.participant_location},
              {"payload", r.payload},
              {"record_id", r.record_id},
              {"reported", r.reported_values},
              {"role", to_string(r.role)},
              {"submitted_at", r.submitted_at}};
}

DataRecord record_from_json(const json& j) {
  DataRecord r;
  r.kind = parse_kind(j.at("kind").get<std::string>());
  r.lot_id = j.at("lot_id").get<LotId>();
  r.participant_location = j.at("participant_location").get<int>();
  r.payload = j.at("payload").get<std::map<std::string, std::string>>();
  r.record_id = j.at("record_id").get<RecordId>();
  r.reported_values = j.at("reported").get<std::map<std::string, double>>();
  r.role = parse_role(j.at("role").get<std::string>());
  r.submitted_at = j.at("submitted_at").get<double>();
  return r;
}

}  // namespace

std::string export_chain(const LedgerState& state) {
  std::string out;
  for (int s = 0; s < state.n_shards(); ++s) {
    for (const auto& b : state.shard(s)) {
      json records = json::array();
      for (const auto& r : b.records) records.push_back(record_json(r));
      json line{{"chain", "shard"},       {"created_at", b.created_at},          {"hash", to_hex(b.hash)},
                {"height", b.height},     {"merkle_root", to_hex(b.merkle_root)}, {"nonce", b.nonce},
                {"prev_hash", to_hex(b.prev_hash)}, {"records", std::move(records)}, {"shard_id", b.shard_id},
                {"validator", b.validator}};
      out += line.dump();
      out += '\n';
    }
  }
  for (const auto& b : state.root()) {
    json refs = json::array();
    for (const auto& h : b.shard_headers)
      refs.push_back(json{{"header_hash", to_hex(h.header_hash)}, {"height", h.height}, {"shard_id", h.shard_id}});
    json line{{"chain", "root"},         {"created_at", b.created_at}, {"hash", to_hex(b.hash)},
              {"height", b.height},      {"prev_hash", to_hex(b.prev_hash)}, {"regulator", b.regulator},
              {"shard_headers", std::move(refs)}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

LedgerState parse_chain(std::string_view text) {
  LedgerState state(0);
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto chain = j.at("chain").get<std::string>();
      if (chain == "shard") {
        ShardBlock b;
        b.shard_id = j.at("shard_id").get<int>();
        b.height = j.at("height").get<std::uint64_t>();
        b.prev_hash = hash_from_hex(j.at("prev_hash").get<std::string>());
        b.merkle_root = hash_from_hex(j.at("merkle_root").get<std::string>());
        b.validator = j.at("validator").get<std::string>();
        b.created_at = j.at("created_at").get<double>();
        b.nonce = j.at("nonce").get<std::uint64_t>();
        for (const auto& r : j.at("records")) b.records.push_back(record_from_json(r));
        b.hash = hash_from_hex(j.at("hash").get<std::string>());
        state.push_raw(std::move(b));
      } else if (chain == "root") {
        RootBlock b;
        b.height = j.at("height").get<std::uint64_t>();
        b.prev_hash = hash_from_hex(j.at("prev_hash").get<std::string>());
        b.regulator = j.at("regulator").get<std::string>();
        b.created_at = j.at("created_at").get<double>();
        for (const auto& h : j.at("shard_headers"))
          b.shard_headers.push_back({h.at("shard_id").get<int>(), h.at("height").get<std::uint64_t>(),
                                     hash_from_hex(h.at("header_hash").get<std::string>())});
        b.hash = hash_from_hex(j.at("hash").get<std::string>());
        state.push_raw(std::move(b));
      } else {
        throw ChainParseError("unknown chain '" + chain + "'");
      }
    } catch (const ChainParseError& e) {
      throw ChainParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ChainParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return state;
}

}  // namespace hempsim::ledger
