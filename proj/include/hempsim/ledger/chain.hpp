#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hempsim/ledger/hash.hpp"
#include "hempsim/ledger/records.hpp"

namespace hempsim::ledger {

/// Pairwise SHA-256 tree; an odd node is paired with itself. A single leaf is
/// its own root and an empty list hashes to zero.
Hash256 merkle_root(const std::vector<Hash256>& leaves);

struct ShardBlock {
  int shard_id = 0;
  std::uint64_t height = 0;
  Hash256 prev_hash = kZeroHash;
  Hash256 merkle_root = kZeroHash;
  std::string validator;
  SimTime created_at = 0.0;
  std::uint64_t nonce = 0;  // unused under proof of authority; kept for the header layout
  std::vector<DataRecord> records;
  Hash256 hash = kZeroHash;  // header hash as stored

  [[nodiscard]] Hash256 compute_hash() const;
  [[nodiscard]] Hash256 compute_merkle_root() const;
};

struct ShardHeaderRef {
  int shard_id = 0;
  std::uint64_t height = 0;
  Hash256 header_hash = kZeroHash;
};

struct RootBlock {
  std::uint64_t height = 0;
  Hash256 prev_hash = kZeroHash;
  std::vector<ShardHeaderRef> shard_headers;
  std::string regulator;
  SimTime created_at = 0.0;
  Hash256 hash = kZeroHash;

  [[nodiscard]] Hash256 compute_hash() const;
};

/// All shard chains plus the root chain.
class LedgerState {
 public:
  explicit LedgerState(int n_shards = 1);

  const ShardBlock& append_shard_block(int shard_id, std::vector<DataRecord> records, std::string validator,
                                       SimTime now);
  const RootBlock& append_root_block(std::vector<ShardHeaderRef> headers, std::string regulator, SimTime now);

  [[nodiscard]] int n_shards() const { return static_cast<int>(shards_.size()); }
  [[nodiscard]] const std::vector<ShardBlock>& shard(int id) const { return shards_.at(id); }
  [[nodiscard]] std::vector<ShardBlock>& shard_mut(int id) { return shards_.at(id); }
  [[nodiscard]] const std::vector<RootBlock>& root() const { return root_; }
  [[nodiscard]] std::vector<RootBlock>& root_mut() { return root_; }
  [[nodiscard]] std::size_t block_count() const;

  /// Blocks loaded from an export are added verbatim, without re-linking.
  void push_raw(ShardBlock b);
  void push_raw(RootBlock b);

 private:
  std::vector<std::vector<ShardBlock>> shards_;
  std::vector<RootBlock> root_;
};

struct Violation {
  std::string chain;  // "shard:<id>" or "root"
  std::uint64_t height = 0;
  std::string reason;
};

struct AuditResult {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] const Violation* first() const { return violations.empty() ? nullptr : &violations.front(); }
};

/// Recomputes every merkle root, header hash and back-link, and checks that
/// each root-chain header names an existing shard block exactly once.
AuditResult audit_chain(const LedgerState& state);

/// Digest over every block hash in canonical order.
Hash256 audit_digest(const LedgerState& state);

/// One JSON object per line: shard blocks by shard then height, then the root chain.
std::string export_chain(const LedgerState& state);

class ChainParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LedgerState parse_chain(std::string_view text);

}  // namespace hempsim::ledger
