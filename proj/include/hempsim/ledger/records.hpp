#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hempsim/core/types.hpp"
#include "hempsim/ledger/hash.hpp"

namespace hempsim::ledger {

using RecordId = std::uint64_t;

enum class ParticipantRole : std::uint8_t { Breeder, Grower, Dryer, Processor, Transporter, Lab, Authority };

enum class RecordKind : std::uint8_t {
  SeedSource,
  FieldInfo,
  CultivationData,
  PreHarvestRequest,
  PreHarvestResult,
  HarvestData,
  DryingData,
  PostStabilizationTest,
  ExtractionData,
  WinterizationData,
  PLCData,
  FinalCOA,
  TransportData,
  VerificationResult,
};

std::string_view to_string(ParticipantRole r);
std::string_view to_string(RecordKind k);
ParticipantRole parse_role(std::string_view s);
RecordKind parse_kind(std::string_view s);

/// Kinds whose verification gates the lot's next stage.
bool is_gate_relevant(RecordKind k);

class MalformedRecord : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A participant's submission. `true_values` and `tampered` are ground truth
/// known to the simulation only; they are never written to a block.
struct DataRecord {
  RecordId record_id = 0;
  LotId lot_id = 0;
  ParticipantRole role = ParticipantRole::Grower;
  int participant_location = 0;
  RecordKind kind = RecordKind::CultivationData;
  std::map<std::string, std::string> payload;
  std::map<std::string, double> reported_values;
  std::map<std::string, double> true_values;
  SimTime submitted_at = 0.0;
  bool tampered = false;
};

void check_record(const DataRecord& rec);

/// Canonical encoding of the on-chain part of a record.
CanonicalWriter canonical(const DataRecord& rec);
Hash256 record_hash(const DataRecord& rec);

}  // namespace hempsim::ledger
