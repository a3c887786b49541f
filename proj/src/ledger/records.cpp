#include "hempsim/ledger/records.hpp"

#include <array>
#include <utility>

namespace hempsim::ledger {

namespace {

constexpr std::array<std::pair<ParticipantRole, std::string_view>, 7> kRoles{{
    {ParticipantRole::Breeder, "Breeder"},
    {ParticipantRole::Grower, "Grower"},
    {ParticipantRole::Dryer, "Dryer"},
    {ParticipantRole::Processor, "Processor"},
    {ParticipantRole::Transporter, "Transporter"},
    {ParticipantRole::Lab, "Lab"},
    {ParticipantRole::Authority, "Authority"},
}};

constexpr std::array<std::pair<RecordKind, std::string_view>, 14> kKinds{{
    {RecordKind::SeedSource, "SeedSource"},
    {RecordKind::FieldInfo, "FieldInfo"},
    {RecordKind::CultivationData, "CultivationData"},
    {RecordKind::PreHarvestRequest, "PreHarvestRequest"},
    {RecordKind::PreHarvestResult, "PreHarvestResult"},
    {RecordKind::HarvestData, "HarvestData"},
    {RecordKind::DryingData, "DryingData"},
    {RecordKind::PostStabilizationTest, "PostStabilizationTest"},
    {RecordKind::ExtractionData, "ExtractionData"},
    {RecordKind::WinterizationData, "WinterizationData"},
    {RecordKind::PLCData, "PLCData"},
    {RecordKind::FinalCOA, "FinalCOA"},
    {RecordKind::TransportData, "TransportData"},
    {RecordKind::VerificationResult, "VerificationResult"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [k, n] : table)
    if (k == e) return n;
  return "?";
}

template <typename E, std::size_t N>
E parse_name(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s, const char* what) {
  for (const auto& [k, n] : table)
    if (n == s) return k;
  throw MalformedRecord(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(ParticipantRole r) { return name_of(kRoles, r); }
std::string_view to_string(RecordKind k) { return name_of(kKinds, k); }
ParticipantRole parse_role(std::string_view s) { return parse_name(kRoles, s, "participant role"); }
RecordKind parse_kind(std::string_view s) { return parse_name(kKinds, s, "record kind"); }

bool is_gate_relevant(RecordKind k) {
  return k == RecordKind::PreHarvestResult || k == RecordKind::HarvestData || k == RecordKind::FinalCOA;
}

void check_record(const DataRecord& rec) {
  if (rec.submitted_at < 0.0) throw MalformedRecord("record submitted at negative time");
  if (rec.participant_location < 0) throw MalformedRecord("negative participant location");
  if (is_gate_relevant(rec.kind)) {
    if (rec.reported_values.empty() || rec.true_values.empty())
      throw MalformedRecord(std::string(to_string(rec.kind)) + " must carry reported and true values");
    for (const auto& [k, v] : rec.reported_values)
      if (!rec.true_values.contains(k))
        throw MalformedRecord("reported value '" + k + "' has no ground-truth counterpart");
  }
}

CanonicalWriter canonical(const DataRecord& rec) {
  CanonicalWriter payload;
  for (const auto& [k, v] : rec.payload) payload.field(k, v);
  CanonicalWriter reported;
  for (const auto& [k, v] : rec.reported_values) reported.field(k, v);
  CanonicalWriter w;
  w.field("kind", to_string(rec.kind))
      .field("lot_id", static_cast<std::uint64_t>(rec.lot_id))
      .field("participant_location", static_cast<std::int64_t>(rec.participant_location))
      .field("payload", payload)
      .field("record_id", static_cast<std::uint64_t>(rec.record_id))
      .field("reported", reported)
      .field("role", to_string(rec.role))
      .field("submitted_at", rec.submitted_at);
  return w;
}

Hash256 record_hash(const DataRecord& rec) { return canonical(rec).digest(); }

}  // namespace hempsim::ledger
