#pragma once

#include "migedu/categories.hpp"
#include "migedu/record.hpp"

#include <optional>

namespace migedu {

/// Partition of records by where they lived at the start of the interval.
///
/// - Stayer: same minor region; or, for records with no minor information
///   on either side, same major region.
/// - InterMajorMove: major region changed.
/// - IntraMajorMove: minor region changed inside the same major region.
/// - Unclassifiable: previous residence unknown, or a same-major record whose
///   previous minor region is unknown while the current one is known.
MoveClass classify_move(const PersonRecord &record);

/// Whether the record crossed a region boundary at `scale`; nullopt when the
/// previous residence is unknown at that scale. In a nested hierarchy a
/// major-scale move is also a minor-scale move even when the previous minor
/// region was not recorded.
std::optional<bool> migrant_at(const PersonRecord &record, Scale scale);

/// urban_prev × urban_now; Unknown when either side is missing.
SettlementFlow classify_settlement_flow(const PersonRecord &record);

/// Major-scale migrant/stayer split by current urban status.
MigrantStatus classify_migrant_status(const PersonRecord &record);

/// Origin and destination region indices at `scale`, or kUnknownRegion.
RegionIndex origin_at(const PersonRecord &record, Scale scale);
RegionIndex destination_at(const PersonRecord &record, Scale scale);

} // namespace migedu
