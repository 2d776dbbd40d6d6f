#include "migedu/classify.hpp"

namespace migedu {

namespace {

bool known(RegionIndex r) { return r != kUnknownRegion; }

} // namespace

MoveClass classify_move(const PersonRecord &r) {
    if (known(r.minor_prev) && known(r.minor_now)) {
        if (r.minor_prev == r.minor_now) {
            return MoveClass::Stayer;
        }
        return r.major_prev != r.major_now ? MoveClass::InterMajorMove : MoveClass::IntraMajorMove;
    }
    if (known(r.major_prev) && known(r.major_now)) {
        if (r.major_prev != r.major_now) {
            return MoveClass::InterMajorMove;
        }
        if (!known(r.minor_prev) && !known(r.minor_now)) {
            return MoveClass::Stayer;
        }
    }
    return MoveClass::Unclassifiable;
}

std::optional<bool> migrant_at(const PersonRecord &r, Scale scale) {
    const bool majors_known = known(r.major_prev) && known(r.major_now);
    if (scale == Scale::Major) {
        if (!majors_known) {
            return std::nullopt;
        }
        return r.major_prev != r.major_now;
    }
    if (known(r.minor_prev) && known(r.minor_now)) {
        return r.minor_prev != r.minor_now;
    }
    if (majors_known && r.major_prev != r.major_now) {
        return true;
    }
    return std::nullopt;
}

SettlementFlow classify_settlement_flow(const PersonRecord &r) {
    if (r.urban_prev == Urban::Unknown || r.urban_now == Urban::Unknown) {
        return SettlementFlow::Unknown;
    }
    if (r.urban_prev == Urban::Rural) {
        return r.urban_now == Urban::Rural ? SettlementFlow::RR : SettlementFlow::RU;
    }
    return r.urban_now == Urban::Rural ? SettlementFlow::UR : SettlementFlow::UU;
}

MigrantStatus classify_migrant_status(const PersonRecord &r) {
    const auto migrant = migrant_at(r, Scale::Major);
    if (!migrant || r.urban_now == Urban::Unknown) {
        return MigrantStatus::Unclassifiable;
    }
    const bool urban = r.urban_now == Urban::Urban;
    if (*migrant) {
        return urban ? MigrantStatus::UrbanInMigrant : MigrantStatus::RuralInMigrant;
    }
    return urban ? MigrantStatus::UrbanStayer : MigrantStatus::RuralStayer;
}

RegionIndex origin_at(const PersonRecord &r, Scale scale) {
    return scale == Scale::Minor ? r.minor_prev : r.major_prev;
}

RegionIndex destination_at(const PersonRecord &r, Scale scale) {
    return scale == Scale::Minor ? r.minor_now : r.major_now;
}

} // namespace migedu
