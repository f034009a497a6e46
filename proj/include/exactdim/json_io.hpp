#pragma once

#include <string>

#include "exactdim/cantor.hpp"
#include "exactdim/schedule.hpp"
#include "json.hpp"

// Lossless JSON documents for schedules and trees. Every rational is an
// exact "num/den" string; symbolic powers are factor lists
// {base, exp_num, exp_den}. Doubles appear only in fields suffixed
// "_approx". Documents carry a "schema" tag and parse strictly: unknown or
// missing keys raise ConfigError, so a corrupt file cannot half-load.

namespace exactdim::io {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kSchema = "exactdim/v1";

ojson rat_json(const Rat& x);
Rat rat_from_json(const ojson& j);

ojson power_json(const PowerProduct& p);
PowerProduct power_from_json(const ojson& j);

ojson schedule_json(const schedule::ParameterSchedule& s);
schedule::ParameterSchedule schedule_from_json(const ojson& j);

// The tree document embeds its schedule; the gating report is recomputed
// on load (verification is deterministic, so round-trips are faithful).
ojson tree_json(const cantor::CantorTree& t);
cantor::CantorTree tree_from_json(const ojson& j);

std::string dump(const ojson& j);  // canonical text form, trailing newline

}  // namespace exactdim::io
