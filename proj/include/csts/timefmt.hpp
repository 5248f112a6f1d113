#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csts/types.hpp"

namespace csts {

enum class TimestampFormat { EpochSeconds, Iso8601 };

std::string_view to_string(TimestampFormat f);
TimestampFormat parse_timestamp_format(std::string_view name);

std::optional<Timestamp> parse_epoch_seconds(std::string_view s);
/// Accepts "YYYY-MM-DDTHH:MM:SSZ" (a space separator is also accepted).
std::optional<Timestamp> parse_iso8601(std::string_view s);
std::string format_iso8601(Timestamp t);

/// First format in `formats` that parses `s` wins.
std::optional<Timestamp> parse_timestamp(std::string_view s,
                                         const std::vector<TimestampFormat>& formats);

}  // namespace csts
