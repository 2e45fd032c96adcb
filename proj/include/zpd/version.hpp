#pragma once

namespace zpd {

inline constexpr const char* kToolVersion = "1.0.0";
// Bumped whenever the record, selection or refresh-state line formats change.
inline constexpr const char* kSchemaVersion = "zpd-schema/1";
inline constexpr const char* kRefreshStateSchema = "zpd.refresh_state.v1";

}  // namespace zpd
