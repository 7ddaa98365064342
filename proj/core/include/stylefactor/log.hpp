#pragma once

#include <string>

namespace stylefactor::log {

// Thin facade over spdlog so public headers stay dependency-free.
// The level is read once from STYLEFACTOR_LOG (trace|debug|info|warn|error|off).

void Configure();
void SetLevel(const std::string& level);

void Debug(const std::string& message);
void Info(const std::string& message);
void Warn(const std::string& message);

}  // namespace stylefactor::log
