#include "topictax/log.h"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace topictax::log {
namespace {

Level parse_level() {
  const char* env = std::getenv("TOPICTAX_LOG");
  if (env == nullptr) return Level::kWarn;
  std::string v(env);
  if (v == "error") return Level::kError;
  if (v == "info") return Level::kInfo;
  if (v == "debug") return Level::kDebug;
  return Level::kWarn;
}

constexpr const char* kTags[] = {"error", "warn", "info", "debug"};

}  // namespace

Level level() {
  static const Level lvl = parse_level();
  return lvl;
}

void write(Level lvl, std::string_view msg) {
  if (static_cast<int>(lvl) > static_cast<int>(level())) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << "[topictax " << kTags[static_cast<int>(lvl)] << "] " << msg << '\n';
}

}  // namespace topictax::log
