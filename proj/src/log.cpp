// Copyright 2026 The specfilter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specfilter/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace specfilter::log {

namespace {

Level initial_level() {
  Level lvl = Level::kWarn;
  if (const char* env = std::getenv("SPECFILTER_LOG")) parse_level(env, lvl);
  return lvl;
}

std::atomic<Level>& current() {
  static std::atomic<Level> lvl{initial_level()};
  return lvl;
}

const char* name(Level lvl) {
  switch (lvl) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    case Level::kOff: return "off";
  }
  return "?";
}

}  // namespace

Level level() { return current().load(); }
void set_level(Level lvl) { current().store(lvl); }

bool parse_level(std::string_view text, Level& out) {
  for (auto lvl : {Level::kDebug, Level::kInfo, Level::kWarn, Level::kError, Level::kOff}) {
    if (text == name(lvl)) {
      out = lvl;
      return true;
    }
  }
  return false;
}

void write(Level lvl, const std::string& msg) {
  if (lvl < level() || lvl == Level::kOff) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << "[specfilter " << name(lvl) << "] " << msg << '\n';
}

}  // namespace specfilter::log
