/*
 * Copyright 2026 The Bytelite Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BYTELITE_TESTS_TEST_UTIL_H_
#define BYTELITE_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <string>

#include "bytelite/bytes.h"
#include "json.hpp"

namespace bytelite::testing {

inline std::filesystem::path DataPath(const std::string& rel) {
  return std::filesystem::path(BYTELITE_TEST_DATA) / rel;
}

inline nlohmann::json ReadJson(const std::string& rel) {
  const Bytes b = ReadFile(DataPath(rel));
  return nlohmann::json::parse(AsChars(b));
}

inline Bytes Fixture(const std::string& name) { return ReadFile(DataPath("fixtures/images/" + name)); }

}  // namespace bytelite::testing

#endif  // BYTELITE_TESTS_TEST_UTIL_H_
