/*
* Copyright (C) 2026 sphcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef SPHCAST_COMMON_HPP
#define SPHCAST_COMMON_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace sphcast {

/// Bad inputs: malformed files, violated preconditions, inconsistent configs.
/// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failures during computation (divergence, I/O after validation, ...).
/// The CLI maps this to exit code 2.
class RuntimeFailure : public std::runtime_error {
public:
    explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-fatal findings collected while parsing/cleaning (clamped negatives,
/// truncated training windows). Callers may print or ignore them.
struct Warning {
    std::string message;
};

using Warnings = std::vector<Warning>;

} // namespace sphcast

#endif
